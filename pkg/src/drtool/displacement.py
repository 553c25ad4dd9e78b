"""Minimal displacement vector estimates and the normal problem."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (CONVERGENCE_TOL, DisplacementEstimate, EstimationMethod, ProblemSpec,
                   apply_rows, freeze, make_vector)
from .errors import InsufficientData, NoConvergence
from .prox import resolvent_of_shift_plus, translate_operator_arg

MIN_RECORDS = 10
AGREEMENT_TOL = 5e-3


def _estimate(v, v_d, v_r, method, n_used):
    v, v_d, v_r = freeze(v), freeze(v_d), freeze(v_r)
    resid = float(np.linalg.norm(v - v_d - v_r))
    return DisplacementEstimate(v, v_d, v_r, EstimationMethod(method), resid, int(n_used))


def estimate_v(trace, method=EstimationMethod.LAST_DIFFERENCE) -> DisplacementEstimate:
    """Estimate ``(v, v_D, v_R)`` from a run trace.

    ``last_difference`` reads the increments at the final recorded pair,
    ``tail_average`` averages per-step increments over the last fifth of the
    records, and ``cesaro`` divides the total drift by ``n``.
    """
    method = EstimationMethod(method)
    if len(trace) < MIN_RECORDS:
        raise InsufficientData(f"need at least {MIN_RECORDS} records, have {len(trace)}")
    from .engine import per_step_increments

    n_used = int(trace.n[-1]) + 1
    if method is EstimationMethod.LAST_DIFFERENCE:
        # the last two records are always consecutive iterations
        p, d = trace.p[-2:], trace.d[-2:]
        return _estimate(trace.step_diff[-2], d[0] - d[1], p[0] - p[1], method, n_used)
    if method is EstimationMethod.TAIL_AVERAGE:
        dp = per_step_increments(trace, trace.p)
        dd = per_step_increments(trace, trace.d)
        t = max(1, math.ceil(0.2 * len(dp)))
        v_r, v_d = dp[-t:].mean(axis=0), dd[-t:].mean(axis=0)
        v = trace.step_diff[-t - 1:-1].mean(axis=0)
        return _estimate(v, v_d, v_r, method, n_used)
    n = float(trace.n[-1] - trace.n[0])
    if n <= 0:
        raise InsufficientData("cesaro estimate needs a positive horizon")
    v_r = (trace.p[0] - trace.p[-1]) / n
    v_d = (trace.d[0] - trace.d[-1]) / n
    return _estimate(v_r + v_d, v_d, v_r, method, n_used)


@dataclass
class DecompositionReport:
    inner: float
    sum_gap: float
    norm_gap: float
    passed: bool

    @property
    def status(self) -> str:
        return "converged" if self.passed else "not converged"


def check_orthogonal_decomposition(est: DisplacementEstimate, tol: float = CONVERGENCE_TOL) -> DecompositionReport:
    """Check ``<v_D, v_R> = 0``, ``v = v_D + v_R`` and the Pythagorean split.

    A failure means the estimate has not converged; it is not an error.
    """
    v, vd, vr = (np.asarray(a) for a in (est.v, est.v_d, est.v_r))
    inner = abs(float(vd @ vr))
    sum_gap = float(np.linalg.norm(v - vd - vr))
    norm_gap = abs(float(v @ v - vd @ vd - vr @ vr))
    return DecompositionReport(inner, sum_gap, norm_gap, max(inner, sum_gap, norm_gap) <= tol)


@dataclass
class MethodComparison:
    estimates: dict
    max_disagreement: float
    agreed: bool

    @property
    def status(self) -> str:
        return "converged" if self.agreed else "not converged"


def compare_methods(trace, tol: float = AGREEMENT_TOL) -> MethodComparison:
    """Run all three estimators and report their worst pairwise gap."""
    ests = {m.value: estimate_v(trace, m) for m in EstimationMethod}
    worst = 0.0
    for a, b in itertools.combinations(ests.values(), 2):
        for x, y in ((a.v, b.v), (a.v_d, b.v_d), (a.v_r, b.v_r)):
            worst = max(worst, float(np.max(np.abs(x - y))))
    return MethodComparison(ests, worst, worst <= tol)


@dataclass(frozen=True)
class NormalProblem:
    """``(-v + A, B(. - v))`` built from ``base`` through resolvent algebra."""

    base: ProblemSpec
    v: np.ndarray
    shifted: ProblemSpec


def build_normal_problem(spec: ProblemSpec, v) -> NormalProblem:
    v = make_vector(v)
    if v.size != spec.dim:
        from .errors import DimensionMismatch

        raise DimensionMismatch(f"v has dimension {v.size}, problem has {spec.dim}")
    shifted = ProblemSpec(spec.dim, resolvent_of_shift_plus(spec.op_a, v),
                          translate_operator_arg(spec.op_b, v), spec.start,
                          f"{spec.scenario_name}/normal")
    return NormalProblem(spec, v, shifted)


def dr_map_rows(spec: ProblemSpec, ys) -> np.ndarray:
    """``T`` applied to each row of ``ys``."""
    ys = np.atleast_2d(np.asarray(ys, dtype=np.float64))
    p = apply_rows(spec.op_a, ys)
    return ys - p + apply_rows(spec.op_b, 2.0 * p - ys)


def normal_identity_error(nprob: NormalProblem, samples) -> float:
    """Worst gap between ``T'(y)`` and ``T(y + v)`` over ``samples``."""
    ys = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    lhs = dr_map_rows(nprob.shifted, ys)
    rhs = dr_map_rows(nprob.base, ys + nprob.v)
    return float(np.max(np.abs(lhs - rhs)))


@dataclass
class NormalSolution:
    z: np.ndarray
    mu: Optional[float]
    residual: float
    iterations: int
    residuals: list = field(default_factory=list)


def solve_normal(nprob: NormalProblem, cfg=None, tol: float = CONVERGENCE_TOL) -> NormalSolution:
    """Primal-shadow limit of plain DR on the normal problem.

    The shifted pair is consistent whenever ``Z`` is nonempty, so its step
    differences must vanish; otherwise :class:`NoConvergence` is raised with
    the tail of step-difference norms.
    """
    from .engine import RunConfig, run

    cfg = cfg or RunConfig()
    trace = run(nprob.shifted, cfg)
    norms = np.linalg.norm(trace.step_diff, axis=1)
    resid = float(norms[-1])
    if not resid <= tol:
        raise NoConvergence(f"normal problem step difference {resid:.3e} > {tol:.1e} "
                            f"after {trace.iterations} iterations", residuals=list(norms[-10:]))
    z = freeze(trace.p[-1])
    mu = None
    base = nprob.base
    if base.evaluable:
        mu = float(base.op_a.function(z) + base.op_b.function(z - nprob.v))
    return NormalSolution(z, mu, resid, trace.iterations, list(norms[-10:]))
