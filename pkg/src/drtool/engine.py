"""Douglas-Rachford iteration with shadow tracking and online diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from . import backend
from ._pykernel import STATUS_NONFINITE, STATUS_STOPPED
from .core import (CONVERGENCE_TOL, IDENTITY_TOL, DisplacementEstimate, IterateRecord,
                   ProblemSpec, check_dim, freeze, make_vector)
from .errors import (DimensionMismatch, InsufficientData, InvalidParams, MissingFunction,
                     MissingTestPoint, NonFinite, NotAFixedPoint)

FEJER_SLACK = 1e-9


@dataclass(frozen=True)
class RunConfig:
    """Budget and bookkeeping for one run.

    ``stop_tol=None`` disables early stopping.  ``test_point`` and
    ``reference_v`` feed the prox-lemma monitors; when ``reference_v`` is
    absent the run's own displacement estimate is used.
    """

    max_iters: int = 10_000
    stop_tol: Optional[float] = 1e-12
    record_every: int = 1
    min_iters: int = 20
    anchor: Optional[np.ndarray] = None
    test_point: Optional[np.ndarray] = None
    reference_v: Optional[np.ndarray] = None
    backend: Optional[str] = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidParams("max_iters must be >= 1")
        if self.record_every < 1:
            raise InvalidParams("record_every must be >= 1")
        for name in ("anchor", "test_point", "reference_v"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, make_vector(val))


@dataclass
class RunTrace:
    """Column-oriented trace; ``records`` gives the row view.

    Row ``k`` describes iteration ``n[k]``: ``x`` is ``T^n x_0``, ``x_next``
    is ``T^{n+1} x_0``, ``p`` and ``q`` the primal shadow and its partner.
    """

    spec: ProblemSpec
    n: np.ndarray
    x: np.ndarray
    x_next: np.ndarray
    p: np.ndarray
    q: np.ndarray
    f_val: np.ndarray
    g_val: np.ndarray
    iterations: int
    status: int
    backend: str
    eps: Optional[np.ndarray] = None
    delta: Optional[np.ndarray] = None
    final_estimate: Optional[DisplacementEstimate] = None
    limit_primal: Optional[np.ndarray] = None
    limit_value: Optional[float] = None
    extras: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.n)

    @property
    def d(self):
        return self.x - self.p

    @property
    def e(self):
        return 2.0 * self.p - self.x - self.q

    @property
    def step_diff(self):
        return self.x - self.x_next

    @property
    def stopped_early(self) -> bool:
        return self.status == STATUS_STOPPED

    def governing_shifted(self, v) -> np.ndarray:
        """``x_n + n v``: the bounded companion of the diverging governing sequence."""
        return self.x + np.multiply.outer(self.n, np.asarray(v, dtype=np.float64))

    @cached_property
    def records(self) -> list:
        d, e, sd = self.d, self.e, self.step_diff
        out = []
        for k, n in enumerate(self.n):
            out.append(IterateRecord(
                n=int(n), x_n=freeze(self.x[k]), p_n=freeze(self.p[k]), q_n=freeze(self.q[k]),
                d_n=freeze(d[k]), e_n=freeze(e[k]), step_diff=freeze(sd[k]),
                f_val=float(self.f_val[k]), g_val=float(self.g_val[k]),
                eps_n=None if self.eps is None else float(self.eps[k]),
                delta_n=None if self.delta is None else float(self.delta[k]),
            ))
        return out

    def identity_errors(self) -> dict:
        sd = self.step_diff
        return {
            "primal": float(np.max(np.abs(self.p - self.q - sd), initial=0.0)),
            "dual": float(np.max(np.abs(self.d + self.e - sd), initial=0.0)),
            "inverse_resolvent": float(np.max(np.abs(self.p + self.d - self.x), initial=0.0)),
        }


def dr_step(spec: ProblemSpec, x) -> np.ndarray:
    """One application of ``T = Id - J_A + J_B R_A``."""
    x = np.asarray(x, dtype=np.float64)
    check_dim(x, spec.dim)
    p = spec.op_a.resolvent(x)
    return x - p + spec.op_b.resolvent(2.0 * p - x)


def _evaluate(fn, rows):
    if fn is None:
        return np.full(len(rows), math.nan)
    try:
        vals = np.asarray(fn(rows), dtype=np.float64)
        if vals.shape == (len(rows),):
            return vals
    except Exception:  # scalar-only user function
        pass
    return np.array([float(fn(r)) for r in rows])


def prox_monitors(trace: RunTrace, test_point, v):
    """The two prox-lemma sequences along the trace.

    ``eps_n = <y - q_n - v, p_n - q_n - v>`` and
    ``delta_n = <p_n - q_n - v, p_n - (x_n + n v)>``.
    """
    y = np.asarray(test_point, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    gap = trace.p - trace.q - v
    eps = np.einsum("ij,ij->i", y - trace.q - v, gap)
    delta = np.einsum("ij,ij->i", gap, trace.p - trace.governing_shifted(v))
    return eps, delta


def run(spec: ProblemSpec, cfg: RunConfig = RunConfig()) -> RunTrace:
    """Iterate ``x_{n+1} = T x_n`` from ``spec.start`` and collect the trace."""
    X, P, Q, status, used = backend.iterate(spec.op_a, spec.op_b, spec.start, cfg.max_iters,
                                            cfg.stop_tol, cfg.min_iters, cfg.backend)
    if status == STATUS_NONFINITE:
        raise NonFinite(f"iterate {len(X) - 1} is not finite", index=len(X) - 1)
    steps = len(P)
    keep = set(range(0, steps, cfg.record_every)) | {k for k in (steps - 2, steps - 1) if k >= 0}
    idx = np.array(sorted(keep), dtype=np.int64)
    p, q = P[idx], Q[idx]
    trace = RunTrace(
        spec=spec, n=idx, x=X[idx], x_next=X[idx + 1], p=p, q=q,
        f_val=_evaluate(spec.op_a.function, p), g_val=_evaluate(spec.op_b.function, q),
        iterations=steps, status=status, backend=used,
    )
    from .displacement import MIN_RECORDS, estimate_v

    if len(trace) >= MIN_RECORDS:
        trace.final_estimate = estimate_v(trace)
    trace.limit_primal = freeze(trace.p[-1])
    if spec.evaluable:
        trace.limit_value = float(trace.f_val[-1] + trace.g_val[-1])
    if cfg.test_point is not None:
        v = cfg.reference_v
        if v is None and trace.final_estimate is not None:
            v = trace.final_estimate.v
        if v is not None:
            trace.eps, trace.delta = prox_monitors(trace, cfg.test_point, v)
    return trace


def _tail(k: int) -> int:
    return max(1, math.ceil(0.2 * k))


def per_step_increments(trace: RunTrace, seq: np.ndarray) -> np.ndarray:
    """``seq_n - seq_{n+1}`` per iteration, from consecutive records."""
    gaps = np.diff(trace.n).astype(np.float64)
    return (seq[:-1] - seq[1:]) / gaps[:, None]


@dataclass
class RegularityReport:
    primal_regular: bool
    dual_regular: bool
    primal_tail: float
    dual_tail: float
    consistent_with_estimate: Optional[bool]


def asymptotic_regularity_report(trace: RunTrace, tol: float = CONVERGENCE_TOL) -> RegularityReport:
    """Decide whether the primal and dual shadows are asymptotically regular.

    The primal shadows are regular exactly when ``v_R = 0`` and the dual
    shadows exactly when ``v_D = 0``; the verdict is cross-checked against
    the trace's displacement estimate when it has one.
    """
    if len(trace) < 2:
        raise InsufficientData("need at least two records")
    dp = per_step_increments(trace, trace.p)
    dd = per_step_increments(trace, trace.d)
    t = _tail(len(dp))
    ptail = float(np.max(np.linalg.norm(dp[-t:], axis=1)))
    dtail = float(np.max(np.linalg.norm(dd[-t:], axis=1)))
    primal, dual = ptail <= tol, dtail <= tol
    agree = None
    est = trace.final_estimate
    if est is not None:
        agree = (primal == (np.linalg.norm(est.v_r) <= tol)) and (dual == (np.linalg.norm(est.v_d) <= tol))
    return RegularityReport(primal, dual, ptail, dtail, agree)


@dataclass
class FejerReport:
    distances: np.ndarray
    monotone: bool
    max_increase: float


def fejer_target_from_anchor(spec: ProblemSpec, anchor_f):
    """Target pair ``(J_A f, J_{A^-1} f)`` for a generalized fixed point ``f``."""
    f = np.asarray(anchor_f, dtype=np.float64)
    z = spec.op_a.resolvent(f)
    return freeze(z), freeze(f - z)


def fejer_monitor(trace: RunTrace, v_d, v_r, target, slack: float = FEJER_SLACK) -> FejerReport:
    """Distances of ``(p_n + n v_R, d_n + n v_D)`` to ``target`` in the product norm."""
    if len(trace) < 2:
        raise InsufficientData("need at least two records")
    z, k = (np.asarray(t, dtype=np.float64) for t in target)
    v_d = np.asarray(v_d, dtype=np.float64)
    v_r = np.asarray(v_r, dtype=np.float64)
    for vec in (z, k, v_d, v_r):
        if vec.shape != (trace.spec.dim,):
            raise DimensionMismatch("target and drift vectors must match the problem dimension")
    n = trace.n.astype(np.float64)
    prim = trace.p + np.multiply.outer(n, v_r) - z
    dual = trace.d + np.multiply.outer(n, v_d) - k
    rho = np.sqrt(np.sum(prim**2, axis=1) + np.sum(dual**2, axis=1))
    inc = float(np.max(np.diff(rho), initial=-math.inf))
    return FejerReport(rho, bool(inc <= slack), inc)


@dataclass
class AnchoredReport:
    fixed_point_residual: float
    governing_error: float
    primal_error: float
    dual_error: float
    passed: bool


def anchored_shadow_check(spec: ProblemSpec, anchor_f, v, v_d, v_r, n_max: int,
                          tol: float = IDENTITY_TOL, backend_name=None) -> AnchoredReport:
    """Verify the exact linear drifts from a point ``f`` with ``T f = f - v``.

    Errors are reported as ratios to the allowed ``max(n, 1) * tol``, so a
    value at most 1 means the identity holds.
    """
    f = make_vector(anchor_f)
    v, v_d, v_r = (np.asarray(a, dtype=np.float64) for a in (v, v_d, v_r))
    resid = float(np.linalg.norm(f - v - dr_step(spec, f)))
    if resid > tol:
        raise NotAFixedPoint(f"|f - v - Tf| = {resid:.3e} exceeds {tol:.1e}")
    X, P, _, _, _ = backend.iterate(spec.op_a, spec.op_b, f, max(n_max, 1), None, 0, backend_name)
    n = np.arange(len(X), dtype=np.float64)
    scale = np.maximum(n, 1.0) * tol
    gov = np.max(np.abs(X - (f - np.multiply.outer(n, v))), axis=1) / scale
    pf = spec.op_a.resolvent(f)
    df = f - pf
    m = len(P)
    prim = np.max(np.abs(P - (pf - np.multiply.outer(n[:m], v_r))), axis=1) / scale[:m]
    dual = np.max(np.abs((X[:m] - P) - (df - np.multiply.outer(n[:m], v_d))), axis=1) / scale[:m]
    g, pe, de = float(gov[: n_max + 1].max()), float(prim.max()), float(dual.max())
    return AnchoredReport(resid, g, pe, de, max(g, pe, de) <= 1.0)


@dataclass
class ValueReport:
    values: np.ndarray
    eps: np.ndarray
    delta: np.ndarray
    converged_value: float
    value_tail_spread: float
    eps_tail: float
    delta_tail: float


def value_monitor(trace: RunTrace, test_point=None, v=None) -> ValueReport:
    """Track ``f(p_n) + g(q_n)`` and the prox-lemma monitors along a trace."""
    if not trace.spec.evaluable:
        raise MissingFunction("both operators need evaluable functions")
    eps, delta = trace.eps, trace.delta
    if test_point is not None:
        if v is None:
            if trace.final_estimate is None:
                raise InsufficientData("no displacement estimate to centre the monitors")
            v = trace.final_estimate.v
        eps, delta = prox_monitors(trace, test_point, v)
    if eps is None:
        raise MissingTestPoint("a test point y in dom f and v + dom g is required")
    values = trace.f_val + trace.g_val
    t = _tail(len(values))
    tail = values[-t:]
    return ValueReport(
        values=values, eps=eps, delta=delta, converged_value=float(values[-1]),
        value_tail_spread=float(np.max(tail) - np.min(tail)),
        eps_tail=float(np.max(np.abs(eps[-t:]))), delta_tail=float(np.max(np.abs(delta[-t:]))),
    )


def divergence_constant(trace: RunTrace, v_r) -> float:
    """``max_n |p_n + n v_R|``: the constant in ``|p_N| >= N |v_R| - C``."""
    v_r = np.asarray(v_r, dtype=np.float64)
    return float(np.max(np.linalg.norm(trace.p + np.multiply.outer(trace.n, v_r), axis=1)))
