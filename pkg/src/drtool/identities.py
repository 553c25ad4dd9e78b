"""Pointwise resolvent identities, evaluated on batches of sample points."""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .core import IDENTITY_TOL, OperatorHandle, ProblemSpec, apply_rows
from .prox import inverse_resolvent, reflect, resolvent_of_shift_plus


def seed_from_env(default: int = 0) -> int:
    return int(os.environ.get("DRTOOL_SEED", default))


def sample_points(rng: np.random.Generator, k: int, dim: int, scale: float = 5.0) -> np.ndarray:
    return scale * rng.standard_normal((k, dim))


def inverse_identity_error(op: OperatorHandle, ys) -> float:
    """``max |J_A y + J_{A^-1} y - y|``."""
    inv = inverse_resolvent(op)
    return float(np.max(np.abs(apply_rows(op, ys) + apply_rows(inv, ys) - ys)))


def dr_identity_errors(spec: ProblemSpec, ys) -> tuple:
    """Gaps in ``Id - T = J_A - J_B R_A`` and ``Id - T = J_{A^-1} + J_{B^-1} R_A``."""
    ys = np.atleast_2d(ys)
    a, b = spec.op_a, spec.op_b
    pa = apply_rows(a, ys)
    r = 2.0 * pa - ys
    qb = apply_rows(b, r)
    t = ys - pa + qb
    lhs = ys - t
    primal = np.max(np.abs(lhs - (pa - qb)))
    dual = np.max(np.abs(lhs - (apply_rows(inverse_resolvent(a), ys) + apply_rows(inverse_resolvent(b), r))))
    return float(primal), float(dual)


def shift_lemma_errors(op: OperatorHandle, ys, ws) -> tuple:
    """Gaps in ``J_A y = J_{-w+A}(-w+y)`` and ``J_{A^-1} y = w + J_{(-w+A)^-1}(-w+y)``.

    Row ``k`` of ``ws`` shifts the operator applied to row ``k`` of ``ys``.
    Catalog operators take all shifts at once through their resolvent form;
    other handles get one shifted handle per row.
    """
    ys, ws = np.atleast_2d(ys), np.atleast_2d(ws)
    inv = apply_rows(inverse_resolvent(op), ys)
    direct = apply_rows(op, ys)
    if op.form is not None:
        sh = op.form.shifted(ws)
        lhs = sh(ys - ws)
        rhs = ws + sh.inverted()(ys - ws)
    else:
        lhs, rhs = np.empty_like(ys), np.empty_like(ys)
        for k, (y, w) in enumerate(zip(ys, ws)):
            h = resolvent_of_shift_plus(op, w)
            lhs[k] = h.resolvent(y - w)
            rhs[k] = w + inverse_resolvent(h).resolvent(y - w)
    return float(np.max(np.abs(lhs - direct))), float(np.max(np.abs(rhs - inv)))


def reflection_expansion(op: OperatorHandle, xs, ys) -> float:
    """``max(|Rx - Ry| - |x - y|)``; nonpositive for a nonexpansive reflection."""
    R = reflect(op)
    worst = -np.inf
    for x, y in zip(xs, ys):
        worst = max(worst, float(np.linalg.norm(R(x) - R(y)) - np.linalg.norm(x - y)))
    return worst


@dataclass
class IdentityReport:
    errors: dict
    tol: float

    @property
    def passed(self) -> bool:
        return all(e <= self.tol for e in self.errors.values())


def identity_suite(spec: ProblemSpec, k: int, rng: np.random.Generator,
                   tol: float = IDENTITY_TOL) -> IdentityReport:
    """All pointwise identities on ``k`` random points for one operator pair."""
    ys = sample_points(rng, k, spec.dim)
    ws = sample_points(rng, k, spec.dim)
    errs = {
        "inverse_A": inverse_identity_error(spec.op_a, ys),
        "inverse_B": inverse_identity_error(spec.op_b, ys),
    }
    errs["id_minus_T_primal"], errs["id_minus_T_dual"] = dr_identity_errors(spec, ys)
    for name, op in (("A", spec.op_a), ("B", spec.op_b)):
        p, d = shift_lemma_errors(op, ys, ws)
        errs[f"shift_{name}"], errs[f"shift_inverse_{name}"] = p, d
    return IdentityReport(errs, tol)
