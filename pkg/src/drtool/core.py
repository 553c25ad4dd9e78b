"""Shared data model: vectors, operator handles, problems and trace rows.

A vector is a read-only one-dimensional ``float64`` numpy array.  Operators
are carried around through their resolvent ``J_A = (Id + A)^-1``; everything
else (reflection, inversion, shifts) is derived from it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, Empty, NonFinite

IDENTITY_TOL = 1e-10
CONVERGENCE_TOL = 1e-6

Vector = np.ndarray


def make_vector(coords) -> Vector:
    """Build an immutable finite vector from a sequence of reals."""
    arr = np.array(coords, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise Empty("vector needs at least one coordinate")
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"non-finite coordinate in {list(arr)}")
    arr.flags.writeable = False
    return arr


def freeze(arr) -> Vector:
    """Read-only float64 copy of ``arr`` without the finiteness check."""
    out = np.array(arr, dtype=np.float64)
    out.flags.writeable = False
    return out


def check_dim(x, dim: int, what: str = "vector") -> None:
    if np.shape(x)[-1] != dim:
        raise DimensionMismatch(f"{what} has dimension {np.shape(x)[-1]}, expected {dim}")


@dataclass(frozen=True)
class ResolventForm:
    """Closed form ``y -> keep*y + offset + sign*prim.prox(y + pre)``.

    The family is closed under inversion, argument shift and translation,
    which is what lets the compiled kernel run every derived catalog
    operator.  ``keep`` is 0 or 1 and ``sign`` is +1 or -1.
    """

    primitive: object
    keep: float
    sign: float
    offset: np.ndarray
    pre: np.ndarray

    def __call__(self, y):
        out = self.primitive.prox(y + self.pre)
        if self.sign < 0:
            out = -out
        out = out + self.offset
        if self.keep:
            out = out + y
        return out

    def inverted(self) -> "ResolventForm":
        return ResolventForm(self.primitive, 1.0 - self.keep, -self.sign,
                             freeze(-self.offset), self.pre)

    def shifted(self, w) -> "ResolventForm":
        # y -> J(y + w)
        return ResolventForm(self.primitive, self.keep, self.sign,
                             freeze(self.offset + self.keep * w), freeze(self.pre + w))

    def translated(self, v) -> "ResolventForm":
        # y -> v + J(y - v)
        return ResolventForm(self.primitive, self.keep, self.sign,
                             freeze(self.offset + (1.0 - self.keep) * v), freeze(self.pre - v))


@dataclass(frozen=True)
class OperatorHandle:
    """A maximally monotone operator represented by its resolvent.

    ``function`` is present when the operator is the subdifferential of a
    known convex function; it returns ``inf`` outside the domain and accepts
    stacked inputs of shape ``(..., dim)`` when ``batched`` is set.
    """

    resolvent: Callable[[np.ndarray], np.ndarray]
    label: str
    dim: Optional[int] = None
    function: Optional[Callable[[np.ndarray], object]] = None
    form: Optional[ResolventForm] = None
    batched: bool = False

    def __call__(self, y):
        if self.dim is not None:
            check_dim(y, self.dim, f"input of {self.label}")
        return self.resolvent(y)

    @property
    def evaluable(self) -> bool:
        return self.function is not None


def from_form(form: ResolventForm, label: str, dim: int, function=None) -> OperatorHandle:
    return OperatorHandle(resolvent=form, label=label, dim=dim, function=function,
                          form=form, batched=True)


def apply_rows(op: OperatorHandle, ys: np.ndarray) -> np.ndarray:
    """Evaluate a resolvent on each row of ``ys``."""
    ys = np.atleast_2d(ys)
    if op.batched:
        return np.asarray(op.resolvent(ys), dtype=np.float64)
    return np.array([op.resolvent(y) for y in ys], dtype=np.float64)


@dataclass(frozen=True)
class ProblemSpec:
    """Ordered operator pair ``(A, B)`` with a starting point."""

    dim: int
    op_a: OperatorHandle
    op_b: OperatorHandle
    start: Vector
    scenario_name: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionMismatch("dimension must be positive")
        check_dim(self.start, self.dim, "start")
        for op in (self.op_a, self.op_b):
            if op.dim is not None and op.dim != self.dim:
                raise DimensionMismatch(f"operator {op.label} has dim {op.dim}, problem has {self.dim}")

    @property
    def evaluable(self) -> bool:
        return self.op_a.evaluable and self.op_b.evaluable

    def with_start(self, start) -> "ProblemSpec":
        return ProblemSpec(self.dim, self.op_a, self.op_b, make_vector(start), self.scenario_name)


@dataclass(frozen=True)
class IterateRecord:
    """One diagnostic row of a Douglas-Rachford run.

    ``p_n`` and ``q_n`` are the primal shadow and its partner, ``d_n`` and
    ``e_n`` their dual counterparts; ``step_diff`` is ``x_n - x_{n+1}``.
    """

    n: int
    x_n: Vector
    p_n: Vector
    q_n: Vector
    d_n: Vector
    e_n: Vector
    step_diff: Vector
    f_val: float = math.nan
    g_val: float = math.nan
    eps_n: Optional[float] = None
    delta_n: Optional[float] = None

    def identity_errors(self) -> dict:
        return {
            "primal": float(np.max(np.abs(self.p_n - self.q_n - self.step_diff))),
            "dual": float(np.max(np.abs(self.d_n + self.e_n - self.step_diff))),
            "inverse_resolvent": float(np.max(np.abs(self.p_n + self.d_n - self.x_n))),
        }

    def identities_hold(self, tol: float = IDENTITY_TOL) -> bool:
        return max(self.identity_errors().values()) <= tol


class EstimationMethod(str, Enum):
    LAST_DIFFERENCE = "last_difference"
    TAIL_AVERAGE = "tail_average"
    CESARO = "cesaro"


@dataclass(frozen=True)
class DisplacementEstimate:
    v: Vector
    v_d: Vector
    v_r: Vector
    method: EstimationMethod
    residual: float
    iterations_used: int

    @property
    def orthogonality_gap(self) -> float:
        return abs(float(np.dot(self.v_d, self.v_r)))

    def orthogonal(self, tol: float = CONVERGENCE_TOL) -> bool:
        return self.orthogonality_gap <= tol


@dataclass
class FirmNonexpansivenessReport:
    max_violation: float
    passed: bool
    pairs: int


def check_firm_nonexpansiveness(op: OperatorHandle, samples: Sequence, tol: float = IDENTITY_TOL):
    """Check ``|Jx - Jy|^2 <= <Jx - Jy, x - y>`` on every sample pair."""
    worst = -math.inf
    for x, y in samples:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if x.shape != y.shape:
            raise DimensionMismatch(f"sample pair dims differ: {x.shape} vs {y.shape}")
        if op.dim is not None:
            check_dim(x, op.dim)
        jx = np.asarray(op.resolvent(x), dtype=np.float64)
        jy = np.asarray(op.resolvent(y), dtype=np.float64)
        dj = jx - jy
        worst = max(worst, float(dj @ dj - dj @ (x - y)))
    if worst == -math.inf:
        worst = 0.0
    return FirmNonexpansivenessReport(worst, worst <= tol, len(samples))


__all__ = [
    "IDENTITY_TOL", "CONVERGENCE_TOL", "Vector", "make_vector", "freeze", "check_dim",
    "ResolventForm", "OperatorHandle", "from_form", "apply_rows", "ProblemSpec",
    "IterateRecord", "EstimationMethod", "DisplacementEstimate",
    "FirmNonexpansivenessReport", "check_firm_nonexpansiveness",
]
