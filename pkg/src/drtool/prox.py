"""Closed-form resolvents for the catalog operator families.

Every primitive works on a single vector or on a stack of shape
``(..., m)``.  Operators built here carry a :class:`~drtool.core.ResolventForm`
so that the compiled kernel can iterate them; the derived algebra
(shift, translation, inversion) keeps that form intact.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (OperatorHandle, ResolventForm, check_dim, freeze, from_form,
                   make_vector)
from .errors import DimensionMismatch, InvalidParams, NegativeBound

# Membership slack for indicator functions; projections land on the
# boundary only up to rounding.
DOMAIN_TOL = 1e-9

KIND_IDENTITY = 0
KIND_HALFSPACE = 1
KIND_BOX = 2
KIND_TRANSLATED_CONE = 3
KIND_AFFINE = 4
KIND_L1_BOX = 5


def _indicator(ok):
    return np.where(ok, 0.0, np.inf) if np.ndim(ok) else (0.0 if ok else np.inf)


@dataclass(frozen=True)
class IdentityPrimitive:
    """Resolvent of the zero operator (``f = 0``)."""

    dim: int
    kind = KIND_IDENTITY

    def prox(self, x):
        return np.array(x, dtype=np.float64)

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0


@dataclass(frozen=True)
class HalfspaceSet:
    """``{x : <x, u> <= eta}``."""

    u: np.ndarray
    eta: float
    kind = KIND_HALFSPACE

    def __post_init__(self):
        object.__setattr__(self, "u", make_vector(self.u))
        object.__setattr__(self, "eta", float(self.eta))
        if not np.any(self.u):
            raise InvalidParams("half-space normal must be nonzero")

    @property
    def dim(self):
        return self.u.size

    @property
    def unorm2(self):
        return float(self.u @ self.u)

    def prox(self, x):
        x = np.asarray(x, dtype=np.float64)
        d = x @ self.u
        step = np.where(d > self.eta, (self.eta - d) / self.unorm2, 0.0)
        return x + np.multiply.outer(step, self.u)

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        slack = DOMAIN_TOL * max(1.0, abs(self.eta), np.sqrt(self.unorm2))
        return _indicator(x @ self.u <= self.eta + slack * (1 + np.linalg.norm(x, axis=-1)))


@dataclass(frozen=True)
class BoxSet:
    """``{x : lo <= x <= hi}`` with infinite bounds allowed."""

    lo: np.ndarray
    hi: np.ndarray
    kind = KIND_BOX

    def __post_init__(self):
        lo = freeze(np.asarray(self.lo, dtype=np.float64).reshape(-1))
        hi = freeze(np.asarray(self.hi, dtype=np.float64).reshape(-1))
        if lo.shape != hi.shape:
            raise DimensionMismatch("box bounds differ in length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise InvalidParams("box needs lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def symmetric(cls, c):
        c = np.asarray(c, dtype=np.float64)
        return cls(-c, c)

    @property
    def dim(self):
        return self.lo.size

    def prox(self, x):
        return np.minimum(np.maximum(np.asarray(x, dtype=np.float64), self.lo), self.hi)

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        slack = DOMAIN_TOL * (1 + np.abs(x))
        ok = np.all((x >= self.lo - slack) & (x <= self.hi + slack), axis=-1)
        return _indicator(ok)


@dataclass(frozen=True)
class TranslatedConeSet:
    """``anchor + K`` where ``K`` is the nonnegative ray along ``axis``."""

    anchor: np.ndarray
    axis: int = 0
    kind = KIND_TRANSLATED_CONE

    def __post_init__(self):
        object.__setattr__(self, "anchor", make_vector(self.anchor))
        if not 0 <= self.axis < self.anchor.size:
            raise InvalidParams(f"axis {self.axis} out of range")

    @property
    def dim(self):
        return self.anchor.size

    def as_box(self) -> BoxSet:
        lo = self.anchor.copy()
        hi = self.anchor.copy()
        hi[self.axis] = np.inf
        return BoxSet(lo, hi)

    def prox(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.broadcast_to(self.anchor, x.shape).copy()
        a = self.anchor[self.axis]
        out[..., self.axis] = a + np.maximum(x[..., self.axis] - a, 0.0)
        return out

    def value(self, x):
        return self.as_box().value(x)


@dataclass(frozen=True)
class AffineSubspaceSet:
    """``basepoint + span(basis)`` for an orthonormal basis (possibly empty)."""

    basepoint: np.ndarray
    basis: np.ndarray
    kind = KIND_AFFINE

    def __post_init__(self):
        base = make_vector(self.basepoint)
        basis = np.asarray(self.basis, dtype=np.float64).reshape(-1, base.size)
        gram = basis @ basis.T
        if not np.allclose(gram, np.eye(basis.shape[0]), atol=1e-12, rtol=0):
            raise InvalidParams("affine basis must be orthonormal")
        object.__setattr__(self, "basepoint", base)
        object.__setattr__(self, "basis", freeze(basis))

    @property
    def dim(self):
        return self.basepoint.size

    def prox(self, x):
        # row-by-row accumulation keeps the rounding identical to the compiled kernel
        x = np.asarray(x, dtype=np.float64)
        diff = x - self.basepoint
        out = np.broadcast_to(self.basepoint, x.shape).copy()
        for row in self.basis:
            out = out + np.multiply.outer((diff * row).sum(-1), row)
        return out

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        gap = np.linalg.norm(self.prox(x) - x, axis=-1)
        return _indicator(gap <= DOMAIN_TOL * (1 + np.linalg.norm(x, axis=-1)))


@dataclass(frozen=True)
class L1BoxPrimitive:
    """``g = ||.||_1 + indicator of [-c, c]``, ``c`` in ``[0, inf]^m``."""

    c: np.ndarray
    kind = KIND_L1_BOX

    def __post_init__(self):
        c = freeze(np.asarray(self.c, dtype=np.float64).reshape(-1))
        if np.any(np.isnan(c)):
            raise InvalidParams("NaN bound")
        if np.any(c < 0):
            raise NegativeBound(f"l1-box bounds must be >= 0, got {list(c)}")
        object.__setattr__(self, "c", c)

    @property
    def dim(self):
        return self.c.size

    def prox(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.minimum(np.maximum(np.abs(x) - 1.0, 0.0), self.c) * np.sign(x)

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        box = BoxSet(-self.c, self.c).value(x)
        return np.abs(x).sum(axis=-1) + box


# -- point evaluations -------------------------------------------------------

def _matching(x, dim):
    x = np.asarray(x, dtype=np.float64)
    check_dim(x, dim)
    return x


def project_halfspace(x, hs: HalfspaceSet):
    return hs.prox(_matching(x, hs.dim))


def project_box(x, box: BoxSet):
    return box.prox(_matching(x, box.dim))


def prox_l1_box(x, c):
    """Prox of ``||.||_1 + indicator[-c, c]``: clamp of the unit soft-threshold."""
    prim = L1BoxPrimitive(c)
    return prim.prox(_matching(x, prim.dim))


def project_translated_cone(x, tc: TranslatedConeSet):
    return tc.prox(_matching(x, tc.dim))


def project_affine(x, asub: AffineSubspaceSet):
    return asub.prox(_matching(x, asub.dim))


# -- operator handles --------------------------------------------------------

def _zeros(m):
    return freeze(np.zeros(m))


def operator_from_primitive(prim, label: str) -> OperatorHandle:
    m = prim.dim
    form = ResolventForm(prim, 0.0, 1.0, _zeros(m), _zeros(m))
    return from_form(form, label, m, prim.value)


def halfspace_operator(u, eta) -> OperatorHandle:
    hs = HalfspaceSet(u, eta)
    return operator_from_primitive(hs, f"N_halfspace(u={list(hs.u)}, eta={hs.eta})")


def box_operator(lo, hi) -> OperatorHandle:
    box = BoxSet(lo, hi)
    return operator_from_primitive(box, "N_box")


def translated_cone_operator(anchor, axis=0) -> OperatorHandle:
    return operator_from_primitive(TranslatedConeSet(anchor, axis), f"N_cone(axis={axis})")


def affine_operator(basepoint, basis) -> OperatorHandle:
    return operator_from_primitive(AffineSubspaceSet(basepoint, basis), "N_affine")


def point_operator(a) -> OperatorHandle:
    a = make_vector(a)
    return operator_from_primitive(AffineSubspaceSet(a, np.zeros((0, a.size))), "N_point")


def l1_box_operator(c) -> OperatorHandle:
    return operator_from_primitive(L1BoxPrimitive(c), "subdiff_l1_box")


def zero_operator(dim: int) -> OperatorHandle:
    return operator_from_primitive(IdentityPrimitive(dim), "zero")


def linear_operator(w) -> OperatorHandle:
    """Constant operator ``w`` = gradient of ``<w, .>``; resolvent ``y - w``."""
    w = make_vector(w)
    return resolvent_of_shift_plus(zero_operator(w.size), -w)


def wrap_resolvent(resolvent, label: str, dim=None, function=None) -> OperatorHandle:
    """Handle for a user-supplied resolvent (runs on the pure-Python path)."""
    return OperatorHandle(resolvent=resolvent, label=label, dim=dim, function=function)


# -- derived algebra ---------------------------------------------------------

def _vec_for(op, w, what):
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    if op.dim is not None:
        check_dim(w, op.dim, what)
    return freeze(w)


def resolvent_of_shift_plus(op: OperatorHandle, w) -> OperatorHandle:
    """Handle for ``-w + A``, whose resolvent is ``y -> J_A(y + w)``."""
    w = _vec_for(op, w, "shift")
    fn = None
    if op.function is not None:
        f = op.function
        fn = lambda x: f(x) - np.asarray(x) @ w  # noqa: E731
    label = f"(-w+{op.label})"
    if op.form is not None:
        return from_form(op.form.shifted(w), label, op.dim, fn)
    J = op.resolvent
    return OperatorHandle(lambda y: J(y + w), label, op.dim, fn, None, op.batched)


def add_vector(op: OperatorHandle, b) -> OperatorHandle:
    """Handle for ``b + A``."""
    return resolvent_of_shift_plus(op, -np.asarray(b, dtype=np.float64))


def translate_operator_arg(op: OperatorHandle, v) -> OperatorHandle:
    """Handle for ``A(. - v)``, whose resolvent is ``y -> v + J_A(y - v)``."""
    v = _vec_for(op, v, "translation")
    fn = None
    if op.function is not None:
        f = op.function
        fn = lambda x: f(np.asarray(x) - v)  # noqa: E731
    label = f"{op.label}(.-v)"
    if op.form is not None:
        return from_form(op.form.translated(v), label, op.dim, fn)
    J = op.resolvent
    return OperatorHandle(lambda y: v + J(y - v), label, op.dim, fn, None, op.batched)


def inverse_resolvent(op: OperatorHandle) -> OperatorHandle:
    """Handle for ``A^-1``: resolvent ``Id - J_A``."""
    label = f"({op.label})^-1"
    if op.form is not None:
        return from_form(op.form.inverted(), label, op.dim, None)
    J = op.resolvent
    return OperatorHandle(lambda y: y - J(y), label, op.dim, None, None, op.batched)


def reflect(op: OperatorHandle):
    J = op.resolvent
    return lambda y: 2.0 * J(y) - y
