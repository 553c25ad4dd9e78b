"""Independent ground truth for the catalog examples.

Closed forms come from the worked examples; :func:`grid_minimize` is a
brute-force check of ``argmin f(x) + g(x - v)`` that shares no code with the
iteration engine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import OperatorHandle, freeze, make_vector
from .errors import (AllInfinite, InvalidParams, NotInSubspace, NotOrthogonal,
                     UnsupportedSet)
from .prox import (KIND_AFFINE, KIND_BOX, KIND_HALFSPACE, KIND_IDENTITY, KIND_L1_BOX,
                   KIND_TRANSLATED_CONE, AffineSubspaceSet)

MEMBER_TOL = 1e-9


# -- shifted cones --------------------------------------------------------------

@dataclass(frozen=True)
class ConeExampleParams:
    """``A = N_{a+K}``, ``B = b + N_K`` with ``K = R_+ x {0}``, ``a = (alpha, beta)``, ``b = (gamma, delta)``."""

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.gamma, self.delta)
        if not all(math.isfinite(x) for x in vals):
            raise InvalidParams("cone parameters must be finite")
        if not self.gamma < 0:
            raise InvalidParams(f"gamma must be negative, got {self.gamma}")

    @property
    def a(self):
        return make_vector([self.alpha, self.beta])

    @property
    def b(self):
        return make_vector([self.gamma, self.delta])


@dataclass(frozen=True)
class ConeTruth:
    v_d: np.ndarray
    v_r: np.ndarray
    v: np.ndarray
    z_left: float
    z_level: float
    ztilde_left: float
    ztilde_level: float
    strict_inclusion: bool
    anchor: np.ndarray

    def in_z(self, x, tol=MEMBER_TOL) -> bool:
        return bool(x[0] >= self.z_left - tol and abs(x[1] - self.z_level) <= tol)

    def in_ztilde(self, x, tol=MEMBER_TOL) -> bool:
        return bool(x[0] >= self.ztilde_left - tol and abs(x[1] - self.ztilde_level) <= tol)


def cone_example_truth(p: ConeExampleParams) -> ConeTruth:
    v_d = freeze([0.0, p.beta])
    v_r = freeze([p.gamma, 0.0])
    z_left = max(p.gamma, p.alpha)
    # any x0 + v with x0 in Z and first coordinate beyond both kinks is fixed by v + T
    anchor = freeze([z_left + 1.0, p.beta])
    return ConeTruth(v_d, v_r, freeze(v_d + v_r), z_left, p.beta, max(0.0, p.alpha), p.beta,
                     p.alpha < 0, anchor)


def _interval_normal(t, lo, hi, tol):
    """Normal cone of ``[lo, hi]`` at ``t`` as a closed interval, or None off the set."""
    if t < lo - tol or t > hi + tol:
        return None
    at_lo, at_hi = abs(t - lo) <= tol, abs(t - hi) <= tol
    return (-math.inf if at_lo else 0.0, math.inf if at_hi else 0.0)


def box_inclusion_holds(x, w, boxes, tol=MEMBER_TOL) -> bool:
    """Whether ``0 in w + sum_j N_{box_j}(x - s_j)`` for ``boxes = [(lo, hi, s), ...]``.

    Normal cones of boxes split by coordinate, so the sum is a product of
    intervals and the inclusion is checked coordinate by coordinate.
    """
    for i, wi in enumerate(w):
        lo_sum = hi_sum = 0.0
        for lo, hi, s in boxes:
            iv = _interval_normal(x[i] - s[i], lo[i], hi[i], tol)
            if iv is None:
                return False
            lo_sum += iv[0]
            hi_sum += iv[1]
        if not (lo_sum - tol <= -wi <= hi_sum + tol):
            return False
    return True


@dataclass
class InclusionReport:
    z_members: int
    ztilde_members: int
    subset: bool
    strict: bool
    agrees_with_closed_form: bool


def certify_cone_inclusion(p: ConeExampleParams, spacing: float = 0.05) -> InclusionReport:
    """Grid check of ``Z~ in Z`` for the shifted-cone example.

    ``Z`` solves ``0 in (b - v) + N_{a+K}(x) + N_K(x - v)`` and ``Z~`` solves
    ``0 in (b - v_R) + N_{a+K}(x) + N_K(x - v_D)``; both are decided directly
    from normal cones, independent of the closed forms.
    """
    t = cone_example_truth(p)
    a, b = np.asarray(p.a), np.asarray(p.b)
    lo_k, hi_k = np.array([0.0, 0.0]), np.array([math.inf, 0.0])
    x1 = np.arange(math.floor(min(p.alpha, p.gamma, 0.0)) - 2.0,
                   math.ceil(max(p.alpha, 0.0)) + 2.0 + spacing / 2, spacing)
    x2 = p.beta + np.arange(-1.0, 1.0 + spacing / 2, spacing)
    z_pts, zt_pts = set(), set()
    agree = True
    for i, s in enumerate(x1):
        for j, r in enumerate(x2):
            x = np.array([s, r])
            in_z = box_inclusion_holds(x, b - t.v, [(a + lo_k, a + hi_k, np.zeros(2)), (lo_k, hi_k, t.v)])
            in_zt = box_inclusion_holds(x, b - t.v_r, [(a + lo_k, a + hi_k, np.zeros(2)), (lo_k, hi_k, t.v_d)])
            if in_z:
                z_pts.add((i, j))
            if in_zt:
                zt_pts.add((i, j))
            agree &= (in_z == t.in_z(x)) and (in_zt == t.in_ztilde(x))
    return InclusionReport(len(z_pts), len(zt_pts), zt_pts <= z_pts, bool(z_pts - zt_pts), agree)


# -- affine subspaces -----------------------------------------------------------

@dataclass(frozen=True)
class AffineTruth:
    v_d: np.ndarray
    v_r: np.ndarray
    v: np.ndarray
    subspace: AffineSubspaceSet
    anchor: np.ndarray

    def in_z(self, x, tol=MEMBER_TOL) -> bool:
        """Membership in ``Z = a + U``."""
        x = np.asarray(x, dtype=np.float64)
        return bool(np.linalg.norm(self.subspace.prox(x) - x) <= tol * (1 + np.linalg.norm(x)))


def affine_example_truth(asub: AffineSubspaceSet, a, b, tol: float = 1e-10) -> AffineTruth:
    """``(A, B) = (N_{a+U}, b + N_U)`` with ``a`` in ``U^perp`` and ``b`` in ``U``.

    ``asub`` supplies ``U`` through its basis; its basepoint is ignored.
    """
    a, b = make_vector(a), make_vector(b)
    basis = asub.basis
    if np.linalg.norm(basis @ a) > tol:
        raise NotOrthogonal("a must be orthogonal to U")
    if np.linalg.norm(b - (b @ basis.T) @ basis) > tol:
        raise NotInSubspace("b must lie in U")
    v = freeze(a + b)
    # T x = x - (a + b) everywhere, so every point is an anchor
    return AffineTruth(a, b, v, AffineSubspaceSet(a, basis), v)


# -- half-space and l1-box --------------------------------------------------------

@dataclass(frozen=True)
class HalfspaceL1Truth:
    v_d: np.ndarray
    v_r: np.ndarray
    v: np.ndarray
    feasible: bool
    z_bar: np.ndarray
    mu: float
    z_unique: bool
    anchor: Optional[np.ndarray]


def halfspace_l1_truth(u, eta, c) -> HalfspaceL1Truth:
    """``f`` = indicator of ``<x, u> <= eta``, ``g = ||.||_1 + indicator[-c, c]``.

    ``B - C`` is the half-space ``<x, u> <= eta + h`` with ``h = sum c_i |u_i|``,
    so ``v`` is the projection of 0 onto it.  When it is nonzero the shifted
    problem pins every coordinate with ``u_i != 0`` to ``v_i - c_i sign(u_i)``.
    """
    u = make_vector(u)
    c = np.asarray(c, dtype=np.float64).reshape(-1)
    eta = float(eta)
    if u.shape != c.shape:
        raise InvalidParams("u and c differ in length")
    if not np.any(u):
        raise InvalidParams("u must be nonzero")
    if np.any(c < 0) or not np.all(np.isfinite(c)) or not math.isfinite(eta):
        raise InvalidParams("need finite c >= 0 and finite eta")
    h = float(c @ np.abs(u))
    un2 = float(u @ u)
    nz = u != 0
    if eta + h >= 0:
        v = np.zeros_like(u)
        z, mu, unique = _l1_knapsack(u, eta, c)
        return HalfspaceL1Truth(freeze(v), freeze(v), freeze(v), True, freeze(z), mu, unique, None)
    v = (eta + h) / un2 * u
    z = v.copy()
    z[nz] = v[nz] - c[nz] * np.sign(u[nz])
    mu = float(c[nz].sum())
    kappa = -(eta + h) / un2
    t = max(0.0, 1.0 / float(np.min(np.abs(u[nz]))) - kappa)
    anchor = z + t * u
    return HalfspaceL1Truth(freeze(v), freeze(np.zeros_like(u)), freeze(v), False, freeze(z),
                            mu, True, freeze(anchor))


def _l1_knapsack(u, eta, c):
    """``min ||y||_1`` over ``<y, u> <= eta``, ``|y| <= c`` (feasible case)."""
    z = np.zeros_like(u)
    if eta >= 0:
        return z, 0.0, True
    need = -eta
    order = sorted(np.flatnonzero(u), key=lambda i: (-abs(u[i]), i))
    unique = True
    for k, i in enumerate(order):
        take = min(c[i], need / abs(u[i]))
        z[i] = -take * np.sign(u[i])
        need -= take * abs(u[i])
        if need <= 0:
            # a later coordinate with the same |u_i| could share the load
            unique = all(abs(u[j]) < abs(u[i]) for j in order[k + 1:])
            break
    return z, float(np.abs(z).sum()), unique


# -- grid oracle -------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    lo: np.ndarray
    hi: np.ndarray
    points_per_axis: int

    def __post_init__(self):
        lo, hi = make_vector(self.lo), make_vector(self.hi)
        if lo.shape != hi.shape or np.any(lo >= hi):
            raise InvalidParams("grid needs lo < hi componentwise")
        if self.points_per_axis < 3:
            raise InvalidParams("points_per_axis must be >= 3")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def spacing(self) -> np.ndarray:
        return (self.hi - self.lo) / (self.points_per_axis - 1)

    def points(self) -> np.ndarray:
        """All grid points in lexicographic order."""
        axes = [np.linspace(l, h, self.points_per_axis) for l, h in zip(self.lo, self.hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def refined(self) -> "GridSpec":
        """Same box with the spacing halved; every old point stays on the grid."""
        return GridSpec(self.lo, self.hi, 2 * self.points_per_axis - 1)


@dataclass
class GridResult:
    argmin: np.ndarray
    min_value: float


def _batch_eval(fn: Callable, pts: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(fn(pts), dtype=np.float64)
        if vals.shape == (len(pts),):
            return vals
    except Exception:  # scalar-only function
        pass
    return np.array([float(fn(x)) for x in pts])


def grid_minimize(f_eval, g_eval, v, grid: GridSpec) -> GridResult:
    """Exhaustive minimum of ``f(y) + g(y - v)`` over ``grid``.

    Points are scanned in lexicographic order and the first minimiser wins,
    so ties resolve to the lexicographically smallest point.
    """
    v = np.asarray(v, dtype=np.float64)
    pts = grid.points()
    vals = _batch_eval(f_eval, pts) + _batch_eval(g_eval, pts - v)
    vals = np.where(np.isnan(vals), np.inf, vals)
    k = int(np.argmin(vals))
    if not np.isfinite(vals[k]):
        raise AllInfinite("every grid point is outside the domain")
    return GridResult(freeze(pts[k]), float(vals[k]))


@dataclass
class RefinementReport:
    coarse: GridResult
    fine: GridResult
    increase: float
    lipschitz_bound: float

    @property
    def within_bound(self) -> bool:
        return self.increase <= self.lipschitz_bound


def grid_refinement_report(f_eval, g_eval, v, grid: GridSpec) -> RefinementReport:
    """Compare a grid with its refinement and report the cell-Lipschitz bound.

    The bound is the largest finite-difference slope among finite
    neighbouring values of the coarse grid times one cell diagonal.
    """
    coarse = grid_minimize(f_eval, g_eval, v, grid)
    fine = grid_minimize(f_eval, g_eval, v, grid.refined())
    v = np.asarray(v, dtype=np.float64)
    pts = grid.points()
    vals = (_batch_eval(f_eval, pts) + _batch_eval(g_eval, pts - v)).reshape(
        (grid.points_per_axis,) * grid.lo.size)
    h = grid.spacing
    slope = 0.0
    for ax in range(vals.ndim):
        with np.errstate(invalid="ignore"):
            dv = np.abs(np.diff(vals, axis=ax))
        ok = np.isfinite(dv)
        if np.any(ok):
            slope = max(slope, float(dv[ok].max() / h[ax]))
    bound = slope * float(np.linalg.norm(h))
    return RefinementReport(coarse, fine, fine.min_value - coarse.min_value, bound)


# -- recession cones ----------------------------------------------------------------

@dataclass(frozen=True)
class BoxCone:
    """Product of ``{0}``, ``R_+``, ``R_-`` or ``R`` per coordinate."""

    lo: np.ndarray
    hi: np.ndarray

    def project(self, x):
        return np.minimum(np.maximum(x, self.lo), self.hi)

    def polar(self):
        return BoxCone(np.where(self.lo == -np.inf, 0.0, -np.inf), np.where(self.hi == np.inf, 0.0, np.inf))

    def neg(self):
        return BoxCone(-self.hi, -self.lo)


@dataclass(frozen=True)
class HalfspaceCone:
    """``{x : <x, u> <= 0}``."""

    u: np.ndarray

    def project(self, x):
        d = x @ self.u
        return x - max(d, 0.0) / (self.u @ self.u) * self.u

    def polar(self):
        return RayCone(self.u)

    def neg(self):
        return HalfspaceCone(-self.u)


@dataclass(frozen=True)
class RayCone:
    """``R_+ u``."""

    u: np.ndarray

    def project(self, x):
        return max(x @ self.u, 0.0) / (self.u @ self.u) * self.u

    def polar(self):
        return HalfspaceCone(self.u)

    def neg(self):
        return RayCone(-self.u)


@dataclass(frozen=True)
class SubspaceCone:
    """``span`` of orthonormal rows of ``basis``; ``complement`` flips to the orthogonal complement."""

    basis: np.ndarray
    complement: bool = False

    def project(self, x):
        pu = (x @ self.basis.T) @ self.basis
        return x - pu if self.complement else pu

    def polar(self):
        return SubspaceCone(self.basis, not self.complement)

    def neg(self):
        return self


def _rec_dom_primitive(prim):
    m = prim.dim
    if prim.kind == KIND_IDENTITY:
        return BoxCone(np.full(m, -np.inf), np.full(m, np.inf))
    if prim.kind == KIND_HALFSPACE:
        return HalfspaceCone(np.asarray(prim.u))
    if prim.kind == KIND_BOX:
        return BoxCone(np.where(np.isinf(prim.lo), -np.inf, 0.0), np.where(np.isinf(prim.hi), np.inf, 0.0))
    if prim.kind == KIND_TRANSLATED_CONE:
        hi = np.zeros(m)
        hi[prim.axis] = np.inf
        return BoxCone(np.zeros(m), hi)
    if prim.kind == KIND_AFFINE:
        return SubspaceCone(np.asarray(prim.basis))
    if prim.kind == KIND_L1_BOX:
        inf = np.isinf(prim.c)
        return BoxCone(np.where(inf, -np.inf, 0.0), np.where(inf, np.inf, 0.0))
    raise UnsupportedSet(f"no recession data for kind {prim.kind}")


def recession_cones(op: OperatorHandle):
    """``(rec cl dom A, rec cl ran A)`` for a catalog operator.

    Argument shifts and translations leave both cones unchanged; inversion
    swaps them.  For every catalog primitive the range cone is the polar of
    the domain cone.
    """
    if op.form is None:
        raise UnsupportedSet(f"{op.label} is not a catalog operator")
    dom = _rec_dom_primitive(op.form.primitive)
    ran = dom.polar()
    if op.form.keep:
        dom, ran = ran, dom
    return dom, ran


@dataclass(frozen=True)
class RecessionTruth:
    v_d_from_dom: np.ndarray
    v_r_from_dom: np.ndarray
    v_d_from_ran: np.ndarray
    v_r_from_ran: np.ndarray


def recession_projection_truth(op_a: OperatorHandle, v) -> RecessionTruth:
    """The four projections of ``v`` that recover ``v_D`` and ``v_R`` from ``A`` alone.

    ``C^+ = -C^-`` for the dual cone, so ``P_{C^+} v = -P_{C^-}(-v)``.
    """
    v = np.asarray(v, dtype=np.float64)
    dom, ran = recession_cones(op_a)
    return RecessionTruth(
        v_d_from_dom=freeze(dom.polar().neg().project(v)),
        v_r_from_dom=freeze(dom.neg().project(v)),
        v_d_from_ran=freeze(ran.neg().project(v)),
        v_r_from_ran=freeze(ran.polar().neg().project(v)),
    )
