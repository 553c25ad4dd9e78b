# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Douglas-Rachford loop over catalog resolvent forms."""
import numpy as np
from libc.math cimport fabs, sqrt, isfinite

DEF K_IDENTITY = 0
DEF K_HALFSPACE = 1
DEF K_BOX = 2
DEF K_CONE = 3
DEF K_AFFINE = 4
DEF K_L1BOX = 5


cdef class _Form:
    cdef int kind, m, axis, nb
    cdef double keep, sign, scalar, unorm2
    cdef double[::1] offset, pre, v1, v2, tmp
    cdef double[:, ::1] basis

    def __init__(self, tuple spec):
        kind, keep, sign, offset, pre, v1, v2, scalar, axis, basis = spec
        self.kind = kind
        self.keep = keep
        self.sign = sign
        self.offset = np.array(offset, dtype=np.float64, order="C")
        self.pre = np.array(pre, dtype=np.float64, order="C")
        self.m = self.offset.shape[0]
        self.v1 = np.array(v1, dtype=np.float64, order="C")
        self.v2 = np.array(v2, dtype=np.float64, order="C")
        self.scalar = scalar
        self.axis = axis
        self.basis = np.array(basis, dtype=np.float64, order="C").reshape(-1, self.m)
        self.nb = self.basis.shape[0]
        self.tmp = np.empty(self.m)
        cdef int i
        self.unorm2 = 0.0
        if self.kind == K_HALFSPACE:
            for i in range(self.m):
                self.unorm2 += self.v1[i] * self.v1[i]

    cdef void apply(self, double[::1] y, double[::1] out) noexcept nogil:
        cdef int i, j, m = self.m
        cdef double d, s, t, a
        cdef double[::1] z = self.tmp
        for i in range(m):
            z[i] = y[i] + self.pre[i]
        if self.kind == K_HALFSPACE:
            d = 0.0
            for i in range(m):
                d += z[i] * self.v1[i]
            if d > self.scalar:
                s = (self.scalar - d) / self.unorm2
                for i in range(m):
                    z[i] = z[i] + s * self.v1[i]
        elif self.kind == K_BOX:
            for i in range(m):
                t = z[i]
                if t < self.v1[i]:
                    t = self.v1[i]
                if t > self.v2[i]:
                    t = self.v2[i]
                z[i] = t
        elif self.kind == K_CONE:
            for i in range(m):
                if i == self.axis:
                    a = self.v1[i]
                    t = z[i] - a
                    z[i] = a + (t if t > 0.0 else 0.0)
                else:
                    z[i] = self.v1[i]
        elif self.kind == K_AFFINE:
            for i in range(m):
                out[i] = self.v1[i]
            for j in range(self.nb):
                s = 0.0
                for i in range(m):
                    s += (z[i] - self.v1[i]) * self.basis[j, i]
                for i in range(m):
                    out[i] += s * self.basis[j, i]
            for i in range(m):
                z[i] = out[i]
        elif self.kind == K_L1BOX:
            for i in range(m):
                t = fabs(z[i]) - 1.0
                if t < 0.0:
                    t = 0.0
                if t > self.v1[i]:
                    t = self.v1[i]
                if z[i] > 0.0:
                    z[i] = t
                elif z[i] < 0.0:
                    z[i] = -t
                else:
                    z[i] = 0.0
        for i in range(m):
            t = z[i]
            if self.sign < 0.0:
                t = -t
            t = t + self.offset[i]
            if self.keep != 0.0:
                t = t + y[i]
            out[i] = t


def iterate(tuple spec_a, tuple spec_b, x0, int max_iters, double stop_tol, int min_iters):
    """Compiled twin of :func:`drtool._pykernel.iterate`."""
    cdef _Form fa = _Form(spec_a)
    cdef _Form fb = _Form(spec_b)
    cdef int m = fa.m
    X_arr = np.empty((max_iters + 1, m))
    P_arr = np.empty((max_iters, m))
    Q_arr = np.empty((max_iters, m))
    cdef double[:, ::1] X = X_arr
    cdef double[:, ::1] P = P_arr
    cdef double[:, ::1] Q = Q_arr
    cdef double[::1] r = np.empty(m)
    cdef int i, k, n = 0, status = 0
    cdef int first = min_iters if min_iters > 2 else 2
    cdef double a, b, sa, sb
    cdef bint finite
    x0c = np.array(x0, dtype=np.float64, order="C")
    cdef double[::1] xv = x0c
    for i in range(m):
        X[0, i] = xv[i]
    with nogil:
        while n < max_iters:
            fa.apply(X[n], P[n])
            for i in range(m):
                r[i] = 2.0 * P[n, i] - X[n, i]
            fb.apply(r, Q[n])
            finite = True
            for i in range(m):
                X[n + 1, i] = X[n, i] - P[n, i] + Q[n, i]
                if not isfinite(X[n + 1, i]):
                    finite = False
            n += 1
            if not finite:
                status = 2
                break
            k = n - 1
            if stop_tol >= 0.0 and k >= first:
                sa = 0.0
                sb = 0.0
                for i in range(m):
                    a = (X[k, i] - X[k + 1, i]) - (X[k - 1, i] - X[k, i])
                    b = P[k, i] - 2.0 * P[k - 1, i] + P[k - 2, i]
                    sa += a * a
                    sb += b * b
                if sqrt(sa) <= stop_tol and sqrt(sb) <= stop_tol:
                    status = 1
                    break
    return X_arr[: n + 1], P_arr[:n], Q_arr[:n], status
