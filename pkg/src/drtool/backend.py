"""Selects the iteration kernel at import time.

The compiled core (``drtool._kernels``) is used when it was built and the
environment variable ``DRTOOL_PURE_PYTHON`` is unset; otherwise the loop in
``drtool._pykernel`` runs.  Operators without a closed resolvent form always
go through the Python loop.
"""
import os

import numpy as np

from . import _pykernel
from .prox import KIND_AFFINE, KIND_BOX, KIND_HALFSPACE, KIND_L1_BOX, KIND_TRANSLATED_CONE

try:
    if os.environ.get("DRTOOL_PURE_PYTHON"):
        raise ImportError("pure Python requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

COMPILED = _compiled is not None
BACKEND = "compiled" if COMPILED else "python"


def kernel_spec(form):
    """Flatten a :class:`ResolventForm` into the compiled kernel's tuple."""
    prim = form.primitive
    m = form.offset.size
    v1 = v2 = np.zeros(m)
    scalar = 0.0
    axis = 0
    basis = np.zeros((0, m))
    kind = prim.kind
    if kind == KIND_HALFSPACE:
        v1, scalar = prim.u, prim.eta
    elif kind == KIND_BOX:
        v1, v2 = prim.lo, prim.hi
    elif kind == KIND_TRANSLATED_CONE:
        v1, axis = prim.anchor, prim.axis
    elif kind == KIND_AFFINE:
        v1, basis = prim.basepoint, prim.basis
    elif kind == KIND_L1_BOX:
        v1 = prim.c
    return (int(kind), float(form.keep), float(form.sign), form.offset, form.pre,
            v1, v2, float(scalar), int(axis), basis)


def iterate(op_a, op_b, x0, max_iters, stop_tol=None, min_iters=0, backend=None):
    """Run the DR loop; returns ``(X, P, Q, status, backend_used)``.

    ``backend`` may force ``"python"``; ``"compiled"`` raises if unavailable.
    """
    tol = -1.0 if stop_tol is None else float(stop_tol)
    use_compiled = COMPILED and op_a.form is not None and op_b.form is not None
    if backend == "python":
        use_compiled = False
    elif backend == "compiled" and not use_compiled:
        raise RuntimeError("compiled kernel unavailable for this problem")
    if use_compiled:
        X, P, Q, status = _compiled.iterate(kernel_spec(op_a.form), kernel_spec(op_b.form),
                                            np.asarray(x0, dtype=np.float64), int(max_iters),
                                            tol, int(min_iters))
        return X, P, Q, status, "compiled"
    X, P, Q, status = _pykernel.iterate(op_a.resolvent, op_b.resolvent, x0, int(max_iters),
                                        tol, int(min_iters))
    return X, P, Q, status, "python"
