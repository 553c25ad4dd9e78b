"""Pure-Python Douglas-Rachford loop; used when the compiled core is absent."""
import math

import numpy as np

STATUS_BUDGET = 0
STATUS_STOPPED = 1
STATUS_NONFINITE = 2


def iterate(res_a, res_b, x0, max_iters, stop_tol, min_iters):
    """Run ``x <- x - J_A x + J_B(2 J_A x - x)`` at most ``max_iters`` times.

    Returns ``(X, P, Q, status)`` with ``X`` holding ``x_0..x_n`` and
    ``P``/``Q`` the shadows ``p_k = J_A x_k``, ``q_k = J_B R_A x_k`` for
    ``k < n``.  A negative ``stop_tol`` disables early stopping.
    """
    x = np.array(x0, dtype=np.float64)
    m = x.size
    X = np.empty((max_iters + 1, m))
    P = np.empty((max_iters, m))
    Q = np.empty((max_iters, m))
    X[0] = x
    status = STATUS_BUDGET
    n = 0
    first = max(2, min_iters)
    while n < max_iters:
        p = res_a(x)
        q = res_b(2.0 * p - x)
        x = x - p + q
        P[n] = p
        Q[n] = q
        X[n + 1] = x
        n += 1
        if not np.all(np.isfinite(x)):
            status = STATUS_NONFINITE
            break
        k = n - 1
        if stop_tol >= 0 and k >= first:
            sd_change = (X[k] - X[k + 1]) - (X[k - 1] - X[k])
            p_change = P[k] - 2.0 * P[k - 1] + P[k - 2]
            if (math.sqrt(sd_change @ sd_change) <= stop_tol
                    and math.sqrt(p_change @ p_change) <= stop_tol):
                status = STATUS_STOPPED
                break
    return X[: n + 1], P[:n], Q[:n], status
