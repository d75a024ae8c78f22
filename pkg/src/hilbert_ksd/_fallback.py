"""Pure numpy implementations of the hot kernels.

Signatures match the compiled ``_core`` module exactly; ``_backend`` picks one
at import time.
"""

import numpy as np

SE = 0
IMQ = 1


def stein_gram_pairs(family, bb, q, r, p, z, trace):
    """Assemble the Stein Gram matrix from per-sample bilinear forms.

    All inputs are ``(n, n)``: ``bb[i, j] = <b_i, b_j>``,
    ``q[i, j] = <SC x_i, x_j>``, ``r[i, j] = <SC g_i, x_j>``,
    ``p[i, j] = <CS x_i, CS x_j>`` and ``z[i, j] = <T x_i, T x_j> / gamma^2``.
    Only the upper triangle is computed; the result is mirrored so it is
    exactly symmetric.
    """
    qd = np.diag(q)
    rd = np.diag(r)
    pd = np.diag(p)
    zd = np.diag(z)
    sc_dd = (qd[:, None] + qd[None, :]) - (q + q.T)
    sc_dg = (rd[:, None] + rd[None, :]) - (r + r.T)
    cs_dd = (pd[:, None] + pd[None, :]) - (p + p.T)
    sq = np.maximum((zd[:, None] + zd[None, :]) - (z + z.T), 0.0)
    if family == SE:
        k = np.exp(-0.5 * sq)
        h = k * ((((bb - sc_dd) - sc_dg) + trace) - cs_dd)
    else:
        k = 1.0 / np.sqrt(sq + 1.0)
        k3 = k * k * k
        h = k * bb + k3 * ((trace - sc_dd) - sc_dg) - 3.0 * (k3 * k * k) * cs_dd
    upper = np.triu(h)
    return upper + np.triu(h, 1).T


def em_sine_accept(increments, x0, dt, coef, eps):
    """Euler-Maruyama for ``dX = coef sin(X) dt + dB`` with endpoint rejection.

    ``increments`` is ``(steps, batch)``: row ``k`` holds the Brownian
    increments (already scaled by ``sqrt(dt)``) of step ``k`` for every path.
    Returns the ``(k, steps + 1)`` paths whose endpoint satisfies
    ``|X_end| < eps``, in batch order.
    """
    increments = np.asarray(increments, dtype=np.float64)
    steps, batch = increments.shape
    paths = np.empty((steps + 1, batch))
    x = np.full(batch, float(x0))
    paths[0] = x
    for k in range(steps):
        x = x + coef * np.sin(x) * dt + increments[k]
        paths[k + 1] = x
    return paths[:, np.abs(x) < eps].T.copy()
