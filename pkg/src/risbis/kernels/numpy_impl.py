"""Vectorized numpy kernels for the smoothed max-min objective.

Reference path used when numba is disabled (``RISBIS_DISABLE_NUMBA=1``) and
the baseline the jitted kernels are benchmarked against.  Every function here
has a twin with the same signature in :mod:`risbis.kernels.numba_impl`.

Rows of the objective are ``y_i = coef_i * |F_i . e^{j omega}|^2 - offset_i``;
user rows carry ``coef = -1/alpha`` and ``offset = t``, constraint rows carry
``coef = +1`` and ``offset = sigma``.
"""

import numpy as np


def project_unit_simplex(z):
    """Euclidean projection onto ``{x >= 0, sum(x) = 1}`` (sort and threshold)."""
    z = z - z.max()  # same projection, less cancellation in tau
    u = np.sort(z)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, z.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    tau = css[rho] / (rho + 1)
    return np.maximum(z - tau, 0.0)


def form_amplitudes(omega, F):
    return F @ np.exp(1j * omega)


def objective_rows(omega, F, coef, offset):
    a = form_amplitudes(omega, F)
    return coef * (a.real ** 2 + a.imag ** 2) - offset


def smoothed_value_grad(omega, F, coef, offset, lam):
    """Value and omega-gradient of the smoothed max of the objective rows."""
    x = np.exp(1j * omega)
    a = F @ x
    y = coef * (a.real ** 2 + a.imag ** 2) - offset
    # shift-equivariant: evaluate at y - max(y) and add the max back
    top = y.max()
    d = y - top
    p = project_unit_simplex(2.0 * lam * d)
    value = top + (p @ d + (1.0 - p @ p) / (4.0 * lam))
    # d|a_i|^2 / d omega_n = -2 Im(conj(a_i) F_in x_n)
    w = p * coef * np.conj(a)
    grad = -2.0 * np.imag((w @ F) * x)
    return value, grad


def agd_minimize(omega0, F, coef, offset, lam, step0, max_iter, grad_tol):
    """Accelerated gradient descent with backtracking and value restart.

    Returns ``(omega, value, grad_norm, iterations)``.
    """
    x = omega0.copy()
    fx, gx = smoothed_value_grad(x, F, coef, offset, lam)
    y, fy, gy = x, fx, gx
    lip = 1.0 / step0
    tk = 1.0
    stall = 0
    it = 0
    while it < max_iter:
        if np.sqrt(gx @ gx) < grad_tol:
            break
        it += 1
        gy2 = gy @ gy
        while True:
            xn = y - gy / lip
            fxn, gxn = smoothed_value_grad(xn, F, coef, offset, lam)
            if fxn <= fy - 0.5 * gy2 / lip or lip > 1e300:
                break
            lip *= 2.0
        if fxn > fx:
            # momentum overshot: restart from the last accepted point
            tk = 1.0
            y, fy, gy = x, fx, gx
            continue
        if fx - fxn <= 1e-15 * (1.0 + abs(fx)):
            stall += 1
            if stall >= 10:
                x, fx, gx = xn, fxn, gxn
                break
        else:
            stall = 0
        tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk * tk))
        beta = (tk - 1.0) / tn
        y = xn + beta * (xn - x)
        x, fx, gx = xn, fxn, gxn
        tk = tn
        if beta == 0.0:
            fy, gy = fx, gx
        else:
            fy, gy = smoothed_value_grad(y, F, coef, offset, lam)
        lip *= 0.9
    return x, fx, np.sqrt(gx @ gx), it


def multistart_minimize(starts, F, coef, offset, lam, step0, max_iter, grad_tol):
    """Run :func:`agd_minimize` from every row of ``starts``; keep the lowest value.

    Ties go to the earliest start.  Returns ``(omega, value, grad_norm,
    total_iterations, best_index)``.
    """
    best = None
    total = 0
    for r in range(starts.shape[0]):
        om, val, gn, its = agd_minimize(starts[r], F, coef, offset, lam, step0,
                                        max_iter, grad_tol)
        total += its
        if best is None or val < best[1]:
            best = (om, val, gn, r)
    return best[0], best[1], best[2], total, best[3]
