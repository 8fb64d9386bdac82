"""numba-jitted twins of :mod:`risbis.kernels.numpy_impl`.

Explicit loops instead of array expressions so the inner solver runs without
temporaries.  Compiled lazily on first call and cached on disk.
"""

import numpy as np
from numba import njit

_opts = dict(cache=True, nogil=True, fastmath=False)


@njit(**_opts)
def project_unit_simplex(z):
    m = z.size
    z = z - z.max()  # same projection, less cancellation in tau
    u = np.sort(z)[::-1]
    css = 0.0
    tau = 0.0
    for j in range(m):
        css += u[j]
        cand = (css - 1.0) / (j + 1)
        if u[j] - cand > 0.0:
            tau = cand
    out = np.empty(m)
    for i in range(m):
        v = z[i] - tau
        out[i] = v if v > 0.0 else 0.0
    return out


@njit(**_opts)
def form_amplitudes(omega, F):
    m, n = F.shape
    x = np.exp(1j * omega)
    a = np.zeros(m, dtype=np.complex128)
    for i in range(m):
        acc = 0j
        for k in range(n):
            acc += F[i, k] * x[k]
        a[i] = acc
    return a


@njit(**_opts)
def objective_rows(omega, F, coef, offset):
    a = form_amplitudes(omega, F)
    m = a.size
    y = np.empty(m)
    for i in range(m):
        y[i] = coef[i] * (a[i].real ** 2 + a[i].imag ** 2) - offset[i]
    return y


@njit(**_opts)
def smoothed_value_grad(omega, F, coef, offset, lam):
    m, n = F.shape
    x = np.empty(n, dtype=np.complex128)
    for k in range(n):
        x[k] = np.cos(omega[k]) + 1j * np.sin(omega[k])
    a = np.zeros(m, dtype=np.complex128)
    y = np.empty(m)
    z = np.empty(m)
    for i in range(m):
        acc = 0j
        for k in range(n):
            acc += F[i, k] * x[k]
        a[i] = acc
        y[i] = coef[i] * (acc.real ** 2 + acc.imag ** 2) - offset[i]
    top = y[0]
    for i in range(1, m):
        if y[i] > top:
            top = y[i]
    for i in range(m):
        y[i] -= top
        z[i] = 2.0 * lam * y[i]
    p = project_unit_simplex(z)
    value = 0.0
    pp = 0.0
    for i in range(m):
        value += p[i] * y[i]
        pp += p[i] * p[i]
    value = top + (value + (1.0 - pp) / (4.0 * lam))
    grad = np.zeros(n)
    for i in range(m):
        if p[i] == 0.0:
            continue
        w = p[i] * coef[i] * np.conj(a[i])
        for k in range(n):
            grad[k] -= 2.0 * (w * F[i, k] * x[k]).imag
    return value, grad


@njit(**_opts)
def _dot(u, v):
    s = 0.0
    for k in range(u.size):
        s += u[k] * v[k]
    return s


@njit(**_opts)
def agd_minimize(omega0, F, coef, offset, lam, step0, max_iter, grad_tol):
    x = omega0.copy()
    fx, gx = smoothed_value_grad(x, F, coef, offset, lam)
    y = x
    fy = fx
    gy = gx
    lip = 1.0 / step0
    tk = 1.0
    stall = 0
    it = 0
    while it < max_iter:
        if np.sqrt(_dot(gx, gx)) < grad_tol:
            break
        it += 1
        gy2 = _dot(gy, gy)
        while True:
            xn = y - gy / lip
            fxn, gxn = smoothed_value_grad(xn, F, coef, offset, lam)
            if fxn <= fy - 0.5 * gy2 / lip or lip > 1e300:
                break
            lip *= 2.0
        if fxn > fx:
            tk = 1.0
            y = x
            fy = fx
            gy = gx
            continue
        if fx - fxn <= 1e-15 * (1.0 + abs(fx)):
            stall += 1
            if stall >= 10:
                x = xn
                fx = fxn
                gx = gxn
                break
        else:
            stall = 0
        tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk * tk))
        beta = (tk - 1.0) / tn
        y = xn + beta * (xn - x)
        x = xn
        fx = fxn
        gx = gxn
        tk = tn
        if beta == 0.0:
            fy = fx
            gy = gx
        else:
            fy, gy = smoothed_value_grad(y, F, coef, offset, lam)
        lip *= 0.9
    return x, fx, np.sqrt(_dot(gx, gx)), it


@njit(**_opts)
def multistart_minimize(starts, F, coef, offset, lam, step0, max_iter, grad_tol):
    best_om = starts[0].copy()
    best_val = np.inf
    best_gn = np.inf
    best_r = -1
    total = 0
    for r in range(starts.shape[0]):
        om, val, gn, its = agd_minimize(starts[r].copy(), F, coef, offset, lam,
                                        step0, max_iter, grad_tol)
        total += its
        if best_r < 0 or val < best_val:
            best_om = om
            best_val = val
            best_gn = gn
            best_r = r
    return best_om, best_val, best_gn, total, best_r
