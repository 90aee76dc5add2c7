"""Pure-Python/numpy versions of the compiled kernels."""
import numpy as np

CDF_CAP = 1.0 - 1e-15


def _ratio(code, r, k):
    if code == 0:
        return 1.0 / (k + 1.0)
    if code == 1:
        return np.ones_like(k)
    if code == 2:
        return (k + r) / (k + 1.0)
    return (k + 1.0) / (k + 2.0)


def invert_psd(code, r, thetas, u, f0):
    n = thetas.shape[0]
    out = np.zeros(n, dtype=np.int64)
    prob = f0.copy()
    cdf = f0.copy()
    active = np.flatnonzero((u > cdf) & (cdf <= CDF_CAP))
    k = 0
    while active.size:
        kf = float(k)
        prob[active] *= _ratio(code, r, kf) * thetas[active]
        cdf[active] += prob[active]
        k += 1
        out[active] = k
        active = active[(u[active] > cdf[active]) & (cdf[active] <= CDF_CAP)]
    return out


def nnls(A, b, maxiter):
    """Lawson-Hanson active set for ``min ||Ax - b||, x >= 0``."""
    m, n = A.shape
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = A.T @ b
    tol = 10.0 * np.finfo(float).eps * max(m, n) * max(1.0, np.abs(A).max()) * max(1.0, np.abs(b).max())
    it = 0
    while not passive.all() and it < maxiter:
        cand = np.where(passive, -np.inf, w)
        j = int(np.argmax(cand))
        if cand[j] <= tol:
            break
        passive[j] = True
        while True:
            it += 1
            idx = np.flatnonzero(passive)
            s = np.zeros(n)
            s[idx] = np.linalg.lstsq(A[:, idx], b, rcond=None)[0]
            if np.all(s[idx] > 0) or it >= maxiter:
                break
            neg = idx[s[idx] <= 0]
            alpha = np.min(x[neg] / (x[neg] - s[neg]))
            x = x + alpha * (s - x)
            passive &= x > tol
            x[~passive] = 0.0
        x = np.where(passive, np.maximum(s, 0.0), 0.0)
        w = A.T @ (b - A @ x)
    return x, it


def _log_normalizer(code, r, theta):
    if code == 0:
        return theta
    if code == 1:
        return -np.log1p(-theta)
    if code == 2:
        return -r * np.log1p(-theta)
    small = theta < 1e-5
    t = np.where(small, 0.5, theta)
    return np.where(small, np.log1p(theta / 2.0 + theta**2 / 3.0 + theta**3 / 4.0), np.log(-np.log1p(-t) / t))


def lin_grad(code, r, thetas, ks, log_b, coef, offset):
    """``sum_j coef_j f_theta(k_j) + offset`` for each theta."""
    with np.errstate(divide="ignore", invalid="ignore"):
        logt = np.log(thetas)
        klog = np.where(ks[None, :] == 0, 0.0, ks[None, :] * logt[:, None])
    logf = log_b[None, :] + klog - _log_normalizer(code, r, thetas)[:, None]
    return np.exp(logf) @ coef + offset


GOLDEN = 0.6180339887498949


def golden_max_lin(code, r, a, b, ks, log_b, coef, offset, iters):
    """Golden-section maximisation of ``lin_grad`` on each ``[a_i, b_i]``.

    Returns the best of the refined point and the two bracket ends, with its value.
    """
    def fun(t):
        return lin_grad(code, r, t, ks, log_b, coef, offset)

    a0, b0 = a.copy(), b.copy()
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        right = fc < fd
        a = np.where(right, c, a)
        b = np.where(right, b, d)
        c_new = np.where(right, d, b - GOLDEN * (b - a))
        d_new = np.where(right, a + GOLDEN * (b - a), c)
        fnew = fun(np.where(right, d_new, c_new))
        fc, fd = np.where(right, fd, fnew), np.where(right, fnew, fc)
        c, d = c_new, d_new
    x = np.where(fc >= fd, c, d)
    fx = np.maximum(fc, fd)
    fa, fb = fun(a0), fun(b0)
    best_x = np.where(fa > fx, a0, x)
    best_f = np.maximum(fa, fx)
    best_x = np.where(fb > best_f, b0, best_x)
    best_f = np.maximum(fb, best_f)
    return best_x, best_f
