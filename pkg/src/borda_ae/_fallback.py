"""Pure-numpy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_native.pyx``.
Results agree to floating-point summation order.
"""
import numpy as np

SE, MATERN52, LINEAR = 0, 1, 2

_SQRT5 = np.sqrt(5.0)


def cross_kernel(kind, X, Y, inv_ls, sv):
    """Kernel matrix between rows of ``X`` (n, d) and rows of ``Y`` (m, d)."""
    Xs = np.asarray(X, dtype=np.float64) * inv_ls
    Ys = np.asarray(Y, dtype=np.float64) * inv_ls
    if kind == LINEAR:
        return sv * (Xs @ Ys.T)
    # explicit differences keep k(x, x) exact and the matrix exactly symmetric
    sq = np.zeros((Xs.shape[0], Ys.shape[0]))
    for k in range(Xs.shape[1]):
        diff = Xs[:, k, None] - Ys[None, :, k]
        sq += diff * diff
    if kind == SE:
        return sv * np.exp(-0.5 * sq)
    r = np.sqrt(sq)
    return sv * (1.0 + _SQRT5 * r + (5.0 / 3.0) * sq) * np.exp(-_SQRT5 * r)


def grid_append(V, n, l, kz, d, vnew, mean, var):
    """Append row ``n`` of the whitened grid cross-covariance and refresh stats.

    ``V[:n]`` holds ``L^{-1} K(X, grid)``. The new row is
    ``(kz - l @ V[:n]) / d``; ``mean`` and ``var`` are updated in place.
    """
    if n:
        row = (kz - l @ V[:n]) / d
    else:
        row = kz / d
    V[n] = row
    mean += vnew * row
    var -= row * row
    np.maximum(var, 0.0, out=var)


def context_widths(mean, std, beta):
    """Per-context value-function gap and optimistic action.

    ``mean`` and ``std`` are (G_x, G_a). Returns ``max_a upper - max_a lower``
    per context and the lowest-index argmax of ``upper`` per context.
    """
    upper = mean + beta * std
    lower = mean - beta * std
    return upper.max(axis=1) - lower.max(axis=1), upper.argmax(axis=1)


def envelope_absorb(values, mean, std, beta):
    """Running elementwise max of the lower bound surface, in place."""
    np.maximum(values, mean - beta * std, out=values)
