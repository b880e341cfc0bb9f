"""Exact kernel ridge regression with incremental Cholesky updates.

The posterior mean and width follow the usual KRR / GP formulas::

    mean(q) = prior_mean + k_q^T (K + eta2 I)^{-1} (y - prior_mean)
    var(q)  = k(q, q) - k_q^T (K + eta2 I)^{-1} k_q

``K`` includes the kernel jitter. Appending one observation costs O(t^2);
every ``REFACTOR_EVERY`` appends the factor is rebuilt from scratch.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, solve_triangular

from ._backend import kernels as _k
from .kernels import KernelInputError, KernelSpec, cross_gram, gram_matrix

REFACTOR_EVERY = 256


class NumericalError(ArithmeticError):
    """Factorization of the regularized Gram matrix failed."""


@dataclass(frozen=True, eq=False)
class PosteriorState:
    kernel: KernelSpec
    noise_variance: float
    prior_mean: float
    inputs: np.ndarray  # (n, d)
    targets: np.ndarray  # centered: y - prior_mean
    tri_factor: np.ndarray  # lower L with L L^T = K + eta2 I
    whitened: np.ndarray  # L^{-1} targets
    weights: np.ndarray  # (K + eta2 I)^{-1} targets
    appends_since_factor: int = field(default=0)

    @property
    def n(self):
        return self.inputs.shape[0]

    @property
    def dim(self):
        return self.kernel.dim


def _factor(kernel, inputs, noise_variance):
    A = gram_matrix(kernel, inputs)
    A[np.diag_indices_from(A)] += noise_variance
    try:
        L, _ = cho_factor(A, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"Cholesky failed on regularized Gram matrix of size {len(inputs)}"
        ) from exc
    return np.tril(L)


def fit(kernel, inputs, targets, noise_variance=0.25, prior_mean=0.0):
    if not noise_variance > 0:
        raise KernelInputError("noise_variance must be positive")
    inputs = np.asarray(inputs, dtype=np.float64).reshape(-1, kernel.dim)
    targets = np.asarray(targets, dtype=np.float64).ravel()
    if inputs.shape[0] != targets.shape[0]:
        raise KernelInputError(
            f"{inputs.shape[0]} inputs but {targets.shape[0]} targets"
        )
    centered = targets - prior_mean
    if inputs.shape[0] == 0:
        empty = np.zeros(0)
        return PosteriorState(kernel, float(noise_variance), float(prior_mean),
                              inputs, centered, np.zeros((0, 0)), empty, empty)
    L = _factor(kernel, inputs, noise_variance)
    v = solve_triangular(L, centered, lower=True, check_finite=False)
    w = solve_triangular(L.T, v, lower=False, check_finite=False)
    return PosteriorState(kernel, float(noise_variance), float(prior_mean),
                          inputs, centered, L, v, w)


def _append(state, x, y):
    """Extend ``state`` by one point.

    Returns ``(new_state, l, d, v_new, refactored)`` where ``l = L^{-1} k_x``
    and ``d`` is the new diagonal entry of the factor; callers that cache
    whitened cross-covariances use these to extend their cache.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != state.dim:
        raise KernelInputError(f"expected input of dimension {state.dim}, got {x.shape[0]}")
    kernel, eta2 = state.kernel, state.noise_variance
    yc = float(y) - state.prior_mean
    inputs = np.vstack([state.inputs, x[None, :]])
    targets = np.append(state.targets, yc)
    n = state.n
    if state.appends_since_factor + 1 >= REFACTOR_EVERY:
        new = fit(kernel, inputs, targets + state.prior_mean, eta2, state.prior_mean)
        return new, None, None, None, True
    c = float(kernel.prior_variance(x)[0]) + kernel.jitter + eta2
    if n:
        kx = cross_gram(kernel, state.inputs, x)[:, 0]
        l = solve_triangular(state.tri_factor, kx, lower=True, check_finite=False)
    else:
        l = np.zeros(0)
    d2 = c - float(l @ l)
    if not d2 > 0:
        raise NumericalError(f"Cholesky append failed at Gram size {n + 1}")
    d = np.sqrt(d2)
    L = np.zeros((n + 1, n + 1))
    L[:n, :n] = state.tri_factor
    L[n, :n] = l
    L[n, n] = d
    v_new = (yc - float(l @ state.whitened)) / d
    v = np.append(state.whitened, v_new)
    w = solve_triangular(L.T, v, lower=False, check_finite=False)
    new = PosteriorState(kernel, eta2, state.prior_mean, inputs, targets, L, v, w,
                         state.appends_since_factor + 1)
    return new, l, d, v_new, False


def update(state, x, y):
    """Posterior after one more observation; ``state`` is left untouched."""
    return _append(state, x, y)[0]


def predict_many(state, queries):
    """Posterior mean and standard deviation at each row of ``queries``."""
    Q = state.kernel._check(queries)
    prior_var = state.kernel.prior_variance(Q)
    if state.n == 0:
        return np.full(Q.shape[0], state.prior_mean), np.sqrt(prior_var)
    Kq = cross_gram(state.kernel, state.inputs, Q)
    mean = state.prior_mean + Kq.T @ state.weights
    Vq = solve_triangular(state.tri_factor, Kq, lower=True, check_finite=False)
    var = np.maximum(prior_var - np.einsum("ij,ij->j", Vq, Vq), 0.0)
    return mean, np.sqrt(var)


def predict(state, query):
    query = np.asarray(query, dtype=np.float64).ravel()
    if query.shape[0] != state.dim:
        raise KernelInputError(
            f"expected query of dimension {state.dim}, got {query.shape[0]}"
        )
    mean, std = predict_many(state, query[None, :])
    return float(mean[0]), float(std[0])


def info_gain_increment(state, query):
    """Information gained by observing ``query`` next: 0.5 log(1 + var / eta2)."""
    _, std = predict(state, query)
    return 0.5 * np.log1p(std * std / state.noise_variance)


class GridPosterior:
    """Posterior mean and variance on a fixed point set, kept current in O(tG).

    Holds ``V = L^{-1} K(X, grid)`` row by row, so each append only needs one
    new row rather than a fresh triangular solve against the whole grid.
    """

    def __init__(self, state, points):
        self.points = state.kernel._check(points)
        self.prior_var = state.kernel.prior_variance(self.points)
        self._rebuild(state)

    def _rebuild(self, state):
        G = self.points.shape[0]
        cap = max(64, 2 * state.n)
        self._V = np.zeros((cap, G))
        self.n = state.n
        if state.n:
            Kz = cross_gram(state.kernel, state.inputs, self.points)
            V = solve_triangular(state.tri_factor, Kz, lower=True, check_finite=False)
            self._V[: state.n] = V
            self.mean = state.prior_mean + V.T @ state.whitened
            self.var = np.maximum(self.prior_var - np.einsum("ij,ij->j", V, V), 0.0)
        else:
            self.mean = np.full(G, state.prior_mean)
            self.var = self.prior_var.copy()

    def append(self, state, l, d, v_new, refactored):
        """Sync with ``state``, the successor produced by ``_append``."""
        if refactored:
            self._rebuild(state)
            return
        x = state.inputs[-1]
        if self.n >= self._V.shape[0]:
            grown = np.zeros((2 * self._V.shape[0], self._V.shape[1]))
            grown[: self.n] = self._V[: self.n]
            self._V = grown
        kz = cross_gram(state.kernel, x, self.points)[0]
        _k.grid_append(self._V, self.n, l, kz, d, v_new, self.mean, self.var)
        self.n += 1

    @property
    def std(self):
        return np.sqrt(self.var)

    def copy(self):
        other = object.__new__(GridPosterior)
        other.points = self.points
        other.prior_var = self.prior_var
        other._V = self._V.copy()
        other.n = self.n
        other.mean = self.mean.copy()
        other.var = self.var.copy()
        return other
