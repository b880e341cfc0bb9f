"""Positive semi-definite kernels and Gram matrices."""
from dataclasses import dataclass

import numpy as np

from ._backend import LINEAR, MATERN52, SE, kernels as _k

FAMILIES = {
    "squared-exponential": SE,
    "matern-5/2": MATERN52,
    "linear": LINEAR,
}
_ALIASES = {"se": "squared-exponential", "rbf": "squared-exponential",
            "matern52": "matern-5/2", "matern": "matern-5/2"}


class KernelInputError(ValueError):
    """Raised for malformed kernel parameters or mismatched input dimensions."""


@dataclass(frozen=True)
class KernelSpec:
    family: str = "squared-exponential"
    lengthscales: tuple = (1.0,)
    signal_variance: float = 1.0
    jitter: float | None = None

    def __post_init__(self):
        family = _ALIASES.get(self.family, self.family)
        if family not in FAMILIES:
            raise KernelInputError(f"unknown kernel family {self.family!r}")
        object.__setattr__(self, "family", family)
        ls = tuple(float(v) for v in np.atleast_1d(self.lengthscales))
        if not ls or min(ls) <= 0:
            raise KernelInputError("lengthscales must be a nonempty positive vector")
        object.__setattr__(self, "lengthscales", ls)
        if not self.signal_variance > 0:
            raise KernelInputError("signal_variance must be positive")
        if self.jitter is None:
            object.__setattr__(self, "jitter", 1e-6 * self.signal_variance)
        elif self.jitter < 0:
            raise KernelInputError("jitter must be nonnegative")

    @classmethod
    def isotropic(cls, family, lengthscale, dim, signal_variance=1.0, jitter=None):
        return cls(family, (float(lengthscale),) * dim, signal_variance, jitter)

    @property
    def dim(self):
        return len(self.lengthscales)

    @property
    def stationary(self):
        return self.family != "linear"

    def prior_variance(self, points):
        """k(q, q) for each row of ``points``."""
        points = self._check(points)
        if self.stationary:
            return np.full(points.shape[0], self.signal_variance)
        inv = 1.0 / np.asarray(self.lengthscales)
        return self.signal_variance * np.sum((points * inv) ** 2, axis=1)

    def _check(self, points):
        points = np.asarray(points, dtype=np.float64)
        if points.ndim == 1:
            points = points[None, :]
        if points.ndim != 2 or points.shape[1] != self.dim:
            raise KernelInputError(
                f"expected points of dimension {self.dim}, got shape {points.shape}"
            )
        return points


def cross_gram(spec, X, Y):
    """k(x_i, y_j) for all row pairs, no jitter."""
    X = spec._check(X)
    Y = spec._check(Y)
    inv = 1.0 / np.asarray(spec.lengthscales)
    return _k.cross_kernel(FAMILIES[spec.family], X, Y, inv, float(spec.signal_variance))


def eval_kernel(spec, u, v):
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise KernelInputError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(cross_gram(spec, u, v)[0, 0])


def gram_matrix(spec, points):
    """Symmetric Gram matrix with ``spec.jitter`` on the diagonal."""
    points = spec._check(points)
    if points.shape[0] == 0:
        raise KernelInputError("gram_matrix needs at least one point")
    M = cross_gram(spec, points, points)
    M = 0.5 * (M + M.T)
    M[np.diag_indices_from(M)] += spec.jitter
    return M
