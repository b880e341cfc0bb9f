"""Numerical RKHS norms of sampled rewards and their Borda functions.

The norm of ``f`` is estimated from ``n`` uniform points by solving
``(K + reg I) alpha = f(points)`` and returning ``sqrt(alpha^T K alpha)``.
"""
import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .env import sample_env
from .kernels import KernelSpec, gram_matrix
from .krr import NumericalError

NORMS_COLUMNS = ["d_x", "d_a", "trials", "win_rate", "win_margin"]


@dataclass(frozen=True)
class NormEstimate:
    tag: str
    d_x: int
    d_a: int
    n: int
    reg: float
    value: float


def _solver(kernel, points, reg):
    K = gram_matrix(KernelSpec(kernel.family, kernel.lengthscales, kernel.signal_variance, 0.0),
                    points)
    A = K.copy()
    A[np.diag_indices_from(A)] += reg
    try:
        factor = cho_factor(A, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Cholesky failed on {len(points)}-point norm system") from exc

    def norm(values):
        alpha = cho_solve(factor, values, check_finite=False)
        return float(np.sqrt(max(alpha @ K @ alpha, 0.0)))

    return norm


def estimate_norm(f, dim, n, kernel, reg=1e-6, seed=0, tag="reward", dims=None):
    """RKHS norm estimate of the vectorized callable ``f`` on [0, 1]^dim."""
    if n < 2:
        raise ValueError("need at least two sample points")
    if not reg > 0:
        raise ValueError("reg must be positive")
    points = np.random.default_rng(seed).random((n, dim))
    value = _solver(kernel, points, reg)(np.asarray(f(points), dtype=np.float64))
    d_x, d_a = dims if dims is not None else (0, dim)
    return NormEstimate(tag, d_x, d_a, n, reg, value)


def mc_borda(env, points, opponents):
    """Borda values at joint ``points`` against a shared opponent sample."""
    x, a = points[:, :env.d_x], points[:, env.d_x:]
    Cx, Sx = env.reward.split_features(env.d_x, x)
    ph_a = a @ env.reward.frequencies[:, env.d_x:].T
    r_self = np.sum(Cx * np.cos(ph_a) - Sx * np.sin(ph_a), axis=1)
    ph_o = opponents @ env.reward.frequencies[:, env.d_x:].T
    r_opp = Cx @ np.cos(ph_o).T - Sx @ np.sin(ph_o).T  # (n, mc)
    return env.link_fn(r_self[:, None] - r_opp).mean(axis=1), r_self


@dataclass(frozen=True)
class NormComparison:
    d_x: int
    d_a: int
    trials: int
    win_rate: float
    win_margin: float
    reward_norms: np.ndarray
    borda_norms: np.ndarray

    def row(self):
        return [self.d_x, self.d_a, self.trials, self.win_rate, self.win_margin]


def compare_norms(d_x, d_a, trials=200, mc_samples=512, seed=0, n=1000, num_features=256,
                  lengthscale=0.3, reg=1e-6, link="logistic"):
    """Fraction of sampled rewards whose Borda function has the smaller norm.

    Each trial draws its own environment, sample points and opponent sample
    from a child of ``seed``. Opponents are shared across the sample points so
    the Borda estimate stays a smooth function of the input.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    kernel = KernelSpec.isotropic("squared-exponential", lengthscale, d_x + d_a, 1.0, 0.0)
    r_norms, f_norms = np.empty(trials), np.empty(trials)
    for k, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        env_seed, pt_seed = child.generate_state(2)
        env = sample_env(d_x, d_a, num_features, lengthscale, link, int(env_seed))
        rng = np.random.default_rng(int(pt_seed))
        points = rng.random((n, d_x + d_a))
        opponents = rng.random((mc_samples, d_a))
        try:
            norm = _solver(kernel, points, reg)
        except NumericalError as exc:
            raise NumericalError(f"trial {k} (seed {seed}): {exc}") from exc
        borda, reward = mc_borda(env, points, opponents)
        r_norms[k], f_norms[k] = norm(reward), norm(borda)
    return NormComparison(d_x, d_a, trials, float(np.mean(f_norms < r_norms)),
                          float(np.mean(r_norms - f_norms)), r_norms, f_norms)


def write_norms(path, comparisons):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(NORMS_COLUMNS)
        for c in comparisons:
            w.writerow([c.d_x, c.d_a, c.trials, repr(c.win_rate), repr(c.win_margin)])
