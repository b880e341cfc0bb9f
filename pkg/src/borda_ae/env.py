"""Synthetic dueling environments with random-Fourier-feature rewards."""
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, ndtr

from .kernels import KernelInputError

LINKS = ("logistic", "gaussian-cdf")
_P_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class RFFReward:
    """``r(z) = sqrt(2/m) * sum_i w_i cos(omega_i . z + b_i)``.

    With ``omega ~ N(0, I / lengthscale^2)`` this is a draw from a finite
    feature approximation of the unit-variance SE-kernel prior.
    """
    frequencies: np.ndarray  # (m, dim)
    phases: np.ndarray  # (m,)
    coefficients: np.ndarray  # (m,)

    @property
    def num_features(self):
        return self.phases.shape[0]

    @property
    def input_dim(self):
        return self.frequencies.shape[1]

    @property
    def amplitude(self):
        return np.sqrt(2.0 / self.num_features)

    def __call__(self, z):
        z = np.asarray(z, dtype=np.float64)
        single = z.ndim == 1
        z = np.atleast_2d(z)
        out = self.amplitude * (np.cos(z @ self.frequencies.T + self.phases) @ self.coefficients)
        return float(out[0]) if single else out

    def split_features(self, d_x, x):
        """Context half of the angle-sum split of each feature.

        ``r(x, a) = Cx @ cos(Wa a) - Sx @ sin(Wa a)`` with ``Cx, Sx`` carrying
        amplitude, coefficients and phases.
        """
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        theta = x @ self.frequencies[:, :d_x].T + self.phases
        scale = self.amplitude * self.coefficients
        return np.cos(theta) * scale, np.sin(theta) * scale

    def eval_cross(self, d_x, contexts, actions):
        """``r(contexts[i], actions[j])`` as an (n_x, n_a) matrix."""
        Cx, Sx = self.split_features(d_x, contexts)
        a = np.atleast_2d(np.asarray(actions, dtype=np.float64))
        phi = a @ self.frequencies[:, d_x:].T
        return Cx @ np.cos(phi).T - Sx @ np.sin(phi).T


def sample_rff(dim, m, lengthscale, rng):
    if m < 1:
        raise KernelInputError("need at least one random feature")
    if not lengthscale > 0:
        raise KernelInputError("lengthscale must be positive")
    omega = rng.normal(0.0, 1.0 / lengthscale, size=(m, dim))
    b = rng.uniform(0.0, 2.0 * np.pi, size=m)
    w = rng.normal(size=m)
    return RFFReward(omega, b, w)


@dataclass(frozen=True, eq=False)
class SyntheticEnv:
    reward: RFFReward
    d_x: int
    d_a: int
    link: str = "logistic"
    lengthscale: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.link not in LINKS:
            raise KernelInputError(f"unknown link {self.link!r}")

    def describe(self):
        return {"d_x": self.d_x, "d_a": self.d_a, "num_features": self.reward.num_features,
                "lengthscale": self.lengthscale, "link": self.link, "seed": self.seed}

    def _box(self, name, v, dim):
        v = np.asarray(v, dtype=np.float64)
        if v.shape[-1] != dim:
            raise KernelInputError(f"{name} must have dimension {dim}, got {v.shape}")
        if np.any(v < 0.0) or np.any(v > 1.0):
            raise KernelInputError(f"{name} outside the unit box")
        return v

    def link_fn(self, gap):
        p = expit(gap) if self.link == "logistic" else ndtr(gap)
        return np.clip(p, _P_EPS, 1.0 - _P_EPS)

    def reward_at(self, x, a):
        x = self._box("context", x, self.d_x).ravel()
        a = self._box("action", a, self.d_a).ravel()
        return self.reward(np.concatenate([x, a]))

    def reward_grid(self, contexts, actions):
        """Reward matrix (G_x, G_a) over the product of two point lists."""
        contexts = np.asarray(contexts, dtype=np.float64).reshape(-1, self.d_x)
        actions = np.asarray(actions, dtype=np.float64).reshape(-1, self.d_a)
        return self.reward.eval_cross(self.d_x, contexts, actions)

    def duel_prob(self, x, a, a_opp):
        x = self._box("context", x, self.d_x).ravel()
        a = self._box("action", a, self.d_a).ravel()
        a_opp = self._box("opponent", a_opp, self.d_a).ravel()
        r = self.reward_grid(x, np.stack([a, a_opp]))[0]
        return float(self.link_fn(r[0] - r[1]))

    def duel_outcome(self, x, a, a_opp, rng):
        return int(rng.random() < self.duel_prob(x, a, a_opp))

    def true_borda(self, x, a, action_grid):
        """Mean win probability of ``a`` against every action in ``action_grid``."""
        grid = np.asarray(action_grid, dtype=np.float64).reshape(-1, self.d_a)
        if grid.shape[0] == 0:
            raise KernelInputError("empty action grid")
        x = self._box("context", x, self.d_x).ravel()
        a = self._box("action", a, self.d_a).ravel()
        r = self.reward_grid(x, np.vstack([a[None, :], grid]))[0]
        return float(np.mean(self.link_fn(r[0] - r[1:])))

    def true_borda_mc(self, x, a, n_samples, rng):
        """Monte-Carlo Borda value against ``n_samples`` uniform opponents."""
        opp = rng.random((n_samples, self.d_a))
        return self.true_borda(x, a, opp)

    def borda_grid(self, contexts, actions, opponents=None):
        """Borda values (G_x, G_a); opponents default to the action grid itself."""
        actions = np.asarray(actions, dtype=np.float64).reshape(-1, self.d_a)
        opponents = actions if opponents is None else np.asarray(opponents).reshape(-1, self.d_a)
        r = self.reward_grid(contexts, actions)
        r_opp = self.reward_grid(contexts, opponents)
        out = np.empty_like(r)
        for i in range(r.shape[0]):
            out[i] = self.link_fn(r[i][:, None] - r_opp[i][None, :]).mean(axis=1)
        return out


def sample_env(d_x=1, d_a=1, m=256, lengthscale=0.3, link="logistic", seed=0):
    if d_x < 0 or d_a < 1:
        raise KernelInputError("need d_x >= 0 and d_a >= 1")
    rng = np.random.default_rng(seed)
    reward = sample_rff(d_x + d_a, m, lengthscale, rng)
    return SyntheticEnv(reward, d_x, d_a, link, float(lengthscale), seed)
