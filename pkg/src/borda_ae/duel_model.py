"""Contextual Borda function estimator built on KRR over (context, action).

Outcomes are regressed as ``R - 1/2`` around a prior mean of 1/2, so an
empty model predicts the uninformative Borda value everywhere. The opponent
action never enters the regression.
"""
import math
from dataclasses import dataclass, replace

import numpy as np

from . import krr
from .kernels import KernelInputError

BETA_MODES = ("greedy-online", "analytic-linear", "constant")


@dataclass(frozen=True)
class DuelObservation:
    context: tuple
    action: tuple
    opponent: tuple
    outcome: int
    round: int = 0
    uniform_opponent: bool = True

    def __post_init__(self):
        for name in ("context", "action", "opponent"):
            vec = tuple(float(v) for v in np.atleast_1d(getattr(self, name)))
            if any(not 0.0 <= v <= 1.0 for v in vec):
                raise KernelInputError(f"{name} {vec} outside the unit box")
            object.__setattr__(self, name, vec)
        if self.outcome not in (0, 1):
            raise KernelInputError(f"outcome must be 0 or 1, got {self.outcome!r}")
        object.__setattr__(self, "outcome", int(self.outcome))
        if self.round < 0:
            raise KernelInputError("round must be nonnegative")

    def to_row(self):
        return [self.round, *self.context, *self.action, *self.opponent, self.outcome]

    @classmethod
    def from_row(cls, row, d_x, d_a):
        vals = [float(v) for v in row]
        i = 1
        ctx = vals[i:i + d_x]
        i += d_x
        act = vals[i:i + d_a]
        i += d_a
        opp = vals[i:i + d_a]
        return cls(tuple(ctx), tuple(act), tuple(opp), int(vals[-1]), int(vals[0]))

    @staticmethod
    def header(d_x, d_a):
        return (["round"] + [f"x{i}" for i in range(d_x)] + [f"a{i}" for i in range(d_a)]
                + [f"opp{i}" for i in range(d_a)] + ["outcome"])


@dataclass(frozen=True)
class BetaSchedule:
    """Confidence multiplier ``2B + sqrt(2 Phi + 1 + log(2/delta))``.

    ``Phi`` is the accumulated information gain in ``greedy-online`` mode and
    ``dim * log t`` in ``analytic-linear`` mode. ``constant`` mode ignores
    both and returns ``constant``.
    """
    B: float = 2.0
    delta: float = 0.05
    info_gain: float = 0.0
    mode: str = "greedy-online"
    constant: float = 2.0
    dim: int = 1

    def __post_init__(self):
        if self.mode not in BETA_MODES:
            raise ValueError(f"unknown beta mode {self.mode!r}")
        if not self.B > 0:
            raise ValueError("B must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.info_gain < 0:
            raise ValueError("accumulated information gain must be nonnegative")

    def phi(self, t):
        if self.mode == "analytic-linear":
            return self.dim * math.log(t) if t > 1 else 0.0
        return self.info_gain

    def beta(self, t):
        if self.mode == "constant":
            return self.constant
        return 2.0 * self.B + math.sqrt(2.0 * self.phi(t) + 1.0 + math.log(2.0 / self.delta))

    def accumulate(self, gain):
        return replace(self, info_gain=self.info_gain + gain)


class BordaEstimate:
    """Posterior over the contextual Borda function.

    ``ingest`` mutates in place; use ``copy`` to branch.
    """

    PRIOR_MEAN = 0.5

    def __init__(self, kernel, d_x, d_a, noise_variance=0.25, beta=None):
        if kernel.dim != d_x + d_a:
            raise KernelInputError(
                f"kernel dimension {kernel.dim} != d_x + d_a = {d_x + d_a}"
            )
        self.d_x, self.d_a = d_x, d_a
        self.posterior = krr.fit(kernel, np.zeros((0, d_x + d_a)), [], noise_variance,
                                 self.PRIOR_MEAN)
        self.schedule = beta if beta is not None else BetaSchedule(dim=d_x + d_a)
        self.observations = []
        self.queried_variances = []  # sigma^2_{t-1}(q_t) for each ingest
        self._grid = None
        self._grid_key = None

    @property
    def rounds_seen(self):
        return len(self.observations)

    @property
    def beta(self):
        return self.schedule.beta(self.rounds_seen)

    @property
    def noise_variance(self):
        return self.posterior.noise_variance

    def joint(self, x, a):
        x = np.asarray(x, dtype=np.float64).ravel()
        a = np.asarray(a, dtype=np.float64).ravel()
        if x.shape[0] != self.d_x or a.shape[0] != self.d_a:
            raise KernelInputError(
                f"expected context dim {self.d_x} and action dim {self.d_a}, "
                f"got {x.shape[0]} and {a.shape[0]}"
            )
        return np.concatenate([x, a])

    def ingest(self, obs):
        if not obs.uniform_opponent:
            raise KernelInputError("Borda regression requires a uniformly drawn opponent")
        z = self.joint(obs.context, obs.action)
        _, std = krr.predict(self.posterior, z)
        var = std * std
        gain = 0.5 * math.log1p(var / self.noise_variance)
        new, l, d, v_new, refactored = krr._append(self.posterior, z, float(obs.outcome))
        self.posterior = new
        if self._grid is not None:
            self._grid.append(new, l, d, v_new, refactored)
        self.schedule = self.schedule.accumulate(gain)
        self.queried_variances.append(var)
        self.observations.append(obs)
        return self

    def predict(self, x, a):
        return krr.predict(self.posterior, self.joint(x, a))

    def confidence_bounds(self, x, a):
        mean, std = self.predict(x, a)
        b = self.beta
        return mean - b * std, mean + b * std

    def attach_grid(self, grids):
        """Keep the posterior over ``grids`` (a CandidateGrids) current on every ingest."""
        key = grids.key()
        if self._grid_key != key:
            self._grid = krr.GridPosterior(self.posterior, grids.joint_points())
            self._grid_key = key
        return self

    def grid_posterior(self, grids):
        """Mean and std over the context x action grid, shaped (G_x, G_a)."""
        shape = (len(grids.contexts), len(grids.actions))
        if self._grid is not None and self._grid_key == grids.key():
            return self._grid.mean.reshape(shape), self._grid.std.reshape(shape)
        mean, std = krr.predict_many(self.posterior, grids.joint_points())
        return mean.reshape(shape), std.reshape(shape)

    def grid_bounds(self, grids):
        mean, std = self.grid_posterior(grids)
        b = self.beta
        return mean - b * std, mean + b * std

    def copy(self):
        other = object.__new__(BordaEstimate)
        other.__dict__.update(self.__dict__)
        other.observations = list(self.observations)
        other.queried_variances = list(self.queried_variances)
        if self._grid is not None:
            other._grid = self._grid.copy()
        return other
