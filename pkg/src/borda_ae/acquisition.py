"""Query selection over finite candidate grids.

Three strategies share one interface:

* ``borda-ae``: context with the widest gap between the optimistic and the
  pessimistic value function, then the optimistic action at that context.
* ``borda-ucb``: uniform context, optimistic action.
* ``borda-uniform``: uniform context and action.

The opponent action is always uniform on the unit box. Ties go to the lowest
index.
"""
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from ._backend import kernels as _k
from .kernels import KernelInputError
from .krr import predict_many

STRATEGIES = ("borda-ae", "borda-ucb", "borda-uniform")


def box_grid(dim, size, seed=0):
    """``size`` points in [0, 1]^dim: a linspace in 1D, a scrambled Sobol set above."""
    if size < 1:
        raise KernelInputError("grid size must be positive")
    if dim == 1:
        return np.linspace(0.0, 1.0, size)[:, None]
    sobol = qmc.Sobol(dim, scramble=True, seed=seed)
    with warnings.catch_warnings():
        # grid sizes need not be powers of two
        warnings.filterwarnings("ignore", "The balance properties", UserWarning)
        return sobol.random(size)


@dataclass(frozen=True, eq=False)
class CandidateGrids:
    contexts: np.ndarray  # (G_x, d_x)
    actions: np.ndarray  # (G_a, d_a)
    seed: int = 0

    def __post_init__(self):
        for name in ("contexts", "actions"):
            pts = np.asarray(getattr(self, name), dtype=np.float64)
            if pts.ndim != 2 or pts.shape[0] == 0:
                raise KernelInputError(f"{name} grid must be a nonempty 2D array")
            if np.any(pts < 0.0) or np.any(pts > 1.0):
                raise KernelInputError(f"{name} grid leaves the unit box")
            if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
                raise KernelInputError(f"{name} grid has duplicate points")
            pts.setflags(write=False)
            object.__setattr__(self, name, pts)

    @classmethod
    def make(cls, d_x, d_a, n_contexts=64, n_actions=64, seed=0):
        return cls(box_grid(d_x, n_contexts, seed), box_grid(d_a, n_actions, seed + 1), seed)

    @property
    def shape(self):
        return self.contexts.shape[0], self.actions.shape[0]

    def joint_points(self):
        """All (context, action) pairs, context-major: row ``i * G_a + j``."""
        gx, ga = self.shape
        return np.hstack([np.repeat(self.contexts, ga, axis=0),
                          np.tile(self.actions, (gx, 1))])

    def key(self):
        return (self.contexts.tobytes(), self.actions.tobytes())


@dataclass(frozen=True)
class Proposal:
    context_index: int
    action_index: int
    context: np.ndarray
    action: np.ndarray
    opponent: np.ndarray
    uniform_opponent: bool = True


def _check(model, grids):
    if grids.contexts.shape[1] != model.d_x or grids.actions.shape[1] != model.d_a:
        raise KernelInputError("grid dimensions do not match the model")


def context_objective(model, grids):
    """Per-context gap ``max_a upper - max_a lower`` and optimistic action index."""
    _check(model, grids)
    mean, std = model.grid_posterior(grids)
    return _k.context_widths(np.ascontiguousarray(mean), np.ascontiguousarray(std),
                             float(model.beta))


def select_context(model, grids):
    widths, _ = context_objective(model, grids)
    return int(np.argmax(widths))


def select_action_optimistic(model, x, grids):
    """Optimistic action at context ``x``: a grid index or a context vector."""
    _check(model, grids)
    if isinstance(x, (int, np.integer)):
        mean, std = model.grid_posterior(grids)
        upper = mean[x] + model.beta * std[x]
    else:
        x = np.asarray(x, dtype=np.float64).ravel()
        points = np.hstack([np.tile(x, (grids.shape[1], 1)), grids.actions])
        mean, std = predict_many(model.posterior, points)
        upper = mean + model.beta * std
    return int(np.argmax(upper))


def propose_duel(strategy, model, grids, rng):
    if strategy not in STRATEGIES:
        raise KernelInputError(f"unknown strategy {strategy!r}")
    gx, ga = grids.shape
    if strategy == "borda-ae":
        widths, best = context_objective(model, grids)
        i = int(np.argmax(widths))
        j = int(best[i])
    elif strategy == "borda-ucb":
        i = int(rng.integers(gx))
        j = select_action_optimistic(model, i, grids)
    else:
        i = int(rng.integers(gx))
        j = int(rng.integers(ga))
    opponent = rng.random(model.d_a)
    return Proposal(i, j, grids.contexts[i], grids.actions[j], opponent)
