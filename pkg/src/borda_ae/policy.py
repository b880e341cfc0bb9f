"""Pessimistic policy extraction and regret measurement on a fixed grid."""
from dataclasses import dataclass

import numpy as np

from ._backend import kernels as _k
from .kernels import KernelInputError


@dataclass(eq=False)
class LowerEnvelope:
    """Running max over rounds of the lower confidence surface."""
    grids: object
    values: np.ndarray
    rounds_absorbed: int = 0

    @classmethod
    def empty(cls, grids):
        return cls(grids, np.full(grids.shape, -np.inf))

    def copy(self):
        return LowerEnvelope(self.grids, self.values.copy(), self.rounds_absorbed)


@dataclass(frozen=True, eq=False)
class PolicyTable:
    actions: np.ndarray  # chosen action index per context
    values: np.ndarray  # pessimistic value per context

    def rows(self):
        return [(i, int(a), float(v)) for i, (a, v) in enumerate(zip(self.actions, self.values))]


@dataclass(frozen=True, eq=False)
class RegretProfile:
    max_regret: float
    median_regret: float
    per_context: np.ndarray


def absorb_round(envelope, model):
    """Fold the model's current lower bounds into ``envelope`` (in place)."""
    grids = envelope.grids
    if envelope.values.shape != grids.shape:
        raise KernelInputError("envelope values do not match its grids")
    if grids.contexts.shape[1] != model.d_x or grids.actions.shape[1] != model.d_a:
        raise KernelInputError("envelope grids do not match the model dimensions")
    mean, std = model.grid_posterior(envelope.grids)
    _k.envelope_absorb(envelope.values, np.ascontiguousarray(mean),
                       np.ascontiguousarray(std), float(model.beta))
    envelope.rounds_absorbed += 1
    return envelope


def extract_policy(envelope):
    if envelope.rounds_absorbed == 0 or np.all(np.isneginf(envelope.values)):
        raise KernelInputError("cannot extract a policy from an envelope never absorbed")
    idx = np.argmax(envelope.values, axis=1)
    vals = envelope.values[np.arange(len(idx)), idx]
    return PolicyTable(idx, vals)


def regret_profile(policy, env, grids):
    """Per-context reward gap of the policy to the best grid action."""
    if len(policy.actions) != grids.shape[0]:
        raise KernelInputError("policy and grid disagree on the number of contexts")
    if grids.contexts.shape[1] != env.d_x or grids.actions.shape[1] != env.d_a:
        raise KernelInputError("grid dimensions do not match the environment")
    r = env.reward_grid(grids.contexts, grids.actions)
    chosen = r[np.arange(r.shape[0]), policy.actions]
    per_context = r.max(axis=1) - chosen
    return RegretProfile(float(per_context.max()), float(np.median(per_context)), per_context)
