import numpy as np
import pytest

from borda_ae.acquisition import CandidateGrids
from borda_ae.duel_model import BordaEstimate, DuelObservation
from borda_ae.env import RFFReward, SyntheticEnv, sample_env
from borda_ae.kernels import KernelInputError, KernelSpec
from borda_ae.policy import LowerEnvelope, PolicyTable, absorb_round, extract_policy, regret_profile


def model():
    return BordaEstimate(KernelSpec.isotropic("squared-exponential", 0.3, 2), 1, 1)


def feed(m, rng, n):
    for x, a in rng.random((n, 2)):
        m.ingest(DuelObservation((x,), (a,), (rng.random(),), int(rng.integers(2))))


def test_absorb_is_idempotent(rng, backend):
    g = CandidateGrids.make(1, 1, 6, 6)
    m = model()
    feed(m, rng, 10)
    env = absorb_round(LowerEnvelope.empty(g), m)
    once = env.values.copy()
    absorb_round(env, m)
    assert np.array_equal(once, env.values)


def test_first_absorb_equals_lower_surface(rng, backend):
    g = CandidateGrids.make(1, 1, 6, 5)
    m = model()
    feed(m, rng, 10)
    env = absorb_round(LowerEnvelope.empty(g), m)
    lo, _ = m.grid_bounds(g)
    assert np.array_equal(env.values, lo)


def test_running_max_matches_snapshots(rng, backend):
    g = CandidateGrids.make(1, 1, 16, 16)
    m = model().attach_grid(g)
    env = LowerEnvelope.empty(g)
    snapshots = []
    for x, a in rng.random((50, 2)):
        m.ingest(DuelObservation((x,), (a,), (rng.random(),), int(rng.integers(2))))
        absorb_round(env, m)
        lo = np.empty(g.shape)
        for i, c in enumerate(g.contexts):
            for j, act in enumerate(g.actions):
                lo[i, j] = m.confidence_bounds(c, act)[0]
        snapshots.append(lo)
    np.testing.assert_allclose(env.values, np.max(snapshots, axis=0), atol=1e-10)


def test_envelope_monotone(rng):
    g = CandidateGrids.make(1, 1, 8, 8)
    m = model().attach_grid(g)
    env = LowerEnvelope.empty(g)
    prev = env.values.copy()
    for _ in range(40):
        feed(m, rng, 1)
        absorb_round(env, m)
        assert np.all(env.values >= prev)
        prev = env.values.copy()


def test_absorb_grid_mismatch():
    g = CandidateGrids.make(2, 1, 4, 4)
    with pytest.raises(KernelInputError):
        absorb_round(LowerEnvelope.empty(g), model())


def test_extract_constant_and_direct():
    g = CandidateGrids.make(1, 1, 3, 4)
    env = LowerEnvelope(g, np.zeros((3, 4)), 1)
    assert extract_policy(env).actions.tolist() == [0, 0, 0]
    g1 = CandidateGrids(np.array([[0.5]]), np.array([[0.0], [0.5], [1.0]]))
    pol = extract_policy(LowerEnvelope(g1, np.array([[0.1, 0.7, 0.3]]), 1))
    assert pol.actions.tolist() == [1]
    assert pol.values.tolist() == [0.7]


def test_extract_matches_scan(rng):
    g = CandidateGrids.make(1, 1, 9, 7)
    for _ in range(20):
        vals = rng.integers(0, 4, (9, 7)).astype(float)
        pol = extract_policy(LowerEnvelope(g, vals, 1))
        for i in range(9):
            best = max(range(7), key=lambda j: (vals[i, j], -j))
            assert pol.actions[i] == best and pol.values[i] == vals[i, best]


def test_extract_rejects_unabsorbed():
    with pytest.raises(KernelInputError):
        extract_policy(LowerEnvelope.empty(CandidateGrids.make(1, 1, 3, 3)))


def test_optimal_policy_has_zero_regret():
    env = sample_env(seed=5)
    g = CandidateGrids.make(1, 1, 32, 32)
    r = env.reward_grid(g.contexts, g.actions)
    prof = regret_profile(PolicyTable(r.argmax(axis=1), r.max(axis=1)), env, g)
    assert prof.max_regret == 0.0 and np.all(prof.per_context == 0.0)


def test_hand_computed_regret():
    # r(x, a) = sqrt(2) * cos(pi * a): one context, three actions
    reward = RFFReward(np.array([[0.0, np.pi]]), np.array([0.0]), np.array([1.0]))
    env = SyntheticEnv(reward, 1, 1)
    g = CandidateGrids(np.array([[0.3]]), np.array([[0.0], [0.5], [1.0]]))
    prof = regret_profile(PolicyTable(np.array([2]), np.array([0.0])), env, g)
    assert prof.max_regret == pytest.approx(2 * np.sqrt(2), abs=1e-12)
    prof = regret_profile(PolicyTable(np.array([1]), np.array([0.0])), env, g)
    assert prof.max_regret == pytest.approx(np.sqrt(2), abs=1e-12)


def test_regret_consistency(rng):
    env = sample_env(seed=2)
    g = CandidateGrids.make(1, 1, 20, 20)
    prof = regret_profile(PolicyTable(rng.integers(0, 20, 20), np.zeros(20)), env, g)
    assert np.all(prof.per_context >= 0)
    assert prof.max_regret == prof.per_context.max()
    assert prof.max_regret in prof.per_context
    assert prof.median_regret == np.median(prof.per_context)


def test_regret_grid_mismatch():
    env = sample_env(seed=2)
    g = CandidateGrids.make(1, 1, 5, 5)
    with pytest.raises(KernelInputError):
        regret_profile(PolicyTable(np.zeros(4, int), np.zeros(4)), env, g)
