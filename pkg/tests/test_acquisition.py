import numpy as np
import pytest
from scipy.stats import chisquare

from borda_ae.acquisition import (CandidateGrids, box_grid, context_objective, propose_duel,
                                  select_action_optimistic, select_context)
from borda_ae.duel_model import BetaSchedule, BordaEstimate, DuelObservation
from borda_ae.kernels import KernelInputError, KernelSpec


def model(beta=None, ls=0.3):
    return BordaEstimate(KernelSpec.isotropic("squared-exponential", ls, 2), 1, 1, 0.25, beta)


def random_model(rng, n, beta=None):
    m = model(beta)
    for x, a in rng.random((n, 2)):
        m.ingest(DuelObservation((x,), (a,), (rng.random(),), int(rng.integers(2))))
    return m


def brute_force(m, grids):
    """Independent per-point enumeration of the context and action rules."""
    gx, ga = grids.shape
    lo = np.empty((gx, ga))
    hi = np.empty((gx, ga))
    for i, x in enumerate(grids.contexts):
        for j, a in enumerate(grids.actions):
            lo[i, j], hi[i, j] = m.confidence_bounds(x, a)
    ctx = int(np.argmax(hi.max(axis=1) - lo.max(axis=1)))
    return ctx, [int(np.argmax(hi[i])) for i in range(gx)], lo


def test_grid_validation():
    with pytest.raises(KernelInputError):
        CandidateGrids(np.zeros((0, 1)), np.zeros((2, 1)))
    with pytest.raises(KernelInputError):
        CandidateGrids(np.array([[0.1], [0.1]]), np.array([[0.2]]))
    with pytest.raises(KernelInputError):
        CandidateGrids(np.array([[1.5]]), np.array([[0.2]]))


def test_box_grid_shapes():
    assert box_grid(1, 5).ravel().tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    pts = box_grid(3, 16, seed=4)
    assert pts.shape == (16, 3) and pts.min() >= 0 and pts.max() <= 1
    assert np.array_equal(pts, box_grid(3, 16, seed=4))


def test_joint_points_are_context_major():
    g = CandidateGrids.make(1, 1, 3, 2)
    J = g.joint_points()
    assert J.shape == (6, 2)
    assert J[3].tolist() == [0.5, 1.0]


def test_empty_model_ties_go_to_index_zero():
    g = CandidateGrids.make(1, 1, 8, 8)
    m = model()
    assert select_context(m, g) == 0
    assert select_action_optimistic(m, 3, g) == 0
    assert select_action_optimistic(m, [0.4], g) == 0


def test_selects_context_away_from_data(rng):
    g = CandidateGrids(np.array([[0.1], [0.9]]), box_grid(1, 8))
    m = model()
    for a in np.linspace(0, 1, 40):
        m.ingest(DuelObservation((0.1,), (a,), (rng.random(),), int(rng.integers(2))))
    assert select_context(m, g) == 1
    assert brute_force(m, g)[0] == 1


def test_optimistic_action_prefers_winner(rng):
    m = model(BetaSchedule(mode="constant", constant=0.1))
    g = CandidateGrids.make(1, 1, 4, 5)
    for _ in range(30):
        m.ingest(DuelObservation((0.5,), (0.75,), (rng.random(),), 1))
    assert select_action_optimistic(m, [0.5], g) == 3


@pytest.mark.parametrize("seed", range(12))
def test_matches_brute_force_on_small_grid(seed, backend):
    r = np.random.default_rng(seed)
    m = random_model(r, int(r.integers(0, 40)))
    g = CandidateGrids(np.sort(r.random((4, 1)), axis=0), np.sort(r.random((4, 1)), axis=0))
    ctx, acts, _ = brute_force(m, g)
    assert select_context(m, g) == ctx
    assert [select_action_optimistic(m, g.contexts[i], g) for i in range(4)] == acts
    m.attach_grid(g)
    assert select_context(m, g) == ctx
    assert [select_action_optimistic(m, i, g) for i in range(4)] == acts


def test_fresh_borda_ae_proposal(rng):
    g = CandidateGrids.make(1, 1, 6, 6)
    p = propose_duel("borda-ae", model(), g, rng)
    assert (p.context_index, p.action_index) == (0, 0)
    assert p.uniform_opponent and 0.0 <= p.opponent[0] <= 1.0


def test_uniform_strategy_is_reproducible():
    g = CandidateGrids.make(1, 1, 16, 16)

    def draw():
        r = np.random.default_rng(3)
        return [(p.context_index, p.action_index, float(p.opponent[0]))
                for p in (propose_duel("borda-uniform", model(), g, r) for _ in range(50))]

    assert draw() == draw()


def test_ucb_context_marginal_is_uniform():
    g = CandidateGrids.make(1, 1, 10, 4)
    m = model()
    r = np.random.default_rng(11)
    counts = np.bincount([propose_duel("borda-ucb", m, g, r).context_index
                          for _ in range(10_000)], minlength=10)
    p = 0.1
    band = 3 * np.sqrt(10_000 * p * (1 - p))
    assert np.all(np.abs(counts - 1000) <= band)
    assert chisquare(counts).pvalue > 0.01


def test_opponent_histogram_uniform(rng):
    g = CandidateGrids.make(1, 1, 8, 8)
    m = random_model(rng, 30)
    opp = [propose_duel("borda-ae", m, g, rng).opponent[0] for _ in range(2000)]
    counts, _ = np.histogram(opp, bins=10, range=(0, 1))
    assert chisquare(counts).pvalue > 0.01


def test_unknown_strategy_and_dimension_mismatch(rng):
    g = CandidateGrids.make(1, 1, 4, 4)
    with pytest.raises(KernelInputError):
        propose_duel("borda-greedy", model(), g, rng)
    with pytest.raises(KernelInputError):
        select_context(model(), CandidateGrids.make(2, 1, 4, 4))


def test_context_objective_values(rng):
    m = random_model(rng, 20)
    g = CandidateGrids.make(1, 1, 5, 7)
    widths, best = context_objective(m, g)
    lo, hi = m.grid_bounds(g)
    np.testing.assert_allclose(widths, hi.max(axis=1) - lo.max(axis=1), atol=1e-12)
    assert best.tolist() == hi.argmax(axis=1).tolist()
