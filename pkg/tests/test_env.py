import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from duelbatch.env import (
    BatchPlan,
    BudgetState,
    RegretLedger,
    checkpoint_grid,
    draw_wins,
    execute_batch,
    play_filler,
)
from duelbatch.prefmat import PreferenceMatrix, generate_synthetic, reference_gaps

DET = PreferenceMatrix([[0.5, 1.0, 1.0], [0.0, 0.5, 0.5], [0.0, 0.5, 0.5]])


def fresh(T, gaps=(0.0, 0.2, 0.2), grid=None):
    return BudgetState(T), RegretLedger(list(gaps), grid)


def test_execute_deterministic_pair():
    budget, ledger = fresh(100)
    (out,) = execute_batch(BatchPlan(1, (((0, 1), 4),)), DET, budget, ledger, seed=3)
    assert (out.wins_i, out.total) == (4, 4)
    assert budget.remaining == 96


def test_execute_reports_wins_for_submitted_orientation():
    budget, ledger = fresh(100)
    (out,) = execute_batch(BatchPlan(1, (((1, 0), 4),)), DET, budget, ledger, seed=3)
    assert out.pair == (1, 0) and out.wins_i == 0


def test_execute_self_play_of_winner_costs_nothing():
    budget, ledger = fresh(100)
    execute_batch(BatchPlan(1, (((0, 0), 5),)), DET, budget, ledger, seed=0)
    assert ledger.cumulative == 0.0 and ledger.t == 5


def test_execute_truncates():
    budget, ledger = fresh(100)
    budget.remaining = 3
    (out,) = execute_batch(BatchPlan(1, (((0, 1), 10),)), DET, budget, ledger, seed=0)
    assert out.total == 3 and budget.remaining == 0


def test_truncation_follows_canonical_order():
    budget, ledger = fresh(100)
    budget.remaining = 6
    plan = BatchPlan.from_pairs(1, [(1, 2), (0, 2), (0, 1)], 4)
    outs = execute_batch(plan, DET, budget, ledger, seed=0)
    assert [(o.pair, o.total) for o in outs] == [((0, 1), 4), ((0, 2), 2), ((1, 2), 0)]


def test_truncated_pair_sees_a_prefix_of_the_draws():
    m = generate_synthetic("uniform-gap", 4, 0.3, 1)
    u = np.random.default_rng(np.random.SeedSequence(9, spawn_key=(2, 1, 3))).random(50)
    for n in (0, 1, 17, 50):
        assert draw_wins(9, 2, (3, 1), m[1, 3], n) == int(np.count_nonzero(u[:n] < m[1, 3]))


def test_filler_examples():
    budget, ledger = fresh(100)
    play_filler(0, budget, ledger)
    assert ledger.cumulative == 0.0 and budget.remaining == 0

    budget, ledger = fresh(10)
    play_filler(1, budget, ledger)
    assert ledger.cumulative == pytest.approx(2.0)

    budget, ledger = fresh(10)
    budget.remaining = 0
    assert play_filler(1, budget, ledger) == 0
    assert ledger.t == 0


def test_from_pairs_dedups_unordered():
    plan = BatchPlan.from_pairs(1, [(2, 0), (0, 2), (1, 0)], 3)
    assert plan.pairs == [(0, 1), (0, 2)] and plan.size == 6


def test_checkpoint_grid():
    g = checkpoint_grid(10**5)
    assert g[0] == 1 and g[-1] == 10**5
    assert np.all(np.diff(g) > 0) and len(g) <= 512
    assert list(checkpoint_grid(1)) == [1]


def test_ledger_fills_grid_exactly():
    grid = np.array([1, 3, 5, 10])
    ledger = RegretLedger([0.0, 0.4], grid)
    ledger.accrue(0, 1, 4)
    ledger.accrue(1, 1, 6)
    np.testing.assert_allclose(ledger.grid_values, [0.2, 0.6, 1.2, 3.2])


@settings(max_examples=40, deadline=None)
@given(
    K=st.integers(2, 6),
    T=st.integers(1, 3000),
    seed=st.integers(0, 2**32 - 1),
    msed=st.integers(0, 1000),
    count=st.integers(1, 200),
)
def test_exact_budget_and_regret_identity(K, T, seed, msed, count):
    m = generate_synthetic("uniform-gap", K, 0.2, msed)
    _, gaps = reference_gaps(m)
    budget = BudgetState(T)
    ledger = RegretLedger(gaps, checkpoint_grid(T, 64))
    r = 1
    while budget.remaining > 0 and r < 5:
        pairs = [(i, j) for i in range(K) for j in range(i + 1, K)]
        execute_batch(BatchPlan.from_pairs(r, pairs, count), m, budget, ledger, seed)
        r += 1
    play_filler(K - 1, budget, ledger)
    assert ledger.t == T and budget.remaining == 0 and budget.used == T
    assert ledger.arm_counts.sum() == 2 * T
    assert ledger.cumulative == pytest.approx(ledger.tally_regret(), rel=1e-9, abs=1e-12)
    vals = [v for _, v in ledger.checkpoints]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_reproducibility():
    m = generate_synthetic("uniform-gap", 5, 0.2, 3)
    plan = BatchPlan.from_pairs(2, [(i, j) for i in range(5) for j in range(i + 1, 5)], 37)

    def once():
        budget, ledger = BudgetState(1000), RegretLedger(reference_gaps(m)[1], checkpoint_grid(1000))
        outs = execute_batch(plan, m, budget, ledger, seed=11)
        return outs, ledger.grid_values.tobytes(), ledger.boundaries

    assert once() == once()


@pytest.mark.slow
def test_binomial_concentration():
    inside = 0
    for seed in range(100):
        rate = draw_wins(seed, 1, (0, 1), 0.7, 10**5) / 10**5
        inside += 0.695 <= rate <= 0.705
    assert inside >= 95
