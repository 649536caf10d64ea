"""Seeded stochastic duel environment.

Executes batch plans against a ground-truth matrix, enforces the total
comparison budget and accounts regret per comparison.

Randomness is counter-based: the outcomes of pair ``(i, j)`` (``i < j``) in
round ``r`` of a trial with seed ``s`` come from
``SeedSequence(s, spawn_key=(r, i, j))``, and the ``k``-th uniform of that
stream decides the ``k``-th duel (``i`` wins iff ``u < p[i, j]``).  A
truncated pair therefore sees a prefix of the draws the untruncated pair
would have seen, and reordering a plan never changes another pair's
outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .prefmat import PreferenceMatrix

DEFAULT_GRID_SIZE = 512

Pair = tuple[int, int]


def canonical(pair: Sequence[int]) -> Pair:
    i, j = int(pair[0]), int(pair[1])
    return (i, j) if i <= j else (j, i)


@dataclass(frozen=True)
class BatchPlan:
    """One round's deduplicated unordered pairs, each with its repetition count.

    Entries are stored in canonical order: pairs as ``(min, max)``, sorted
    lexicographically.
    """

    round: int
    entries: tuple[tuple[Pair, int], ...]

    @classmethod
    def from_pairs(cls, round: int, pairs: Iterable[Sequence[int]], count: int) -> "BatchPlan":
        unique = sorted({canonical(p) for p in pairs})
        return cls(round, tuple((p, int(count)) for p in unique))

    @property
    def pairs(self) -> list[Pair]:
        return [p for p, _ in self.entries]

    @property
    def size(self) -> int:
        return sum(c for _, c in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class DuelOutcome:
    pair: Pair
    wins_i: int
    total: int


@dataclass
class BudgetState:
    T: int
    remaining: int = -1

    def __post_init__(self):
        if self.remaining < 0:
            self.remaining = self.T

    @property
    def used(self) -> int:
        return self.T - self.remaining

    def take(self, n: int) -> int:
        got = min(int(n), self.remaining)
        self.remaining -= got
        return got


def checkpoint_grid(T: int, size: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    """Up to ``size`` distinct log-spaced integer time steps in ``[1, T]``, always including ``T``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    pts = np.unique(np.rint(np.logspace(0.0, np.log10(T), num=max(int(size), 1))).astype(np.int64))
    pts = pts[(pts >= 1) & (pts <= T)]
    if pts.size == 0 or pts[-1] != T:
        pts = np.append(pts, T)
    return pts


class RegretLedger:
    """Cumulative regret with per-arm comparison tallies and checkpoints.

    ``grid_values[k]`` is the cumulative regret after ``grid[k]`` comparisons;
    ``boundaries`` holds ``(t, cumulative)`` at every batch end.
    """

    def __init__(self, gaps: Sequence[float], grid: np.ndarray | None = None):
        self.gaps = np.asarray(gaps, dtype=float)
        self.t = 0
        self.cumulative = 0.0
        self.arm_counts = np.zeros(self.gaps.shape[0], dtype=np.int64)
        self.grid = np.asarray(grid if grid is not None else np.empty(0, dtype=np.int64), dtype=np.int64)
        self.grid_values = np.full(self.grid.shape[0], np.nan)
        self.boundaries: list[tuple[int, float]] = []
        self._next = 0

    def accrue(self, i: int, j: int, count: int) -> None:
        if count <= 0:
            return
        rate = (self.gaps[i] + self.gaps[j]) / 2.0
        t0, c0 = self.t, self.cumulative
        t1 = t0 + int(count)
        stop = int(np.searchsorted(self.grid, t1, side="right"))
        if stop > self._next:
            steps = self.grid[self._next:stop] - t0
            self.grid_values[self._next:stop] = c0 + rate * steps
            self._next = stop
        self.t = t1
        self.cumulative = c0 + rate * count
        self.arm_counts[i] += count
        self.arm_counts[j] += count

    def mark_boundary(self) -> None:
        if not self.boundaries or self.boundaries[-1][0] != self.t:
            self.boundaries.append((self.t, self.cumulative))

    def tally_regret(self) -> float:
        """``(1/2) * sum_j T_j * gap_j`` from the per-arm tallies (self-play counts twice)."""
        return 0.5 * float(np.dot(self.arm_counts, self.gaps))

    @property
    def checkpoints(self) -> list[tuple[int, float]]:
        filled = [(int(t), float(v)) for t, v in zip(self.grid, self.grid_values) if not np.isnan(v)]
        merged = dict(filled)
        merged.update(self.boundaries)
        return sorted(merged.items())


def duel_stream(seed: int, r: int, i: int, j: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(r), int(i), int(j))))


def draw_wins(seed: int, r: int, pair: Sequence[int], p_lo_hi: float, n: int) -> int:
    """Number of wins of ``min(pair)`` over ``max(pair)`` in the first ``n`` duels of the round."""
    if n <= 0:
        return 0
    lo, hi = canonical(pair)
    u = duel_stream(seed, r, lo, hi).random(int(n))
    return int(np.count_nonzero(u < p_lo_hi))


def execute_batch(
    plan: BatchPlan,
    matrix: PreferenceMatrix,
    budget: BudgetState,
    ledger: RegretLedger,
    seed: int,
) -> list[DuelOutcome]:
    """Run every plan entry in canonical order, truncating at budget exhaustion.

    Entries reached after the budget is gone are reported with ``total=0``.
    """
    outcomes = []
    for pair, count in sorted(plan.entries, key=lambda e: canonical(e[0])):
        lo, hi = canonical(pair)
        n = budget.take(count)
        wins_lo = draw_wins(seed, plan.round, (lo, hi), matrix.probs[lo, hi], n)
        ledger.accrue(lo, hi, n)
        wins_i = wins_lo if pair[0] == lo else n - wins_lo
        outcomes.append(DuelOutcome(tuple(pair), wins_i, n))
    ledger.mark_boundary()
    return outcomes


def play_filler(arm: int, budget: BudgetState, ledger: RegretLedger) -> int:
    """Spend the whole remaining budget on ``(arm, arm)``; returns the number of steps played."""
    n = budget.take(budget.remaining)
    ledger.accrue(arm, arm, n)
    if n:
        ledger.mark_boundary()
    return n
