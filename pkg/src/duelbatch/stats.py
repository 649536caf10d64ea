"""Running pairwise duel statistics and the confidence/score formulas built on them.

All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DomainError, EmptySetError


def batch_size(T: int, B: int, r: int) -> int:
    """Per-pair repetition count ``floor(q**r)`` with ``q = T**(1/B)``.

    Computed in exact integer arithmetic as the largest ``m`` with
    ``m**B <= T**r``, so perfect powers (T = 2**14, B = 14) give exact
    values instead of off-by-one floats.
    """
    if T < 1 or B < 1 or r < 0:
        raise DomainError(f"batch_size needs T >= 1, B >= 1, r >= 0 (got {T}, {B}, {r})")
    target = T**r
    guess = math.exp(r * math.log(T) / B)
    # bracket the float guess, then bisect on exact integer powers
    lo = max(int(guess * (1 - 1e-9)) - 1, 0)
    hi = int(guess * (1 + 1e-9)) + 2
    while lo**B > target:
        lo //= 2
    while hi**B <= target:
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mid**B <= target:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class RoundContext:
    r: int
    q: float
    q_r: int
    B: int
    T: int

    @classmethod
    def at(cls, r: int, T: int, B: int) -> "RoundContext":
        if r < 1:
            raise DomainError(f"round index is 1-based, got {r}")
        return cls(r=r, q=T ** (1.0 / B), q_r=batch_size(T, B, r), B=B, T=T)


class PairStats:
    """Comparison counts ``n`` (symmetric) and directed win counts ``w``.

    ``w[i, j]`` is the number of duels ``i`` won against ``j``.
    """

    def __init__(self, K: int):
        self.K = K
        self.n = np.zeros((K, K), dtype=np.int64)
        self.w = np.zeros((K, K), dtype=np.int64)

    def record(self, i: int, j: int, wins_i: int, total: int) -> None:
        if i == j:
            # self-play carries no information about the matrix
            return
        if not 0 <= wins_i <= total:
            raise DomainError(f"wins {wins_i} outside [0, {total}]")
        self.n[i, j] += total
        self.n[j, i] += total
        self.w[i, j] += wins_i
        self.w[j, i] += total - wins_i

    def copy(self) -> "PairStats":
        other = PairStats(self.K)
        other.n = self.n.copy()
        other.w = self.w.copy()
        return other


def phat(stats: PairStats, i: int, j: int) -> float:
    n = stats.n[i, j]
    if n == 0:
        return 0.5
    return float(stats.w[i, j] / n)


def c_radius(n_ij: int, K: int, q_r: int) -> float:
    if n_ij <= 0:
        raise DomainError("c radius undefined for a pair with no comparisons")
    return math.sqrt(2.0 * math.log(2.0 * K * K * q_r) / n_ij)


def gamma_radius(n_ij: int, K: int, B: int, T: int) -> float:
    if n_ij <= 0:
        raise DomainError("gamma radius undefined for a pair with no comparisons")
    return math.sqrt(math.log(K * K * B * T) / (2.0 * n_ij))


def kl_bernoulli(p: float, q: float) -> float:
    """KL divergence between Bernoulli(p) and Bernoulli(q), with 0 log 0 = 0."""
    if not 0.0 < q < 1.0:
        raise DomainError(f"kl_bernoulli needs 0 < q < 1, got {q!r}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"kl_bernoulli needs 0 <= p <= 1, got {p!r}")
    out = 0.0
    if p > 0.0:
        out += p * math.log(p / q)
    if p < 1.0:
        out += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return max(out, 0.0)


def i_score(stats: PairStats, j: int, active_set: Iterable[int]) -> float:
    """Evidence that ``j`` is not the winner: sum of ``n * KL(phat(i, j), 1/2)``
    over active opponents ``i`` with ``phat(i, j) >= 1/2``."""
    total = 0.0
    for i in active_set:
        if i == j or stats.n[i, j] == 0:
            continue
        p = phat(stats, i, j)
        if p >= 0.5:
            total += kl_bernoulli(p, 0.5) * int(stats.n[i, j])
    return total


def i_star(stats: PairStats, active_set: Iterable[int]) -> float:
    active = list(active_set)
    if not active:
        raise EmptySetError("i_star over an empty active set")
    return min(i_score(stats, j, active) for j in active)
