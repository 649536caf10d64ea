"""Computable quantities from the regret analysis.

The regret bounds are O(.) statements; here every hidden constant is set
to 1 and results are labeled ``"shape-only"``.  They are meant for plot
overlays and threshold sanity checks, never as acceptance thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError

SHAPE_ONLY = "shape-only"

# guards ceil() against log-ratio round-off, e.g. log(4)/log(2) -> 2.0000000000000004
_CEIL_SLACK = 1e-12


def _ceil(x: float) -> int:
    return math.ceil(x - _CEIL_SLACK)


@dataclass(frozen=True)
class BoundInputs:
    K: int
    T: int
    B: int
    delta_min: float
    delta: float

    def __post_init__(self):
        if self.K < 2:
            raise DomainError(f"K must be >= 2, got {self.K}")
        if self.T < 2:
            raise DomainError(f"T must be >= 2, got {self.T}")
        if not 1 <= self.B <= math.log2(self.T):
            raise DomainError(f"B must lie in [1, log2 T] = [1, {math.log2(self.T):.4g}], got {self.B}")
        if not 0.0 < self.delta_min <= 0.5:
            raise DomainError(f"delta_min must lie in (0, 1/2], got {self.delta_min}")
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")

    @property
    def q(self) -> float:
        return self.T ** (1.0 / self.B)


def c_delta(q: float, delta: float) -> int:
    """First round from which every estimate is trusted at confidence ``1 - delta``."""
    if not q > 1.0:
        raise DomainError(f"q must exceed 1, got {q}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    return _ceil(0.5 * math.log(1.0 / delta) / math.log(q))


def a_constant(K: int, delta_min: float) -> float:
    if K < 2:
        raise DomainError(f"K must be >= 2, got {K}")
    if not delta_min > 0.0:
        raise DomainError(f"delta_min must be positive, got {delta_min}")
    return 32.0 * math.log(2.0 * K * K) / delta_min**2


def r_delta(q: float, delta: float, K: int, delta_min: float) -> int:
    """Smallest round ``r >= C(delta) + 1`` with ``q**r >= 2 A ln A``."""
    A = a_constant(K, delta_min)
    first = c_delta(q, delta) + 1
    need = _ceil(math.log(2.0 * A * math.log(A)) / math.log(q))
    return max(first, need)


def regret_bound_terms(
    K: int, q: float, T: float, delta_min: float, gaps: Sequence[float], delta: float | None = None
) -> dict[str, float]:
    """The three terms of the regret bound for batch growth base ``q``.

    With ``delta`` given, the middle term carries the ``sqrt(1/delta)``
    factor of the high-probability statement.
    """
    if K < 2 or q < 1.0 or T < 2 or not delta_min > 0.0:
        raise DomainError("need K >= 2, q >= 1, T >= 2, delta_min > 0")
    g = np.asarray(gaps, dtype=float)
    positive = g[g > 0]
    if np.any(g < 0):
        raise DomainError("gaps must be nonnegative")
    lnK = math.log(K)
    trap = q * K * K * lnK / delta_min**2 * math.log(lnK / delta_min)
    spread = q * q * K * K * (1.0 if delta is None else math.sqrt(1.0 / delta))
    elim = float(np.sum(q * math.log(K * T) / positive))
    return {"trapping": trap, "exploration": spread, "elimination": elim, "total": trap + spread + elim}


def regret_bound_expected(inputs: BoundInputs, gaps: Sequence[float]) -> float:
    """Expected-regret bound, hidden constants set to 1 (shape-only)."""
    return regret_bound_terms(inputs.K, inputs.q, inputs.T, inputs.delta_min, gaps)["total"]


def regret_bound_high_prob(inputs: BoundInputs, gaps: Sequence[float]) -> float:
    """Bound holding with probability ``1 - delta - 1/T``, hidden constants set to 1 (shape-only)."""
    return regret_bound_terms(inputs.K, inputs.q, inputs.T, inputs.delta_min, gaps, inputs.delta)["total"]


def bound_curve(t: Sequence[float], K: int, q: float, delta_min: float, gaps: Sequence[float]) -> np.ndarray:
    """Shape-only expected bound at horizon ``t`` for fixed growth base ``q``.

    Entries with ``t < max(q, 2)`` (fewer than one round) are NaN.
    """
    t = np.asarray(t, dtype=float)
    out = np.full(t.shape, np.nan)
    for k, tk in enumerate(t):
        if tk >= max(q, 2.0):
            out[k] = regret_bound_terms(K, q, tk, delta_min, gaps)["total"]
    return out
