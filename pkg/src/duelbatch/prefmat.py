"""Ground-truth preference matrices.

A K x K matrix ``probs`` where ``probs[i, j]`` is the probability that arm
``i`` wins a single duel against arm ``j``.  Matrices are immutable once
built and may be shared across trial workers.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import AsymmetryError, DiagonalError, ParamError, ParseError, RangeError

TOL = 1e-12
CSV_DIGITS = 12
LINEAR_ORDER_FLOOR = 0.01

SYNTHETIC_KINDS = ("uniform-gap", "linear-order")


class PreferenceMatrix:
    """Validated K x K duel-probability matrix (read-only)."""

    __slots__ = ("_probs",)

    def __init__(self, probs, *, check: bool = True):
        arr = np.array(probs, dtype=float, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ParamError(f"preference matrix must be square with K >= 1, got shape {arr.shape}")
        arr.setflags(write=False)
        self._probs = arr
        if check:
            validate(self)

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def K(self) -> int:
        return self._probs.shape[0]

    def __getitem__(self, ij):
        return self._probs[ij]

    def __eq__(self, other):
        if not isinstance(other, PreferenceMatrix):
            return NotImplemented
        return np.array_equal(self._probs, other._probs)

    def __hash__(self):
        return hash(self._probs.tobytes())

    def __repr__(self):
        return f"PreferenceMatrix(K={self.K})"


@dataclass(frozen=True)
class GapProfile:
    """Condorcet winner and gaps ``p[winner, j] - 1/2`` (``None`` when undefined)."""

    winner: int | None
    gaps: np.ndarray | None
    delta_min: float | None


def validate(matrix: PreferenceMatrix) -> None:
    p = matrix.probs
    bad = np.argwhere((p < 0.0) | (p > 1.0) | ~np.isfinite(p))
    if bad.size:
        i, j = bad[0]
        raise RangeError(f"p[{i},{j}] = {p[i, j]!r} is outside [0, 1]")
    diag = np.abs(np.diag(p) - 0.5)
    if np.any(diag > TOL):
        i = int(np.argmax(diag))
        raise DiagonalError(f"p[{i},{i}] = {p[i, i]!r}, expected 1/2")
    asym = np.abs(p + p.T - 1.0)
    if np.any(asym > TOL):
        i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
        raise AsymmetryError(f"p[{i},{j}] + p[{j},{i}] = {p[i, j] + p[j, i]!r}, expected 1")


def condorcet_analysis(matrix: PreferenceMatrix) -> GapProfile:
    p = matrix.probs
    K = matrix.K
    winner = None
    for i in range(K):
        row = np.delete(p[i], i)
        if np.all(row > 0.5):
            winner = i
            break
    if winner is None:
        return GapProfile(None, None, None)
    gaps = p[winner] - 0.5
    gaps[winner] = 0.0
    positive = gaps[gaps > 0]
    delta_min = float(positive.min()) if positive.size else None
    gaps.setflags(write=False)
    return GapProfile(winner, gaps, delta_min)


def reference_gaps(matrix: PreferenceMatrix) -> tuple[int, np.ndarray]:
    """Arm and gap vector used for regret accounting.

    With a Condorcet winner this is exactly ``(a*, Δ)``.  Without one, the
    maximin arm (largest worst-case win probability) stands in for a*, and
    gaps are clipped at zero so per-step regret stays nonnegative.
    """
    profile = condorcet_analysis(matrix)
    if profile.winner is not None:
        return profile.winner, np.array(profile.gaps)
    p = matrix.probs.copy()
    np.fill_diagonal(p, np.inf)
    ref = int(np.argmax(p.min(axis=1)))
    gaps = np.clip(matrix.probs[ref] - 0.5, 0.0, None)
    gaps[ref] = 0.0
    return ref, gaps


def load_csv(path: str | os.PathLike) -> PreferenceMatrix:
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            values = []
            for col, cell in enumerate(line.split(","), start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(f"not a number: {cell.strip()!r}", lineno, col) from None
            if rows and len(values) != len(rows[0]):
                raise ParseError(
                    f"expected {len(rows[0])} columns, found {len(values)}", lineno, len(values)
                )
            rows.append(values)
            last = lineno
    if not rows:
        raise ParseError("no matrix rows found")
    if len(rows) != len(rows[0]):
        raise ParseError(f"matrix is {len(rows)} x {len(rows[0])}, expected square", last)
    return PreferenceMatrix(rows)


def to_csv(matrix: PreferenceMatrix) -> str:
    return "".join(
        ",".join(f"{x:.{CSV_DIGITS}g}" for x in row) + "\n" for row in matrix.probs
    )


def save_csv(matrix: PreferenceMatrix, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(to_csv(matrix))


def generate_synthetic(kind: str, K: int, eps: float, seed: int | None = 0) -> PreferenceMatrix:
    """Build a synthetic instance in which arm 0 is the Condorcet winner.

    ``uniform-gap``: arm 0 beats everyone with probability ``1/2 + eps``;
    the remaining off-diagonal entries are uniform on
    ``[1/2 - eps/2, 1/2 + eps/2]``.
    ``linear-order``: ``p[i, j] = 1/2 + eps * (j - i) / (K - 1)``, clipped
    to ``[0.01, 0.99]``.  ``seed`` is unused for this kind.
    """
    if not isinstance(K, (int, np.integer)) or K < 2:
        raise ParamError(f"K must be an integer >= 2, got {K!r}")
    if kind == "uniform-gap":
        if not 0.0 < eps <= 0.5:
            raise ParamError(f"uniform-gap needs 0 < eps <= 1/2, got {eps!r}")
        rng = np.random.default_rng(seed)
        upper = np.full((K, K), 0.5)
        upper[0, 1:] = 0.5 + eps
        iu = np.triu_indices(K, k=1)
        rest = iu[0] >= 1
        upper[iu[0][rest], iu[1][rest]] = rng.uniform(0.5 - eps / 2, 0.5 + eps / 2, size=int(rest.sum()))
    elif kind == "linear-order":
        if not 0.0 < eps <= 1.0:
            raise ParamError(f"linear-order needs 0 < eps <= 1, got {eps!r}")
        idx = np.arange(K)
        upper = 0.5 + eps * (idx[None, :] - idx[:, None]) / (K - 1)
        upper = np.clip(upper, LINEAR_ORDER_FLOOR, 1.0 - LINEAR_ORDER_FLOOR)
    else:
        raise ParamError(f"unknown synthetic kind {kind!r}; choose from {SYNTHETIC_KINDS}")
    probs = np.triu(upper, k=1)
    probs = probs + np.tril(1.0 - probs.T, k=-1)
    np.fill_diagonal(probs, 0.5)
    return PreferenceMatrix(probs)
