"""Repeated seeded trials, aggregation onto a common checkpoint grid, and result files."""

from __future__ import annotations

import csv
import json
import math
import os
import re
import tempfile
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from . import bounds
from .algos import POLICIES, make_policy, run_policy
from .env import DEFAULT_GRID_SIZE, checkpoint_grid
from .errors import ConfigError, ParseError, UsageError
from .prefmat import PreferenceMatrix, condorcet_analysis, generate_synthetic, load_csv, reference_gaps

THREADS_ENV = "DUELBATCH_THREADS"
FLOAT_DIGITS = 9


@dataclass(frozen=True)
class MatrixSource:
    """Either a CSV path or a synthetic generator spec."""

    path: str | None = None
    kind: str | None = None
    K: int | None = None
    eps: float | None = None
    seed: int = 0

    def load(self) -> PreferenceMatrix:
        if self.path is not None:
            return load_csv(self.path)
        if self.kind is None or self.K is None or self.eps is None:
            raise ConfigError("matrix source needs a CSV path or kind, K and eps")
        return generate_synthetic(self.kind, self.K, self.eps, self.seed)

    def describe(self) -> dict:
        if self.path is not None:
            return {"path": self.path}
        return {"kind": self.kind, "K": self.K, "eps": self.eps, "seed": self.seed}


_AUTO = re.compile(r"^auto(?:\+(\d+))?$")


def resolve_B(B: int | str, T: int, log_base: str = "2") -> int:
    """``"auto"`` is ``floor(log T)`` (base 2 by default), ``"auto+k"`` adds ``k`` rounds."""
    if isinstance(B, (int, np.integer)):
        return int(B)
    text = str(B).strip()
    if text.isdigit():
        return int(text)
    m = _AUTO.match(text)
    if not m:
        raise ConfigError(f"B must be an integer, 'auto' or 'auto+k', got {B!r}")
    if log_base == "2":
        base = math.floor(math.log2(T))
    elif log_base == "e":
        base = math.floor(math.log(T))
    else:
        raise ConfigError(f"log base must be '2' or 'e', got {log_base!r}")
    return max(base, 1) + int(m.group(1) or 0)


@dataclass(frozen=True)
class RunConfig:
    matrix: MatrixSource
    T: int
    algorithm: str = "c2b"
    B: int | str = "auto"
    log_base: str = "2"
    repeats: int = 20
    seed: int = 0
    f_of_K: float | None = None
    grid_size: int = DEFAULT_GRID_SIZE
    workers: int | None = None

    @property
    def rounds(self) -> int:
        return resolve_B(self.B, self.T, self.log_base)

    def check(self, K: int) -> None:
        if self.algorithm not in POLICIES:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {sorted(POLICIES)}")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.T < K:
            raise ConfigError(f"T = {self.T} is smaller than the number of arms K = {K}")
        if self.rounds < 1:
            raise ConfigError("B must be >= 1")
        if self.grid_size < 1:
            raise ConfigError("checkpoint grid size must be >= 1")

    def echo(self) -> dict:
        return {
            "matrix": self.matrix.describe(),
            "algorithm": self.algorithm,
            "T": self.T,
            "B": self.B if isinstance(self.B, str) else int(self.B),
            "B_resolved": self.rounds,
            "log_base": self.log_base,
            "repeats": self.repeats,
            "seed": self.seed,
            "f_of_K": self.f_of_K,
            "grid_size": self.grid_size,
        }


@dataclass
class TrialSummary:
    seed: int
    final_regret: float
    trace: np.ndarray
    rounds_used: int
    champion: int
    final_active: tuple[int, ...]
    eliminations: list[tuple[int, int, str]]
    winner_eliminated: bool


@dataclass
class AggregateTrace:
    t: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    finals: np.ndarray
    label: str = ""
    trials: list[TrialSummary] = field(default_factory=list)
    config: RunConfig | None = None
    K: int | None = None
    reference_arm: int | None = None
    gaps: np.ndarray | None = None
    wall_clock: float | None = None

    @property
    def final_mean(self) -> float:
        return float(self.mean[-1])


def worker_count(requested: int | None = None) -> int:
    if requested is None:
        raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
        try:
            requested = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if requested < 0:
        raise ConfigError("worker count must be >= 0")
    return requested or (os.cpu_count() or 1)


def _trial(args) -> TrialSummary:
    matrix, algorithm, f_of_K, T, B, seed, grid_size = args
    res = run_policy(make_policy(algorithm, f_of_K), matrix, T, B, seed, grid_size=grid_size)
    return TrialSummary(
        seed=seed,
        final_regret=res.final_regret,
        trace=res.trace,
        rounds_used=res.rounds_used,
        champion=res.declared_champion,
        final_active=res.final_active,
        eliminations=res.eliminations,
        winner_eliminated=any(arm == res.reference_arm for _, arm, _ in res.eliminations),
    )


def run_experiment(config: RunConfig, matrix: PreferenceMatrix | None = None) -> AggregateTrace:
    """Run ``config.repeats`` trials with seeds ``seed, seed + 1, ...`` and average them."""
    started = time.perf_counter()
    if matrix is None:
        matrix = config.matrix.load()
    config.check(matrix.K)
    B = config.rounds
    profile = condorcet_analysis(matrix)
    if profile.winner is None:
        warnings.warn("matrix has no Condorcet winner; regret is measured against the maximin arm", stacklevel=2)
    q = config.T ** (1.0 / B)
    if q < 2.0:
        warnings.warn(f"q = T^(1/B) = {q:.4g} < 2; the regret analysis assumes q >= 2", stacklevel=2)

    jobs = [
        (matrix, config.algorithm, config.f_of_K, config.T, B, config.seed + k, config.grid_size)
        for k in range(config.repeats)
    ]
    workers = min(worker_count(config.workers), len(jobs))
    if workers <= 1:
        trials = [_trial(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trials = list(pool.map(_trial, jobs))

    traces = np.vstack([tr.trace for tr in trials])
    mean = traces.mean(axis=0)
    std = traces.std(axis=0, ddof=1) if len(trials) > 1 else np.zeros_like(mean)
    ref, gaps = reference_gaps(matrix)
    return AggregateTrace(
        t=checkpoint_grid(config.T, config.grid_size),
        mean=mean,
        std=std,
        finals=np.array([tr.final_regret for tr in trials]),
        label=config.algorithm,
        trials=trials,
        config=config,
        K=matrix.K,
        reference_arm=ref,
        gaps=gaps,
        wall_clock=time.perf_counter() - started,
    )


def _fmt(x: float) -> str:
    return f"{x:.{FLOAT_DIGITS}g}"


def _atomic_write(path: str | os.PathLike, text: str) -> None:
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trace_csv(trace: AggregateTrace) -> str:
    lines = ["t,mean_regret,std_regret"]
    lines += [f"{int(t)},{_fmt(m)},{_fmt(s)}" for t, m, s in zip(trace.t, trace.mean, trace.std)]
    return "\n".join(lines) + "\n"


def emit_csv(trace: AggregateTrace, path: str | os.PathLike) -> None:
    if trace is None or len(trace.t) == 0:
        raise UsageError("nothing to write: empty trace")
    _atomic_write(path, trace_csv(trace))


def metadata(trace: AggregateTrace, timing: bool = False) -> dict:
    meta = {
        "config": trace.config.echo() if trace.config else None,
        "K": trace.K,
        "reference_arm": trace.reference_arm,
        "gaps": [float(_fmt(g)) for g in trace.gaps] if trace.gaps is not None else None,
        "final_mean_regret": float(_fmt(trace.final_mean)),
        "per_seed": [
            {
                "seed": tr.seed,
                "final_regret": float(_fmt(tr.final_regret)),
                "rounds_used": tr.rounds_used,
                "declared_champion": tr.champion,
                "final_active": list(tr.final_active),
                "winner_eliminated": tr.winner_eliminated,
                "eliminations": [[r, a, why] for r, a, why in tr.eliminations],
            }
            for tr in trace.trials
        ],
    }
    if timing and trace.wall_clock is not None:
        meta["wall_clock_s"] = round(trace.wall_clock, 6)
    return meta


def emit_json(trace: AggregateTrace, path: str | os.PathLike, timing: bool = False) -> None:
    _atomic_write(path, json.dumps(metadata(trace, timing), indent=2, sort_keys=True) + "\n")


def read_trace_csv(path: str | os.PathLike) -> tuple[np.ndarray, np.ndarray]:
    """``(t, value)`` from a results CSV or an external trace (first two columns, header required)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if len(rows) < 2:
        raise ParseError(f"{path}: need a header and at least one data row")
    t, v = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) < 2:
            raise ParseError(f"{path}: need at least two columns", lineno)
        try:
            t.append(float(row[0]))
            v.append(float(row[1]))
        except ValueError:
            raise ParseError(f"{path}: non-numeric value", lineno) from None
    t_arr, v_arr = np.array(t), np.array(v)
    order = np.argsort(t_arr, kind="stable")
    return t_arr[order], v_arr[order]


def resample(t_native: np.ndarray, t_src: np.ndarray, v_src: np.ndarray) -> np.ndarray:
    """Linear interpolation onto ``t_native``; points outside the source range become NaN."""
    out = np.interp(t_native, t_src, v_src)
    out[(t_native < t_src[0]) | (t_native > t_src[-1])] = np.nan
    return out


def emit_svg(
    traces: Sequence[tuple[str, np.ndarray, np.ndarray]],
    path: str | os.PathLike,
    overlays: Iterable[tuple[str, str | os.PathLike]] = (),
    bound: tuple[str, np.ndarray] | None = None,
    log_x: bool = False,
    title: str = "",
) -> None:
    """Regret-vs-t line chart.

    ``traces`` are ``(label, t, mean)``; the first trace's ``t`` is the
    native grid that external overlays are resampled onto.  ``bound`` is a
    ``(label, values)`` curve on the native grid.
    """
    if not traces:
        raise UsageError("emit_svg needs at least one trace")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    native = np.asarray(traces[0][1], dtype=float)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, t, mean in traces:
        ax.plot(t, mean, label=label, linewidth=1.5)
    for label, src in overlays:
        ts, vs = read_trace_csv(src)
        ax.plot(native, resample(native, ts, vs), label=label, linestyle="--", linewidth=1.2)
    if bound is not None:
        label, values = bound
        ax.plot(native, values, label=f"{label} ({bounds.SHAPE_ONLY})", linestyle=":", color="grey")
    if log_x:
        ax.set_xscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("cumulative regret R(t)")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    with plt.rc_context({"svg.hashsalt": "duelbatch"}):
        folder = os.path.dirname(os.path.abspath(os.fspath(path)))
        os.makedirs(folder, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def bound_overlay(trace: AggregateTrace) -> tuple[str, np.ndarray] | None:
    """Shape-only expected bound along the trace's grid, or None without a Condorcet winner."""
    if trace.config is None or trace.gaps is None or trace.K is None or trace.K < 2:
        return None
    positive = trace.gaps[trace.gaps > 0]
    if positive.size == 0:
        return None
    q = trace.config.T ** (1.0 / trace.config.rounds)
    return "bound", bounds.bound_curve(trace.t, trace.K, q, float(positive.min()), trace.gaps)


def sweep(base: RunConfig, *, B_values: Sequence[int | str] = (), algorithms: Sequence[str] = ()) -> list[AggregateTrace]:
    """One experiment per grid point; B values and algorithms combine as a product."""
    Bs = list(B_values) or [base.B]
    algos = list(algorithms) or [base.algorithm]
    matrix = base.matrix.load()
    out = []
    for algo in algos:
        for B in Bs:
            cfg = replace(base, algorithm=algo, B=B)
            agg = run_experiment(cfg, matrix)
            agg.label = f"{algo} B={cfg.rounds}"
            out.append(agg)
    return out


def sweep_summary_csv(results: Sequence[AggregateTrace]) -> str:
    lines = ["label,algorithm,B,mean_final_regret,std_final_regret"]
    for agg in results:
        std = float(np.std(agg.finals, ddof=1)) if len(agg.finals) > 1 else 0.0
        lines.append(
            f"{agg.label},{agg.config.algorithm},{agg.config.rounds},{_fmt(agg.final_mean)},{_fmt(std)}"
        )
    return "\n".join(lines) + "\n"
