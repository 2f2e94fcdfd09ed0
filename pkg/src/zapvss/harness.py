"""Monte-Carlo echo-path experiments: scenario execution, metrics, CSV output."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from . import signalgen
from .config import ExperimentConfig
from .kernel import FilterSpec, run_filter
from .sparsity import MeasureSpec
from .stepsize import VssParams

__all__ = [
    "CLAMP_DB",
    "DivergenceError",
    "TraceRecord",
    "RunTrace",
    "AveragedTrace",
    "misalignment_db",
    "ratio_to_db",
    "run_seeds",
    "build_signals",
    "filter_spec",
    "run_single",
    "run_scenario",
    "aggregate_runs",
    "steady_state",
    "samples_to_threshold",
    "summarize",
    "emit_csv",
]

log = logging.getLogger(__name__)

CLAMP_DB = -120.0
TRACE_HEADER = "run_id,algorithm,sample,misalign_db,kappa"
SUMMARY_HEADER = "algorithm,segment,misalign_db,kappa"

# odd 64-bit constant spreading run seeds apart; offsets pick independent sub-streams
_RUN_STRIDE = 0x9E3779B97F4A7C15
_OFF_INPUT, _OFF_NOISE_PRE, _OFF_NOISE_POST, _OFF_H_PRE, _OFF_H_POST = 1, 2, 3, 4, 5
_MASK = (1 << 64) - 1


class DivergenceError(RuntimeError):
    def __init__(self, algorithm: str, run_id: int, sample: int):
        super().__init__(f"{algorithm} diverged in run {run_id} at sample {sample}")
        self.algorithm = algorithm
        self.run_id = run_id
        self.sample = sample


class TraceRecord(NamedTuple):
    run_id: int
    algorithm: str
    sample: int
    misalign_db: float
    kappa: float


@dataclass
class RunTrace:
    """Per-sample misalignment and step size of one algorithm in one run."""

    run_id: int
    algorithm: str
    misalign_db: np.ndarray
    kappa: np.ndarray

    def records(self) -> Iterator[TraceRecord]:
        for n, (m, k) in enumerate(zip(self.misalign_db.tolist(), self.kappa.tolist())):
            yield TraceRecord(self.run_id, self.algorithm, n, m, k)


@dataclass
class AveragedTrace:
    algorithm: str
    runs: int
    misalign_db: np.ndarray
    kappa: np.ndarray


def ratio_to_db(ratio, convention: str = "norm"):
    """Convert ``||h-w||^2 / ||h||^2`` to decibels.

    ``norm`` takes ten times the log of the un-squared norm ratio,
    ``squared`` ten times the log of the squared ratio. A zero ratio maps to
    ``CLAMP_DB`` and everything is floored there.
    """
    if convention not in ("norm", "squared"):
        raise ValueError(f"unknown misalignment convention {convention!r}")
    r = np.asarray(ratio, dtype=float)
    scale = 5.0 if convention == "norm" else 10.0
    with np.errstate(divide="ignore"):
        db = scale * np.log10(r)
    db = np.maximum(db, CLAMP_DB)
    return float(db) if db.ndim == 0 else db


def misalignment_db(h, w, convention: str = "norm") -> float:
    """Normalized misalignment between the true channel ``h`` and estimate ``w``."""
    h = np.asarray(h, dtype=float)
    w = np.asarray(w, dtype=float)
    if h.shape != w.shape:
        raise ValueError(f"length mismatch: h has {h.size} taps, w has {w.size}")
    h_energy = float(np.dot(h, h))
    if h_energy == 0.0:
        raise ValueError("misalignment is undefined for an all-zero channel")
    diff = h - w
    return ratio_to_db(float(np.dot(diff, diff)) / h_energy, convention)


def run_seeds(base_seed: int, run_id: int) -> dict:
    root = (base_seed + run_id * _RUN_STRIDE) & _MASK
    return {
        "input": (root + _OFF_INPUT) & _MASK,
        "noise_pre": (root + _OFF_NOISE_PRE) & _MASK,
        "noise_post": (root + _OFF_NOISE_POST) & _MASK,
        "h_pre": (root + _OFF_H_PRE) & _MASK,
        "h_post": (root + _OFF_H_POST) & _MASK,
    }


def build_signals(config: ExperimentConfig, run_id: int):
    """Channels and signals for one run, shared by every algorithm.

    Returns ``(x, d, h_pre, h_post)``. The echo before ``switch_at`` comes
    from ``h_pre`` and from then on from ``h_post``; the convolution always
    sees the full input history. Noise is calibrated to ``snr_db`` on each
    segment separately.
    """
    seeds = run_seeds(config.seed, run_id)
    L, s = config.L, config.switch_at
    x = signalgen.white_noise(config.n_samples, seeds["input"])
    h_pre = signalgen.sparse_impulse(L, config.active_taps, seeds["h_pre"])
    if config.scenario == "SPARSE_SWITCH_SPARSE":
        h_post = signalgen.sparse_impulse(L, config.active_taps, seeds["h_post"])
    else:
        h_post = signalgen.dispersive_impulse(L, seeds["h_post"])
    y = np.concatenate([
        signalgen.synthesize_echo(x, h_pre)[:s],
        signalgen.synthesize_echo(x, h_post)[s:],
    ])
    v = np.zeros_like(y)
    if s > 0:
        v[:s] = signalgen.noise_at_snr(y[:s], config.snr_db, seeds["noise_pre"])
    v[s:] = signalgen.noise_at_snr(y[s:], config.snr_db, seeds["noise_post"])
    return x, y + v, h_pre, h_post


def filter_spec(config: ExperimentConfig, algorithm: str) -> FilterSpec:
    """Translate an algorithm label into the kernel's filter description."""
    c = config
    if algorithm == "LMS":
        return FilterSpec(mu=c.mu, attractor="NONE", controller="FIXED")
    family, att = algorithm.split("_")[1:]
    suffix = att.lower()
    if att == "L1":
        measure = MeasureSpec(c.measure_l1, c.sigma_l0, c.p)
    else:
        measure = MeasureSpec(c.measure_l0, c.sigma_l0, c.p)
    common = dict(lam=c.lam, alpha=c.alpha, eta=c.eta, conv_short=c.conv_short,
                  conv_long=c.conv_long, conv_ratio=c.conv_ratio,
                  kappa_min=getattr(c, f"kappa_min_{suffix}"))
    if family == "FIXED":
        controller = "FIXED"
        vss = VssParams(kappa0=getattr(c, f"kappa_fixed_{suffix}"), **common)
    elif family == "YOU":
        controller = "YOU"
        vss = VssParams(kappa0=getattr(c, f"kappa0_you_{suffix}"), **common)
    else:
        controller = "PROPOSED"
        if family == "VSS2":
            measure = MeasureSpec("HOYER")
        gamma = getattr(c, f"gamma_{family.lower()}_{suffix}")
        vss = VssParams(kappa0=c.kappa0_vss, gamma=gamma, **common)
    return FilterSpec(mu=c.mu, attractor=att, beta=c.beta, controller=controller,
                      measure=measure, vss=vss)


def run_single(config: ExperimentConfig, run_id: int) -> list[RunTrace]:
    """All configured algorithms on one run's signals, in canonical order."""
    x, d, h_pre, h_post = build_signals(config, run_id)
    out = []
    for algorithm in sorted(config.algorithms):
        ratio, kappa, diverged = run_filter(x, d, h_pre, h_post, config.switch_at,
                                            filter_spec(config, algorithm))
        if diverged >= 0:
            raise DivergenceError(algorithm, run_id, diverged)
        out.append(RunTrace(run_id, algorithm, ratio_to_db(ratio, config.misalign_convention), kappa))
    return out


def run_scenario(config: ExperimentConfig, workers: int | None = None) -> list[RunTrace]:
    """Execute every run; output is sorted by run id then algorithm.

    With ``workers > 1`` runs are spread over processes. Each run depends
    only on its own seed, so the result is identical either way.
    """
    workers = config.workers if workers is None else workers
    run_ids = range(config.runs)
    if workers > 1 and config.runs > 1:
        with ProcessPoolExecutor(max_workers=min(workers, config.runs)) as pool:
            per_run = list(pool.map(run_single, [config] * config.runs, run_ids))
    else:
        per_run = [run_single(config, r) for r in run_ids]
    traces = [t for run in per_run for t in run]
    traces.sort(key=lambda t: (t.run_id, t.algorithm))
    return traces


def aggregate_runs(traces: Iterable[RunTrace]) -> dict[str, AveragedTrace]:
    """Per-sample mean (over runs) of misalignment in dB and of kappa."""
    grouped: dict[str, list[RunTrace]] = {}
    for t in traces:
        grouped.setdefault(t.algorithm, []).append(t)
    out = {}
    for algorithm in sorted(grouped):
        group = grouped[algorithm]
        out[algorithm] = AveragedTrace(
            algorithm,
            len(group),
            np.mean([t.misalign_db for t in group], axis=0),
            np.mean([t.kappa for t in group], axis=0),
        )
    return out


def _segments(n_samples: int, switch_at: int) -> dict[str, tuple[int, int]]:
    segs = {}
    if switch_at > 0:
        segs["pre"] = (0, switch_at)
    segs["post"] = (switch_at, n_samples)
    return segs


def steady_state(values: np.ndarray, start: int, stop: int, fraction: float = 0.1) -> float:
    """Mean over the final ``fraction`` of ``values[start:stop]``."""
    length = stop - start
    tail = max(1, int(math.ceil(length * fraction)))
    return float(np.mean(values[stop - tail:stop]))


def samples_to_threshold(values: np.ndarray, threshold_db: float, start: int = 0,
                         stop: int | None = None) -> int | None:
    """Samples after ``start`` until ``values`` first reaches ``threshold_db``.

    Returns ``None`` if the threshold is never reached before ``stop``.
    """
    seg = values[start:stop]
    hits = np.flatnonzero(seg <= threshold_db)
    return int(hits[0]) if hits.size else None


def summarize(averaged: dict[str, AveragedTrace], n_samples: int, switch_at: int) -> list[tuple]:
    """Rows ``(algorithm, segment, steady misalignment dB, steady kappa)``."""
    rows = []
    for algorithm, avg in averaged.items():
        for segment, (a, b) in _segments(n_samples, switch_at).items():
            rows.append((algorithm, segment,
                         steady_state(avg.misalign_db, a, b),
                         steady_state(avg.kappa, a, b)))
    return rows


def _fmt(v: float) -> str:
    return format(v, ".9g")


def emit_csv(traces: list[RunTrace], out_dir, n_samples: int | None = None,
             switch_at: int | None = None) -> tuple[Path, Path]:
    """Write ``traces.csv`` (long format) and ``summary.csv`` into ``out_dir``.

    The summary needs the segment layout; it defaults to a single segment
    covering the whole trace.
    """
    out_dir = Path(out_dir)
    trace_path = out_dir / "traces.csv"
    summary_path = out_dir / "summary.csv"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(trace_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(TRACE_HEADER + "\n")
            for t in traces:
                prefix = f"{t.run_id},{t.algorithm},"
                fh.writelines(
                    f"{prefix}{n},{_fmt(m)},{_fmt(k)}\n"
                    for n, (m, k) in enumerate(zip(t.misalign_db.tolist(), t.kappa.tolist()))
                )
        rows = []
        if traces:
            n = n_samples if n_samples is not None else traces[0].misalign_db.size
            rows = summarize(aggregate_runs(traces), n, switch_at or 0)
        with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(SUMMARY_HEADER + "\n")
            for algorithm, segment, m, k in rows:
                fh.write(f"{algorithm},{segment},{_fmt(m)},{_fmt(k)}\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {out_dir}: {exc}") from exc
    return trace_path, summary_path
