"""Batch sensitivity / invariance curve runners with metric aggregation.

Runs a seeded error simulation over a trajectory corpus, averages the chosen
metrics per error magnitude, and min-max normalizes each curve to [0, 1] for
trend comparison.  A seeded synthetic corpus generator ships here so the
runners need no external datasets.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .error_sim import (change_sample_rate, delete_strokes, drift_points,
                        drift_strokes, insert_strokes, widen_strokes)
from .glyph_metrics import aiou, iou
from .raster import binarize, rasterize
from .seq_metrics import dtw, rmse
from .traj_core import (PenState, TrajPoint, Trajectory, normalize_to_canvas)

SENSITIVITY_KINDS = ("stroke-insert", "stroke-delete", "point-drift", "stroke-drift")
INVARIANCE_TRANSFORMS = ("stroke-width", "sample-rate")

DEFAULT_GRIDS = {
    "stroke-insert": (1, 2, 3, 4, 5),
    "stroke-delete": (1, 2, 3, 4, 5),
    "point-drift": (1, 2, 3, 4, 5, 6, 7, 8),
    "stroke-drift": (1, 2, 3, 4, 5, 6, 7, 8),
    "stroke-width": (0, 1, 2, 3, 4),
    "sample-rate": (0.5, 1.0, 2.0, 4.0),
}

DEFAULT_BASE_DRIFT = 2.0


@dataclass(frozen=True)
class CurveReport:
    metric: str
    grid: tuple
    raw_mean: tuple
    normalized: tuple
    samples_used: tuple
    samples_skipped: tuple
    seed: int


def normalize_curve(values) -> list[float]:
    """Min-max normalization to [0, 1]; a constant curve maps to all zeros."""
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("cannot normalize an empty curve")
    lo, hi = min(vals), max(vals)
    if hi == lo:
        return [0.0] * len(vals)
    return [(v - lo) / (hi - lo) for v in vals]


def derive_seed(seed: int, index: int) -> int:
    """Per-sample seed, schedule-independent."""
    return (seed ^ index) & 0xFFFFFFFFFFFFFFFF


def _thread_map(fn, items, threads: int):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _metric_values(gt: Trajectory, pred: Trajectory, metrics, k_max: int) -> dict:
    """Per-metric values for one (gt, pred) pair; None marks a skipped metric."""
    out: dict[str, float | None] = {}
    masks = None
    dtw_result = None
    for name in metrics:
        try:
            if name in ("aiou", "iou"):
                if masks is None:
                    masks = (rasterize(gt), rasterize(pred))
                out[name] = (aiou(masks[0], masks[1], k_max).score
                             if name == "aiou" else iou(masks[0], masks[1]))
            elif name in ("dtw", "ldtw"):
                if dtw_result is None:
                    dtw_result = dtw(gt, pred)
                out[name] = (dtw_result.cost if name == "dtw"
                             else dtw_result.cost / len(dtw_result.path))
            elif name == "rmse":
                out[name] = rmse(gt, pred)
            else:
                raise KeyError(f"unknown metric {name!r}")
        except ValueError:
            out[name] = None
    return out


def _aggregate(grid, metrics, per_sample: list, seed: int) -> list[CurveReport]:
    """per_sample[i][mi] is a metric->value dict for sample i at magnitude mi."""
    reports = []
    for name in metrics:
        means, used, skipped = [], [], []
        for mi in range(len(grid)):
            vals = [row[mi][name] for row in per_sample if row[mi][name] is not None]
            n_skip = len(per_sample) - len(vals)
            means.append(math.fsum(vals) / len(vals) if vals else math.nan)
            used.append(len(vals))
            skipped.append(n_skip)
        if all(not math.isnan(v) for v in means):
            norm = normalize_curve(means)
        else:
            # undefined points poison min-max scaling; report a flat curve
            norm = [0.0] * len(means)
        reports.append(CurveReport(metric=name, grid=tuple(grid),
                                   raw_mean=tuple(means), normalized=tuple(norm),
                                   samples_used=tuple(used),
                                   samples_skipped=tuple(skipped), seed=seed))
    return reports


def _apply_error(kind: str, traj: Trajectory, magnitude, seed: int) -> Trajectory:
    if kind == "stroke-insert":
        return insert_strokes(traj, int(magnitude), seed)
    if kind == "stroke-delete":
        return delete_strokes(traj, int(magnitude), seed)
    if kind == "point-drift":
        return drift_points(traj, float(magnitude), seed)
    if kind == "stroke-drift":
        return drift_strokes(traj, float(magnitude), seed)
    raise ValueError(f"unknown error kind {kind!r}")


def _check_run_inputs(corpus, grid):
    if not corpus:
        raise ValueError("corpus must be non-empty")
    if not grid:
        raise ValueError("magnitude grid must be non-empty")
    if list(grid) != sorted(grid):
        raise ValueError("magnitude grid must be ascending")


def sensitivity_run(corpus, kind: str, grid=None, metrics=("aiou", "ldtw"),
                    seed: int = 0, k_max: int = 10, threads: int = 1) -> list[CurveReport]:
    """Error-sensitivity curves: mean metric value per error magnitude."""
    if kind not in SENSITIVITY_KINDS:
        raise ValueError(f"unknown error kind {kind!r}; expected one of {SENSITIVITY_KINDS}")
    grid = tuple(grid if grid is not None else DEFAULT_GRIDS[kind])
    _check_run_inputs(corpus, grid)

    def eval_sample(item):
        i, traj = item
        sseed = derive_seed(seed, i)
        rows = []
        for magnitude in grid:
            try:
                pred = _apply_error(kind, traj, magnitude, sseed)
            except ValueError:
                rows.append({name: None for name in metrics})
                continue
            rows.append(_metric_values(traj, pred, metrics, k_max))
        return rows

    per_sample = _thread_map(eval_sample, list(enumerate(corpus)), threads)
    return _aggregate(grid, metrics, per_sample, seed)


def invariance_run(corpus, transform: str, grid=None, metrics=None, seed: int = 0,
                   k_max: int = 10, threads: int = 1,
                   base_drift: float | None = None) -> list[CurveReport]:
    """Nuisance-transform curves: stroke width (glyph metrics) or sample rate
    (sequence metrics).

    In sample-rate mode the prediction is the ground truth under a fixed base
    point-drift (default 2 px) so sequence metrics start non-zero; in
    stroke-width mode the default prediction is the clean trajectory, since
    any misalignment couples the glyph scores to the width axis and masks the
    adaptation effect being measured.  Pass base_drift explicitly to override
    either default (0 keeps the prediction clean).
    """
    if transform not in INVARIANCE_TRANSFORMS:
        raise ValueError(
            f"unknown transform {transform!r}; expected one of {INVARIANCE_TRANSFORMS}")
    grid = tuple(grid if grid is not None else DEFAULT_GRIDS[transform])
    _check_run_inputs(corpus, grid)
    if metrics is None:
        metrics = ("aiou", "iou") if transform == "stroke-width" else ("dtw", "ldtw")
    if base_drift is None:
        base_drift = DEFAULT_BASE_DRIFT if transform == "sample-rate" else 0.0

    def eval_sample(item):
        i, traj = item
        sseed = derive_seed(seed, i)
        pred = drift_points(traj, base_drift, sseed) if base_drift > 0 else traj
        rows = []
        if transform == "stroke-width":
            pred_mask = rasterize(pred)
            for k in grid:
                g = binarize(widen_strokes(traj, int(k)))
                row = {}
                for name in metrics:
                    try:
                        row[name] = (aiou(g, pred_mask, k_max).score
                                     if name == "aiou" else iou(g, pred_mask))
                    except ValueError:
                        row[name] = None
                rows.append(row)
        else:
            for factor in grid:
                predf = change_sample_rate(pred, float(factor))
                rows.append(_metric_values(traj, predf, metrics, k_max))
        return rows

    per_sample = _thread_map(eval_sample, list(enumerate(corpus)), threads)
    return _aggregate(grid, metrics, per_sample, seed)


# --- report serialization ---------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.6f}"


def reports_to_csv(reports) -> str:
    """Deterministic CSV, one row per (metric, magnitude)."""
    lines = ["metric,magnitude,raw_mean,normalized,samples_used,samples_skipped"]
    for rep in sorted(reports, key=lambda r: r.metric):
        for mi, magnitude in enumerate(rep.grid):
            lines.append(",".join([
                rep.metric, _fmt(float(magnitude)), _fmt(rep.raw_mean[mi]),
                _fmt(rep.normalized[mi]), str(rep.samples_used[mi]),
                str(rep.samples_skipped[mi])]))
    return "\n".join(lines) + "\n"


def reports_to_json(reports) -> str:
    """JSON mirror of the CSV content."""
    rows = []
    for rep in sorted(reports, key=lambda r: r.metric):
        for mi, magnitude in enumerate(rep.grid):
            rows.append({
                "metric": rep.metric,
                "magnitude": round(float(magnitude), 6),
                "raw_mean": round(rep.raw_mean[mi], 6),
                "normalized": round(rep.normalized[mi], 6),
                "samples_used": rep.samples_used[mi],
                "samples_skipped": rep.samples_skipped[mi],
            })
    return json.dumps({"rows": rows}, indent=2, sort_keys=True) + "\n"


# --- synthetic corpus -------------------------------------------------------

def make_synthetic_corpus(n: int, seed: int = 0, side: int = 64,
                          stroke_range=(6, 8), points_range=(5, 9),
                          step_range=(5.0, 11.0), wiggle: float = 0.9) -> list[Trajectory]:
    """Seeded random multi-stroke glyphs, normalized to the canvas.

    Each stroke is a random walk: per-point heading change is uniform in
    [-wiggle, wiggle] radians and step length uniform in step_range, so small
    wiggle yields smooth curves and large wiggle jagged zigzags.
    """
    if n < 1:
        raise ValueError("corpus size must be at least 1")
    corpus = []
    for i in range(n):
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence(entropy=seed, spawn_key=(i,))))
        n_strokes = int(rng.integers(stroke_range[0], stroke_range[1] + 1))
        points: list[TrajPoint] = []
        for _ in range(n_strokes):
            m = int(rng.integers(points_range[0], points_range[1] + 1))
            x = float(rng.uniform(4.0, side - 5.0))
            y = float(rng.uniform(4.0, side - 5.0))
            heading = float(rng.uniform(0.0, 2.0 * math.pi))
            coords = [(x, y)]
            for _ in range(m - 1):
                heading += float(rng.uniform(-wiggle, wiggle))
                step = float(rng.uniform(step_range[0], step_range[1]))
                x = min(max(x + step * math.cos(heading), 0.0), side - 1.0)
                y = min(max(y + step * math.sin(heading), 0.0), side - 1.0)
                coords.append((x, y))
            for j, (cx, cy) in enumerate(coords):
                state = PenState.UP if j == len(coords) - 1 else PenState.DOWN
                points.append(TrajPoint(cx, cy, state))
        last = points[-1]
        points.append(TrajPoint(last.x, last.y, PenState.EOS))
        corpus.append(normalize_to_canvas(Trajectory(tuple(points), canvas_side=side)))
    return corpus
