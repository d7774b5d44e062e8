"""Glyph-fidelity scoring: mask IoU and adaptive IoU with dynamic dilation.

The adaptive variant repeatedly widens the width-1 predicted mask with a
3x3 dilation and keeps the best IoU against the ground-truth mask, which
removes the bias introduced by variable stroke widths in real images.
"""

from __future__ import annotations

from dataclasses import dataclass

from .raster import BinaryMask, dilate3x3


def iou(g: BinaryMask, p: BinaryMask) -> float:
    """Intersection-over-union of two same-sized masks."""
    if g.bits.shape != p.bits.shape:
        raise ValueError(
            f"mask dimensions differ: {g.width}x{g.height} vs {p.width}x{p.height}")
    inter = int((g.bits & p.bits).sum())
    union = int((g.bits | p.bits).sum())
    if union == 0:
        raise ValueError("undefined IoU: both masks are empty")
    return inter / union


@dataclass(frozen=True)
class AiouResult:
    score: float
    best_k: int
    curve: tuple[float, ...]


def aiou(g: BinaryMask, p: BinaryMask, k_max: int = 10) -> AiouResult:
    """Best IoU over k in [0, k_max] dilations of the prediction mask.

    best_k is the smallest k attaining the maximum; the full curve is kept so
    callers can inspect the sweep.
    """
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    curve = []
    widened = p
    for k in range(k_max + 1):
        if k > 0:
            widened = dilate3x3(widened, 1)
        curve.append(iou(g, widened))
    score = max(curve)
    return AiouResult(score=score, best_k=curve.index(score), curve=tuple(curve))
