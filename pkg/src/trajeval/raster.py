"""Binary stroke masks: rendering, Otsu binarization, 3x3 dilation, PGM I/O."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .traj_core import Trajectory, strokes_of


class OutOfCanvasError(ValueError):
    """A trajectory point rounds to a pixel outside the raster canvas."""


class DegenerateHistogramError(ValueError):
    """Otsu thresholding needs at least two distinct intensities."""


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit grayscale image, row-major, 0 = black ink under default polarity."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.ndim != 2 or px.shape[0] == 0 or px.shape[1] == 0:
            raise ValueError("image must be a non-empty 2-D array")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Boolean raster, True = stroke foreground."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=bool)
        if b.ndim != 2 or b.shape[0] == 0 or b.shape[1] == 0:
            raise ValueError("mask must be a non-empty 2-D array")
        object.__setattr__(self, "bits", b)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def count(self) -> int:
        return int(self.bits.sum())

    def same_bits(self, other: "BinaryMask") -> bool:
        return self.bits.shape == other.bits.shape and bool(
            np.array_equal(self.bits, other.bits))


def _rhu_div(a: int, b: int) -> int:
    # round-half-up of a/b for integer a, b > 0; exact in integer arithmetic
    return (2 * a + b) // (2 * b)


def line_pixels(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    """Closest-pixel (Bresenham) raster of the segment between two pixels."""
    n = max(abs(x1 - x0), abs(y1 - y0))
    if n == 0:
        return [(x0, y0)]
    return [(x0 + _rhu_div((x1 - x0) * i, n), y0 + _rhu_div((y1 - y0) * i, n))
            for i in range(n + 1)]


def rasterize(traj: Trajectory, side: int | None = None) -> BinaryMask:
    """Render a trajectory as a width-1 mask; no segment crosses a pen-up."""
    side = side if side is not None else traj.canvas_side
    for idx, pt in enumerate(traj.drawn_points()):
        px, py = pt.pixel()
        if not (0 <= px < side and 0 <= py < side):
            raise OutOfCanvasError(
                f"point {idx} at ({pt.x}, {pt.y}) rounds to pixel ({px}, {py}) "
                f"outside the {side}x{side} canvas")
    grid = np.zeros((side, side), dtype=bool)
    for stroke in strokes_of(traj):
        pix = [p.pixel() for p in stroke.points]
        if len(pix) == 1:
            grid[pix[0][1], pix[0][0]] = True
            continue
        for (ax, ay), (bx, by) in zip(pix, pix[1:]):
            for x, y in line_pixels(ax, ay, bx, by):
                grid[y, x] = True
    return BinaryMask(grid)


def otsu_threshold(img: GrayImage) -> int:
    """Threshold level maximizing between-class variance; smallest argmax wins."""
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(np.float64)
    if np.count_nonzero(hist) < 2:
        raise DegenerateHistogramError(
            "degenerate histogram: image has a single intensity, no separation exists")
    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)
    total = w0[-1]
    m0 = np.cumsum(hist * levels)
    w1 = total - w0
    valid = (w0 > 0) & (w1 > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        mean0 = m0 / w0
        mean1 = (m0[-1] - m0) / w1
        between = w0 * w1 * (mean0 - mean1) ** 2
    between = np.where(valid, between, -1.0)
    return int(np.argmax(between))


def binarize(img: GrayImage, polarity: str = "ink-is-dark") -> BinaryMask:
    """Foreground = pixels on the ink side of the Otsu threshold."""
    t = otsu_threshold(img)
    if polarity == "ink-is-dark":
        return BinaryMask(img.pixels <= t)
    if polarity == "ink-is-light":
        return BinaryMask(img.pixels > t)
    raise ValueError(f"unknown polarity {polarity!r}")


def dilate3x3(mask: BinaryMask, k: int = 1) -> BinaryMask:
    """k applications of dilation with the full 3x3 element, clipped at borders."""
    if k < 0:
        raise ValueError("dilation count must be non-negative")
    bits = mask.bits
    h, w = bits.shape
    for _ in range(k):
        padded = np.pad(bits, 1)
        acc = np.zeros_like(bits)
        for dy in range(3):
            for dx in range(3):
                acc |= padded[dy:dy + h, dx:dx + w]
        bits = acc
    return BinaryMask(bits)


def mask_to_gray(mask: BinaryMask, foreground: int = 255, background: int = 0) -> GrayImage:
    return GrayImage(np.where(mask.bits, foreground, background).astype(np.uint8))


# --- binary PGM (P5, maxval 255) -------------------------------------------

def _pgm_header_fields(data: bytes):
    """Yield whitespace-separated header tokens, skipping '#' comments."""
    i = 0
    while i < len(data):
        c = data[i:i + 1]
        if c.isspace():
            i += 1
        elif c == b"#":
            while i < len(data) and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
        else:
            j = i
            while j < len(data) and not data[j:j + 1].isspace():
                j += 1
            yield data[i:j], j
            i = j


def write_pgm(img: GrayImage, path) -> None:
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (img.width, img.height))
        fh.write(img.pixels.tobytes())


def read_pgm(path) -> GrayImage:
    with open(path, "rb") as fh:
        data = fh.read()
    fields = _pgm_header_fields(data)
    try:
        magic, _ = next(fields)
        if magic != b"P5":
            raise ValueError(f"unsupported PGM magic {magic!r}, expected P5")
        (w_tok, _), (h_tok, _), (max_tok, end) = next(fields), next(fields), next(fields)
    except StopIteration:
        raise ValueError("truncated PGM header") from None
    width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    if maxval != 255:
        raise ValueError(f"unsupported PGM maxval {maxval}, expected 255")
    raw = data[end + 1:end + 1 + width * height]
    if len(raw) < width * height:
        raise ValueError("PGM pixel data shorter than promised by header")
    return GrayImage(np.frombuffer(raw, dtype=np.uint8).reshape(height, width))


def write_mask_pgm(mask: BinaryMask, path) -> None:
    write_pgm(mask_to_gray(mask), path)


def read_mask_pgm(path) -> BinaryMask:
    return BinaryMask(read_pgm(path).pixels >= 128)
