"""Fractal sets of layer shifts in the unit square.

A bi-infinite point maps to the square by reading its nonnegative
coordinates as base-m digits of x and its nonpositive coordinates as digits
of y (the center digit feeds both axes).  A central block of length 2n+1
therefore fills an axis-aligned square of side m^-(n+1); rendering a shift
space means enumerating its admissible central blocks at a given depth.
The expansion is one-to-one off the measure-zero set of digit-boundary
points; rectangles meeting only along boundaries are kept distinct.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DepthLimit
from .shifts import Presentation, count_words, enumerate_words

RECTANGLE_BUDGET = 2_000_000


@dataclass(frozen=True)
class FractalSpec:
    presentation: Presentation
    depth: int
    resolution: int = 512
    symbol_index: dict = None  # letter -> digit 0..m-1
    budget: int = RECTANGLE_BUDGET

    def digit_map(self):
        if self.symbol_index is not None:
            return dict(self.symbol_index)
        letters = self.presentation.letter_alphabet()
        return {a: i for i, a in enumerate(letters)}


def expansion_rectangle(central_block, m, digit_of=None):
    """Axis-aligned cell of a central block x_{-n} .. x_0 .. x_n.

    x-digits are x_0..x_n, y-digits x_0, x_{-1}, .., x_{-n}; both sides have
    length m^-(n+1).  Returns (x0, y0, x1, y1).
    """
    if len(central_block) % 2 != 1:
        raise ValueError("central block must have odd length 2n+1")
    n = len(central_block) // 2
    digits = [digit_of[c] if digit_of else int(c) for c in central_block]
    if any(not 0 <= d < m for d in digits):
        raise ValueError("digits out of range for base m")
    x0 = sum(digits[n + k] / m ** (k + 1) for k in range(n + 1))
    y0 = sum(digits[n - k] / m ** (k + 1) for k in range(n + 1))
    side = m ** -(n + 1)
    return (x0, y0, x0 + side, y0 + side)


@dataclass(frozen=True)
class FractalImage:
    rectangles: tuple
    raster: np.ndarray  # uint8, 0 = ink
    depth: int
    base: int
    resolution: int
    digit_map: dict


def render(spec: FractalSpec):
    """Enumerate admissible central blocks and rasterize their cells.

    Deterministic for a fixed spec: blocks come out of the subset automaton
    in lexicographic letter order.  Raises DepthLimit when the block count
    exceeds the budget.
    """
    digit_of = spec.digit_map()
    m = len(digit_of)
    length = 2 * spec.depth + 1
    n_blocks = count_words(spec.presentation, length,
                           k_oracle=max(length, 64)).count
    if n_blocks > spec.budget:
        raise DepthLimit("depth %d needs %d rectangles (budget %d)"
                         % (spec.depth, n_blocks, spec.budget))
    rects = []
    res = spec.resolution
    raster = np.full((res, res), 255, dtype=np.uint8)
    for block in enumerate_words(spec.presentation, length):
        rect = expansion_rectangle(block, m, digit_of)
        rects.append(rect)
        x0, y0, x1, y1 = rect
        # coverage rounding; row 0 of the raster is y = 1 (image convention)
        c0, c1 = int(math.floor(x0 * res)), int(math.ceil(x1 * res))
        r1, r0 = res - int(math.floor(y0 * res)), res - int(math.ceil(y1 * res))
        c1, r1 = max(c1, c0 + 1), max(r1, r0 + 1)
        raster[max(r0, 0):min(r1, res), max(c0, 0):min(c1, res)] = 0
    return FractalImage(rectangles=tuple(rects), raster=raster, depth=spec.depth,
                        base=m, resolution=res, digit_map=digit_of)


def total_area(image: FractalImage):
    """Sum of rectangle areas = Gamma_{2n+1} * m^-2(n+1)."""
    return sum((x1 - x0) * (y1 - y0) for x0, y0, x1, y1 in image.rectangles)


def write_pgm(image: FractalImage, path):
    """Binary portable graymap (P5); deterministic bytes for a fixed spec.

    The header comment records depth, base and the letter-to-digit map."""
    digits = " ".join("%s=%d" % (("+" if k == 1 else "-" if k == -1 else k), v)
                      for k, v in sorted(image.digit_map.items(), key=str))
    header = "P5\n# depth=%d base=%d digits: %s\n%d %d\n255\n" % (
        image.depth, image.base, digits, image.resolution, image.resolution)
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(image.raster.tobytes())


def write_rectangles(image: FractalImage, path):
    """Plain-text rectangle list, one 'x0 y0 x1 y1' line, 12 significant digits."""
    with open(path, "w") as fh:
        for rect in image.rectangles:
            fh.write(" ".join("%.12g" % v for v in rect) + "\n")


def render_figure(images, titles, path, dpi=150):
    """Save a matplotlib figure with one panel per fractal image."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    n = len(images)
    fig, axes = plt.subplots(1, n, figsize=(4 * n, 4), squeeze=False)
    for ax, img, title in zip(axes[0], images, titles):
        ax.imshow(img.raster, cmap="gray", vmin=0, vmax=255,
                  extent=(0, 1, 0, 1), interpolation="nearest")
        ax.set_title(title)
        ax.set_xticks((0, 1))
        ax.set_yticks((0, 1))
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path
