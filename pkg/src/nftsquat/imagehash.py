"""Difference hashing of grayscale images for near-duplicate detection.

The hash is fixed bit-for-bit: the image is area-averaged onto a 9x8 grid,
bit (r, c) is set iff cell (r, c) is strictly darker than cell (r, c+1),
and bits pack row-major with bit 0 at (0, 0).  All arithmetic is integer
(cell comparisons use un-normalized weighted sums), so results never depend
on floating-point rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import ValidationError

HASH_COLS = 8
HASH_ROWS = 8
GRID_COLS = HASH_COLS + 1  # one extra column for the horizontal gradient


@dataclass(frozen=True)
class GrayImage:
    """Row-major 8-bit luminance raster."""

    width: int
    height: int
    pixels: tuple[int, ...]

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValidationError(f"image dimensions must be positive, got {self.width}x{self.height}")
        pixels = tuple(self.pixels)
        if len(pixels) != self.width * self.height:
            raise ValidationError(
                f"pixel buffer length {len(pixels)} does not match {self.width}x{self.height}"
            )
        for p in pixels:
            if not 0 <= p <= 255:
                raise ValidationError(f"pixel value {p} outside 0..255")
        object.__setattr__(self, "pixels", pixels)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "GrayImage":
        height = len(rows)
        width = len(rows[0]) if height else 0
        flat: list[int] = []
        for row in rows:
            if len(row) != width:
                raise ValidationError("ragged pixel rows")
            flat.extend(row)
        return cls(width=width, height=height, pixels=tuple(flat))

    def at(self, x: int, y: int) -> int:
        return self.pixels[y * self.width + x]


def _axis_overlaps(src: int, dst: int) -> list[list[tuple[int, int]]]:
    """Integer overlap weights of each of *dst* equal cells against *src*
    pixels, in coordinates scaled by *dst* (cell spans src units)."""
    cells: list[list[tuple[int, int]]] = []
    for c in range(dst):
        lo, hi = c * src, (c + 1) * src
        first = lo // dst
        last = (hi - 1) // dst
        row: list[tuple[int, int]] = []
        for i in range(first, last + 1):
            weight = min(hi, (i + 1) * dst) - max(lo, i * dst)
            row.append((i, weight))
        cells.append(row)
    return cells


def dhash(img: GrayImage) -> int:
    """64-bit difference hash of *img* (see module docstring for the exact
    bit layout)."""
    col_overlaps = _axis_overlaps(img.width, GRID_COLS)
    row_overlaps = _axis_overlaps(img.height, HASH_ROWS)

    # Un-normalized cell sums: every cell covers the same scaled area
    # (width x height), so adjacent-cell comparisons need no division.
    sums = [[0] * GRID_COLS for _ in range(HASH_ROWS)]
    for r in range(HASH_ROWS):
        for c in range(GRID_COLS):
            total = 0
            for j, wy in row_overlaps[r]:
                base = j * img.width
                for i, wx in col_overlaps[c]:
                    total += wy * wx * img.pixels[base + i]
            sums[r][c] = total

    bits = 0
    for r in range(HASH_ROWS):
        for c in range(HASH_COLS):
            if sums[r][c] < sums[r][c + 1]:
                bits |= 1 << (r * HASH_COLS + c)
    return bits


def hamming(a: int, b: int) -> int:
    """Number of differing bits between two 64-bit hashes."""
    return ((a ^ b) & (1 << 64) - 1).bit_count()


@dataclass(frozen=True)
class NearDuplicates:
    """Cross-collection hash comparison, split into identical hashes and
    strictly-closer-than-threshold pairs."""

    exact: tuple[tuple[int, int], ...]
    similar: tuple[tuple[int, int], ...]

    @property
    def any_hits(self) -> bool:
        return bool(self.exact or self.similar)


def near_duplicates(
    official: Mapping[int, int],
    squat: Mapping[int, int],
    threshold: int = 5,
    inclusive: bool = False,
) -> NearDuplicates:
    """All cross pairs with hamming distance below *threshold*.

    The bound is strict by default; pass inclusive=True to admit pairs at
    exactly the threshold.  Identical hashes land in the exact bucket, not
    the similar one.
    """
    if not 0 <= threshold <= 64:
        raise ValidationError(f"threshold must be in [0, 64], got {threshold}")
    exact: list[tuple[int, int]] = []
    similar: list[tuple[int, int]] = []
    for tok_o in sorted(official):
        ho = official[tok_o]
        for tok_s in sorted(squat):
            dist = hamming(ho, squat[tok_s])
            if dist == 0:
                exact.append((tok_o, tok_s))
            elif dist < threshold or (inclusive and dist == threshold):
                similar.append((tok_o, tok_s))
    return NearDuplicates(exact=tuple(exact), similar=tuple(similar))


def format_hash(bits: int) -> str:
    return format(bits, "016x")


def parse_hash(text: str) -> int:
    if len(text) != 16:
        raise ValidationError(f"dhash must be 16 hex chars, got {text!r}")
    try:
        return int(text, 16)
    except ValueError:
        raise ValidationError(f"dhash must be 16 hex chars, got {text!r}") from None
