"""Synthetic benchmark datasets and headerless-CSV ingestion."""

from __future__ import annotations

import numpy as np

from .gmm import Dataset, GmmModel, sample

# Reference geometry for the ring/square/line benchmark: unit ring centered
# at (-2, 0), side-2 square perimeter centered at (2, 0), connecting
# segment from (-1, 0) to (1, 0).
RING_CENTER = (-2.0, 0.0)
RING_RADIUS = 1.0
SQUARE_CENTER = (2.0, 0.0)
SQUARE_HALF_SIDE = 1.0
LINE_ENDS = (-1.0, 1.0)


class CsvParseError(ValueError):
    """A dataset CSV file could not be parsed."""


def _square_perimeter_points(u: np.ndarray) -> np.ndarray:
    """Map arc-length positions u in [0, 8) onto the square perimeter."""
    cx, cy = SQUARE_CENTER
    h = SQUARE_HALF_SIDE
    side = np.floor(u / 2.0).astype(int)
    s = u - 2.0 * side
    pts = np.empty((u.shape[0], 2))
    bottom = side == 0
    pts[bottom] = np.column_stack([cx - h + s[bottom], np.full(bottom.sum(), cy - h)])
    right = side == 1
    pts[right] = np.column_stack([np.full(right.sum(), cx + h), cy - h + s[right]])
    top = side == 2
    pts[top] = np.column_stack([cx + h - s[top], np.full(top.sum(), cy + h)])
    left = side == 3
    pts[left] = np.column_stack([np.full(left.sum(), cx - h), cy + h - s[left]])
    return pts


def gen_ring_square_line(n: int, seed, noise: float = 0.05) -> Dataset:
    """A ring, a square, and the segment connecting them, in 2-D.

    n/3 points per shape (the remainder goes to the ring), each perturbed
    by isotropic Gaussian noise of the given scale.  Deterministic per seed.
    """
    if n < 3:
        raise ValueError("need at least 3 points (one per shape)")
    if noise < 0:
        raise ValueError("noise scale must be nonnegative")
    base = n // 3
    n_ring = base + (n - 3 * base)
    rng = np.random.default_rng(seed)

    ang = rng.uniform(0.0, 2.0 * np.pi, n_ring)
    ring = np.column_stack([RING_CENTER[0] + RING_RADIUS * np.cos(ang),
                            RING_CENTER[1] + RING_RADIUS * np.sin(ang)])
    square = _square_perimeter_points(rng.uniform(0.0, 8.0, base))
    line = np.column_stack([rng.uniform(LINE_ENDS[0], LINE_ENDS[1], base),
                            np.zeros(base)])
    pts = np.vstack([ring, square, line])
    pts = pts + noise * rng.standard_normal(pts.shape)
    return Dataset(pts, label="ring-square-line")


def gen_gmm_samples(model: GmmModel, n: int, seed) -> Dataset:
    """Samples drawn from a mixture model (delegates to the model sampler)."""
    return sample(model, n, seed)


def save_csv(data: Dataset, path) -> None:
    """Write one sample per row as comma-separated floats, no header.

    Values use shortest round-trip formatting, so load(save(x)) is exact.
    """
    with open(path, "w") as fh:
        for row in data.samples:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_csv(path) -> Dataset:
    """Read a headerless CSV of d floats per row."""
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise CsvParseError(
                    f"{path}: row {lineno} has {len(cells)} fields, expected {width}")
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                bad = next(c for c in cells if not _is_float(c))
                raise CsvParseError(
                    f"{path}: row {lineno} has non-numeric value {bad!r}") from None
    if not rows:
        raise CsvParseError(f"{path}: no data rows")
    return Dataset(np.array(rows), label=str(path))


def _is_float(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True
