"""Self-organizing maps and grid layouts for featuremap views.

Classic online Kohonen training with exponential learning/neighborhood decay
over a near-square grid, plus the two non-SOM orderings (by confidence and by
video affiliation). Everything is deterministic given the seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .catalog import ItemKey
from .errors import CapacityError
from .features import FeatureKind, FeatureVector


@dataclass(frozen=True)
class SomParams:
    epochs: int = 40
    eta0: float = 0.5
    eta_f: float = 0.01
    sigma0: float | None = None  # default max(W, H) / 2, resolved at train time
    sigma_f: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if not 0 < self.eta_f <= self.eta0 <= 1:
            raise ValueError(f"need 0 < etaF <= eta0 <= 1, got {self.eta_f}/{self.eta0}")
        if self.sigma0 is not None and not 0 < self.sigma_f <= self.sigma0:
            raise ValueError(f"need 0 < sigmaF <= sigma0, got {self.sigma_f}/{self.sigma0}")


def grid_shape(n: int) -> tuple[int, int]:
    """Near-square grid with at least n cells: W = ceil(sqrt(n)), H = ceil(n/W)."""
    if n < 1:
        raise ValueError("need at least one item")
    w = math.isqrt(n)
    if w * w < n:
        w += 1
    h = -(-n // w)
    return w, h


def decay(start: float, final: float, t: int, epochs: int) -> float:
    """Exponential schedule from start to final across epochs (start when epochs==1)."""
    if epochs == 1:
        return start
    return start * (final / start) ** (t / (epochs - 1))


@dataclass(frozen=True)
class SomGrid:
    width: int
    height: int
    units: np.ndarray  # (width*height, dims), read-only
    trained_with: FeatureKind

    @property
    def cell_count(self) -> int:
        return self.width * self.height

    def coords(self) -> np.ndarray:
        """(cells, 2) array of grid coordinates: cell i sits at (i % W, i // W)."""
        idx = np.arange(self.cell_count)
        return np.stack([idx % self.width, idx // self.width], axis=1).astype(np.float64)


class LayoutMode(str, Enum):
    SOM = "som"
    CONFIDENCE = "confidence"
    VIDEO = "video"


@dataclass(frozen=True)
class GridLayout:
    """Injective, total assignment of items to grid cells."""

    mode: LayoutMode
    width: int
    height: int
    cells: dict[int, ItemKey]


def _stack(vectors: Sequence[tuple[ItemKey, FeatureVector]]) -> np.ndarray:
    if not vectors:
        raise ValueError("need at least one vector")
    dims = vectors[0][1].dims
    for _, vec in vectors:
        if vec.dims != dims:
            raise ValueError(f"dimension mismatch: {vec.dims} vs {dims}")
    return np.stack([vec.values for _, vec in vectors]).astype(np.float64)


def _epoch(units: np.ndarray, coords: np.ndarray, batch: np.ndarray, order: np.ndarray, eta: float, sigma: float) -> None:
    """One online pass: for each item, pull every unit toward it, weighted by
    the Gaussian of grid distance to the BMU. Mutates units in place."""
    for i in order:
        x = batch[i]
        b = int(((units - x) ** 2).sum(axis=1).argmin())
        g2 = ((coords - coords[b]) ** 2).sum(axis=1)
        h = np.exp(-g2 / (2.0 * sigma * sigma))
        units += eta * h[:, None] * (x - units)


def train_som(vectors: Sequence[tuple[ItemKey, FeatureVector]], params: SomParams = SomParams()) -> SomGrid:
    """Train a Kohonen grid on item vectors.

    Units are initialized by sampling input vectors with the seeded
    generator; each epoch visits the items in a fresh seeded shuffle. The
    result is bit-identical for identical (inputs, seed).
    """
    batch = _stack(vectors)
    n = batch.shape[0]
    w, h = grid_shape(n)
    sigma0 = params.sigma0 if params.sigma0 is not None else max(w, h) / 2.0
    if not 0 < params.sigma_f <= sigma0:
        raise ValueError(f"need 0 < sigmaF <= sigma0, got {params.sigma_f}/{sigma0}")
    rng = np.random.Generator(np.random.PCG64(params.seed))
    units = batch[rng.integers(0, n, size=w * h)].copy()
    idx = np.arange(w * h)
    coords = np.stack([idx % w, idx // w], axis=1).astype(np.float64)
    for t in range(params.epochs):
        eta = decay(params.eta0, params.eta_f, t, params.epochs)
        sigma = decay(sigma0, params.sigma_f, t, params.epochs)
        _epoch(units, coords, batch, rng.permutation(n), eta, sigma)
    units.setflags(write=False)
    return SomGrid(w, h, units, vectors[0][1].kind)


def bmu(grid: SomGrid, v: FeatureVector | np.ndarray) -> int:
    """Best matching unit: argmin squared distance, lowest index on ties."""
    values = v.values if isinstance(v, FeatureVector) else np.asarray(v, dtype=np.float64)
    if values.shape[0] != grid.units.shape[1]:
        raise ValueError(f"dimension mismatch: {values.shape[0]} vs {grid.units.shape[1]}")
    return int(((grid.units - values) ** 2).sum(axis=1).argmin())


def assign_unique_cells(grid: SomGrid, items: Sequence[tuple[ItemKey, FeatureVector]]) -> GridLayout:
    """Place each item on its BMU cell, spilling to the nearest free cell.

    Items are processed by ascending BMU distance (canonical key on ties);
    spill distance is Euclidean between grid coordinates, lowest cell index
    on ties. The result maps items bijectively onto a subset of cells.
    """
    if len(items) > grid.cell_count:
        raise CapacityError(f"{len(items)} items exceed {grid.cell_count} cells")
    coords = grid.coords()
    ranked = []
    for key, vec in items:
        d2 = ((grid.units - vec.values) ** 2).sum(axis=1)
        b = int(d2.argmin())
        ranked.append((math.sqrt(float(d2[b])), key.canonical(), key, b))
    ranked.sort(key=lambda r: (r[0], r[1]))
    cells: dict[int, ItemKey] = {}
    taken = np.zeros(grid.cell_count, dtype=bool)
    for _, _, key, b in ranked:
        if not taken[b]:
            cell = b
        else:
            free = np.nonzero(~taken)[0]
            gd = ((coords[free] - coords[b]) ** 2).sum(axis=1)
            cell = int(free[gd.argmin()])  # argmin returns the first = lowest index
        taken[cell] = True
        cells[cell] = key
    return GridLayout(LayoutMode.SOM, grid.width, grid.height, cells)


def order_layout(
    items: Sequence[tuple[ItemKey, float]], mode: LayoutMode, shape: tuple[int, int]
) -> GridLayout:
    """Row-major placement by score (confidence) or by video affiliation."""
    w, h = shape
    if len(items) > w * h:
        raise CapacityError(f"{len(items)} items exceed {w * h} cells")
    if mode is LayoutMode.CONFIDENCE:
        ordered = sorted(items, key=lambda kv: (-kv[1], kv[0].canonical()))
    elif mode is LayoutMode.VIDEO:
        ordered = sorted(items, key=lambda kv: (kv[0].video_id, kv[0].ordinal))
    else:
        raise ValueError("order_layout handles confidence/video; use assign_unique_cells for som")
    return GridLayout(mode, w, h, {i: key for i, (key, _) in enumerate(ordered)})


def quantization_error(grid: SomGrid, vectors: Sequence[tuple[ItemKey, FeatureVector]]) -> float:
    """Mean Euclidean distance from each vector to its BMU."""
    if not vectors:
        raise ValueError("quantization error needs at least one vector")
    total = 0.0
    for _, vec in vectors:
        d2 = ((grid.units - vec.values) ** 2).sum(axis=1)
        total += math.sqrt(float(d2.min()))
    return total / len(vectors)
