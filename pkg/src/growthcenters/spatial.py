"""Spatial statistics: distance-banded Moran's I, threshold-crossing maps, lattices.

Moran's index for one distance band is

    I = N * sum_(i,j) w_ij z_i z_j / (sum_(i,j) w_ij * sum_i z_i^2),   z = y - mean(y)

with both double sums over the *ordered* pairs (i, j) whose separation lies in
the band, N the number of those ordered pairs and w_ij = area_i. Note that
summing area_i over both orders of a pair gives area_i + area_j, so the
symmetrised weight (area_i + area_j) / 2 produces the same index.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import Trajectory
from .errors import DegenerateError, InputError

NEVER = math.inf


@dataclass(frozen=True)
class SpatialLayout:
    positions: np.ndarray
    areas: np.ndarray
    ids: tuple[str, ...] | None = None

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        areas = np.array(self.areas, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise InputError(f"positions must be n x 2, got {pos.shape}")
        if areas.shape != (pos.shape[0],):
            raise InputError(f"areas must have length {pos.shape[0]}, got {areas.shape}")
        if not np.all(areas > 0):
            raise InputError("areas must be positive")
        if self.ids is not None:
            ids = tuple(str(i) for i in self.ids)
            if len(ids) != pos.shape[0]:
                raise InputError("ids length does not match positions")
            object.__setattr__(self, "ids", ids)
        pos.setflags(write=False)
        areas.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "areas", areas)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def labels(self) -> tuple[str, ...]:
        return self.ids if self.ids is not None else tuple(str(i + 1) for i in range(self.n))

    def distances(self) -> np.ndarray:
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])


def band_of(distance, width: float):
    """Band index k with distance in (k*width, (k+1)*width]; distance 0 goes to band 0.

    A relative slack of 1e-12 keeps exact multiples of ``width`` (up to
    roundoff in the distance) in the lower band, as the half-open intervals require.
    """
    k = np.ceil(np.asarray(distance, dtype=float) / width * (1.0 - 1e-12)) - 1
    return np.maximum(k, 0).astype(int)


@dataclass(frozen=True)
class DistanceBands:
    """Partition of the unordered pairs i < j into distance bands of equal width."""

    width: float
    pairs: dict[int, np.ndarray]

    @classmethod
    def build(cls, layout: SpatialLayout, width: float = 10.0) -> "DistanceBands":
        if not width > 0:
            raise InputError("band width must be positive")
        iu, ju = np.triu_indices(layout.n, k=1)
        d = layout.distances()[iu, ju]
        k = band_of(d, width)
        pairs = {}
        for band in np.unique(k):
            sel = k == band
            pairs[int(band)] = np.column_stack([iu[sel], ju[sel]])
        return cls(float(width), pairs)

    def interval(self, band: int) -> tuple[float, float]:
        return band * self.width, (band + 1) * self.width

    def total_pairs(self) -> int:
        return sum(len(p) for p in self.pairs.values())

    def __iter__(self):
        return iter(sorted(self.pairs))


def _centered(values, n: int) -> np.ndarray:
    y = np.asarray(values, dtype=float)
    if y.shape != (n,):
        raise InputError(f"values must have length {n}, got shape {y.shape}")
    z = y - y.mean()
    return z


def _moran_from_pairs(z: np.ndarray, ss: float, pairs: np.ndarray, areas: np.ndarray,
                      symmetric: bool) -> float:
    i, j = pairs[:, 0], pairs[:, 1]
    if symmetric:
        w_ij = w_ji = 0.5 * (areas[i] + areas[j])
    else:
        w_ij, w_ji = areas[i], areas[j]
    num = np.sum((w_ij + w_ji) * z[i] * z[j])
    w_sum = np.sum(w_ij + w_ji)
    n_ordered = 2 * len(pairs)
    return float(n_ordered * num / (w_sum * ss))


def moran_index(values, layout: SpatialLayout, band: int, bands: DistanceBands | None = None,
                width: float = 10.0, symmetric_weights: bool = False) -> float:
    z = _centered(values, layout.n)
    ss = float(np.dot(z, z))
    if ss == 0.0:
        raise DegenerateError("zero variance: Moran's I is undefined when all values are equal")
    bands = bands or DistanceBands.build(layout, width)
    pairs = bands.pairs.get(band)
    if pairs is None or len(pairs) == 0:
        raise DegenerateError(f"empty band {band}: no pairs at distance {bands.interval(band)}")
    return _moran_from_pairs(z, ss, pairs, layout.areas, symmetric_weights)


@dataclass(frozen=True)
class MoranPoint:
    band_lo: float
    band_hi: float
    pairs: int  # ordered pairs, the N of the formula
    value: float | None
    reason: str | None = None

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.band_lo + self.band_hi)


def moran_curve(values, layout: SpatialLayout, bands: DistanceBands | None = None,
                width: float = 10.0, symmetric_weights: bool = False) -> list[MoranPoint]:
    """Moran's I per distance band. Degenerate bands come back with ``value=None`` and a reason."""
    bands = bands or DistanceBands.build(layout, width)
    z = _centered(values, layout.n)
    ss = float(np.dot(z, z))
    out = []
    for band in bands:
        lo, hi = bands.interval(band)
        pairs = bands.pairs[band]
        if len(pairs) == 0:
            out.append(MoranPoint(lo, hi, 0, None, "empty band"))
        elif ss == 0.0:
            out.append(MoranPoint(lo, hi, 2 * len(pairs), None, "zero variance"))
        else:
            out.append(MoranPoint(lo, hi, 2 * len(pairs),
                                  _moran_from_pairs(z, ss, pairs, layout.areas, symmetric_weights)))
    return out


def moran_permutations(values, layout: SpatialLayout, band: int, n_perm: int = 999,
                       seed: int | None = 0, bands: DistanceBands | None = None,
                       width: float = 10.0) -> np.ndarray:
    """Moran's I of ``n_perm`` uniformly shuffled copies of ``values``."""
    bands = bands or DistanceBands.build(layout, width)
    z = _centered(values, layout.n)
    ss = float(np.dot(z, z))
    if ss == 0.0:
        raise DegenerateError("zero variance: Moran's I is undefined when all values are equal")
    pairs = bands.pairs.get(band)
    if pairs is None or len(pairs) == 0:
        raise DegenerateError(f"empty band {band}")
    rng = np.random.default_rng(seed)
    return np.array([
        _moran_from_pairs(rng.permutation(z), ss, pairs, layout.areas, False) for _ in range(n_perm)
    ])


def moran_null_mean(layout: SpatialLayout, band: int, bands: DistanceBands | None = None,
                    width: float = 10.0) -> float:
    """Exact mean of I over all permutations of the values: -N / (n (n - 1))."""
    bands = bands or DistanceBands.build(layout, width)
    n_ordered = 2 * len(bands.pairs.get(band, ()))
    return -n_ordered / (layout.n * (layout.n - 1))


def threshold_crossing_map(trajectory: Trajectory, threshold: float) -> np.ndarray:
    """First sample time at which each W_i >= threshold; ``NEVER`` (inf) if it never does."""
    if not threshold > 0:
        raise InputError("threshold must be positive")
    above = trajectory.w >= threshold
    first = np.argmax(above, axis=0)
    out = trajectory.times[first].astype(float)
    out[~above.any(axis=0)] = NEVER
    return out


def build_lattice(rows: int, cols: int, spacing_km: float = 10.0,
                  neighbor_coupling: float = 0.01) -> tuple[SpatialLayout, np.ndarray]:
    """4-neighbour grid; unit r*cols + c sits at (c*spacing, r*spacing) with unit area."""
    if rows < 1 or cols < 1:
        raise InputError("lattice needs rows, cols >= 1")
    if neighbor_coupling < 0:
        raise InputError("neighbour coupling must be non-negative")
    n = rows * cols
    coupling = np.zeros((n, n))
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            if c + 1 < cols:
                coupling[i, i + 1] = coupling[i + 1, i] = neighbor_coupling
            if r + 1 < rows:
                coupling[i, i + cols] = coupling[i + cols, i] = neighbor_coupling
    rr, cc = np.divmod(np.arange(n), cols)
    layout = SpatialLayout(np.column_stack([cc, rr]) * float(spacing_km), np.ones(n))
    return layout, coupling


def graph_distance(coupling, sources: Sequence[int]) -> np.ndarray:
    """Hop count from the nearest source along edges of the coupling graph (either direction)."""
    adj = np.asarray(coupling) > 0
    adj = adj | adj.T
    n = adj.shape[0]
    dist = np.full(n, -1, dtype=int)
    queue = deque()
    for s in sources:
        dist[s] = 0
        queue.append(int(s))
    while queue:
        v = queue.popleft()
        for u in np.flatnonzero(adj[v] & (dist < 0)):
            dist[u] = dist[v] + 1
            queue.append(int(u))
    return dist
