"""Synthetic rain grids with regionally shared signals, for tests and demos."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .grid import GridSeries

_KM_PER_DEG = 111.32


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of a synthetic grid.

    Regions are vertical stripes of grid columns. Each cell mixes its
    region's latent signal (variance share ``intra_corr``, one value for all
    regions or one per region) with a spatially smooth field of correlation
    length ``length_scale`` km and white noise.
    """

    nx: int = 10
    ny: int = 10
    n_regions: int = 2
    intra_corr: float | tuple = (0.7, 0.3)
    length: int = 500
    seed: int = 0
    length_scale: float = 1.5
    smooth_share: float = 0.7
    origin_lat: float = -23.6
    origin_lon: float = -46.6
    time_step_minutes: float = 10.0

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid must be at least 2x2")
        if self.length < 8:
            raise ValueError("series length must be at least 8")
        if not 1 <= self.n_regions <= self.nx:
            raise ValueError("n_regions must be between 1 and nx")
        levels = np.atleast_1d(np.asarray(self.intra_corr, dtype=float))
        if levels.size not in (1, self.n_regions):
            raise ValueError("intra_corr needs one value or one per region")
        if np.any(levels < 0) or np.any(levels > 1):
            raise ValueError("intra_corr must lie in [0, 1]")
        if levels.size > 1:
            object.__setattr__(self, "intra_corr", tuple(levels.tolist()))
        if not 0 <= self.smooth_share <= 1:
            raise ValueError("smooth_share must lie in [0, 1]")
        if not self.length_scale > 0:
            raise ValueError("length_scale must be positive")

    @classmethod
    def from_dict(cls, d) -> "SyntheticSpec":
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        if isinstance(self.intra_corr, tuple):
            d["intra_corr"] = list(self.intra_corr)
        return d

    def region_levels(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.intra_corr, dtype=float),
                               (self.n_regions,)).copy()


def region_labels(spec: SyntheticSpec) -> np.ndarray:
    """Region index of every cell, in row-major (y, x) cell order."""
    cols = np.tile(np.arange(spec.nx), spec.ny)
    return cols * spec.n_regions // spec.nx


def generate_synthetic(spec: SyntheticSpec) -> GridSeries:
    rng = np.random.default_rng(spec.seed)
    yy, xx = np.meshgrid(np.arange(spec.ny, dtype=float), np.arange(spec.nx, dtype=float),
                         indexing="ij")
    x, y = xx.ravel(), yy.ravel()
    n, t = x.size, spec.length
    labels = region_labels(spec)

    regional = rng.standard_normal((spec.n_regions, t))
    d2 = (x[:, None] - x[None, :]) ** 2 + (y[:, None] - y[None, :]) ** 2
    kernel = np.exp(-d2 / (2.0 * spec.length_scale ** 2))
    kernel /= np.sqrt((kernel ** 2).sum(axis=1, keepdims=True))
    smooth = kernel @ rng.standard_normal((n, t))
    white = rng.standard_normal((n, t))

    c = spec.region_levels()[labels][:, None]
    s = spec.smooth_share
    z = (np.sqrt(c) * regional[labels]
         + np.sqrt(1 - c) * (math.sqrt(s) * smooth + math.sqrt(1 - s) * white))
    # lognormal rain rates in mm/h
    values = 3.0 * np.exp(0.6 * z)

    lat = spec.origin_lat + y / _KM_PER_DEG
    lon = spec.origin_lon + x / (_KM_PER_DEG * math.cos(math.radians(spec.origin_lat)))
    return GridSeries(x, y, lat, lon, values, "mm_per_hour", spec.time_step_minutes)
