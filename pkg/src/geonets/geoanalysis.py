"""Topological versus geographical distance, and edge length/weight
distributions."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from .graph import GeoGraph
from .metrics import UndefinedMetricError, hop_distances


@dataclass(eq=False)
class DistancePairSet:
    """Reachable node pairs with hop distance and planar km distance."""

    i: np.ndarray
    j: np.ndarray
    topo: np.ndarray
    geo: np.ndarray

    def __len__(self):
        return self.i.size

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["i", "j", "topo_hops", "geo_km"])
            for row in zip(self.i.tolist(), self.j.tolist(), self.topo.tolist(),
                           self.geo.tolist()):
                w.writerow([row[0], row[1], row[2], repr(row[3])])


def geo_distance_matrix(g: GeoGraph) -> np.ndarray:
    pos = g.positions
    return np.sqrt(((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=-1))


def distance_pairs(g: GeoGraph) -> DistancePairSet:
    if g.n_edges == 0:
        raise UndefinedMetricError("edgeless graph has no reachable pairs")
    dist = hop_distances(g)
    i, j = np.triu_indices(g.n_nodes, k=1)
    d = dist[i, j]
    ok = np.isfinite(d)
    i, j = i[ok], j[ok]
    pos = g.positions
    geo = np.hypot(pos[i, 0] - pos[j, 0], pos[i, 1] - pos[j, 1])
    return DistancePairSet(i, j, d[ok].astype(np.int64), geo)


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    r_squared: float
    p_value: float
    n_pairs: int
    stderr: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["response"] = "topo_hops"
        d["predictor"] = "geo_km"
        d["slope_units"] = "hops per km"
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def regress(pairs: DistancePairSet, response: str = "topo_on_geo") -> RegressionResult:
    """OLS of hop distance on km distance with a two-sided slope t-test."""
    if response != "topo_on_geo":
        raise ValueError("only topo_on_geo regression is supported")
    if len(pairs) < 3:
        raise ValueError("need at least 3 pairs")
    x = np.asarray(pairs.geo, dtype=float)
    y = np.asarray(pairs.topo, dtype=float)
    if x.min() == x.max():
        raise ValueError("geographic distances have zero variance")
    res = stats.linregress(x, y)
    r2 = min(1.0, max(0.0, float(res.rvalue) ** 2))
    p = float(res.pvalue)
    if not math.isfinite(p):
        p = 1.0
    return RegressionResult(float(res.slope), float(res.intercept), r2, p, len(pairs),
                            float(res.stderr))


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin_lo", "bin_hi", "count"])
            for lo, hi, c in zip(self.edges[:-1].tolist(), self.edges[1:].tolist(),
                                 self.counts.tolist()):
                w.writerow([repr(lo), repr(hi), c])


@dataclass(frozen=True)
class EdgeLengthStats:
    mean_km: float
    max_km: float
    histogram: Histogram

    def to_dict(self) -> dict:
        return {"mean_km": self.mean_km, "max_km": self.max_km,
                "bin_edges": self.histogram.edges.tolist(),
                "counts": self.histogram.counts.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def edge_lengths(g: GeoGraph) -> np.ndarray:
    pos = g.positions
    a, b = g.edges[:, 0], g.edges[:, 1]
    return np.hypot(pos[a, 0] - pos[b, 0], pos[a, 1] - pos[b, 1])


def edge_length_stats(g: GeoGraph, bins: int = 20) -> EdgeLengthStats:
    if g.n_edges == 0:
        raise UndefinedMetricError("edgeless graph")
    lengths = edge_lengths(g)
    top = float(lengths.max())
    counts, edges = np.histogram(lengths, bins=bins, range=(0.0, top if top > 0 else 1.0))
    return EdgeLengthStats(math.fsum(lengths.tolist()) / lengths.size, top,
                           Histogram(edges, counts))


def histogram(values, bins: int = 20) -> Histogram:
    """Equal-width histogram over ``[min, max]`` of ``values``."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise UndefinedMetricError("no values to bin")
    counts, edges = np.histogram(values, bins=bins)
    return Histogram(edges, counts)


def weight_histogram(g: GeoGraph, bins: int = 20) -> Histogram:
    if g.n_edges == 0:
        raise UndefinedMetricError("edgeless graph")
    return histogram(g.weights, bins)
