"""Topological metrics of a GeoGraph: path lengths, clustering, diameter,
degree heterogeneity and component structure."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np
from scipy.sparse.csgraph import connected_components, shortest_path

from .graph import GeoGraph


class UndefinedMetricError(ValueError):
    """The metric has no value on this graph (e.g. no reachable pairs)."""


class Components(NamedTuple):
    num_components: int
    giant_size: int
    singletons: int


def hop_distances(g: GeoGraph) -> np.ndarray:
    """All-pairs BFS hop counts; ``inf`` marks unreachable pairs."""
    return shortest_path(g.adjacency(), method="D", directed=False, unweighted=True)


def _reachable_upper(dist):
    iu = np.triu_indices(dist.shape[0], k=1)
    d = dist[iu]
    return d[np.isfinite(d)]


def _path_stats(dist):
    d = _reachable_upper(dist)
    if d.size == 0:
        raise UndefinedMetricError("graph has no reachable pairs")
    return math.fsum(d.tolist()) / d.size, int(d.max())


def mean_shortest_path(g: GeoGraph) -> float:
    """Mean hop distance over unordered pairs lying in the same component."""
    return _path_stats(hop_distances(g))[0]


def diameter(g: GeoGraph) -> int:
    """Longest finite shortest path, taken over all components."""
    if g.n_edges == 0:
        raise UndefinedMetricError("diameter of an edgeless graph")
    return _path_stats(hop_distances(g))[1]


def local_clustering(g: GeoGraph) -> np.ndarray:
    """Per-node clustering; nodes with degree < 2 get 0."""
    a = g.adjacency()
    k = np.asarray(a.sum(axis=1)).ravel()
    links = np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() / 2.0
    out = np.zeros(g.n_nodes)
    ok = k >= 2
    out[ok] = 2.0 * links[ok] / (k[ok] * (k[ok] - 1))
    return out


def mean_clustering(g: GeoGraph) -> float:
    return math.fsum(local_clustering(g).tolist()) / g.n_nodes


def heterogeneity(g: GeoGraph) -> float:
    return heterogeneity_from_degrees(g.degrees())


def heterogeneity_from_degrees(degrees) -> float:
    """<k^2> / <k>^2 of a degree sequence."""
    k = np.asarray(degrees, dtype=np.int64)
    total = int(k.sum())
    if total == 0:
        raise UndefinedMetricError("mean degree is zero")
    # exact integer sums so equal degree sequences give bit-identical results
    n = k.size
    return (int((k * k).sum()) / n) / (total / n) ** 2


def components(g: GeoGraph) -> Components:
    _, labels = connected_components(g.adjacency(), directed=False)
    sizes = np.bincount(labels)
    return Components(int(sizes.size), int(sizes.max()), int(np.sum(sizes == 1)))


def giant_component(g: GeoGraph) -> np.ndarray:
    """Node ids of the largest component (lowest label wins ties)."""
    _, labels = connected_components(g.adjacency(), directed=False)
    sizes = np.bincount(labels)
    return np.flatnonzero(labels == int(np.argmax(sizes)))


@dataclass(frozen=True)
class MetricsReport:
    label: str
    n: int
    l_edges: int
    weight_min: float | None
    weight_max: float | None
    mean_shortest_path: float | None
    mean_clustering: float
    diameter: int | None
    kappa: float | None
    num_components: int
    giant_component_size: int
    singletons: int
    er: object = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["er"] = None if self.er is None else self.er.to_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def table_row(self) -> list:
        return table_row(
            self.label, self.l_edges, self.weight_min, self.weight_max,
            self.mean_shortest_path, self.mean_clustering, self.diameter,
            self.kappa, self.num_components, self.giant_component_size,
            self.singletons,
            None if self.er is None else self.er.l_rand,
            None if self.er is None else self.er.c_rand)


def full_report(g: GeoGraph) -> MetricsReport:
    """Every metric of the summary table for one network.

    Metrics undefined on ``g`` are reported as ``None``.
    """
    from .nullmodels import ErAnalyticsError, er_analytics

    dist = hop_distances(g)
    try:
        mean_l, diam = _path_stats(dist)
    except UndefinedMetricError:
        mean_l = diam = None
    try:
        kappa = heterogeneity(g)
    except UndefinedMetricError:
        kappa = None
    try:
        er = er_analytics(g.n_nodes, g.n_edges)
    except ErAnalyticsError:
        er = None
    nc = components(g)
    has_w = g.n_edges > 0
    return MetricsReport(
        label=g.label, n=g.n_nodes, l_edges=g.n_edges,
        weight_min=float(g.weights.min()) if has_w else None,
        weight_max=float(g.weights.max()) if has_w else None,
        mean_shortest_path=mean_l, mean_clustering=mean_clustering(g),
        diameter=diam, kappa=kappa, num_components=nc.num_components,
        giant_component_size=nc.giant_size, singletons=nc.singletons, er=er)


TABLE_COLUMNS = ["network", "L", "weight_min", "weight_max", "mean_l", "mean_c", "D",
                 "kappa", "NC", "GC", "ST", "l_rand", "c_rand"]


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def table_row(*values) -> list:
    return [_cell(v) for v in values]


def write_table(rows, path) -> None:
    """Write summary rows (lists from ``table_row``) under TABLE_COLUMNS."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        w.writerows(rows)
