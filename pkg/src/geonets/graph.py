"""Undirected weighted graph whose nodes carry geographic positions."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse


@dataclass(eq=False)
class GeoGraph:
    """Simple undirected graph on nodes ``0..n-1`` with planar and
    geographic coordinates.

    ``edges`` is an ``(m, 2)`` integer array with ``i < j`` on every row,
    sorted lexicographically; ``weights[k]`` belongs to ``edges[k]``.
    """

    x_km: np.ndarray
    y_km: np.ndarray
    lat: np.ndarray
    lon: np.ndarray
    edges: np.ndarray
    weights: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.x_km = np.asarray(self.x_km, dtype=float)
        self.y_km = np.asarray(self.y_km, dtype=float)
        self.lat = np.asarray(self.lat, dtype=float)
        self.lon = np.asarray(self.lon, dtype=float)
        n = self.x_km.shape[0]
        for name in ("y_km", "lat", "lon"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must have one entry per node")
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if weights.shape[0] != edges.shape[0]:
            raise ValueError("one weight per edge required")
        if not np.all(np.isfinite(weights)):
            raise ValueError("edge weights must be finite")
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise ValueError("edge endpoint is not a valid node id")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise ValueError("self-loops are not allowed")
        edges = np.sort(edges, axis=1)
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        edges, weights = edges[order], weights[order]
        if len(edges) > 1 and np.any(np.all(edges[1:] == edges[:-1], axis=1)):
            raise ValueError("duplicate edges are not allowed")
        self.edges, self.weights = edges, weights

    @classmethod
    def from_nodes(cls, nodes, edges=(), weights=(), label=""):
        """Build from anything with ``x_km, y_km, lat, lon`` attributes."""
        return cls(nodes.x_km, nodes.y_km, nodes.lat, nodes.lon,
                   np.asarray(edges, dtype=np.int64).reshape(-1, 2), weights, label)

    def with_edges(self, edges, weights, label=None) -> "GeoGraph":
        return GeoGraph(self.x_km, self.y_km, self.lat, self.lon, edges, weights,
                        self.label if label is None else label)

    @property
    def n_nodes(self) -> int:
        return self.x_km.shape[0]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def positions(self) -> np.ndarray:
        return np.column_stack([self.x_km, self.y_km])

    def edge_set(self) -> set:
        return set(map(tuple, self.edges.tolist()))

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_nodes)

    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric 0/1 adjacency matrix in CSR form."""
        n, m = self.n_nodes, self.n_edges
        rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        return sparse.csr_matrix((np.ones(2 * m), (rows, cols)), shape=(n, n))

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph(label=self.label)
        for i in range(self.n_nodes):
            g.add_node(i, x_km=self.x_km[i], y_km=self.y_km[i],
                       lat=self.lat[i], lon=self.lon[i])
        g.add_weighted_edges_from(
            (int(a), int(b), float(w)) for (a, b), w in zip(self.edges, self.weights))
        return g

    def same_nodes(self, other: "GeoGraph") -> bool:
        return all(np.array_equal(getattr(self, a), getattr(other, a))
                   for a in ("x_km", "y_km", "lat", "lon"))


def write_nodes_csv(g: GeoGraph, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "x_km", "y_km", "lat", "lon"])
        for i in range(g.n_nodes):
            w.writerow([i, repr(g.x_km[i].item()), repr(g.y_km[i].item()),
                        repr(g.lat[i].item()), repr(g.lon[i].item())])


def write_edges_csv(g: GeoGraph, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "weight"])
        for (a, b), wt in zip(g.edges.tolist(), g.weights.tolist()):
            w.writerow([a, b, repr(wt)])


def read_nodes_csv(path):
    """Return ``(x_km, y_km, lat, lon)`` arrays ordered by node id."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:5] != ["id", "x_km", "y_km", "lat", "lon"]:
            raise ValueError(f"{path}: header must start with id,x_km,y_km,lat,lon")
        rows = sorted((int(r[0]), *map(float, r[1:5])) for r in reader if r)
    if [r[0] for r in rows] != list(range(len(rows))):
        raise ValueError(f"{path}: node ids must be contiguous from 0")
    arr = np.asarray([r[1:] for r in rows], dtype=float).reshape(-1, 4)
    return arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]


def read_graph_csv(nodes_path, edges_path, label="") -> GeoGraph:
    x, y, lat, lon = read_nodes_csv(nodes_path)
    edges, weights = [], []
    with open(edges_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if next(reader)[:3] != ["i", "j", "weight"]:
            raise ValueError(f"{edges_path}: header must be i,j,weight")
        for r in reader:
            if r:
                edges.append((int(r[0]), int(r[1])))
                weights.append(float(r[2]))
    return GeoGraph(x, y, lat, lon, np.asarray(edges, dtype=np.int64).reshape(-1, 2),
                    weights, label)


def to_geojson(g: GeoGraph) -> dict:
    """FeatureCollection with node Points and edge LineStrings."""
    features = []
    for i in range(g.n_nodes):
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point",
                         "coordinates": [g.lon[i].item(), g.lat[i].item()]},
            "properties": {"kind": "node", "id": i, "x_km": g.x_km[i].item(),
                           "y_km": g.y_km[i].item(), "network": g.label},
        })
    for (a, b), w in zip(g.edges.tolist(), g.weights.tolist()):
        features.append({
            "type": "Feature",
            "geometry": {"type": "LineString",
                         "coordinates": [[g.lon[a].item(), g.lat[a].item()],
                                         [g.lon[b].item(), g.lat[b].item()]]},
            "properties": {"kind": "edge", "i": a, "j": b, "weight": w,
                           "network": g.label},
        })
    return {"type": "FeatureCollection", "features": features}


def write_geojson(g: GeoGraph, path) -> None:
    Path(path).write_text(json.dumps(to_geojson(g)) + "\n", encoding="utf-8")
