"""Configuration-model ensembles and analytic Erdos-Renyi equivalents."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from joblib import Parallel, delayed

from . import metrics
from .graph import GeoGraph

DEFAULT_SAMPLES = 10_000


class ErAnalyticsError(ValueError):
    """Random-graph path length is undefined for these N and L."""


@dataclass(frozen=True)
class ErAnalytics:
    n: int
    l_edges: int
    p: float
    mean_k: float
    c_rand: float
    l_rand: float

    def to_dict(self) -> dict:
        return asdict(self)


def er_analytics(n: int, l_edges: int) -> ErAnalytics:
    """Connection probability, mean degree, clustering and mean path length
    of a random graph with ``n`` nodes and ``l_edges`` edges."""
    if n < 2:
        raise ErAnalyticsError("need at least 2 nodes")
    if l_edges < 1:
        raise ErAnalyticsError("need at least 1 edge")
    p = 2.0 * l_edges / (n * (n - 1))
    mean_k = p * (n - 1)
    if mean_k <= 0 or math.log(mean_k) == 0:
        raise ErAnalyticsError(f"log of mean degree {mean_k} is not usable")
    return ErAnalytics(n, l_edges, p, mean_k, p, math.log(n) / math.log(mean_k))


def small_world_test(l: float, c: float, l_rand: float, c_rand: float) -> bool:
    """True when the network has shorter paths and more clustering than its
    random equivalent."""
    vals = (l, c, l_rand, c_rand)
    if not all(math.isfinite(v) for v in vals):
        raise ValueError("small_world_test needs finite inputs")
    return l < l_rand and c > c_rand


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for sample ``index`` of an ensemble seeded ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


@dataclass(eq=False)
class Pseudograph:
    """Raw stub-matching output: may contain self-loops and multi-edges."""

    n_nodes: int
    edges: np.ndarray
    weights: np.ndarray

    def degrees(self) -> np.ndarray:
        """Degrees counted with multiplicity; a self-loop adds 2."""
        return np.bincount(self.edges.ravel(), minlength=self.n_nodes)

    def simplify(self, nodes, label: str = "") -> GeoGraph:
        """Drop self-loops and collapse multi-edges.

        Weights are taken in order from the front of ``weights``; any surplus
        left by removed edges is discarded from the tail.
        """
        e = np.sort(self.edges, axis=1)
        e = e[e[:, 0] != e[:, 1]]
        e = np.unique(e, axis=0) if len(e) else e.reshape(0, 2)
        return GeoGraph.from_nodes(nodes, e, self.weights[:len(e)], label)


def configuration_sample(degrees, weights=None, seed: int = 0, index: int = 0,
                         rng: np.random.Generator | None = None) -> Pseudograph:
    """One stub-matching pseudograph with exactly the given degree sequence.

    ``weights`` (one per edge, ``sum(degrees) / 2`` of them) are randomly
    permuted onto the generated edges. Deterministic in ``(seed, index)``.
    """
    degrees = np.asarray(degrees, dtype=np.int64)
    if np.any(degrees < 0):
        raise ValueError("degrees must be non-negative")
    total = int(degrees.sum())
    if total % 2:
        raise ValueError("degree sequence has an odd sum")
    m = total // 2
    weights = np.zeros(m) if weights is None else np.asarray(weights, dtype=float)
    if weights.shape != (m,):
        raise ValueError(f"need {m} weights, got {weights.size}")
    rng = sample_rng(seed, index) if rng is None else rng
    stubs = np.repeat(np.arange(degrees.size), degrees)
    rng.shuffle(stubs)
    return Pseudograph(degrees.size, stubs.reshape(m, 2), rng.permutation(weights))


@dataclass(frozen=True)
class EnsembleReport:
    label: str
    samples: int
    seed: int
    l_edges: int
    mean_l: float | None
    mean_c: float
    mean_diameter: float | None
    kappa: float | None
    weight_range: tuple
    n_defined_paths: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["weight_range"] = list(self.weight_range)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def table_row(self) -> list:
        lo, hi = self.weight_range
        return metrics.table_row(
            self.label, self.l_edges, lo, hi, self.mean_l, self.mean_c, self.mean_diameter,
            self.kappa, None, None, None, None, None)


def _measure_sample(degrees, weights, nodes, seed, index, sim_values):
    sample = configuration_sample(degrees, weights, seed=seed, index=index)
    g = sample.simplify(nodes)
    if sim_values is not None:
        w = sim_values[g.edges[:, 0], g.edges[:, 1]]
    else:
        w = g.weights
    dist = metrics.hop_distances(g)
    try:
        mean_l, diam = metrics._path_stats(dist)
    except metrics.UndefinedMetricError:
        mean_l = diam = None
    w_lo = float(w.min()) if w.size else None
    w_hi = float(w.max()) if w.size else None
    return mean_l, diam, metrics.mean_clustering(g), w_lo, w_hi


def ensemble_metrics(g: GeoGraph, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                     sim=None, n_jobs: int = 1, label: str | None = None
                     ) -> EnsembleReport:
    """Average path length, clustering and diameter over configuration-model
    samples matched to ``g``'s degree sequence.

    Each sample is simplified before measuring. Edge weights come from a
    random permutation of ``g``'s weights, or, when a similarity matrix
    ``sim`` is given, from the similarity of each generated node pair.
    Samples whose simplified graph has no edges are left out of the path
    averages (``n_defined_paths`` counts the rest).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    degrees = g.degrees()
    sim_values = None if sim is None else np.asarray(getattr(sim, "values", sim))
    jobs = (delayed(_measure_sample)(degrees, g.weights, g, seed, k, sim_values)
            for k in range(samples))
    results = Parallel(n_jobs=n_jobs)(jobs)
    ls = [r[0] for r in results if r[0] is not None]
    ds = [r[1] for r in results if r[1] is not None]
    cs = [r[2] for r in results]
    lo = [r[3] for r in results if r[3] is not None]
    hi = [r[4] for r in results if r[4] is not None]
    try:
        kappa = metrics.heterogeneity_from_degrees(degrees)
    except metrics.UndefinedMetricError:
        kappa = None
    return EnsembleReport(
        label=(g.label + "_CM") if label is None else label,
        samples=samples, seed=int(seed), l_edges=g.n_edges,
        mean_l=math.fsum(ls) / len(ls) if ls else None,
        mean_c=math.fsum(cs) / len(cs),
        mean_diameter=math.fsum(ds) / len(ds) if ds else None,
        kappa=kappa,
        weight_range=(min(lo) if lo else None, max(hi) if hi else None),
        n_defined_paths=len(ls))


def ensemble_weights(g: GeoGraph, samples: int, seed: int = 0, sim=None) -> np.ndarray:
    """Pooled edge weights of the simplified samples, for histograms."""
    degrees = g.degrees()
    out = []
    for k in range(samples):
        s = configuration_sample(degrees, g.weights, seed=seed, index=k).simplify(g)
        if sim is not None:
            vals = np.asarray(getattr(sim, "values", sim))
            out.append(vals[s.edges[:, 0], s.edges[:, 1]])
        else:
            out.append(s.weights)
    return np.concatenate(out) if out else np.zeros(0)
