"""Network construction from a similarity matrix: global threshold with
maximum-diameter selection, and the disparity-filter backbone."""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components, shortest_path

from ._validation import check_alpha
from .graph import GeoGraph
from .similarity import SimilarityMatrix

EXACT_SCAN_MAX_NODES = 1000
GRID_SCAN_POINTS = 200


def _node_graph(sim: SimilarityMatrix, nodes=None, label=""):
    """Edgeless GeoGraph carrying the node positions for ``sim``."""
    if nodes is None:
        n = sim.n
        return GeoGraph(np.arange(n, dtype=float), np.zeros(n), np.zeros(n),
                        np.zeros(n), np.empty((0, 2)), [], label)
    if len(nodes.x_km) != sim.n:
        raise ValueError("node table and similarity matrix sizes differ")
    return GeoGraph.from_nodes(nodes, label=label)


def _valid_pairs(sim: SimilarityMatrix):
    """Upper-triangle pairs not involving a degenerate series."""
    i, j, w = sim.upper_pairs()
    ok = ~(sim.degenerate[i] | sim.degenerate[j])
    return i[ok], j[ok], w[ok]


def threshold_graph(sim: SimilarityMatrix, tau: float, strict: bool = True,
                    nodes=None, label: str = "") -> GeoGraph:
    """Keep every pair whose similarity exceeds ``tau``.

    With ``strict=False`` pairs equal to ``tau`` are kept too. All nodes are
    retained, isolated or not.
    """
    i, j, w = _valid_pairs(sim)
    keep = w > tau if strict else w >= tau
    base = _node_graph(sim, nodes, label)
    return base.with_edges(np.column_stack([i[keep], j[keep]]), w[keep])


@dataclass(frozen=True)
class ThresholdScan:
    """Giant-component diameter at each candidate threshold.

    ``diameters[k]`` is -1 where the scan skipped ``taus[k]`` because an
    upper bound proved it could not beat the chosen threshold.
    """

    taus: np.ndarray
    diameters: np.ndarray
    chosen_tau: float

    @property
    def evaluated(self) -> np.ndarray:
        return self.diameters >= 0

    @property
    def max_diameter(self) -> int:
        return int(self.diameters.max())

    def to_dict(self) -> dict:
        return {"chosen_tau": self.chosen_tau, "max_diameter": self.max_diameter,
                "taus": self.taus.tolist(), "diameters": self.diameters.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def candidate_taus(sim: SimilarityMatrix, max_exact_nodes: int = EXACT_SCAN_MAX_NODES,
                   grid_points: int = GRID_SCAN_POINTS) -> np.ndarray:
    """Distinct pair weights for small graphs, a uniform grid otherwise."""
    _, _, w = _valid_pairs(sim)
    if w.size == 0:
        return np.zeros(1)
    if sim.n <= max_exact_nodes:
        return np.unique(w)
    return np.linspace(w.min(), w.max(), grid_points)


class _PrefixGraphs:
    """Threshold graphs as prefixes of the edge list sorted by weight."""

    def __init__(self, sim, strict):
        i, j, w = _valid_pairs(sim)
        order = np.argsort(-w, kind="stable")
        self.i, self.j, self.w = i[order], j[order], w[order]
        self.n = sim.n
        self.strict = strict
        self._desc = -self.w

    def n_edges(self, tau):
        side = "left" if self.strict else "right"
        return int(np.searchsorted(self._desc, -tau, side=side))

    def adjacency(self, m):
        i, j = self.i[:m], self.j[:m]
        return sparse.csr_matrix(
            (np.ones(2 * m), (np.concatenate([i, j]), np.concatenate([j, i]))),
            shape=(self.n, self.n))

    def giant_runs(self):
        """Largest-component size and a run id for every prefix length.

        The run id changes exactly when the node sets of the largest
        components change, so within one run adding edges can only shrink
        their diameters.
        """
        parent = list(range(self.n))
        size = [1] * self.n
        best, version = 1, 0
        sizes, versions = [1], [0]
        for a, b in zip(self.i.tolist(), self.j.tolist()):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a != b:
                if size[a] < size[b]:
                    a, b = b, a
                parent[b] = a
                size[a] += size[b]
                if size[a] >= best:
                    best = size[a]
                    version += 1
            sizes.append(best)
            versions.append(version)
        return np.asarray(sizes), np.asarray(versions)


def _giant_diameter(adj):
    """Diameter of the largest component; the widest one if several tie."""
    _, labels = connected_components(adj, directed=False)
    sizes = np.bincount(labels)
    if sizes.max() < 2:
        return 0
    out = 0
    for lab in np.flatnonzero(sizes == sizes.max()):
        nodes = np.flatnonzero(labels == lab)
        sub = adj[nodes][:, nodes]
        out = max(out, int(shortest_path(sub, directed=False, unweighted=True).max()))
    return out


def _eccentricity_bound(adj, giant_size):
    """Twice the eccentricity of the best-connected node of a unique giant
    component, or ``giant_size - 1`` when that does not apply."""
    _, labels = connected_components(adj, directed=False)
    sizes = np.bincount(labels)
    if sizes.max() < 2 or np.sum(sizes == sizes.max()) > 1:
        return giant_size - 1
    nodes = np.flatnonzero(labels == int(np.argmax(sizes)))
    sub = adj[nodes][:, nodes]
    hub = int(np.argmax(np.asarray(sub.sum(axis=1)).ravel()))
    ecc = shortest_path(sub, directed=False, unweighted=True, indices=hub).max()
    return min(giant_size - 1, 2 * int(ecc))


def scan_max_diameter_threshold(sim: SimilarityMatrix, taus=None, strict: bool = True,
                                prune: bool = True) -> ThresholdScan:
    """Pick the threshold whose graph has the widest giant component.

    Parameters
    ----------
    sim : SimilarityMatrix
    taus : array-like, optional
        Ascending candidate thresholds. Defaults to :func:`candidate_taus`.
    strict : bool
        Threshold comparison, as in :func:`threshold_graph`.
    prune : bool
        Only evaluate candidates that can still win. Candidates sharing the
        same giant-component node set have diameters that grow with the
        threshold, so each such run is represented by its top candidate,
        bounded first by giant size and a hub's eccentricity. The chosen
        threshold is the same as with ``prune=False``.

    The giant component's diameter is used (the widest one if several
    components tie for largest). Ties in diameter go to the smallest
    threshold.
    """
    taus = candidate_taus(sim) if taus is None else np.asarray(taus, dtype=float)
    if taus.size == 0:
        raise ValueError("need at least one candidate threshold")
    if np.any(np.diff(taus) < 0):
        raise ValueError("candidate thresholds must be sorted ascending")
    graphs = _PrefixGraphs(sim, strict)
    m = np.array([graphs.n_edges(t) for t in taus])
    diam = np.full(taus.size, -1, dtype=np.int64)

    def evaluate(k):
        if diam[k] < 0:
            diam[k] = _giant_diameter(graphs.adjacency(m[k]))
        return int(diam[k])

    if not prune:
        for k in range(taus.size):
            evaluate(k)
        return ThresholdScan(taus, diam, float(taus[int(np.argmax(diam))]))

    giant, runs = graphs.giant_runs()
    run_of = runs[m]
    # candidates of one run, ascending in tau; the last one has the run maximum
    members = {}
    for k, r in enumerate(run_of.tolist()):
        members.setdefault(r, []).append(k)
    heap = [(-(int(giant[m[ks[-1]]]) - 1), ks[0], r, 0) for r, ks in members.items()]
    heapq.heapify(heap)
    best = -1
    winners = []
    while heap:
        neg, _, r, stage = heapq.heappop(heap)
        if -neg < best:
            break
        top = members[r][-1]
        if stage == 0:
            bound = _eccentricity_bound(graphs.adjacency(m[top]), int(giant[m[top]]))
            heapq.heappush(heap, (-bound, members[r][0], r, 1))
            continue
        d = evaluate(top)
        if d > best:
            best, winners = d, [r]
        elif d == best:
            winners.append(r)
    chosen = None
    for r in winners:
        ks = members[r]
        lo, hi = 0, len(ks) - 1
        # diameters are non-decreasing along ks; find the first equal to best
        while lo < hi:
            mid = (lo + hi) // 2
            if evaluate(ks[mid]) >= best:
                hi = mid
            else:
                lo = mid + 1
        if chosen is None or ks[lo] < chosen:
            chosen = ks[lo]
    return ThresholdScan(taus, diam, float(taus[chosen]))


def disparity_pvalue(w_ij: float, s_i: float, k_i: int) -> float:
    """Probability that an incident link of a node with strength ``s_i`` and
    degree ``k_i`` carries weight ``w_ij`` or more under uniform random
    allocation: ``(1 - w_ij / s_i) ** (k_i - 1)``."""
    if not s_i > 0:
        raise ValueError("strength must be positive")
    if int(k_i) != k_i or k_i < 1:
        raise ValueError("degree must be an integer >= 1")
    if not 0 <= w_ij <= s_i:
        raise ValueError("weight must lie in [0, strength]")
    return float((1.0 - w_ij / s_i) ** (int(k_i) - 1))


def backbone_pvalues(sim: SimilarityMatrix):
    """Substrate pairs and their p-values seen from each endpoint.

    The substrate is every pair with positive weight between nondegenerate
    series. Returns ``(i, j, w, p_i, p_j)``.
    """
    i, j, w = _valid_pairs(sim)
    pos = w > 0
    i, j, w = i[pos], j[pos], w[pos]
    k = np.bincount(np.concatenate([i, j]), minlength=sim.n)
    s = np.bincount(np.concatenate([i, j]), weights=np.concatenate([w, w]),
                    minlength=sim.n)
    # (1 - w/s)**(k-1) with 0**0 = 1 for degree-1 endpoints
    p_i = np.power(np.clip(1.0 - w / s[i], 0.0, 1.0), k[i] - 1)
    p_j = np.power(np.clip(1.0 - w / s[j], 0.0, 1.0), k[j] - 1)
    return i, j, w, p_i, p_j


def backbone_graph(sim: SimilarityMatrix, alpha: float, nodes=None,
                   label: str = "") -> GeoGraph:
    """Disparity-filter backbone: keep a link when the smaller of its two
    endpoint p-values is below ``alpha``."""
    check_alpha(alpha)
    i, j, w, p_i, p_j = backbone_pvalues(sim)
    keep = np.minimum(p_i, p_j) < alpha
    base = _node_graph(sim, nodes, label)
    return base.with_edges(np.column_stack([i[keep], j[keep]]), w[keep])


@dataclass(frozen=True)
class BackboneCalibration:
    alpha: float
    target_edges: int
    achieved_edges: int

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "target_edges": self.target_edges,
                "achieved_edges": self.achieved_edges}


def calibrate_alpha(sim: SimilarityMatrix, target_edges: int,
                    resolution: float = 1e-9) -> BackboneCalibration:
    """Bisect on alpha for the backbone edge count nearest ``target_edges``.

    The edge count is non-decreasing in alpha. On an exact tie between a
    smaller and a larger count, the smaller one wins.
    """
    if target_edges < 0:
        raise ValueError("target_edges must be >= 0")
    _, _, _, p_i, p_j = backbone_pvalues(sim)
    pmin = np.sort(np.minimum(p_i, p_j))

    def count(alpha):
        return int(np.searchsorted(pmin, alpha, side="left"))

    lo, hi = resolution * 1e-3, float(np.nextafter(1.0, 0.0))
    if count(hi) <= target_edges:
        return BackboneCalibration(hi, target_edges, count(hi))
    if count(lo) >= target_edges:
        return BackboneCalibration(lo, target_edges, count(lo))
    # invariant: count(lo) < target <= count(hi)
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if count(mid) >= target_edges:
            hi = mid
        else:
            lo = mid
    c_lo, c_hi = count(lo), count(hi)
    if target_edges - c_lo <= c_hi - target_edges:
        return BackboneCalibration(lo, target_edges, c_lo)
    return BackboneCalibration(hi, target_edges, c_hi)


def shared_edges(g1: GeoGraph, g2: GeoGraph):
    """Number of edges common to both graphs and that count over ``|E(g1)|``."""
    if g1.n_nodes != g2.n_nodes or not g1.same_nodes(g2):
        raise ValueError("graphs are defined on different node sets")
    count = len(g1.edge_set() & g2.edge_set())
    return count, (count / g1.n_edges if g1.n_edges else 0.0)
