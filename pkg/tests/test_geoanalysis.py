import numpy as np
import pytest

from geonets.geoanalysis import (distance_pairs, edge_length_stats, edge_lengths, histogram,
                                 regress, weight_histogram)
from geonets.graph import GeoGraph
from geonets.metrics import UndefinedMetricError

from oracles import floyd_warshall, ols_normal_equations, random_graph


def graph(x, y, edges, weights=None):
    n = len(x)
    weights = [1.0] * len(edges) if weights is None else weights
    return GeoGraph(x, y, np.zeros(n), np.zeros(n),
                    np.asarray(edges, dtype=int).reshape(-1, 2), weights)


def test_chain_on_a_line_is_exactly_linear():
    # nodes 2 km apart joined in order: hops = geo / 2
    g = graph([0, 2, 4, 6, 8], [0] * 5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    pairs = distance_pairs(g)
    assert len(pairs) == 10
    res = regress(pairs)
    assert res.slope == pytest.approx(0.5, abs=1e-12)
    assert res.intercept == pytest.approx(0.0, abs=1e-12)
    assert res.r_squared == pytest.approx(1.0, abs=1e-12)
    assert res.n_pairs == 10


def test_pairs_and_regression_against_oracles():
    rng = np.random.default_rng(17)
    for _ in range(10):
        n = int(rng.integers(6, 25))
        x, y = rng.uniform(0, 50, n), rng.uniform(0, 50, n)
        edges = random_graph(rng, n, 0.25)
        if not edges:
            continue
        g = graph(x, y, edges)
        pairs = distance_pairs(g)
        d = floyd_warshall(n, edges)
        ref = [(i, j) for i in range(n) for j in range(i + 1, n) if d[i][j] != float("inf")]
        assert list(zip(pairs.i.tolist(), pairs.j.tolist())) == ref
        assert pairs.topo.tolist() == [d[i][j] for i, j in ref]
        np.testing.assert_allclose(pairs.geo, [np.hypot(x[i] - x[j], y[i] - y[j]) for i, j in ref])
        if len(ref) >= 3:
            slope, intercept, r2 = ols_normal_equations(pairs.geo.tolist(), pairs.topo.tolist())
            res = regress(pairs)
            assert res.slope == pytest.approx(slope, rel=1e-9, abs=1e-12)
            assert res.intercept == pytest.approx(intercept, rel=1e-9, abs=1e-12)
            assert res.r_squared == pytest.approx(r2, rel=1e-9, abs=1e-12)
            assert 0 <= res.p_value <= 1


def test_regression_errors():
    g = graph([0, 1], [0, 0], [(0, 1)])
    with pytest.raises(ValueError):
        regress(distance_pairs(g))
    with pytest.raises(UndefinedMetricError):
        distance_pairs(graph([0, 1], [0, 0], []))
    with pytest.raises(ValueError):
        regress(distance_pairs(g), response="geo_on_topo")


def test_edge_length_histogram():
    g = graph([0, 3, 0, 10], [0, 4, 0.5, 0], [(0, 1), (0, 2), (0, 3)], [0.2, 0.4, 0.9])
    np.testing.assert_allclose(edge_lengths(g), [5.0, 0.5, 10.0])
    stats = edge_length_stats(g, bins=4)
    assert stats.max_km == 10.0
    assert stats.mean_km == pytest.approx(15.5 / 3)
    np.testing.assert_allclose(stats.histogram.edges, [0, 2.5, 5, 7.5, 10])
    assert stats.histogram.counts.tolist() == [1, 0, 1, 1]
    assert sum(weight_histogram(g, 5).counts) == 3


def test_histogram_csv(tmp_path):
    h = histogram([0.1, 0.2, 0.2, 0.9], bins=2)
    h.write_csv(tmp_path / "h.csv")
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[0] == "bin_lo,bin_hi,count"
    assert [int(r.split(",")[2]) for r in lines[1:]] == [3, 1]
    with pytest.raises(UndefinedMetricError):
        histogram([])
