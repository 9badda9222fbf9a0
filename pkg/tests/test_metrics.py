import json

import networkx as nx
import numpy as np
import pytest

from geonets.graph import GeoGraph, read_graph_csv, to_geojson, write_edges_csv, write_nodes_csv
from geonets.metrics import (TABLE_COLUMNS, UndefinedMetricError, components, diameter,
                             full_report, giant_component, heterogeneity, local_clustering,
                             mean_clustering, mean_shortest_path, write_table)

from oracles import (clustering_direct, components_direct, kappa_direct, path_metrics,
                     random_graph)


def graph(n, edges, weights=None):
    weights = [1.0] * len(edges) if weights is None else weights
    xs = np.arange(n, dtype=float)
    return GeoGraph(xs, np.zeros(n), -23 + 0.01 * xs, -46 + 0.01 * xs,
                    np.asarray(edges, dtype=int).reshape(-1, 2), weights)


def test_triangle_with_pendant():
    g = graph(4, [(0, 1), (1, 2), (0, 2), (0, 3)])
    assert mean_clustering(g) == pytest.approx(7 / 12, abs=1e-15)
    np.testing.assert_allclose(local_clustering(g), [1 / 3, 1, 1, 0])
    # pair distances 1,1,1,1,2,2
    assert mean_shortest_path(g) == pytest.approx(8 / 6, abs=1e-15)
    assert diameter(g) == 2
    # degrees 3,2,2,1
    assert heterogeneity(g) == pytest.approx((18 / 4) / 2 ** 2, abs=1e-15)


def test_star_kappa():
    g = graph(5, [(0, k) for k in range(1, 5)])
    # <k^2> = 20/5, <k> = 8/5
    assert heterogeneity(g) == pytest.approx(4 / (1.6 ** 2), abs=1e-15)
    assert heterogeneity(g) == pytest.approx(25 / 16, abs=1e-15)


def test_components_and_giant():
    g = graph(7, [(0, 1), (1, 2), (3, 4)])
    assert components(g) == (4, 3, 2)
    assert giant_component(g).tolist() == [0, 1, 2]


def test_disconnected_paths_use_reachable_pairs():
    g = graph(5, [(0, 1), (1, 2), (3, 4)])
    # pairs: 01,12 -> 1, 02 -> 2, 34 -> 1
    assert mean_shortest_path(g) == pytest.approx(5 / 4, abs=1e-15)
    assert diameter(g) == 2


def test_edgeless_graph():
    g = graph(3, [])
    with pytest.raises(UndefinedMetricError):
        mean_shortest_path(g)
    with pytest.raises(UndefinedMetricError):
        diameter(g)
    with pytest.raises(UndefinedMetricError):
        heterogeneity(g)
    assert mean_clustering(g) == 0.0
    rep = full_report(g)
    assert rep.mean_shortest_path is None and rep.kappa is None and rep.er is None
    assert rep.num_components == 3 and rep.singletons == 3


def test_against_direct_oracle():
    rng = np.random.default_rng(21)
    for _ in range(40):
        n = int(rng.integers(2, 40))
        edges = random_graph(rng, n, rng.uniform(0.02, 0.4))
        g = graph(n, edges)
        ml, d = path_metrics(n, edges)
        if ml is None:
            with pytest.raises(UndefinedMetricError):
                mean_shortest_path(g)
        else:
            assert mean_shortest_path(g) == ml
            assert diameter(g) == d
            assert ml <= d
            assert heterogeneity(g) == kappa_direct(n, edges)
            assert heterogeneity(g) >= 1
        assert mean_clustering(g) == clustering_direct(n, edges)
        assert tuple(components(g)) == components_direct(n, edges)


def test_against_networkx():
    rng = np.random.default_rng(8)
    for _ in range(10):
        n = int(rng.integers(5, 30))
        edges = random_graph(rng, n, 0.3)
        g = graph(n, edges)
        h = g.to_networkx()
        assert mean_clustering(g) == pytest.approx(nx.average_clustering(h), abs=1e-12)
        if nx.is_connected(h):
            assert mean_shortest_path(g) == pytest.approx(
                nx.average_shortest_path_length(h), abs=1e-12)
            assert diameter(g) == nx.diameter(h)


def test_full_report_and_table(tmp_path):
    g = graph(4, [(0, 1), (1, 2), (0, 2), (0, 3)], [0.9, 0.8, 0.7, 0.95])
    g.label = "demo"
    rep = full_report(g)
    assert rep.l_edges == 4 and rep.weight_min == 0.7 and rep.weight_max == 0.95
    assert rep.er is not None and rep.er.c_rand == pytest.approx(4 / 6)
    json.loads(rep.to_json())
    write_table([rep.table_row()], tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0].split(",") == TABLE_COLUMNS
    assert lines[1].startswith("demo,4,0.7,0.95,")


def test_graph_validation():
    with pytest.raises(ValueError):
        graph(3, [(0, 0)])
    with pytest.raises(ValueError):
        graph(3, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        graph(3, [(0, 5)])
    with pytest.raises(ValueError):
        graph(2, [(0, 1)], [np.nan])


def test_graph_csv_and_geojson(tmp_path):
    g = graph(4, [(2, 0), (1, 3)], [0.5, 0.25])
    g.label = "x"
    write_nodes_csv(g, tmp_path / "n.csv")
    write_edges_csv(g, tmp_path / "e.csv")
    back = read_graph_csv(tmp_path / "n.csv", tmp_path / "e.csv", "x")
    assert back.edge_set() == {(0, 2), (1, 3)}
    assert np.array_equal(back.weights, g.weights)
    gj = to_geojson(g)
    kinds = [f["geometry"]["type"] for f in gj["features"]]
    assert kinds.count("Point") == 4 and kinds.count("LineString") == 2
    pt = next(f for f in gj["features"] if f["geometry"]["type"] == "Point")
    assert pt["geometry"]["coordinates"] == [g.lon[0], g.lat[0]]
