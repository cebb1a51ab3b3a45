import math
import pytest
import numpy as np
from graphmine import graph
from graphmine.errors import (NonPositiveSigma,
                              DegenerateData,
                              InvalidK,
                              InvalidBins,
                              ZeroNeighborhood,
                              DimensionMismatch)


def points(*values):
    return np.array(values, dtype=np.float64)[:, None]


def edges(g):
    src, dst, _, _ = g.edge_list()
    return sorted((int(s), int(t)) for s, t in zip(src, dst) if s < t)


def dense(g):
    out = np.zeros((g.n_nodes, g.n_nodes))
    src, dst, _, norm = g.edge_list()
    out[src, dst] = norm
    return out


def test_gaussian_similarity():
    assert graph.gaussian_similarity([1.0, 2.0], [1.0, 2.0], 0.3) == 1.0
    assert graph.gaussian_similarity([0.0], [2.0], 2.0) == pytest.approx(0.3678794, abs=1e-7)
    assert graph.gaussian_similarity([0, 0], [3, 4], 5) == pytest.approx(0.3678794, abs=1e-7)
    assert graph.gaussian_similarity([0, 0], [3, 4], 5) == math.exp(-1.0)


def test_gaussian_similarity_errors():
    for sigma in (0, -1.0, None, float("inf")):
        with pytest.raises(NonPositiveSigma):
            graph.gaussian_similarity([0.0], [1.0], sigma)
    with pytest.raises(DimensionMismatch):
        graph.gaussian_similarity([0.0], [1.0, 2.0], 1.0)


def test_median_bandwidth():
    assert graph.median_bandwidth(points(0, 1, 2)) == 1.0
    assert graph.median_bandwidth(points(0, 4)) == 4.0
    with pytest.raises(DegenerateData):
        graph.median_bandwidth(points(3, 3, 3))
    with pytest.raises(DegenerateData):
        graph.median_bandwidth(points(3))


def test_median_bandwidth_zero_median_falls_back():
    # six zero distances out of ten
    assert graph.median_bandwidth(points(0, 0, 0, 0, 2)) == 2.0


def test_median_bandwidth_subsample(random_dataset):
    ds = random_dataset(n=50, d=3, seed=1)
    a = graph.median_bandwidth(ds, sample_cap=20, seed=5)
    assert a == graph.median_bandwidth(ds, sample_cap=20, seed=5)
    assert a > 0
    assert graph.median_bandwidth(ds, sample_cap=50) == graph.median_bandwidth(ds, sample_cap=1000)


def test_knn_graph():
    g = graph.build_knn_graph(points(0, 1, 3), k=1, sigma=1.0)
    assert edges(g) == [(0, 1), (1, 2)]
    assert g.n_edges == 2
    assert g.neighbors(0)[0] == (0, 1.0, pytest.approx(1 / (1 + math.exp(-1))))
    assert [j for j, _, _ in g.neighbors(1)] == [0, 1, 2]


def test_knn_graph_tie_break():
    g = graph.build_knn_graph(points(0, 0, 5), k=1, sigma=1.0)
    # 0 <-> 1 at distance 0, node 2 is equidistant and picks node 0
    assert edges(g) == [(0, 1), (0, 2)]
    assert g.neighbors(0)[1][1] == 1.0


def test_knn_graph_invalid_k():
    for k in (0, 3, True):
        with pytest.raises(InvalidK):
            graph.build_knn_graph(points(0, 1, 3), k=k, sigma=1.0)
    with pytest.raises(NonPositiveSigma):
        graph.build_knn_graph(points(0, 1, 3), k=1, sigma=0.0)


def test_complete_graph():
    g = graph.build_complete_graph(points(0, 1, 3), sigma=1.0)
    assert g.n_edges == 3
    assert g.n_entries == 9
    lone = graph.build_complete_graph(points(7), sigma=1.0)
    assert lone.neighbors(0) == [(0, 1.0, 1.0)]
    assert lone.n_edges == 0


def test_knn_full_k_equals_complete(random_dataset):
    ds = random_dataset(n=12, d=3)
    sigma = graph.median_bandwidth(ds)
    knn = graph.build_knn_graph(ds, k=11, sigma=sigma)
    complete = graph.build_complete_graph(ds, sigma=sigma)
    assert np.array_equal(knn.indptr, complete.indptr)
    assert np.array_equal(knn.indices, complete.indices)
    assert np.array_equal(knn.raw, complete.raw)
    assert np.array_equal(knn.norm, complete.norm)


def test_graph_weights_match_similarity(random_dataset):
    ds = random_dataset(n=10, d=3)
    g = graph.build_knn_graph(ds, k=3, sigma=0.7)
    for i in range(g.n_nodes):
        for j, raw, _ in g.neighbors(i):
            assert raw == graph.gaussian_similarity(ds.features[i], ds.features[j], 0.7)


def test_nmi():
    codes = np.array([[0, 0, 1, 1], [1, 1, 0, 0], [0, 0, 0, 0], [0, 1, 0, 1]])
    nmi = graph._nmi_block(codes, codes, 2)
    assert nmi[0, 0] == 1.0
    assert nmi[0, 1] == pytest.approx(1.0)
    assert nmi[2, 3] == 0.0
    assert nmi[2, 2] == 1.0
    assert np.all((nmi >= 0) & (nmi <= 1))


def test_mutual_information_graph(random_dataset):
    ds = random_dataset(n=20, d=6, seed=3)
    g = graph.build_mutual_information_graph(ds, mi_bins=2, k=3)
    assert g.method == "mutual_information"
    assert g.sigma is None
    assert np.all(g.degrees() >= 0)
    assert np.all((g.raw > 0) & (g.raw <= 1))


def test_mutual_information_graph_errors(random_dataset):
    ds = random_dataset(n=10, d=4)
    with pytest.raises(InvalidBins):
        graph.build_mutual_information_graph(ds, mi_bins=1, k=2)
    with pytest.raises(InvalidK):
        graph.build_mutual_information_graph(ds, mi_bins=2, k=10)


def test_adaptive_threshold_graph():
    equidistant = np.eye(3)
    g = graph.build_adaptive_threshold_graph(equidistant, alpha=1.0, sigma=1.0)
    assert edges(g) == [(0, 1), (0, 2), (1, 2)]

    g = graph.build_adaptive_threshold_graph(points(0, 1, 3), alpha=1e9, sigma=1.0)
    assert g.n_edges == 0
    assert np.all(g.norm == 1.0)


def test_normalize_neighborhood():
    g = graph.SampleGraph(n_nodes=2, indptr=[0, 2, 4], indices=[0, 1, 0, 1],
                          raw=[0.2, 0.3, 0.3, 0.7], norm=np.zeros(4), method="knn", sigma=1.0)
    g = graph.normalize_neighborhood(g)
    assert [w for _, _, w in g.neighbors(0)] == pytest.approx([0.4, 0.6])

    g = graph.SampleGraph(n_nodes=3, indptr=[0, 3, 5, 7], indices=[0, 1, 2, 0, 1, 0, 2],
                          raw=[1, 1, 2, 1, 1, 2, 1], norm=np.zeros(7), method="knn", sigma=1.0)
    g = graph.normalize_neighborhood(g)
    assert [w for _, _, w in g.neighbors(0)] == [0.25, 0.25, 0.5]


def test_normalize_neighborhood_empty_row():
    g = graph.SampleGraph(n_nodes=2, indptr=[0, 1, 1], indices=[0], raw=[1.0],
                          norm=[1.0], method="knn", sigma=1.0)
    with pytest.raises(ZeroNeighborhood):
        graph.normalize_neighborhood(g)


def test_sample_graph_must_be_symmetric():
    with pytest.raises(ValueError):
        graph.SampleGraph(n_nodes=2, indptr=[0, 2, 3], indices=[0, 1, 1],
                          raw=[1.0, 0.5, 1.0], norm=np.zeros(3), method="knn")


@pytest.mark.parametrize("method", graph.METHODS)
def test_graph_invariants(method, random_dataset):
    ds = random_dataset(n=25, d=4, seed=2)
    g = graph.build_graph(ds, graph.GraphConfig(method=method, k=4, mi_bins=2), seed=1)
    src, dst, raw, norm = g.edge_list()

    loops = src == dst
    assert loops.sum() == g.n_nodes
    assert np.all(raw[loops] == 1.0)
    assert np.all((raw > 0) & (raw <= 1))
    assert np.allclose(np.bincount(src, weights=norm), 1.0, atol=1e-12)
    for i in range(g.n_nodes):
        row = g.indices[g.indptr[i]:g.indptr[i + 1]]
        assert np.all(np.diff(row) > 0)

    pairs = {(int(s), int(t)): r for s, t, r in zip(src, dst, raw)}
    for (s, t), r in pairs.items():
        assert pairs[(t, s)] == r


def test_propagate(random_dataset):
    ds = random_dataset(n=15, d=3)
    g = graph.build_knn_graph(ds, k=3, sigma=1.0)
    p = dense(g)
    h = np.random.default_rng(0).standard_normal((15, 2))
    assert np.allclose(g.propagate(h), p @ h, atol=1e-12)
    assert np.allclose(g.propagate_transpose(h), p.T @ h, atol=1e-12)
    # rows of P sum to 1, so the all-ones vector is preserved
    assert np.allclose(g.propagate(np.ones((15, 1))), 1.0, atol=1e-12)
    with pytest.raises(DimensionMismatch):
        g.propagate(np.ones((14, 2)))


def test_build_graph_fixed_sigma(random_dataset):
    ds = random_dataset(n=10, d=2)
    g = graph.build_graph(ds, graph.GraphConfig(method="complete", sigma_mode=0.5))
    assert g.sigma == 0.5
    assert g.digest() == graph.build_complete_graph(ds, 0.5).digest()
    auto = graph.build_graph(ds, graph.GraphConfig(method="knn", k=2))
    assert auto.sigma == graph.median_bandwidth(ds)


def test_export_edge_list(tmp_path):
    g = graph.build_knn_graph(points(0, 1, 3), k=1, sigma=1.0)
    path = tmp_path / "edges.csv"
    graph.export_edge_list(g, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == "src,dst,raw_weight,norm_weight"
    assert len(lines) == g.n_entries + 1
    assert lines[1].startswith("0,0,1.0,")


def test_degree_stats():
    g = graph.build_knn_graph(points(0, 1, 3), k=1, sigma=1.0)
    stats = graph.degree_stats(g, [0, 0, 1])
    assert stats["n_nodes"] == 3
    assert stats["n_edges"] == 2
    assert stats["cross_class_edge_share"] == 0.5
    assert stats["classes"]["majority"]["mean_degree"] == 1.5
    assert stats["classes"]["majority"]["max_degree"] == 2
    assert stats["classes"]["minority"]["min_degree"] == 1
    assert stats["classes"]["minority"]["mean_weighted_degree"] == pytest.approx(math.exp(-2))
    with pytest.raises(DimensionMismatch):
        graph.degree_stats(g, [0, 1])


def _check_invariants(g):
    src, dst, raw, norm = g.edge_list()
    loops = src == dst
    assert loops.sum() == g.n_nodes
    assert np.all(raw[loops] == 1.0)
    assert np.all((raw > 0) & (raw <= 1))
    assert np.allclose(np.bincount(src, weights=norm, minlength=g.n_nodes), 1.0, atol=1e-12)
    for i in range(g.n_nodes):
        row = g.indices[g.indptr[i]:g.indptr[i + 1]]
        assert np.all(np.diff(row) > 0)
    pairs = {(int(s), int(t)): r for s, t, r in zip(src, dst, raw)}
    for (s, t), r in pairs.items():
        assert pairs[(t, s)] == r


@pytest.mark.parametrize("n", [2, 10, 60, 200, pytest.param(500, marks=pytest.mark.slow)])
@pytest.mark.parametrize("method", graph.METHODS)
def test_graph_invariants_random_sizes(method, n, random_dataset):
    for seed in range(3):
        ds = random_dataset(n=n, d=1 + seed * 2, seed=seed, minority=1)
        config = graph.GraphConfig(method=method, k=min(4, n - 1), mi_bins=2)
        _check_invariants(graph.build_graph(ds, config, seed=seed))


@pytest.mark.parametrize("seed", range(5))
def test_knn_full_k_equals_complete_seeded(seed, random_dataset):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 40))
    ds = random_dataset(n=n, d=int(rng.integers(1, 6)), seed=seed, minority=1)
    sigma = float(rng.uniform(0.1, 3.0))
    knn = graph.build_knn_graph(ds, k=n - 1, sigma=sigma)
    complete = graph.build_complete_graph(ds, sigma=sigma)
    assert np.array_equal(knn.indices, complete.indices)
    assert np.array_equal(knn.raw, complete.raw)
    assert np.array_equal(knn.norm, complete.norm)


def test_gaussian_similarity_monotone():
    rng = np.random.default_rng(11)
    for _ in range(200):
        d = int(rng.integers(1, 8))
        a, b, c = rng.standard_normal((3, d))
        sigma = float(rng.uniform(0.05, 5.0))
        near, far = (b, c) if np.linalg.norm(a - b) <= np.linalg.norm(a - c) else (c, b)
        s_near = graph.gaussian_similarity(a, near, sigma)
        s_far = graph.gaussian_similarity(a, far, sigma)
        assert 0 < s_far <= s_near <= 1
        assert graph.gaussian_similarity(a, b, sigma) == graph.gaussian_similarity(b, a, sigma)


@pytest.mark.parametrize("method", graph.METHODS)
def test_propagate_keeps_constant_features(method, random_dataset):
    rng = np.random.default_rng(5)
    for seed in range(3):
        ds = random_dataset(n=40, d=3, seed=seed)
        g = graph.build_graph(ds, graph.GraphConfig(method=method, k=5, mi_bins=2), seed=seed)
        row = rng.standard_normal(4)
        h = np.tile(row, (g.n_nodes, 1))
        assert np.allclose(g.propagate(h), h, atol=1e-12)
