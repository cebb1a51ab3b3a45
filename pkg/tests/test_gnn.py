import json
import pytest
import numpy as np
from graphmine import gnn, graph
from graphmine.errors import DimensionMismatch, CheckpointError


def identity_model(d):
    dims = gnn.ModelDims(input_dim=d, hidden_dim=d, embedding_dim=d)
    return gnn.GnnModel(dims=dims, W1=np.eye(d), b1=np.zeros(d), W2=np.eye(d),
                        b2=np.zeros(d), w_out=np.ones(d), b_out=np.zeros(1))


def two_node_graph():
    g = graph.SampleGraph(n_nodes=2, indptr=[0, 2, 4], indices=[0, 1, 0, 1],
                          raw=np.ones(4), norm=np.zeros(4), method="complete", sigma=1.0)
    return graph.normalize_neighborhood(g)


def test_init_model():
    dims = gnn.ModelDims(input_dim=5, hidden_dim=8, embedding_dim=4)
    model = gnn.init_model(dims, seed=3)
    assert model.W1.shape == (8, 5)
    assert model.W2.shape == (4, 8)
    assert model.w_out.shape == (4,)
    assert model.b_out.shape == (1,)
    for name in ("b1", "b2", "b_out"):
        assert not getattr(model, name).any()
    assert np.abs(model.W1).max() <= np.sqrt(6.0 / 13)

    assert model.equals(gnn.init_model(dims, seed=3))
    assert not model.equals(gnn.init_model(dims, seed=4))


def test_model_dims_validation():
    with pytest.raises(ValueError):
        gnn.ModelDims(input_dim=0)
    with pytest.raises(ValueError):
        gnn.ModelDims(input_dim=3, hidden_dim=True)
    with pytest.raises(DimensionMismatch):
        identity_model(2).replace(W1=np.eye(3))


def test_model_is_read_only():
    model = identity_model(2)
    with pytest.raises(ValueError):
        model.W1[0, 0] = 5.0


def test_forward_single_node_identity():
    features = np.array([[1.5, 2.0]])
    g = graph.build_complete_graph(features, sigma=1.0)
    trace = gnn.forward(identity_model(2), g, features)
    assert trace.embeddings.tolist() == [[1.5, 2.0]]
    assert trace.logits.tolist() == [3.5]


def test_forward_two_nodes_average():
    model = identity_model(1)
    trace = gnn.forward(model, two_node_graph(), np.array([[0.0], [2.0]]))
    assert trace.agg1.tolist() == [[1.0], [1.0]]
    assert trace.embeddings.tolist() == [[1.0], [1.0]]
    assert trace.predictions.tolist() == [1 / (1 + np.exp(-1.0))] * 2


def test_forward_shapes(random_dataset):
    ds = random_dataset(n=10, d=3)
    g = graph.build_knn_graph(ds, k=3, sigma=1.0)
    model = gnn.init_model(gnn.ModelDims(3, 4, 2), seed=0)
    trace = gnn.forward(model, g, ds.features)
    assert trace.embeddings.shape == (10, 2)
    assert trace.predictions.shape == (10,)
    assert np.all((trace.predictions > 0) & (trace.predictions < 1))

    with pytest.raises(DimensionMismatch):
        gnn.forward(model, g, ds.features[:, :2])
    with pytest.raises(DimensionMismatch):
        gnn.forward(model, g, ds.features[:9])


def test_forward_is_deterministic(random_dataset):
    for seed in range(4):
        ds = random_dataset(n=30, d=5, seed=seed)
        g = graph.build_knn_graph(ds, k=4, sigma=graph.median_bandwidth(ds))
        a = gnn.forward(gnn.init_model(gnn.ModelDims(5, 7, 3), seed=seed), g, ds.features)
        b = gnn.forward(gnn.init_model(gnn.ModelDims(5, 7, 3), seed=seed), g, ds.features)
        assert np.array_equal(a.embeddings, b.embeddings)
        assert np.array_equal(a.predictions, b.predictions)


def test_backward_zero_upstream(random_dataset):
    ds = random_dataset(n=10, d=3)
    g = graph.build_knn_graph(ds, k=3, sigma=1.0)
    model = gnn.init_model(gnn.ModelDims(3, 4, 2), seed=0)
    trace = gnn.forward(model, g, ds.features)
    grads = gnn.backward(model, g, trace, np.zeros(10), np.zeros((10, 2)))
    for value in grads.parameters().values():
        assert not value.any()


def test_backward_chain_rule_base_case():
    model = identity_model(1)
    features = np.array([[1.5]])
    g = graph.build_complete_graph(features, sigma=1.0)
    trace = gnn.forward(model, g, features)
    grads = gnn.backward(model, g, trace, np.zeros(1), np.array([[0.3]]))
    assert grads.W2.tolist() == [[0.3 * 1.5]]
    assert grads.b2.tolist() == [0.3]
    assert grads.w_out.tolist() == [0.0]


def test_backward_shape_errors():
    model = identity_model(1)
    features = np.array([[1.5]])
    g = graph.build_complete_graph(features, sigma=1.0)
    trace = gnn.forward(model, g, features)
    with pytest.raises(DimensionMismatch):
        gnn.backward(model, g, trace, np.zeros(2))
    with pytest.raises(DimensionMismatch):
        gnn.backward(model, g, trace, np.zeros(1), np.zeros((1, 2)))


def _scalar_loss(model, g, x, a, b):
    trace = gnn.forward(model, g, x)
    return float(a @ trace.predictions + np.sum(b * trace.embeddings)), trace


def _gradient_check(seed, eps=1e-6):
    """
    Compare backward with central differences on L = a . y' + sum(B * E).
    :return: max relative error, or None when a pre-activation sits near the relu kink
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((20, 5))
    g = graph.build_knn_graph(x, k=3, sigma=graph.median_bandwidth(x))
    model = gnn.init_model(gnn.ModelDims(5, 6, 4), seed=seed)
    model = model.replace(b1=rng.normal(0, 0.1, 6), b2=rng.normal(0, 0.1, 4),
                          b_out=rng.normal(0, 0.1, 1))
    a = rng.standard_normal(20)
    b = rng.standard_normal((20, 4))

    _, trace = _scalar_loss(model, g, x, a, b)
    if np.abs(trace.z1).min() < 1e-4:
        return None
    grads = gnn.backward(model, g, trace, a, b)

    worst = 0.0
    for name, value in model.parameters().items():
        analytic = getattr(grads, name).ravel()
        for idx in range(value.size):
            plus, minus = value.copy().ravel(), value.copy().ravel()
            plus[idx] += eps
            minus[idx] -= eps
            lp, _ = _scalar_loss(model.replace(**{name: plus.reshape(value.shape)}), g, x, a, b)
            lm, _ = _scalar_loss(model.replace(**{name: minus.reshape(value.shape)}), g, x, a, b)
            numeric = (lp - lm) / (2 * eps)
            err = abs(numeric - analytic[idx]) / max(1.0, abs(numeric), abs(analytic[idx]))
            worst = max(worst, err)
    return worst


def test_gradient_check():
    checked, seed = 0, 0
    while checked < 50:
        err = _gradient_check(seed)
        seed += 1
        if err is None:
            continue
        assert err < 1e-5, "seed %d" % (seed - 1)
        checked += 1
    assert seed < 200


def test_permutation_equivariance(random_dataset):
    ds = random_dataset(n=15, d=3, seed=4)
    perm = np.random.default_rng(1).permutation(15)
    model = gnn.init_model(gnn.ModelDims(3, 5, 2), seed=2)

    g = graph.build_knn_graph(ds.features, k=3, sigma=1.0)
    gp = graph.build_knn_graph(ds.features[perm], k=3, sigma=1.0)
    emb = gnn.forward(model, g, ds.features).embeddings
    emb_p = gnn.forward(model, gp, ds.features[perm]).embeddings
    assert np.allclose(emb[perm], emb_p, atol=1e-12)


def test_checkpoint_round_trip(tmp_path):
    model = gnn.init_model(gnn.ModelDims(4, 3, 2), seed=11)
    path = str(tmp_path / "ckpt" / "model.json")
    gnn.save_model(model, path)
    loaded = gnn.load_model(path)
    assert loaded.equals(model)
    assert loaded.seed == 11


def test_checkpoint_integrity(tmp_path):
    model = gnn.init_model(gnn.ModelDims(4, 3, 2), seed=11)
    path = tmp_path / "model.json"
    gnn.save_model(model, str(path))

    document = json.loads(path.read_text())
    document["payload"]["parameters"]["W1"]["values"][0] += 1.0
    path.write_text(json.dumps(document))
    with pytest.raises(CheckpointError):
        gnn.load_model(str(path))

    path.write_text("not json")
    with pytest.raises(CheckpointError):
        gnn.load_model(str(path))

    with pytest.raises(CheckpointError):
        gnn.load_model(str(tmp_path / "missing.json"))
