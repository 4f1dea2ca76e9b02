import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

import hyperpred.numkit as nk
from conftest import hypergraphs
from hyperpred.encoder import encode, init_encoder
from hyperpred.hgraph import Hypergraph
from hyperpred.numkit.rng import stream
from oracles import dense_encode


def fixed_params(d_in, d, W=None, b=0.0, slope=1.0):
    W = np.eye(d_in, d) if W is None else np.asarray(W, dtype=float)
    return {
        "encoder.0.W_E": nk.Tensor(W, True),
        "encoder.0.b_E": nk.Tensor(np.full(d, b), True),
        "encoder.0.W_V": nk.Tensor(np.eye(d), True),
        "encoder.0.b_V": nk.Tensor(np.full(d, b), True),
        "encoder.0.slope": nk.Tensor(np.array(slope), True),
    }


def layer_dicts(params):
    out, k = [], 0
    while f"encoder.{k}.W_E" in params:
        out.append({s: params[f"encoder.{k}.{s}"].values for s in ("W_E", "b_E", "W_V", "b_V", "slope")})
        k += 1
    return out


def test_single_node_self_edge_identity():
    H = Hypergraph(1, [[0]], np.array([[1.0]]))
    emb = encode(H, H.features, fixed_params(1, 1))
    assert emb.P.values.tolist() == [[1.0]] and emb.Q.values.tolist() == [[1.0]]


def test_two_node_edge_hand_values():
    H = Hypergraph(2, [[0, 1]], np.array([[1.0], [3.0]]))
    emb = encode(H, H.features, fixed_params(1, 1))
    assert emb.Q.values.tolist() == [[2.0]]
    assert emb.P.values.tolist() == [[2.0], [2.0]]


def test_isolated_node_gets_bias_only():
    H = Hypergraph(3, [[0, 1]], np.array([[1.0], [3.0], [50.0]]))
    params = fixed_params(1, 1, b=-0.4, slope=0.25)
    P = encode(H, H.features, params).P.values
    # zero message, then PReLU(0 + b_V)
    assert P[2, 0] == pytest.approx(0.25 * -0.4, abs=0)


def test_feature_width_mismatch_raises():
    H = Hypergraph(2, [[0, 1]], np.ones((2, 3)))
    with pytest.raises(ValueError, match="feature dim"):
        encode(H, H.features, fixed_params(2, 2))


@settings(max_examples=60, deadline=None)
@given(hypergraphs(), st.integers(1, 2), st.integers(0, 10_000))
def test_encode_matches_dense_loop_oracle(H, layers, seed):
    rng = stream(seed, "test")
    params = init_encoder(H.num_features, 4, rng, layers)
    for p in params.values():
        p.values[...] = p.values + 0.2 * rng.normal(size=p.shape)
    weights = rng.uniform(0.5, 2.0, size=H.num_edges)
    Hw = Hypergraph(H.num_nodes, H.edges, H.features, weights)
    emb = encode(Hw, Hw.features, params)
    P, Q = dense_encode([set(e.tolist()) for e in H.edges], weights, H.features, layer_dicts(params))
    assert np.max(np.abs(emb.P.values - P)) <= 1e-10
    assert np.max(np.abs(emb.Q.values - Q)) <= 1e-10


def test_sparse_and_dense_features_agree(planted):
    params = init_encoder(planted.num_features, 8, stream(0, "t"))
    a = encode(planted, planted.features, params).P.values
    b = encode(planted, np.asarray(planted.features.toarray()) if sp.issparse(planted.features)
               else sp.csr_matrix(planted.features), params).P.values
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(hypergraphs(), st.integers(0, 10_000))
def test_permutation_equivariance(H, seed):
    rng = np.random.default_rng(seed)
    params = init_encoder(H.num_features, 3, stream(seed, "t"))
    emb = encode(H, H.features, params)
    pv = rng.permutation(H.num_nodes)  # new id of old node i is pv[i]
    pe = rng.permutation(H.num_edges)
    inv = np.argsort(pv)
    edges = [None] * H.num_edges
    for j, e in enumerate(H.edges):
        edges[pe[j]] = [int(pv[v]) for v in e]
    H2 = Hypergraph(H.num_nodes, edges, H.features[inv])
    emb2 = encode(H2, H2.features, params)
    np.testing.assert_allclose(emb2.P.values[pv], emb.P.values, atol=1e-12)
    np.testing.assert_allclose(emb2.Q.values[pe], emb.Q.values, atol=1e-12)


def test_encode_gradients_match_finite_differences():
    rng = np.random.default_rng(2)
    H = Hypergraph(5, [[0, 1, 2], [2, 3], [3, 4, 0]], rng.normal(size=(5, 3)), [1.0, 2.0, 0.5])
    params = init_encoder(3, 4, stream(1, "t"), layers=2)
    for p in params.values():
        p.values[...] = p.values + 0.3 * rng.normal(size=p.shape)
    G = rng.normal(size=(5, 4))

    def loss():
        return nk.total(nk.mul(encode(H, H.features, params).P, G))

    with nk.Tape() as tape:
        L = loss()
    nk.backward(tape, L)
    h = 1e-6
    for name, p in params.items():
        for i in np.ndindex(p.shape):
            orig = p.values[i]
            p.values[i] = orig + h
            up = loss().item()
            p.values[i] = orig - h
            down = loss().item()
            p.values[i] = orig
            num = (up - down) / (2 * h)
            assert abs(num - p.grad[i]) <= 1e-6 + 1e-4 * abs(num), name
