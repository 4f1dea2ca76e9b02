import math

import numpy as np
import pytest

import hyperpred.numkit as nk
from hyperpred.augment import make_views
from hyperpred.contrast import ProjectedViews, agreement, dual_contrastive_loss, init_projectors, project
from hyperpred.encoder import encode, init_encoder
from hyperpred.numkit.rng import stream


def identity_heads(d):
    p = {}
    for head in ("proj_V", "proj_E"):
        p[f"{head}.W1"] = nk.Tensor(np.eye(d), True)
        p[f"{head}.b1"] = nk.Tensor(np.zeros(d), True)
        p[f"{head}.W2"] = nk.Tensor(np.eye(d), True)
        p[f"{head}.b2"] = nk.Tensor(np.zeros(d), True)
    return p


def test_zero_input_zero_output():
    params = init_projectors(3, stream(0, "t"))
    zv, ze = project(nk.Tensor(np.zeros((4, 3))), nk.Tensor(np.zeros((2, 3))), params)
    assert np.all(zv.values == 0) and np.all(ze.values == 0)


def test_identity_heads_pass_positive_inputs_through():
    X = np.random.default_rng(0).uniform(0.1, 2.0, size=(4, 3))
    zv, ze = project(nk.Tensor(X), nk.Tensor(X[:2]), identity_heads(3))
    assert np.array_equal(zv.values, X) and np.array_equal(ze.values, X[:2])


@pytest.mark.parametrize("seed", range(3))
def test_projector_gradients_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    params = init_projectors(5, stream(seed, "t"), d_proj=6)
    for p in params.values():
        p.values[...] = p.values + 0.3 * rng.normal(size=p.shape)
    X = rng.normal(size=(4, 5))
    G = rng.normal(size=(4, 5))

    def loss():
        zv, ze = project(X, X, params)
        return nk.add(nk.total(nk.mul(zv, G)), nk.total(nk.mul(nk.mul(ze, ze), G)))

    with nk.Tape() as tape:
        L = loss()
    nk.backward(tape, L)
    h = 1e-5
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


def test_identical_views_give_exactly_zero():
    Z = nk.Tensor(np.random.default_rng(1).normal(size=(6, 4)))
    E = nk.Tensor(np.random.default_rng(2).normal(size=(3, 4)))
    assert dual_contrastive_loss(ProjectedViews(Z, Z, E, E)).item() == 0.0


def test_orthogonal_node_rows_give_log_two():
    e = nk.Tensor([[0.5, 0.5]])
    L = dual_contrastive_loss(ProjectedViews(nk.Tensor([[1.0, 0.0]]), nk.Tensor([[0.0, 1.0]]), e, e))
    assert L.item() == pytest.approx(math.log(2), rel=1e-15)


def test_anti_aligned_views_clamped_and_finite():
    a = nk.Tensor([[1.0, 2.0]], requires_grad=True)
    with nk.Tape() as tape:
        L = dual_contrastive_loss(ProjectedViews(a, nk.Tensor([[-1.0, -2.0]]), a, nk.Tensor([[-1.0, -2.0]])))
    nk.backward(tape, L)
    assert L.item() == pytest.approx(-2 * math.log(1e-8), rel=1e-12)
    assert np.all(np.isfinite(a.grad))


def test_agreement_hand_mean():
    s = agreement(nk.Tensor([[1.0, 0.0], [1.0, 0.0]]), nk.Tensor([[1.0, 0.0], [0.0, 1.0]])).item()
    assert s == pytest.approx((1.0 + 0.5) / 2)


def test_unmasked_views_through_encoder_give_zero_loss(planted):
    enc = init_encoder(planted.num_features, 8, stream(0, "e"))
    heads = init_projectors(8, stream(0, "p"))
    v1, v2 = make_views(planted, planted.features, 0.0, 0.0, stream(0, "aug"))
    e1, e2 = encode(v1, v1.features, enc), encode(v2, v2.features, enc)
    z1v, z1e = project(e1.P, e1.Q, heads)
    z2v, z2e = project(e2.P, e2.Q, heads)
    assert dual_contrastive_loss(ProjectedViews(z1v, z2v, z1e, z2e)).item() == 0.0
