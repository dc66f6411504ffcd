from dataclasses import replace

import numpy as np
import pytest

from ccguide.cca import dcca_objective, fit_cca, identity_residuals
from ccguide.data import TwoViewDataset, gen_classification, gen_correlated_gaussian, onehot
from ccguide.errors import InvalidInputError, TrainingDivergedError
from ccguide.filter import apply_filter
from ccguide.model import (
    RefreshPolicy,
    align_signs,
    backward_task,
    build_ccdnn,
    evaluate,
    forward_task,
    loss,
    predict,
    refresh_constraint,
    train,
    train_dcca_baseline,
)
from ccguide.nn import Network, TrainConfig, forward


def tiny_data(task, n=40, dims=(5, 4), k=3, seed=0):
    rng = np.random.default_rng(seed)
    shared = rng.normal(size=(2, n))
    x1 = rng.normal(size=(dims[0], 2)) @ shared + 0.5 * rng.normal(size=(dims[0], n))
    x2 = rng.normal(size=(dims[1], 2)) @ shared + 0.5 * rng.normal(size=(dims[1], n))
    if task == "classify":
        target = onehot(rng.integers(0, k, size=n), k)
    elif task == "regress":
        target = rng.normal(size=(k, n))
    else:
        target = None
    return TwoViewDataset(x1, x2, target)


def tiny_model(task, n_blocks=1, use_filter=True, seed=0, dims=(5, 4)):
    kwargs = dict(latent=(3, 3), enc_hidden=(6,), head_hidden=(5,), n_blocks=n_blocks,
                  seed=seed, use_filter=use_filter)
    if task == "reconstruct":
        return build_ccdnn(task, dims, recon_activation="sigmoid", **kwargs)
    if task == "regress":
        return build_ccdnn(task, dims, out_dim=3, target_mean=0.5, target_std=2.0, **kwargs)
    return build_ccdnn(task, dims, out_dim=3, **kwargs)


def batch_target(task, data, idx):
    if task == "reconstruct":
        return (data.x1[:, idx], data.x2[:, idx])
    return data.target[:, idx]


@pytest.mark.parametrize("task,n_blocks,use_filter", [
    ("reconstruct", 1, True), ("classify", 1, True), ("regress", 1, True),
    ("classify", 2, True), ("reconstruct", 2, False), ("regress", 2, True),
])
def test_full_model_gradient_matches_finite_differences(task, n_blocks, use_filter):
    data = tiny_data(task)
    model = tiny_model(task, n_blocks, use_filter)
    refresh_constraint(model, data, RefreshPolicy(reg=1e-3))
    assert all(blk.cca.kappa > 0 for blk in model.blocks)
    idx = np.arange(8)
    x1, x2, tgt = data.x1[:, idx], data.x2[:, idx], batch_target(task, data, idx)

    def f(p):
        model.set_params(p)
        return loss(task, forward_task(model, x1, x2), tgt)[0]

    base = model.get_params()
    out = forward_task(model, x1, x2)
    _, g = loss(task, out, tgt)
    analytic = backward_task(model, out, g)
    numeric = np.zeros_like(base)
    for k in range(base.size):
        p = base.copy()
        p[k] += 1e-6
        hi = f(p)
        p[k] -= 2e-6
        numeric[k] = (hi - f(p)) / 2e-6
    model.set_params(base)
    err = np.max(np.abs(analytic - numeric)) / np.max(np.abs(numeric))
    assert err <= 1e-4


def test_refresh_identities_on_reference_features():
    d = gen_correlated_gaussian(600, 4, (0.9, 0.5), seed=1)
    model = build_ccdnn("reconstruct", d.dims, latent=(3, 3), enc_hidden=(8,), head_hidden=(8,), n_blocks=2)
    before = model.parameter_count
    policy = RefreshPolicy(reg=1e-3)
    refresh_constraint(model, d, policy)
    assert model.parameter_count == before
    h1, h2 = d.x1, d.x2
    for blk in model.blocks:
        z1, _ = forward(blk.enc1, h1)
        z2, _ = forward(blk.enc2, h2)
        c = blk.cca
        ridge = policy.ridge(z1, z2)
        s = np.cov(np.vstack([z1, z2]))
        su = s[:3, :3] + ridge * np.eye(3)
        sv = s[3:, 3:] + ridge * np.eye(3)
        suv = s[:3, 3:]
        assert np.max(np.abs(c.j.T @ su @ c.j - np.eye(3))) <= 1e-5
        assert np.max(np.abs(c.el.T @ sv @ c.el - np.eye(3))) <= 1e-5
        assert np.max(np.abs(c.j.T @ suv @ c.el - c.sigma)) <= 1e-5
        assert max(identity_residuals(c).values()) <= 1e-5
        c1 = z1 - c.mean_u[:, None]
        c2 = z2 - c.mean_v[:, None]
        r1, r2 = apply_filter(c1, c2, blk.filter)
        h1, h2 = np.vstack([r1, h1]), np.vstack([r2, h2])


def test_refresh_on_identical_views():
    x = np.random.default_rng(2).normal(size=(4, 500))
    data = TwoViewDataset(x, x.copy())
    model = build_ccdnn("reconstruct", (4, 4), latent=(3, 3), enc_hidden=(6,), n_blocks=2)
    for blk in model.blocks:
        blk.enc2.set_params(blk.enc1.get_params())
    refresh_constraint(model, data, RefreshPolicy(reg=1e-6))
    for blk in model.blocks:
        assert blk.cca.rho.min() >= 1 - 1e-4


def test_refresh_rejects_empty_data():
    model = tiny_model("classify")
    empty = TwoViewDataset(np.zeros((5, 0)), np.zeros((4, 0)))
    with pytest.raises(InvalidInputError):
        refresh_constraint(model, empty, RefreshPolicy())


def test_constraint_adds_no_parameters():
    counts = {
        (f, c): build_ccdnn("classify", (6, 5), out_dim=3, use_filter=f, constrained=c).parameter_count
        for f in (True, False) for c in (True, False)
    }
    assert len(set(counts.values())) == 1


def test_identity_reconstruction_pipeline():
    model = build_ccdnn("reconstruct", (3, 3), latent=(3, 3), enc_hidden=(), head_hidden=())
    for net in (model.blocks[0].enc1, model.blocks[0].enc2, model.heads["dec1"], model.heads["dec2"]):
        net.layers[0].w[...] = np.eye(3)
        net.layers[0].b[...] = 0.0
    x1, x2 = np.random.default_rng(3).normal(size=(2, 3, 7))
    out = forward_task(model, x1, x2)
    np.testing.assert_array_equal(out.x1_hat, x1)
    np.testing.assert_array_equal(out.x2_hat, x2)
    assert loss("reconstruct", out, (x1, x2))[0] == 0.0


def test_softmax_head_columns_sum_to_one():
    model = tiny_model("classify")
    x1, x2 = np.random.default_rng(4).normal(size=(5, 9)) * 30, np.random.default_rng(5).normal(size=(4, 9))
    out = forward_task(model, x1, x2)
    np.testing.assert_allclose(out.probs.sum(axis=0), 1.0, rtol=0, atol=1e-15)


def test_two_block_shape_law():
    model = build_ccdnn("classify", (7, 5), latent=(4, 4), out_dim=3, n_blocks=2)
    assert model.blocks[1].in_dims == (4 + 7, 4 + 5)
    out = forward_task(model, np.zeros((7, 2)), np.zeros((5, 2)))
    assert out.logits.shape == (3, 2)


def test_residual_rule_enforced():
    a = build_ccdnn("classify", (7, 5), latent=(4, 4), out_dim=3, n_blocks=2)
    with pytest.raises(InvalidInputError):
        type(a)("classify", [a.blocks[1], a.blocks[0]], a.heads)


def test_forward_shape_errors():
    model = tiny_model("regress")
    with pytest.raises(InvalidInputError, match=r"\(5, 4\)"):
        forward_task(model, np.zeros((4, 3)), np.zeros((4, 3)))
    with pytest.raises(InvalidInputError):
        forward_task(model, np.zeros((5, 3)), np.zeros((4, 2)))


def test_regression_loss_hand_case():
    model = build_ccdnn("regress", (2, 2), out_dim=1)
    out = forward_task(model, np.zeros((2, 4)), np.zeros((2, 4)))
    assert loss("regress", out, out.y_hat + 1.0)[0] == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(InvalidInputError):
        loss("regress", out, np.zeros((2, 4)))


def test_regression_identity_head_on_zero_input_gives_bias():
    model = build_ccdnn("regress", (2, 2), latent=(2, 2), enc_hidden=(), head_hidden=(), out_dim=2)
    for blk_net in (model.blocks[0].enc1, model.blocks[0].enc2):
        blk_net.layers[0].b[...] = 0.0
    model.heads["dense"].layers[0].b[...] = [0.25, -3.0]
    np.testing.assert_array_equal(predict(model, np.zeros((2, 3)), np.zeros((2, 3))),
                                  np.tile([[0.25], [-3.0]], (1, 3)))


def test_predict_tie_break_lowest_index():
    model = build_ccdnn("classify", (2, 2), out_dim=4)
    model.heads["dense"].layers[-1].w[...] = 0.0
    model.heads["dense"].layers[-1].b[...] = 0.0
    np.testing.assert_array_equal(predict(model, np.ones((2, 5)), np.ones((2, 5))), 0)


def test_without_filter_uses_pass_through():
    data = tiny_data("classify")
    a = tiny_model("classify", use_filter=True)
    b = tiny_model("classify", use_filter=False)
    refresh_constraint(a, data, RefreshPolicy())
    refresh_constraint(b, data, RefreshPolicy())
    assert b.label == "CCDNN_wRF" and a.label == "CCDNN"
    # with sigma zeroed, the filtered model computes the ablation exactly
    blk = a.blocks[0]
    blk.filter = replace(blk.filter, sigma=np.zeros_like(blk.filter.sigma))
    np.testing.assert_array_equal(forward_task(a, data.x1, data.x2).logits,
                                  forward_task(b, data.x1, data.x2).logits)


def test_align_signs_keeps_identities():
    d = gen_correlated_gaussian(500, 3, (0.8, 0.4), seed=6)
    old = fit_cca(d.x1, d.x2)
    flipped = fit_cca(d.x1, d.x2)
    flipped.j[:, 0] *= -1
    flipped.el[:, 0] *= -1
    fixed = align_signs(flipped, old, flipped.cov_u, flipped.cov_v)
    np.testing.assert_array_equal(fixed.j, old.j)
    np.testing.assert_array_equal(fixed.el, old.el)
    assert max(identity_residuals(fixed).values()) <= 1e-6


def test_refresh_policy_validation():
    with pytest.raises(InvalidInputError):
        RefreshPolicy(mode="never")
    with pytest.raises(InvalidInputError):
        RefreshPolicy(k=0)
    with pytest.raises(InvalidInputError):
        RefreshPolicy(reg=-1.0)
    assert RefreshPolicy(reg=0.5, relative_reg=False).ridge(None, None) == 0.5


def test_epochs_zero_is_a_no_op():
    data = tiny_data("classify")
    model = tiny_model("classify")
    before = model.get_params()
    report = train(model, data, TrainConfig(epochs=0))
    assert report.epochs == []
    np.testing.assert_array_equal(model.get_params(), before)


@pytest.mark.parametrize("task", ["reconstruct", "classify", "regress"])
def test_seed_determinism(task):
    data = tiny_data(task, n=120)
    cfg = TrainConfig(epochs=3, batch_size=16, learning_rate=1e-2, seed=4, momentum=0.9)
    runs = []
    for _ in range(2):
        model = tiny_model(task, n_blocks=2)
        report = train(model, data, cfg, RefreshPolicy(reference_sample_size=64))
        runs.append((report.to_dict(timings=False), model.get_params()))
    assert runs[0][0] == runs[1][0]
    np.testing.assert_array_equal(runs[0][1], runs[1][1])


def test_per_k_batches_refresh():
    data = tiny_data("regress", n=64)
    model = tiny_model("regress")
    report = train(model, data, TrainConfig(epochs=2, batch_size=8, learning_rate=1e-2),
                   RefreshPolicy(mode="per_k_batches", k=3))
    assert len(report.epochs) == 2 and model.blocks[0].cca.kappa > 0


def test_divergence_raises_with_partial_report():
    data = tiny_data("regress", n=64)
    model = tiny_model("regress")
    model.heads["dense"].layers[-1].w[...] *= 1e3
    with pytest.raises(TrainingDivergedError) as info, np.errstate(over="ignore", invalid="ignore"):
        train(model, data, TrainConfig(epochs=50, batch_size=8, learning_rate=10.0))
    assert info.value.epoch >= 1
    assert info.value.report is not None
    assert len(info.value.report.epochs) == info.value.epoch - 1


def test_pinned_classification_run():
    d = gen_classification(2000, 5, (16, 16), seed=7)
    model = build_ccdnn("classify", d.dims, out_dim=5, seed=7)
    cfg = TrainConfig(epochs=100, batch_size=256, learning_rate=1e-3, seed=7, momentum=0.9)
    report = train(model, d, cfg)
    assert report.losses[-1] < report.losses[0]
    acc = report.final["metrics"]["accuracy"]
    assert acc >= 0.90
    assert acc == 0.9285714285714286
    tr = d.train()
    assert np.mean(predict(model, tr.x1, tr.x2) == tr.labels) == acc
    assert evaluate(model, d.test())["accuracy"] == pytest.approx(0.9266666666666666, abs=1e-12)


def test_dcca_objective_rises_during_training():
    for seed in range(5):
        d = gen_correlated_gaussian(1000, 4, (0.9, 0.6), seed=seed)
        rng = np.random.default_rng(seed)
        enc1 = Network.create([4, 8, 2], ["tanh", "identity"], rng)
        enc2 = Network.create([4, 8, 2], ["tanh", "identity"], rng)
        cfg = TrainConfig(epochs=10, batch_size=100, learning_rate=1e-2, seed=seed, momentum=0.5)
        report = train_dcca_baseline(enc1, enc2, d, cfg, reg=1e-3)
        obj = [e["metrics"]["objective"] for e in report.epochs]
        assert len(obj) == 10
        assert sum(b < a for a, b in zip(obj, obj[1:])) <= 2
        assert obj[-1] > obj[0]


def test_dcca_identity_encoders_match_cca():
    d = gen_correlated_gaussian(800, 3, (0.8, 0.3), seed=8)
    enc1, enc2 = Network([3, 3], ["identity"]), Network([3, 3], ["identity"])
    enc1.layers[0].w[...] = np.eye(3)
    enc2.layers[0].w[...] = np.eye(3)
    h1, _ = forward(enc1, d.x1)
    h2, _ = forward(enc2, d.x2)
    assert dcca_objective(h1, h2, 1e-4) == pytest.approx(fit_cca(d.x1, d.x2, reg=1e-4).rho.sum(), abs=1e-6)


def test_dcca_baseline_width_check():
    d = gen_correlated_gaussian(100, 3, (0.5,), seed=0)
    rng = np.random.default_rng(0)
    with pytest.raises(InvalidInputError):
        train_dcca_baseline(Network.create([3, 2], ["identity"], rng),
                            Network.create([3, 3], ["identity"], rng), d, TrainConfig(epochs=1))
