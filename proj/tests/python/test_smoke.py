import numpy as np
import pytest

import predcomb


def test_center_normalize_round_trip():
    v = np.array([3.0, 1.0, 4.0, 1.0, 5.0])
    p, mean, std = predcomb.center_normalize(v)
    assert abs(p.sum()) < 1e-12
    assert abs(np.linalg.norm(p) - 1.0) < 1e-12
    np.testing.assert_allclose(predcomb.inverse_normalize(p, mean, std), v, atol=1e-12)


def test_constant_vector_rejected():
    with pytest.raises(predcomb.NumericalError):
        predcomb.center_normalize(np.ones(4))


def test_kendall_hand_count():
    assert predcomb.kendall_x100(np.array([1.0, 2, 3]), np.array([1.0, 3, 2])) == pytest.approx(100 / 3)


def test_predictability_bounds():
    rng = np.random.default_rng(0)
    g = rng.normal(size=(30, 3))
    f = rng.normal(size=30)
    assert 0.0 <= predcomb.linear_predictability(f, g) <= 1.0
    assert 0.0 <= predcomb.nonlinear_predictability(f, g, sigma_sq=0.1) <= 1.0
    assert predcomb.linear_predictability(g[:, 0] * 2 + 1, g) == pytest.approx(1.0, abs=1e-8)


def test_toy_denoise_recovers_ordering():
    d = predcomb.gen_toy(n=100, noise=1.0, mode="difference", seed=3)
    gt = d["ground_truth"]
    out, _ = predcomb.denoise(d["target"], d["references"], algo="npc",
                              sigma_sq=0.1, sigma_k_sq=1.0, lambda_j=1.0)
    assert predcomb.kendall_x100(out, gt) > predcomb.kendall_x100(d["target"], gt)


def test_zero_iterations_is_identity():
    d = predcomb.gen_toy(n=40, seed=1)
    out, _ = predcomb.denoise(d["target"], d["references"], iters=0)
    np.testing.assert_allclose(out, d["target"], atol=1e-8)


def test_relevance_weights_sum_to_one():
    d = predcomb.gen_attribute_benchmark(n=120, informative=3, random=3, seed=2)
    sigma, w = predcomb.relevance_weights(d["target"], d["references"])
    assert w.shape == (6,)
    assert w.sum() == pytest.approx(1.0)
    assert w[:3].mean() > w[3:].mean()


def test_invalid_algorithm():
    d = predcomb.gen_toy(n=20, seed=0)
    with pytest.raises(predcomb.InvalidArgument):
        predcomb.denoise(d["target"], d["references"], algo="xyz")


def test_bench_single_seed():
    rows = predcomb.bench("toy2", seeds=1)
    assert len(rows) == 1
    assert {"baseline", "OPC", "LPC", "NPC"} <= set(rows[0])
    assert all(np.isfinite(v) for k, v in rows[0].items() if k != "seed")
