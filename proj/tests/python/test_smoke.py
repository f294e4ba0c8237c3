import numpy as np
import pytest

import moe


def rank_r_tensor(dims, rank, seed):
    rng = np.random.default_rng(seed)
    return moe.cp_construct([rng.standard_normal((m, rank)) for m in dims])


def test_unfold_fold_round_trip():
    t = np.arange(24, dtype=float).reshape(2, 3, 4)
    m = moe.unfold(t, 1)
    assert m.shape == (3, 8)
    np.testing.assert_array_equal(moe.fold(m, 1, [2, 3, 4]), t)


def test_mode_product_matches_numpy():
    rng = np.random.default_rng(1)
    t = rng.standard_normal((3, 4, 5))
    u = rng.standard_normal((2, 4))
    np.testing.assert_allclose(moe.mode_product(t, u, 1), np.einsum("ij,ajc->aic", u, t), atol=1e-12)


def test_global_eigenvalues_match_numpy_svd():
    rng = np.random.default_rng(2)
    t = rng.standard_normal((4, 5, 6))
    values, logs = moe.global_eigenvalues(t)
    t = t / np.linalg.norm(t)
    want = np.ones(4)
    for d in range(3):
        s = np.linalg.svd(np.moveaxis(t, d, 0).reshape(t.shape[d], -1), compute_uv=False)
        want *= s[:4] ** 2
    np.testing.assert_allclose(values, want, rtol=1e-9)
    np.testing.assert_allclose(logs, np.log(want), rtol=1e-9)


def test_estimators_recover_planted_rank():
    scenario = {"dims": [20, 24, 28], "rank": 4, "snr_db": 40, "seed": 8}
    x = moe.plant(scenario)["noisy"]
    assert x.shape == (20, 24, 28)
    for method in ["large", "large-pf", "aic", "mdl", "nd-aic", "nd-mdl"]:
        assert moe.estimate(x, method)["rank"] == 4, method
    trace = moe.estimate(x)["trace"]
    assert trace["i"][0] == 18 and trace["i"][-1] == 1


def test_cp_als_fits_exact_tensor():
    t = rank_r_tensor((6, 7, 8), 3, 3)
    r = moe.cp_als(t, 3, tol=1e-12)
    assert r["relative_fit"] < 1e-6
    assert len(r["factors"]) == 3 and r["factors"][0].shape == (6, 3)
    assert r["loadings"] == sorted(r["loadings"], reverse=True)


def test_tnsr_round_trip(tmp_path):
    t = rank_r_tensor((2, 3, 4), 2, 4)
    moe.write_tnsr(tmp_path / "t.tnsr", t)
    np.testing.assert_array_equal(moe.read_tnsr(tmp_path / "t.tnsr"), t)


def test_errors_map_to_python_exceptions(tmp_path):
    (tmp_path / "bad.tnsr").write_bytes(b"NOPE")
    with pytest.raises(moe.FormatError):
        moe.read_tnsr(tmp_path / "bad.tnsr")
    with pytest.raises(moe.ConfigError):
        moe.estimate(np.ones((5, 5, 5)), "music")
    with pytest.raises(moe.InfeasibleError):
        moe.cp_als(np.ones((2, 2, 2)), 9)
    with pytest.raises(ValueError):
        moe.plant({"dims": [5, 5, 5], "rank": 9})


def test_monte_carlo_reports():
    scenario = {"dims": [10, 11, 12], "rank": 2, "snr_db": 5, "seed": 3, "trials": 4}
    cal = moe.calibrate_threshold(scenario, [0.4, 0.8])
    assert cal["trials"] == 4
    assert len(cal["rows"]) == 2 * 2
    pod = moe.pod_vs_snr(scenario, [-5, 5], threads=2)
    assert len(pod["rows"]) == 2 * 2
