# SPDX-License-Identifier: Apache-2.0
import json
import math

import numpy as np
import pytest

import cstdoa


def test_msequence_balance_and_autocorrelation():
    seq = cstdoa.msequence(7)
    assert seq.shape == (127,)
    assert int(seq.sum()) == 64
    s = 1.0 - 2.0 * seq
    corr = [float(np.dot(s, np.roll(s, k))) for k in range(127)]
    assert corr[0] == 127
    assert set(corr[1:]) == {-1.0}


def test_measure_matches_dense_matrix():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(255)
    phi = cstdoa.sensing_matrix(8, 16, base_shift=5)
    assert phi.shape == (16, 255)
    np.testing.assert_allclose(cstdoa.measure(x, 8, 16, base_shift=5), phi @ x, atol=1e-10)


def test_solver_recovers_sparse_vector():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((20, 64))
    a /= np.linalg.norm(a, axis=0)
    h = np.zeros(64)
    h[[4, 19, 50]] = [1.5, -1.2, 1.8]
    est = cstdoa.solve_l1(a, a @ h, mu_scale=1e3, max_iterations=50000, rel_tolerance=1e-12)
    assert est["converged"]
    assert set(np.flatnonzero(np.abs(est["h"]) > 1e-6)) == {4, 19, 50}
    np.testing.assert_allclose(est["h"][[4, 19, 50]], [1.5, -1.2, 1.8], rtol=1e-2)


def test_delay_and_jackknife():
    h = np.zeros(255)
    h[127 + 8] = 1.0
    assert cstdoa.delay_from_channel(h, 1 / 16000) == pytest.approx(500e-6)
    rep = cstdoa.aggregate_jackknife([1e-4] * 8, 8000.0)
    assert rep["accepted"] and math.isinf(rep["confidence"])
    rep = cstdoa.aggregate_jackknife([0.0, 1e-3, 2e-3, -5e-3], 8000.0)
    assert not rep["accepted"]


def test_xcorr_integer_delay():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(400)
    y = np.concatenate([np.zeros(6), x[:-6]])
    rep = cstdoa.tdoa_xcorr(x, y, 20 / 16000, 1 / 16000, refine=False)
    assert rep["delta_t"] == pytest.approx(6 / 16000)
    assert rep["confidence"] is None


def test_process_block_on_simulated_pair():
    cfg = json.loads(cstdoa.preset("desk-255"))
    cfg["scenario"]["duration"] = 0.2
    text = json.dumps(cfg)
    ref = cstdoa.simulate_block(text, 0, 3)
    sen = cstdoa.simulate_block(text, 1, 3)
    assert ref["extended"].shape == (255 + 2 * 128,)
    out = cstdoa.process_block(ref["extended"], sen["samples"], 16, max_abs_delay=1 / 343, seed=7)
    assert out["measurements"].shape == (16,)
    assert out["xcorr"] is not None
    assert abs(out["xcorr"]["delta_t"]) <= 1 / 343


def test_geometry():
    assert cstdoa.doa_from_tdoa(0.0, 1.0) == pytest.approx(math.pi / 2)
    theta = 1.1
    assert cstdoa.doa_from_tdoa(math.cos(theta) / 343, 1.0) == pytest.approx(theta, abs=1e-12)
    with pytest.raises(cstdoa.InadmissibleDelayError):
        cstdoa.doa_from_tdoa(0.01, 1.0)
    sensors = [(0, 0), (-1, 0), (1, 0)]
    # a quarter turn puts the source on the symmetry axis
    t = 0.25 * 2 * math.pi * 5 / 0.47
    assert cstdoa.circle_tdoa(sensors, 1, t) == pytest.approx(cstdoa.circle_tdoa(sensors, 2, t), abs=1e-15)
    assert cstdoa.circle_tdoa(sensors, 1, 0.0) > 0 > cstdoa.circle_tdoa(sensors, 2, 0.0)


def test_config_errors_name_the_field():
    with pytest.raises(cstdoa.ConfigError, match="sensing.rows"):
        cstdoa.normalize_config('{"preset": "desk-255", "sensing": {"rows": 300}}')
    assert set(cstdoa.preset_names()) == {"paper-fig5", "desk-255"}


def test_run_writes_files(tmp_path):
    cfg = json.loads(cstdoa.preset("desk-255"))
    cfg["scenario"]["duration"] = 0.1
    summary = cstdoa.run(json.dumps(cfg), out=str(tmp_path), workers=2)
    assert summary["blocks"] == 1600 // 255
    assert (tmp_path / "tdoa.csv").read_text().startswith("# cstdoa tdoa v1\n")
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["compression_ratio"] == pytest.approx(255 / 16)
