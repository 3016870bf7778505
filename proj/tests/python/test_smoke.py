import json
import os
import subprocess

import numpy as np
import pytest

import crsir


def single_index(seed, rows=400, cols=6):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((rows, cols))
    y = x[:, 0] + 0.5 * x[:, 1] + 0.2 * (x[:, 0] + 0.5 * x[:, 1]) ** 3 + 0.3 * rng.standard_normal(rows)
    return x, y


def test_standardize_and_correlation():
    x, _ = single_index(1)
    z, mean, sd = crsir.standardize(x)
    assert np.allclose(z.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(z.std(axis=0, ddof=1), 1.0)
    assert np.allclose(mean, x.mean(axis=0))
    assert np.allclose(crsir.correlation(x), np.corrcoef(x, rowvar=False))


def test_regularize_endpoints():
    x, _ = single_index(2)
    s = np.cov(x, rowvar=False)
    assert np.allclose(crsir.regularize_covariance(s, 0.0), s)
    full = crsir.regularize_covariance(s, 1.0)
    assert np.allclose(full, np.trace(s) / s.shape[0] * np.eye(s.shape[0]))
    with pytest.raises(crsir.DomainError):
        crsir.regularize_covariance(s, 1.5)


def test_clustering_recovers_blocks():
    rng = np.random.default_rng(3)
    f = rng.standard_normal((300, 2))
    x = np.column_stack([f[:, j // 3] + 0.3 * rng.standard_normal(300) for j in range(6)])
    a = crsir.cluster_variables(x, 2)
    assert a.cluster_count == 2
    assert a.labels[:3] == [a.labels[0]] * 3
    assert a.labels[3:] == [a.labels[3]] * 3
    assert a.labels[0] != a.labels[3]


def test_sir_finds_single_index():
    x, y = single_index(4, rows=800)
    basis = crsir.sir_fit(x, y, slices=10)
    assert basis.k == 1
    b = basis.directions[:, 0]
    truth = np.array([1.0, 0.5, 0, 0, 0, 0])
    cosine = abs(b @ truth) / (np.linalg.norm(b) * np.linalg.norm(truth))
    assert cosine > 0.95


def test_crsir_fit_predict_roundtrip(tmp_path):
    x, y = single_index(5)
    model = crsir.crsir_fit(x, y, clusters=2, tau=0.3, names=[f"v{j}" for j in range(6)])
    pred = model.predict(x)
    assert pred.shape == (400,)
    assert np.corrcoef(pred, y)[0, 1] > 0.8
    assert model.transform(x).shape == (400, model.variate_count)
    path = tmp_path / "model.json"
    model.save(path)
    loaded = crsir.CrsirModel.load(path)
    assert np.array_equal(loaded.predict(x), pred)
    assert loaded.column_names == model.column_names
    with pytest.raises(crsir.DimensionMismatch):
        model.predict(x[:, :5])


def test_baselines_and_simulation():
    y = [0.5**t for t in range(60)]
    value, fallback = crsir.ar4_forecast(y, 1)
    assert value == pytest.approx(0.5 * y[-1], rel=1e-6, abs=1e-12)
    data = crsir.simulate_design(observations=100, runs=2, seed=7)
    assert len(data) == 2
    x, yy = data[0]
    assert x.shape == (100, 10) and len(yy) == 100
    value, _ = crsir.dfm5_forecast(x, yy, 1)
    assert np.isfinite(value)


def test_evaluate_panel_report():
    rng = np.random.default_rng(8)
    f = np.zeros(200)
    for t in range(1, 200):
        f[t] = 0.8 * f[t - 1] + rng.standard_normal()
    x = np.column_stack([f + 0.5 * rng.standard_normal(200) for _ in range(6)])
    names = [f"s{j}" for j in range(6)]
    cfg = {"horizons": [1], "window_length": 60, "eval_start": 185, "forecast_targets": ["s0"],
           "cv_grid": {"c": [1, 2], "tau": [0.5]}}
    csv, md = crsir.evaluate_panel(x, names, json.dumps(cfg))
    assert csv.startswith("series,h,method")
    assert "| Method | 0.050 | 0.250 | 0.500 | 0.750 | 0.950 |" in md


@pytest.mark.skipif(not os.environ.get("CRSIR_CLI"), reason="CLI path not provided")
def test_cli_simulate_and_usage(tmp_path):
    cli = os.environ["CRSIR_CLI"]
    out = subprocess.run([cli, "simulate", "--runs", "3", "-T", "120"], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert "CRSIR" in out.stdout
    bad = subprocess.run([cli, "fit", "--data", str(tmp_path / "missing.csv"), "--target", "y"],
                         capture_output=True, text=True)
    assert bad.returncode == 2
    usage = subprocess.run([cli, "no-such-command"], capture_output=True, text=True)
    assert usage.returncode == 1
