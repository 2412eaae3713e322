import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

import psmcrb

ROOT = Path(__file__).resolve().parents[2]


def standard_geometry(truth=psmcrb.Hypothesis.H2):
    cfg = json.loads(psmcrb.standard_config_json(truth, 1000))
    H = np.array(cfg["H"], dtype=float)
    geo = psmcrb.Geometry(H)
    phi = H @ np.array(cfg["theta1"]) if truth == psmcrb.Hypothesis.H1 else np.array(cfg["theta2"])
    return geo, phi


def test_chi2_values():
    assert psmcrb.chi2_cdf(2, 2.0) == pytest.approx(1 - math.exp(-1), abs=1e-14)
    assert psmcrb.chi2_cdf(2, 3.0, 1.5) + psmcrb.chi2_survival(2, 3.0, 1.5) == pytest.approx(1, abs=1e-12)
    h = 1e-5
    fd = (psmcrb.chi2_cdf(3, 2.0, 1.0 + h) - psmcrb.chi2_cdf(3, 2.0, 1.0 - h)) / (2 * h)
    assert psmcrb.chi2_cdf_dlambda(3, 2.0, 1.0) == pytest.approx(fd, abs=1e-7)
    with pytest.raises(psmcrb.DomainError):
        psmcrb.chi2_cdf(2, -1.0)


def test_geometry_and_selection():
    geo, phi = standard_geometry()
    assert geo.r == 2
    assert np.allclose(geo.Pperp @ geo.H, 0, atol=1e-12)
    lam = psmcrb.noncentrality(phi, geo, 1.0)
    p1, p2 = psmcrb.selection_probs(lam, 1.0, geo.r)
    assert p1 + p2 == pytest.approx(1, abs=1e-11)
    with pytest.raises(psmcrb.DomainError):
        psmcrb.Geometry(np.ones((3, 2)))


def test_estimators_and_pseudo_true():
    geo, phi = standard_geometry()
    rng = np.random.default_rng(0)
    x = phi + rng.standard_normal(4) * 2
    g = 0.5
    assert psmcrb.glrt_select(x, geo, 1.0, g) in (1, 2)
    np.testing.assert_allclose(psmcrb.msl(x, 1, geo), geo.Hpinv @ x, atol=1e-12)
    a = psmcrb.msnl(x, 2, geo, 1.0, g)
    b = psmcrb.psml(x, 2, geo, 1.0, g)
    assert np.linalg.norm(geo.Pperp @ b) <= np.linalg.norm(geo.Pperp @ a) + 1e-12
    np.testing.assert_allclose(geo.PH @ a, geo.PH @ x, atol=1e-10)
    sel = psmcrb.pseudo_true(psmcrb.Interpretation.SELECTIVE, 2, phi, geo, 1.0, g)
    np.testing.assert_array_equal(sel, phi)
    mu2 = psmcrb.cond_mean(2, phi, geo, 1.0, g)
    np.testing.assert_array_equal(psmcrb.pseudo_true(psmcrb.Interpretation.NAIVE, 2, phi, geo, 1.0, g), mu2)


def test_bounds_dict():
    geo, phi = standard_geometry()
    rep = psmcrb.bounds(phi, psmcrb.Hypothesis.H2, geo, 1.0, 0.8)
    assert rep["oracle_crb_trace"] == 4.0
    for name in ("naive", "normalized", "selective"):
        e = rep["interpretations"][name]
        assert np.allclose(e["total"], e["total"].T)
        assert np.linalg.eigvalsh(e["total"]).min() >= -1e-8
        assert e["trace"] == pytest.approx(np.trace(e["total"]))
    np.testing.assert_allclose(psmcrb.mcrb_k(-np.eye(2), np.eye(2)), np.eye(2))


def test_sweep_is_deterministic():
    cfg = (ROOT / "configs" / "minimal.json").read_text()
    a = psmcrb.sweep_csv(cfg, trials=500, workers=1)
    b = psmcrb.sweep_csv(cfg, trials=500, workers=2)
    assert a == b
    rows = list(csv.DictReader(io.StringIO(a[0])))
    assert len(rows) == 1
    assert list(rows[0].keys()) == psmcrb.sweep_columns()
    assert int(rows[0]["trials"]) == 500


def test_config_errors_name_the_key():
    with pytest.raises(psmcrb.ConfigError, match="sigma2"):
        psmcrb.sweep_csv('{"H": [[1],[0]], "sigma2": -1, "hypothesis": "H2", "theta2": [1, 2], "gamma_grid": [1]}')


def test_selfcheck():
    results = psmcrb.selfcheck(trials=5000)
    assert len(results) >= 8
    assert all(r["pass"] for r in results), results
