import math

import numpy as np
import pytest

import deltashell as ds


def test_version():
    assert ds.__version__ == "0.1.0"


def test_first_pole_is_a_zero_and_certified():
    poles = ds.find_poles(3.6, 3)
    assert [p["index"] for p in poles] == [1, 2, 3]
    k = poles[0]["momentum"]
    d = k + 3.6 * np.exp(1j * k) * np.sin(k)
    assert abs(d) < 1e-10
    assert all(p["certified"] for p in poles)
    assert poles[0]["q_value"] == pytest.approx(-(k * k).real / (2 * (k * k).imag))


def test_tau0():
    assert ds.characteristic_time(8.0) == pytest.approx(64.0 / (2 * math.pi**3))


def test_survival_identity_and_start():
    tau0 = ds.characteristic_time(3.6)
    t = np.array([0.0, 0.1, 1.0, 10.0]) * tau0
    s = ds.survival_series(3.6, t)
    assert s["p_total"][0] == 1.0
    total = s["p_bg"][1:] + s["p_poles"][1:] + s["p_interf"][1:]
    assert np.max(np.abs(total - s["p_total"][1:])) < 1e-10
    assert np.all(np.diff(s["p_total"]) < 0)


def test_contour_matches_direct():
    tau0 = ds.characteristic_time(8.0)
    x = [0.25, 0.5, 0.75]
    a = np.array(ds.wavefunction(8.0, x, 0.4 * tau0, method="contour"))
    b = np.array(ds.wavefunction(8.0, x, 0.4 * tau0, method="direct"))
    assert np.max(np.abs(a - b)) / np.max(np.abs(b)) < 1e-4


def test_fits_on_exact_data():
    t = np.logspace(0, 2, 60)
    e = ds.fit_exponential(t, 0.8 * np.exp(-t / 7.0))
    assert e["parameter"] == pytest.approx(7.0, rel=1e-9)
    p = ds.fit_powerlaw(t, 2.0 * t**-3.0)
    assert p["parameter"] == pytest.approx(3.0, rel=1e-9)


def test_weight_table_shape():
    cells = ds.weight_table()
    assert len(cells) == 20
    diag = [c["value"] for c in cells if c["state"] == c["pole"]]
    assert diag == sorted(diag)


def test_scale_mapping_is_linear_in_tau_exp():
    v = ds.scale_mapping(3.6, 3.55, 3.9)
    assert ds.scale_mapping(3.6, 3.55, 7.8) == pytest.approx(2 * v, rel=1e-14)


def test_errors_are_typed():
    with pytest.raises(ds.DomainError):
        ds.find_poles(-1.0, 2)
    with pytest.raises(ds.DataError):
        ds.lambda_scan([0.0, 1.0, 2.0], [1.0, 0.9, 0.8], [3.6])


def test_scan_recovers_clean_lambda():
    t = np.concatenate([[0.0], np.logspace(np.log10(0.04), np.log10(400.0), 120)])
    i = ds.synthetic_experiment(3.6, t, 3.9)
    r = ds.lambda_scan(t, i, [3.2, 3.6, 4.0])
    assert r["best_lambda"] == 3.6
