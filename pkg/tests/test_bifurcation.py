import numpy as np
import pytest

from cellnet.bifurcation import (
    c_regime,
    default_lambda_grid,
    find_branches,
    fit_exponent,
    newton_solve,
    predictions,
    sign_pattern,
)

from conftest import cached_analysis


def test_grid_is_symmetric_and_logarithmic():
    g = default_lambda_grid(1e-4, 1e-2, 5)
    assert len(g) == 10
    assert np.allclose(np.sort(g[g > 0]), np.sort(-g[g < 0]))
    pos = np.sort(g[g > 0])
    assert np.allclose(np.diff(np.log(pos)), np.log(10) / 2)


def test_fit_recovers_power_law_with_correction():
    lam = np.geomspace(1e-4, 1e-2, 20)
    e, c, rms = fit_exponent(lam, 2.0 * np.sqrt(lam) * (1 + 0.3 * lam))
    assert e == pytest.approx(0.5, abs=1e-4)
    assert c == pytest.approx(2.0, rel=1e-6)
    assert rms < 1e-6


def test_fit_handles_negative_side_and_zero_coordinate():
    lam = -np.geomspace(1e-4, 1e-2, 10)
    assert fit_exponent(lam, 3 * lam ** 2)[0] == pytest.approx(2.0, abs=1e-6)
    assert fit_exponent(lam, np.zeros(10))[0] == np.inf


def test_fit_rejects_short_or_mixed_data():
    with pytest.raises(ValueError, match="too few"):
        fit_exponent(np.arange(1, 8) * 1e-3, np.ones(7))
    v = np.ones(10)
    v[3] = 0.0
    with pytest.raises(ValueError):
        fit_exponent(np.geomspace(1e-4, 1e-2, 10), v)


def test_sign_pattern():
    assert sign_pattern(np.array([-1.0, 2.0, 0.0])) == "+0-"
    assert sign_pattern(np.array([-1 + 1j, -1 - 1j])) == "--"


def test_regimes():
    assert c_regime(1.0, -2.0) == "partial"
    assert c_regime(1.0, 1.0) == "none"
    assert c_regime(1.0, -0.5) == "neither"


def test_predictions_three_element_frame():
    p = predictions({"network": "B", "C": 2.0, "a1": 1.0, "a2": 1.0, "a3": -1.0})
    assert p["partial"]["X1"] == 1.0
    assert p["none"]["X2"] == 0.5
    assert p["none"]["X1_coeff"] == pytest.approx(1.0)
    assert p["none"]["side"] == "neg"


def test_predictions_five_element_frame():
    p = predictions({"network": "C", "C": 1.0, "a1": 1.0, "a2": 2.0, "a3": 0.3, "a4": -1.0})
    assert p["partial"]["X1"] == pytest.approx(1 / 3)
    assert p["none"]["X1"] == pytest.approx(0.5)
    assert p["none"]["X2_coeff"] == pytest.approx(-0.25)
    assert p["regime"] == "none"


def test_branches_of_a_reduced_field():
    an = cached_analysis("B", 0)
    kinds = sorted({b.kind for b in an.branches})
    assert kinds == ["full", "none", "partial"]
    full = next(b for b in an.branches if b.kind == "full")
    assert np.abs(full.points).max() <= 1e-12          # full sync sits at the origin of the frame
    for b in an.branches:
        assert np.abs(an.restricted(b.points, b.lambdas)).max() <= 1e-10


def test_threaded_sweep_matches_serial():
    an = cached_analysis("B", 0)
    grid = default_lambda_grid(1e-4, 1e-2, 10)
    a, _ = find_branches(an.restricted, grid)
    b, _ = find_branches(an.restricted, grid, jobs=3)
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert np.array_equal(x.points, y.points)


def test_newton_returns_roots():
    an = cached_analysis("B", 0)
    starts = np.random.default_rng(0).uniform(-0.1, 0.1, (20, 2))
    X = newton_solve(an.restricted, 5e-3, starts)
    assert len(X) > 0
    assert np.abs(an.restricted(X, 5e-3)).max() <= 1e-10
