import numpy as np
import pytest

from cellnet.draws import draw_response, slope_sum
from cellnet.errors import DegenerateDrawError
from cellnet.pipeline import (
    DEFAULT_MARGIN,
    DEFAULT_SCALE_MARGIN,
    analyze,
    conditioning_margin,
    network_rows,
)

from conftest import cached_analysis


def test_draws_are_reproducible(monoids):
    M = monoids["C"]
    assert draw_response(M, 11) == draw_response(M, 11)
    assert draw_response(M, 11) != draw_response(M, 12)


def test_draw_shape(monoids):
    for M in monoids.values():
        f = draw_response(M, 4)
        assert f.n_in == M.size + 1
        assert f.constant_part()[0] == 0.0
        assert f.linear_part()[0, 0] == 0.0
        assert slope_sum(f, M.size) <= -0.3


def test_draw_gives_up_when_impossible(monoids):
    with pytest.raises(DegenerateDrawError):
        draw_response(monoids["A"], 0, min_gap=100.0, max_tries=5)


def test_network_rows(monoids):
    assert network_rows(monoids["B"]) == [0, 1, 3]
    with pytest.raises(ValueError, match="does not see"):
        network_rows(monoids["B"], p=2)


@pytest.mark.parametrize("name", "BC")
def test_accepted_draw_meets_margins(name):
    an = cached_analysis(name, 1)
    assert an.coeffs["margin"] >= DEFAULT_MARGIN
    assert an.coeffs["scale_margin"] >= DEFAULT_SCALE_MARGIN
    assert an.coeffs["margin"] == conditioning_margin(an.coeffs)


def test_higher_order_refines_the_same_draw():
    a = analyze("B", 3, order=3, branches=False)
    b = analyze("B", 3, order=4, branches=False)
    assert a.f == b.f
    for k in ("C", "a1", "a2", "a3"):
        assert a.coeffs[k] == pytest.approx(b.coeffs[k], rel=1e-9)


def test_lifted_states_are_network_equilibria():
    an = cached_analysis("C", 0)
    from cellnet.network import admissible_field
    gam = admissible_field(an.spec, an.f)
    for b in an.branches:
        lam = b.lambdas[0]
        x = b.states[0]
        assert np.abs(gam(np.append(x, lam))).max() <= 1e-4 * abs(lam)


def test_explicit_response_is_used_as_given(monoids):
    f = draw_response(monoids["A"], 9)
    an = analyze("A", None, f=f, branches=False)
    assert an.f is f and an.draw_attempts == 1
