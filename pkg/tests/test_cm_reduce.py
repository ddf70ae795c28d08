import numpy as np
import pytest

from cellnet.cm_reduce import (
    EquilibriumError,
    augment,
    center_frame,
    left_zeros,
    linear_part_identities,
    psi_equivariance_residual,
    realize_response,
    reduce,
    restrict_to_synchrony,
    tangency_residual,
    verify_reduced,
)
from cellnet.draws import draw_response
from cellnet.polyalg import PolyField
from cellnet.simulate import rk4
from cellnet.synchrony import Partition

from conftest import cached_analysis


def test_left_zeros(monoids):
    assert left_zeros(monoids["A"]) == [2]
    assert left_zeros(monoids["B"]) == [2, 3]
    assert left_zeros(monoids["C"]) == [2, 3, 4]


@pytest.mark.parametrize("name, coords", [("A", ["X1", "X2"]), ("B", ["X1", "X2", "X3"]),
                                           ("C", ["X1", "X2", "X3", "X5"])])
def test_center_coordinates(monoids, name, coords):
    aug = augment(monoids[name], draw_response(monoids[name], 0))
    assert aug.coord_names == coords
    assert aug.frame["kind"] == "left_zero"


def test_sync_line_gets_single_coordinate(monoids):
    Wc = np.ones((3, 1)) * 2.0
    B, names, info = center_frame(Wc, monoids["A"])
    assert names == ["X"] and info["kind"] == "sync"
    assert np.allclose(B[:, 0], 1.0)


def test_nonzero_constant_is_rejected(monoids):
    f = draw_response(monoids["A"], 0) + PolyField.constant([0.1], 4, 3)
    with pytest.raises(EquilibriumError):
        augment(monoids["A"], f)


def test_arity_is_checked(monoids):
    with pytest.raises(ValueError, match="arity"):
        augment(monoids["B"], draw_response(monoids["A"], 0))


def test_jet_order_below_two_is_rejected(monoids):
    from cellnet.cm_reduce import solve_cm_jet
    aug = augment(monoids["A"], draw_response(monoids["A"], 0))
    with pytest.raises(ValueError):
        solve_cm_jet(aug, 1)


@pytest.mark.parametrize("name", "ABC")
def test_reduction_self_checks(monoids, name):
    aug, jet, red = reduce(monoids[name], draw_response(monoids[name], 3), order=4)
    assert max(tangency_residual(aug, jet).values()) <= 1e-9
    assert max(psi_equivariance_residual(aug, jet).values()) <= 1e-9
    assert max(linear_part_identities(aug, red).values()) <= 1e-12
    report = verify_reduced(red)
    assert report["ok"], report


def test_restriction_keeps_embedded_coordinates():
    an = cached_analysis("C", 0)
    assert an.restricted.coord_names == ["X1", "X2"]
    with pytest.raises(Exception):
        restrict_to_synchrony(an.reduced, Partition((0, 1, 0, 1, 0)))


def test_realize_rejects_low_degree(monoids):
    aug = augment(monoids["A"], draw_response(monoids["A"], 0))
    G = PolyField.linear(np.zeros((2, 3)), 3) + PolyField(3, 2, 3, {(1, 0, 0): [1.0, 0.0]})
    with pytest.raises(ValueError):
        realize_response(aug, G)


def test_wide_threshold_makes_everything_central(monoids):
    aug, jet, red = reduce(monoids["B"], draw_response(monoids["B"], 0), tol_re=100.0)
    assert (aug.c, aug.h) == (4, 0)
    assert red.info["frame"]["kind"] == "orthonormal"


@pytest.mark.parametrize("name", "BC")
def test_lifted_reduced_flow_tracks_network_flow(name):
    # trajectories on the manifold: lifted reduced flow vs the fundamental network flow
    an = cached_analysis(name, 0)
    aug, red = an.aug, an.reduced
    lam = 2e-3
    errs = []
    for r in (1e-2, 5e-3):
        xi0 = np.full(red.dim, r / np.sqrt(red.dim))
        x0 = red.lift(np.append(xi0, lam))[0]
        _, xs, _ = rk4(lambda x: aug.Gamma(np.append(x, lam)), x0, 1.0, 1e-3)
        _, ks, _ = rk4(lambda k: red(k, lam), xi0, 1.0, 1e-3)
        lifted = red.lift(np.column_stack([ks, np.full(len(ks), lam)]))
        errs.append(np.abs(lifted - xs).max())
    assert errs[0] <= 1e-6
    assert errs[0] / errs[1] >= 8.0          # error at least cubic in the radius
