import numpy as np
import pytest

from cellnet.network import InputMap, NetworkSpec
from cellnet.synchrony import (
    Partition,
    all_partitions,
    enumerate_robust,
    invariance_oracle,
    is_robust,
    refinement_edges,
    synchrony_basis,
)


def test_partition_is_canonical():
    assert Partition((2, 0, 0)) == Partition((0, 1, 1))
    P = Partition.from_classes([[2, 3]], 3)
    assert P.class_of == (0, 1, 1)
    assert P.label() == "x2=x3"
    assert Partition.discrete(3).label() == "none"


def test_refinement_and_meet():
    full, mid, disc = Partition.full(3), Partition((0, 1, 1)), Partition.discrete(3)
    assert disc.refines(mid) and mid.refines(full)
    assert not full.refines(mid)
    assert mid.meet(Partition((0, 0, 1))) == disc


def test_bell_numbers():
    assert [sum(1 for _ in all_partitions(n)) for n in range(1, 7)] == [1, 2, 5, 15, 52, 203]


def test_robust_lattice_of_examples(specs):
    for spec in specs.values():
        parts = enumerate_robust(spec)
        assert [P.label() for P in parts] == ["x1=x2=x3", "x2=x3", "none"]
        assert refinement_edges(parts) == [(1, 0), (2, 1)]


def test_unbalanced_partition(specs):
    P = Partition((0, 0, 1))
    assert not is_robust(P, specs["A"])
    assert not invariance_oracle(P, specs["A"], trials=5)


def test_ring_network_has_no_partial_synchrony():
    ring = NetworkSpec(3, (InputMap.identity(3), InputMap((1, 2, 0), "s2")))
    labels = [P.label() for P in enumerate_robust(ring)]
    assert labels == ["x1=x2=x3", "none"]


def test_synchrony_basis_is_orthonormal():
    S = synchrony_basis(Partition((0, 1, 1, 0)), cell_dim=2).basis
    assert S.shape == (8, 4)
    assert np.allclose(S.T @ S, np.eye(4))


def test_oracle_rejects_zero_trials(specs):
    with pytest.raises(ValueError):
        invariance_oracle(Partition.full(3), specs["A"], trials=0)
