"""Balanced partitions and the robust synchrony spaces they define."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import NetworkSpec, admissible_field, response_arity
from .polyalg import PolyField, monomial_basis

__all__ = [
    "Partition",
    "SynchronySubspace",
    "is_robust",
    "enumerate_robust",
    "invariance_oracle",
    "synchrony_basis",
    "all_partitions",
    "refinement_edges",
    "MAX_ENUM_CELLS",
]

MAX_ENUM_CELLS = 12


@dataclass(frozen=True)
class Partition:
    """Cell partition in restricted-growth form (classes numbered by first occurrence)."""

    class_of: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "class_of", _canonical(self.class_of))

    @classmethod
    def from_classes(cls, classes, N: int, one_based: bool = True) -> "Partition":
        """Build from a list of classes; cells missing from every class become singletons."""
        off = 1 if one_based else 0
        lab = list(range(N, 2 * N))
        for k, c in enumerate(classes):
            for p in c:
                lab[p - off] = k
        return cls(tuple(lab))

    @classmethod
    def full(cls, N: int) -> "Partition":
        return cls((0,) * N)

    @classmethod
    def discrete(cls, N: int) -> "Partition":
        return cls(tuple(range(N)))

    @property
    def N(self) -> int:
        return len(self.class_of)

    @property
    def r(self) -> int:
        return max(self.class_of) + 1

    def classes(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.r)]
        for p, c in enumerate(self.class_of):
            out[c].append(p)
        return out

    def same(self, i: int, j: int) -> bool:
        return self.class_of[i] == self.class_of[j]

    def refines(self, other: "Partition") -> bool:
        """True when every class of ``self`` sits inside a class of ``other``."""
        return all(other.same(c[0], p) for c in self.classes() for p in c)

    def meet(self, other: "Partition") -> "Partition":
        """Common refinement."""
        return Partition(tuple(zip(self.class_of, other.class_of)))

    def is_full(self) -> bool:
        return self.r == 1

    def is_discrete(self) -> bool:
        return self.r == self.N

    def label(self) -> str:
        """Human-readable equalities, e.g. ``x2=x3``; ``none`` for the discrete partition."""
        parts = ["=".join(f"x{p + 1}" for p in c) for c in self.classes() if len(c) > 1]
        return ", ".join(parts) if parts else "none"

    def __str__(self) -> str:
        return "{" + ", ".join("{" + ",".join(str(p + 1) for p in c) + "}" for c in self.classes()) + "}"


def _canonical(labels) -> tuple[int, ...]:
    seen: dict = {}
    return tuple(seen.setdefault(v, len(seen)) for v in labels)


@dataclass(frozen=True)
class SynchronySubspace:
    partition: Partition
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def is_robust(P: Partition, spec: NetworkSpec) -> bool:
    """Balance test: every input map sends equivalent cells to equivalent cells."""
    if P.N != spec.N:
        raise ValueError("partition size does not match the network")
    for m in spec.maps:
        for c in P.classes():
            first = P.class_of[m(c[0])]
            if any(P.class_of[m(p)] != first for p in c[1:]):
                return False
    return True


def all_partitions(N: int):
    """Every partition of ``N`` cells as a restricted-growth string."""
    if N == 0:
        yield ()
        return

    def rec(prefix, nclasses):
        if len(prefix) == N:
            yield tuple(prefix)
            return
        for v in range(nclasses + 1):
            yield from rec(prefix + [v], max(nclasses, v + 1))

    yield from rec([0], 1)


def enumerate_robust(spec: NetworkSpec) -> list[Partition]:
    """All balanced partitions, coarsest first, ties broken lexicographically."""
    if spec.N > MAX_ENUM_CELLS:
        raise ValueError(f"N={spec.N} too large for exhaustive enumeration (limit {MAX_ENUM_CELLS})")
    found = [P for P in map(Partition, all_partitions(spec.N)) if is_robust(P, spec)]
    return sorted(found, key=lambda P: (P.r, P.class_of))


def refinement_edges(parts: list[Partition]) -> list[tuple[int, int]]:
    """Hasse diagram of the refinement order: ``(i, j)`` with ``parts[j]`` covering ``parts[i]``."""
    n = len(parts)
    below = {(i, j) for i in range(n) for j in range(n)
             if i != j and parts[i].refines(parts[j]) and parts[i] != parts[j]}
    return sorted((i, j) for (i, j) in below
                  if not any((i, k) in below and (k, j) in below for k in range(n)))


def random_response(arity: int, degree: int, rng: np.random.Generator, cell_dim: int = 1,
                    low: float = 0.2, high: float = 2.0) -> PolyField:
    """Dense random polynomial with coefficients in ``±[low, high]``."""
    basis = monomial_basis(arity, degree)
    mag = rng.uniform(low, high, size=(basis.size, cell_dim))
    sign = rng.choice([-1.0, 1.0], size=(basis.size, cell_dim))
    return PolyField.from_dense(basis, mag * sign)


def invariance_oracle(P: Partition, spec: NetworkSpec, trials: int = 50, seed: int = 0,
                      rtol: float = 1e-10) -> bool:
    """Randomized check that ``Δ_P`` is invariant under sampled admissible fields."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    d = spec.cell_dim
    S = synchrony_basis(P, d).basis
    proj = S @ S.T
    for _ in range(trials):
        f = random_response(response_arity(spec), 3, rng, d)
        F = admissible_field(spec, f)
        x = S @ rng.uniform(-1, 1, S.shape[1])
        lam = rng.uniform(-1, 1)
        y = F(np.append(x, lam))
        if np.linalg.norm(y - proj @ y) > rtol * (1.0 + np.linalg.norm(y)):
            return False
    return True


def synchrony_basis(P: Partition, cell_dim: int = 1) -> SynchronySubspace:
    """Orthonormal basis of ``Δ_P`` (one column per class and cell component)."""
    B = np.zeros((P.N, P.r))
    for p, c in enumerate(P.class_of):
        B[p, c] = 1.0
    B /= np.linalg.norm(B, axis=0)
    return SynchronySubspace(P, np.kron(B, np.eye(cell_dim)))
