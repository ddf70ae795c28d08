"""Homogeneous coupled-cell networks, their input-map monoids and fundamental networks.

Cells are 0-based internally. Network files and anything printed for humans use
1-based cell indices, so conversions happen only at the I/O boundary.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from itertools import product

import numpy as np

from .errors import SpecParseError
from .polyalg import PolyField

__all__ = [
    "InputMap",
    "NetworkSpec",
    "Monoid",
    "NetworkFile",
    "parse_network_spec",
    "load_network_file",
    "builtin_network",
    "compose",
    "complete_monoid",
    "fundamental_network",
    "cell_projection",
    "injectivity_witness",
    "admissible_field",
    "response_arity",
]


@dataclass(frozen=True)
class InputMap:
    """A map of cells ``target[p] = sigma(p)``, stored 0-based."""

    target: tuple[int, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "target", tuple(int(t) for t in self.target))
        n = len(self.target)
        for t in self.target:
            if not 0 <= t < n:
                raise ValueError(f"cell index out of range: {t + 1} not in 1..{n}")

    @classmethod
    def from_one_based(cls, target, label: str = "") -> "InputMap":
        return cls(tuple(int(t) - 1 for t in target), label)

    @classmethod
    def identity(cls, n: int, label: str = "s1") -> "InputMap":
        return cls(tuple(range(n)), label)

    @property
    def n(self) -> int:
        return len(self.target)

    def one_based(self) -> list[int]:
        return [t + 1 for t in self.target]

    def is_identity(self) -> bool:
        return self.target == tuple(range(self.n))

    def __call__(self, p: int) -> int:
        return self.target[p]

    def __str__(self) -> str:
        return f"{self.label}={self.one_based()}"


def compose(outer: InputMap, inner: InputMap, label: str = "") -> InputMap:
    """``outer ∘ inner``, i.e. ``p -> outer(inner(p))``."""
    if outer.n != inner.n:
        raise ValueError(f"mismatched N: {outer.n} vs {inner.n}")
    return InputMap(tuple(outer.target[q] for q in inner.target), label)


@dataclass(frozen=True)
class NetworkSpec:
    """A homogeneous network: ``N`` cells, each reading its inputs through ``maps``."""

    N: int
    maps: tuple[InputMap, ...]
    cell_dim: int = 1
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        if self.N < 1:
            raise ValueError("a network needs at least one cell")
        if self.cell_dim < 1:
            raise ValueError("cell_dim must be positive")
        if not self.maps or not self.maps[0].is_identity():
            raise ValueError("maps[0] must be the identity")
        labels = [m.label for m in self.maps]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels: {labels}")
        for m in self.maps:
            if m.n != self.N:
                raise ValueError(f"map {m.label} has length {m.n}, expected {self.N}")

    @property
    def n_maps(self) -> int:
        return len(self.maps)

    @property
    def labels(self) -> list[str]:
        return [m.label for m in self.maps]

    @property
    def state_dim(self) -> int:
        return self.N * self.cell_dim

    def to_dict(self) -> dict:
        return {
            "cells": self.N,
            "cell_dim": self.cell_dim,
            "maps": [{"label": m.label, "target": m.one_based()} for m in self.maps],
        }


@dataclass(frozen=True)
class Monoid:
    """Composition-closed set of input maps with ``table[i][j] = index(σ_i ∘ σ_j)``."""

    elements: tuple[InputMap, ...]
    table: np.ndarray
    unit_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        T = np.asarray(self.table, dtype=np.int64)
        T.setflags(write=False)
        object.__setattr__(self, "table", T)

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def N(self) -> int:
        return self.elements[0].n

    @property
    def labels(self) -> list[str]:
        return [e.label for e in self.elements]

    def index(self, sigma: InputMap | str) -> int:
        if isinstance(sigma, str):
            try:
                return self.labels.index(sigma)
            except ValueError:
                raise KeyError(f"{sigma!r} is not a monoid element") from None
        for i, e in enumerate(self.elements):
            if e.target == sigma.target:
                return i
        raise KeyError(f"{sigma} is not a monoid element")

    def violations(self) -> list[str]:
        """Failures of closure, unit and associativity laws (empty when valid)."""
        n = self.size
        T = self.table
        out = []
        if T.shape != (n, n):
            return [f"table shape {T.shape} != ({n}, {n})"]
        if T.min() < 0 or T.max() >= n:
            out.append("table entry out of range")
            return out
        u = self.unit_index
        if not np.array_equal(T[u], np.arange(n)) or not np.array_equal(T[:, u], np.arange(n)):
            out.append("unit law fails")
        lhs = T[T, :]                 # lhs[i, j, k] = T[T[i, j], k]
        rhs = T[:, T]                 # rhs[i, j, k] = T[i, T[j, k]]
        bad = np.argwhere(lhs != rhs)
        if len(bad):
            out.append(f"associativity fails at {tuple(int(v) for v in bad[0])}")
        for i, j in product(range(n), repeat=2):
            if compose(self.elements[i], self.elements[j]).target != self.elements[T[i, j]].target:
                out.append(f"table[{i}][{j}] does not match composition")
                break
        return out

    def is_valid(self) -> bool:
        return not self.violations()


@dataclass(frozen=True)
class NetworkFile:
    spec: NetworkSpec
    response: PolyField | None = None


def _identity_label(labels: set[str]) -> str:
    for cand in ("s1", "id", "e"):
        if cand not in labels:
            return cand
    k = 0
    while f"id{k}" in labels:
        k += 1
    return f"id{k}"


def parse_network_spec(text: str, name: str = "") -> NetworkSpec:
    """Parse the JSON network format; the identity map is put first."""
    return load_network_file(text, name).spec


def load_network_file(text: str, name: str = "") -> NetworkFile:
    """Parse a network file, including the optional response polynomial."""
    try:
        data = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise SpecParseError(f"malformed file: {exc}") from exc
    if not isinstance(data, dict) or "cells" not in data:
        raise SpecParseError("malformed file: expected an object with a 'cells' field")
    N = data["cells"]
    if not isinstance(N, int) or isinstance(N, bool) or N < 1:
        raise SpecParseError("malformed file: 'cells' must be a positive integer")
    cell_dim = data.get("cell_dim", 1)
    if not isinstance(cell_dim, int) or cell_dim < 1:
        raise SpecParseError("malformed file: 'cell_dim' must be a positive integer")
    raw = data.get("maps", [])
    if not isinstance(raw, list):
        raise SpecParseError("malformed file: 'maps' must be a list")
    maps: list[InputMap] = []
    for k, m in enumerate(raw):
        if not isinstance(m, dict) or "target" not in m:
            raise SpecParseError(f"malformed file: map #{k + 1} needs a 'target'")
        target = m["target"]
        if not isinstance(target, list) or len(target) != N:
            raise SpecParseError(f"malformed file: map #{k + 1} must list {N} cells")
        for t in target:
            if not isinstance(t, int) or isinstance(t, bool):
                raise SpecParseError(f"malformed file: non-integer entry {t!r}")
            if not 1 <= t <= N:
                raise SpecParseError(f"cell index out of range: {t} not in 1..{N}")
        maps.append(InputMap.from_one_based(target, str(m.get("label", f"s{k + 2}"))))
    labels = [m.label for m in maps]
    if len(set(labels)) != len(labels):
        raise SpecParseError(f"duplicate labels: {sorted({l for l in labels if labels.count(l) > 1})}")
    ident = [i for i, m in enumerate(maps) if m.is_identity()]
    if ident:
        maps.insert(0, maps.pop(ident[0]))
    else:
        maps.insert(0, InputMap.identity(N, _identity_label(set(labels))))
    spec = NetworkSpec(N, tuple(maps), cell_dim, name or str(data.get("name", "")))
    response = None
    if "response" in data:
        response = _parse_response(data["response"], cell_dim)
    return NetworkFile(spec, response)


def _parse_response(resp, cell_dim: int) -> PolyField:
    if not isinstance(resp, dict) or "terms" not in resp:
        raise SpecParseError("malformed file: 'response' needs 'terms'")
    terms = resp["terms"]
    if not terms:
        raise SpecParseError("malformed file: empty response term list")
    n_in = None
    acc: dict[tuple[int, ...], np.ndarray] = {}
    try:
        for t in terms:
            e = tuple(int(v) for v in t["monomial"])
            if n_in is None:
                n_in = len(e)
            elif len(e) != n_in:
                raise SpecParseError("malformed file: response monomials differ in length")
            c = np.atleast_1d(np.asarray(t["coeff"], dtype=float))
            if c.size == 1 and cell_dim > 1:
                raise SpecParseError("malformed file: vector coefficient required for cell_dim > 1")
            acc[e] = acc.get(e, 0) + c
        degree = int(resp.get("degree", max(sum(e) for e in acc)))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SpecParseError):
            raise
        raise SpecParseError(f"malformed file: bad response term ({exc})") from exc
    return PolyField(n_in, cell_dim, degree, acc)


def builtin_network(name: str) -> NetworkFile:
    """Bundled example networks ``"A"``, ``"B"`` and ``"C"``."""
    fname = f"network{name.upper()}.json"
    try:
        text = resources.files("cellnet.data").joinpath(fname).read_text()
    except FileNotFoundError:
        raise KeyError(f"no bundled network {name!r}") from None
    return load_network_file(text, name=f"network{name.upper()}")


def complete_monoid(spec: NetworkSpec) -> Monoid:
    """Close ``spec.maps`` under composition.

    Elements keep the order of ``spec.maps``; new ones are appended in
    breadth-first discovery order and labelled ``g1, g2, ...``.
    """
    elems: list[InputMap] = list(spec.maps)
    seen = {m.target: i for i, m in enumerate(elems)}
    used = set(m.label for m in elems)
    counter = 0
    queue = deque(range(len(elems)))
    gens = list(spec.maps)
    while queue:
        i = queue.popleft()
        for g in gens:
            t = compose(g, elems[i]).target
            if t in seen:
                continue
            counter += 1
            while f"g{counter}" in used:
                counter += 1
            lab = f"g{counter}"
            used.add(lab)
            seen[t] = len(elems)
            elems.append(InputMap(t, lab))
            queue.append(len(elems) - 1)
    n = len(elems)
    table = np.empty((n, n), dtype=np.int64)
    for i, j in product(range(n), repeat=2):
        table[i, j] = seen[compose(elems[i], elems[j]).target]
    return Monoid(tuple(elems), table, 0)


def fundamental_network(monoid: Monoid, cell_dim: int = 1) -> NetworkSpec:
    """Network on the monoid elements where cell ``σ_j`` reads ``X_{σ_i ∘ σ_j}`` in slot ``i``."""
    T = monoid.table
    maps = tuple(InputMap(tuple(int(v) for v in T[i]), monoid.elements[i].label)
                 for i in range(monoid.size))
    if monoid.unit_index != 0:
        u = monoid.unit_index
        maps = (maps[u],) + maps[:u] + maps[u + 1:]
    return NetworkSpec(monoid.size, maps, cell_dim, "fundamental")


def cell_projection(p: int, monoid: Monoid, origN: int | None = None, cell_dim: int = 1) -> np.ndarray:
    """Matrix of ``π_p``: block ``σ_j`` of the image is cell ``σ_j(p)`` (``p`` 0-based)."""
    N = monoid.N if origN is None else origN
    if N != monoid.N:
        raise ValueError(f"monoid acts on {monoid.N} cells, not {N}")
    if not 0 <= p < N:
        raise IndexError(f"cell index out of range: {p + 1} not in 1..{N}")
    P = np.zeros((monoid.size, N))
    for j, s in enumerate(monoid.elements):
        P[j, s(p)] = 1.0
    return np.kron(P, np.eye(cell_dim))


def injectivity_witness(p: int, monoid: Monoid, origN: int | None = None) -> tuple[bool, frozenset[int]]:
    """Whether ``π_p`` is injective, with the orbit ``{σ(p)}`` (0-based)."""
    N = monoid.N if origN is None else origN
    if not 0 <= p < N:
        raise IndexError(f"cell index out of range: {p + 1} not in 1..{N}")
    orbit = frozenset(s(p) for s in monoid.elements)
    return len(orbit) == N, orbit


def response_arity(spec: NetworkSpec) -> int:
    return spec.n_maps * spec.cell_dim + 1


def admissible_field(spec: NetworkSpec, f: PolyField) -> PolyField:
    """The network field whose cell ``p`` is ``f(x_{σ_1(p)}, ..., x_{σ_n(p)}, λ)``.

    ``f`` takes ``n_maps * cell_dim`` state arguments followed by ``λ``; the
    result acts on ``V^N × Ω`` (the last input is ``λ``).
    """
    d = spec.cell_dim
    if f.n_in != response_arity(spec):
        raise ValueError(f"arity mismatch: response has {f.n_in} inputs, "
                         f"network needs {response_arity(spec)}")
    if f.n_out != d:
        raise ValueError(f"response must return {d} components")
    n_in = spec.N * d + 1
    parts = []
    for p in range(spec.N):
        mapping = [spec.maps[i](p) * d + k for i in range(spec.n_maps) for k in range(d)]
        mapping.append(n_in - 1)
        parts.append(f.rename_variables(mapping, n_in))
    return PolyField.stack(parts)
