"""Truncated multivariate polynomial vector fields.

A :class:`PolyField` maps ``R^n_in -> R^n_out``; every component is a
polynomial of total degree at most ``degree``. Terms are stored sparsely as a
mapping from exponent tuples to coefficient vectors of length ``n_out``.
By convention the last input slot is the bifurcation parameter whenever a
field depends on one.

Composition and products go through a dense graded monomial basis
(:class:`MonomialBasis`) because that is where the work is; everything else
stays sparse.
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from math import comb
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "MonomialBasis",
    "PolyField",
    "monomial_basis",
    "poly_compose",
    "poly_jacobian",
    "graded_component",
]

PRUNE_TOL = 0.0


def _grlex_key(exp: tuple[int, ...]) -> tuple:
    return (sum(exp), tuple(-e for e in exp))


def exponents_of_degree(nvars: int, deg: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total degree ``deg``, in graded-lex order."""
    if nvars == 0:
        return [()] if deg == 0 else []
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), deg):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    out.sort(key=_grlex_key)
    return out


class MonomialBasis:
    """Dense graded-lex monomial basis of degree <= ``degree`` in ``nvars`` variables."""

    def __init__(self, nvars: int, degree: int):
        self.nvars = nvars
        self.degree = degree
        exps: list[tuple[int, ...]] = []
        for d in range(degree + 1):
            exps.extend(exponents_of_degree(nvars, d))
        self.exps = exps
        self.exp_array = np.array(exps, dtype=np.int64).reshape(len(exps), nvars)
        self.degs = self.exp_array.sum(axis=1) if nvars else np.zeros(len(exps), dtype=np.int64)
        self.index = {e: i for i, e in enumerate(exps)}
        self.size = len(exps)
        self._mul = None

    def degree_slice(self, d: int) -> slice:
        start = sum(comb(self.nvars + k - 1, k) for k in range(d)) if self.nvars else 0
        return slice(start, start + (comb(self.nvars + d - 1, d) if self.nvars else int(d == 0)))

    def mul_table(self):
        """Index triples (i, j, k) with exps[i] + exps[j] = exps[k] inside the truncation."""
        if self._mul is None:
            I, J, K = [], [], []
            for i, ei in enumerate(self.exps):
                di = sum(ei)
                for j, ej in enumerate(self.exps):
                    if di + sum(ej) > self.degree:
                        continue
                    I.append(i)
                    J.append(j)
                    K.append(self.index[tuple(a + b for a, b in zip(ei, ej))])
            self._mul = (np.array(I, dtype=np.int64), np.array(J, dtype=np.int64), np.array(K, dtype=np.int64))
        return self._mul

    def multiply(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Truncated product of two dense scalar polynomials."""
        I, J, K = self.mul_table()
        return np.bincount(K, weights=a[I] * b[J], minlength=self.size)


@lru_cache(maxsize=None)
def monomial_basis(nvars: int, degree: int) -> MonomialBasis:
    return MonomialBasis(nvars, degree)


class PolyField:
    """Sparse truncated polynomial map ``R^n_in -> R^n_out``.

    Instances are treated as immutable values; arithmetic returns new objects.
    """

    __slots__ = ("n_in", "n_out", "degree", "terms", "_compiled")

    def __init__(self, n_in: int, n_out: int, degree: int,
                 terms: Mapping[tuple[int, ...], Iterable[float]] | None = None,
                 prune: float = PRUNE_TOL):
        self.n_in = int(n_in)
        self.n_out = int(n_out)
        self.degree = int(degree)
        clean: dict[tuple[int, ...], np.ndarray] = {}
        for exp, coeff in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != self.n_in:
                raise ValueError(f"exponent {exp} has wrong length for n_in={self.n_in}")
            if min(exp, default=0) < 0:
                raise ValueError(f"negative exponent in {exp}")
            if sum(exp) > self.degree:
                continue
            c = np.asarray(coeff, dtype=float).reshape(self.n_out)
            if not np.all(np.isfinite(c)):
                raise ValueError(f"non-finite coefficient for monomial {exp}")
            if exp in clean:
                c = clean[exp] + c
            clean[exp] = c
        self.terms = {e: c for e, c in sorted(clean.items(), key=lambda t: _grlex_key(t[0]))
                      if np.max(np.abs(c), initial=0.0) > prune}
        self._compiled = None

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, n_in: int, n_out: int, degree: int) -> "PolyField":
        return cls(n_in, n_out, degree)

    @classmethod
    def linear(cls, matrix, degree: int = 1) -> "PolyField":
        M = np.atleast_2d(np.asarray(matrix, dtype=float))
        n_out, n_in = M.shape
        terms = {}
        for j in range(n_in):
            e = [0] * n_in
            e[j] = 1
            terms[tuple(e)] = M[:, j]
        return cls(n_in, n_out, max(degree, 1), terms)

    @classmethod
    def constant(cls, value, n_in: int, degree: int = 0) -> "PolyField":
        v = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(n_in, v.size, degree, {(0,) * n_in: v})

    @classmethod
    def variable(cls, i: int, n_in: int, degree: int = 1) -> "PolyField":
        e = [0] * n_in
        e[i] = 1
        return cls(n_in, 1, max(degree, 1), {tuple(e): [1.0]})

    @classmethod
    def from_dense(cls, basis: MonomialBasis, coeffs: np.ndarray, degree: int | None = None) -> "PolyField":
        """Build from a dense ``(basis.size, n_out)`` coefficient array."""
        C = np.asarray(coeffs, dtype=float)
        if C.ndim == 1:
            C = C[:, None]
        terms = {basis.exps[i]: C[i] for i in np.flatnonzero(np.any(C != 0, axis=1))}
        return cls(basis.nvars, C.shape[1], basis.degree if degree is None else degree, terms)

    @classmethod
    def stack(cls, fields: list["PolyField"]) -> "PolyField":
        """Concatenate outputs of fields sharing ``n_in``."""
        if not fields:
            raise ValueError("nothing to stack")
        n_in = fields[0].n_in
        if any(f.n_in != n_in for f in fields):
            raise ValueError("stacked fields must share n_in")
        n_out = sum(f.n_out for f in fields)
        deg = max(f.degree for f in fields)
        terms: dict[tuple[int, ...], np.ndarray] = {}
        offset = 0
        for f in fields:
            for e, c in f.terms.items():
                v = terms.setdefault(e, np.zeros(n_out))
                v[offset:offset + f.n_out] = c
            offset += f.n_out
        return cls(n_in, n_out, deg, terms)

    # -- basic views ----------------------------------------------------
    def to_dense(self, basis: MonomialBasis | None = None) -> np.ndarray:
        basis = basis or monomial_basis(self.n_in, self.degree)
        out = np.zeros((basis.size, self.n_out))
        for e, c in self.terms.items():
            if sum(e) <= basis.degree:
                out[basis.index[e]] = c
        return out

    def component(self, i: int) -> "PolyField":
        return PolyField(self.n_in, 1, self.degree, {e: c[i:i + 1] for e, c in self.terms.items()})

    def components(self, idx) -> "PolyField":
        idx = list(idx)
        return PolyField(self.n_in, len(idx), self.degree, {e: c[idx] for e, c in self.terms.items()})

    def coeff(self, exp, comp: int | None = None):
        c = self.terms.get(tuple(exp))
        if c is None:
            c = np.zeros(self.n_out)
        return c if comp is None else float(c[comp])

    def max_abs_coeff(self) -> float:
        return max((float(np.max(np.abs(c))) for c in self.terms.values()), default=0.0)

    def truncate(self, degree: int) -> "PolyField":
        return PolyField(self.n_in, self.n_out, degree, self.terms)

    def with_degree(self, degree: int) -> "PolyField":
        return self.truncate(degree)

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.max_abs_coeff() <= tol

    @property
    def min_degree(self) -> int:
        return min((sum(e) for e in self.terms), default=self.degree + 1)

    def __repr__(self) -> str:
        return f"PolyField(n_in={self.n_in}, n_out={self.n_out}, degree={self.degree}, nterms={len(self.terms)})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyField):
            return NotImplemented
        return (self.n_in, self.n_out) == (other.n_in, other.n_out) and (self - other).is_zero()

    __hash__ = None

    def allclose(self, other: "PolyField", atol: float = 1e-12) -> bool:
        return (self - other).max_abs_coeff() <= atol

    # -- arithmetic -------------------------------------------------------
    def _check_shape(self, other: "PolyField"):
        if (self.n_in, self.n_out) != (other.n_in, other.n_out):
            raise ValueError(f"shape mismatch: ({self.n_in},{self.n_out}) vs ({other.n_in},{other.n_out})")

    def __add__(self, other: "PolyField") -> "PolyField":
        self._check_shape(other)
        terms = {e: c.copy() for e, c in self.terms.items()}
        for e, c in other.terms.items():
            terms[e] = terms[e] + c if e in terms else c
        return PolyField(self.n_in, self.n_out, max(self.degree, other.degree), terms)

    def __neg__(self) -> "PolyField":
        return PolyField(self.n_in, self.n_out, self.degree, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "PolyField") -> "PolyField":
        return self + (-other)

    def __mul__(self, scalar: float) -> "PolyField":
        if isinstance(scalar, PolyField):
            return self.product(scalar)
        return PolyField(self.n_in, self.n_out, self.degree, {e: c * float(scalar) for e, c in self.terms.items()})

    __rmul__ = __mul__

    def product(self, other: "PolyField", degree: int | None = None) -> "PolyField":
        """Componentwise product; a scalar field (``n_out == 1``) broadcasts."""
        if self.n_in != other.n_in:
            raise ValueError("product needs equal n_in")
        if 1 not in (self.n_out, other.n_out) and self.n_out != other.n_out:
            raise ValueError("product needs equal n_out or a scalar factor")
        deg = self.degree + other.degree if degree is None else degree
        n_out = max(self.n_out, other.n_out)
        terms: dict[tuple[int, ...], np.ndarray] = {}
        for ea, ca in self.terms.items():
            da = sum(ea)
            for eb, cb in other.terms.items():
                if da + sum(eb) > deg:
                    continue
                e = tuple(x + y for x, y in zip(ea, eb))
                v = ca * cb
                terms[e] = terms[e] + v if e in terms else v
        return PolyField(self.n_in, n_out, deg, terms)

    def apply_linear(self, M) -> "PolyField":
        """Left-multiply outputs: ``x -> M @ F(x)``."""
        M = np.atleast_2d(np.asarray(M, dtype=float))
        if M.shape[1] != self.n_out:
            raise ValueError("matrix does not match n_out")
        return PolyField(self.n_in, M.shape[0], self.degree, {e: M @ c for e, c in self.terms.items()})

    def rename_variables(self, mapping, n_in: int) -> "PolyField":
        """Substitute input ``i`` by variable ``mapping[i]`` of a new ``n_in``-dim space.

        Several inputs may map to the same variable; their exponents add.
        """
        terms: dict[tuple[int, ...], np.ndarray] = {}
        for e, c in self.terms.items():
            new = [0] * n_in
            for i, k in enumerate(e):
                if k:
                    new[mapping[i]] += k
            new = tuple(new)
            terms[new] = terms[new] + c if new in terms else c
        return PolyField(n_in, self.n_out, self.degree, terms)

    def derivative(self, i: int) -> "PolyField":
        terms = {}
        for e, c in self.terms.items():
            if e[i]:
                d = list(e)
                d[i] -= 1
                terms[tuple(d)] = c * e[i]
        return PolyField(self.n_in, self.n_out, max(self.degree - 1, 0), terms)

    def jacobian_field(self) -> list["PolyField"]:
        return [self.derivative(i) for i in range(self.n_in)]

    def graded(self, k: int) -> "PolyField":
        return PolyField(self.n_in, self.n_out, self.degree, {e: c for e, c in self.terms.items() if sum(e) == k})

    def linear_part(self) -> np.ndarray:
        M = np.zeros((self.n_out, self.n_in))
        for e, c in self.terms.items():
            if sum(e) == 1:
                M[:, e.index(1)] = c
        return M

    def constant_part(self) -> np.ndarray:
        return self.coeff((0,) * self.n_in)

    # -- evaluation -------------------------------------------------------
    def _compile(self):
        if self._compiled is None:
            if self.terms:
                E = np.array(list(self.terms.keys()), dtype=np.int64).reshape(len(self.terms), self.n_in)
                C = np.array(list(self.terms.values()), dtype=float).reshape(len(self.terms), self.n_out)
            else:
                E = np.zeros((0, self.n_in), dtype=np.int64)
                C = np.zeros((0, self.n_out))
            self._compiled = (E, C)
        return self._compiled

    def __call__(self, x) -> np.ndarray:
        """Evaluate at a point (shape ``(n_in,)``) or a batch (shape ``(k, n_in)``)."""
        x = np.asarray(x, dtype=float)
        E, C = self._compile()
        if x.ndim == 1:
            if x.shape[0] != self.n_in:
                raise ValueError("point has wrong dimension")
            return np.prod(x[None, :] ** E, axis=1) @ C
        if len(E) == 0:
            return np.zeros((x.shape[0], self.n_out))
        # per-variable power tables, gathered by exponent
        powers = x[:, :, None] ** np.arange(int(E.max()) + 1)
        mons = powers[:, 0, E[:, 0]]
        for v in range(1, self.n_in):
            mons = mons * powers[:, v, E[:, v]]
        return mons @ C

    evaluate = __call__

    def jacobian(self, at) -> np.ndarray:
        return poly_jacobian(self, at)

    # -- composition -------------------------------------------------------
    def compose(self, inner: "PolyField", degree: int | None = None) -> "PolyField":
        return poly_compose(self, inner, degree)

    def substitute_linear(self, M, degree: int | None = None) -> "PolyField":
        """``x -> F(M x)`` for a matrix ``M`` of shape ``(n_in, k)``."""
        return poly_compose(self, PolyField.linear(M), self.degree if degree is None else degree)

    # -- serialization ----------------------------------------------------------
    def to_term_list(self, comp: int = 0) -> list[dict]:
        return [{"monomial": list(e), "coeff": float(c[comp])}
                for e, c in self.terms.items() if c[comp] != 0]

    @classmethod
    def from_term_list(cls, terms: list[Mapping], n_in: int, degree: int) -> "PolyField":
        acc: dict[tuple[int, ...], np.ndarray] = {}
        for t in terms:
            e = tuple(int(v) for v in t["monomial"])
            c = np.array([float(t["coeff"])])
            acc[e] = acc[e] + c if e in acc else c
        return cls(n_in, 1, degree, acc)


def poly_compose(outer: PolyField, inner: PolyField, degree: int | None = None) -> PolyField:
    """Taylor composition ``outer(inner(x))`` truncated at ``degree``.

    Exact on polynomial inputs up to the truncation. ``degree`` defaults to
    the larger of the two degrees.
    """
    if inner.n_out != outer.n_in:
        raise ValueError(f"dimension mismatch: inner.n_out={inner.n_out} vs outer.n_in={outer.n_in}")
    deg = max(outer.degree, inner.degree) if degree is None else int(degree)
    basis = monomial_basis(inner.n_in, deg)
    comps = inner.to_dense(basis).T
    one = np.zeros(basis.size)
    one[0] = 1.0
    cache: dict[tuple[int, ...], np.ndarray] = {(0,) * outer.n_in: one}

    def mono(e: tuple[int, ...]) -> np.ndarray:
        if e in cache:
            return cache[e]
        i = max(k for k, v in enumerate(e) if v)
        prev = list(e)
        prev[i] -= 1
        val = basis.multiply(mono(tuple(prev)), comps[i])
        cache[e] = val
        return val

    out = np.zeros((basis.size, outer.n_out))
    for e, c in outer.terms.items():
        out += np.outer(mono(e), c)
    return PolyField.from_dense(basis, out, deg)


def poly_jacobian(F: PolyField, at) -> np.ndarray:
    """Matrix of partial derivatives of ``F`` at a point."""
    at = np.asarray(at, dtype=float)
    if at.shape != (F.n_in,):
        raise ValueError("point dimension must equal n_in")
    J = np.zeros((F.n_out, F.n_in))
    for e, c in F.terms.items():
        for i, k in enumerate(e):
            if k == 0:
                continue
            d = list(e)
            d[i] -= 1
            J[:, i] += c * k * np.prod(at ** np.array(d))
    return J


def graded_component(F: PolyField, k: int) -> PolyField:
    """Degree-``k`` homogeneous part of ``F``."""
    if not 0 <= k <= F.degree:
        raise ValueError(f"degree {k} outside 0..{F.degree}")
    return F.graded(k)
