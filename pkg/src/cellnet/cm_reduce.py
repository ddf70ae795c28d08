"""Parameter-augmented center manifold reduction on formal Taylor jets.

The fundamental network field ``Γ_f`` is augmented with ``λ̇ = 0``. Its
linearization at the origin splits the state into a center part ``W_c`` and a
hyperbolic part ``W_h``; the augmented center space also contains
``(w, 1)`` with ``w ∈ W_h`` chosen so that ``L(w, 1)`` lies back in ``W_c``.

Everything is expressed in block coordinates ``z = (u, y)`` with
``u = (ξ, λ)`` on the augmented center space and ``y`` on ``W_h``:

    x̲ = E_c u + E_h y,   E_c = [[B_c, w], [0, 1]],   E_h = [[B_h], [0]].

The manifold is the graph ``y = ψ(u)``, solved degree by degree from the
invariance equation, and the reduced field is the ``ξ``-part of the flow on it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .errors import CellNetError, NumericalFailure
from .network import Monoid, admissible_field, fundamental_network
from .polyalg import PolyField, exponents_of_degree, poly_compose
from .representation import (
    Splitting,
    center_hyperbolic_split,
    intertwiner_basis,
    rep_matrices,
    response_from_equivariant,
    rref,
)
from .synchrony import Partition, synchrony_basis

__all__ = [
    "EquilibriumError",
    "AugmentedSystem",
    "CenterManifoldJet",
    "ReducedField",
    "augment",
    "solve_cm_jet",
    "reduced_field",
    "reduce",
    "verify_reduced",
    "restrict_to_synchrony",
    "equivariant_field_space",
    "tangency_residual",
    "psi_equivariance_residual",
    "linear_part_identities",
    "realize_response",
    "center_frame",
    "embedding_partition",
]


class EquilibriumError(CellNetError, ValueError):
    """The origin is not an equilibrium of the network at ``λ = 0``."""


@dataclass
class AugmentedSystem:
    monoid: Monoid
    f: PolyField
    Gamma: PolyField            # R^{n+1} -> R^n
    L: np.ndarray               # (n+1) x (n+1), last row zero
    g: PolyField                # nonlinear part, R^{n+1} -> R^{n+1}
    split: Splitting
    w: np.ndarray               # λ-direction of the augmented center space, w in W_h
    Bc: np.ndarray              # center frame, n x c
    Bh: np.ndarray              # hyperbolic basis, n x h
    Bc_inv: np.ndarray          # left inverse of Bc on W_c (rows), c x n
    coord_names: list[str]
    T: np.ndarray
    Tinv: np.ndarray
    Lc: np.ndarray              # (c+1) x (c+1)
    Lh: np.ndarray              # h x h
    N: PolyField                # nonlinearity in block coordinates
    frame: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.L.shape[0] - 1

    @property
    def c(self) -> int:
        return self.Bc.shape[1]

    @property
    def h(self) -> int:
        return self.Bh.shape[1]

    @property
    def J(self) -> np.ndarray:
        return self.L[:-1, :-1]

    @property
    def v(self) -> np.ndarray:
        return self.L[:-1, -1]

    @property
    def Pc(self) -> np.ndarray:
        return self.split.projections[0]

    @property
    def Ph(self) -> np.ndarray:
        return self.split.projections[1]

    def center_reps(self) -> list[np.ndarray]:
        """Monoid action in ``ξ`` coordinates."""
        return [self.Bc_inv @ A @ self.Bc for A in rep_matrices(self.monoid)]

    def hyperbolic_reps(self) -> list[np.ndarray]:
        Bp = np.linalg.pinv(self.Bh)
        return [Bp @ A @ self.Bh for A in rep_matrices(self.monoid)]


@dataclass
class CenterManifoldJet:
    psi: PolyField              # u -> y, degrees 2..order
    order: int
    conditions: dict[int, float]


@dataclass
class ReducedField:
    """Reduced vector field ``ξ̇ = R(ξ, λ)``; the last input of ``R`` is ``λ``."""

    R: PolyField
    basis: np.ndarray           # columns span the coordinates' image in the parent space
    coord_names: list[str]
    reps: list[np.ndarray]      # monoid action in these coordinates
    lift: Callable[[np.ndarray], np.ndarray] | None = None
    info: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.R.n_out

    @property
    def order(self) -> int:
        return self.R.degree

    def __call__(self, x, lam) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lam = np.broadcast_to(np.asarray(lam, dtype=float), x.shape[:-1])
        return self.R(np.concatenate([x, lam[..., None]], axis=-1))

    def jacobian(self, x, lam) -> np.ndarray:
        return self.R.jacobian(np.append(np.asarray(x, dtype=float), lam))[:, :-1]


def left_zeros(monoid: Monoid) -> list[int]:
    """Indices ``z`` with ``σ_z ∘ σ = σ_z`` for every element."""
    T = monoid.table
    return [z for z in range(monoid.size) if np.all(T[z] == z)]


def center_frame(Wc: np.ndarray, monoid: Monoid, zero: int | None = None):
    """Basis of ``W_c`` used as coordinates, with coordinate names.

    When ``W_c`` is complementary to the synchronous diagonal, coordinates are
    taken on ``K = {X_z = 0}`` through the equivariant map ``X -> X - X_z 1``
    for a left zero ``z``; among several left zeros the one fixed by the most
    left multiplications is used. The full-sync line gets the single
    coordinate ``X``. Any other center space falls back to an orthonormal basis.
    """
    n, c = Wc.shape
    ones = np.ones(n)
    if c == 0:
        return Wc, [], {"kind": "empty"}
    resid = ones - Wc @ np.linalg.lstsq(Wc, ones, rcond=None)[0]
    if c == 1 and np.linalg.norm(resid) < 1e-9 * np.sqrt(n):
        return ones[:, None], ["X"], {"kind": "sync"}
    zeros = left_zeros(monoid)
    if c == n - 1 and zeros and np.linalg.norm(resid) > 1e-6:
        if zero is None:
            T = monoid.table
            zero = max(zeros, key=lambda z: (int(np.sum(T[:, z] == z)), z))
        if zero not in zeros:
            raise ValueError(f"element {zero} is not a left zero")
        keep = [j for j in range(n) if j != zero]
        Q = np.eye(n) - np.outer(ones, np.eye(n)[zero])
        M = Q[keep] @ Wc
        if np.linalg.cond(M) < 1e10:
            Bc = Wc @ np.linalg.inv(M)
            return Bc, [f"X{j + 1}" for j in keep], {"kind": "left_zero", "zero": int(zero), "coords": keep}
    return Wc, [f"y{j + 1}" for j in range(c)], {"kind": "orthonormal"}


def augment(monoid: Monoid, f: PolyField, tol_re: float | None = None,
            zero: int | None = None) -> AugmentedSystem:
    """Augmented linearization, nonlinearity, splitting and block coordinates for ``Γ_f``."""
    n = monoid.size
    spec = fundamental_network(monoid)
    if f.n_in != n + 1 or f.n_out != 1:
        raise ValueError(f"arity mismatch: response needs {n} state inputs plus λ")
    if abs(float(f.constant_part()[0])) > 0:
        raise EquilibriumError("origin is not an equilibrium: f(0, 0) != 0")
    Gamma = admissible_field(spec, f)
    L = np.zeros((n + 1, n + 1))
    L[:n] = Gamma.linear_part()
    # independent assembly of the state Jacobian from the response slopes
    slopes = f.linear_part()[0]
    J_direct = np.zeros((n, n))
    for i in range(n):
        J_direct[np.arange(n), monoid.table[i]] += slopes[i]
    if not np.allclose(L[:n, :n], J_direct, atol=1e-12, rtol=0):
        raise CellNetError("internal consistency: linear part does not match response slopes")
    if not np.allclose(L[:n, n], slopes[n], atol=1e-12, rtol=0):
        raise CellNetError("internal consistency: parameter column is not f_λ times the diagonal")
    Gbar = PolyField.stack([Gamma, PolyField.zero(n + 1, 1, Gamma.degree)])
    g = Gbar - PolyField.linear(L, Gamma.degree)
    g = PolyField(g.n_in, g.n_out, g.degree, {e: c for e, c in g.terms.items() if sum(e) >= 2})
    As = rep_matrices(monoid)
    J = L[:n, :n]
    v = L[:n, n]
    split = center_hyperbolic_split(J, tol_re, As=As)
    Wc, Wh = split.subspaces
    Pc, Ph = split.projections
    Bc, names, frame = center_frame(Wc, monoid, zero)
    Bh = Wh
    c, h = Bc.shape[1], Bh.shape[1]
    Bc_inv = np.linalg.pinv(Bc) @ Pc if c else np.zeros((0, n))
    Jh = np.linalg.pinv(Bh) @ J @ Bh if h else np.zeros((0, 0))
    if h:
        w = -Bh @ np.linalg.solve(Jh, np.linalg.pinv(Bh) @ Ph @ v)
    else:
        w = np.zeros(n)
    T = np.zeros((n + 1, n + 1))
    T[:n, :c] = Bc
    T[:n, c] = w
    T[n, c] = 1.0
    T[:n, c + 1:] = Bh
    Tinv = np.linalg.inv(T)
    Lblock = Tinv @ L @ T
    Lc = Lblock[:c + 1, :c + 1]
    Lh = Lblock[c + 1:, c + 1:]
    if np.abs(Lblock[:c + 1, c + 1:]).max(initial=0) > 1e-8 * (1 + np.abs(L).max()) or \
            np.abs(Lblock[c + 1:, :c + 1]).max(initial=0) > 1e-8 * (1 + np.abs(L).max()):
        raise NumericalFailure("block coordinates do not decouple the linearization",
                               {"offdiag": float(max(np.abs(Lblock[:c + 1, c + 1:]).max(initial=0),
                                                     np.abs(Lblock[c + 1:, :c + 1]).max(initial=0)))})
    Lc = Lc.copy()
    Lc[c] = 0.0
    N = g.substitute_linear(T).apply_linear(Tinv)
    return AugmentedSystem(monoid, f, Gamma, L, g, split, w, Bc, Bh, Bc_inv, names,
                           T, Tinv, Lc, Lh, N, frame)


def _lie_matrix(Lc: np.ndarray, m: int) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    """Matrix ``K`` of ``p -> ∇p · L_c u`` on degree-``m`` monomials (row i = image of monomial i)."""
    nv = Lc.shape[0]
    exps = exponents_of_degree(nv, m)
    index = {e: i for i, e in enumerate(exps)}
    K = np.zeros((len(exps), len(exps)))
    for i, e in enumerate(exps):
        for j in range(nv):
            if not e[j]:
                continue
            for l in range(nv):
                if Lc[j, l] == 0:
                    continue
                t = list(e)
                t[j] -= 1
                t[l] += 1
                K[i, index[tuple(t)]] += e[j] * Lc[j, l]
    return K, exps


def _graph(psi: PolyField, nu: int) -> PolyField:
    """``u -> (u, ψ(u))``."""
    ident = PolyField.linear(np.eye(nu), psi.degree)
    return PolyField.stack([ident, psi]) if psi.n_out else ident


def _invariance_rhs(aug: AugmentedSystem, psi: PolyField, degree: int) -> tuple[PolyField, PolyField]:
    """``N_h(u, ψ) - Dψ · N_c(u, ψ)`` and ``N_c(u, ψ)``, truncated at ``degree``."""
    nu = aug.c + 1
    NZ = poly_compose(aug.N, _graph(psi, nu), degree)
    Nc = NZ.components(range(nu))
    Nh = NZ.components(range(nu, nu + aug.h))
    corr = PolyField.zero(nu, aug.h, degree)
    for i in range(nu):
        corr = corr + psi.derivative(i).product(Nc.component(i), degree)
    return Nh - corr, Nc


def solve_cm_jet(aug: AugmentedSystem, order: int = 3, max_cond: float = 1e12) -> CenterManifoldJet:
    """Taylor jet of the center manifold graph ``y = ψ(u)`` up to ``order``."""
    if order < 2:
        raise ValueError("jet order must be at least 2")
    split = aug.split
    if split.eigenvalues and np.any(np.abs(split.eigenvalues[0]) > split.info.get("tol_re", 1e-8) * 10):
        raise NumericalFailure("center spectrum is not all zero (Hopf-type center); not reduced",
                               {"center_eigenvalues": [complex(z) for z in split.eigenvalues[0]]})
    nu, h = aug.c + 1, aug.h
    psi = PolyField.zero(nu, h, order)
    conds: dict[int, float] = {}
    if h == 0:
        return CenterManifoldJet(psi, order, conds)
    for m in range(2, order + 1):
        rhs, _ = _invariance_rhs(aug, psi.truncate(m), m)
        K, exps = _lie_matrix(aug.Lc, m)
        M = len(exps)
        B = np.array([rhs.coeff(e) for e in exps]).T          # h x M
        op = np.kron(K.T, np.eye(h)) - np.kron(np.eye(M), aug.Lh)
        cond = float(np.linalg.cond(op))
        conds[m] = cond
        if not np.isfinite(cond) or cond > max_cond:
            raise NumericalFailure(f"homological operator singular at degree {m} (cond {cond:.3g})",
                                   {"degree": m, "cond": cond,
                                    "hyperbolic_eigenvalues": [complex(z) for z in np.linalg.eigvals(aug.Lh)]})
        Psi = np.linalg.solve(op, B.reshape(-1, order="F")).reshape((h, M), order="F")
        psi = psi + PolyField(nu, h, order, {e: Psi[:, i] for i, e in enumerate(exps)})
    return CenterManifoldJet(psi, order, conds)


def tangency_residual(aug: AugmentedSystem, jet: CenterManifoldJet) -> dict[int, float]:
    """Per-degree coefficient norm of ``Dψ·(L_c u + N_c) - (L_h ψ + N_h)`` on the graph."""
    k = jet.order
    nu = aug.c + 1
    psi = jet.psi
    NZ = poly_compose(aug.N, _graph(psi, nu), k)
    flow_c = PolyField.linear(aug.Lc, k) + NZ.components(range(nu))
    lhs = PolyField.zero(nu, aug.h, k)
    for i in range(nu):
        lhs = lhs + psi.derivative(i).product(flow_c.component(i), k)
    rhs = psi.apply_linear(aug.Lh) + NZ.components(range(nu, nu + aug.h))
    diff = lhs - rhs
    return {m: diff.graded(m).max_abs_coeff() for m in range(0, k + 1)}


def psi_equivariance_residual(aug: AugmentedSystem, jet: CenterManifoldJet) -> dict[int, float]:
    """Per-degree ``max_σ |ψ_m ∘ A_σ - A_σ ∘ ψ_m|`` (coefficient norm)."""
    out = {m: 0.0 for m in range(2, jet.order + 1)}
    if aug.h == 0:
        return out
    for Ac, Ah in zip(aug.center_reps(), aug.hyperbolic_reps()):
        Acu = sla.block_diag(Ac, np.eye(1))
        d = jet.psi.substitute_linear(Acu) - jet.psi.apply_linear(Ah)
        for m in out:
            out[m] = max(out[m], d.graded(m).max_abs_coeff())
    return out


def _lift_factory(aug: AugmentedSystem, psi: PolyField):
    def lift(points: np.ndarray) -> np.ndarray:
        P = np.atleast_2d(np.asarray(points, dtype=float))
        xi, lam = P[:, :-1], P[:, -1]
        X = xi @ aug.Bc.T + np.outer(lam, aug.w)
        if aug.h:
            X = X + psi(P) @ aug.Bh.T
        return X
    return lift


def reduced_field(aug: AugmentedSystem, jet: CenterManifoldJet, tol: float = 1e-10) -> ReducedField:
    """Flow on the manifold in ``ξ`` coordinates; the ``λ`` component must vanish."""
    k = jet.order
    nu = aug.c + 1
    NZ = poly_compose(aug.N, _graph(jet.psi, nu), k)
    full = PolyField.linear(aug.Lc, k) + NZ.components(range(nu))
    lam_part = full.component(aug.c).max_abs_coeff()
    if lam_part > tol * (1 + full.max_abs_coeff()):
        raise NumericalFailure(f"parameter component of the reduced field is nonzero ({lam_part:.3g})")
    R = full.components(range(aug.c))
    sync_resid = 0.0
    if aug.frame.get("kind") == "left_zero":
        # the diagonal lies in W_h, so the full-sync equilibria sit at ξ = 0 and R(0, λ) = 0
        pure = {e: c for e, c in R.terms.items() if not any(e[:-1])}
        sync_resid = max((float(np.abs(c).max()) for c in pure.values()), default=0.0)
        if sync_resid > tol * (1 + R.max_abs_coeff()):
            raise NumericalFailure(f"reduced field does not vanish on the parameter axis ({sync_resid:.3g})")
        R = PolyField(R.n_in, R.n_out, R.degree, {e: c for e, c in R.terms.items() if e not in pure})
    info = {"lambda_residual": lam_part, "parameter_axis_residual": sync_resid, "frame": aug.frame, "order": k,
            "conditions": dict(jet.conditions)}
    return ReducedField(R, aug.Bc, list(aug.coord_names), aug.center_reps(), _lift_factory(aug, jet.psi), info)


def reduce(monoid: Monoid, f: PolyField, order: int = 3, tol_re: float | None = None):
    """Convenience wrapper: ``augment``, ``solve_cm_jet`` and ``reduced_field``."""
    aug = augment(monoid, f, tol_re)
    jet = solve_cm_jet(aug, order)
    return aug, jet, reduced_field(aug, jet)


def linear_part_identities(aug: AugmentedSystem, red: ReducedField) -> dict[str, float]:
    """Deviation of ``D_ξR(0)`` from ``J|_{W_c}`` and of ``D_λR(0)`` from ``P_c v``."""
    D = red.R.linear_part()
    Bp = np.linalg.pinv(aug.Bc)
    return {
        "state": float(np.abs(D[:, :-1] - Bp @ aug.J @ aug.Bc).max(initial=0.0)),
        "parameter": float(np.abs(D[:, -1] - Bp @ aug.Pc @ aug.v).max(initial=0.0)),
    }


def verify_reduced(red: ReducedField, monoid: Monoid | None = None, tol: float = 1e-9) -> dict:
    """Self-checks of a reduced field: origin, central spectrum, equivariance."""
    R = red.R
    zero = np.zeros(R.n_in)
    origin = float(np.abs(R(zero)).max(initial=0.0))
    spec = np.linalg.eigvals(R.jacobian(zero)[:, :-1]) if R.n_out else np.zeros(0)
    spec_dev = float(np.abs(spec.real).max(initial=0.0))
    reps = red.reps
    if reps is None and monoid is not None:
        Bp = np.linalg.pinv(red.basis)
        reps = [Bp @ A @ red.basis for A in rep_matrices(monoid)]
    eq = 0.0
    for A in reps or []:
        d = R.substitute_linear(sla.block_diag(A, np.eye(1))) - R.apply_linear(A)
        eq = max(eq, d.max_abs_coeff())
    scale = 1.0 + R.max_abs_coeff()
    # defective zero eigenvalues of size k sit within about eps**(1/k) of the axis
    checks = {
        "origin": origin <= tol,
        "spectrum": spec_dev <= max(tol, 1e-6 * scale),
        "equivariance": eq <= tol * scale,
    }
    return {"ok": all(checks.values()), "checks": checks,
            "residuals": {"origin": origin, "spectrum": spec_dev, "equivariance": eq}}


def restrict_to_synchrony(red: ReducedField, P: Partition, tol: float = 1e-9) -> ReducedField:
    """Restriction of ``R`` to the coordinates of ``W_c ∩ Δ_P``.

    The intersection is written in echelon form, so the new coordinates are a
    subset (the pivots) of the old ones.
    """
    S_P = synchrony_basis(P).basis
    B = red.basis
    n = B.shape[0]
    proj = np.eye(n) - S_P @ S_P.T
    # ξ with B ξ in Δ_P  <=>  proj B ξ = 0
    K = sla.null_space(proj @ B, rcond=1e-10) if B.shape[1] else np.zeros((0, 0))
    if K.shape[1] == 0:
        S = np.zeros((B.shape[1], 0))
        piv: list[int] = []
    else:
        E, piv = rref(K.T)
        S = E.T
    m = S.shape[1]
    c = B.shape[1]
    embed = sla.block_diag(S, np.eye(1))
    Rs = red.R.substitute_linear(embed)
    # invariance: the field must stay in span S
    resid = Rs.apply_linear(np.eye(c) - S @ np.linalg.pinv(S)).max_abs_coeff() if m else Rs.max_abs_coeff()
    if resid > tol * (1 + red.R.max_abs_coeff()):
        raise CellNetError(f"synchrony space not invariant under the reduced field (residual {resid:.3g})")
    R_new = Rs.components(piv) if m else PolyField.zero(Rs.n_in, 0, Rs.degree)
    reps = [np.linalg.pinv(S) @ A @ S for A in red.reps] if m else []
    parent_lift = red.lift

    def lift(points):
        P_ = np.atleast_2d(np.asarray(points, dtype=float))
        return parent_lift(np.column_stack([P_[:, :-1] @ S.T, P_[:, -1]]))

    info = dict(red.info)
    info.update({"partition": P.class_of, "pivots": piv, "invariance_residual": resid})
    return ReducedField(R_new, B @ S, [red.coord_names[i] for i in piv], reps,
                        lift if parent_lift else None, info)


def equivariant_field_space(monoid: Monoid, basis: np.ndarray, degree: int,
                            with_parameter: bool = False, homogeneous: bool = False,
                            tol: float = 1e-10) -> list[PolyField]:
    """Basis of polynomial fields ``F`` on the invariant subspace ``span(basis)`` with
    ``F(A_σ ξ) = A_σ F(ξ)`` in those coordinates.

    With ``with_parameter`` an extra trivially-acted input ``λ`` is appended.
    With ``homogeneous`` only the degree-``degree`` part is returned.
    """
    B = np.asarray(basis, dtype=float)
    Bp = np.linalg.pinv(B)
    reps = [Bp @ A @ B for A in rep_matrices(monoid)]
    for A, Ar in zip(rep_matrices(monoid), reps):
        if np.linalg.norm(A @ B - B @ Ar) > 1e-9 * (1 + np.linalg.norm(B)):
            raise ValueError("subspace is not invariant")
    c = B.shape[1]
    nv = c + int(with_parameter)
    out: list[PolyField] = []
    degrees = [degree] if homogeneous else range(0, degree + 1)
    for m in degrees:
        exps = exponents_of_degree(nv, m)
        M = len(exps)
        index = {e: i for i, e in enumerate(exps)}
        blocks = []
        for Ar in reps:
            Aa = sla.block_diag(Ar, np.eye(nv - c)) if nv > c else Ar
            sub = np.zeros((M, M))      # substitution: monomial i -> combination of monomials
            for i, e in enumerate(exps):
                mono = PolyField(nv, 1, m, {e: [1.0]}).substitute_linear(Aa)
                for e2, cf in mono.terms.items():
                    sub[i, index[e2]] += cf[0]
            # coefficients C (c x M): F(ξ) = C μ(ξ); F(Aξ) = C sub μ, A F = Ar C μ
            blocks.append(np.kron(sub.T, np.eye(c)) - np.kron(np.eye(M), Ar))
        K = sla.null_space(np.vstack(blocks), rcond=tol)
        if K.shape[1] == 0:
            continue
        E, _ = rref(K.T, 1e-9)
        for row in E:
            C = row.reshape((c, M), order="F")
            C[np.abs(C) < 1e-12] = 0.0
            out.append(PolyField(nv, c, degree, {e: C[:, i] for i, e in enumerate(exps)}))
    return out


def realize_response(aug: AugmentedSystem, G: PolyField) -> PolyField:
    """Response ``f`` whose reduction is ``L_c u + G`` in the frame of ``aug``.

    The network field is ``x -> J x + v λ + B_c G(ξ(x), λ)`` with
    ``ξ(x)`` the center coordinates of ``P_c x``; ``G`` must be equivariant in
    those coordinates with vanishing constant and linear parts.
    """
    n, c = aug.n, aug.c
    if G.n_in != c + 1 or G.n_out != c:
        raise ValueError("G must map (ξ, λ) to ξ")
    if any(sum(e) < 2 for e in G.terms):
        raise ValueError("G must vanish to second order")
    coords = np.zeros((c + 1, n + 1))
    coords[:c, :n] = aug.Bc_inv
    coords[c, n] = 1.0
    F = PolyField.linear(aug.L[:n], G.degree) + G.substitute_linear(coords).apply_linear(aug.Bc)
    return response_from_equivariant(F, aug.monoid)


def embedding_partition(monoid: Monoid, p: int = 0) -> Partition:
    """Partition of monoid elements by ``σ(p)``: the image of ``π_p`` is its synchrony space."""
    return Partition(tuple(s(p) for s in monoid.elements))
