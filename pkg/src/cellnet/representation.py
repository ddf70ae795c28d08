"""Regular representation of an input-map monoid and the linear algebra built on it.

``A_σ`` acts on ``V^n`` (one block per monoid element) by
``(A_σ X)_{σ_j} = X_{σ_j ∘ σ}``. Equivariant fields are exactly the
admissible fields of the fundamental network.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .network import Monoid, admissible_field, fundamental_network
from .polyalg import PolyField
from .synchrony import Partition, synchrony_basis

__all__ = [
    "RepMatrix",
    "Splitting",
    "rep_matrix",
    "rep_matrices",
    "check_representation",
    "is_equivariant",
    "response_from_equivariant",
    "commutant_basis",
    "intertwiner_basis",
    "restricted_rep",
    "indecomposable_splitting",
    "center_hyperbolic_split",
    "splitting_synchrony_check",
    "subspace_intersection",
    "eigen_multiplicity",
    "rref",
    "NotEquivariantError",
]


# eigenvalues of a random commutant element closer than this (relative) are one cluster;
# Jordan blocks of size k perturb eigenvalues by about eps**(1/k)
CLUSTER_TOL = 1e-4
# radius (relative to ||J||) within which computed eigenvalues form one cluster
JORDAN_RADIUS = 1e-4


class NotEquivariantError(ValueError):
    pass


@dataclass(frozen=True)
class RepMatrix:
    sigma: str
    matrix: np.ndarray


@dataclass
class Splitting:
    """Direct sum of invariant subspaces with the matching (oblique) projections."""

    subspaces: list[np.ndarray]
    projections: list[np.ndarray]
    eigenvalues: list[np.ndarray] = field(default_factory=list)
    warning: str | None = None
    info: dict = field(default_factory=dict)

    @property
    def dims(self) -> list[int]:
        return [W.shape[1] for W in self.subspaces]

    @property
    def ambient_dim(self) -> int:
        return self.projections[0].shape[0]


def rep_matrix(sigma, monoid: Monoid, cell_dim: int = 1) -> RepMatrix:
    """``A_σ`` as a 0/1 block matrix; ``sigma`` may be an element, label or index."""
    i = sigma if isinstance(sigma, (int, np.integer)) else monoid.index(sigma)
    if not 0 <= i < monoid.size:
        raise KeyError(f"element index {i} not in monoid")
    n = monoid.size
    A = np.zeros((n, n))
    A[np.arange(n), monoid.table[:, i]] = 1.0
    return RepMatrix(monoid.elements[i].label, np.kron(A, np.eye(cell_dim)))


def rep_matrices(monoid: Monoid, cell_dim: int = 1) -> list[np.ndarray]:
    return [rep_matrix(i, monoid, cell_dim).matrix for i in range(monoid.size)]


def check_representation(monoid: Monoid) -> bool:
    """``A_{σ_i} A_{σ_j} == A_{σ_i ∘ σ_j}`` for every pair, compared exactly."""
    n = monoid.size
    T = monoid.table
    if T.shape != (n, n) or T.min() < 0 or T.max() >= n:
        return False
    As = rep_matrices(monoid)
    if not np.array_equal(As[monoid.unit_index], np.eye(n)):
        return False
    return all(np.array_equal(As[i] @ As[j], As[T[i, j]]) for i in range(n) for j in range(n))


def _augment(A: np.ndarray, extra: int) -> np.ndarray:
    return sla.block_diag(A, np.eye(extra)) if extra else A


def is_equivariant(F: PolyField, monoid: Monoid, tol: float = 1e-9, cell_dim: int = 1,
                   seed: int = 0, npoints: int = 20) -> bool:
    """Check ``F ∘ A_σ = A_σ ∘ F`` for every σ, both on random points and coefficient-wise.

    ``F`` may carry trailing parameter inputs, on which the monoid acts trivially.
    """
    n = monoid.size * cell_dim
    if F.n_out != n or F.n_in < n:
        raise ValueError(f"arity mismatch: field is R^{F.n_in} -> R^{F.n_out}, representation has dim {n}")
    extra = F.n_in - n
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, size=(npoints, F.n_in))
    vals = F(pts)
    scale = 1.0 + F.max_abs_coeff()
    ok = True
    for A in rep_matrices(monoid, cell_dim):
        Aa = _augment(A, extra)
        if np.max(np.abs(F(pts @ Aa.T) - vals @ A.T), initial=0.0) > tol * scale:
            ok = False
        lhs = F.substitute_linear(Aa)
        rhs = F.apply_linear(A)
        if (lhs - rhs).max_abs_coeff() > tol * scale:
            ok = False
    return ok


def response_from_equivariant(F: PolyField, monoid: Monoid, cell_dim: int = 1,
                              check: bool = True, tol: float = 1e-9) -> PolyField:
    """Response ``f`` with ``Γ_f = F``: the unit-cell component of ``F``."""
    if check and not is_equivariant(F, monoid, tol, cell_dim):
        raise NotEquivariantError("field is not equivariant")
    d = cell_dim
    u = monoid.unit_index
    f = F.components(range(u * d, (u + 1) * d))
    # fundamental cell σ_1 reads X_{σ_i} in slot i; slots follow the fundamental map order
    spec = fundamental_network(monoid, d)
    order = [monoid.index(m.label) for m in spec.maps]
    n = monoid.size * d
    mapping = list(range(F.n_in))
    for slot, elem in enumerate(order):
        for k in range(d):
            mapping[elem * d + k] = slot * d + k
    return f.rename_variables(mapping, F.n_in)


def _commutator_system(As: list[np.ndarray], Bs: list[np.ndarray] | None = None) -> np.ndarray:
    # vec(X A - B X) for X: dom(A) -> dom(B), column-major vec
    Bs = As if Bs is None else Bs
    rows = []
    for A, B in zip(As, Bs):
        rows.append(np.kron(A.T, np.eye(B.shape[0])) - np.kron(np.eye(A.shape[0]), B))
    return np.vstack(rows)


def intertwiner_basis(As: list[np.ndarray], Bs: list[np.ndarray], tol: float | None = None) -> list[np.ndarray]:
    """Basis of ``{X : X A_σ = B_σ X}``, orthonormal in the Frobenius inner product."""
    m, n = Bs[0].shape[0], As[0].shape[0]
    K = sla.null_space(_commutator_system(As, Bs), rcond=tol) if tol else sla.null_space(_commutator_system(As, Bs))
    return [K[:, k].reshape((m, n), order="F") for k in range(K.shape[1])]


def commutant_basis(monoid: Monoid, cell_dim: int = 1) -> list[np.ndarray]:
    """Basis of the matrices commuting with every ``A_σ``."""
    As = rep_matrices(monoid, cell_dim)
    return intertwiner_basis(As, As)


def restricted_rep(As: list[np.ndarray], W: np.ndarray) -> list[np.ndarray]:
    """Matrices of the ``A_σ`` restricted to the invariant subspace spanned by ``W``."""
    Wp = np.linalg.pinv(W)
    return [Wp @ A @ W for A in As]


def _orth(W: np.ndarray) -> np.ndarray:
    return sla.orth(W) if W.size else W


def _projections(subspaces: list[np.ndarray]) -> list[np.ndarray]:
    M = np.hstack(subspaces)
    Minv = np.linalg.inv(M)
    out, k = [], 0
    for W in subspaces:
        d = W.shape[1]
        out.append(W @ Minv[k:k + d])
        k += d
    return out


def _eigen_groups(vals: np.ndarray, tol: float) -> list[list[int]]:
    """Cluster eigenvalues (conjugates together) by single linkage at distance ``tol``."""
    groups: list[list[int]] = []
    for i in np.argsort(vals.real + 1e-3 * np.abs(vals.imag)):
        hits = [g for g in groups
                if any(abs(vals[i] - vals[j]) < tol or abs(vals[i] - np.conj(vals[j])) < tol for j in g)]
        merged = [i] + [j for g in hits for j in g]
        groups = [g for g in groups if g not in hits] + [merged]
    return groups


def _schur_projector(X: np.ndarray, select) -> tuple[np.ndarray, int]:
    """Spectral projector of ``X`` onto the selected eigenvalues, along the others."""
    T, Z, k = sla.schur(X, output="real", sort=select)
    n = X.shape[0]
    if k in (0, n):
        return (np.zeros((n, n)) if k == 0 else np.eye(n)), k
    Y = sla.solve_sylvester(T[:k, :k], -T[k:, k:], -T[:k, k:])
    return Z[:, :k] @ np.hstack([np.eye(k), -Y]) @ Z.T, k


class _Algebra:
    """Orthogonal projection onto the span of a set of matrices (a commutant)."""

    def __init__(self, mats: list[np.ndarray]):
        self.shape = mats[0].shape
        self.K = np.column_stack([M.ravel() for M in mats])

    def project(self, E: np.ndarray) -> np.ndarray:
        return (self.K @ (self.K.T @ E.ravel())).reshape(self.shape)

    def random(self, rng) -> np.ndarray:
        return (self.K @ rng.normal(size=self.K.shape[1])).reshape(self.shape)

    def polish(self, E: np.ndarray, iters: int = 60) -> np.ndarray | None:
        """Newton-type iteration ``E -> 3E² - 2E³`` kept inside the algebra; ``None`` if it diverges."""
        E = self.project(E)
        for _ in range(iters):
            E2 = E @ E
            if np.linalg.norm(E2 - E) < 1e-14 * E.shape[0] * (1 + np.linalg.norm(E)):
                return E
            E = self.project(3 * E2 - 2 * E2 @ E)
            if not np.all(np.isfinite(E)) or np.linalg.norm(E) > 1e6:
                return None
        return E if np.linalg.norm(E @ E - E) < 1e-10 * (1 + np.linalg.norm(E)) else None


def _range(E: np.ndarray) -> np.ndarray:
    r = int(round(np.trace(E)))
    U, _, _ = np.linalg.svd(E)
    return U[:, :r]


def _corner_idempotent(E: np.ndarray, alg: _Algebra, rng: np.random.Generator,
                       starts: int = 20) -> np.ndarray | None:
    """Nontrivial idempotent ``F = EF = FE`` in the commutant, or ``None``."""
    W = _range(E)
    d = W.shape[1]
    if d <= 1:
        return None
    for _ in range(starts):
        Y = E @ alg.random(rng) @ E
        Yr = W.T @ Y @ W
        re = np.sort(np.linalg.eigvals(Yr).real)
        gaps = np.diff(re)
        if gaps.size == 0 or gaps.max() < CLUSTER_TOL * (1 + np.abs(re).max()):
            continue
        thr = 0.5 * (re[np.argmax(gaps)] + re[np.argmax(gaps) + 1])
        Pr, k = _schur_projector(Yr, lambda x, y=0.0: x > thr)
        if not 0 < k < d:
            continue
        if np.linalg.norm(Pr) > 1e4:
            continue  # splitting a defective cluster; not a real gap
        F = alg.polish(W @ Pr @ W.T @ E)
        if F is not None and 0 < round(np.trace(F)) < d:
            return F
    return None


def indecomposable_splitting(monoid: Monoid, cell_dim: int = 1, seed: int = 0,
                             max_iter: int = 100) -> Splitting:
    """Split ``V^n`` into indecomposable invariant summands.

    Summands are ranges of idempotents in the commutant. A random commutant
    element gives the first spectral split; each piece is refined while its
    corner of the commutant (the restricted commutant) holds a nontrivial
    idempotent.
    """
    rng = np.random.default_rng(seed)
    As = rep_matrices(monoid, cell_dim)
    n = As[0].shape[0]
    alg = _Algebra(commutant_basis(monoid, cell_dim))
    # several draws; keep the one whose spectral projectors are best conditioned
    best = None
    for _ in range(10):
        X = alg.random(rng)
        vals = np.linalg.eigvals(X)
        ctol = CLUSTER_TOL * (1 + np.abs(vals).max())
        projs = []
        for g in _eigen_groups(vals, ctol):
            P, _ = _schur_projector(X, lambda x, y=0.0, t=vals[g]: bool(np.min(np.abs(t - (x + 1j * y))) < ctol))
            projs.append(P)
        cond = max(np.linalg.norm(P) for P in projs)
        if best is None or cond < best[0]:
            best = (cond, projs)
        if cond < 10 * n:
            break
    pending = []
    for P in best[1]:
        E = alg.polish(P)
        if E is None:
            raise RuntimeError("spectral idempotent did not converge; eigenvalue clusters too close")
        pending.append(E)
    done: list[np.ndarray] = []
    iters = 0
    while pending:
        iters += 1
        if iters > max_iter:
            raise RuntimeError(f"indecomposable refinement did not converge in {max_iter} iterations")
        E = pending.pop()
        F = _corner_idempotent(E, alg, rng)
        if F is None:
            done.append(E)
        else:
            G = alg.polish(E - F)
            if G is None:
                raise RuntimeError("complementary idempotent did not converge")
            pending += [F, G]
    idem = sorted(done, key=lambda E: (round(np.trace(E)), tuple(np.round(-np.abs(_canonical_basis(_range(E))[:, 0]), 9))))
    subs = [_canonical_basis(_range(E)) for E in idem]
    corner_dims = []
    for E in idem:
        M = np.column_stack([(E @ C @ E).ravel() for C in (alg.K[:, k].reshape(alg.shape) for k in range(alg.K.shape[1]))])
        corner_dims.append(_rank(M, 1e-9))
    info = {"commutant_dims": corner_dims, "seed": seed,
            "idempotent_residual": float(max(np.linalg.norm(E @ E - E) for E in idem)),
            "equivariance_residual": float(max(np.linalg.norm(E @ A - A @ E) for E in idem for A in As))}
    return Splitting(subs, idem, info=info)


def rref(M: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form with partial pivoting; returns nonzero rows and pivot columns."""
    R = np.array(M, dtype=float)
    rows, cols = R.shape
    piv: list[int] = []
    r = 0
    scale = max(1.0, np.abs(R).max(initial=0.0))
    for c in range(cols):
        if r == rows:
            break
        k = r + int(np.argmax(np.abs(R[r:, c])))
        if abs(R[k, c]) <= tol * scale:
            continue
        R[[r, k]] = R[[k, r]]
        R[r] /= R[r, c]
        others = np.arange(rows) != r
        R[others] -= np.outer(R[others, c], R[r])
        piv.append(c)
        r += 1
    return R[:r], piv


def _canonical_basis(W: np.ndarray) -> np.ndarray:
    """Orthonormal basis obtained from the echelon form of ``span W`` (independent of the input basis)."""
    E, _ = rref(_orth(W).T)
    Q, Rq = np.linalg.qr(E.T)
    return Q * np.sign(np.diag(Rq))


def center_hyperbolic_split(J: np.ndarray, tol_re: float | None = None,
                            As: list[np.ndarray] | None = None) -> Splitting:
    """Center subspace (``|Re λ| < tol_re``) and hyperbolic complement of ``J``.

    Eigenvalues are first grouped into clusters, and a cluster counts as
    central when its mean real part is below ``tol_re``: a Jordan block of size
    ``k`` scatters computed eigenvalues by about ``eps**(1/k)``, while the
    cluster mean stays accurate. The subspaces come from an ordered real Schur
    form plus a Sylvester solve. When the representation matrices ``As`` are
    given, the center projector is polished inside their commutant.
    """
    J = np.asarray(J, dtype=float)
    n = J.shape[0]
    if J.shape != (n, n):
        raise ValueError("square matrix expected")
    norm = np.linalg.norm(J, 2) if n else 0.0
    if tol_re is None:
        tol_re = 1e-8 * (1 + norm)
    vals = np.linalg.eigvals(J) if n else np.zeros(0, complex)
    central = np.zeros(n, dtype=bool)
    means = []
    for g in _eigen_groups(vals, JORDAN_RADIUS * (1 + norm)):
        m = vals[g].mean()
        means.append(m)
        central[g] = abs(m.real) < tol_re
    band = [complex(m) for m in means if tol_re <= abs(m.real) < 10 * tol_re]
    warning = None
    if band:
        warning = f"eigenvalue real part within ambiguity band [{tol_re:.3g}, {10 * tol_re:.3g}): {band}"
        warnings.warn(warning, RuntimeWarning, stacklevel=2)

    def select(re, im=0.0):
        return bool(central[np.argmin(np.abs(vals - (re + 1j * im)))])

    Pc, k = _schur_projector(J, select) if n else (np.zeros((0, 0)), 0)
    info = {"tol_re": float(tol_re), "cluster_means": [complex(m) for m in means]}
    if As is not None and 0 < k < n:
        alg = _Algebra(intertwiner_basis(As, As))
        Pc = alg.project(Pc)
        polished = alg.polish(Pc)
        if polished is not None and round(np.trace(polished)) == k:
            Pc = polished
        info["equivariance_residual"] = float(max(np.linalg.norm(Pc @ A - A @ Pc) for A in As))
    elif As is not None:
        info["equivariance_residual"] = 0.0
    Ph = np.eye(n) - Pc
    Wc = _range(Pc) if k else np.zeros((n, 0))
    Wh = _range(Ph) if k < n else np.zeros((n, 0))
    return Splitting([Wc, Wh], [Pc, Ph], [vals[central], vals[~central]], warning, info)


def _schur_eigs(T: np.ndarray) -> np.ndarray:
    n = T.shape[0]
    out = []
    i = 0
    while i < n:
        if i + 1 < n and abs(T[i + 1, i]) > 0:
            out.extend(np.linalg.eigvals(T[i:i + 2, i:i + 2]))
            i += 2
        else:
            out.append(T[i, i] + 0j)
            i += 1
    return np.array(out)


def subspace_intersection(U: np.ndarray, W: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis of ``span U ∩ span W``."""
    if U.shape[1] == 0 or W.shape[1] == 0:
        return np.zeros((U.shape[0], 0))
    K = sla.null_space(np.hstack([U, -W]), rcond=tol)
    if K.shape[1] == 0:
        return np.zeros((U.shape[0], 0))
    return _orth(U @ K[:U.shape[1]])


def _rank(M: np.ndarray, tol: float) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def splitting_synchrony_check(split1: Splitting, split2: Splitting, P: Partition, monoid: Monoid,
                              cell_dim: int = 1, seed: int = 0, tol: float = 1e-9) -> bool:
    """Whether an equivariant isomorphism carries ``Δ_P ∩ W_j`` onto ``Δ_P ∩ W'_j`` for all ``j``."""
    if split1.dims != split2.dims:
        raise ValueError(f"splittings not isomorphic: dims {split1.dims} vs {split2.dims}")
    rng = np.random.default_rng(seed)
    As = rep_matrices(monoid, cell_dim)
    n = As[0].shape[0]
    Q = np.zeros((n, n))
    for W1, W2, P1 in zip(split1.subspaces, split2.subspaces, split1.projections):
        if W1.shape[1] == 0:
            continue
        basis = intertwiner_basis(restricted_rep(As, W1), restricted_rep(As, W2))
        if not basis:
            raise ValueError("splittings not isomorphic: no intertwiner between summands")
        T = sum(c * B for c, B in zip(rng.normal(size=len(basis)), basis))
        if _rank(T, 1e-8) < T.shape[0]:
            raise ValueError("splittings not isomorphic: intertwiner is singular")
        Q += W2 @ T @ np.linalg.pinv(W1) @ P1
    S = synchrony_basis(P, cell_dim).basis
    for W1, W2 in zip(split1.subspaces, split2.subspaces):
        D1 = subspace_intersection(S, W1, tol)
        D2 = subspace_intersection(S, W2, tol)
        if D1.shape[1] != D2.shape[1]:
            return False
        if D1.shape[1] == 0:
            continue
        img = Q @ D1
        if _rank(img, tol) != D1.shape[1]:
            return False
        # image must sit inside Δ_P ∩ W'_j
        if np.linalg.norm(img - D2 @ (D2.T @ img)) > tol * (1 + np.linalg.norm(img)) * 1e3:
            return False
    return True


def eigen_multiplicity(J: np.ndarray, value: float, radius: float = 1e-7,
                       rank_tol: float = 1e-8) -> tuple[int, int]:
    """Algebraic (eigenvalue cluster size) and geometric (nullity) multiplicity of ``value``."""
    vals = np.linalg.eigvals(J)
    alg = int(np.sum(np.abs(vals - value) <= radius))
    s = np.linalg.svd(J - value * np.eye(J.shape[0]), compute_uv=False)
    geo = int(np.sum(s <= rank_tol * max(1.0, s[0])))
    return alg, geo
