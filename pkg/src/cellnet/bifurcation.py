"""Steady-state branches of reduced fields: solving, linking, fitting, stability.

Coefficient extraction works in the left-zero frame produced by
``cm_reduce.center_frame``. With ``ξ = (X1, X2, X3)`` (four-element monoid)
the first reduced component has the form ``X2·G + X1·H(X1, X3, λ)`` with
``G = C + …`` and ``H = a1 X1 + a2 X3 + a3 λ + …``. For the five-element
monoid, ``ξ = (X1, X2, X3, X5)`` and the first component is
``X1·G(X1, X3, X5, λ) + X2·H`` with ``G = a1 X1 + a2 X3 + a3 X5 + a4 λ`` and
``H = C + …``. The three-element monoid is the first case without ``X3``.
"""
from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .cm_reduce import ReducedField
from .errors import DegenerateDrawError
from .polyalg import PolyField
from .synchrony import Partition

__all__ = [
    "GENERICITY_TOL",
    "Branch",
    "default_lambda_grid",
    "newton_solve",
    "find_branches",
    "fit_exponent",
    "branch_stability",
    "branch_point_at",
    "extract_model_coefficients",
    "predictions",
    "stability_relations",
    "sign_pattern",
    "branch_table",
]

GENERICITY_TOL = 1e-6
STEADY_TOL = 1e-11
DEDUPE_TOL = 1e-9
START_SCALES = (0.1, 1.0, 10.0)
START_EXPONENTS = (0.5, 1.0, 2.0)


@dataclass
class Branch:
    """Steady states ``λ -> x(λ)`` of a reduced field, ordered by ``λ``."""

    lambdas: np.ndarray
    points: np.ndarray                      # reduced coordinates, one row per λ
    states: np.ndarray                      # lifted network states
    synchrony: Partition | None = None
    kind: str = ""
    exponents: dict = field(default_factory=dict)       # side -> per-coordinate fits
    state_exponent: dict = field(default_factory=dict)  # side -> fit of the state norm
    eig_signs: dict = field(default_factory=dict)       # side -> sign pattern
    eigenvalues: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def sides(self) -> list[str]:
        out = []
        if np.any(self.lambdas < 0):
            out.append("neg")
        if np.any(self.lambdas > 0):
            out.append("pos")
        return out

    def side(self, name: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        mask = self.lambdas < 0 if name == "neg" else self.lambdas > 0
        return self.lambdas[mask], self.points[mask], self.states[mask]

    @property
    def label(self) -> str:
        return self.synchrony.label() if self.synchrony is not None else "?"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "synchrony": self.label,
            "sides": self.sides,
            "exponents": self.exponents,
            "state_exponent": self.state_exponent,
            "eig_signs": self.eig_signs,
            "n_points": int(len(self.lambdas)),
        }


def default_lambda_grid(lo: float = 1e-4, hi: float = 1e-2, per_side: int = 20) -> np.ndarray:
    pos = np.logspace(np.log10(lo), np.log10(hi), per_side)
    return np.concatenate([-pos[::-1], pos])


def _starts(m: int, lam: float) -> np.ndarray:
    vals = [0.0] + [s * c * abs(lam) ** e for e in START_EXPONENTS for c in START_SCALES for s in (1, -1)]
    vals = np.unique(np.array(vals))
    grids = np.meshgrid(*([vals] * m), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1) if m else np.zeros((1, 0))


def newton_solve(R: ReducedField, lam: float, starts: np.ndarray, tol: float = STEADY_TOL,
                 max_iter: int = 40) -> np.ndarray:
    """Batched Newton on ``R(·, λ) = 0``; returns the converged roots (unsorted, with repeats)."""
    m = R.dim
    if m == 0:
        return np.zeros((1, 0))
    X = np.array(starts, dtype=float)
    # field and Jacobian columns evaluated in one pass over the monomials
    FJ = PolyField.stack([R.R] + [R.R.derivative(i) for i in range(m)])
    alive = np.ones(len(X), dtype=bool)
    for _ in range(max_iter):
        if not alive.any():
            break
        Xa = X[alive]
        P = np.column_stack([Xa, np.full(len(Xa), lam)])
        V = FJ(P)
        F = V[:, :m]
        Jm = V[:, m:].reshape(len(Xa), m, m).transpose(0, 2, 1)   # (S, m, m)
        try:
            step = np.linalg.solve(Jm, F[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.einsum("sij,sj->si", np.linalg.pinv(Jm), F)
        Xa = Xa - step
        bad = ~np.isfinite(Xa).all(axis=1) | (np.abs(Xa).max(axis=1, initial=0) > 1e3)
        X[alive] = np.where(bad[:, None], np.nan, Xa)
        idx = np.flatnonzero(alive)
        alive[idx[bad]] = False
        small = np.abs(step).max(axis=1, initial=0) <= 1e-15 * (1 + np.abs(Xa).max(axis=1, initial=0))
        alive[idx[small & ~bad]] = False
    ok = np.isfinite(X).all(axis=1)
    X = X[ok]
    if len(X) == 0:
        return X
    res = np.abs(R.R(np.column_stack([X, np.full(len(X), lam)]))).max(axis=1, initial=0)
    return X[res <= tol]


def _dedupe(X: np.ndarray, tol: float = DEDUPE_TOL) -> np.ndarray:
    if len(X) == 0:
        return X
    X = X[np.lexsort(X.T[::-1])]
    D = np.abs(X[:, None, :] - X[None, :, :]).max(axis=2, initial=0.0)
    # keep a root unless an earlier one lies within tol (converged clusters are tight)
    dup = np.triu(D <= tol, k=1).any(axis=0)
    return X[~dup]


def _predict(track: list[tuple[float, np.ndarray]], lam: float) -> np.ndarray:
    l1, x1 = track[-1]
    r = abs(lam) / abs(l1)
    if len(track) < 2:
        return x1 * r
    l0, x0 = track[-2]
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.log(np.abs(x1) / np.abs(x0)) / np.log(abs(l1) / abs(l0))
    p = np.where(np.isfinite(p) & (np.sign(x1) == np.sign(x0)), np.clip(p, 0.0, 3.0), 1.0)
    return x1 * r ** p


def _link(lams: np.ndarray, roots: list[np.ndarray], max_cost: float = 0.5) -> list[list[tuple[float, np.ndarray]]]:
    tracks: list[list[tuple[float, np.ndarray]]] = []
    order = np.argsort(np.abs(lams))
    for k in order:
        lam, X = lams[k], roots[k]
        if not tracks:
            tracks = [[(lam, x)] for x in X]
            continue
        preds = np.array([_predict(t, lam) for t in tracks])
        used = set()
        if len(X):
            cost = np.zeros((len(tracks), len(X)))
            for i, p in enumerate(preds):
                d = np.linalg.norm(X - p, axis=1)
                cost[i] = d / (np.linalg.norm(p) + np.linalg.norm(X, axis=1) + 1e-300)
                cost[i][d <= 1e-14] = 0.0
            rows, cols = linear_sum_assignment(cost)
            for i, j in zip(rows, cols):
                if cost[i, j] < max_cost:
                    tracks[i].append((lam, X[j]))
                    used.add(j)
        for j in range(len(X)):
            if j not in used:
                tracks.append([(lam, X[j])])
    return tracks


def fit_exponent(lams, values, zero_tol: float = 1e-13, correction: bool = True) -> tuple[float, float, float]:
    """Log-log least-squares slope ``e`` of ``|v|`` against ``|λ|``; returns ``(e, c, rms residual)``.

    With ``correction`` the regression is ``log|v| = log c + e log|λ| + κ|λ|``:
    the extra column absorbs the first analytic correction to ``c|λ|^e``,
    which otherwise tilts the slope over a two-decade window. The coefficient
    ``c`` is then read at ``λ -> 0``: when the slope is within 0.1 of a
    multiple of 1/2 it is snapped, and ``|v| / |λ|^e`` is regressed on
    ``(1, |λ|, |λ|^2)``. Coordinates that vanish identically are reported
    with exponent ``inf``.
    """
    lams = np.abs(np.asarray(lams, dtype=float))
    v = np.abs(np.asarray(values, dtype=float))
    if len(lams) < 8:
        raise ValueError(f"too few points for an exponent fit ({len(lams)} < 8)")
    if np.all(v <= zero_tol):
        return float("inf"), 0.0, 0.0
    if np.any(v <= zero_tol):
        raise ValueError("coordinate vanishes at some but not all points")
    cols = [np.ones_like(lams), np.log(lams)] + ([lams] if correction else [])
    A = np.column_stack(cols)
    sol, *_ = np.linalg.lstsq(A, np.log(v), rcond=None)
    resid = np.log(v) - A @ sol
    e = float(sol[1])
    coeff = float(np.exp(sol[0]))
    snapped = round(2 * e) / 2
    if abs(e - snapped) <= 0.1 and snapped > 0:
        ratio = v / lams ** snapped
        B = np.column_stack([np.ones_like(lams), lams, lams ** 2])
        coeff = float(np.linalg.lstsq(B, ratio, rcond=None)[0][0])
    return e, coeff, float(np.sqrt(np.mean(resid ** 2)))


def sign_pattern(eigs: np.ndarray, scale: float = 1.0) -> str:
    """Signs of real parts, ``+`` first; ``0`` marks an indeterminate sign."""
    thr = 1e-12 * scale
    s = ["0" if abs(z.real) <= thr else ("+" if z.real > 0 else "-") for z in np.atleast_1d(eigs)]
    return "".join(sorted(s, key="+0-".index))


def branch_stability(R: ReducedField, branch: Branch) -> dict:
    """Eigenvalues of ``D_xR`` along the branch and the dominant sign pattern per side."""
    eigs = []
    pats: dict[str, list[str]] = {"neg": [], "pos": []}
    for lam, x in zip(branch.lambdas, branch.points):
        J = R.jacobian(x, lam)
        ev = np.linalg.eigvals(J) if J.size else np.zeros(0)
        eigs.append(ev)
        pats["neg" if lam < 0 else "pos"].append(sign_pattern(ev, 1 + np.abs(J).max(initial=0)))
    out = {}
    for side, ps in pats.items():
        if ps:
            pat, cnt = Counter(ps).most_common(1)[0]
            out[side] = pat
            out[side + "_consistent"] = cnt == len(ps)
            out[side + "_indeterminate"] = any("0" in p for p in ps)
    branch.eigenvalues = eigs
    branch.eig_signs = {k: out[k] for k in ("neg", "pos") if k in out}
    return out


def _lift(R: ReducedField, lams: np.ndarray, X: np.ndarray, to_network) -> np.ndarray:
    P = np.column_stack([X, lams])
    if to_network is not None:
        return to_network(P)
    if R.lift is not None:
        return R.lift(P)
    return X


def _label(states: np.ndarray, partitions: list[Partition] | None) -> Partition:
    N = states.shape[1]
    tol = 1e-8 * (1 + np.linalg.norm(states, axis=1))
    eq = [[bool(np.all(np.abs(states[:, i] - states[:, j]) <= tol)) for j in range(N)] for i in range(N)]
    labels = list(range(N))
    for i in range(N):
        for j in range(i):
            if eq[i][j] and labels[i] == i:
                labels[i] = labels[j]
    P0 = Partition(tuple(labels))
    if not partitions:
        return P0
    cands = [P for P in partitions if P.refines(P0)]
    return min(cands, key=lambda P: (P.r, P.class_of))


def _kind(P: Partition) -> str:
    if P.is_full():
        return "full"
    if P.is_discrete():
        return "none"
    return "partial"


def find_branches(R: ReducedField, lambdas=None, *, to_network=None,
                  partitions: list[Partition] | None = None, min_points: int = 8,
                  tol: float = STEADY_TOL, jobs: int = 1) -> tuple[list[Branch], dict]:
    """Multistart Newton over a λ grid, linked into branches emanating from the origin.

    ``to_network`` maps rows ``(x, λ)`` to network states used for synchrony
    labels and state-norm fits; ``partitions`` are the balanced partitions of
    those network cells. ``jobs > 1`` solves the λ values on a thread pool;
    results do not depend on it. Returns the branches and solver diagnostics.
    """
    lams = default_lambda_grid() if lambdas is None else np.asarray(lambdas, dtype=float)
    lams = lams[lams != 0]
    m = R.dim
    diag = {"gaps": [], "dropped_tracks": 0, "roots_per_lambda": {}}
    per_side: dict[str, list[list[tuple[float, np.ndarray]]]] = {}
    for side, mask in (("neg", lams < 0), ("pos", lams > 0)):
        ls = lams[mask]
        roots = []

        def solve(lam):
            return _dedupe(newton_solve(R, lam, _starts(m, lam), tol))

        if jobs > 1 and len(ls) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                solved = list(pool.map(solve, ls))
        else:
            solved = [solve(lam) for lam in ls]
        for lam, X in zip(ls, solved):
            if len(X) == 0:
                diag["gaps"].append(float(lam))
            diag["roots_per_lambda"][float(lam)] = int(len(X))
            roots.append(X)
        per_side[side] = _link(ls, roots) if len(ls) else []
    inner = {}
    for side, mask in (("neg", lams < 0), ("pos", lams > 0)):
        mags = np.sort(np.abs(lams[mask]))
        inner[side] = mags[min(2, len(mags) - 1)] if len(mags) else 0.0
    candidates: dict[str, list[Branch]] = {"neg": [], "pos": []}
    for side, tracks in per_side.items():
        for t in tracks:
            if len(t) < min_points:
                diag["dropped_tracks"] += 1
                continue
            t = sorted(t, key=lambda p: p[0])
            L = np.array([p[0] for p in t])
            X = np.array([p[1] for p in t]).reshape(len(t), m)
            norms = np.linalg.norm(X, axis=1)
            if not _fittable(norms):
                diag["dropped_tracks"] += 1
                continue
            # branches born at the origin persist down to the innermost grid values
            if np.abs(L).min() > inner[side]:
                diag["dropped_tracks"] += 1
                continue
            if norms.max(initial=0) > 1e-13:
                e, _, _ = fit_exponent(L, norms, correction=False)
                if e < 0.25:
                    diag["dropped_tracks"] += 1
                    continue
            S = _lift(R, L, X, to_network)
            candidates[side].append(Branch(L, X, S))
    branches: list[Branch] = []
    for side in candidates:
        for b in candidates[side]:
            b.synchrony = _label(b.states, partitions)
    used_pos = set()
    for b in candidates["neg"]:
        same = [i for i, c in enumerate(candidates["pos"]) if c.synchrony == b.synchrony]
        mates = [c for c in candidates["neg"] if c.synchrony == b.synchrony]
        if len(same) == 1 and len(mates) == 1 and same[0] not in used_pos:
            c = candidates["pos"][same[0]]
            used_pos.add(same[0])
            b = Branch(np.concatenate([b.lambdas, c.lambdas]), np.vstack([b.points, c.points]),
                       np.vstack([b.states, c.states]), b.synchrony)
        branches.append(b)
    branches += [c for i, c in enumerate(candidates["pos"]) if i not in used_pos]
    for b in branches:
        b.kind = _kind(b.synchrony)
        # relabel: the union of both sides may be less synchronous than each half
        b.synchrony = _label(b.states, partitions)
        b.kind = _kind(b.synchrony)
        for side in b.sides:
            L, X, S = b.side(side)
            if len(L) < min_points:
                continue
            b.exponents[side] = {name: fit_exponent(L, X[:, i]) for i, name in enumerate(R.coord_names)
                                 if _fittable(X[:, i])}
            b.state_exponent[side] = fit_exponent(L, np.linalg.norm(S, axis=1))
        branch_stability(R, b)
    branches.sort(key=lambda b: (["full", "partial", "none"].index(b.kind), b.synchrony.class_of,
                                 b.lambdas[0], float(b.points[-1].sum())))
    _pair_fits(branches, R.coord_names, min_points)
    return branches, diag


def _pair_fits(branches: list[Branch], names: list[str], min_points: int) -> None:
    """Fit half-differences of one-sided branch pairs born together (``x± = m ± d``).

    The common part ``m`` carries the higher-order drift, so the spread ``d``
    isolates the leading power of the pair.
    """
    groups: dict = {}
    for i, b in enumerate(branches):
        if len(b.sides) == 1:
            groups.setdefault((b.synchrony, b.sides[0]), []).append(i)
    for (_, side), idx in groups.items():
        if len(idx) != 2:
            continue
        b1, b2 = branches[idx[0]], branches[idx[1]]
        common, i1, i2 = np.intersect1d(b1.lambdas, b2.lambdas, return_indices=True)
        if len(common) < min_points:
            continue
        dX = 0.5 * (b1.points[i1] - b2.points[i2])
        dS = 0.5 * (b1.states[i1] - b2.states[i2])
        fits = {name: fit_exponent(common, dX[:, k]) for k, name in enumerate(names) if _fittable(dX[:, k])}
        pair = {"side": side, "exponents": fits, "state_exponent": fit_exponent(common, np.linalg.norm(dS, axis=1))}
        b1.info["pair"] = dict(pair, partner=idx[1])
        b2.info["pair"] = dict(pair, partner=idx[0])


def _fittable(v: np.ndarray) -> bool:
    a = np.abs(v)
    return bool(np.all(a <= 1e-13) or np.all(a > 1e-13))


def branch_point_at(R: ReducedField, branch: Branch, lam: float) -> np.ndarray:
    """Newton continuation of ``branch`` to parameter value ``lam`` (same side)."""
    L = branch.lambdas
    same = np.flatnonzero(np.sign(L) == np.sign(lam))
    if len(same) == 0:
        raise ValueError("branch has no points on that side")
    k = same[np.argmin(np.abs(np.log(np.abs(L[same]) / abs(lam))))]
    track = [(L[k], branch.points[k])]
    j = k + (1 if abs(L[min(k + 1, len(L) - 1)]) < abs(L[k]) else -1)
    if 0 <= j < len(L) and np.sign(L[j]) == np.sign(lam):
        track.insert(0, (L[j], branch.points[j]))
    x0 = _predict(track, lam)
    X = newton_solve(R, lam, x0[None, :])
    if len(X) == 0:
        raise ValueError(f"Newton failed to continue the branch to λ={lam}")
    return X[0]


# -- model coefficients ------------------------------------------------------------------

def _coeff(R: ReducedField, comp: int, **powers) -> float:
    names = list(R.coord_names) + ["lam"]
    e = [0] * len(names)
    for k, p in powers.items():
        e[names.index(k)] = p
    return float(R.R.coeff(tuple(e))[comp])


def _frame_tag(R: ReducedField) -> str:
    names = tuple(R.coord_names)
    tags = {("X1", "X2"): "A", ("X1", "X2", "X3"): "B", ("X1", "X2", "X3", "X5"): "C"}
    if names not in tags:
        raise ValueError(f"reduced field is not in a recognised model frame (coordinates {names})")
    return tags[names]


def extract_model_coefficients(R: ReducedField, network_tag: str | None = None,
                               tol: float = GENERICITY_TOL) -> dict:
    """Read ``C`` and the ``a_i`` from Taylor coefficients of the first reduced component.

    The returned dict also carries ``checks``: residuals of the structural
    relations implied by equivariance in the frame (they should vanish).
    """
    tag = network_tag or _frame_tag(R)
    if tag not in ("A", "B", "C"):
        raise ValueError(f"unknown network tag {tag!r}")
    if _frame_tag(R) != tag:
        raise ValueError(f"frame {R.coord_names} does not match network {tag}")
    c = {}
    checks = {}
    if tag in ("A", "B"):
        c["C"] = _coeff(R, 0, X2=1)
        c["a1"] = _coeff(R, 0, X1=2)
        c["a2"] = _coeff(R, 0, X1=1, X3=1) if tag == "B" else 0.0
        c["a3"] = _coeff(R, 0, X1=1, lam=1)
        checks["R1[X1]"] = _coeff(R, 0, X1=1)
        checks["R2[X2^2]-a1"] = _coeff(R, 1, X2=2) - c["a1"]
        checks["R2[X2 lam]-a3"] = _coeff(R, 1, X2=1, lam=1) - c["a3"]
        if tag == "B":
            checks["R2[X2X3]-a2"] = _coeff(R, 1, X2=1, X3=1) - c["a2"]
        need = {"C": c["C"], "a1": c["a1"], "a3": c["a3"], "a1+a2": c["a1"] + c["a2"]}
    else:
        c["C"] = _coeff(R, 0, X2=1)
        c["a1"] = _coeff(R, 0, X1=2)
        c["a2"] = _coeff(R, 0, X1=1, X3=1)
        c["a3"] = _coeff(R, 0, X1=1, X5=1)
        c["a4"] = _coeff(R, 0, X1=1, lam=1)
        checks["R1[X1]"] = _coeff(R, 0, X1=1)
        need = {"C": c["C"], "a1": c["a1"], "a2": c["a2"], "a4": c["a4"], "a1+a2": c["a1"] + c["a2"]}
    bad = [f"|{k}| < {tol:g}" for k, v in need.items() if abs(v) < tol]
    if bad:
        raise DegenerateDrawError(bad)
    c["checks"] = checks
    c["network"] = tag
    return c


def predictions(coeffs: dict) -> dict:
    """Leading-order branch formulas and stability data implied by the model coefficients."""
    tag = coeffs["network"]
    C, a1, a2 = coeffs["C"], coeffs["a1"], coeffs["a2"]
    if tag in ("A", "B"):
        a3 = coeffs["a3"]
        r = C * a3 / (a1 * (a1 + a2))
        return {
            "full": {"exponent": 1.0, "eig_slope": a3},
            "partial": {"X1": -a3 / a1, "exponent": 1.0},
            "none": {"X1_coeff": float(np.sqrt(abs(r))), "X1_exponent": 0.5,
                     "X2": -a3 / (a1 + a2), "side": "pos" if r > 0 else "neg"},
        }
    a4 = coeffs["a4"]
    return {
        "full": {"exponent": 1.0, "eig_slope": a4},
        "partial": {"X1": -a4 / (a1 + a2), "exponent": 1.0,
                    "eig_slopes": (-a4, a1 * a4 / (a1 + a2))},
        "none": {"X1": -a4 / a2, "X2_coeff": -a4 ** 2 * a1 / (C * a2 ** 2), "X2_exponent": 2.0,
                 "trace_slope": -a4 * (2 * a1 + a2) / a2, "det_slope": a4 ** 2 * a1 / a2},
        "regime": c_regime(a1, a2),
    }


def c_regime(a1: float, a2: float) -> str:
    """Which branch inherits stability from the full-sync branch (five-element frame)."""
    if a1 / (a1 + a2) < 0:
        return "partial"
    if a1 / a2 > 0:
        return "none"
    return "neither"


def stability_relations(R: ReducedField, branch: Branch, coeffs: dict, lam: float = 1e-3) -> dict:
    """Trace and determinant of ``D_xR`` on the non-synchronous branch at ``±lam`` vs predictions."""
    pred = predictions(coeffs)["none"]
    out = {}
    for s in branch.sides:
        l = lam if s == "pos" else -lam
        x = branch_point_at(R, branch, l)
        J = R.jacobian(x, l)
        tr, det = float(np.trace(J)), float(np.linalg.det(J))
        out[s] = {"lambda": l, "trace": tr, "det": det,
                  "trace_pred": pred["trace_slope"] * l, "det_pred": pred["det_slope"] * l * l,
                  "trace_rel_err": abs(tr / (pred["trace_slope"] * l) - 1),
                  "det_rel_err": abs(det / (pred["det_slope"] * l * l) - 1)}
    return out


def branch_table(branches: list[Branch]) -> list[dict]:
    """One row per branch: kind, synchrony, state-norm exponent per side and sign patterns."""
    rows = []
    for b in branches:
        rows.append({
            "kind": b.kind,
            "synchrony": b.label,
            "exponent": {s: round(v[0], 3) for s, v in b.state_exponent.items()},
            "neg": b.eig_signs.get("neg", ""),
            "pos": b.eig_signs.get("pos", ""),
        })
    return rows
