"""End-to-end analysis of one network and one response draw."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bifurcation import (
    Branch,
    branch_point_at,
    default_lambda_grid,
    extract_model_coefficients,
    find_branches,
    predictions,
)
from .cm_reduce import (
    AugmentedSystem,
    CenterManifoldJet,
    ReducedField,
    augment,
    embedding_partition,
    reduced_field,
    restrict_to_synchrony,
    solve_cm_jet,
)
from .draws import draw_response
from .errors import DegenerateDrawError, NumericalFailure
from .network import Monoid, NetworkFile, NetworkSpec, builtin_network, complete_monoid, injectivity_witness
from .polyalg import PolyField
from .simulate import T_MAX, network_vector_field, relax_to_steady
from .synchrony import Partition, enumerate_robust

__all__ = ["Analysis", "analyze", "cross_validate", "conditioning_margin", "scale_margin", "network_rows",
           "DEFAULT_MARGIN", "DEFAULT_SCALE_MARGIN"]

DEFAULT_MARGIN = 0.25
DEFAULT_SCALE_MARGIN = 0.02


def network_rows(monoid: Monoid, p: int = 0) -> list[int]:
    """For each original cell ``q``, an element ``σ`` with ``σ(p) = q`` (left inverse of ``π_p``)."""
    ok, orbit = injectivity_witness(p, monoid)
    if not ok:
        raise ValueError(f"cell {p + 1} does not see every cell; orbit {sorted(q + 1 for q in orbit)}")
    return [next(j for j, s in enumerate(monoid.elements) if s(p) == q) for q in range(monoid.N)]


def conditioning_margin(coeffs: dict) -> float:
    """Smallest nondegeneracy quantity relative to the largest model coefficient.

    Branch asymptotics hold for ``|λ|`` small against these ratios, so draws
    with a small margin need a smaller λ window than the default one.
    """
    if coeffs["network"] in ("A", "B"):
        small = [coeffs["C"], coeffs["a1"], coeffs["a3"], coeffs["a1"] + coeffs["a2"]]
        big = [coeffs["C"], coeffs["a1"], coeffs["a2"], coeffs["a3"]]
    else:
        a1, a2 = coeffs["a1"], coeffs["a2"]
        small = [coeffs["C"], a1, a2, coeffs["a4"], a1 + a2, 2 * a1 + a2]
        big = [coeffs["C"], coeffs["a1"], coeffs["a2"], coeffs["a3"], coeffs["a4"]]
    return float(min(map(abs, small)) / max(map(abs, big)))


def _nondegeneracy(coeffs: dict) -> float:
    a1, a2 = coeffs["a1"], coeffs["a2"]
    if coeffs["network"] in ("A", "B"):
        return float(min(abs(coeffs["C"]), abs(a1), abs(coeffs["a3"]), abs(a1 + a2)))
    return float(min(abs(coeffs["C"]), abs(a1), abs(a2), abs(coeffs["a4"]), abs(a1 + a2), abs(2 * a1 + a2)))


def scale_margin(coeffs: dict, restricted: ReducedField) -> float:
    """Smallest nondegeneracy quantity relative to the largest Taylor coefficient of the
    restricted field: large higher-order terms shrink the window where leading
    terms dominate, and bring distant roots close to the origin. Only terms up
    to degree 3 enter, so the value does not depend on the jet order."""
    big = max(float(np.abs(c).max()) for e, c in restricted.R.terms.items() if sum(e) <= 3)
    return _nondegeneracy(coeffs) / big


@dataclass
class Analysis:
    name: str
    network: NetworkFile
    monoid: Monoid
    f: PolyField
    seed: int | None
    order: int
    aug: AugmentedSystem
    jet: CenterManifoldJet
    reduced: ReducedField
    restricted: ReducedField
    partition: Partition
    coeffs: dict | None
    branches: list[Branch] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    draw_attempts: int = 1

    @property
    def spec(self) -> NetworkSpec:
        """The original cells with every monoid element as an input slot, matching ``f``."""
        s = self.network.spec
        return NetworkSpec(s.N, self.monoid.elements, s.cell_dim, s.name)

    def to_network(self, P: np.ndarray) -> np.ndarray:
        return self.restricted.lift(P)[:, network_rows(self.monoid)]


def _reduce(monoid, f, order, tol_re):
    aug = augment(monoid, f, tol_re)
    jet = solve_cm_jet(aug, order)
    red = reduced_field(aug, jet)
    P = embedding_partition(monoid)
    return aug, jet, red, P, restrict_to_synchrony(red, P)


def analyze(network: str | NetworkFile, seed: int | None = 0, order: int = 3, *,
            f: PolyField | None = None, lambdas=None, tol_re: float | None = None,
            margin: float | None = DEFAULT_MARGIN, scale: float | None = DEFAULT_SCALE_MARGIN,
            max_draws: int = 500, response_degree: int = 3,
            branches: bool = True, jobs: int = 1) -> Analysis:
    """Reduce ``network`` for a response and optionally compute its branches.

    Without an explicit ``f`` a response is drawn from ``seed``; draws whose
    coefficient margin is below ``margin`` or whose scale margin is below
    ``scale`` are replaced by the next draw of the same stream (``None``
    disables the corresponding test). The draw depends on ``seed`` and
    ``response_degree`` only, so raising ``order`` refines the same system.
    """
    nf = builtin_network(network) if isinstance(network, str) else network
    name = network if isinstance(network, str) else (nf.spec.name or "network")
    M = complete_monoid(nf.spec)
    rng = np.random.default_rng(seed)
    attempts = 0
    while True:
        attempts += 1
        ff = f if f is not None else draw_response(M, rng, response_degree)
        aug, jet, red, P, rs = _reduce(M, ff, order, tol_re)
        try:
            coeffs = extract_model_coefficients(red)
        except ValueError:
            coeffs = None               # not one of the model frames
        except DegenerateDrawError:
            if f is not None or attempts >= max_draws:
                raise
            continue
        if f is not None or coeffs is None or (
                (margin is None or conditioning_margin(coeffs) >= margin)
                and (scale is None or scale_margin(coeffs, rs) >= scale)):
            break
        if attempts >= max_draws:
            raise DegenerateDrawError(f"no well-conditioned draw in {max_draws} tries")
    if coeffs is not None:
        coeffs["margin"] = conditioning_margin(coeffs)
        coeffs["scale_margin"] = scale_margin(coeffs, rs)
        coeffs["predictions"] = predictions(coeffs)
    an = Analysis(name, nf, M, ff, seed, order, aug, jet, red, rs, P, coeffs, draw_attempts=attempts)
    if branches:
        parts = enumerate_robust(nf.spec)
        lams = default_lambda_grid() if lambdas is None else lambdas
        an.branches, an.diagnostics = find_branches(rs, lams, to_network=an.to_network, partitions=parts,
                                                     jobs=jobs)
    return an


def cross_validate(an: Analysis, lambdas=(-5e-3, 5e-3), seed: int = 0, t_max: float = T_MAX) -> list[dict]:
    """Check reduced-model branch points against the full network flow.

    Every branch point at each ``λ`` is lifted to the original cells. Points
    that are stable for the reduced field are perturbed and relaxed under the
    network ODE; the record holds the distance between the relaxed and the
    predicted state. The perturbation is ``0.1 · d · |Re μ|_min / ‖J‖`` in a
    random direction, where ``d`` is the distance to the nearest other branch
    point: near the bifurcation ``J`` is close to a Jordan block, so transient
    growth of order ``‖J‖ / |Re μ|`` must not carry the start across a saddle.
    """
    rng = np.random.default_rng(seed)
    spec = an.spec
    out = []
    for lam in lambdas:
        side = "neg" if lam < 0 else "pos"
        pts = []
        for b in an.branches:
            if side in b.sides:
                p = branch_point_at(an.restricted, b, lam)
                pts.append((b, p, an.to_network(np.append(p, lam)[None, :])[0]))
        _, jac = network_vector_field(spec, an.f, lam)
        for k, (b, p, x) in enumerate(pts):
            J = jac(x)
            ev = np.linalg.eigvals(J)
            red_ev = np.linalg.eigvals(an.restricted.jacobian(p, lam))
            rec = {"branch": b.label, "kind": b.kind, "lambda": float(lam), "predicted": x.tolist(),
                   "reduced_eigenvalues": red_ev, "network_eigenvalues": ev,
                   "reduced_stable": bool(np.all(red_ev.real < 0))}
            if rec["reduced_stable"]:
                others = [np.linalg.norm(x - y) for j, (_, _, y) in enumerate(pts) if j != k]
                d = min(others) if others else np.linalg.norm(x) + abs(lam)
                size = 0.1 * d * np.abs(ev.real).min() / np.linalg.norm(J, 2)
                u = rng.standard_normal(len(x))
                x0 = x + size * u / np.linalg.norm(u)
                try:
                    ss = relax_to_steady(spec, an.f, x0, lam, T_max=t_max)
                    rec.update(relaxed=ss.point.tolist(), error=float(np.abs(ss.point - x).max()),
                               time=ss.time, perturbation=float(size))
                except NumericalFailure as exc:
                    rec.update(relaxed=None, error=float("inf"), failure=str(exc), perturbation=float(size))
            out.append(rec)
    return out
