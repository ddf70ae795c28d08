"""One test per acceptance criterion, at the stated tolerances."""
import subprocess
import sys

import numpy as np
import pytest

from cellnet.bifurcation import stability_relations
from cellnet.cm_reduce import (
    equivariant_field_space,
    linear_part_identities,
    psi_equivariance_residual,
    realize_response,
    reduce,
    tangency_residual,
)
from cellnet.draws import draw_response
from cellnet.network import (
    InputMap,
    NetworkSpec,
    admissible_field,
    fundamental_network,
    response_arity,
)
from cellnet.pipeline import cross_validate
from cellnet.polyalg import PolyField
from cellnet.representation import eigen_multiplicity, is_equivariant, response_from_equivariant
from cellnet.simulate import integrate, synchrony_deviation
from cellnet.synchrony import Partition, all_partitions, enumerate_robust, invariance_oracle, is_robust, random_response

from conftest import cached_analysis

SEEDS = range(20)

# cell j of the fundamental network reads these cells in its input slots (1-based)
B_TILDE = [[1, 2, 3, 4], [2, 4, 3, 4], [3, 4, 3, 4], [4, 4, 3, 4]]
C_TILDE = [[1, 2, 3, 4, 5], [2, 4, 3, 4, 5], [3, 5, 3, 4, 5], [4, 4, 3, 4, 5], [5, 4, 3, 4, 5]]


def spec_from_rows(rows):
    N, n = len(rows), len(rows[0])
    maps = [InputMap.from_one_based([rows[p][i] for p in range(N)], f"s{i + 1}") for i in range(n)]
    return NetworkSpec(N, maps)


def random_network(N, n_maps, rng):
    maps = [InputMap.identity(N)]
    maps += [InputMap(tuple(int(v) for v in rng.integers(0, N, N)), f"s{k + 2}") for k in range(n_maps)]
    return NetworkSpec(N, maps)


def near(x, target, tol=0.05):
    return abs(x - target) <= tol


# -- 1 ----------------------------------------------------------------------------------------

def test_criterion1_monoids_and_fundamental_networks(monoids):
    assert [monoids[k].size for k in "ABC"] == [3, 4, 5]
    rng = np.random.default_rng(1)
    for name, rows in (("B", B_TILDE), ("C", C_TILDE)):
        fund = fundamental_network(monoids[name])
        ref = spec_from_rows(rows)
        got = [[fund.maps[i](p) + 1 for i in range(fund.n_maps)] for p in range(fund.N)]
        assert got == rows
        for _ in range(10):
            f = random_response(response_arity(ref), 3, rng)
            a, b = admissible_field(fund, f), admissible_field(ref, f)
            assert a.terms.keys() == b.terms.keys()
            assert all(np.array_equal(a.terms[e], b.terms[e]) for e in a.terms)


# -- 2 ----------------------------------------------------------------------------------------

def test_criterion2_synchrony(specs, monoids):
    expected = {Partition((0, 0, 0)), Partition((0, 1, 1))}
    for k in "ABC":
        robust = enumerate_robust(specs[k])
        nontrivial = {P for P in robust if not P.is_discrete()}
        assert nontrivial == expected
    rng = np.random.default_rng(2)
    fixtures = list(specs.values()) + [fundamental_network(monoids[k]) for k in "ABC"]
    fixtures += [random_network(N, 2, rng) for N in (4, 5, 6)]
    disagreements = 0
    for spec in fixtures:
        assert spec.N <= 6
        for labels in all_partitions(spec.N):
            P = Partition(labels)
            disagreements += is_robust(P, spec) != invariance_oracle(P, spec, trials=50, seed=0)
    assert disagreements == 0


# -- 3 ----------------------------------------------------------------------------------------

def test_criterion3_double_eigenvalue(specs):
    rng = np.random.default_rng(3)
    for k in "ABC":
        spec = specs[k]
        for _ in range(100):
            f = random_response(response_arity(spec), 3, rng)
            J = admissible_field(spec, f).linear_part()[:, :spec.N]
            a = f.linear_part()[0, 0]
            assert eigen_multiplicity(J, a, radius=1e-7, rank_tol=1e-8) == (2, 1)


# -- 4 ----------------------------------------------------------------------------------------

def test_criterion4_equivariance_characterization(monoids):
    rng = np.random.default_rng(4)
    wrong = 0
    for trial in range(50):
        M = monoids["ABC"[trial % 3]]
        fund = fundamental_network(M)
        f = random_response(response_arity(fund), 3, rng)
        G = admissible_field(fund, f)
        if not is_equivariant(G, M):
            wrong += 1
            continue
        back = response_from_equivariant(G, M)
        if back.terms.keys() != f.terms.keys() or not all(np.array_equal(back.terms[e], f.terms[e])
                                                          for e in f.terms):
            wrong += 1
        bump = random_response(G.n_in, 3, rng, cell_dim=G.n_out).with_degree(G.degree)
        if is_equivariant(G + 0.1 * bump, M):
            wrong += 1
    assert wrong == 0


# -- 5 ----------------------------------------------------------------------------------------

def test_criterion5_center_manifold_jet(monoids):
    for name in "BC":
        M = monoids[name]
        for seed in range(3):
            f = draw_response(M, seed)
            aug, jet, red = reduce(M, f, order=3)
            tang = tangency_residual(aug, jet)
            assert set(tang) >= {2, 3}
            assert max(tang.values()) <= 1e-9
            assert max(psi_equivariance_residual(aug, jet).values()) <= 1e-9
            ident = linear_part_identities(aug, red)
            assert ident["state"] <= 1e-12 and ident["parameter"] <= 1e-12

            rng = np.random.default_rng(seed)
            c = aug.c
            G = PolyField.zero(c + 1, c, 3)
            for F in equivariant_field_space(M, aug.Bc, 3, with_parameter=True):
                G = G + float(rng.uniform(-1, 1)) * F
            G = PolyField(c + 1, c, 3, {e: v for e, v in G.terms.items() if sum(e) >= 2 and any(e[:-1])})
            assert not G.is_zero()
            _, _, red2 = reduce(M, realize_response(aug, G), order=3)
            assert (red2.R - PolyField.linear(aug.Lc[:c], 3) - G).max_abs_coeff() <= 1e-9


# -- 6 ----------------------------------------------------------------------------------------

def _network_b_failures(an):
    co, pr = an.coeffs, an.coeffs["predictions"]
    a3 = co["a3"]
    by = {k: [b for b in an.branches if b.kind == k] for k in ("full", "partial", "none")}
    if [len(by[k]) for k in ("full", "partial", "none")] != [1, 1, 2]:
        return [f"branch counts {[b.kind for b in an.branches]}"]
    fails = []
    full, part = by["full"][0], by["partial"][0]
    for b in (full, part):
        for s in ("neg", "pos"):
            if s not in b.state_exponent or not near(b.state_exponent[s][0], 1.0):
                fails.append(f"{b.kind} exponent {s}")
    sides = [b.sides for b in by["none"]]
    if sides[0] != sides[1] or len(sides[0]) != 1:
        fails.append(f"non-sync sides {sides}")
    elif sides[0][0] != pr["none"]["side"]:
        fails.append("non-sync pair on the wrong side")
    pair = by["none"][0].info.get("pair")
    if pair is None:
        fails.append("no sqrt pair fit")
    else:
        e, c, _ = pair["exponents"]["X1"]
        if not near(e, 0.5):
            fails.append(f"non-sync exponent {e}")
        if abs(c / pr["none"]["X1_coeff"] - 1) > 0.05:
            fails.append(f"non-sync coefficient {c} vs {pr['none']['X1_coeff']}")
        if not near(pair["state_exponent"][0], 0.5):
            fails.append("non-sync state exponent")
    if part.eig_signs != {"neg": "+-", "pos": "+-"}:
        fails.append(f"partial not a saddle: {part.eig_signs}")
    for s, sgn in (("neg", -1), ("pos", 1)):
        if full.eig_signs.get(s) != ("++" if a3 * sgn > 0 else "--"):
            fails.append(f"full signs {full.eig_signs}")
    i = int(np.argmin(np.abs(full.lambdas)))
    ev = full.eigenvalues[i]
    if np.max(np.abs(ev.real / (a3 * full.lambdas[i]) - 1)) > 0.05:
        fails.append("full eigenvalues differ from a3*lambda")
    return fails


def test_criterion6_network_b_branch_table():
    failures = {}
    for seed in SEEDS:
        an = cached_analysis("B", seed)
        f = _network_b_failures(an)
        if f:
            failures[seed] = f
    assert not failures


# -- 7 ----------------------------------------------------------------------------------------

# sign patterns per regime for a4 > 0; sides swap when a4 < 0
C_SCENARIOS = {
    "partial": {"partial": ("++", "--"), "none": ("+-", "+-")},
    "none": {"partial": ("+-", "+-"), "none": ("++", "--")},
    "neither": {"partial": ("+-", "+-"), "none": ("+-", "+-")},
}


def _network_c_failures(an):
    co, pr = an.coeffs, an.coeffs["predictions"]
    by = {k: [b for b in an.branches if b.kind == k] for k in ("full", "partial", "none")}
    if any(len(v) != 1 for v in by.values()):
        return [f"branch counts {[b.kind for b in an.branches]}"]
    by = {k: v[0] for k, v in by.items()}
    fails = []
    for k, b in by.items():
        if b.sides != ["neg", "pos"]:
            fails.append(f"{k} sides {b.sides}")
            continue
        for s in b.sides:
            e = b.state_exponent[s][0] if k == "full" else b.exponents[s]["X1"][0]
            if not near(e, 1.0):
                fails.append(f"{k} X1 exponent {s} {e:.3f}")
    nb = by["none"]
    for s in nb.sides:
        e, c, _ = nb.exponents[s]["X2"]
        if not near(e, 2.0):
            fails.append(f"X2 exponent {s} {e:.3f}")
        if abs(c / abs(pr["none"]["X2_coeff"]) - 1) > 0.05:
            fails.append(f"X2 coefficient {s}")
        _, X, _ = nb.side(s)
        if np.sign(X[0 if s == "pos" else -1, 1]) != np.sign(pr["none"]["X2_coeff"]):
            fails.append(f"X2 sign {s}")
    for s, v in stability_relations(an.restricted, nb, co).items():
        if v["trace_rel_err"] > 0.05 or v["det_rel_err"] > 0.05:
            fails.append(f"trace/det {s}")
    a4 = co["a4"]
    want = C_SCENARIOS[pr["regime"]]
    for k in ("partial", "none"):
        neg, pos = want[k] if a4 > 0 else want[k][::-1]
        if by[k].eig_signs != {"neg": neg, "pos": pos}:
            fails.append(f"{k} signs {by[k].eig_signs} in regime {pr['regime']}")
    full_want = ("--", "++") if a4 > 0 else ("++", "--")
    if (by["full"].eig_signs.get("neg"), by["full"].eig_signs.get("pos")) != full_want:
        fails.append("full signs")
    return fails


def test_criterion7_network_c_branch_table():
    failures = {}
    regimes = set()
    for seed in SEEDS:
        an = cached_analysis("C", seed)
        regimes.add(an.coeffs["predictions"]["regime"])
        f = _network_c_failures(an)
        if f:
            failures[seed] = f
    assert not failures
    assert regimes == set(C_SCENARIOS)


# -- 8 ----------------------------------------------------------------------------------------

def test_criterion8_simulation_cross_validation(specs, monoids):
    for name in "BC":
        for seed in range(4):
            an = cached_analysis(name, seed, order=5)
            recs = cross_validate(an, (-5e-3, 5e-3), seed=seed)
            stable = [r for r in recs if r["reduced_stable"]]
            assert stable
            assert max(r["error"] for r in stable) <= 1e-4
    rng = np.random.default_rng(8)
    worst = 0.0
    for name in "ABC":
        spec = specs[name]
        for P in enumerate_robust(spec):
            for _ in range(3):
                f = draw_response(monoids[name], rng)
                x0 = rng.uniform(-0.01, 0.01, P.r)[list(P.class_of)]
                tr = integrate(spec, f, x0, float(rng.uniform(-5e-3, 5e-3)), 10.0, 0.01)
                assert not tr.blew_up
                worst = max(worst, synchrony_deviation(tr, P.classes()))
    assert worst <= 1e-8


# -- 9 ----------------------------------------------------------------------------------------

def test_criterion9_report_is_deterministic(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        cmd = [sys.executable, "-m", "cellnet", "report", "B", "--seed", "7", "--out", str(d)]
        subprocess.run(cmd, check=True, capture_output=True)
        outs.append(d)
    for fname in ("report.json", "branches.csv", "diagram.svg"):
        a, b = (outs[0] / fname).read_bytes(), (outs[1] / fname).read_bytes()
        assert a and a == b
