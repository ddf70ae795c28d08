"""Serializable analysis reports: JSON, branch CSV and a small SVG bifurcation diagram.

Everything here is a pure function of an ``Analysis`` and the validation
records, so identical inputs and seeds give byte-identical files.
"""
from __future__ import annotations

import io
import json
import math

import numpy as np

from . import __version__
from .bifurcation import branch_table
from .network import fundamental_network
from .representation import eigen_multiplicity, indecomposable_splitting
from .synchrony import enumerate_robust, refinement_edges

__all__ = [
    "jsonable",
    "dumps",
    "monoid_report",
    "synchrony_report",
    "spectrum_report",
    "splitting_report",
    "reduced_report",
    "build_report",
    "branches_csv",
    "diagram_svg",
]


def jsonable(obj):
    """Plain JSON types; complex numbers become ``[re, im]``, tuples become lists."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(float(obj.real)), jsonable(float(obj.imag))]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj if obj is None or isinstance(obj, str) else str(obj)


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"


def monoid_report(monoid) -> dict:
    labels = monoid.labels
    return {
        "size": monoid.size,
        "elements": [{"label": s.label, "target": s.one_based()} for s in monoid.elements],
        "table": [[labels[int(v)] for v in row] for row in monoid.table],
    }


def synchrony_report(spec) -> dict:
    parts = enumerate_robust(spec)
    return {
        "partitions": [P.label() for P in parts],
        "hasse_edges": [[parts[i].label(), parts[j].label()] for i, j in refinement_edges(parts)],
    }


def spectrum_report(aug) -> dict:
    """Eigenvalues at the origin, the center cluster and its multiplicities."""
    J = aug.J
    vals = np.linalg.eigvals(J)
    order = np.lexsort((vals.imag, vals.real))
    alg, geo = eigen_multiplicity(J, 0.0)
    return {
        "eigenvalues": vals[order],
        "center_dim": aug.c,
        "zero_algebraic_multiplicity": alg,
        "zero_geometric_multiplicity": geo,
        "tol_re": aug.split.info.get("tol_re"),
    }


def splitting_report(monoid, seed: int = 0) -> dict:
    sp = indecomposable_splitting(monoid, seed=seed)
    return {"dims": sp.dims, "commutant_dims": sp.info["commutant_dims"],
            "bases": [np.round(W, 12) for W in sp.subspaces], "seed": seed}


def _terms(F, names) -> list[dict]:
    rows = []
    for comp in range(F.n_out):
        for e in sorted(F.terms):
            c = float(F.terms[e][comp])
            if c != 0.0:
                mono = "*".join(f"{n}^{k}" if k > 1 else n for n, k in zip(names, e) if k) or "1"
                rows.append({"component": comp + 1, "monomial": mono, "coeff": c})
    return rows


def reduced_report(an) -> dict:
    R = an.restricted
    names = list(R.coord_names) + ["lam"]
    info = an.reduced.info
    return {
        "center_basis": np.round(an.reduced.basis, 14),
        "coordinates": list(an.reduced.coord_names),
        "restricted_coordinates": list(R.coord_names),
        "order": an.order,
        "homological_condition_numbers": info.get("conditions", {}),
        "lambda_residual": info.get("lambda_residual"),
        "coefficients": _terms(R.R, names),
    }


def _branch_rows(an) -> list[dict]:
    rows = []
    for k, b in enumerate(an.branches):
        for i, lam in enumerate(b.lambdas):
            ev = b.eigenvalues[i] if i < len(b.eigenvalues) else np.zeros(0)
            rows.append({"branch": k + 1, "kind": b.kind, "synchrony": b.label, "lambda": float(lam),
                         "point": b.points[i], "state": b.states[i], "eig_re": np.sort(np.real(ev))})
    return rows


def build_report(an, validation: list[dict] | None = None, *, lambdas=None, tol_re=None) -> dict:
    """The full analysis report; every numeric section sits next to the seed and tolerances used."""
    spec = an.network.spec
    fund = fundamental_network(an.monoid)
    meta = {"version": __version__, "seed": an.seed, "order": an.order, "draw_attempts": an.draw_attempts,
            "tol_re": tol_re, "steady_tol": 1e-11,
            "lambda_grid": None if lambdas is None else np.asarray(lambdas, dtype=float)}
    table = branch_table(an.branches)
    for row, b in zip(table, an.branches):
        row["fits"] = {s: {c: {"exponent": v[0], "coeff": v[1], "rms": v[2]} for c, v in fits.items()}
                       for s, fits in b.exponents.items()}
        row["sides"] = b.sides
    coeffs = None
    if an.coeffs is not None:
        coeffs = {k: v for k, v in an.coeffs.items() if k not in ("checks",)}
        coeffs["checks"] = an.coeffs.get("checks", {})
    return {
        "meta": meta,
        "network": {"name": an.name, **spec.to_dict()},
        "response": _terms(an.f, [f"u{i + 1}" for i in range(an.f.n_in - 1)] + ["lam"]),
        "monoid": monoid_report(an.monoid),
        "fundamental": fund.to_dict(),
        "synchrony": synchrony_report(spec),
        "spectrum": spectrum_report(an.aug),
        "splitting": splitting_report(an.monoid, seed=0),
        "reduced": reduced_report(an),
        "model": coeffs,
        "branches": table,
        "validation": validation,
    }


def branches_csv(an) -> str:
    rows = _branch_rows(an)
    names = list(an.restricted.coord_names)
    N = an.network.spec.N
    m = max((len(r["eig_re"]) for r in rows), default=0)
    buf = io.StringIO()
    head = ["branch", "kind", "synchrony", "lambda"] + names + [f"x{i + 1}" for i in range(N)]
    head += [f"eig_re{i + 1}" for i in range(m)]
    buf.write(",".join(head) + "\n")
    for r in rows:
        vals = [str(r["branch"]), r["kind"], f'"{r["synchrony"]}"', repr(r["lambda"])]
        vals += [repr(float(v)) for v in r["point"]] + [repr(float(v)) for v in r["state"]]
        vals += [repr(float(v)) for v in r["eig_re"]] + [""] * (m - len(r["eig_re"]))
        buf.write(",".join(vals) + "\n")
    return buf.getvalue()


_COLORS = {"full": "#1f77b4", "partial": "#d62728", "none": "#2ca02c"}


def diagram_svg(an, coord: int = 0, width: int = 640, height: int = 420) -> str:
    """λ against one reduced coordinate; solid where the branch is stable, dashed otherwise."""
    pad = 50
    segs = []
    for b in an.branches:
        for side in b.sides:
            L, X, _ = b.side(side)
            stable = "-" in b.eig_signs.get(side, "") and "+" not in b.eig_signs.get(side, "")
            segs.append((b.kind, stable, L, X[:, coord]))
    if segs:
        lo_x = min(float(L.min()) for _, _, L, _ in segs)
        hi_x = max(float(L.max()) for _, _, L, _ in segs)
        lo_y = min(float(Y.min()) for *_, Y in segs)
        hi_y = max(float(Y.max()) for *_, Y in segs)
    else:
        lo_x, hi_x, lo_y, hi_y = -1.0, 1.0, -1.0, 1.0
    if hi_y - lo_y <= 0:
        lo_y, hi_y = lo_y - 1.0, hi_y + 1.0
    if hi_x - lo_x <= 0:
        lo_x, hi_x = lo_x - 1.0, hi_x + 1.0

    def px(v):
        return pad + (v - lo_x) / (hi_x - lo_x) * (width - 2 * pad)

    def py(v):
        return height - pad - (v - lo_y) / (hi_y - lo_y) * (height - 2 * pad)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>']
    if lo_x < 0 < hi_x:
        out.append(f'<line x1="{px(0):.2f}" y1="{pad}" x2="{px(0):.2f}" y2="{height - pad}" '
                   f'stroke="#bbbbbb" stroke-dasharray="2,3"/>')
    for v, anchor in ((lo_x, "start"), (hi_x, "end")):
        out.append(f'<text x="{px(v):.2f}" y="{height - pad + 16}" font-size="11" text-anchor="{anchor}">{v:.3g}</text>')
    for v in (lo_y, hi_y):
        out.append(f'<text x="{pad - 4}" y="{py(v) + 4:.2f}" font-size="11" text-anchor="end">{v:.3g}</text>')
    out.append(f'<text x="{width / 2:.1f}" y="{height - 12}" font-size="12" text-anchor="middle">lambda</text>')
    name = an.restricted.coord_names[coord]
    out.append(f'<text x="14" y="{height / 2:.1f}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 14 {height / 2:.1f})">{name}</text>')
    for kind, stable, L, Y in segs:
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(L, Y))
        dash = "" if stable else ' stroke-dasharray="6,4"'
        out.append(f'<polyline points="{pts}" fill="none" stroke="{_COLORS.get(kind, "black")}" '
                   f'stroke-width="1.5"{dash}/>')
    y = pad
    for kind, color in _COLORS.items():
        out.append(f'<line x1="{width - pad - 90}" y1="{y}" x2="{width - pad - 70}" y2="{y}" stroke="{color}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{width - pad - 64}" y="{y + 4}" font-size="11">{kind}</text>')
        y += 16
    out.append("</svg>")
    return "\n".join(out) + "\n"
