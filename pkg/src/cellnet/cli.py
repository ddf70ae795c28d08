"""Command-line front end: ``cellnet <command> NETWORK [options]``.

NETWORK is a JSON network file, or one of the bundled names A, B, C.
Exit codes: 0 success, 2 parse error, 3 degenerate draw, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .bifurcation import default_lambda_grid
from .cm_reduce import EquilibriumError
from .errors import CellNetError, DegenerateDrawError, NumericalFailure, SpecParseError
from .network import (
    NetworkFile,
    builtin_network,
    complete_monoid,
    fundamental_network,
    load_network_file,
)
from .pipeline import analyze, cross_validate
from .report import (
    branches_csv,
    build_report,
    diagram_svg,
    dumps,
    monoid_report,
    reduced_report,
    spectrum_report,
    splitting_report,
    synchrony_report,
)
from .simulate import T_MAX, integrate, synchrony_deviation
from .synchrony import enumerate_robust

EXIT_OK, EXIT_PARSE, EXIT_DEGENERATE, EXIT_NUMERICAL = 0, 2, 3, 4
COMMANDS = ("complete", "fundamental", "synchrony", "spectrum", "reduce", "branches", "simulate", "validate",
            "report")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_PARSE)


def load_network(arg: str) -> NetworkFile:
    path = Path(arg)
    if path.is_file():
        try:
            text = path.read_text()
        except (OSError, UnicodeDecodeError) as exc:
            raise SpecParseError(f"cannot read {arg}: {exc}") from exc
        nf = load_network_file(text, name=path.stem)
        want = complete_monoid(nf.spec).size * nf.spec.cell_dim + 1
        if nf.response is not None and nf.response.n_in != want:
            raise SpecParseError(f"response has {nf.response.n_in} inputs, expected {want}")
        return nf
    if arg.upper() in ("A", "B", "C"):
        return builtin_network(arg)
    raise SpecParseError(f"no such network file: {arg}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cellnet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("network")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--order", type=int, default=3)
        s.add_argument("--lambda-min", type=float, default=1e-4)
        s.add_argument("--lambda-max", type=float, default=1e-2)
        s.add_argument("--tol-re", type=float, default=None)
        s.add_argument("--jobs", type=int, default=1)
        s.add_argument("--out", default=None)
        if name == "simulate":
            s.add_argument("--lam", type=float, default=5e-3)
            s.add_argument("--T", type=float, default=10.0)
            s.add_argument("--h", type=float, default=0.01)
            s.add_argument("--x0", type=str, default=None, help="comma-separated initial state")
            s.add_argument("--every", type=int, default=10, help="record every k-th step")
        if name == "validate":
            s.add_argument("--lam", type=float, nargs="+", default=[-5e-3, 5e-3])
            s.add_argument("--t-max", type=float, default=T_MAX)
    return p


def _emit(text: str, out: str | None, fname: str) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / fname).write_text(text)


def _grid(args):
    if not 0 < args.lambda_min < args.lambda_max:
        raise SpecParseError("need 0 < --lambda-min < --lambda-max")
    return default_lambda_grid(args.lambda_min, args.lambda_max)


def _analysis(nf, args, branches: bool):
    return analyze(nf, seed=args.seed, order=args.order, f=nf.response, tol_re=args.tol_re,
                   lambdas=_grid(args) if branches else None, branches=branches, jobs=args.jobs)


def _csv_rows(header, rows) -> str:
    return ",".join(header) + "\n" + "".join(",".join(str(v) for v in r) + "\n" for r in rows)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except SpecParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DegenerateDrawError as exc:
        print(f"degenerate draw (seed {args.seed}): {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except EquilibriumError as exc:
        # a supplied response violating the standing hypotheses is treated like a degenerate draw
        print(f"degenerate response: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        if exc.diagnostics:
            print(dumps(exc.diagnostics), file=sys.stderr, end="")
        return EXIT_NUMERICAL
    except CellNetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def _dispatch(args) -> int:
    nf = load_network(args.network)
    spec = nf.spec
    cmd = args.command
    if cmd == "complete":
        _emit(dumps(monoid_report(complete_monoid(spec))), args.out, "monoid.json")
    elif cmd == "fundamental":
        _emit(dumps(fundamental_network(complete_monoid(spec)).to_dict()), args.out, "fundamental.json")
    elif cmd == "synchrony":
        rep = synchrony_report(spec)
        lines = ["partitions:"] + [f"  {i + 1}: {p}" for i, p in enumerate(rep["partitions"])]
        lines += ["refinement edges (finer -> coarser):"] + [f"  {a} -> {b}" for a, b in rep["hasse_edges"]]
        _emit("\n".join(lines) + "\n", args.out, "synchrony.txt")
    elif cmd == "spectrum":
        an = _analysis(nf, args, branches=False)
        sp = splitting_report(an.monoid, seed=args.seed)
        _emit(dumps({"seed": args.seed, "spectrum": spectrum_report(an.aug), "splitting": sp}), args.out,
              "spectrum.json")
        rows = [(k + 1, d, c) for k, (d, c) in enumerate(zip(sp["dims"], sp["commutant_dims"]))]
        if args.out is not None:
            _emit(_csv_rows(["summand", "dim", "commutant_dim"], rows), args.out, "splitting.csv")
    elif cmd == "reduce":
        an = _analysis(nf, args, branches=False)
        rep = reduced_report(an)
        rep.update(seed=args.seed, model=an.coeffs)
        _emit(dumps(rep), args.out, "reduced.json")
        if args.out is not None:
            rows = [(r["component"], r["monomial"], repr(r["coeff"])) for r in rep["coefficients"]]
            _emit(_csv_rows(["component", "monomial", "coeff"], rows), args.out, "reduced.csv")
    elif cmd == "branches":
        an = _analysis(nf, args, branches=True)
        rep = build_report(an, lambdas=_grid(args), tol_re=args.tol_re)
        _emit(dumps({"meta": rep["meta"], "branches": rep["branches"], "model": rep["model"]}), args.out,
              "branches.json")
        if args.out is not None:
            _emit(branches_csv(an), args.out, "branches.csv")
            _emit(diagram_svg(an), args.out, "diagram.svg")
    elif cmd == "simulate":
        an = _analysis(nf, args, branches=False)
        if args.x0 is None:
            x0 = np.random.default_rng(args.seed).uniform(-0.01, 0.01, spec.state_dim)
        else:
            try:
                x0 = np.array([float(v) for v in args.x0.split(",")])
            except ValueError as exc:
                raise SpecParseError(f"bad --x0: {exc}") from exc
            if len(x0) != spec.state_dim:
                raise SpecParseError(f"--x0 needs {spec.state_dim} values")
        tr = integrate(an.spec, an.f, x0, args.lam, args.T, args.h, record_every=args.every, seed=args.seed)
        _emit(tr.to_csv(), args.out, "trajectory.csv")
        if tr.blew_up:
            raise NumericalFailure(f"blow-up before T = {args.T:g}", {"time": float(tr.times[-1])})
    elif cmd == "validate":
        an = _analysis(nf, args, branches=True)
        recs = cross_validate(an, tuple(args.lam), seed=args.seed, t_max=args.t_max)
        rng = np.random.default_rng(args.seed)
        sync = []
        for P in enumerate_robust(spec):
            x0 = rng.uniform(-0.01, 0.01, P.r)[list(P.class_of)]
            tr = integrate(an.spec, an.f, x0, args.lam[0], 10.0, 0.01)
            sync.append({"partition": P.label(), "deviation": synchrony_deviation(tr, P.classes()),
                         "blowup": tr.blew_up})
        _emit(dumps({"seed": args.seed, "order": args.order, "branch_points": recs, "synchrony_flow": sync}),
              args.out, "validation.json")
    elif cmd == "report":
        an = _analysis(nf, args, branches=True)
        recs = cross_validate(an, seed=args.seed)
        out = args.out or "report"
        _emit(dumps(build_report(an, recs, lambdas=_grid(args), tol_re=args.tol_re)), out, "report.json")
        _emit(branches_csv(an), out, "branches.csv")
        _emit(diagram_svg(an), out, "diagram.svg")
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
