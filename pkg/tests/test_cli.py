import json

import numpy as np
import pytest

from cellnet.cli import run
from cellnet.report import branches_csv, diagram_svg, dumps, jsonable

from conftest import cached_analysis

BAD_RESPONSE = {
    "cells": 3,
    "maps": [{"label": "s2", "target": [2, 3, 3]}],
    "response": {"terms": [{"monomial": [0, 0, 0, 0], "coeff": 0.5},
                           {"monomial": [0, 1, 0, 0], "coeff": -1.0}]},
}


def test_synchrony_lists_lattice(capsys):
    assert run(["synchrony", "A"]) == 0
    out = capsys.readouterr().out
    assert "2: x2=x3" in out
    assert "x2=x3 -> x1=x2=x3" in out


def test_complete_reports_monoid(capsys):
    assert run(["complete", "C"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert len(rep["elements"]) == 5


def test_network_file_is_accepted(tmp_path, capsys):
    p = tmp_path / "net.json"
    p.write_text(json.dumps({"cells": 3, "maps": [{"label": "s2", "target": [2, 3, 3]}]}))
    assert run(["fundamental", str(p)]) == 0
    assert json.loads(capsys.readouterr().out)


def test_reduce_writes_files(tmp_path):
    assert run(["reduce", "B", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "reduced.json").read_text())
    assert rep["model"]["network"] == "B"
    assert (tmp_path / "reduced.csv").read_text().startswith("component,monomial,coeff")


def test_branches_writes_csv_and_svg(tmp_path):
    assert run(["branches", "B", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "diagram.svg").read_text().startswith("<svg")
    assert len((tmp_path / "branches.csv").read_text().splitlines()) > 10


def test_simulate_writes_trajectory(tmp_path):
    assert run(["simulate", "A", "--T", "1", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,x1,x2,x3"


@pytest.mark.parametrize("argv", [
    ["nonsense", "A"],
    ["reduce", "no_such_file.json"],
    ["simulate", "A", "--x0", "1,2"],
    ["branches", "A", "--lambda-min", "0.1", "--lambda-max", "0.01"],
])
def test_parse_failures_exit_2(argv):
    with pytest.raises(SystemExit) as err:
        code = run(argv)
        raise SystemExit(code)
    assert err.value.code == 2


def test_response_without_equilibrium_exits_3(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(BAD_RESPONSE))
    assert run(["reduce", str(p)]) == 3


def test_blowup_exits_4(tmp_path):
    assert run(["simulate", "A", "--x0=20,-20,5", "--T", "50", "--out", str(tmp_path)]) == 4


def test_jsonable_handles_special_values():
    obj = {"z": 1 + 2j, "inf": float("inf"), "arr": np.arange(2), "nan": np.nan}
    assert json.loads(dumps(obj)) == {"arr": [0, 1], "inf": "inf", "nan": "nan", "z": [1.0, 2.0]}
    assert jsonable((np.float64(1.5),)) == [1.5]


def test_branch_outputs_cover_every_branch():
    an = cached_analysis("B", 0)
    rows = branches_csv(an).splitlines()
    assert len(rows) - 1 == sum(len(b.lambdas) for b in an.branches)
    svg = diagram_svg(an)
    assert svg.count("<polyline") >= len(an.branches)
