import json

import numpy as np
import pytest

from cellnet.errors import SpecParseError
from cellnet.network import (
    InputMap,
    NetworkSpec,
    admissible_field,
    builtin_network,
    cell_projection,
    complete_monoid,
    compose,
    fundamental_network,
    injectivity_witness,
    load_network_file,
    parse_network_spec,
    response_arity,
)
from cellnet.synchrony import random_response


def test_builtin_networks_put_identity_first(specs):
    for spec in specs.values():
        assert spec.N == 3
        assert spec.maps[0].is_identity()
    assert specs["B"].maps[1].one_based() == [2, 3, 3]


def test_compose_applies_inner_map_first():
    s = InputMap.from_one_based([2, 3, 3])
    t = InputMap.from_one_based([2, 2, 2])
    assert compose(s, t).one_based() == [3, 3, 3]       # s(t(p)) = s(2) = 3
    assert compose(t, s).one_based() == [2, 2, 2]


def test_completion_is_a_valid_monoid(monoids):
    for M in monoids.values():
        assert M.is_valid()
        assert M.elements[M.unit_index].is_identity()


def test_completion_adds_missing_compositions():
    spec = parse_network_spec(json.dumps({"cells": 3, "maps": [{"label": "s2", "target": [2, 3, 3]}]}))
    M = complete_monoid(spec)
    assert M.size == 3
    assert M.elements[2].one_based() == [3, 3, 3]
    assert M.labels[2] == "g1"


def test_violations_reports_bad_table(monoids):
    M = monoids["A"]
    T = M.table.copy()
    T[1, 1] = 1
    bad = type(M)(M.elements, T, 0)
    assert bad.violations()


@pytest.mark.parametrize("text, fragment", [
    ("not json", "malformed"),
    ('{"maps": []}', "cells"),
    ('{"cells": 3, "maps": [{"target": [1, 2]}]}', "must list 3"),
    ('{"cells": 3, "maps": [{"target": [1, 2, 4]}]}', "out of range"),
    ('{"cells": 3, "maps": [{"label": "a", "target": [2, 2, 2]}, {"label": "a", "target": [3, 3, 3]}]}',
     "duplicate"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(SpecParseError, match=fragment):
        load_network_file(text)


def test_response_terms_are_parsed():
    text = json.dumps({"cells": 1, "maps": [],
                       "response": {"terms": [{"monomial": [1, 1], "coeff": 2.0},
                                              {"monomial": [3, 0], "coeff": -1.0}]}})
    f = load_network_file(text).response
    assert f.n_in == 2
    assert f(np.array([0.5, 2.0]))[0] == pytest.approx(2.0 - 0.125)


def test_fundamental_cell_reads_left_products(monoids):
    M = monoids["C"]
    fund = fundamental_network(M)
    for i in range(M.size):
        for j in range(M.size):
            assert fund.maps[i](j) == M.table[i, j]


def test_projection_semiconjugates(monoids, specs):
    rng = np.random.default_rng(0)
    for k in "ABC":
        M, spec = monoids[k], specs[k]
        f = random_response(response_arity(spec), 3, rng)
        gam = admissible_field(spec, f)
        Gam = admissible_field(fundamental_network(M), f)
        for p in range(spec.N):
            Pi = cell_projection(p, M)
            x = rng.uniform(-1, 1, spec.N)
            lam = 0.3
            lhs = Pi @ gam(np.append(x, lam))
            rhs = Gam(np.append(Pi @ x, lam))
            assert np.allclose(lhs, rhs, atol=1e-12)


def test_injectivity_witness(monoids):
    ok, orbit = injectivity_witness(0, monoids["B"])
    assert ok and orbit == {0, 1, 2}
    ok, orbit = injectivity_witness(2, monoids["B"])
    assert not ok and orbit == {1, 2}


def test_admissible_field_checks_arity(specs):
    f = random_response(2, 2, np.random.default_rng(0))
    with pytest.raises(ValueError, match="arity"):
        admissible_field(specs["A"], f)


def test_spec_rejects_missing_identity():
    with pytest.raises(ValueError):
        NetworkSpec(2, (InputMap((1, 1), "s2"),))


def test_unknown_builtin():
    with pytest.raises(KeyError):
        builtin_network("Z")
