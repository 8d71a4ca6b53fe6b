from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import random_poly
from polysym.exactalg import SamplePlan, poly_ring
from polysym.report import ERROR, FAIL, PASS
from polysym.scenario import ScenarioError, expectation_status, parse_poly, parse_scenario, run_suite

R = poly_ring(("x", "y"))
x, y = R.gens

COVELOCITIES = """\
version: 1
name: cov
kind: polysymplectic
payload: {type: covelocities, nq: 2, k: 2}
"""


def doc(payload: str, extra: str = "", kind: str = "polysymplectic") -> str:
    return f"version: 1\nname: t\nkind: {kind}\n{extra}payload:\n{payload}"


# -- polynomials -------------------------------------------------------------------------

@pytest.mark.parametrize("text,expected", [
    ("x^2 + 3*y", x ** 2 + 3 * y),
    ("(x - y)^3", (x - y) ** 3),
    ("x/2 - 1/3", x / 2 - R(1) / 3),
    ("-x*-y", x * y),
    ("7", R(7)),
    (5, R(5)),
])
def test_parse_poly(text, expected):
    assert parse_poly(text, R) == expected


@pytest.mark.parametrize("text,msg", [
    ("x^(1/2)", "non-polynomial exponent"),
    ("x^-1", "non-polynomial exponent"),
    ("1/x", "non-polynomial division"),
    ("x/0", "division"),
    ("z + 1", "unknown variable"),
    ("0.5*x", "non-rational literal"),
    ("x +", "malformed"),
    ("(x", "malformed"),
])
def test_parse_poly_rejects(text, msg):
    with pytest.raises(ScenarioError, match=msg):
        parse_poly(text, R)


def test_parse_poly_rejects_floats_and_lists():
    with pytest.raises(ScenarioError):
        parse_poly(0.5, R)
    with pytest.raises(ScenarioError):
        parse_poly([1], R)


@given(st.integers(0, 10_000))
def test_parse_poly_round_trips_printed_polynomials(seed):
    p = random_poly(random.Random(seed), R, 3, 4)
    assert parse_poly(str(p.as_expr()).replace("**", "^"), R) == p


# -- documents ---------------------------------------------------------------------------

def test_parse_covelocities_scenario():
    sc = parse_scenario(COVELOCITIES)
    w = sc.inputs["form"]()
    assert (w.n, w.k) == (6, 2)
    assert sc.suites == ("polysymplectic", "induced")


def test_unknown_field_names_line():
    text = COVELOCITIES + "colour: red\n"
    with pytest.raises(ScenarioError, match="line 5.*unknown field 'colour'"):
        parse_scenario(text)


def test_duplicate_field_rejected():
    with pytest.raises(ScenarioError, match="duplicate field 'name'"):
        parse_scenario(COVELOCITIES + "name: again\n")


@pytest.mark.parametrize("text,msg", [
    (COVELOCITIES.replace("version: 1", "version: 2"), "unsupported format version"),
    (COVELOCITIES.replace("polysymplectic", "symplectic"), "must be one of"),
    (COVELOCITIES.replace("name: cov\n", ""), "missing field 'name'"),
    (COVELOCITIES + "sample: {count: 0}\n", "at least 1"),
    (COVELOCITIES + "expect: {closed: PASS}\n", "must be one of"),
    (COVELOCITIES + "conventions: {canonical_symplectic: other}\n", "unsupported convention"),
    ("version: [1\n", "malformed syntax"),
    (b"\xff\xfe", "not UTF-8"),
])
def test_document_errors(text, msg):
    with pytest.raises(ScenarioError, match=msg):
        parse_scenario(text)


def test_two_form_payload_and_bad_keys():
    good = doc("  type: explicit\n  variables: [x, y]\n  k: 2\n"
               "  components:\n    - {dx^dy: 1}\n    - {dx^dy: x^2 + 1}\n")
    w = parse_scenario(good).inputs["form"]()
    assert w.k == 2
    with pytest.raises(ScenarioError, match="bad 2-form key"):
        parse_scenario(good.replace("dx^dy: 1", "dxdy: 1"))
    with pytest.raises(ScenarioError, match="dx\\^dx is zero"):
        parse_scenario(good.replace("dx^dy: 1", "dx^dx: 1"))
    with pytest.raises(ScenarioError, match="unknown variable"):
        parse_scenario(good.replace("dx^dy: 1", "dx^dz: 1"))


def test_bivector_must_be_antisymmetric():
    text = doc("  type: bivector\n  variables: [x, y]\n  matrix: [['0', '1'], ['1', '0']]\n", kind="polypoisson")
    with pytest.raises(ScenarioError, match="not antisymmetric"):
        parse_scenario(text)


def test_unknown_algebra_rejected():
    text = doc("  type: lie_poisson\n  algebra: sl2\n  k: 2\n", kind="polypoisson")
    with pytest.raises(ScenarioError, match="unknown Lie algebra"):
        parse_scenario(text)


# -- running ---------------------------------------------------------------------------------

def test_run_suite_selects_and_orders_suites():
    sc = parse_scenario(COVELOCITIES)
    rep = run_suite(sc, ["induced", "polysymplectic"])
    names = [c.name for c in rep.checks]
    assert names[0].startswith("polysymplectic: ")
    with pytest.raises(ScenarioError, match="unknown suite"):
        run_suite(sc, ["nope"])


def test_expectations_flag_unexpected_and_missing():
    text = COVELOCITIES + 'expect: {"polysymplectic: closed": FAIL, "nothing": WARN}\n'
    sc = parse_scenario(text)
    st_ = expectation_status(sc, run_suite(sc))
    assert st_["unexpected"] == ["polysymplectic: closed"]
    assert st_["missing"] == ["nothing"]


def test_internal_errors_become_error_verdicts():
    # so(3) parses as an algebra but has no polynomial group chart
    text = doc("  builder: coadjoint\n  algebra: so3\n  k: 1\n", kind="groupoid")
    sc = parse_scenario(text)
    rep = run_suite(sc)
    errors = [c for c in rep.checks if c.verdict == ERROR]
    assert errors and "nilpotent" in errors[0].detail
    assert expectation_status(sc, rep)["errors"]


def test_seed_changes_points_not_verdicts():
    sc = parse_scenario(COVELOCITIES)
    a = run_suite(sc, plan=SamplePlan(seed=1))
    b = run_suite(sc, plan=SamplePlan(seed=99))
    assert a.verdicts() == b.verdicts()
    assert set(a.verdicts().values()) == {PASS}


def test_degenerate_form_fails_with_witness():
    text = doc("  type: explicit\n  variables: [x, y, z, w]\n  k: 2\n"
               "  components:\n    - {dx^dy: 1}\n    - {dx^dy: 2}\n")
    rep = run_suite(parse_scenario(text))
    bad = [c for c in rep.checks if c.verdict == FAIL]
    assert bad and all(c.witness for c in bad)
