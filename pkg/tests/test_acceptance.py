"""One test per acceptance criterion; each prints a PASS/FAIL line with the failed items."""

from __future__ import annotations

import json
import random
from pathlib import Path

import numpy as np
import pytest

from helpers import (closure_mutant, flow_lie_derivative, form_value, k1_fixtures, k1_oracle_mismatch,
                     linear_field, linear_poisson, random_field, random_form, random_map)
from polysym.avcourant import classify, extract, graph, perp_at
from polysym.cartan import KForm, VectorField, ext_d, interior, lie_bracket, lie_derivative, pullback, rename
from polysym.cli import main, run_file, shipped_scenarios, to_document, verdicts_from_document
from polysym.exactalg import SamplePlan, evaluate, points_for, poly_ring, rank_q
from polysym.fixtures import (covelocity_groupoid_reduction, covelocity_translation, covelocity_translation_level,
                              degenerate_level, heisenberg_cotangent, heisenberg_level, pair_groupoid_reduction,
                              product_planes)
from polysym.foliation import (_extend_leaf_form, distribution, leafwise_form_at, pointwise_structure_at,
                               round_trip, same_leaf_data, span_equal_at, time_family_structure)
from polysym.groupoid import (build_model, check_compatibility, check_groupoid_axioms, check_im_form,
                              check_multiplicative, check_unit_inv, drop_component, induced_structure,
                              prop24_sides)
from polysym.liealg import heisenberg, so3
from polysym.polypoisson import (PolyPoissonStruct, check_structure, from_polysymplectic, is_morphism, jacobiator,
                                 lie_poisson_direct_sum, poisson_structure, product_of_poisson, same_structure,
                                 trivial_structure)
from polysym.polysymp import PolySympForm, covelocities
from polysym.reduction import check_reducible, compare_leaf, level_reduce, reduce_structure
from polysym.report import FAIL, PASS

pytestmark = pytest.mark.acceptance

GOLDEN = Path(__file__).parent / "golden"
R2 = poly_ring(("x", "y"))
R3 = poly_ring(("x", "y", "z"))
PAIR_FORM = PolySympForm(KForm(R2, 2, ({(0, 1): 1}, {(0, 1): 2})))


def conclude(capsys, n: int, title: str, results: dict[str, bool]) -> None:
    failed = [name for name, ok in results.items() if not ok]
    line = f"{'FAIL' if failed else 'PASS'} criterion {n}: {title}"
    if failed:
        line += f" (failed: {'; '.join(failed)})"
    with capsys.disabled():
        print(f"\n{line}")
    assert not failed, line


# -- 1 ------------------------------------------------------------------------------------

def test_criterion_1_exterior_calculus(capsys):
    results = {"d∘d = 0": True, "pullback naturality": True, "Cartan consistency": True, "flow oracle": True}
    for seed in range(100):
        rng = random.Random(seed)
        w = random_form(rng, R3, rng.choice((1, 2)), 2)
        f = random_map(rng, R2, R3)
        X, Y = random_field(rng, R3), random_field(rng, R3)
        if not ext_d(ext_d(w)).is_zero():
            results["d∘d = 0"] = False
        if pullback(f, ext_d(w)) != ext_d(pullback(f, w)):
            results["pullback naturality"] = False
        # i_[X,Y] = L_X i_Y − i_Y L_X and d L_X = L_X d
        lhs = interior(lie_bracket(X, Y), w)
        rhs = lie_derivative(X, interior(Y, w)) - interior(Y, lie_derivative(X, w))
        if lhs != rhs or ext_d(lie_derivative(X, w)) != lie_derivative(X, ext_d(w)):
            results["Cartan consistency"] = False
    for seed in range(10):
        rng = random.Random(1000 + seed)
        A = np.array([[rng.randint(-2, 2) for _ in range(3)] for _ in range(3)])
        w = random_form(rng, R3, 2, 1, terms=3, max_deg=2)
        L = lie_derivative(linear_field(A, R3), w)
        nrng = np.random.default_rng(seed)
        p, v1, v2 = (nrng.uniform(-1, 1, 3) for _ in range(3))
        if abs(form_value(L, 0, p, [v1, v2]) - flow_lie_derivative(A, w, 0, p, [v1, v2])) > 1e-6:
            results["flow oracle"] = False
    conclude(capsys, 1, "exterior calculus on 100 random fixtures, flow oracle within 1e-6", results)


# -- 2 ------------------------------------------------------------------------------------

def test_criterion_2_k1_degeneration(capsys):
    results = {}
    for i, pp in enumerate(k1_fixtures()):
        rep = check_structure(pp)
        results[f"fixture {i} PASS"] = rep.ok
        stacked = [[evaluate(c, m) for c in s.stacked()] for m in pp.points() for s in pp.frame]
        results[f"fixture {i} S = T*M"] = pp.rank == pp.n == rank_q(stacked, pp.n)
        results[f"fixture {i} oracle"] = k1_oracle_mismatch(pp) is None
    # a non-Poisson bivector: the oracle's Jacobi fails, and so does the structure check
    bad = closure_mutant()
    results["non-Poisson bivector rejected by both"] = (not check_structure(bad).ok
                                                        and k1_oracle_mismatch(bad) is not None)
    conclude(capsys, 2, "k = 1 structures agree with the Poisson bivector oracle", results)


# -- 3 ------------------------------------------------------------------------------------

def heis_sum():
    return lie_poisson_direct_sum(heisenberg(), 2)


def test_criterion_3_structure_suite(capsys):
    R3x = poly_ring(("x1", "x2", "x3"))
    passing = {
        "covelocity-induced": from_polysymplectic(covelocities(2, 2)),
        "product-of-Poisson": product_of_poisson([(3, linear_poisson(so3(), R3x)), (2, [[0, 1], [-1, 0]])]),
        "Heisenberg direct sum": heis_sum(),
    }
    results = {}
    for name, pp in passing.items():
        rep = check_structure(pp)
        results[f"{name} PASS"] = rep.ok
        results[f"{name} jacobiator"] = rep.ok and jacobiator(pp, rep.data["structure"]).ok

    single = PolyPoissonStruct(R2, 1, (KForm.one_forms(R2, [[1, 0]]),), (VectorField.zero(R2),))
    skew = PolyPoissonStruct(R2, 1, (KForm.one_forms(R2, [[1, 0]]), KForm.one_forms(R2, [[0, 1]])),
                             (VectorField.coordinate(R2, 0), VectorField.zero(R2)))
    mutants = {"(ii) annihilator": single, "(iii)' closure": closure_mutant(), "(i) antisymmetry": skew}
    for clause, mutant in mutants.items():
        rep = check_structure(mutant)
        bad = rep.first_failure()
        results[f"mutant fails {clause}"] = bad is not None and bad.name == clause and bool(bad.witness)
    conclude(capsys, 3, "structure clauses, three mutants, jacobiator", results)


# -- 4 ------------------------------------------------------------------------------------

def test_criterion_4_foliation(capsys):
    results = {}
    fixtures = {"covelocities(1,2)": from_polysymplectic(covelocities(1, 2)), "Heisenberg": heis_sum(),
                "so3 k=2": lie_poisson_direct_sum(so3(), 2)}
    for name, pp in fixtures.items():
        D = distribution(pp)
        p = D.generic_rank
        pts = points_for(SamplePlan(seed=7, count=25), pp.ring)
        ok = len(pts) >= 25
        for m in pts:
            leaf = leafwise_form_at(pp, m, p)
            ps = pointwise_structure_at(D, _extend_leaf_form(leaf, pp.n, pp.ring, pp.k), m)
            ok = ok and ps.dim == pp.k * (pp.n - p) + p
        results[f"{name} dimension k(n-p)+p at 25 points"] = ok

    R = poly_ring(("x", "y", "t"))
    w = KForm(R, 2, ({(0, 1): R.one}, {(0, 1): R(2)}))
    trio = [time_family_structure(w, v) for v in (1, 2, 3)]
    results["trio PASS"] = all(check_structure(s).ok for s in trio)
    results["trio differ as structures"] = not same_structure(trio[1], trio[2]).ok
    shared = True
    for m in points_for(SamplePlan(seed=7, count=25), R):
        leaves = [leafwise_form_at(s, m) for s in trio]
        dists = [distribution(s).at(m) for s in trio]
        shared = shared and all(span_equal_at(dists[0], d, 3) and same_leaf_data(leaves[0], lf)
                                for d, lf in zip(dists[1:], leaves[1:]))
    results["trio share leaf data"] = shared
    results["nondegenerate round trip"] = round_trip(
        from_polysymplectic(covelocities(2, 2))).verdict("graph recovered") == PASS
    conclude(capsys, 4, "foliation dimension formula, trio, round trip", results)


# -- 5 ------------------------------------------------------------------------------------

def test_criterion_5_avcourant(capsys):
    R3x = poly_ring(("a", "b", "c"))
    a, b, c = R3x.gens
    passing = [heis_sum(), lie_poisson_direct_sum(so3(), 1), from_polysymplectic(covelocities(2, 1)),
               product_of_poisson([(2, [[0, 1], [-1, 0]]), (1, [[0]])]),
               poisson_structure(R3x, [[0, c, -b], [-c, 0, a], [b, -a, 0]]), trivial_structure(R2, 2)]
    results = {}
    clauses = ("isotropic", "involutive", "(3.11) L = L⊥ ∩ (L+TM)", "L⊥ ∩ TM = 0")
    for i, pp in enumerate(passing):
        v = classify(graph(pp)).verdicts()
        results[f"fixture {i} graph clauses"] = all(v[name] == PASS for name in clauses)
        back = extract(graph(pp))
        results[f"fixture {i} extract∘graph"] = back.frame == pp.frame and back.anchor == pp.anchor
    L = graph(heis_sum())
    zero = (0,) * 6
    results["Heisenberg dim L = 3 < dim L⊥ = 12 at 0"] = (
        rank_q([s.at(zero) for s in L.frame], 18) == 3 and len(perp_at(L, zero)) == 12)
    for i, pp in enumerate(k1_fixtures() + [p for p in passing if p.k == 1]):
        v = classify(graph(pp)).verdicts()
        results[f"k=1 fixture {i} (3.9) ⇔ (3.11)"] = v["lagrangian (3.9)"] == v["(3.11) L = L⊥ ∩ (L+TM)"]
    conclude(capsys, 5, "AV-Courant graphs, proper containment, extract∘graph, (3.9) ⇔ (3.11)", results)


# -- 6 ------------------------------------------------------------------------------------

def test_criterion_6_groupoids(capsys):
    builders = {
        "pair": (build_model("pair", PAIR_FORM), from_polysymplectic(PAIR_FORM)),
        "covelocity": (build_model("covelocity", (1, 2)), None),
        "coadjoint": (build_model("coadjoint", (heisenberg(), 2)), heis_sum()),
    }
    results = {}
    for name, (m, target) in builders.items():
        results[f"{name} axioms"] = check_groupoid_axioms(m.chart).ok
        results[f"{name} (2.2)"] = check_multiplicative(m.chart, m.omega).ok
        results[f"{name} ε*θ = 0, inv*θ = −θ"] = check_unit_inv(m.chart, m.omega).ok
        results[f"{name} IM (2.6)/(2.7)/(2.11)"] = check_im_form(m.algebroid, m.mu).ok
        results[f"{name} i_uR ω = t*μ(u)"] = check_compatibility(m).ok
        pp = induced_structure(m)
        if target is None:
            target = trivial_structure(pp.ring, 2)
            results[f"{name} zero anchor"] = all(X.is_zero() for X in pp.anchor)
        results[f"{name} induced = named target"] = same_structure(pp, target).ok
        im, nd = prop24_sides(m)
        results[f"{name} Prop 2.4"] = im and nd
        im, nd = prop24_sides(drop_component(m, 1))
        results[f"{name} Prop 2.4 on dropped component"] = im == nd
    conclude(capsys, 6, "groupoid builders, IM forms, induced targets, Prop 2.4", results)


# -- 7 ------------------------------------------------------------------------------------

def test_criterion_7_reduction(capsys):
    cov, heis = covelocity_translation(2, 2), heisenberg_cotangent(2)
    leaves = {"covelocity": (cov, covelocity_translation_level(cov)),
              "Heisenberg": (heis, heisenberg_level(heis, (0, 0, 1, 0, 1, 2)))}
    results = {}
    for name, (s, leaf) in leaves.items():
        results[f"{name} reducible"] = check_reducible(s.pp, s.action).ok
        red = reduce_structure(s.pp, s.action, s.quotient)
        results[f"{name} reduced PASS"] = check_structure(red).ok
        results[f"{name} Π morphism"] = is_morphism(s.quotient.pi, s.pp, red).ok
        wr, lrep = level_reduce(s.omega, s.action, s.J, leaf.lsm)
        pts = points_for(SamplePlan(seed=3, count=3), wr.ring)
        results[f"{name} compare_leaf at {len(pts)} points"] = (
            len(pts) >= 3 and lrep.ok and compare_leaf(red, wr, leaf.to_quotient, pts).ok)
        if name == "covelocity":
            results["level reduction = covelocities(1,2)"] = rename(wr, covelocities(1, 2).ring) == \
                covelocities(1, 2).omega
    results["Heisenberg reduction = g*_(2)"] = same_structure(
        reduce_structure(heis.pp, heis.action, heis.quotient), heis_sum()).ok
    every = dict(leaves)
    every["product"] = product_planes()
    every["degenerate"] = degenerate_level()
    for name, (s, leaf) in every.items():
        b = check_reducible(s.pp, s.action).verdict("(4.2)(b) (S ∩ Ann V)° ⊂ V") == PASS
        _, rep = level_reduce(s.omega, s.action, s.J, leaf.lsm)
        crit = rep.verdict("(4.11) (S ∩ Ann V)° ∩ TJ⁻¹(ζ) ⊆ V_ζ") == PASS
        results[f"{name} (4.2)(b) ⇒ (4.11)"] = (not b) or crit
    results["degenerate fixture exercises the FAIL side"] = check_reducible(
        every["degenerate"][0].pp, every["degenerate"][0].action).verdict("(4.2)(b) (S ∩ Ann V)° ⊂ V") == FAIL
    conclude(capsys, 7, "reducibility, quotient morphisms, level reduction, leaves, Prop 4.4(a)", results)


# -- 8 ------------------------------------------------------------------------------------

def test_criterion_8_groupoid_reduction(capsys):
    results = {}
    for name, gr in (("covelocity groupoid", covelocity_groupoid_reduction(2)),
                     ("pair groupoid", pair_groupoid_reduction())):
        out, rep = gr.run()
        results[f"{name} groupoid checks"] = all(c.verdict == PASS for c in rep.checks
                                                 if c.name.startswith("reduced: "))
        results[f"{name} induced = reduced base"] = any(c.name.startswith("induced vs reduced base: ")
                                                        for c in rep.checks) and rep.ok
        base = gr.reduced_base()
        Br = out.chart.base
        moved = PolyPoissonStruct(Br, base.k, tuple(rename(s, Br) for s in base.frame),
                                  tuple(rename(X, Br) for X in base.anchor), base.plan)
        results[f"{name} independent induced comparison"] = same_structure(induced_structure(out), moved).ok
    conclude(capsys, 8, "groupoid reduction integrates the reduced base structure", results)


# -- 9 ------------------------------------------------------------------------------------

def test_criterion_9_cli_determinism(capsys, tmp_path):
    files = [str(p) for p in shipped_scenarios()]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    codes = [main(["check", *files, "--format", "structured", "--seed", "11", "--out", str(out)]) for out in (a, b)]
    results = {"exit codes 0": codes == [0, 0], "byte-identical structured reports": a.read_bytes() == b.read_bytes()}
    golden = {}
    for p in GOLDEN.glob("*.json"):
        g = json.loads(p.read_text())
        golden[g["name"]] = g["verdicts"]
    results["23 golden vectors"] = len(golden) == len(files) == 23
    got = verdicts_from_document(to_document([run_file(Path(f)) for f in files]))
    for name, verdicts in golden.items():
        results[f"golden {name}"] = got.get(name) == verdicts
    conclude(capsys, 9, "CLI determinism and golden verdict vectors", results)
