from __future__ import annotations

from dataclasses import replace

import pytest

from polysym.cartan import KForm, PolyMap, VectorField, ext_d, interior, rename
from polysym.exactalg import SamplePlan, points_for
from polysym.fixtures import (covelocity_groupoid_reduction, covelocity_translation, covelocity_translation_level,
                              degenerate_level, heisenberg_cotangent, heisenberg_level, pair_groupoid_reduction,
                              product_planes)
from polysym.groupoid import build_covelocity
from polysym.liealg import abelian, heisenberg
from polysym.polypoisson import (check_structure, from_polysymplectic, is_morphism, lie_poisson_direct_sum,
                                 same_structure)
from polysym.polysymp import covelocities
from polysym.reduction import (ActionData, MomentData, QuotientModel, ann_vertical_intersection, check_action,
                               check_moment, check_quotient, check_reducible, compare_leaf, level_reduce,
                               moment_is_morphism, reduce_groupoid, reduce_structure)
from polysym.report import FAIL, PASS

HEIS_ZETA = (0, 0, 1, 0, 1, 2)
REDUCIBLE = "(4.2)(b) (S ∩ Ann V)° ⊂ V"
CRITERION = "(4.11) (S ∩ Ann V)° ∩ TJ⁻¹(ζ) ⊆ V_ζ"


def cov():
    return covelocity_translation(2, 2)


def heis():
    return heisenberg_cotangent(2)


def perturbed(J: MomentData, slot: int, extra) -> MomentData:
    comps = list(J.J.components)
    comps[slot] = comps[slot] + extra
    return MomentData(PolyMap(J.J.domain, J.J.codomain, tuple(comps)))


def systems_with_levels():
    c = cov()
    h = heis()
    p, pl = product_planes()
    d, dl = degenerate_level()
    return {
        "covelocity": (c, covelocity_translation_level(c)),
        "heisenberg": (h, heisenberg_level(h, HEIS_ZETA)),
        "product": (p, pl),
        "degenerate": (d, dl),
    }


# -- actions and quotients ----------------------------------------------------------------

@pytest.mark.parametrize("make", [cov, heis, lambda: product_planes()[0], lambda: degenerate_level()[0]])
def test_fixture_actions_and_quotients_are_consistent(make):
    s = make()
    assert check_action(s.action).ok
    assert check_quotient(s.quotient, s.action).ok


def test_action_family_must_reproduce_generators():
    s = cov()
    bad = replace(s.action, generators=(s.action.generators[0].scale(s.omega.ring(2)),))
    assert check_action(bad).verdict("family generates u1") == FAIL


def test_non_invariant_quotient_rejected():
    s = cov()
    R = s.omega.ring
    Y = s.quotient.sigma.domain
    pi = PolyMap(R, Y, (R.gens[0],) + R.gens[2:])
    rep = check_quotient(QuotientModel(pi, s.quotient.sigma), s.action)
    assert rep.verdict("pi invariant") == FAIL


# -- S ∩ ⊕Ann(V) ---------------------------------------------------------------------------

def test_covelocity_intersection_rank_four():
    s = cov()
    frame, rep = ann_vertical_intersection(s.pp, s.action)
    assert rep.data["rank"] == 4 == len(frame)
    # every element annihilates ∂q1 in each slot
    gen = s.action.generators[0]
    assert all(interior(gen, f.component(j)).is_zero() for f in frame for j in range(2))


def test_trivial_action_intersection_is_all_of_s():
    s = cov()
    frame, rep = ann_vertical_intersection(s.pp, replace(s.action, generators=(), family=None))
    assert rep.data["rank"] == s.pp.rank == len(frame)


def test_full_vertical_bundle_intersection_is_zero():
    s = cov()
    R = s.omega.ring
    everything = ActionData(R, tuple(VectorField.coordinate(R, i) for i in range(R.ngens)))
    _, rep = ann_vertical_intersection(s.pp, everything)
    assert rep.data["rank"] == 0


# -- check_reducible / reduce_structure ---------------------------------------------------------

@pytest.mark.parametrize("make", [cov, heis, lambda: product_planes()[0]])
def test_reducible_fixtures(make):
    s = make()
    assert check_reducible(s.pp, s.action).ok


def test_degenerate_fixture_not_reducible():
    s, _ = degenerate_level()
    rep = check_reducible(s.pp, s.action)
    assert rep.verdict(REDUCIBLE) == FAIL
    assert "annihilator" in rep.first_failure().witness


def test_covelocity_reduced_structure_is_morphism_target():
    s = cov()
    red = reduce_structure(s.pp, s.action, s.quotient)
    assert red.n == 5 and red.k == 2
    assert check_structure(red).ok
    assert is_morphism(s.quotient.pi, s.pp, red).ok


def test_heisenberg_reduced_structure_is_direct_sum():
    s = heis()
    red = reduce_structure(s.pp, s.action, s.quotient)
    assert check_structure(red).ok
    assert is_morphism(s.quotient.pi, s.pp, red).ok
    assert same_structure(red, lie_poisson_direct_sum(heisenberg(), 2)).ok


def test_trivial_action_reduces_to_itself():
    s = cov()
    R = s.omega.ring
    ident = PolyMap(R, R, R.gens)
    action = ActionData(R, ())
    red = reduce_structure(s.pp, action, QuotientModel(ident, ident))
    assert same_structure(red, s.pp).ok


def test_reduce_structure_refuses_non_reducible():
    s, _ = degenerate_level()
    with pytest.raises(ValueError, match="not reducible"):
        reduce_structure(s.pp, s.action, s.quotient)


# -- moment maps -----------------------------------------------------------------------------

@pytest.mark.parametrize("make", [cov, heis, lambda: product_planes()[0], lambda: degenerate_level()[0]])
def test_fixture_moment_maps(make):
    s = make()
    rep = check_moment(s.omega, s.action, s.J)
    assert rep.ok, str(rep)
    assert rep.verdict("(i) J∘φ_g = Ad*_g∘J") == PASS


def test_covelocity_moment_map_is_fibre_momentum():
    s = cov()
    R = s.omega.ring
    assert list(s.J.J.components) == [R.gens[2], R.gens[4]]


def test_perturbed_moment_map_fails_ii():
    s = cov()
    q1 = s.omega.ring.gens[0]
    rep = check_moment(s.omega, s.action, perturbed(s.J, 0, q1))
    assert rep.verdict("(ii) i_uM ω = d<J,u>") == FAIL
    assert rep.first_failure().witness["residual"] == "-1"


def test_moment_shape_mismatch_rejected():
    s = cov()
    with pytest.raises(ValueError):
        check_moment(s.omega, s.action, heis().J)


@pytest.mark.parametrize("make", [cov, heis, lambda: product_planes()[0]])
def test_contraction_with_generator_is_closed(make):
    s = make()
    for X in s.action.generators:
        assert ext_d(interior(X, s.omega.omega)).is_zero()


def test_moment_maps_are_morphisms():
    s = cov()
    assert moment_is_morphism(s.omega, s.J, abelian(1), 2).ok
    h = heis()
    assert moment_is_morphism(h.omega, h.J, heisenberg(), 2).ok


def test_perturbed_moment_map_is_not_morphism():
    # for an abelian target (b) follows from (a), since dJ_j(X) = ω_j(X, X) = 0; so the
    # perturbation must push J*σ out of S
    s = cov()
    p1_2 = s.omega.ring.gens[3]
    rep = moment_is_morphism(s.omega, perturbed(s.J, 0, p1_2), abelian(1), 2)
    assert rep.verdict("(a) pullback lies in S") == FAIL


def test_casimir_shifted_moment_map_is_still_morphism():
    s = cov()
    q2 = s.omega.ring.gens[1]
    assert moment_is_morphism(s.omega, perturbed(s.J, 0, q2), abelian(1), 2).ok


# -- level reductions -------------------------------------------------------------------------

def test_covelocity_level_reduction_is_covelocities_1_2():
    s = cov()
    leaf = covelocity_translation_level(s)
    red, rep = level_reduce(s.omega, s.action, s.J, leaf.lsm)
    assert rep.ok, str(rep)
    target = covelocities(1, 2)
    assert rename(red, target.ring) == target.omega


def test_heisenberg_level_reduction():
    s = heis()
    leaf = heisenberg_level(s, HEIS_ZETA)
    red, rep = level_reduce(s.omega, s.action, s.J, leaf.lsm)
    assert rep.ok, str(rep)
    R = red.ring
    assert red == KForm(R, 2, ({(0, 1): -R.one}, {(0, 1): R(-2)}))


def test_heisenberg_level_requires_generic_zeta():
    with pytest.raises(ValueError, match="generic"):
        heisenberg_level(heis(), (1, 0, 0, 0, 1, 0))


def test_product_level_reduction_is_blockwise():
    s, leaf = product_planes()
    red, rep = level_reduce(s.omega, s.action, s.J, leaf.lsm)
    assert rep.ok, str(rep)
    R = red.ring
    # (qa2, pa2, qb2, pb2): each slot keeps its own reduced plane
    assert red == KForm(R, 2, ({(0, 1): R.one}, {(2, 3): R.one}))


def test_degenerate_level_reduction_fails_criterion():
    s, leaf = degenerate_level()
    red, rep = level_reduce(s.omega, s.action, s.J, leaf.lsm)
    assert red is not None and red.is_zero()
    assert rep.verdict(CRITERION) == FAIL
    assert rep.verdict("ω_red nondegenerate") == FAIL
    assert rep.verdict("clean (4.8)") == PASS


def test_level_reduction_refuses_unclean_value():
    # J = (p1_1², p2_1) has the same zero set, but dJ drops rank along it
    s = cov()
    leaf = covelocity_translation_level(s)
    J = s.J.J
    sq = MomentData(PolyMap(J.domain, J.codomain, (J.components[0] ** 2, J.components[1])))
    red, rep = level_reduce(s.omega, s.action, sq, leaf.lsm)
    assert red is None
    assert rep.verdict("clean (4.8)") == FAIL


def test_level_set_model_requires_immersive_psi():
    s = cov()
    leaf = covelocity_translation_level(s)
    R, D = s.omega.ring, leaf.lsm.psi.domain
    comps = list(leaf.lsm.psi.components)
    comps[1] = D.zero
    lsm = replace(leaf.lsm, psi=PolyMap(D, R, tuple(comps)))
    _, rep = level_reduce(s.omega, s.action, s.J, lsm)
    assert rep.verdict("psi immersive") == FAIL


@pytest.mark.parametrize("name", ["covelocity", "heisenberg", "product", "degenerate"])
def test_reducibility_implies_level_criterion(name):
    s, leaf = systems_with_levels()[name]
    red_ok = check_reducible(s.pp, s.action).verdict(REDUCIBLE) == PASS
    _, rep = level_reduce(s.omega, s.action, s.J, leaf.lsm)
    crit_ok = rep.verdict(CRITERION) == PASS
    assert (not red_ok) or crit_ok
    assert crit_ok == (rep.verdict("ω_red nondegenerate") == PASS)


# -- leaves ------------------------------------------------------------------------------------

def leaf_points(ring, count=3):
    return points_for(SamplePlan(seed=3, count=count), ring)


@pytest.mark.parametrize("name", ["covelocity", "heisenberg"])
def test_compare_leaf(name):
    s, leaf = systems_with_levels()[name]
    pp_red = reduce_structure(s.pp, s.action, s.quotient)
    red, _ = level_reduce(s.omega, s.action, s.J, leaf.lsm)
    pts = leaf_points(red.ring)
    assert len(pts) >= 3
    rep = compare_leaf(pp_red, red, leaf.to_quotient, pts)
    assert rep.ok, str(rep)


def test_compare_leaf_mismatch_reports_entry():
    s, leaf = systems_with_levels()["heisenberg"]
    pp_red = reduce_structure(s.pp, s.action, s.quotient)
    red, _ = level_reduce(s.omega, s.action, s.J, leaf.lsm)
    rep = compare_leaf(pp_red, red.scale(red.ring(2)), leaf.to_quotient, leaf_points(red.ring))
    assert rep.verdict("ω_red = ω_L") == FAIL
    w = rep.first_failure().witness
    assert w["entry"] == "(0, 1)" and w["leaf"] == "-1" and w["reduced"] == "-2"


# -- groupoid reductions -------------------------------------------------------------------------

def test_covelocity_groupoid_reduction():
    gr = covelocity_groupoid_reduction(2)
    out, rep = gr.run()
    assert rep.ok, str(rep)
    assert rep.verdict("J∘m = J∘pr1 + J∘pr2") == PASS and rep.verdict("J∘ε = 0") == PASS
    target = build_covelocity(1, 2)
    assert out.omega == rename(target.omega, out.chart.arrows)
    R = out.omega.ring
    assert out.omega == KForm(R, 2, ({(0, 1): R.one}, {(0, 2): R.one}))


def test_pair_groupoid_reduction():
    gr = pair_groupoid_reduction()
    out, rep = gr.run()
    assert rep.ok, str(rep)
    R = out.omega.ring
    assert out.omega == KForm(R, 2, ({(0, 1): -R.one}, {(0, 1): R(-2)}))
    base = gr.reduced_base()
    assert same_structure(rename_structure(base, out.chart.base), induced_from(out)).ok


def rename_structure(pp, ring):
    from polysym.polypoisson import PolyPoissonStruct

    return PolyPoissonStruct(ring, pp.k, tuple(rename(s, ring) for s in pp.frame),
                             tuple(rename(X, ring) for X in pp.anchor), pp.plan)


def induced_from(model):
    from polysym.groupoid import induced_structure

    return induced_structure(model)


def test_groupoid_reduction_trivial_group_returns_input():
    gr = covelocity_groupoid_reduction(2)
    G = gr.model.chart.arrows
    out, rep = reduce_groupoid(gr.model, ActionData(G, ()), gr.J, gr.lsm, gr.base_quotient,
                               gr.reduced_base(), gr.reduced_chart)
    assert out is gr.model
    assert rep.verdict("trivial group") == PASS


def test_groupoid_reduction_detects_non_additive_moment():
    gr = covelocity_groupoid_reduction(2)
    G = gr.model.chart.arrows
    bad = perturbed(gr.J, 0, G.gens[0] * G.gens[2])
    with pytest.raises(ValueError):
        reduce_groupoid(gr.model, gr.action, bad, gr.lsm, gr.base_quotient, gr.reduced_base(), gr.reduced_chart)


def test_base_reduction_of_pair_fixture_is_trivial_line():
    base = pair_groupoid_reduction().reduced_base()
    assert base.n == 1 and all(X.is_zero() for X in base.anchor)
    assert check_structure(base).ok
    # (dx∧dy, 2dx∧dy) reduced by ∂x leaves the tuples (c·dy, 2c·dy)
    assert [[c for c in f.stacked()] for f in base.frame] in ([[base.ring.one, base.ring(2)]],
                                                             [[-base.ring.one, base.ring(-2)]])


def test_from_polysymplectic_covelocity_level_matches_target_structure():
    s = cov()
    leaf = covelocity_translation_level(s)
    red, _ = level_reduce(s.omega, s.action, s.J, leaf.lsm)
    assert same_structure(from_polysymplectic(rename(red, covelocities(1, 2).ring)),
                          from_polysymplectic(covelocities(1, 2))).ok
