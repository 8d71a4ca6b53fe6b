"""Ready-made symmetric systems: covelocity spaces with lifted actions, products and groupoids.

Each constructor returns plain data (forms, actions, moment maps, quotient
and level-set models) that the checkers in :mod:`polysym.reduction`
consume.  The level-set parametrizations and quotient sections are written
out explicitly, since nothing is solved symbolically.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cartan import KForm, PolyMap, VectorField, partial
from .exactalg import SamplePlan, names_of, poly_ring, qq
from .groupoid import GroupoidChart, GroupoidModel, build_covelocity, build_pair
from .liealg import GroupCoordinates, LieAlgebra, abelian, heisenberg, mat_vec, transpose, mat_mul
from .polypoisson import PolyPoissonStruct, from_polysymplectic, lie_poisson_names
from .polysymp import PolySympForm, covelocities
from .reduction import ActionData, LevelSetModel, MomentData, QuotientModel


@dataclass(frozen=True, eq=False)
class SymmetricSystem:
    """A poly-symplectic manifold with a hamiltonian action and its quotient."""

    omega: PolySympForm
    pp: PolyPoissonStruct
    action: ActionData
    J: MomentData
    quotient: QuotientModel
    algebra: LieAlgebra

    @property
    def k(self) -> int:
        return self.omega.k


@dataclass(frozen=True, eq=False)
class LeafData:
    """A level-set model together with the map M_ζ → M/𝔾 used to compare leaves."""

    lsm: LevelSetModel
    to_quotient: PolyMap


def _moment_ring(m: int, k: int):
    return poly_ring(lie_poisson_names(m, k))


def covelocity_translation(nq: int = 2, k: int = 2, plan: SamplePlan | None = None) -> SymmetricSystem:
    """⊕_k T*R^nq with the cotangent lift of translation in q1; J = (p1_1, ..., pk_1)."""
    plan = plan or SamplePlan()
    w = covelocities(nq, k)
    R = w.ring
    gen = VectorField.coordinate(R, 0)
    D = poly_ring(names_of(R) + ("a1",))
    fam = PolyMap(D, R, (D.gens[0] + D.gens[-1],) + D.gens[1:-1])
    action = ActionData(R, (gen,), fam, ((D.one,),), plan)
    J = MomentData(PolyMap(R, _moment_ring(1, k), tuple(R.gens[nq * (1 + j)] for j in range(k))))
    Y = poly_ring(names_of(R)[1:])
    pi = PolyMap(R, Y, R.gens[1:])
    sigma = PolyMap(Y, R, (Y.zero,) + Y.gens)
    return SymmetricSystem(w, from_polysymplectic(w, plan), action, J, QuotientModel(pi, sigma), abelian(1))


def covelocity_translation_level(sys: SymmetricSystem) -> LeafData:
    """J⁻¹(0) = {p_1 = 0} parametrized by the remaining coordinates, modulo q1."""
    w = sys.omega
    R = w.ring
    names = names_of(R)
    k = w.k
    nq = R.ngens // (1 + k)
    drop = {nq * (1 + j) for j in range(k)}
    keep = [i for i in range(R.ngens) if i not in drop]
    D = poly_ring(tuple(names[i] for i in keep))
    psi = PolyMap.from_positions(D, R, [keep.index(i) if i in keep else None for i in range(R.ngens)])
    Z = poly_ring(tuple(names[i] for i in keep[1:]))
    res = QuotientModel(PolyMap(D, Z, D.gens[1:]), PolyMap(Z, D, (Z.zero,) + Z.gens))
    lsm = LevelSetModel(tuple([0] * k), psi, res)
    Y = sys.quotient.pi.codomain
    F = sys.quotient.pi.compose(psi.compose(res.sigma))
    return LeafData(lsm, PolyMap(Z, Y, F.components))


def heisenberg_cotangent(k: int = 2, plan: SamplePlan | None = None) -> SymmetricSystem:
    """⊕_k T*H₃ with the cotangent lift of left multiplication.

    Group coordinates are exponential coordinates q; u_Q is the
    right-invariant field of u, J_j = <p^(j), u_Q>, and the quotient map is
    the negated left trivialization η_j = −LI(q)^T p^(j) onto g*_(k), which
    makes it Poisson for :func:`lie_poisson_direct_sum`.
    """
    plan = plan or SamplePlan()
    g = heisenberg()
    gc = GroupCoordinates(g)
    d = g.dim
    w = covelocities(d, k)
    R = w.ring
    q = list(R.gens[:d])
    ps = [list(R.gens[d * (1 + j):d * (2 + j)]) for j in range(k)]
    RI = gc.right_invariant(q)
    LI = gc.left_invariant(q)
    gens = []
    for u in range(d):
        Y = [RI[i][u] for i in range(d)]
        coeffs = list(Y)
        for j in range(k):
            coeffs += [-sum((ps[j][l] * partial(Y[l], i) for l in range(d)), R.zero) for i in range(d)]
        gens.append(VectorField(R, tuple(coeffs)))
    D = poly_ring(names_of(R) + tuple(f"a{i + 1}" for i in range(d)))
    qd = list(D.gens[:d])
    a = list(D.gens[R.ngens:])
    qn = gc.product(a, qd)
    lid = gc.left_invariant(qd)
    lmc = gc.left_mc(qn)
    Mp = transpose(mat_mul(lid, lmc))
    comps = list(qn)
    for j in range(k):
        comps += mat_vec(Mp, list(D.gens[d * (1 + j):d * (2 + j)]))
    fam = PolyMap(D, R, tuple(comps))
    coad = tuple(tuple(r) for r in gc.coAd(a))
    action = ActionData(R, tuple(gens), fam, coad, plan)
    Jc = []
    for j in range(k):
        Jc += mat_vec(transpose(RI), ps[j])
    J = MomentData(PolyMap(R, _moment_ring(d, k), tuple(Jc)))
    Y = _moment_ring(d, k)
    pic = []
    for j in range(k):
        pic += [-c for c in mat_vec(transpose(LI), ps[j])]
    pi = PolyMap(R, Y, tuple(pic))
    sigma = PolyMap(Y, R, (Y.zero,) * d + tuple(-z for z in Y.gens))
    return SymmetricSystem(w, from_polysymplectic(w, plan), action, J, QuotientModel(pi, sigma), g)


def heisenberg_level(sys: SymmetricSystem, zeta) -> LeafData:
    """J⁻¹(ζ) ≅ H₃ via q ↦ (q, RMC(q)^T ζ_j); the isotropy of a generic ζ is exp(R e3)."""
    g = sys.algebra
    gc = GroupCoordinates(g)
    d, k = g.dim, sys.k
    zeta = [qq(z) for z in zeta]
    if not any(zeta[j * d + 2] for j in range(k)):
        raise ValueError("ζ must have a nonzero e3-component in some slot (generic orbit)")
    R = sys.omega.ring
    D = poly_ring(("q1", "q2", "q3"))
    q = list(D.gens)
    RMC = gc.right_mc(q)
    comps = list(q)
    for j in range(k):
        comps += mat_vec(transpose(RMC), [D(z) for z in zeta[j * d:(j + 1) * d]])
    psi = PolyMap(D, R, tuple(comps))
    Z = poly_ring(("q1", "q2"))
    res = QuotientModel(PolyMap(D, Z, D.gens[:2]), PolyMap(Z, D, Z.gens + (Z.zero,)))
    lsm = LevelSetModel(tuple(zeta), psi, res)
    F = sys.quotient.pi.compose(psi.compose(res.sigma))
    return LeafData(lsm, F)


def product_planes(plan: SamplePlan | None = None) -> tuple[SymmetricSystem, LeafData]:
    """Two copies of T*R² with q1-translations and ω = (ω_1, ω_2) concatenated, at ζ = 0."""
    plan = plan or SamplePlan()
    names = ("qa1", "qa2", "pa1", "pa2", "qb1", "qb2", "pb1", "pb2")
    R = poly_ring(names)
    w = PolySympForm(KForm(R, 2, ({(0, 2): R.one, (1, 3): R.one}, {(4, 6): R.one, (5, 7): R.one})))
    gens = (VectorField.coordinate(R, 0), VectorField.coordinate(R, 4))
    D = poly_ring(names + ("a1", "a2"))
    x = D.gens
    fam = PolyMap(D, R, (x[0] + x[8],) + x[1:4] + (x[4] + x[9],) + x[5:8])
    action = ActionData(R, gens, fam, ((D.one, D.zero), (D.zero, D.one)), plan)
    J = MomentData(PolyMap(R, _moment_ring(2, 2), (R.gens[2], R.zero, R.zero, R.gens[6])))
    Y = poly_ring(("qa2", "pa1", "pa2", "qb2", "pb1", "pb2"))
    pi = PolyMap(R, Y, tuple(R.gens[i] for i in (1, 2, 3, 5, 6, 7)))
    sigma = PolyMap.from_positions(Y, R, [None, 0, 1, 2, None, 3, 4, 5])
    sys = SymmetricSystem(w, from_polysymplectic(w, plan), action, J, QuotientModel(pi, sigma), abelian(2))
    P = poly_ring(("qa1", "qa2", "pa2", "qb1", "qb2", "pb2"))
    psi = PolyMap.from_positions(P, R, [0, 1, None, 2, 3, 4, None, 5])
    Z = poly_ring(("qa2", "pa2", "qb2", "pb2"))
    res = QuotientModel(PolyMap(P, Z, tuple(P.gens[i] for i in (1, 2, 4, 5))),
                        PolyMap.from_positions(Z, P, [None, 0, 1, None, 2, 3]))
    lsm = LevelSetModel((0, 0, 0, 0), psi, res)
    return sys, LeafData(lsm, pi.compose(psi.compose(res.sigma)))


def degenerate_level(plan: SamplePlan | None = None) -> tuple[SymmetricSystem, LeafData]:
    """A translation whose level-set reduction is degenerate: (4.11) and (4.2)(b) both fail.

    On R⁴ = (a, b, c, e), ω = (da∧db + dc∧de, da∧dc + db∧de) with 𝔾 = R acting by ∂b.
    """
    plan = plan or SamplePlan()
    R = poly_ring(("a", "b", "c", "e"))
    a, b, c, e = R.gens
    w = PolySympForm(KForm(R, 2, ({(0, 1): R.one, (2, 3): R.one}, {(0, 2): R.one, (1, 3): R.one})))
    D = poly_ring(("a", "b", "c", "e", "s"))
    x = D.gens
    fam = PolyMap(D, R, (x[0], x[1] + x[4], x[2], x[3]))
    action = ActionData(R, (VectorField.coordinate(R, 1),), fam, ((D.one,),), plan)
    J = MomentData(PolyMap(R, _moment_ring(1, 2), (-a, e)))
    Y = poly_ring(("a", "c", "e"))
    pi = PolyMap(R, Y, (a, c, e))
    sigma = PolyMap.from_positions(Y, R, [0, None, 1, 2])
    sys = SymmetricSystem(w, from_polysymplectic(w, plan), action, J, QuotientModel(pi, sigma), abelian(1))
    P = poly_ring(("b", "c"))
    psi = PolyMap.from_positions(P, R, [None, 0, 1, None])
    Z = poly_ring(("c",))
    res = QuotientModel(PolyMap(P, Z, (P.gens[1],)), PolyMap(Z, P, (Z.zero, Z.gens[0])))
    lsm = LevelSetModel((0, 0), psi, res)
    return sys, LeafData(lsm, pi.compose(psi.compose(res.sigma)))


# -- groupoid reductions -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GroupoidReduction:
    model: GroupoidModel
    action: ActionData
    J: MomentData
    lsm: LevelSetModel
    base: SymmetricSystem | None
    base_pp: PolyPoissonStruct
    base_action: ActionData
    base_quotient: QuotientModel
    reduced_chart: GroupoidChart

    def reduced_base(self) -> PolyPoissonStruct:
        from .reduction import reduce_structure

        return reduce_structure(self.base_pp, self.base_action, self.base_quotient)

    def run(self):
        from .reduction import reduce_groupoid

        return reduce_groupoid(self.model, self.action, self.J, self.lsm, self.base_quotient,
                               self.reduced_base(), self.reduced_chart)


def covelocity_groupoid_reduction(k: int = 2, plan: SamplePlan | None = None) -> GroupoidReduction:
    """⊕_k T*R² ⇉ R² with translation in q1; the reduction is ⊕_k T*R ⇉ R."""
    from .polypoisson import trivial_structure

    plan = plan or SamplePlan()
    model = build_covelocity(2, k, plan)
    G, B = model.chart.arrows, model.chart.base
    gen = VectorField.coordinate(G, 0)
    D = poly_ring(names_of(G) + ("a1",))
    fam = PolyMap(D, G, (D.gens[0] + D.gens[-1],) + D.gens[1:-1])
    action = ActionData(G, (gen,), fam, ((D.one,),), plan)
    J = MomentData(PolyMap(G, _moment_ring(1, k), tuple(G.gens[2 * (1 + j)] for j in range(k))))
    names = names_of(G)
    drop = {2 * (1 + j) for j in range(k)}
    keep = [i for i in range(G.ngens) if i not in drop]
    P = poly_ring(tuple(names[i] for i in keep))
    psi = PolyMap.from_positions(P, G, [keep.index(i) if i in keep else None for i in range(G.ngens)])
    Z = poly_ring(tuple(names[i] for i in keep[1:]))
    res = QuotientModel(PolyMap(P, Z, P.gens[1:]), PolyMap(Z, P, (Z.zero,) + Z.gens))
    lsm = LevelSetModel(tuple([0] * k), psi, res)
    Bq = poly_ring(("q2",))
    base_q = QuotientModel(PolyMap(B, Bq, (B.gens[1],)), PolyMap(Bq, B, (Bq.zero, Bq.gens[0])))
    base_action = ActionData(B, (VectorField.coordinate(B, 0),), None, None, plan)
    reduced = build_covelocity(1, k, plan).chart
    return GroupoidReduction(model, action, J, lsm, None, trivial_structure(B, k, plan), base_action,
                             base_q, reduced)


def additive_bundle_chart(k: int = 1) -> GroupoidChart:
    """R × R^k ⇉ R with fibrewise addition (the covelocity chart for nq = 1)."""
    return build_covelocity(1, k).chart


def pair_groupoid_reduction(plan: SamplePlan | None = None) -> GroupoidReduction:
    """Pair groupoid of (R², (dx∧dy, 2dx∧dy)) with diagonal x-translation, J = t*J0 − s*J0."""
    plan = plan or SamplePlan()
    B = poly_ring(("x", "y"))
    w = KForm(B, 2, ({(0, 1): B.one}, {(0, 1): B(2)}))
    model = build_pair(w, plan)
    G = model.chart.arrows
    xt, yt, xs, ys = G.gens
    D = poly_ring(names_of(G) + ("a1",))
    z = D.gens
    fam = PolyMap(D, G, (z[0] + z[4], z[1], z[2] + z[4], z[3]))
    gen = VectorField(G, (G.one, G.zero, G.one, G.zero))
    action = ActionData(G, (gen,), fam, ((D.one,),), plan)
    J = MomentData(PolyMap(G, _moment_ring(1, 2), (yt - ys, 2 * (yt - ys))))
    P = poly_ring(("x1", "x2", "y"))
    psi = PolyMap.from_positions(P, G, [0, 2, 1, 2])
    x1, x2, y = P.gens
    Z = poly_ring(("y", "u"))
    res = QuotientModel(PolyMap(P, Z, (y, x1 - x2)), PolyMap(Z, P, (Z.gens[1], Z.zero, Z.gens[0])))
    lsm = LevelSetModel((0, 0), psi, res)
    Bq = poly_ring(("y",))
    base_q = QuotientModel(PolyMap(B, Bq, (B.gens[1],)), PolyMap(Bq, B, (Bq.zero, Bq.gens[0])))
    base_action = ActionData(B, (VectorField.coordinate(B, 0),), None, None, plan)
    base_pp = from_polysymplectic(w, plan)
    return GroupoidReduction(model, action, J, lsm, None, base_pp, base_action, base_q,
                             additive_bundle_chart(1))
