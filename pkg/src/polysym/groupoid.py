"""Polynomially charted Lie groupoids with multiplicative R^k-valued 2-forms.

A groupoid is presented by its arrow space R^N, base R^n, structure maps,
and a polynomial parametrization R^P → G_(2) of the composable pairs
(g, h) with s(g) = t(h).  Every axiom then becomes an exact polynomial
identity on an affine space.  Only the trivial representation is used, so
a form θ is multiplicative when m*θ = pr1*θ + pr2*θ.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .cartan import (KForm, PolyMap, VectorField, ext_d, frame_matrix, interior, pullback, push_vector,
                     stacked_matrix)
from .exactalg import SamplePlan, embed, field_of, is_zero, names_of, poly_ring, rank_profile, to_frac
from .liealg import GroupCoordinates, LieAlgebra, mat_vec
from .polypoisson import (LieAlgebroidData, PolyPoissonStruct, check_structure, from_polysymplectic,
                          is_morphism, lie_poisson_names)
from .polysymp import PolySympForm, covelocity_names, is_polysymplectic
from .report import Report, timed


@dataclass(frozen=True, eq=False)
class GroupoidChart:
    """Structure maps of a groupoid; pr1 and pr2 are the first and second factor of a composable pair.

    The optional insertions map an arrow g to a composable-pair parameter:
    ``left_unit`` ↦ (ε(t g), g), ``right_unit`` ↦ (g, ε(s g)),
    ``left_inverse`` ↦ (g⁻¹, g), ``right_inverse`` ↦ (g, g⁻¹).
    """

    s: PolyMap
    t: PolyMap
    eps: PolyMap
    inv: PolyMap
    pr1: PolyMap
    pr2: PolyMap
    m: PolyMap
    left_unit: PolyMap | None = None
    right_unit: PolyMap | None = None
    left_inverse: PolyMap | None = None
    right_inverse: PolyMap | None = None

    @property
    def arrows(self):
        return self.s.domain

    @property
    def base(self):
        return self.s.codomain

    @property
    def comp(self):
        return self.m.domain

    @property
    def N(self) -> int:
        return self.arrows.ngens

    @property
    def n(self) -> int:
        return self.base.ngens

    @property
    def P(self) -> int:
        return self.comp.ngens


@dataclass(frozen=True)
class IMForm:
    mu: tuple

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(self.mu))


@dataclass(frozen=True, eq=False)
class GroupoidModel:
    chart: GroupoidChart
    omega: KForm
    algebroid: LieAlgebroidData
    mu: IMForm
    uR: tuple
    plan: SamplePlan = field(default_factory=SamplePlan)

    def __post_init__(self):
        object.__setattr__(self, "uR", tuple(self.uR))
        r = self.algebroid.rank
        if len(self.mu.mu) != r or len(self.uR) != r:
            raise ValueError("algebroid frame, IM form and right-invariant fields must have equal length")
        if self.omega.ring != self.chart.arrows or self.omega.r != 2:
            raise ValueError("omega must be a 2-form on the arrow space")

    @property
    def k(self) -> int:
        return self.omega.k


# -- checks ------------------------------------------------------------------------

def _map_residual(a: PolyMap, b: PolyMap):
    for i, (x, y) in enumerate(zip(a.components, b.components)):
        if not is_zero(x - y):
            return i, x - y
    return None


def _add_identity(rep: Report, name: str, lhs: PolyMap, rhs: PolyMap) -> None:
    res = _map_residual(lhs, rhs)
    if res is None:
        rep.add(name, True)
    else:
        rep.add(name, False, "identity fails", coordinate=res[0], residual=res[1])


def check_groupoid_axioms(chart: GroupoidChart) -> Report:
    """Charted groupoid identities, plus unit and inverse laws when insertions are given."""
    rep = Report("check_groupoid_axioms")
    A, B = chart.arrows, chart.base
    idA, idB = PolyMap.identity(A), PolyMap.identity(B)
    _add_identity(rep, "s∘pr1 = t∘pr2", chart.s.compose(chart.pr1), chart.t.compose(chart.pr2))
    _add_identity(rep, "s∘eps = id", chart.s.compose(chart.eps), idB)
    _add_identity(rep, "t∘eps = id", chart.t.compose(chart.eps), idB)
    _add_identity(rep, "s∘m = s∘pr2", chart.s.compose(chart.m), chart.s.compose(chart.pr2))
    _add_identity(rep, "t∘m = t∘pr1", chart.t.compose(chart.m), chart.t.compose(chart.pr1))
    _add_identity(rep, "s∘inv = t", chart.s.compose(chart.inv), chart.t)
    _add_identity(rep, "t∘inv = s", chart.t.compose(chart.inv), chart.s)
    laws = (
        ("left unit", chart.left_unit, chart.eps.compose(chart.t), idA, idA),
        ("right unit", chart.right_unit, idA, chart.eps.compose(chart.s), idA),
        ("left inverse", chart.left_inverse, chart.inv, idA, chart.eps.compose(chart.s)),
        ("right inverse", chart.right_inverse, idA, chart.inv, chart.eps.compose(chart.t)),
    )
    for name, ins, first, second, product in laws:
        if ins is None:
            continue
        sub = Report(name)
        _add_identity(sub, "pr1", chart.pr1.compose(ins), first)
        _add_identity(sub, "pr2", chart.pr2.compose(ins), second)
        _add_identity(sub, "m", chart.m.compose(ins), product)
        bad = sub.first_failure()
        if bad is None:
            rep.add(name, True)
        else:
            rep.add(name, False, f"{bad.name} component is wrong", **bad.witness)
    return rep


def _first_coeff(w: KForm):
    for j, comp in enumerate(w.comps):
        for I, c in comp.items():
            return j, I, c
    return None


def check_multiplicative(chart: GroupoidChart, theta: KForm) -> Report:
    """m*θ = pr1*θ + pr2*θ on the composable pairs."""
    rep = Report("check_multiplicative")
    with timed() as t:
        res = pullback(chart.m, theta) - pullback(chart.pr1, theta) - pullback(chart.pr2, theta)
        bad = _first_coeff(res)
    if bad is None:
        rep.add("(2.2) m*θ = pr1*θ + pr2*θ", True, "", t[0])
    else:
        j, I, c = bad
        rep.add("(2.2) m*θ = pr1*θ + pr2*θ", False, "residual form is nonzero", t[0],
                component=j, index=I, residual=c)
    return rep


def check_unit_inv(chart: GroupoidChart, theta: KForm) -> Report:
    """ε*θ = 0 and inv*θ = −θ."""
    rep = Report("check_unit_inv")
    for name, res in (("ε*θ = 0", pullback(chart.eps, theta)),
                      ("inv*θ = −θ", pullback(chart.inv, theta) + theta)):
        bad = _first_coeff(res)
        if bad is None:
            rep.add(name, True)
        else:
            j, I, c = bad
            rep.add(name, False, "residual form is nonzero", component=j, index=I, residual=c)
    return rep


def _frac_stack(w: KForm, ring) -> list:
    return [to_frac(c, ring) for c in w.stacked()]


def check_im_form(A: LieAlgebroidData, mu: IMForm, plan: SamplePlan | None = None) -> Report:
    """The IM equations for μ together with the nondegeneracy condition (2.11)."""
    plan = plan or SamplePlan()
    rep = Report("check_im_form")
    mus = mu.mu
    if len(mus) != A.rank:
        raise ValueError("IM form and algebroid frame have different lengths")
    r, R = A.rank, A.ring
    with timed() as t:
        bad = None
        for u in range(r):
            for v in range(u, r):
                val = interior(A.anchor[u], mus[v]) + interior(A.anchor[v], mus[u])
                if not val.is_zero():
                    bad = (u, v, val)
                    break
            if bad:
                break
    if bad:
        rep.add("(2.6) i_ρ(u)μ(v) + i_ρ(v)μ(u) = 0", False, "symmetric contraction is nonzero", t[0],
                pair=bad[:2], value=bad[2])
    else:
        rep.add("(2.6) i_ρ(u)μ(v) + i_ρ(v)μ(u) = 0", True, "", t[0])

    with timed() as t:
        bad = None
        F = field_of(R)
        stacks = [_frac_stack(m, R) for m in mus]
        for u in range(r):
            for v in range(r):
                if u == v:
                    continue
                c = A.coeffs(u, v)
                lhs = [F.zero] * len(stacks[0]) if stacks else []
                for e, ce in enumerate(c):
                    if not is_zero(ce):
                        lhs = [x + ce * y for x, y in zip(lhs, stacks[e])]
                rhs = _frac_stack(interior(A.anchor[u], ext_d(mus[v])) + ext_d(interior(A.anchor[u], mus[v]))
                                  - interior(A.anchor[v], ext_d(mus[u])), R)
                diff = [x - y for x, y in zip(lhs, rhs)]
                nz = next(((i, d) for i, d in enumerate(diff) if not is_zero(d)), None)
                if nz is not None:
                    bad = (u, v, nz)
                    break
            if bad:
                break
    if bad:
        u, v, (i, d) = bad
        rep.add("(2.7) μ([u,v]) = L_ρ(u)μ(v) − i_ρ(v)dμ(u)", False, "bracket compatibility fails", t[0],
                pair=(u, v), entry=i, residual=d)
    else:
        rep.add("(2.7) μ([u,v]) = L_ρ(u)μ(v) − i_ρ(v)dμ(u)", True, "", t[0])

    with timed() as t:
        if r == 0:
            ok_ker, ok_im, detail = True, R.ngens == 0, "empty frame"
        else:
            pk = rank_profile(frame_matrix(mus, R), plan)
            pi = rank_profile(stacked_matrix(mus), plan)
            ok_ker = pk.generic == r and pk.constant
            ok_im = pi.generic == R.ngens and pi.constant
            detail = f"rank μ = {pk.generic}/{r}, rank of components = {pi.generic}/{R.ngens}"
    if ok_ker and ok_im:
        rep.add("(2.11) ker μ = 0, (Im μ)° = 0", True, detail, t[0])
    else:
        rep.add("(2.11) ker μ = 0, (Im μ)° = 0", False, detail, t[0],
                kernel_trivial=ok_ker, annihilator_trivial=ok_im)
    return rep


def check_compatibility(model: GroupoidModel) -> Report:
    """i_{u^R}ω = t*μ(u) on arrows and t_*(u^R) = ρ(u) along the units."""
    rep = Report("check_compatibility")
    ch = model.chart
    with timed() as t:
        bad = None
        for a, (X, mu) in enumerate(zip(model.uR, model.mu.mu)):
            res = interior(X, model.omega) - pullback(ch.t, mu)
            if not res.is_zero():
                bad = (a, _first_coeff(res))
                break
    if bad:
        a, (j, I, c) = bad
        rep.add("i_uR ω = t*μ(u)", False, "relation fails", t[0], element=a, component=j, index=I, residual=c)
    else:
        rep.add("i_uR ω = t*μ(u)", True, "", t[0])
    with timed() as t:
        bad = None
        for a, X in enumerate(model.uR):
            pushed = [ch.eps(c) for c in push_vector(ch.t, X)]
            rho = model.algebroid.anchor[a].coeffs
            for i, (x, y) in enumerate(zip(pushed, rho)):
                if not is_zero(x - y):
                    bad = (a, i, x - y)
                    break
            if bad:
                break
    if bad:
        rep.add("t_*(uR) = ρ(u) on units", False, "anchor mismatch", t[0],
                element=bad[0], coordinate=bad[1], residual=bad[2])
    else:
        rep.add("t_*(uR) = ρ(u) on units", True, "", t[0])
    return rep


def check_model(model: GroupoidModel) -> Report:
    """Every check of this module on one model."""
    rep = Report("groupoid model")
    rep.extend(check_groupoid_axioms(model.chart))
    rep.extend(check_multiplicative(model.chart, model.omega))
    rep.extend(check_unit_inv(model.chart, model.omega))
    rep.extend(check_im_form(model.algebroid, model.mu, model.plan))
    rep.extend(check_compatibility(model))
    rep.extend(is_polysymplectic(model.omega, model.plan), prefix="ω ")
    return rep


def induced_structure(model: GroupoidModel, verify_target: bool = True) -> PolyPoissonStruct:
    """S = Im μ with P = ρ; the target map is checked to be a poly-Poisson morphism."""
    rep = check_model(model)
    if not rep.ok:
        bad = rep.first_failure()
        raise ValueError(f"model fails {bad.name}: {bad.detail}")
    pp = PolyPoissonStruct(model.chart.base, model.k, model.mu.mu, model.algebroid.anchor, model.plan)
    chk = check_structure(pp)
    if not chk.ok:
        raise ValueError(f"induced structure fails {chk.first_failure().name}")
    if verify_target:
        arrows_pp = from_polysymplectic(model.omega, model.plan)
        mor = is_morphism(model.chart.t, arrows_pp, pp)
        if not mor.ok:
            raise ValueError(f"target map is not a poly-Poisson morphism: {mor.first_failure().name}")
    return pp


def prop24_sides(model: GroupoidModel) -> tuple[bool, bool]:
    """(condition (2.11) on μ, nondegeneracy of ω on arrows): the two sides of the biconditional."""
    im = check_im_form(model.algebroid, model.mu, model.plan)
    nd = is_polysymplectic(model.omega, model.plan)
    return im.verdict("(2.11) ker μ = 0, (Im μ)° = 0") == "PASS", nd.verdict("nondegenerate") == "PASS"


# -- builders ----------------------------------------------------------------------

def _maps(dom, cod, comps) -> PolyMap:
    return PolyMap(dom, cod, tuple(comps))


def build_pair(form, plan: SamplePlan | None = None) -> GroupoidModel:
    """Pair groupoid M × M ⇉ M, t(x, y) = x, s(x, y) = y, with θ = t*ω − s*ω."""
    w = form.omega if isinstance(form, PolySympForm) else form
    plan = plan or SamplePlan()
    rep = is_polysymplectic(w, plan)
    if not rep.ok:
        raise ValueError("pair groupoid needs a poly-symplectic base form")
    B = w.ring
    n = B.ngens
    names = names_of(B)
    G = poly_ring(tuple(f"{v}_t" for v in names) + tuple(f"{v}_s" for v in names))
    C = poly_ring(tuple(f"{v}_{c}" for c in "abc" for v in names))
    g, c, b = G.gens, C.gens, B.gens
    a_, b_, c_ = c[:n], c[n:2 * n], c[2 * n:]
    t = _maps(G, B, g[:n])
    s = _maps(G, B, g[n:])
    chart = GroupoidChart(
        s=s, t=t,
        eps=_maps(B, G, b + b),
        inv=_maps(G, G, g[n:] + g[:n]),
        pr1=_maps(C, G, a_ + b_),
        pr2=_maps(C, G, b_ + c_),
        m=_maps(C, G, a_ + c_),
        left_unit=_maps(G, C, g[:n] + g[:n] + g[n:]),
        right_unit=_maps(G, C, g[:n] + g[n:] + g[n:]),
        left_inverse=_maps(G, C, g[n:] + g[:n] + g[n:]),
        right_inverse=_maps(G, C, g[:n] + g[n:] + g[:n]),
    )
    theta = pullback(t, w) - pullback(s, w)
    anchor = tuple(VectorField.coordinate(B, i) for i in range(n))
    alg = LieAlgebroidData(B, anchor, {})
    mu = IMForm(tuple(interior(X, w) for X in anchor))
    uR = tuple(VectorField.coordinate(G, i) for i in range(n))
    return GroupoidModel(chart, theta, alg, mu, uR, plan)


def build_covelocity(nq: int, k: int, plan: SamplePlan | None = None) -> GroupoidModel:
    """⊕_k T*R^nq ⇉ R^nq with fibrewise addition and the canonical form."""
    G = poly_ring(covelocity_names(nq, k))
    B = poly_ring(tuple(f"q{i + 1}" for i in range(nq)))
    C = poly_ring(covelocity_names(nq, k) + tuple(f"r{j + 1}_{i + 1}" for j in range(k) for i in range(nq)))
    g, c, b = G.gens, C.gens, B.gens
    q, p = g[:nq], g[nq:]
    cq, cp, cr = c[:nq], c[nq:nq * (1 + k)], c[nq * (1 + k):]
    zero = [G.zero] * (nq * k)
    proj = _maps(G, B, q)
    chart = GroupoidChart(
        s=proj, t=proj,
        eps=_maps(B, G, b + tuple([B.zero] * (nq * k))),
        inv=_maps(G, G, q + tuple(-x for x in p)),
        pr1=_maps(C, G, cq + cp),
        pr2=_maps(C, G, cq + cr),
        m=_maps(C, G, cq + tuple(x + y for x, y in zip(cp, cr))),
        left_unit=_maps(G, C, q + tuple(zero) + p),
        right_unit=_maps(G, C, q + p + tuple(zero)),
        left_inverse=_maps(G, C, q + tuple(-x for x in p) + p),
        right_inverse=_maps(G, C, q + p + tuple(-x for x in p)),
    )
    omega = KForm(G, 2, tuple({(i, nq * (1 + j) + i): G.one for i in range(nq)} for j in range(k)))
    anchor, mus, uR = [], [], []
    for j in range(k):
        for i in range(nq):
            rows = [[B.zero] * nq for _ in range(k)]
            rows[j][i] = -B.one
            mus.append(KForm.one_forms(B, rows))
            anchor.append(VectorField.zero(B))
            uR.append(VectorField.coordinate(G, nq * (1 + j) + i))
    alg = LieAlgebroidData(B, tuple(anchor), {})
    return GroupoidModel(chart, omega, alg, IMForm(tuple(mus)), tuple(uR), plan or SamplePlan())


def coadjoint_algebroid(g: LieAlgebra, k: int, prefix: str = "z") -> LieAlgebroidData:
    """Action algebroid of the diagonal coadjoint action on g*_(k), constant frame e_u.

    The anchor u ↦ ad*_u ζ is an anti-homomorphism for a left action, so
    constant sections bracket as [e_u, e_v] = −[u, v].
    """
    d = g.dim
    B = poly_ring(lie_poisson_names(d, k, prefix))
    z = B.gens
    F = field_of(B)
    anchor = []
    for u in range(d):
        coeffs = []
        for j in range(k):
            coeffs += g.coad(g.basis(u), list(z[j * d:(j + 1) * d]))
        anchor.append(VectorField(B, tuple(coeffs)))
    structure = {(a, b): [F(-g.c[a][b][l]) for l in range(d)] for a in range(d) for b in range(a + 1, d)}
    return LieAlgebroidData(B, tuple(anchor), structure)


def build_coadjoint(g: LieAlgebra, k: int, plan: SamplePlan | None = None) -> GroupoidModel:
    """Action groupoid 𝔾 × g*_(k) ⇉ g*_(k) of the diagonal coadjoint action.

    Arrows are (X, η) with X exponential coordinates of the first kind;
    s = η and t = Ad*_X η.  ω_j = −d<η_j, g⁻¹dg> is the canonical form in
    the left trivialization of T*𝔾.
    """
    gc = GroupCoordinates(g)
    d = g.dim
    zn = lie_poisson_names(d, k)
    gn = tuple(f"g{i + 1}" for i in range(d))
    hn = tuple(f"h{i + 1}" for i in range(d))
    G = poly_ring(gn + zn)
    C = poly_ring(gn + hn + zn)
    alg = coadjoint_algebroid(g, k)
    B = alg.ring
    X, eta = list(G.gens[:d]), list(G.gens[d:])
    cg, ch, ceta = list(C.gens[:d]), list(C.gens[d:2 * d]), list(C.gens[2 * d:])

    def coad_blocks(Y, etas):
        M = gc.coAd(Y)
        out = []
        for j in range(k):
            out += mat_vec(M, etas[j * d:(j + 1) * d])
        return out

    zeroG = [G.zero] * d
    t_comps = coad_blocks(X, eta)
    chart = GroupoidChart(
        s=_maps(G, B, eta),
        t=_maps(G, B, t_comps),
        eps=_maps(B, G, [B.zero] * d + list(B.gens)),
        inv=_maps(G, G, [-x for x in X] + t_comps),
        pr1=_maps(C, G, cg + coad_blocks(ch, ceta)),
        pr2=_maps(C, G, ch + ceta),
        m=_maps(C, G, gc.product(cg, ch) + ceta),
        left_unit=_maps(G, C, zeroG + X + eta),
        right_unit=_maps(G, C, X + zeroG + eta),
        left_inverse=_maps(G, C, [-x for x in X] + X + eta),
        right_inverse=_maps(G, C, X + [-x for x in X] + t_comps),
    )
    L = gc.left_mc(X)
    thetas = []
    for j in range(k):
        rows = [G.zero] * G.ngens
        for l in range(d):
            for mm in range(d):
                if not is_zero(L[l][mm]):
                    rows[mm] = rows[mm] + eta[j * d + l] * L[l][mm]
        thetas.append(rows)
    omega = -ext_d(KForm.one_forms(G, thetas))
    Rinv = gc.right_invariant(X)
    uR = tuple(VectorField(G, tuple(Rinv[l][u] for l in range(d)) + tuple([G.zero] * (k * d)))
               for u in range(d))
    mus = []
    for u in range(d):
        rows = [[B.zero] * B.ngens for _ in range(k)]
        for j in range(k):
            rows[j][j * d + u] = B.one
        mus.append(KForm.one_forms(B, rows))
    return GroupoidModel(chart, omega, alg, IMForm(tuple(mus)), uR, plan or SamplePlan())


def build_model(kind: str, params, plan: SamplePlan | None = None) -> GroupoidModel:
    if kind == "pair":
        return build_pair(params, plan)
    if kind == "covelocity":
        nq, k = params
        return build_covelocity(nq, k, plan)
    if kind == "coadjoint":
        g, k = params
        return build_coadjoint(g, k, plan)
    raise ValueError(f"unknown groupoid kind {kind!r}")


# -- derived models ----------------------------------------------------------------

def drop_component(model: GroupoidModel, j: int) -> GroupoidModel:
    """The mutant that forgets component j of ω and of μ."""
    if model.k < 2:
        raise ValueError("cannot drop the only component")
    keep = [i for i in range(model.k) if i != j]
    return replace(model, omega=model.omega.select(keep), mu=IMForm(tuple(m.select(keep) for m in model.mu.mu)))


def corrupt_multiplication(chart: GroupoidChart) -> GroupoidChart:
    """Flip the sign of the last component of m."""
    comps = chart.m.components
    return replace(chart, m=PolyMap(chart.m.domain, chart.m.codomain, comps[:-1] + (-comps[-1],)))


def _embed_map(f: PolyMap, dom, cod, doff: int) -> list:
    return [embed(c, dom, doff) for c in f.components]


def _embed_form(w: KForm, ring, offset: int) -> KForm:
    return KForm(ring, w.r, tuple({tuple(i + offset for i in I): embed(c, ring, offset)
                                    for I, c in comp.items()} for comp in w.comps))


def _product_ring(a, b, tag_a: str = "1", tag_b: str = "2"):
    return poly_ring(tuple(f"{v}__{tag_a}" for v in names_of(a)) + tuple(f"{v}__{tag_b}" for v in names_of(b)))


def product_model(A: GroupoidModel, B: GroupoidModel) -> tuple[GroupoidModel, PolyMap, PolyMap]:
    """Direct product with ω = (pr_A*ω_A, pr_B*ω_B); also returns the two arrow projections."""
    ca, cb = A.chart, B.chart
    G = _product_ring(ca.arrows, cb.arrows)
    M = _product_ring(ca.base, cb.base)
    C = _product_ring(ca.comp, cb.comp)
    NA, nA, PA = ca.N, ca.n, ca.P

    def pm(fa, fb, dom, cod, da):
        return PolyMap(dom, cod, tuple(_embed_map(fa, dom, cod, 0) + _embed_map(fb, dom, cod, da)))

    def opt(fa, fb, dom, cod, da):
        return None if fa is None or fb is None else pm(fa, fb, dom, cod, da)

    chart = GroupoidChart(
        s=pm(ca.s, cb.s, G, M, NA), t=pm(ca.t, cb.t, G, M, NA),
        eps=pm(ca.eps, cb.eps, M, G, nA), inv=pm(ca.inv, cb.inv, G, G, NA),
        pr1=pm(ca.pr1, cb.pr1, C, G, PA), pr2=pm(ca.pr2, cb.pr2, C, G, PA), m=pm(ca.m, cb.m, C, G, PA),
        left_unit=opt(ca.left_unit, cb.left_unit, G, C, NA),
        right_unit=opt(ca.right_unit, cb.right_unit, G, C, NA),
        left_inverse=opt(ca.left_inverse, cb.left_inverse, G, C, NA),
        right_inverse=opt(ca.right_inverse, cb.right_inverse, G, C, NA),
    )
    omega = _embed_form(A.omega, G, 0).concat(_embed_form(B.omega, G, NA))
    F = field_of(M)
    kA, kB = A.k, B.k

    def pad_mu(w, offset, before, after):
        comps = [{} for _ in range(before)] + list(_embed_form(w, M, offset).comps) + [{} for _ in range(after)]
        return KForm(M, 1, tuple(comps))

    mus = tuple(pad_mu(w, 0, 0, kB) for w in A.mu.mu) + tuple(pad_mu(w, nA, kA, 0) for w in B.mu.mu)
    anchor = tuple(VectorField(M, tuple(embed(c, M, 0) for c in X.coeffs) + (M.zero,) * cb.n)
                   for X in A.algebroid.anchor) + tuple(
        VectorField(M, (M.zero,) * nA + tuple(embed(c, M, nA) for c in X.coeffs)) for X in B.algebroid.anchor)
    rA, rB = A.algebroid.rank, B.algebroid.rank

    def lift(c, off):
        num, den = c.numer, c.denom
        return F(embed(num, M, off)) / F(embed(den, M, off))

    structure = {}
    for (a, b), cs in A.algebroid.structure.items():
        structure[(a, b)] = [lift(to_frac(c, ca.base), 0) for c in cs] + [F.zero] * rB
    for (a, b), cs in B.algebroid.structure.items():
        structure[(a + rA, b + rA)] = [F.zero] * rA + [lift(to_frac(c, cb.base), nA) for c in cs]
    uR = tuple(VectorField(G, tuple(embed(c, G, 0) for c in X.coeffs) + (G.zero,) * cb.N) for X in A.uR) + tuple(
        VectorField(G, (G.zero,) * NA + tuple(embed(c, G, NA) for c in X.coeffs)) for X in B.uR)
    model = GroupoidModel(chart, omega, LieAlgebroidData(M, anchor, structure), IMForm(mus), uR, A.plan)
    pa = PolyMap(G, ca.arrows, G.gens[:NA])
    pb = PolyMap(G, cb.arrows, G.gens[NA:])
    return model, pa, pb


def product_comp_projections(A: GroupoidModel, B: GroupoidModel, prod: GroupoidModel) -> tuple[PolyMap, PolyMap]:
    """Projections of the product composable-pair space onto the factors'."""
    C = prod.chart.comp
    PA = A.chart.P
    return PolyMap(C, A.chart.comp, C.gens[:PA]), PolyMap(C, B.chart.comp, C.gens[PA:])
