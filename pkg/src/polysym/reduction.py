"""Symmetry reduction of poly-Poisson and poly-symplectic structures.

Quotients are explicit: an invariant polynomial submersion ``pi`` with a
polynomial section ``sigma``.  Level sets of moment maps are given by a
polynomial parametrization ``psi`` together with a residual quotient for
the isotropy action.  Nothing is solved symbolically beyond linear algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .cartan import (KForm, PolyMap, VectorField, ext_d, fields_matrix, frame_matrix, interior, partial,
                     pullback, rename)
from .exactalg import (Mat, SamplePlan, as_poly, contained_q, embed, evaluate, intersection_q, is_zero,
                       nullspace, nullspace_q, point_str, points_for, rank_profile, rank_q, solve_membership,
                       substitute)
from .foliation import leafwise_form_at, span_equal_at
from .groupoid import GroupoidChart, GroupoidModel, IMForm, check_model, induced_structure
from .liealg import LieAlgebra, mat_vec
from .polypoisson import (PolyPoissonStruct, check_structure, from_polysymplectic, is_morphism,
                          lie_poisson_direct_sum, same_structure, to_algebroid)
from .polysymp import PolySympForm, flat_columns, flat_matrix, is_polysymplectic
from .report import Report, timed


@dataclass(frozen=True, eq=False)
class ActionData:
    """Infinitesimal generators u_M of an action, optionally with the action itself.

    ``family`` has domain coordinates (M, g) and gives φ_g(x); ``coadjoint``
    is the matrix of Ad*_g on one copy of g*, with entries in the same ring.
    """

    ring: object
    generators: tuple
    family: PolyMap | None = None
    coadjoint: tuple | None = None
    plan: SamplePlan = field(default_factory=SamplePlan)

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if any(X.ring != self.ring for X in self.generators):
            raise ValueError("generators must live on the action's manifold")

    @property
    def m(self) -> int:
        return len(self.generators)


@dataclass(frozen=True, eq=False)
class QuotientModel:
    pi: PolyMap
    sigma: PolyMap


@dataclass(frozen=True, eq=False)
class MomentData:
    """J : M → g*_(k); component j·m + u is <J_j, u>."""

    J: PolyMap

    def pairing(self, u: int, m: int, k: int) -> list:
        return [self.J.components[j * m + u] for j in range(k)]


@dataclass(frozen=True, eq=False)
class LevelSetModel:
    zeta: tuple
    psi: PolyMap
    residual: QuotientModel


def _identity_check(rep: Report, name: str, lhs: Sequence, rhs: Sequence) -> bool:
    for i, (a, b) in enumerate(zip(lhs, rhs)):
        if not is_zero(a - b):
            rep.add(name, False, "identity fails", coordinate=i, residual=a - b)
            return False
    rep.add(name, True)
    return True


def check_action(action: ActionData) -> Report:
    """Constant rank of the generators and, if given, agreement with the action family."""
    rep = Report("check_action")
    R = action.ring
    if action.m:
        prof = rank_profile(fields_matrix(action.generators, R), action.plan)
        ok = prof.generic == action.m and prof.constant
        rep.add("generators independent", ok, f"rank {prof.generic} of {action.m}")
    if action.family is not None:
        D, n = action.family.domain, R.ngens
        vals = list(R.gens) + [R.zero] * (D.ngens - n)
        for u, X in enumerate(action.generators):
            got = [substitute(partial(c, n + u), vals, R) for c in action.family.components]
            if not _identity_check(rep, f"family generates u{u + 1}", got, X.coeffs):
                break
    return rep


def check_quotient(qm: QuotientModel, action: ActionData) -> Report:
    rep = Report("check_quotient")
    _identity_check(rep, "pi∘sigma = id", qm.pi.compose(qm.sigma).components, qm.sigma.domain.gens)
    bad = None
    for u, X in enumerate(action.generators):
        for i, c in enumerate(qm.pi.components):
            v = X.apply(c)
            if not is_zero(v):
                bad = (u, i, v)
                break
        if bad:
            break
    if bad:
        rep.add("pi invariant", False, "a generator moves pi", generator=bad[0], coordinate=bad[1], residual=bad[2])
    else:
        rep.add("pi invariant", True)
    return rep


# -- reducibility ------------------------------------------------------------------

def ann_vertical_intersection(pp: PolyPoissonStruct, action: ActionData) -> tuple[list, Report]:
    """A frame of S ∩ ⊕_k Ann(V), with a constant-rank report."""
    rep = Report("ann_vertical_intersection")
    R, r = pp.ring, pp.rank
    with timed() as t:
        rows = []
        for X in action.generators:
            for j in range(pp.k):
                rows.append([interior(X, s.component(j)).values()[0] for s in pp.frame])
        if rows and r:
            coeffs = nullspace(Mat.from_rows(R, rows, r))
        else:
            coeffs = [[R.one if a == b else R.zero for a in range(r)] for b in range(r)]
        frame = []
        for c in coeffs:
            acc = KForm.zero(R, 1, pp.k)
            for ca, s in zip(c, pp.frame):
                if not is_zero(ca):
                    acc = acc + s.scale(ca)
            frame.append(acc)
        if frame:
            prof = rank_profile(frame_matrix(frame, R), pp.plan)
            ok, rank = prof.constant and prof.generic == len(frame), prof.generic
        else:
            ok, rank = True, 0
    if ok:
        rep.add("(4.2)(a) constant rank", True, f"rank {rank}", t[0])
    else:
        p, rk = prof.drops()[0] if prof.drops() else (None, None)
        rep.add("(4.2)(a) constant rank", False, f"generic rank {rank}", t[0],
                point=point_str(p) if p else "", rank=rk)
    rep.data["rank"] = rank
    rep.data["coefficients"] = coeffs
    return frame, rep


def _annihilator_at(frame: Sequence[KForm], n: int, p) -> list:
    rows = [[evaluate(c, p) for c in row] for s in frame for row in s.rows()]
    if not rows:
        return [[1 if i == l else 0 for i in range(n)] for l in range(n)]
    return nullspace_q(rows, n)


def check_reducible(pp: PolyPoissonStruct, action: ActionData) -> Report:
    """(4.2): constant rank of S ∩ ⊕Ann(V) and (S ∩ ⊕Ann(V))° ⊂ V at sample points."""
    frame, rep = ann_vertical_intersection(pp, action)
    rep.title = "check_reducible"
    n = pp.n
    with timed() as t:
        bad = None
        for p in pp.points():
            ker = _annihilator_at(frame, n, p)
            gens = [X.at(p) for X in action.generators]
            if not contained_q(ker, gens, n):
                bad = (p, ker)
                break
    if bad:
        rep.add("(4.2)(b) (S ∩ Ann V)° ⊂ V", False, "annihilator leaves the vertical bundle", t[0],
                point=point_str(bad[0]), annihilator=bad[1])
    else:
        rep.add("(4.2)(b) (S ∩ Ann V)° ⊂ V", True, "", t[0])
    rep.data["frame"] = frame
    return rep


def reduce_structure(pp: PolyPoissonStruct, action: ActionData, qm: QuotientModel,
                     check: bool = True) -> PolyPoissonStruct:
    """The quotient structure: S_red = {β : Π*β ∈ S}, P_red(β) = dΠ(P(Π*β)), read along sigma.

    Along sigma, Π*β lies in S ∩ ⊕Ann(V), so solving the linear system
    Π*β = Σ c_a σ_a there produces the pullbacks by sigma of an invariant
    frame of S ∩ ⊕Ann(V) together with their anchors.  The result is then
    verified globally: Π must be a poly-Poisson morphism.
    """
    if check:
        rep = check_reducible(pp, action)
        if not rep.ok:
            raise ValueError(f"action is not reducible: {rep.first_failure().name}")
        rq = check_quotient(qm, action)
        if not rq.ok:
            raise ValueError(f"quotient model fails {rq.first_failure().name}")
    Y = qm.sigma.domain
    n, nr, k = pp.n, Y.ngens, pp.k
    sig = qm.sigma
    dpi = [[sig(partial(c, l)) for l in range(n)] for c in qm.pi.components]
    cols = []
    for j in range(k):
        for i in range(nr):
            col = [Y.zero] * (k * n)
            for l in range(n):
                col[j * n + l] = dpi[i][l]
            cols.append(col)
    for s in pp.frame:
        cols.append([-sig(c) for c in s.stacked()])
    kernel = nullspace(Mat.from_columns(Y, cols, k * n))
    frame, anchor = [], []
    for v in kernel:
        f, c = v[:k * nr], v[k * nr:]
        frame.append(KForm.one_forms(Y, [f[j * nr:(j + 1) * nr] for j in range(k)]))
        X = [Y.zero] * n
        for ca, P in zip(c, pp.anchor):
            if not is_zero(ca):
                X = [x + ca * sig(a) for x, a in zip(X, P.coeffs)]
        anchor.append(VectorField(Y, tuple(sum((X[l] * dpi[i][l] for l in range(n)), Y.zero)
                                           for i in range(nr))))
    red = PolyPoissonStruct(Y, k, tuple(frame), tuple(anchor), pp.plan)
    if check:
        chk = check_structure(red)
        if not chk.ok:
            raise ValueError(f"reduced structure fails {chk.first_failure().name}")
        mor = is_morphism(qm.pi, pp, red)
        if not mor.ok:
            raise ValueError("no invariant frame: the quotient map is not a poly-Poisson morphism "
                             f"({mor.first_failure().name})")
    return red


# -- moment maps -------------------------------------------------------------------

def _form(w) -> KForm:
    return w.omega if isinstance(w, PolySympForm) else w


def check_moment(omega, action: ActionData, J: MomentData) -> Report:
    """(4.7): (ii) i_{u_M}ω = d<J, u>, and (i) J∘φ_g = Ad*_g∘J when the action family is known."""
    w = _form(omega)
    rep = Report("check_moment")
    m, k = action.m, w.k
    if J.J.domain != w.ring or J.J.codomain.ngens != k * m:
        raise ValueError("moment map must go from M to g*_(k)")
    with timed() as t:
        bad = None
        for u, X in enumerate(action.generators):
            lhs = interior(X, w)
            rhs = ext_d(KForm.functions(w.ring, J.pairing(u, m, k)))
            if lhs != rhs:
                res = (lhs - rhs).stacked()
                i = next(i for i, c in enumerate(res) if not is_zero(c))
                bad = (u, i, res[i])
                break
    if bad:
        rep.add("(ii) i_uM ω = d<J,u>", False, "moment condition fails", t[0],
                generator=bad[0], entry=bad[1], residual=bad[2])
    else:
        rep.add("(ii) i_uM ω = d<J,u>", True, "", t[0])
    if action.family is not None and action.coadjoint is not None:
        with timed() as t:
            F = action.family
            D = F.domain
            lhs = [F(c) for c in J.J.components]
            Je = [embed(c, D) for c in J.J.components]
            rhs = []
            for j in range(k):
                rhs += mat_vec([list(r) for r in action.coadjoint], Je[j * m:(j + 1) * m])
        _identity_check(rep, "(i) J∘φ_g = Ad*_g∘J", lhs, rhs)
    return rep


def moment_is_morphism(omega, J: MomentData, g: LieAlgebra, k: int, plan: SamplePlan | None = None) -> Report:
    """J : (M, ω) → g*_(k) is a poly-Poisson morphism."""
    w = _form(omega)
    target = lie_poisson_direct_sum(g, k, plan)
    Jm = PolyMap(J.J.domain, target.ring, J.J.components)
    return is_morphism(Jm, from_polysymplectic(w, plan), target)


def _symplectic_structure(w: KForm, plan: SamplePlan) -> PolyPoissonStruct:
    """S = Im ω♭ with the frame i_{∂i}ω; anchors are ∂_i."""
    R = w.ring
    return PolyPoissonStruct(R, w.k, tuple(flat_columns(w)),
                             tuple(VectorField.coordinate(R, i) for i in range(R.ngens)), plan)


def check_level_set(lsm: LevelSetModel, J: MomentData, plan: SamplePlan) -> Report:
    rep = Report("level set")
    psi = lsm.psi
    D = psi.domain
    _identity_check(rep, "J∘psi = ζ", [psi(c) for c in J.J.components], [D(z) for z in lsm.zeta])
    prof = rank_profile(Mat.from_rows(D, psi.jacobian(), D.ngens), plan)
    rep.add("psi immersive", prof.generic == D.ngens and prof.constant, f"rank {prof.generic} of {D.ngens}")
    res = lsm.residual
    _identity_check(rep, "residual pi∘sigma = id", res.pi.compose(res.sigma).components, res.sigma.domain.gens)
    return rep


def level_reduce(omega, action: ActionData, J: MomentData, lsm: LevelSetModel) -> tuple[KForm | None, Report]:
    """ω_red on M_ζ with Π_ζ*ω_red = i_ζ*ω, plus the criterion (4.11) and nondegeneracy."""
    w = _form(omega)
    plan = action.plan
    rep = Report("level_reduce")
    rep.extend(check_moment(w, action, J))
    rep.extend(check_level_set(lsm, J, plan))
    psi = lsm.psi
    D = psi.domain
    n, d = w.n, D.ngens
    dJ = [[psi(partial(c, l)) for l in range(n)] for c in J.J.components]
    pts = points_for(plan, D)
    bad = None
    for y in pts:
        r = rank_q([[evaluate(c, y) for c in row] for row in dJ], n)
        if r != n - d:
            bad = (y, r)
            break
    if bad:
        rep.add("clean (4.8)", False, f"rank dJ = {bad[1]}, expected {n - d}", point=point_str(bad[0]))
        return None, rep
    rep.add("clean (4.8)", True, f"rank dJ = {n - d} at {len(pts)} points")
    iw = pullback(psi, w)
    red = pullback(lsm.residual.sigma, iw)
    back = pullback(lsm.residual.pi, red)
    if back == iw:
        rep.add("(4.10) Π_ζ*ω_red = i_ζ*ω", True)
    else:
        rep.add("(4.10) Π_ζ*ω_red = i_ζ*ω", False, "i_ζ*ω is not basic for the residual quotient",
                residual=(back - iw))
    rep.add("ω_red closed", ext_d(red).is_zero())

    frame, _ = ann_vertical_intersection(_symplectic_structure(w, plan), action)
    crit = None
    for y in pts:
        x = psi.at(y)
        ann = _annihilator_at(frame, n, x)
        T = [[evaluate(row[a], y) for row in psi.jacobian()] for a in range(d)]
        V = [X.at(x) for X in action.generators]
        A = intersection_q(ann, T, n) if ann else []
        B = intersection_q(V, T, n) if V else []
        if A and not contained_q(A, B, n):
            crit = (y, A)
            break
    if crit:
        rep.add("(4.11) (S ∩ Ann V)° ∩ TJ⁻¹(ζ) ⊆ V_ζ", False, "criterion fails", point=point_str(crit[0]),
                excess=crit[1])
    else:
        rep.add("(4.11) (S ∩ Ann V)° ∩ TJ⁻¹(ζ) ⊆ V_ζ", True, f"at {len(pts)} points")
    nd = is_polysymplectic(red, plan)
    c = nd.checks[-1]
    rep.add("ω_red nondegenerate", c.verdict, c.detail, **c.witness)
    return red, rep


# -- leaves ------------------------------------------------------------------------

def _entry(w: KForm, j: int, a: int, b: int, y) -> object:
    if a == b:
        return 0
    I, sgn = ((a, b), 1) if a < b else ((b, a), -1)
    c = w.comps[j].get(I)
    return 0 if c is None else sgn * evaluate(c, y)


def compare_leaf(pp_red: PolyPoissonStruct, omega_red: KForm, F: PolyMap, points: Sequence) -> Report:
    """At each point y of M_ζ: dF(T_y M_ζ) = P_red(S_red) at F(y), and ω_red = F*ω_L there."""
    rep = Report("compare_leaf")
    n, d = pp_red.n, omega_red.n
    Jf = F.jacobian()
    tan_bad = form_bad = None
    for y in points:
        m = F.at(y)
        T = [[evaluate(Jf[i][a], y) for i in range(n)] for a in range(d)]
        D = [X.at(m) for X in pp_red.anchor]
        if rank_q(T, n) != d or not span_equal_at(T, D, n):
            tan_bad = y
            break
        L = leafwise_form_at(pp_red, m)
        for j in range(pp_red.k):
            for a in range(d):
                for b in range(a + 1, d):
                    got = L.evaluate(j, T[a], T[b])
                    want = _entry(omega_red, j, a, b, y)
                    if got != want:
                        form_bad = (y, j, a, b, got, want)
                        break
                if form_bad:
                    break
            if form_bad:
                break
        if form_bad:
            break
    if tan_bad is not None:
        rep.add("T M_ζ = P_red(S_red)", False, "tangent spaces differ", point=point_str(tan_bad))
    else:
        rep.add("T M_ζ = P_red(S_red)", True, f"at {len(points)} points")
    if form_bad:
        y, j, a, b, got, want = form_bad
        rep.add("ω_red = ω_L", False, "leaf forms differ", point=point_str(y), component=j,
                entry=(a, b), leaf=got, reduced=want)
    elif tan_bad is None:
        rep.add("ω_red = ω_L", True, f"at {len(points)} points")
    return rep


# -- groupoids ---------------------------------------------------------------------

def _moment_groupoid_checks(rep: Report, chart: GroupoidChart, J: MomentData) -> None:
    comps = J.J.components
    _identity_check(rep, "J∘m = J∘pr1 + J∘pr2", [chart.m(c) for c in comps],
                    [chart.pr1(c) + chart.pr2(c) for c in comps])
    _identity_check(rep, "J∘ε = 0", [chart.eps(c) for c in comps], [chart.base.zero] * len(comps))


def reduce_groupoid(model: GroupoidModel, action: ActionData, J: MomentData, lsm: LevelSetModel,
                    base_quotient: QuotientModel, base_reduced: PolyPoissonStruct,
                    reduced_chart: GroupoidChart) -> tuple[GroupoidModel, Report]:
    """J⁻¹(0)/𝔾 with the level-reduced form, checked to integrate the reduced base structure.

    ``reduced_chart`` is the quotient groupoid's chart, with arrows
    identified positionally with the residual quotient's coordinates and
    base identified with the base quotient's coordinates.
    """
    rep = Report("reduce_groupoid")
    if action.m == 0:
        rep.add("trivial group", True, "input returned unchanged")
        return model, rep
    _moment_groupoid_checks(rep, model.chart, J)
    red, lr = level_reduce(model.omega, action, J, lsm)
    rep.extend(lr, prefix="level: ")
    if red is None:
        raise ValueError("zero is not a clean value")
    ch = model.chart
    res = lsm.residual
    Gr, Br = reduced_chart.arrows, reduced_chart.base
    for name, big, small in (("s", ch.s, reduced_chart.s), ("t", ch.t, reduced_chart.t)):
        lhs = base_quotient.pi.compose(big.compose(lsm.psi))
        small = small if small.domain == res.pi.codomain else rename(small, res.pi.codomain)
        rhs = small.compose(res.pi)
        _identity_check(rep, f"Π_0 intertwines {name}", lhs.components, rhs.components)
    omega = rename(red, Gr)
    pp_b = PolyPoissonStruct(Br, base_reduced.k, tuple(rename(s, Br) for s in base_reduced.frame),
                             tuple(rename(X, Br) for X in base_reduced.anchor), base_reduced.plan)
    alg = to_algebroid(pp_b)
    M = flat_matrix(omega)
    uR = []
    for mu in pp_b.frame:
        c = solve_membership(M, pullback(reduced_chart.t, mu).stacked())
        if c is None:
            raise ValueError("no right-invariant field solves i_uR ω_red = t*μ(u)")
        uR.append(VectorField(Gr, tuple(as_poly(x, Gr) for x in c)))
    out = GroupoidModel(reduced_chart, omega, alg, IMForm(pp_b.frame), tuple(uR), model.plan)
    rep.extend(check_model(out), prefix="reduced: ")
    if rep.ok:
        rep.extend(same_structure(induced_structure(out), pp_b), prefix="induced vs reduced base: ")
    return out, rep
