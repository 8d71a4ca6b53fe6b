"""Poly-Poisson structures (S, P) presented by a global frame of S.

A structure is a list of k-tuples of 1-forms ``frame`` spanning S together
with the anchor ``P(σ_a)`` of each frame element.  The checker verifies the
defining conditions as exact polynomial identities plus rank conditions at
deterministic sample points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from sympy import QQ

from .cartan import (KForm, PolyMap, VectorField, compose_field, ext_d, frame_matrix, interior,
                     lie_bracket, lie_derivative, partial, pullback, stacked_matrix)
from .exactalg import (Mat, SamplePlan, evaluate, field_of, intersection_dim_q, is_zero, names_of,
                       nullspace_q, numer_denom, point_str, points_for, poly_ring, rank_profile,
                       rank_q, solve_membership, solve_q, to_frac)
from .liealg import LieAlgebra
from .polysymp import flat_columns, is_polysymplectic
from .report import WARN, Report, timed


@dataclass(frozen=True, eq=False)
class PolyPoissonStruct:
    ring: object
    k: int
    frame: tuple
    anchor: tuple
    plan: SamplePlan = field(default_factory=SamplePlan)

    def __post_init__(self):
        object.__setattr__(self, "frame", tuple(self.frame))
        object.__setattr__(self, "anchor", tuple(self.anchor))
        if len(self.frame) != len(self.anchor):
            raise ValueError("one anchor field per frame element")
        for s in self.frame:
            if s.r != 1 or s.k != self.k or s.ring != self.ring:
                raise ValueError("frame elements must be k-tuples of 1-forms on the structure's domain")
        for X in self.anchor:
            if X.ring != self.ring:
                raise ValueError("anchor fields must live on the structure's domain")

    @property
    def n(self) -> int:
        return self.ring.ngens

    @property
    def rank(self) -> int:
        return len(self.frame)

    def with_plan(self, plan: SamplePlan) -> "PolyPoissonStruct":
        return PolyPoissonStruct(self.ring, self.k, self.frame, self.anchor, plan)

    def points(self, avoid: Sequence = ()) -> list[tuple]:
        return points_for(self.plan, self.ring, avoid)


@dataclass(frozen=True, eq=False)
class LieAlgebroidData:
    """Anchor and structure coefficients [σ_a, σ_b] = Σ_e c[(a, b)][e] σ_e of a framed algebroid."""

    ring: object
    anchor: tuple
    structure: dict

    @property
    def rank(self) -> int:
        return len(self.anchor)

    @property
    def n(self) -> int:
        return self.ring.ngens

    def coeffs(self, a: int, b: int) -> list:
        F = field_of(self.ring)
        if a == b:
            return [F.zero] * self.rank
        if (a, b) in self.structure:
            return self.structure[(a, b)]
        if (b, a) in self.structure:
            return [-c for c in self.structure[(b, a)]]
        return [F.zero] * self.rank


# -- bracket ------------------------------------------------------------------

def bracket_forms(Pa: VectorField, sa: KForm, Pb: VectorField, sb: KForm) -> KForm:
    """L_{P(σ_a)} σ_b − i_{P(σ_b)} dσ_a."""
    return lie_derivative(Pa, sb) - interior(Pb, ext_d(sa))


def bracket(pp: PolyPoissonStruct, a: int, b: int) -> KForm:
    return bracket_forms(pp.anchor[a], pp.frame[a], pp.anchor[b], pp.frame[b])


def combine_fields(coeffs: Sequence, fields: Sequence[VectorField], ring) -> tuple:
    """Σ c_e X_e as coefficients in the fraction field."""
    F = field_of(ring)
    out = [F.zero] * ring.ngens
    for c, X in zip(coeffs, fields):
        if is_zero(c):
            continue
        for i, a in enumerate(X.coeffs):
            if not is_zero(a):
                out[i] = out[i] + c * to_frac(a, ring)
    return tuple(out)


def _residual(lhs: Sequence, rhs: Sequence, ring) -> list:
    return [to_frac(a, ring) - to_frac(b, ring) for a, b in zip(lhs, rhs)]


def _first_nonzero(vals: Sequence):
    for i, v in enumerate(vals):
        if not is_zero(v):
            return i, v
    return None


def _regular_at_samples(coeffs: Sequence, pp_plan: SamplePlan, ring) -> tuple | None:
    """First (point, denominator) where a coefficient denominator vanishes, else None."""
    dens = [numer_denom(c)[1] for c in coeffs]
    dens = [d for d in dens if not d.is_ground]
    if not dens:
        return None
    pts = points_for(SamplePlan(pp_plan.seed, pp_plan.count, pp_plan.box), ring)
    for p in pts:
        for d in dens:
            if not evaluate(d, p):
                return p, d
    return None


# -- clauses --------------------------------------------------------------------

def _clause_subbundle(pp: PolyPoissonStruct, rep: Report) -> None:
    with timed() as t:
        if pp.rank == 0:
            rep.add("subbundle", True, "empty frame")
            return
        rows = [s.stacked() for s in pp.frame]
        prof = rank_profile(Mat.from_rows(pp.ring, rows, pp.k * pp.n), pp.plan)
    if prof.generic != pp.rank:
        rep.add("subbundle", False, f"frame has generic rank {prof.generic} < {pp.rank}", t[0],
                generic_rank=prof.generic)
    elif not prof.constant:
        p, r = prof.drops()[0]
        rep.add("subbundle", False, f"frame rank drops to {r}", t[0], point=point_str(p), rank=r)
    else:
        rep.add("subbundle", True, f"rank {pp.rank}", t[0])


def _clause_antisymmetry(pp: PolyPoissonStruct, rep: Report) -> None:
    with timed() as t:
        bad = None
        for a in range(pp.rank):
            for b in range(a, pp.rank):
                s = interior(pp.anchor[a], pp.frame[b]) + interior(pp.anchor[b], pp.frame[a])
                if not s.is_zero():
                    bad = (a, b, s)
                    break
            if bad:
                break
    if bad:
        a, b, s = bad
        rep.add("(i) antisymmetry", False, "i_{P(a)} b + i_{P(b)} a is not zero", t[0],
                pair=(a, b), residual=s)
    else:
        rep.add("(i) antisymmetry", True, "", t[0])


def stacked_components(pp: PolyPoissonStruct) -> Mat:
    """(r·k) × n matrix of every component 1-form of every frame element."""
    if pp.rank == 0:
        return Mat(pp.ring, 0, pp.n, ())
    return stacked_matrix(pp.frame)


def _clause_annihilator(pp: PolyPoissonStruct, rep: Report) -> None:
    with timed() as t:
        M = stacked_components(pp)
        if M.rows == 0:
            prof = None
        else:
            prof = rank_profile(M, pp.plan)
    if pp.n == 0:
        rep.add("(ii) annihilator", True, "zero-dimensional base")
        return
    if prof is None or prof.generic < pp.n:
        p = pp.points()[0]
        ker = nullspace_q(M.at(p), pp.n) if M.rows else [[1 if i == 0 else 0 for i in range(pp.n)]]
        rank = 0 if prof is None else prof.generic
        rep.add("(ii) annihilator", False, f"S° is nonzero (generic rank {rank} < {pp.n})", t[0],
                point=point_str(p), annihilating_vector=[str(v) for v in ker[0]])
    elif not prof.constant:
        p, r = prof.drops()[0]
        ker = nullspace_q(M.at(p), pp.n)
        rep.add("(ii) annihilator", False, f"S° is nonzero at a sample point (rank {r})", t[0],
                point=point_str(p), annihilating_vector=[str(v) for v in ker[0]])
    else:
        rep.add("(ii) annihilator", True, f"stacked rank {pp.n}", t[0])


def _clause_closure(pp: PolyPoissonStruct, rep: Report) -> dict | None:
    """Closure under the bracket plus the anchor identity; returns the structure table."""
    with timed() as t:
        table: dict = {}
        fail = None
        warn = None
        if pp.rank:
            M = frame_matrix(pp.frame)
        for a in range(pp.rank):
            for b in range(a + 1, pp.rank):
                br = bracket(pp, a, b)
                c = solve_membership(M, br.stacked())
                if c is None:
                    fail = ("closure", (a, b), br)
                    break
                bad = _regular_at_samples(c, pp.plan, pp.ring)
                if bad and warn is None:
                    warn = ((a, b), bad)
                lhs = combine_fields(c, pp.anchor, pp.ring)
                rhs = lie_bracket(pp.anchor[a], pp.anchor[b]).coeffs
                res = _first_nonzero(_residual(lhs, rhs, pp.ring))
                if res is not None:
                    fail = ("anchor", (a, b), res)
                    break
                table[(a, b)] = c
            if fail:
                break
    if fail:
        kind, pair, w = fail
        if kind == "closure":
            rep.add("(iii)' closure", False, "bracket leaves the span of the frame", t[0],
                    pair=pair, bracket=w)
        else:
            i, v = w
            rep.add("(iii)' closure", False, "anchor does not preserve brackets (3.2)", t[0],
                    pair=pair, coordinate=names_of(pp.ring)[i], residual=v)
        return None
    if warn:
        pair, (p, d) = warn
        rep.add("(iii)' closure", WARN, "closure coefficient denominator vanishes at a sample point",
                t[0], pair=pair, point=point_str(p), denominator=d)
    else:
        rep.add("(iii)' closure", True, "", t[0])
    return table


def check_structure(pp: PolyPoissonStruct) -> Report:
    """Frame rank, (i) antisymmetry, (ii) S° = 0 and (iii)' closure with the anchor identity."""
    rep = Report("check_structure")
    _clause_subbundle(pp, rep)
    _clause_antisymmetry(pp, rep)
    _clause_annihilator(pp, rep)
    table = _clause_closure(pp, rep)
    if table is not None:
        rep.data["structure"] = table
    return rep


def check_weak(pp: PolyPoissonStruct) -> Report:
    """As check_structure but with (ii) relaxed to Im(P) ∩ S° = 0 at sample points."""
    rep = Report("check_weak")
    _clause_subbundle(pp, rep)
    _clause_antisymmetry(pp, rep)
    with timed() as t:
        M = stacked_components(pp)
        bad = None
        for p in pp.points():
            ker = nullspace_q(M.at(p), pp.n) if M.rows else [
                [1 if i == j else 0 for i in range(pp.n)] for j in range(pp.n)]
            im = [X.at(p) for X in pp.anchor]
            im = [v for v in im if any(v)]
            if ker and im and intersection_dim_q(ker, im, pp.n):
                bad = p
                break
    if bad is not None:
        rep.add("(3.3) Im(P) ∩ S° = 0", False, "image of P meets the annihilator", t[0],
                point=point_str(bad))
    else:
        rep.add("(3.3) Im(P) ∩ S° = 0", True, "", t[0])
    table = _clause_closure(pp, rep)
    if table is not None:
        rep.data["structure"] = table
    return rep


def jacobiator(pp: PolyPoissonStruct, table: dict | None = None) -> Report:
    """Jacobi identity on frame triples, expanded through the structure coefficients.

    Uses [f σ_e, σ_c] = f [σ_e, σ_c] − (P(σ_c) f) σ_e, which holds for any
    antisymmetric bracket with the Leibniz rule.
    """
    rep = Report("jacobiator")
    if table is None:
        chk = check_structure(pp)
        table = chk.data.get("structure")
        if table is None:
            rep.add("jacobiator", False, "structure does not close", reason=chk.first_failure().name)
            return rep
    alg = LieAlgebroidData(pp.ring, pp.anchor, table)
    r = pp.rank
    F = field_of(pp.ring)
    with timed() as t:
        bad = None
        for a in range(r):
            for b in range(a + 1, r):
                for c in range(b + 1, r):
                    total = [F.zero] * r
                    for (x, y, z) in ((a, b, c), (b, c, a), (c, a, b)):
                        cxy = alg.coeffs(x, y)
                        for e in range(r):
                            if is_zero(cxy[e]):
                                continue
                            cez = alg.coeffs(e, z)
                            for g in range(r):
                                if not is_zero(cez[g]):
                                    total[g] += cxy[e] * cez[g]
                            total[e] -= _apply_frac(pp.anchor[z], cxy[e])
                    nz = _first_nonzero(total)
                    if nz is not None:
                        bad = ((a, b, c), nz)
                        break
                if bad:
                    break
            if bad:
                break
    if bad:
        rep.add("jacobiator", False, "Jacobiator is nonzero", t[0], triple=bad[0], residual=bad[1][1])
    else:
        rep.add("jacobiator", True, "", t[0])
    return rep


def _apply_frac(X: VectorField, f):
    """X(f) for a rational function f."""
    out = f - f
    for i, a in enumerate(X.coeffs):
        if not is_zero(a):
            out = out + to_frac(a, X.ring) * partial(f, i)
    return out


# -- builders -----------------------------------------------------------------

def from_polysymplectic(w, plan: SamplePlan | None = None) -> PolyPoissonStruct:
    """S = Im ω♭ with frame i_{∂_i}ω and P(i_{∂_i}ω) = ∂_i."""
    from .polysymp import _form
    plan = plan or SamplePlan()
    rep = is_polysymplectic(w, plan)
    if not rep.ok:
        raise ValueError(f"form is not poly-symplectic: {rep.first_failure().name}")
    w = _form(w)
    return PolyPoissonStruct(w.ring, w.k, tuple(flat_columns(w)),
                             tuple(VectorField.coordinate(w.ring, i) for i in range(w.n)), plan)


def _sharp_fields(ring, pi: Sequence[Sequence], offset: int = 0, n: int | None = None) -> list[VectorField]:
    """π^♯(dx_i) = Σ_l π^{il} ∂_l, embedded at ``offset`` in ``ring``."""
    n = len(pi) if n is None else n
    out = []
    for i in range(n):
        coeffs = [ring.zero] * ring.ngens
        for l in range(n):
            coeffs[offset + l] = pi[i][l]
        out.append(VectorField(ring, tuple(coeffs)))
    return out


def poisson_structure(ring, pi: Sequence[Sequence], plan: SamplePlan | None = None) -> PolyPoissonStruct:
    """The k = 1 structure S = T*M, P = π^♯ of a bivector matrix π."""
    n = ring.ngens
    pi = [[ring(e) if not hasattr(e, "ring") else e for e in row] for row in pi]
    frame = [KForm.one_forms(ring, [[ring.one if j == i else ring.zero for j in range(n)]]) for i in range(n)]
    return PolyPoissonStruct(ring, 1, tuple(frame), tuple(_sharp_fields(ring, pi)), plan or SamplePlan())


def bivector_of(pp: PolyPoissonStruct) -> list[list]:
    """π^{il} = P(dx_i)^l for a k = 1 structure framed by the coordinate differentials."""
    return [list(X.coeffs) for X in pp.anchor]


def product_of_poisson(bivectors: Sequence[tuple], plan: SamplePlan | None = None,
                       prefix: str = "x") -> PolyPoissonStruct:
    """Product poly-Poisson structure of Poisson factors (n_j, π_j).

    Each π_j is a square matrix over a ring with n_j generators (or of
    rationals).  Variables of the product are ``{prefix}{j}_{i}``.
    """
    plan = plan or SamplePlan()
    k = len(bivectors)
    if k == 0:
        raise ValueError("need at least one factor")
    names = []
    for j, (nj, _) in enumerate(bivectors):
        names += [f"{prefix}{j + 1}_{i + 1}" for i in range(nj)]
    R = poly_ring(tuple(names))
    frame, anchor = [], []
    offset = 0
    for j, (nj, pi) in enumerate(bivectors):
        Rj = poly_ring(tuple(names[offset:offset + nj]))
        pij = [[_coerce(e, Rj) for e in row] for row in pi]
        if len(pij) != nj or any(len(row) != nj for row in pij):
            raise ValueError(f"factor {j} bivector must be {nj}x{nj}")
        if any(not is_zero(pij[a][b] + pij[b][a]) for a in range(nj) for b in range(nj)):
            raise ValueError(f"factor {j} bivector is not antisymmetric")
        rep = check_structure(poisson_structure(Rj, pij, plan))
        if not rep.ok:
            raise ValueError(f"factor {j} is not Poisson: {rep.first_failure().name}")
        emb = PolyMap(R, Rj, tuple(R.gens[offset:offset + nj]))
        for i in range(nj):
            rows = [[R.zero] * R.ngens for _ in range(k)]
            rows[j][offset + i] = R.one
            frame.append(KForm.one_forms(R, rows))
            coeffs = [R.zero] * R.ngens
            for l in range(nj):
                coeffs[offset + l] = emb(pij[i][l])
            anchor.append(VectorField(R, tuple(coeffs)))
        offset += nj
    return PolyPoissonStruct(R, k, tuple(frame), tuple(anchor), plan)


def _coerce(e, ring):
    if hasattr(e, "ring"):
        if e.ring == ring:
            return e
        return ring.from_dict(dict(e.terms())) if e else ring.zero
    return ring(e)


def lie_poisson_names(dim: int, k: int, prefix: str = "z") -> tuple[str, ...]:
    return tuple(f"{prefix}{j + 1}_{l + 1}" for j in range(k) for l in range(dim))


def lie_poisson_direct_sum(g: LieAlgebra, k: int, plan: SamplePlan | None = None,
                           prefix: str = "z") -> PolyPoissonStruct:
    """Direct-sum structure on g*_(k): σ_u = (du, ..., du), P(σ_u) = (ad*_u ζ_1, ..., ad*_u ζ_k)."""
    g.validate()
    d = g.dim
    R = poly_ring(lie_poisson_names(d, k, prefix))
    z = R.gens
    frame, anchor = [], []
    for u in range(d):
        rows = [[R.zero] * R.ngens for _ in range(k)]
        for j in range(k):
            rows[j][j * d + u] = R.one
        frame.append(KForm.one_forms(R, rows))
        coeffs = []
        for j in range(k):
            zeta = [z[j * d + m] for m in range(d)]
            coeffs += g.coad(g.basis(u), zeta)
        anchor.append(VectorField(R, tuple(R(c) if not hasattr(c, "ring") else c for c in coeffs)))
    return PolyPoissonStruct(R, k, tuple(frame), tuple(anchor), plan or SamplePlan())


def trivial_structure(ring, k: int, plan: SamplePlan | None = None) -> PolyPoissonStruct:
    """S = ⊕_k T*Q with P = 0."""
    n = ring.ngens
    frame = []
    for j in range(k):
        for i in range(n):
            rows = [[ring.zero] * n for _ in range(k)]
            rows[j][i] = ring.one
            frame.append(KForm.one_forms(ring, rows))
    return PolyPoissonStruct(ring, k, tuple(frame), tuple(VectorField.zero(ring) for _ in frame),
                             plan or SamplePlan())


def diagonal_structure(ring, k: int, plan: SamplePlan | None = None) -> PolyPoissonStruct:
    """S = {(α, ..., α)} with P = 0."""
    n = ring.ngens
    frame = [KForm.one_forms(ring, [[ring.one if l == i else ring.zero for l in range(n)]] * k)
             for i in range(n)]
    return PolyPoissonStruct(ring, k, tuple(frame), tuple(VectorField.zero(ring) for _ in frame),
                             plan or SamplePlan())


def first_slot_structure(ring, k: int, plan: SamplePlan | None = None) -> PolyPoissonStruct:
    """S = {(α, 0, ..., 0)} with P = 0."""
    n = ring.ngens
    frame = []
    for i in range(n):
        rows = [[ring.zero] * n for _ in range(k)]
        rows[0][i] = ring.one
        frame.append(KForm.one_forms(ring, rows))
    return PolyPoissonStruct(ring, k, tuple(frame), tuple(VectorField.zero(ring) for _ in frame),
                             plan or SamplePlan())


# -- morphisms and algebroids ----------------------------------------------------

def is_morphism(f: PolyMap, source: PolyPoissonStruct, target: PolyPoissonStruct) -> Report:
    """(a) f*S_2 ⊆ S_1 and (b) Tf(P_1(f*η)) = P_2(η)∘f, for each target frame element η."""
    rep = Report("is_morphism")
    if f.domain != source.ring or f.codomain.ngens != target.n:
        raise ValueError("map does not go from the source base to the target base")
    if source.k != target.k:
        raise ValueError("structures have different multiplicities")
    with timed() as t:
        M = frame_matrix(source.frame, source.ring) if source.rank else None
        coeffs = []
        fail_a = None
        warn = None
        for e, eta in enumerate(target.frame):
            pb = pullback(f, eta)
            if M is None:
                c = [] if pb.is_zero() else None
            else:
                c = solve_membership(M, pb.stacked())
            if c is None:
                fail_a = (e, pb)
                break
            bad = _regular_at_samples(c, source.plan, source.ring)
            if bad and warn is None:
                warn = (e, bad)
            coeffs.append(c)
    if fail_a:
        e, pb = fail_a
        rep.add("(a) pullback lies in S", False, "pulled-back frame element is outside the source span",
                t[0], target_element=e, pullback=pb)
        return rep
    if warn:
        e, (p, d) = warn
        rep.add("(a) pullback lies in S", WARN, "membership coefficient denominator vanishes at a sample",
                t[0], target_element=e, point=point_str(p), denominator=d)
    else:
        rep.add("(a) pullback lies in S", True, "", t[0])
    with timed() as t:
        fail_b = None
        F = field_of(source.ring)
        for e, c in enumerate(coeffs):
            X = combine_fields(c, source.anchor, source.ring)
            pushed = []
            for comp in f.components:
                acc = F.zero
                for i, a in enumerate(X):
                    if not is_zero(a):
                        acc = acc + a * to_frac(partial(comp, i), source.ring)
                pushed.append(acc)
            tgt = compose_field(_on(target.anchor[e], f.codomain), f)
            res = _first_nonzero(_residual(pushed, tgt, source.ring))
            if res is not None:
                fail_b = (e, res)
                break
        rep.data["pullback_coefficients"] = coeffs
    if fail_b:
        e, (i, v) = fail_b
        rep.add("(b) anchors are f-related", False, "Tf(P_1(f*η)) differs from P_2(η)∘f", t[0],
                target_element=e, coordinate=i, residual=v)
    else:
        rep.add("(b) anchors are f-related", True, "", t[0])
    return rep


def _on(X: VectorField, ring) -> VectorField:
    if X.ring == ring:
        return X
    return VectorField(ring, tuple(_coerce(c, ring) for c in X.coeffs))


def to_algebroid(pp: PolyPoissonStruct) -> LieAlgebroidData:
    rep = check_structure(pp)
    if not rep.ok:
        raise ValueError(f"structure fails {rep.first_failure().name}: {rep.first_failure().detail}")
    return LieAlgebroidData(pp.ring, pp.anchor, rep.data["structure"])


def same_structure(a: PolyPoissonStruct, b: PolyPoissonStruct, points: Sequence | None = None) -> Report:
    """Pointwise equality of spans and of the anchors on matched frame elements.

    Each frame element of ``b`` is expressed in ``a``'s frame (pointwise),
    and the corresponding combination of ``a``'s anchors must equal ``b``'s
    anchor; symmetric span equality is checked by ranks.
    """
    rep = Report("same_structure")
    if a.n != b.n or a.k != b.k:
        rep.add("shape", False, "different dimension or multiplicity", a=(a.n, a.k), b=(b.n, b.k))
        return rep
    pts = list(points) if points is not None else a.points()
    dim = a.k * a.n
    span_bad = anchor_bad = None
    for p in pts:
        A = [[evaluate(c, p) for c in s.stacked()] for s in a.frame]
        B = [[evaluate(c, p) for c in s.stacked()] for s in b.frame]
        ra = rank_q(A, dim) if A else 0
        rb = rank_q(B, dim) if B else 0
        rab = rank_q(A + B, dim) if A or B else 0
        if not (ra == rb == rab):
            span_bad = (p, ra, rb, rab)
            break
        if not B:
            continue
        cols = [[A[e][i] for e in range(len(A))] for i in range(dim)]
        for e, beta in enumerate(B):
            c = solve_q(cols, beta, len(A))
            Xa = [sum((c[m] * evaluate(a.anchor[m].coeffs[i], p) for m in range(len(A))), QQ(0))
                  for i in range(a.n)]
            if any(x - y for x, y in zip(Xa, b.anchor[e].at(p))):
                anchor_bad = (p, e)
                break
        if anchor_bad:
            break
    if span_bad:
        p, ra, rb, rab = span_bad
        rep.add("span", False, "frames span different subspaces", point=point_str(p), ranks=(ra, rb, rab))
    else:
        rep.add("span", True, f"equal at {len(pts)} points")
    if anchor_bad:
        p, e = anchor_bad
        rep.add("anchor", False, "anchors disagree on a matched element", point=point_str(p), element=e)
    elif not span_bad:
        rep.add("anchor", True, f"equal at {len(pts)} points")
    return rep

