"""The poly-symplectic foliation of a poly-Poisson structure and its inverse construction.

Everything leaf-related is pointwise linear algebra at rational points.  The
reconstruction of (S, P) from a regular distribution D with a leafwise form
can also be done globally when the caller supplies vector fields completing
D to a frame of TM.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .cartan import KForm, VectorField, _det, ext_d, interior
from .exactalg import (Mat, SamplePlan, evaluate, generic_rank, nullspace_q, point_str, points_for, qq, rank_q,
                       rank_profile, solve_q, span_basis_q)
from .polypoisson import PolyPoissonStruct, check_structure, stacked_components
from .report import Report, timed


@dataclass(frozen=True, eq=False)
class Distribution:
    ring: object
    gens: tuple
    plan: SamplePlan = field(default_factory=SamplePlan)
    generic_rank: int = 0
    singular_points: tuple = ()
    sample_ranks: tuple = ()

    @property
    def n(self) -> int:
        return self.ring.ngens

    @property
    def regular(self) -> bool:
        return not self.singular_points

    def at(self, point) -> list[list]:
        """Generator values at a point, one vector per generator."""
        return [X.at(point) for X in self.gens]


def make_distribution(ring, gens: Sequence[VectorField], plan: SamplePlan | None = None,
                      extra_points: Sequence = ()) -> Distribution:
    plan = plan or SamplePlan()
    gens = tuple(gens)
    if not gens:
        pts = points_for(plan, ring) + list(extra_points)
        return Distribution(ring, gens, plan, 0, (), tuple((p, 0) for p in pts))
    M = Mat.from_columns(ring, [X.coeffs for X in gens], ring.ngens)
    prof = rank_profile(M, plan)
    samples = list(prof.samples) + [(p, rank_q(M.at(p), M.cols)) for p in extra_points]
    singular = tuple((p, r) for p, r in samples if r != prof.generic)
    return Distribution(ring, gens, plan, prof.generic, singular, tuple(samples))


def distribution(pp: PolyPoissonStruct, extra_points: Sequence = ()) -> Distribution:
    """D = P(S), generated by the anchor fields; rank drops are recorded as singular points."""
    return make_distribution(pp.ring, pp.anchor, pp.plan, extra_points)


# -- leafwise forms -------------------------------------------------------------

@dataclass(frozen=True)
class LeafFormAtPoint:
    point: tuple
    p: int
    basis: tuple
    values: tuple

    def __post_init__(self):
        for j, m in enumerate(self.values):
            for a in range(self.p):
                for b in range(self.p):
                    if m[a][b] != -m[b][a]:
                        raise ValueError(f"leaf form component {j} is not antisymmetric")
        if self.p:
            stacked = [list(row) for m in self.values for row in m]
            if rank_q(stacked, self.p) != self.p:
                raise ValueError("leaf form is degenerate")

    def evaluate(self, j: int, u: Sequence, v: Sequence) -> object:
        """ω_j(u, v) for tangent vectors given in ambient coordinates (u, v ∈ span(basis))."""
        cu = _coords_in(self.basis, u)
        cv = _coords_in(self.basis, v)
        return sum((cu[a] * self.values[j][a][b] * cv[b] for a in range(self.p) for b in range(self.p)),
                   QQ(0))


def _coords_in(basis: Sequence[Sequence], v: Sequence) -> list:
    n = len(v)
    rows = [[basis[a][i] for a in range(len(basis))] for i in range(n)]
    c = solve_q(rows, v, len(basis))
    if c is None:
        raise ValueError("vector is not tangent to the leaf")
    return c


def _pivots(vectors: Sequence[Sequence], dim: int) -> list[int]:
    """Indices of a lowest-index maximal independent subset."""
    chosen: list[int] = []
    for i, v in enumerate(vectors):
        if rank_q([vectors[j] for j in chosen] + [v], dim) > len(chosen):
            chosen.append(i)
    return chosen


def leafwise_form_at(pp: PolyPoissonStruct, m: Sequence, generic_rank: int | None = None) -> LeafFormAtPoint:
    """The leaf form ω_O at m: ω_O(P(η), Y) = η(Y) for Y tangent to the leaf."""
    m = tuple(qq(v) for v in m)
    anchors = [X.at(m) for X in pp.anchor]
    if generic_rank is None:
        generic_rank = distribution(pp).generic_rank
    idx = _pivots(anchors, pp.n)
    p = len(idx)
    if p != generic_rank:
        raise ValueError(f"{point_str(m)} is a rank-drop point (rank {p} < {generic_rank})")
    basis = [anchors[i] for i in idx]
    etas = [[[evaluate(c, m) for c in row] for row in pp.frame[i].rows()] for i in idx]
    values = tuple(
        tuple(tuple(sum((etas[a][j][l] * basis[b][l] for l in range(pp.n)), QQ(0)) for b in range(p))
              for a in range(p))
        for j in range(pp.k))
    # well-definedness: frame combinations with zero anchor vanish on the leaf
    if pp.rank:
        A = [[anchors[e][i] for e in range(pp.rank)] for i in range(pp.n)]
        for c in nullspace_q(A, pp.rank):
            for j in range(pp.k):
                eta = [sum((c[e] * evaluate(pp.frame[e].rows()[j][l], m) for e in range(pp.rank)), QQ(0))
                       for l in range(pp.n)]
                for b in basis:
                    if sum((x * y for x, y in zip(eta, b)), QQ(0)):
                        raise ValueError("leaf form is not well defined: a kernel element of P "
                                         "does not vanish on the leaf")
    return LeafFormAtPoint(m, p, tuple(tuple(b) for b in basis), values)


# -- reconstruction -------------------------------------------------------------

@dataclass(frozen=True)
class PointwiseStructure:
    point: tuple
    p: int
    S: tuple
    P: tuple

    @property
    def dim(self) -> int:
        return len(self.S)


@dataclass
class FoliationResult:
    pointwise: list
    structure: PolyPoissonStruct | None
    report: Report


def _form_matrix(w: KForm, j: int, m: Sequence) -> list[list]:
    n = w.n
    A = [[QQ(0)] * n for _ in range(n)]
    for (a, b), c in w.comps[j].items():
        v = evaluate(c, m)
        A[a][b] = v
        A[b][a] = -v
    return A


def _restrict(eta_rows: Sequence[Sequence], basis: Sequence[Sequence]) -> list:
    """Values η_j(d_b), stacked j-major."""
    return [sum((row[l] * d[l] for l in range(len(d))), QQ(0)) for row in eta_rows for d in basis]


def pointwise_structure_at(D: Distribution, w: KForm, m: Sequence) -> PointwiseStructure:
    """S_m and P_m from D_m and ω_m by linear algebra."""
    n, k = D.n, w.k
    vals = D.at(m)
    idx = _pivots(vals, n)
    basis = [vals[i] for i in idx]
    p = len(basis)
    if p != D.generic_rank:
        raise ValueError(f"distribution is singular at {point_str(m)}")
    Om = [_form_matrix(w, j, m) for j in range(k)]
    # i_X ω restricted to D, for X = Σ c_a d_a:  (ω_j(d_a, d_b))_{j,b}
    restr = [[sum((basis[a][s] * Om[j][s][t] * basis[b][t] for s in range(n) for t in range(n)), QQ(0))
              for j in range(k) for b in range(p)] for a in range(p)]
    if p and rank_q(restr, k * p) != p:
        raise ValueError(f"leafwise form is degenerate at {point_str(m)}")
    # unknowns (η stacked k*n, c in R^p): η|_D − Σ c_a restr[a] = 0
    rows = []
    for j in range(k):
        for b in range(p):
            row = [QQ(0)] * (k * n + p)
            for l in range(n):
                row[j * n + l] = basis[b][l]
            for a in range(p):
                row[k * n + a] = -restr[a][j * p + b]
            rows.append(row)
    ker = nullspace_q(rows, k * n + p) if rows else [
        [QQ(1) if i == j else QQ(0) for i in range(k * n)] for j in range(k * n)]
    S, P = [], []
    for v in ker:
        S.append(tuple(v[:k * n]))
        c = v[k * n:]
        P.append(tuple(sum((c[a] * basis[a][i] for a in range(p)), QQ(0)) for i in range(n)))
    return PointwiseStructure(tuple(m), p, tuple(S), tuple(P))


def _closed_on_leaves(D: Distribution, w: KForm, pts: Sequence) -> tuple | None:
    dw = ext_d(w)
    if dw.is_zero():
        return None
    for triple in combinations(range(len(D.gens)), 3):
        X, Y, Z = (D.gens[i] for i in triple)
        v = interior(Z, interior(Y, interior(X, dw)))
        for p in pts:
            for c in v.values():
                if evaluate(c, p):
                    return triple, p
    return None


def annihilator_frame(gens: Sequence[VectorField], complement: Sequence[VectorField]) -> tuple[list, object]:
    """Polynomial covectors killing ``gens`` via the adjugate of [gens | complement].

    Returns the covector rows (one per complement field) and det[gens | complement].
    """
    ring = (list(gens) + list(complement))[0].ring
    n = ring.ngens
    cols = [X.coeffs for X in gens] + [X.coeffs for X in complement]
    if len(cols) != n:
        raise ValueError("distribution generators plus complement must give n fields")
    B = [[cols[c][r] for c in range(n)] for r in range(n)]
    det = _det(B, ring)
    out = []
    for i in range(len(gens), n):
        # row i of adj(B): adj[i][l] = (-1)^{i+l} det(B without row l, column i)
        row = []
        for l in range(n):
            minor = [[B[r][c] for c in range(n) if c != i] for r in range(n) if r != l]
            v = _det(minor, ring)
            row.append(v if (i + l) % 2 == 0 else -v)
        out.append(row)
    return out, det


def structure_from_foliation(D: Distribution, w: KForm, mode: str = "pointwise",
                             complement: Sequence[VectorField] | None = None,
                             points: Sequence | None = None) -> FoliationResult:
    """Reconstruct (S, P) from a regular distribution with a leafwise poly-symplectic form."""
    if w.r != 2 or w.ring != D.ring:
        raise ValueError("ω must be a 2-form on the distribution's domain")
    if mode not in ("pointwise", "framed"):
        raise ValueError(f"unknown mode {mode!r}")
    rep = Report("structure_from_foliation")
    pts = list(points) if points is not None else points_for(D.plan, D.ring)
    n, k, p = D.n, w.k, D.generic_rank
    sing = [q for q, r in D.singular_points]
    bad = [q for q in pts if rank_q(D.at(q), n) != p] if D.gens else []
    if sing or bad:
        q = (sing + bad)[0]
        raise ValueError(f"distribution is not regular at {point_str(q)}")
    closed = _closed_on_leaves(D, w, pts)
    if closed:
        raise ValueError(f"ω is not closed on leaves: dω(D_{closed[0]}) ≠ 0 at {point_str(closed[1])}")
    with timed() as t:
        pw = [pointwise_structure_at(D, w, q) for q in pts]
    expected = k * (n - p) + p
    wrong = [s for s in pw if s.dim != expected]
    if wrong:
        raise ValueError(f"dim S = {wrong[0].dim} ≠ k(n−p)+p = {expected} at {point_str(wrong[0].point)}")
    rep.add("dimension k(n-p)+p", True, f"{expected} at {len(pw)} points", t[0])
    structure = None
    if mode == "framed":
        if complement is None:
            raise ValueError("framed mode needs a complement of D")
        idx = _pivots(D.at(pts[0]), n)
        gens = [D.gens[i] for i in idx]
        rows, det = annihilator_frame(gens, complement)
        for q in pts:
            if not evaluate(det, q):
                raise ValueError(f"complement does not span TM/D at {point_str(q)}")
        R = D.ring
        frame = [interior(X, w) for X in gens]
        anchor = list(gens)
        for j in range(k):
            for row in rows:
                comps = [[R.zero] * n for _ in range(k)]
                comps[j] = list(row)
                frame.append(KForm.one_forms(R, comps))
                anchor.append(VectorField.zero(R))
        structure = PolyPoissonStruct(R, k, tuple(frame), tuple(anchor), D.plan)
        with timed() as t:
            chk = check_structure(structure)
        rep.extend(chk, "framed ")
    return FoliationResult(pw, structure, rep)


def _extend_leaf_form(leaf: LeafFormAtPoint, n: int, ring, k: int) -> KForm:
    """A constant 2-form on R^n restricting to the leaf form, zero on a coordinate complement."""
    basis = [list(b) for b in leaf.basis]
    cols = list(basis)
    for i in range(n):
        e = [QQ(1) if l == i else QQ(0) for l in range(n)]
        if rank_q(cols + [e], n) > len(cols):
            cols.append(e)
    B = DomainMatrix([[cols[c][r] for c in range(n)] for r in range(n)], (n, n), QQ)
    Binv = B.inv().to_Matrix().tolist()
    comps = []
    for j in range(k):
        W = [[QQ(0)] * n for _ in range(n)]
        for a in range(leaf.p):
            for b in range(leaf.p):
                W[a][b] = leaf.values[j][a][b]
        # ambient matrix Binv^T W Binv
        amb = {}
        for s in range(n):
            for t in range(s + 1, n):
                v = sum((Binv[a][s] * W[a][b] * Binv[b][t] for a in range(leaf.p) for b in range(leaf.p)),
                        QQ(0))
                if v:
                    amb[(s, t)] = ring(v)
        comps.append(amb)
    return KForm(ring, 2, tuple(comps))


def round_trip(pp: PolyPoissonStruct, points: Sequence | None = None) -> Report:
    """Rebuild (S, P) pointwise from the foliation of ``pp`` and compare with ``pp``.

    At each point the leaf form is extended by zero on a coordinate
    complement; (3.7)-(3.8) only see its restriction to the leaf.  The
    rebuilt structure is the largest one with this foliation, so its graph
    {η ⊕ P(η)} contains that of ``pp``, with equality iff rank S = k(n-p)+p.
    """
    rep = Report("round_trip")
    D = distribution(pp)
    pts = list(points) if points is not None else points_for(pp.plan, pp.ring)
    n, k, p = pp.n, pp.k, D.generic_rank
    expected = k * (n - p) + p
    maximal = generic_rank(stacked_components(pp)) == expected
    dim_bad = graph_bad = None
    with timed() as t:
        for m in pts:
            leaf = leafwise_form_at(pp, m, p)
            w = _extend_leaf_form(leaf, n, pp.ring, k)
            ps = pointwise_structure_at(D, w, m)
            if ps.dim != expected and dim_bad is None:
                dim_bad = (m, ps.dim)
            rebuilt = [list(s) + list(x) for s, x in zip(ps.S, ps.P)]
            original = [[evaluate(c, m) for c in pp.frame[e].stacked()] + pp.anchor[e].at(m)
                        for e in range(pp.rank)]
            same = (span_equal_at(rebuilt, original, k * n + n) if maximal
                    else rank_q(rebuilt + original, k * n + n) == rank_q(rebuilt, k * n + n))
            if not same and graph_bad is None:
                graph_bad = m
    if dim_bad:
        rep.add("dimension k(n-p)+p", False, f"expected {expected}", t[0] / 2, point=point_str(dim_bad[0]),
                dim=dim_bad[1])
    else:
        rep.add("dimension k(n-p)+p", True, f"{expected} at {len(pts)} points", t[0] / 2)
    name = "graph recovered" if maximal else "graph contained"
    if graph_bad:
        rep.add(name, False, "rebuilt graph differs", t[0] / 2, point=point_str(graph_bad))
    else:
        rep.add(name, True, f"at {len(pts)} points", t[0] / 2)
    return rep


# -- fixtures -------------------------------------------------------------------

def time_family_structure(omega_t: KForm, variant: int, plan: SamplePlan | None = None) -> PolyPoissonStruct:
    """The structures S_0..S_3 on M × R built from a t-dependent form ω_t.

    ``omega_t`` lives on coordinates (m_1..m_d, t) with t last and must not
    involve dt.  S_1 adds (dt in each slot), S_2 adds (dt, ..., dt), S_3 adds
    (dt, 0, ..., 0); S_0 adds nothing and is only weak.
    """
    R = omega_t.ring
    n, k = R.ngens, omega_t.k
    tpos = n - 1
    frame = [interior(VectorField.coordinate(R, i), omega_t) for i in range(tpos)]
    anchor = [VectorField.coordinate(R, i) for i in range(tpos)]

    def dt_in(slots):
        rows = [[R.zero] * n for _ in range(k)]
        for j in slots:
            rows[j][tpos] = R.one
        return KForm.one_forms(R, rows)

    if variant == 1:
        extra = [dt_in([j]) for j in range(k)]
    elif variant == 2:
        extra = [dt_in(range(k))]
    elif variant == 3:
        extra = [dt_in([0])]
    elif variant == 0:
        extra = []
    else:
        raise ValueError("variant must be 0, 1, 2 or 3")
    frame += extra
    anchor += [VectorField.zero(R) for _ in extra]
    return PolyPoissonStruct(R, k, tuple(frame), tuple(anchor), plan or SamplePlan())


def same_leaf_data(a: LeafFormAtPoint, b: LeafFormAtPoint) -> bool:
    """Equal tangent spaces and equal forms on them."""
    if a.p != b.p:
        return False
    n = len(a.basis[0]) if a.basis else 0
    if a.p and not (rank_q(list(a.basis) + list(b.basis), n) == a.p):
        return False
    return all(a.evaluate(j, u, v) == b.evaluate(j, u, v)
               for j in range(len(a.values)) for u in a.basis for v in a.basis) and len(a.values) == len(b.values)


def span_equal_at(vectors_a: Sequence[Sequence], vectors_b: Sequence[Sequence], dim: int) -> bool:
    A = span_basis_q(vectors_a, dim) if vectors_a else []
    B = span_basis_q(vectors_b, dim) if vectors_b else []
    return len(A) == len(B) == (rank_q(A + B, dim) if A or B else 0)
