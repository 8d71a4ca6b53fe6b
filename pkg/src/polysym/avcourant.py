"""The bundle TM ⊕ (⊕_k T*M) with its R^k-valued pairing and Dorfman bracket.

A section X ⊕ η̄ is represented pointwise by the vector (X, η_1, ..., η_k)
in QQ^{n + k·n}.  Orthogonality always means that the whole R^k-valued
pairing vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from sympy import QQ

from .cartan import KForm, VectorField, ext_d, interior, lie_bracket, lie_derivative
from .exactalg import (Mat, SamplePlan, evaluate, generic_rank, intersection_q, is_zero, nullspace_q,
                       point_str, points_for, rank_profile, rank_q, solve_membership)
from .polypoisson import PolyPoissonStruct, _regular_at_samples, check_structure
from .report import WARN, Report, timed


@dataclass(frozen=True, eq=False)
class AVSection:
    X: VectorField
    eta: KForm

    def __post_init__(self):
        if self.eta.r != 1 or self.eta.ring != self.X.ring:
            raise ValueError("an AV section pairs a vector field with a k-tuple of 1-forms on the same domain")

    @property
    def ring(self):
        return self.X.ring

    @property
    def k(self) -> int:
        return self.eta.k

    def stacked(self) -> list:
        return list(self.X.coeffs) + self.eta.stacked()

    def at(self, point) -> list:
        return [evaluate(c, point) for c in self.stacked()]

    def __eq__(self, other) -> bool:
        if not isinstance(other, AVSection):
            return NotImplemented
        return self.X == other.X and self.eta == other.eta

    def __repr__(self) -> str:
        return f"{self.X!r} ⊕ {self.eta!r}"


@dataclass(frozen=True, eq=False)
class AVSubbundle:
    frame: tuple
    plan: SamplePlan = field(default_factory=SamplePlan)

    def __post_init__(self):
        object.__setattr__(self, "frame", tuple(self.frame))
        if not self.frame:
            raise ValueError("an AV subbundle needs at least one frame section")
        ring, k = self.frame[0].ring, self.frame[0].k
        if any(s.ring != ring or s.k != k for s in self.frame):
            raise ValueError("frame sections must share domain and multiplicity")

    @property
    def ring(self):
        return self.frame[0].ring

    @property
    def n(self) -> int:
        return self.ring.ngens

    @property
    def k(self) -> int:
        return self.frame[0].k

    @property
    def ambient(self) -> int:
        return self.n * (1 + self.k)

    def matrix(self) -> Mat:
        """Columns are the stacked frame sections."""
        return Mat.from_columns(self.ring, [s.stacked() for s in self.frame], self.ambient)

    def points(self) -> list[tuple]:
        return points_for(self.plan, self.ring)


def pairing(v: AVSection, w: AVSection) -> tuple:
    """<X ⊕ η, Y ⊕ γ> = i_X γ + i_Y η."""
    if v.ring != w.ring or v.k != w.k:
        raise ValueError("sections of different AV bundles")
    return tuple((interior(v.X, w.eta) + interior(w.X, v.eta)).values())


def dorfman(v: AVSection, w: AVSection) -> AVSection:
    """[[X ⊕ η, Y ⊕ γ]] = [X, Y] ⊕ (L_X γ − i_Y dη)."""
    if v.ring != w.ring or v.k != w.k:
        raise ValueError("sections of different AV bundles")
    return AVSection(lie_bracket(v.X, w.X), lie_derivative(v.X, w.eta) - interior(w.X, ext_d(v.eta)))


def scale_section(f, v: AVSection) -> AVSection:
    return AVSection(v.X.scale(f), v.eta.scale(f))


# -- pointwise linear algebra -----------------------------------------------------

def _pairing_rows(vectors: Sequence[Sequence], n: int, k: int) -> list[list]:
    """Rows of the linear conditions <w, v>_j = 0 on w, for each v and j."""
    rows = []
    for v in vectors:
        vX = v[:n]
        for j in range(k):
            vj = v[n + j * n: n + (j + 1) * n]
            row = [QQ(0)] * (n + k * n)
            for l in range(n):
                row[l] = vj[l]
                row[n + j * n + l] = vX[l]
            rows.append(row)
    return rows


def _check_regular(L: AVSubbundle, m) -> list[list]:
    vecs = [s.at(m) for s in L.frame]
    g = generic_rank(L.matrix())
    r = rank_q(vecs, L.ambient)
    if r != g:
        raise ValueError(f"{point_str(m)} is a rank-drop point of L (rank {r} < {g})")
    return vecs


def perp_at(L: AVSubbundle, m: Sequence) -> list[list]:
    """A basis of L⊥ at m."""
    vecs = _check_regular(L, tuple(m))
    return nullspace_q(_pairing_rows(vecs, L.n, L.k), L.ambient)


def _tangent_basis(n: int, k: int) -> list[list]:
    return [[QQ(1) if i == l else QQ(0) for i in range(n + k * n)] for l in range(n)]


def _cotangent_basis(n: int, k: int) -> list[list]:
    return [[QQ(1) if i == l else QQ(0) for i in range(n + k * n)] for l in range(n, n + k * n)]


def _span_eq(A: list, B: list, dim: int) -> bool:
    ra = rank_q(A, dim) if A else 0
    rb = rank_q(B, dim) if B else 0
    rab = rank_q(A + B, dim) if A or B else 0
    return ra == rb == rab


def classify(L: AVSubbundle) -> Report:
    """Which of the lagrangian-type conditions a subbundle satisfies."""
    rep = Report("classify")
    n, k, N = L.n, L.k, L.ambient
    with timed() as t:
        prof = rank_profile(L.matrix(), L.plan)
    if prof.constant:
        rep.add("constant rank", True, f"rank {prof.generic}", t[0])
    else:
        p, r = prof.drops()[0]
        rep.add("constant rank", False, "rank drops at a sample point", t[0], point=point_str(p), rank=r)

    with timed() as t:
        bad = None
        for a in range(len(L.frame)):
            for b in range(a, len(L.frame)):
                vals = pairing(L.frame[a], L.frame[b])
                if any(not is_zero(v) for v in vals):
                    bad = ((a, b), vals)
                    break
            if bad:
                break
    if bad:
        rep.add("isotropic", False, "pairing of frame sections is nonzero", t[0], pair=bad[0],
                pairing=[str(v) for v in bad[1]])
    else:
        rep.add("isotropic", True, "", t[0])

    pts = L.points()
    T = _tangent_basis(n, k)
    C = _cotangent_basis(n, k)
    verdicts = {"lagrangian (3.9)": None, "(3.11) L = L⊥ ∩ (L+TM)": None, "L ∩ TM = 0": None,
                "L⊥ ∩ TM = 0": None, "(3.10) L ∩ ⊕T*M = 0": None, "projects onto TM": None}
    dims = {}
    with timed() as t:
        for p in pts:
            Lb = [s.at(p) for s in L.frame]
            vecs = Lb
            perp = nullspace_q(_pairing_rows(vecs, n, k), N)
            rL = rank_q(Lb, N)
            dims.setdefault("dim L", rL)
            dims.setdefault("dim L⊥", len(perp))
            checks = {
                "lagrangian (3.9)": _span_eq(Lb, perp, N),
                "(3.11) L = L⊥ ∩ (L+TM)": _span_eq(Lb, intersection_q(perp, Lb + T, N), N),
                "L ∩ TM = 0": not intersection_q(Lb, T, N),
                "L⊥ ∩ TM = 0": not intersection_q(perp, T, N) if perp else True,
                "(3.10) L ∩ ⊕T*M = 0": not intersection_q(Lb, C, N),
                "projects onto TM": rank_q([v[:n] for v in vecs], n) == rL == n,
            }
            for name, ok in checks.items():
                if not ok and verdicts[name] is None:
                    verdicts[name] = (p, rL, len(perp))
    per = t[0] / max(len(verdicts), 1)
    for name, bad in verdicts.items():
        if bad is None:
            rep.add(name, True, f"at {len(pts)} points", per)
        else:
            p, rL, rP = bad
            rep.add(name, False, "fails at a sample point", per, point=point_str(p), **{"dim L": rL, "dim L⊥": rP})

    with timed() as t:
        M = L.matrix()
        fail = warn = None
        for a in range(len(L.frame)):
            for b in range(a + 1, len(L.frame)):
                br = dorfman(L.frame[a], L.frame[b])
                c = solve_membership(M, br.stacked())
                if c is None:
                    fail = ((a, b), br)
                    break
                bad = _regular_at_samples(c, L.plan, L.ring)
                if bad and warn is None:
                    warn = ((a, b), bad)
            if fail:
                break
    if fail:
        rep.add("involutive", False, "bracket of frame sections leaves L", t[0], pair=fail[0], bracket=fail[1])
    elif warn:
        pair, (p, d) = warn
        rep.add("involutive", WARN, "closure coefficient denominator vanishes at a sample point", t[0],
                pair=pair, point=point_str(p), denominator=d)
    else:
        rep.add("involutive", True, "", t[0])
    rep.data.update(dims)
    return rep


def graph(pp: PolyPoissonStruct, check: bool = True) -> AVSubbundle:
    """L = {P(η) ⊕ η : η ∈ S}."""
    if check:
        rep = check_structure(pp)
        if not rep.ok:
            raise ValueError(f"structure fails {rep.first_failure().name}")
    return AVSubbundle(tuple(AVSection(X, s) for X, s in zip(pp.anchor, pp.frame)), pp.plan)


def graph_of_form(w: KForm, plan: SamplePlan | None = None) -> AVSubbundle:
    """graph(ω) = {X ⊕ i_X ω}."""
    R = w.ring
    fr = [AVSection(VectorField.coordinate(R, i), interior(VectorField.coordinate(R, i), w))
          for i in range(R.ngens)]
    return AVSubbundle(tuple(fr), plan or SamplePlan())


def tangent_bundle(ring, k: int, plan: SamplePlan | None = None) -> AVSubbundle:
    """L = TM ⊕ 0."""
    return AVSubbundle(tuple(AVSection(VectorField.coordinate(ring, i), KForm.zero(ring, 1, k))
                             for i in range(ring.ngens)), plan or SamplePlan())


B_CLAUSES = ("isotropic", "involutive", "L⊥ ∩ TM = 0")


def extract(L: AVSubbundle) -> PolyPoissonStruct:
    """The poly-Poisson structure of an involutive isotropic L with L⊥ ∩ TM = 0."""
    rep = classify(L)
    bad = [c for c in B_CLAUSES if rep.verdict(c) == "FAIL"]
    if bad:
        raise ValueError(f"subbundle fails {', '.join(bad)}")
    ring = L.ring
    etas = Mat.from_columns(ring, [s.eta.stacked() for s in L.frame], L.n * L.k)
    full = rank_profile(L.matrix(), L.plan)
    cot = rank_profile(etas, L.plan)
    if cot.generic != full.generic or not cot.constant:
        raise ValueError("cotangent projection drops rank: L ∩ TM ≠ 0, inconsistent with L⊥ ∩ TM = 0")
    pp = PolyPoissonStruct(ring, L.k, tuple(s.eta for s in L.frame), tuple(s.X for s in L.frame), L.plan)
    chk = check_structure(pp)
    if not chk.ok:
        raise ValueError(f"extracted structure fails {chk.first_failure().name}")
    return pp
