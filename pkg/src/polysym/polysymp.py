"""Poly-symplectic forms: validity checks, the flat map, products and covelocities."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .cartan import KForm, PolyMap, VectorField, ext_d, interior, pullback
from .exactalg import Mat, SamplePlan, nullspace_q, point_str, poly_ring, rank_profile
from .report import Report, timed


@dataclass(frozen=True)
class PolySympForm:
    """An R^k-valued 2-form; validity is established by :func:`is_polysymplectic`."""

    omega: KForm

    def __post_init__(self):
        if self.omega.r != 2:
            raise ValueError("a poly-symplectic form has degree 2")

    @property
    def ring(self):
        return self.omega.ring

    @property
    def n(self) -> int:
        return self.omega.n

    @property
    def k(self) -> int:
        return self.omega.k


def _form(w) -> KForm:
    return w.omega if isinstance(w, PolySympForm) else w


def flat_columns(w) -> list[KForm]:
    """The k-tuples of 1-forms i_{∂_i}ω, one per coordinate."""
    w = _form(w)
    return [interior(VectorField.coordinate(w.ring, i), w) for i in range(w.n)]


def flat_matrix(w) -> Mat:
    """Matrix of ω♭ : TM → ⊕_k T*M; column i stacks the components of i_{∂_i}ω."""
    w = _form(w)
    cols = [s.stacked() for s in flat_columns(w)]
    return Mat.from_columns(w.ring, cols, w.k * w.n)


def is_polysymplectic(w, plan: SamplePlan | None = None) -> Report:
    """Closedness plus trivial joint kernel, exactly and at sample points."""
    w = _form(w)
    plan = plan or SamplePlan()
    rep = Report("is_polysymplectic")
    with timed() as t:
        dw = ext_d(w)
    bad = [(j, I, c) for j, comp in enumerate(dw.comps) for I, c in comp.items()]
    if bad:
        j, I, c = bad[0]
        rep.add("closed", False, "d(omega) does not vanish", t[0], component=j, index=I, residual=c)
    else:
        rep.add("closed", True, "", t[0])
    with timed() as t:
        prof = rank_profile(flat_matrix(w), plan)
    if prof.generic != w.n:
        M = flat_matrix(w)
        p = prof.samples[0][0]
        ker = nullspace_q(M.at(p), w.n)
        rep.add("nondegenerate", False, f"generic rank {prof.generic} < {w.n}", t[0],
                generic_rank=prof.generic, point=point_str(p), kernel_vector=ker[0] if ker else "")
    elif not prof.constant:
        p, r = prof.drops()[0]
        rep.add("nondegenerate", False, f"rank drops to {r} at a sample point", t[0],
                point=point_str(p), rank=r)
    else:
        rep.add("nondegenerate", True, f"rank {w.n} generically and at {len(prof.samples)} points", t[0])
    rep.data["rank"] = prof
    return rep


def product_polysymplectic(factors: Sequence[tuple]) -> PolySympForm:
    """Concatenate the pullbacks p_j^*ω_j of the factor forms along their projections."""
    if not factors:
        raise ValueError("need at least one factor")
    total = None
    out = None
    for w, p in factors:
        w = _form(w)
        if p.codomain.ngens != w.n:
            raise ValueError("projection codomain does not match the factor dimension")
        if total is None:
            total = p.domain
        elif p.domain != total:
            raise ValueError("projections must share one total space")
        pw = pullback(p, w)
        out = pw if out is None else out.concat(pw)
    return PolySympForm(out)


def covelocity_names(nq: int, k: int) -> tuple[str, ...]:
    return tuple(f"q{i + 1}" for i in range(nq)) + tuple(
        f"p{j + 1}_{i + 1}" for j in range(k) for i in range(nq))


def covelocities(nq: int, k: int) -> PolySympForm:
    """The canonical form (Σ_i dq_i∧dp^(j)_i)_j on ⊕_k T*R^nq."""
    if nq < 1 or k < 1:
        raise ValueError("nq and k must be positive")
    R = poly_ring(covelocity_names(nq, k))
    comps = tuple({(i, nq * (1 + j) + i): R.one for i in range(nq)} for j in range(k))
    return PolySympForm(KForm(R, 2, comps))


def covelocity_projection(nq: int, k: int, j: int) -> PolyMap:
    """pr_j : ⊕_k T*R^nq → T*R^nq onto the j-th covelocity slot."""
    R = poly_ring(covelocity_names(nq, k))
    T = poly_ring(covelocity_names(nq, 1))
    pos = list(range(nq)) + [nq * (1 + j) + i for i in range(nq)]
    return PolyMap.from_positions(R, T, pos)


def canonical_plane(names: tuple[str, str] = ("x", "y")) -> PolySympForm:
    R = poly_ring(tuple(names))
    return PolySympForm(KForm(R, 2, ({(0, 1): R.one},)))
