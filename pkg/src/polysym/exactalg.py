"""Exact polynomial arithmetic, fraction-free linear algebra and sampling.

Polynomials are sympy ``PolyElement`` objects over ``QQ`` (sparse dicts from
exponent tuples to arbitrary-precision rationals); rational functions are
``FracElement`` objects of the matching fraction field, which keeps
numerator and denominator reduced.  Every coordinate domain is identified by
its ordered tuple of variable names and has exactly one cached ring.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from sympy import QQ
from sympy.polys.fields import FracElement, FracField
from sympy.polys.matrices import DomainMatrix
from sympy.polys.rings import PolyElement, PolyRing

Poly = PolyElement
RatFun = FracElement


@lru_cache(maxsize=None)
def poly_ring(names: tuple[str, ...]) -> PolyRing:
    """The polynomial ring over QQ in the given ordered variables."""
    return PolyRing(list(names), QQ)


@lru_cache(maxsize=None)
def frac_field(names: tuple[str, ...]) -> FracField:
    return FracField(list(names), QQ)


def names_of(ring) -> tuple[str, ...]:
    return tuple(str(s) for s in ring.symbols)


def field_of(ring: PolyRing) -> FracField:
    return frac_field(names_of(ring))


def coordinates(prefix: str, n: int) -> tuple[str, ...]:
    return tuple(f"{prefix}{i + 1}" for i in range(n))


def to_frac(e, ring: PolyRing) -> RatFun:
    F = field_of(ring)
    if isinstance(e, FracElement):
        return e if e.field == F else F(e.numer.set_ring(F.ring)) / F(e.denom.set_ring(F.ring))
    if isinstance(e, PolyElement):
        return F(e.set_ring(F.ring))
    return F(ring(e))


def is_zero(e) -> bool:
    if isinstance(e, FracElement):
        return not e.numer
    return not e


def numer_denom(e) -> tuple[Poly, Poly]:
    if isinstance(e, FracElement):
        return e.numer, e.denom
    return e, e.ring.one


def as_poly(e, ring: PolyRing) -> Poly:
    """Return ``e`` as a polynomial of ``ring``; fails on a genuine fraction."""
    num, den = numer_denom(e)
    if not den.is_ground:
        raise ValueError(f"{e} is not a polynomial")
    return num.set_ring(ring) * (QQ(1) / den.LC)


# -- evaluation ---------------------------------------------------------------

def qq(v) -> object:
    """Coerce an int / Fraction / string / mpq into a QQ element."""
    if isinstance(v, Fraction):
        return QQ(v.numerator, v.denominator)
    if isinstance(v, str):
        f = Fraction(v)
        return QQ(f.numerator, f.denominator)
    return QQ.convert(v)


def evaluate(e, point: Sequence) -> object:
    """Value of a polynomial or rational function at a rational point."""
    if isinstance(e, FracElement):
        d = evaluate(e.denom, point)
        if not d:
            raise ZeroDivisionError(f"denominator {e.denom} vanishes at {point_str(point)}")
        return evaluate(e.numer, point) / d
    if isinstance(e, PolyElement):
        if e.ring.ngens == 0:
            return e.coeff(1) if e else QQ(0)
        return e(*point)
    return qq(e)


def point_str(point: Sequence) -> str:
    return "(" + ", ".join(str(v) for v in point) + ")"


# -- substitution (maps between coordinate domains) ---------------------------

def substitute(p: Poly, values: Sequence, target: PolyRing):
    """Compose ``p`` with ``values`` (one element of ``target`` per variable).

    ``values`` may hold rational functions, in which case the result is one too.
    """
    if isinstance(p, FracElement):
        return substitute(p.numer, values, target) / substitute(p.denom, values, target)
    if len(values) != p.ring.ngens:
        raise ValueError("substitution needs one value per variable")
    powers: list[dict[int, object]] = [dict() for _ in values]

    def pw(i: int, e: int):
        cache = powers[i]
        if e not in cache:
            cache[e] = values[i] ** e
        return cache[e]

    out = target.zero
    for mon, c in p.terms():
        term = target(c)
        for i, e in enumerate(mon):
            if e:
                term = term * pw(i, e)
        out = out + term
    return out


def embed(p: Poly, target: PolyRing, offset: int = 0) -> Poly:
    """Reinterpret ``p`` in ``target`` with its variables shifted by ``offset`` positions."""
    n = target.ngens
    out = {}
    for mon, c in p.terms():
        out[(0,) * offset + tuple(mon) + (0,) * (n - offset - len(mon))] = c
    return target.from_dict(out) if out else target.zero


# -- matrices -----------------------------------------------------------------

@dataclass(frozen=True)
class Mat:
    """A rows x cols grid of polynomials / rational functions of one ring."""

    ring: PolyRing
    rows: int
    cols: int
    entries: tuple[tuple, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ValueError("entry count must equal rows x cols")

    @classmethod
    def from_rows(cls, ring: PolyRing, rows: Sequence[Sequence], cols: int | None = None) -> "Mat":
        rows = [tuple(_entry(e, ring) for e in r) for r in rows]
        ncols = cols if cols is not None else (len(rows[0]) if rows else 0)
        return cls(ring, len(rows), ncols, tuple(rows))

    @classmethod
    def from_columns(cls, ring: PolyRing, columns: Sequence[Sequence], nrows: int) -> "Mat":
        rows = [tuple(_entry(col[i], ring) for col in columns) for i in range(nrows)]
        return cls(ring, nrows, len(columns), tuple(rows))

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.entries)

    def at(self, point: Sequence) -> list[list]:
        return [[evaluate(e, point) for e in r] for r in self.entries]

    def denominators(self) -> list[Poly]:
        dens = []
        for r in self.entries:
            for e in r:
                d = numer_denom(e)[1]
                if not d.is_ground and d not in dens:
                    dens.append(d)
        return dens

    def hstack(self, other: "Mat") -> "Mat":
        return Mat(self.ring, self.rows, self.cols + other.cols,
                   tuple(a + b for a, b in zip(self.entries, other.entries)))


def _entry(e, ring: PolyRing):
    if isinstance(e, (PolyElement, FracElement)):
        return e
    return ring(qq(e))


def _cleared_rows(ring: PolyRing, rows: Sequence[Sequence]) -> list[list[Poly]]:
    """Multiply each row by the lcm of its denominators, giving polynomials."""
    out = []
    for r in rows:
        dens = [numer_denom(e)[1] for e in r]
        l = ring.one
        for d in dens:
            d = d.set_ring(ring)
            if not d.is_ground:
                l = l.lcm(d)
        row = []
        for e in r:
            num, den = numer_denom(e)
            num, den = num.set_ring(ring), den.set_ring(ring)
            row.append(num * l.exquo(den) if not den.is_ground else num * (QQ(1) / den.LC) * l)
        out.append(row)
    return out


def _weight(p: Poly) -> tuple[int, int]:
    return (0 if p.is_ground else 1, len(p))


def _echelon(A: list[list[Poly]], ncols: int, one: Poly) -> list[int]:
    """In-place fraction-free (Bareiss) forward elimination.

    Pivots are searched column by column in increasing index over the first
    ``ncols`` columns; row operations span the full width.  Returns the pivot
    columns.
    """
    m = len(A)
    width = len(A[0]) if A else 0
    prev = one
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == m:
            break
        cands = [i for i in range(r, m) if A[i][c]]
        if not cands:
            continue
        piv = min(cands, key=lambda i: _weight(A[i][c]))
        if piv != r:
            A[r], A[piv] = A[piv], A[r]
        p = A[r][c]
        for i in range(r + 1, m):
            a = A[i][c]
            row_i, row_r = A[i], A[r]
            for j in range(c + 1, width):
                v = p * row_i[j] - a * row_r[j]
                row_i[j] = v.exquo(prev) if prev != 1 else v
            row_i[c] = one - one
        prev = p
        pivots.append(c)
        r += 1
    return pivots


def generic_rank(M: Mat) -> int:
    """Rank of ``M`` over the fraction field, by fraction-free elimination."""
    if M.rows == 0 or M.cols == 0:
        return 0
    A = _cleared_rows(M.ring, M.entries)
    return len(_echelon(A, M.cols, M.ring.one))


def solve_membership(M: Mat, v: Sequence) -> list[RatFun] | None:
    """Some ``c`` with ``M c = v`` over the fraction field, or None.

    Free columns (those outside the lowest-index maximal independent column
    set) are set to zero, so the answer is deterministic.
    """
    if len(v) != M.rows:
        raise ValueError("right-hand side length must equal the row count")
    v = [_entry(e, M.ring) for e in v]
    F = field_of(M.ring)
    if M.cols == 0:
        return [] if all(is_zero(e) for e in v) else None
    A = _cleared_rows(M.ring, [tuple(r) + (e,) for r, e in zip(M.entries, v)])
    pivots = _echelon(A, M.cols, M.ring.one)
    for i in range(len(pivots), M.rows):
        if A[i][M.cols]:
            return None
    sol = [F.zero] * M.cols
    for i in range(len(pivots) - 1, -1, -1):
        c = pivots[i]
        acc = F(A[i][M.cols])
        for j in pivots[i + 1:]:
            if A[i][j]:
                acc -= F(A[i][j]) * sol[j]
        sol[c] = acc / F(A[i][c])
    return sol


def nullspace(M: Mat) -> list[list[Poly]]:
    """A polynomial basis of the kernel of ``M`` over the fraction field.

    One vector per non-pivot column; denominators are cleared per vector.
    """
    R = M.ring
    F = field_of(R)
    if M.rows == 0:
        return [[R.one if i == j else R.zero for i in range(M.cols)] for j in range(M.cols)]
    A = _cleared_rows(R, M.entries)
    pivots = _echelon(A, M.cols, R.one)
    free = [c for c in range(M.cols) if c not in pivots]
    basis = []
    for f in free:
        sol = [F.zero] * M.cols
        sol[f] = F.one
        for i in range(len(pivots) - 1, -1, -1):
            c = pivots[i]
            acc = -F(A[i][f])
            for j in pivots[i + 1:]:
                if A[i][j]:
                    acc -= F(A[i][j]) * sol[j]
            sol[c] = acc / F(A[i][c])
        basis.append(clear_denominators(sol, R))
    return basis


def clear_denominators(vec: Sequence, ring: PolyRing) -> list[Poly]:
    """Scale a rational vector by the lcm of its denominators."""
    l = ring.one
    for e in vec:
        d = numer_denom(e)[1].set_ring(ring)
        if not d.is_ground:
            l = l.lcm(d)
    out = []
    for e in vec:
        num, den = numer_denom(e)
        num, den = num.set_ring(ring), den.set_ring(ring)
        out.append(num * l.exquo(den) if not den.is_ground else num * (QQ(1) / den.LC) * l)
    g = None
    for e in out:
        if e:
            g = e if g is None else g.gcd(e)
    if g is not None and not g.is_ground:
        out = [e.exquo(g) for e in out]
    return out


# -- pointwise rational linear algebra ---------------------------------------

def _dm(rows: Sequence[Sequence], ncols: int) -> DomainMatrix:
    return DomainMatrix([[qq(e) for e in r] for r in rows], (len(rows), ncols), QQ)


def rank_q(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    """Rank of a rational matrix given as a list of rows."""
    if not rows:
        return 0
    ncols = len(rows[0]) if ncols is None else ncols
    if ncols == 0:
        return 0
    return _dm(rows, ncols).rank()


def nullspace_q(rows: Sequence[Sequence], ncols: int) -> list[list]:
    """Basis of the right kernel of a rational matrix."""
    if ncols == 0:
        return []
    if not rows:
        return [[QQ(1) if i == j else QQ(0) for i in range(ncols)] for j in range(ncols)]
    ns = _dm(rows, ncols).nullspace()
    return [list(r) for r in ns.to_list()] if ns.shape[0] else []


def solve_q(rows: Sequence[Sequence], rhs: Sequence, nvars: int) -> list | None:
    """Some rational solution of ``rows · c = rhs`` (free variables 0), or None."""
    if nvars == 0:
        return [] if all(not qq(r) for r in rhs) else None
    if not rows:
        return [QQ(0)] * nvars
    aug = DomainMatrix([[qq(x) for x in row] + [qq(r)] for row, r in zip(rows, rhs)],
                       (len(rows), nvars + 1), QQ)
    rref, pivots = aug.rref()
    R = rref.to_list()
    c = [QQ(0)] * nvars
    for i, pc in enumerate(pivots):
        if pc == nvars:
            return None
        c[pc] = R[i][nvars]
    return c


def span_basis_q(vectors: Sequence[Sequence], dim: int) -> list[list]:
    """An independent subset-free basis (RREF rows) of the span of vectors."""
    if not vectors:
        return []
    rref, pivots = _dm(vectors, dim).rref()
    return [list(r) for r in rref.to_list()[: len(pivots)]]


def intersection_dim_q(U: Sequence[Sequence], W: Sequence[Sequence], dim: int) -> int:
    """dim(span U ∩ span W) for lists of vectors in QQ^dim."""
    ru = rank_q(U, dim) if U else 0
    rw = rank_q(W, dim) if W else 0
    both = list(U) + list(W)
    return ru + rw - (rank_q(both, dim) if both else 0)


def intersection_q(U: Sequence[Sequence], W: Sequence[Sequence], dim: int) -> list[list]:
    """Basis of span U ∩ span W."""
    if not U or not W:
        return []
    U = span_basis_q(U, dim)
    W = span_basis_q(W, dim)
    # a·U = b·W  <=>  [U^T | -W^T] (a, b) = 0
    rows = [[U[i][c] for i in range(len(U))] + [-W[i][c] for i in range(len(W))] for c in range(dim)]
    ker = nullspace_q(rows, len(U) + len(W))
    vecs = [[sum((a[i] * U[i][c] for i in range(len(U))), QQ(0)) for c in range(dim)] for a in ker]
    return span_basis_q(vecs, dim)


def contained_q(U: Sequence[Sequence], W: Sequence[Sequence], dim: int) -> bool:
    """span U ⊆ span W."""
    if not U:
        return True
    return rank_q(list(U) + list(W), dim) == (rank_q(W, dim) if W else 0)


# -- sampling -----------------------------------------------------------------

_DENOMS = (1, 1, 1, 2, 3, 4, 5, 7)


@dataclass(frozen=True)
class SamplePlan:
    """Deterministic recipe for rational sample points in [-box, box]^n."""

    seed: int = 1
    count: int = 5
    box: int = 10
    avoid: tuple = field(default=())

    def with_avoid(self, polys: Iterable[Poly]) -> "SamplePlan":
        extra = tuple(p for p in polys if not p.is_ground)
        return SamplePlan(self.seed, self.count, self.box, self.avoid + extra)


class SamplingError(RuntimeError):
    pass


def sample_points(plan: SamplePlan, n: int, retry_budget: int = 2000) -> list[tuple]:
    """``plan.count`` distinct rational points avoiding the zero sets of ``plan.avoid``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    avoid = [p for p in plan.avoid if p.ring.ngens == n]
    if len(avoid) != len(plan.avoid):
        raise ValueError("avoid polynomials must live in n variables")
    rng = random.Random(plan.seed * 1_000_003 + n)
    points: list[tuple] = []
    tries = 0
    while len(points) < plan.count:
        tries += 1
        if tries > retry_budget * max(plan.count, 1):
            raise SamplingError(
                f"found only {len(points)} of {plan.count} admissible points; avoid set too restrictive")
        pt = []
        for _ in range(n):
            d = rng.choice(_DENOMS)
            pt.append(QQ(rng.randint(-plan.box * d, plan.box * d), d))
        pt = tuple(pt)
        if pt in points:
            continue
        if any(not evaluate(p, pt) for p in avoid):
            continue
        points.append(pt)
    return points


def points_for(plan: SamplePlan, ring: PolyRing, avoid: Iterable = ()) -> list[tuple]:
    """Sample points for ``ring``'s domain, also avoiding extra polynomials.

    ``avoid`` may contain polynomials of any ring with the same variable
    count; a zero-dimensional domain has the single point ``()``.
    """
    n = ring.ngens
    if n == 0:
        return [()]
    extra = []
    for p in avoid:
        p = numer_denom(p)[1] if isinstance(p, FracElement) else p
        if p.is_ground:
            continue
        extra.append(p if p.ring == ring else ring.from_dict(dict(p.terms())))
    own = tuple(p for p in plan.avoid if p.ring.ngens == n)
    return sample_points(SamplePlan(plan.seed, plan.count, plan.box, own + tuple(extra)), n)


@dataclass(frozen=True)
class RankProfile:
    """Generic rank of a matrix together with its rank at each sample point."""

    generic: int
    samples: tuple

    @property
    def constant(self) -> bool:
        return all(r == self.generic for _, r in self.samples)

    def drops(self) -> list[tuple]:
        return [(p, r) for p, r in self.samples if r != self.generic]


def rank_profile(M: Mat, plan: SamplePlan) -> RankProfile:
    pts = points_for(plan, M.ring, M.denominators())
    return RankProfile(generic_rank(M), tuple((p, rank_q(M.at(p), M.cols)) for p in pts))
