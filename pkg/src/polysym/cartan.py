"""Exterior calculus of R^k-valued polynomial forms on a coordinate domain.

Forms store, for each of their ``k`` components, a dict from strictly
increasing index tuples to nonzero coefficients.  Coefficients are
polynomials, or rational functions over the same variables where a
computation produces them.

Sign convention: ``interior(X, ω)`` contracts the first slot, so
``i_X(α∧β) = (i_X α)∧β + (-1)^deg(α) α∧(i_X β)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from sympy.polys.fields import FracElement
from sympy.polys.rings import PolyElement, PolyRing

from .exactalg import (Mat, evaluate, is_zero, names_of, numer_denom, poly_ring, qq, substitute,
                       to_frac)


def partial(f, i: int):
    """∂f/∂x_i for a polynomial or rational function."""
    if isinstance(f, FracElement):
        return f.diff(f.field.gens[i])
    return f.diff(f.ring.gens[i])


def _clean(d: dict) -> dict:
    return {I: c for I, c in d.items() if not is_zero(c)}


def _lift(c, ring: PolyRing):
    """Coerce numbers into ``ring``; ring elements and rational functions pass through."""
    if isinstance(c, (PolyElement, FracElement)):
        return c
    return ring(qq(c))


def _sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``idx`` and the sorted tuple (0 if repeated)."""
    idx = list(idx)
    if len(set(idx)) < len(idx):
        return 0, ()
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


@dataclass(frozen=True, eq=False)
class VectorField:
    ring: PolyRing
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.ring.ngens:
            raise ValueError("one coefficient per coordinate")
        object.__setattr__(self, "coeffs", tuple(_lift(c, self.ring) for c in self.coeffs))

    @property
    def n(self) -> int:
        return self.ring.ngens

    @classmethod
    def zero(cls, ring: PolyRing) -> "VectorField":
        return cls(ring, tuple(ring.zero for _ in range(ring.ngens)))

    @classmethod
    def coordinate(cls, ring: PolyRing, i: int) -> "VectorField":
        return cls(ring, tuple(ring.one if j == i else ring.zero for j in range(ring.ngens)))

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.ring, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.ring, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "VectorField":
        return VectorField(self.ring, tuple(-a for a in self.coeffs))

    def scale(self, f) -> "VectorField":
        return VectorField(self.ring, tuple(f * a for a in self.coeffs))

    def __eq__(self, other) -> bool:
        if not isinstance(other, VectorField) or other.ring != self.ring:
            return NotImplemented
        return all(is_zero(a - b) for a, b in zip(self.coeffs, other.coeffs))

    def is_zero(self) -> bool:
        return all(is_zero(a) for a in self.coeffs)

    def apply(self, f):
        """X(f) = Σ X^i ∂_i f."""
        out = self.ring.zero
        for i, a in enumerate(self.coeffs):
            if not is_zero(a):
                out = out + a * partial(f, i)
        return out

    def at(self, point) -> list:
        return [evaluate(a, point) for a in self.coeffs]

    def __repr__(self) -> str:
        names = names_of(self.ring)
        terms = [f"({a})*d/d{names[i]}" for i, a in enumerate(self.coeffs) if not is_zero(a)]
        return " + ".join(terms) if terms else "0"


@dataclass(frozen=True, eq=False)
class KForm:
    """An R^k-valued degree-r differential form."""

    ring: PolyRing
    r: int
    comps: tuple

    def __post_init__(self):
        n = self.ring.ngens
        cleaned = []
        for comp in self.comps:
            for I in comp:
                if len(I) != self.r or list(I) != sorted(set(I)) or any(i < 0 or i >= n for i in I):
                    raise ValueError(f"bad index tuple {I} for a {self.r}-form in {n} variables")
            cleaned.append(_clean({I: _lift(c, self.ring) for I, c in comp.items()}))
        object.__setattr__(self, "comps", tuple(cleaned))

    @property
    def n(self) -> int:
        return self.ring.ngens

    @property
    def k(self) -> int:
        return len(self.comps)

    @classmethod
    def zero(cls, ring: PolyRing, r: int, k: int) -> "KForm":
        return cls(ring, r, tuple({} for _ in range(k)))

    @classmethod
    def functions(cls, ring: PolyRing, fs: Sequence) -> "KForm":
        return cls(ring, 0, tuple({(): f} for f in fs))

    @classmethod
    def one_forms(cls, ring: PolyRing, rows: Sequence[Sequence]) -> "KForm":
        """A k-tuple of 1-forms from k coefficient rows of length n."""
        return cls(ring, 1, tuple({(i,): c for i, c in enumerate(row)} for row in rows))

    def __add__(self, other: "KForm") -> "KForm":
        self._compatible(other)
        out = []
        for a, b in zip(self.comps, other.comps):
            d = dict(a)
            for I, c in b.items():
                d[I] = d[I] + c if I in d else c
            out.append(d)
        return KForm(self.ring, self.r, tuple(out))

    def __neg__(self) -> "KForm":
        return KForm(self.ring, self.r, tuple({I: -c for I, c in comp.items()} for comp in self.comps))

    def __sub__(self, other: "KForm") -> "KForm":
        return self + (-other)

    def scale(self, f) -> "KForm":
        return KForm(self.ring, self.r, tuple({I: f * c for I, c in comp.items()} for comp in self.comps))

    def _compatible(self, other: "KForm") -> None:
        if other.ring != self.ring or other.r != self.r or other.k != self.k:
            raise ValueError("forms of different shape")

    def __eq__(self, other) -> bool:
        if not isinstance(other, KForm):
            return NotImplemented
        if other.ring != self.ring or other.r != self.r or other.k != self.k:
            return False
        return (self - other).is_zero()

    def is_zero(self) -> bool:
        return all(not comp for comp in self.comps)

    def component(self, j: int) -> "KForm":
        return KForm(self.ring, self.r, (self.comps[j],))

    def select(self, idx: Sequence[int]) -> "KForm":
        return KForm(self.ring, self.r, tuple(self.comps[j] for j in idx))

    def concat(self, other: "KForm") -> "KForm":
        if other.ring != self.ring or other.r != self.r:
            raise ValueError("forms of different shape")
        return KForm(self.ring, self.r, self.comps + other.comps)

    def coeff(self, j: int, I: tuple):
        return self.comps[j].get(tuple(I), self.ring.zero)

    def rows(self) -> list[list]:
        """Coefficient rows (k × n) of a k-tuple of 1-forms."""
        if self.r != 1:
            raise ValueError("rows() is for 1-forms")
        return [[comp.get((i,), self.ring.zero) for i in range(self.n)] for comp in self.comps]

    def values(self) -> list:
        if self.r != 0:
            raise ValueError("values() is for 0-forms")
        return [comp.get((), self.ring.zero) for comp in self.comps]

    def stacked(self) -> list:
        """The k·n coefficients of a 1-form tuple, component-major."""
        return [c for row in self.rows() for c in row]

    def at(self, point) -> list[list]:
        return [[evaluate(c, point) for c in row] for row in self.rows()]

    def as_frac(self) -> "KForm":
        return KForm(self.ring, self.r,
                     tuple({I: to_frac(c, self.ring) for I, c in comp.items()} for comp in self.comps))

    def __repr__(self) -> str:
        names = names_of(self.ring)
        parts = []
        for comp in self.comps:
            terms = []
            for I, c in sorted(comp.items()):
                basis = "^".join("d" + names[i] for i in I) or "1"
                terms.append(f"({c})*{basis}")
            parts.append(" + ".join(terms) if terms else "0")
        return "(" + ", ".join(parts) + ")"


CoSection = KForm


@dataclass(frozen=True, eq=False)
class PolyMap:
    """A polynomial map from the ``domain`` coordinates to the ``codomain`` ones."""

    domain: PolyRing
    codomain: PolyRing
    components: tuple

    def __post_init__(self):
        if len(self.components) != self.codomain.ngens:
            raise ValueError("one component per codomain coordinate")
        object.__setattr__(self, "components", tuple(_lift(c, self.domain) for c in self.components))

    @classmethod
    def identity(cls, ring: PolyRing) -> "PolyMap":
        return cls(ring, ring, tuple(ring.gens))

    @classmethod
    def from_positions(cls, domain: PolyRing, codomain: PolyRing, positions: Sequence) -> "PolyMap":
        """A coordinate map: component i is domain variable ``positions[i]`` (None → 0)."""
        return cls(domain, codomain,
                   tuple(domain.zero if p is None else domain.gens[p] for p in positions))

    def __call__(self, p):
        """Compose a function on the codomain with this map."""
        return substitute(p, self.components, self.domain)

    def compose(self, inner: "PolyMap") -> "PolyMap":
        """self ∘ inner."""
        if inner.codomain != self.domain:
            raise ValueError("maps are not composable")
        return PolyMap(inner.domain, self.codomain, tuple(inner(c) for c in self.components))

    def jacobian(self) -> list[list]:
        return [[partial(c, i) for i in range(self.domain.ngens)] for c in self.components]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyMap):
            return NotImplemented
        return (other.domain == self.domain and other.codomain == self.codomain
                and all(is_zero(a - b) for a, b in zip(self.components, other.components)))

    def at(self, point) -> tuple:
        return tuple(evaluate(c, point) for c in self.components)

    def __repr__(self) -> str:
        return f"PolyMap{names_of(self.domain)} -> {tuple(str(c) for c in self.components)}"


# -- operations -----------------------------------------------------------------

def ext_d(w: KForm) -> KForm:
    """Componentwise exterior derivative."""
    n = w.n
    out = []
    for comp in w.comps:
        d: dict = {}
        for I, c in comp.items():
            for j in range(n):
                if j in I:
                    continue
                dc = partial(c, j)
                if is_zero(dc):
                    continue
                sign, J = _sort_sign((j,) + I)
                d[J] = d[J] + sign * dc if J in d else sign * dc
        out.append(d)
    return KForm(w.ring, w.r + 1, tuple(out))


def interior(X: VectorField, w: KForm) -> KForm:
    """Contraction of X into the first slot of each component."""
    if w.r < 1:
        raise ValueError("cannot contract into a 0-form")
    if X.ring != w.ring:
        raise ValueError("vector field and form live on different domains")
    out = []
    for comp in w.comps:
        d: dict = {}
        for I, c in comp.items():
            for s, i in enumerate(I):
                a = X.coeffs[i]
                if is_zero(a):
                    continue
                J = I[:s] + I[s + 1:]
                term = (c * a) if s % 2 == 0 else -(c * a)
                d[J] = d[J] + term if J in d else term
        out.append(d)
    return KForm(w.ring, w.r - 1, tuple(out))


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y]^i = Σ_j X^j ∂_j Y^i − Y^j ∂_j X^i."""
    if X.ring != Y.ring:
        raise ValueError("vector fields on different domains")
    return VectorField(X.ring, tuple(X.apply(b) - Y.apply(a) for a, b in zip(X.coeffs, Y.coeffs)))


def lie_derivative(X: VectorField, w: KForm) -> KForm:
    """Cartan's formula L_X = d i_X + i_X d."""
    if w.r == 0:
        return KForm(w.ring, 0, tuple({(): X.apply(f)} for f in w.values()))
    return ext_d(interior(X, w)) + interior(X, ext_d(w))


def pullback(f: PolyMap, w: KForm) -> KForm:
    """f^*w, a form on the domain of f."""
    if f.codomain.ngens != w.n:
        raise ValueError("map codomain dimension must match the form's domain")
    if f.codomain != w.ring:
        f = PolyMap(f.domain, w.ring, f.components)
    a = f.domain.ngens
    J = f.jacobian()
    targets = list(combinations(range(a), w.r))
    minor_cache: dict = {}

    def minor(I, K):
        key = (I, K)
        if key not in minor_cache:
            minor_cache[key] = _det([[J[i][k] for k in K] for i in I], f.domain)
        return minor_cache[key]

    out = []
    for comp in w.comps:
        d: dict = {}
        for I, c in comp.items():
            cf = f(c)
            for K in targets:
                m = minor(I, K)
                if is_zero(m):
                    continue
                d[K] = d[K] + cf * m if K in d else cf * m
        out.append(d)
    return KForm(f.domain, w.r, tuple(out))


def _det(m: list[list], ring: PolyRing):
    n = len(m)
    if n == 0:
        return ring.one
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    out = ring.zero
    for j in range(n):
        if is_zero(m[0][j]):
            continue
        sub = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det(sub, ring)
        out = out + term if j % 2 == 0 else out - term
    return out


def push_vector(f: PolyMap, X: VectorField) -> tuple:
    """Tf(X): components of the pushed vector as functions on f's domain."""
    if X.ring != f.domain:
        raise ValueError("vector field must live on the map's domain")
    return tuple(X.apply(c) for c in f.components)


def compose_field(X: VectorField, f: PolyMap) -> tuple:
    """X ∘ f: the coefficients of a codomain field as functions on f's domain."""
    return tuple(f(c) for c in X.coeffs)


def rename(w, ring: PolyRing):
    """Reinterpret a form / field / map positionally on another domain of equal dimension."""
    src = w.domain if isinstance(w, PolyMap) else w.ring
    if ring.ngens != src.ngens:
        raise ValueError("dimension mismatch")

    def mv(c):
        if isinstance(c, FracElement):
            return to_frac(_mv_poly(c.numer, ring), ring) / to_frac(_mv_poly(c.denom, ring), ring)
        return _mv_poly(c, ring)

    if isinstance(w, KForm):
        return KForm(ring, w.r, tuple({I: mv(c) for I, c in comp.items()} for comp in w.comps))
    if isinstance(w, VectorField):
        return VectorField(ring, tuple(mv(c) for c in w.coeffs))
    if isinstance(w, PolyMap):
        return PolyMap(ring, w.codomain, tuple(mv(c) for c in w.components))
    raise TypeError(type(w))


def _mv_poly(p: PolyElement, ring: PolyRing) -> PolyElement:
    return ring.from_dict(dict(p.terms())) if p else ring.zero


def jacobian_matrix(f: PolyMap) -> Mat:
    return Mat.from_rows(f.domain, f.jacobian(), f.domain.ngens)


def stacked_matrix(frame: Sequence[KForm]) -> Mat:
    """(r·k) × n matrix whose rows are all component 1-forms of all frame elements."""
    ring = frame[0].ring
    rows = [row for s in frame for row in s.rows()]
    return Mat.from_rows(ring, rows, ring.ngens)


def frame_matrix(frame: Sequence[KForm], ring: PolyRing | None = None) -> Mat:
    """(k·n) × r matrix whose columns are the stacked frame elements."""
    ring = ring or frame[0].ring
    cols = [s.stacked() for s in frame]
    nrows = len(cols[0]) if cols else 0
    return Mat.from_columns(ring, cols, nrows)


def fields_matrix(fields: Sequence[VectorField], ring: PolyRing) -> Mat:
    """n × m matrix with the given vector fields as columns."""
    return Mat.from_columns(ring, [X.coeffs for X in fields], ring.ngens)


def space(names: Sequence[str]) -> PolyRing:
    return poly_ring(tuple(names))


def denominator_polys(items) -> list:
    out = []
    for e in items:
        d = numer_denom(e)[1]
        if not d.is_ground and d not in out:
            out.append(d)
    return out
