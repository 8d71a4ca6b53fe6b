"""Finite-dimensional Lie algebras given by structure constants.

``c[i][j][l]`` is the coefficient of ``e_l`` in ``[e_i, e_j]``.  Vectors of
the algebra and of its dual are plain lists of ring elements, so the same
helpers work for rational vectors and for polynomial (symbolic) ones.

The coadjoint conventions are ``<ad*_u ζ, v> = -<ζ, [u, v]>`` and
``Ad*_g = (Ad_{g^{-1}})^T``, which make ``(g, ζ) ↦ Ad*_g ζ`` a left action
whose derivative at the identity is ``ad*``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Sequence

from sympy import QQ

from .exactalg import qq, rank_q, span_basis_q

_BERNOULLI = [Fraction(1), Fraction(-1, 2), Fraction(1, 6), Fraction(0), Fraction(-1, 30),
              Fraction(0), Fraction(1, 42)]


@dataclass(frozen=True)
class LieAlgebra:
    c: tuple

    @classmethod
    def from_constants(cls, c: Sequence) -> "LieAlgebra":
        return cls(tuple(tuple(tuple(qq(x) for x in row) for row in plane) for plane in c))

    @classmethod
    def from_brackets(cls, dim: int, brackets: dict) -> "LieAlgebra":
        """Build from ``{(i, j): {l: coeff}}`` for i < j (0-based); antisymmetry is implied."""
        c = [[[QQ(0)] * dim for _ in range(dim)] for _ in range(dim)]
        for (i, j), terms in brackets.items():
            for l, v in terms.items():
                c[i][j][l] = qq(v)
                c[j][i][l] = -qq(v)
        return cls(tuple(tuple(tuple(r) for r in p) for p in c))

    @property
    def dim(self) -> int:
        return len(self.c)

    def bracket(self, u: Sequence, v: Sequence) -> list:
        d = self.dim
        zero = (u[0] - u[0]) if d else QQ(0)
        out = [zero] * d
        for i in range(d):
            if not u[i]:
                continue
            for j in range(d):
                if not v[j]:
                    continue
                uv = u[i] * v[j]
                for l in range(d):
                    if self.c[i][j][l]:
                        out[l] = out[l] + self.c[i][j][l] * uv
        return out

    def basis(self, i: int) -> list:
        return [QQ(1) if j == i else QQ(0) for j in range(self.dim)]

    def is_antisymmetric(self) -> bool:
        d = self.dim
        return all(self.c[i][j][l] == -self.c[j][i][l] for i in range(d) for j in range(d) for l in range(d))

    def jacobi_violation(self) -> tuple | None:
        """First basis triple whose Jacobiator is nonzero, or None."""
        d = self.dim
        for a in range(d):
            for b in range(a + 1, d):
                for e in range(b + 1, d):
                    A, B, C = self.basis(a), self.basis(b), self.basis(e)
                    j1 = self.bracket(A, self.bracket(B, C))
                    j2 = self.bracket(B, self.bracket(C, A))
                    j3 = self.bracket(C, self.bracket(A, B))
                    if any(x + y + z for x, y, z in zip(j1, j2, j3)):
                        return (a, b, e)
        return None

    def validate(self) -> None:
        if not self.is_antisymmetric():
            raise ValueError("structure constants are not antisymmetric")
        bad = self.jacobi_violation()
        if bad is not None:
            raise ValueError(f"structure constants violate the Jacobi identity on basis triple {bad}")

    def nilpotency_step(self) -> int | None:
        """Length s of the lower central series (g^{s+1} = 0), or None if not nilpotent."""
        d = self.dim
        if d == 0:
            return 0
        cur = [self.basis(i) for i in range(d)]
        step = 0
        while cur:
            step += 1
            nxt = [self.bracket(self.basis(i), v) for i in range(d) for v in cur]
            nxt = [v for v in nxt if any(v)]
            nxt = span_basis_q(nxt, d) if nxt else []
            if len(nxt) == len(cur) and rank_q(nxt + cur, d) == len(cur):
                return None
            cur = nxt
        return step

    # -- matrices acting on coordinate vectors ----------------------------------

    def ad_matrix(self, X: Sequence) -> list[list]:
        """Matrix A with A v = [X, v]."""
        d = self.dim
        zero = X[0] - X[0]
        A = [[zero] * d for _ in range(d)]
        for i in range(d):
            for l in range(d):
                acc = zero
                for j in range(d):
                    if self.c[j][i][l]:
                        acc = acc + self.c[j][i][l] * X[j]
                A[l][i] = acc
        return A

    def coad(self, u: Sequence, zeta: Sequence) -> list:
        """ad*_u ζ with <ad*_u ζ, v> = -<ζ, [u, v]>."""
        d = self.dim
        out = []
        for v in range(d):
            uv = self.bracket(u, self.basis(v))
            acc = zeta[0] - zeta[0]
            for m in range(d):
                if uv[m]:
                    acc = acc - uv[m] * zeta[m]
            out.append(acc)
        return out


def heisenberg() -> LieAlgebra:
    """h3 with [e1, e2] = e3."""
    return LieAlgebra.from_brackets(3, {(0, 1): {2: 1}})


def abelian(d: int) -> LieAlgebra:
    return LieAlgebra.from_brackets(d, {})


def so3() -> LieAlgebra:
    return LieAlgebra.from_brackets(3, {(0, 1): {2: 1}, (1, 2): {0: 1}, (2, 0): {1: 1}})


def filiform4() -> LieAlgebra:
    """The 4-dimensional filiform algebra [e1, e2] = e3, [e1, e3] = e4 (step 3)."""
    return LieAlgebra.from_brackets(4, {(0, 1): {2: 1}, (0, 2): {3: 1}})


# -- matrix helpers -----------------------------------------------------------

def mat_mul(A: list[list], B: list[list]) -> list[list]:
    n, m, p = len(A), len(B), len(B[0]) if B else 0
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = None
            for l in range(m):
                a, b = A[i][l], B[l][j]
                if a and b:
                    acc = a * b if acc is None else acc + a * b
            row.append(acc if acc is not None else A[i][0] - A[i][0])
        out.append(row)
    return out


def mat_vec(A: list[list], v: Sequence) -> list:
    out = []
    for row in A:
        acc = v[0] - v[0]
        for a, b in zip(row, v):
            if a and b:
                acc = acc + a * b
        out.append(acc)
    return out


def transpose(A: list[list]) -> list[list]:
    return [list(r) for r in zip(*A)]


def identity_like(A: list[list]) -> list[list]:
    e = A[0][0]
    one = e.ring.one if hasattr(e, "ring") else (e.field.one if hasattr(e, "field") else QQ(1))
    zero = one - one
    return [[one if i == j else zero for j in range(len(A))] for i in range(len(A))]


def _series(A: list[list], coeff, order: int) -> list[list]:
    """Σ_{m=0}^{order} coeff(m) A^m."""
    P = identity_like(A)
    out = [[coeff(0) * x for x in r] for r in P]
    for m in range(1, order + 1):
        P = mat_mul(P, A)
        cm = coeff(m)
        if cm:
            out = [[o + cm * x for o, x in zip(ro, rx)] for ro, rx in zip(out, P)]
    return out


def _q(f: Fraction):
    return QQ(f.numerator, f.denominator)


class GroupCoordinates:
    """Exponential coordinates of the first kind on a nilpotent Lie group.

    The group is identified with the algebra via ``exp``; the product is the
    Baker-Campbell-Hausdorff series, which is a polynomial for nilpotent
    algebras.  Only nilpotency step at most 4 is supported, where the
    series truncates after its degree-4 terms.
    """

    MAX_STEP = 4

    def __init__(self, g: LieAlgebra):
        g.validate()
        step = g.nilpotency_step()
        if step is None:
            raise ValueError("Lie algebra is not nilpotent; group coordinates would not be polynomial")
        if step > self.MAX_STEP:
            raise ValueError(f"nilpotency step {step} exceeds the supported {self.MAX_STEP}")
        self.g = g
        self.step = step

    @property
    def order(self) -> int:
        return max(self.step - 1, 0)

    def product(self, X: Sequence, Y: Sequence) -> list:
        """BCH(X, Y) = log(exp X exp Y)."""
        b = self.g.bracket
        XY = b(X, Y)
        Z = [x + y + QQ(1, 2) * c for x, y, c in zip(X, Y, XY)]
        if self.step >= 3:
            t1 = b(X, XY)
            t2 = b(Y, b(Y, X))
            Z = [z + QQ(1, 12) * (a + c) for z, a, c in zip(Z, t1, t2)]
        if self.step >= 4:
            t3 = b(Y, b(X, XY))
            Z = [z - QQ(1, 24) * a for z, a in zip(Z, t3)]
        return Z

    def inverse(self, X: Sequence) -> list:
        return [-x for x in X]

    def Ad(self, X: Sequence) -> list[list]:
        """Ad_{exp X} = exp(ad_X)."""
        A = self.g.ad_matrix(X)
        return _series(A, lambda m: QQ(1, factorial(m)), self.order)

    def coAd(self, X: Sequence) -> list[list]:
        """Matrix of Ad*_{exp X} = (Ad_{exp(-X)})^T on dual coordinates."""
        return transpose(self.Ad(self.inverse(X)))

    def right_mc(self, X: Sequence) -> list[list]:
        """Matrix R(X) with dR_{g^{-1}}(δg) = R(X) δX (right Maurer-Cartan form)."""
        A = self.g.ad_matrix(X)
        return _series(A, lambda m: QQ(1, factorial(m + 1)), self.order)

    def left_mc(self, X: Sequence) -> list[list]:
        """Matrix L(X) with dL_{g^{-1}}(δg) = L(X) δX (left Maurer-Cartan form)."""
        A = [[-a for a in r] for r in self.g.ad_matrix(X)]
        return _series(A, lambda m: QQ(1, factorial(m + 1)), self.order)

    def right_invariant(self, X: Sequence) -> list[list]:
        """Matrix whose column u is the right-invariant field u^R at exp X (inverse of right_mc)."""
        A = self.g.ad_matrix(X)
        return _series(A, lambda m: _q(_BERNOULLI[m] / factorial(m)), self.order)

    def left_invariant(self, X: Sequence) -> list[list]:
        """Matrix whose column u is the left-invariant field u^L at exp X (inverse of left_mc)."""
        A = self.g.ad_matrix(X)
        return _series(A, lambda m: _q(_BERNOULLI[m] / factorial(m)) * (-1) ** m, self.order)
