"""Random fixtures and independent numeric oracles shared by the tests."""

from __future__ import annotations

import random
from itertools import combinations

import numpy as np
import sympy as sp

from polysym.cartan import KForm, PolyMap, VectorField, ext_d
from polysym.exactalg import poly_ring
from polysym.liealg import LieAlgebra, heisenberg, so3
from polysym.polypoisson import PolyPoissonStruct, bivector_of, bracket_forms, lie_poisson_direct_sum, poisson_structure


def random_poly(rng: random.Random, ring, terms: int = 3, max_deg: int = 3):
    p = ring.zero
    for _ in range(terms):
        mono = ring.one
        for _ in range(rng.randint(0, max_deg)):
            mono *= ring.gens[rng.randrange(ring.ngens)]
        p += rng.randint(-4, 4) * mono
    return p


def random_form(rng: random.Random, ring, r: int, k: int, terms: int = 2, max_deg: int = 3) -> KForm:
    n = ring.ngens
    comps = []
    for _ in range(k):
        comp = {}
        for I in rng.sample(list(combinations(range(n), r)), min(terms, len(list(combinations(range(n), r))))):
            comp[I] = random_poly(rng, ring, 2, max_deg)
        comps.append(comp)
    return KForm(ring, r, tuple(comps))


def random_field(rng: random.Random, ring, max_deg: int = 2) -> VectorField:
    return VectorField(ring, tuple(random_poly(rng, ring, 2, max_deg) for _ in range(ring.ngens)))


def random_map(rng: random.Random, domain, codomain, max_deg: int = 2) -> PolyMap:
    return PolyMap(domain, codomain, tuple(random_poly(rng, domain, 2, max_deg) for _ in range(codomain.ngens)))


def linear_field(A: np.ndarray, ring) -> VectorField:
    """X(x) = A x with integer A."""
    n = ring.ngens
    return VectorField(ring, tuple(sum((int(A[i][j]) * ring.gens[j] for j in range(n)), ring.zero)
                                   for i in range(n)))


def eval_poly(p, x) -> float:
    return float(sum(float(c) * np.prod([x[i] ** e for i, e in enumerate(m)]) for m, c in p.terms()))


def form_value(w: KForm, j: int, x, vectors) -> float:
    """ω_j(x)(v_1, ..., v_r) numerically."""
    total = 0.0
    for I, c in w.comps[j].items():
        M = np.array([[v[i] for v in vectors] for i in I], dtype=float)
        total += eval_poly(c, x) * (np.linalg.det(M) if len(I) else 1.0)
    return total


def expm(A: np.ndarray, terms: int = 30) -> np.ndarray:
    out = np.eye(len(A))
    term = np.eye(len(A))
    for i in range(1, terms):
        term = term @ A / i
        out = out + term
    return out


def flow_lie_derivative(A: np.ndarray, w: KForm, j: int, x, vectors, h: float = 1e-4) -> float:
    """(d/dt) φ_t*ω at t = 0 for the linear flow φ_t = exp(tA), by a five-point stencil."""
    def pulled(t):
        E = expm(t * A)
        return form_value(w, j, E @ x, [E @ v for v in vectors])
    return (-pulled(2 * h) + 8 * pulled(h) - 8 * pulled(-h) + pulled(-2 * h)) / (12 * h)


def linear_poisson(g: LieAlgebra, ring):
    """π^{il} = Σ_m c_{il}^m x_m, the Lie-Poisson bivector written from structure constants."""
    d = g.dim
    x = ring.gens
    return [[sum((ring(g.c[i][l][m]) * x[m] for m in range(d)), ring.zero) for l in range(d)]
            for i in range(d)]


def monomials(ring, deg=2):
    x = ring.gens
    out = [ring.one] + list(x)
    if deg >= 2:
        out += [x[i] * x[j] for i in range(len(x)) for j in range(i, len(x))]
    return out


def sympy_bracket(pi, f, g, syms):
    """{f, g} = Σ π^{il} ∂_i f ∂_l g with sympy, independent of the package's calculus."""
    n = len(syms)
    return sp.expand(sum(pi[i][l] * sp.diff(f, syms[i]) * sp.diff(g, syms[l])
                         for i in range(n) for l in range(n)))


def k1_oracle_mismatch(pp) -> str | None:
    """Compare a k = 1 structure with its bivector: [df, dg] = d{f, g} on monomials of degree <= 2.

    Returns None on agreement, else a description of the first disagreement.
    Also checks Jacobi of the oracle bracket on linear functions.
    """
    ring = pp.ring
    syms = ring.symbols
    pi = [[c.as_expr() for c in row] for row in bivector_of(pp)]

    def hamiltonian(df):
        return VectorField(ring, tuple(sum((c * X.coeffs[l] for c, X in zip(df.rows()[0], pp.anchor)), ring.zero)
                                       for l in range(ring.ngens)))

    mons = monomials(ring)
    for f in mons:
        df = ext_d(KForm.functions(ring, [f]))
        for g in mons:
            dg = ext_d(KForm.functions(ring, [g]))
            got = bracket_forms(hamiltonian(df), df, hamiltonian(dg), dg)
            fg = ring.from_expr(sympy_bracket(pi, f.as_expr(), g.as_expr(), syms))
            if got != ext_d(KForm.functions(ring, [fg])):
                return f"[d{f}, d{g}]"
    x = syms
    for a in x:
        for b in x:
            for c in x:
                jac = (sympy_bracket(pi, a, sympy_bracket(pi, b, c, x), x)
                       + sympy_bracket(pi, b, sympy_bracket(pi, c, a, x), x)
                       + sympy_bracket(pi, c, sympy_bracket(pi, a, b, x), x))
                if sp.expand(jac) != 0:
                    return f"Jacobi({a}, {b}, {c})"
    return None


def k1_fixtures() -> list:
    """Five k = 1 structures: two linear, two symplectic planes and an so(3) direct sum."""
    R2 = poly_ring(("x", "y"))
    R3 = poly_ring(("x1", "x2", "x3"))
    x = R2.gens[0]
    return [
        poisson_structure(R3, linear_poisson(so3(), R3)),
        poisson_structure(R3, linear_poisson(heisenberg(), R3)),
        poisson_structure(R2, [[0, 1], [-1, 0]]),
        poisson_structure(R2, [[0, 1 + x ** 2], [-(1 + x ** 2), 0]]),
        lie_poisson_direct_sum(so3(), 1),
    ]


def closure_mutant() -> PolyPoissonStruct:
    """Heisenberg's x3 ∂1∧∂2 plus the antisymmetric perturbation x2 ∂2∧∂3.

    Perturbing one anchor alone would already break (i), since (ii) leaves no
    room for a nonzero field annihilated by the frame; this keeps (i) and (ii)
    and breaks only the anchor identity.
    """
    R = poly_ring(("x1", "x2", "x3"))
    _, x2, x3 = R.gens
    z = R.zero
    pi = [[z, x3, z], [-x3, z, x2], [z, -x2, z]]
    frame = tuple(KForm.one_forms(R, [[1 if i == j else 0 for i in range(3)]]) for j in range(3))
    return PolyPoissonStruct(R, 1, frame, tuple(VectorField(R, tuple(row)) for row in pi))
