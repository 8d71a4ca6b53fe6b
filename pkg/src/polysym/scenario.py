"""Scenario files: strict parsing into module inputs, and the per-kind check suites.

A scenario is a YAML document (format version 1)::

    version: 1
    name: covelocities-2-2
    kind: polysymplectic
    sample: {seed: 1, count: 5, box: 10}
    expect: {"avcourant: lagrangian (3.9)": FAIL}
    payload: {type: covelocities, nq: 2, k: 2}

Polynomials are strings over the declared variables using integer and
rational literals, ``+ - * / ^`` and parentheses.  ``/`` only divides by a
nonzero constant and ``^`` only takes a nonnegative integer exponent.  The
full format is documented in ``docs/scenario-format.md``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import yaml
from sympy import QQ

from . import avcourant, foliation, groupoid, polypoisson, reduction
from . import fixtures as fx
from .cartan import KForm, VectorField, rename
from .exactalg import SamplePlan, names_of, points_for, poly_ring
from .liealg import LieAlgebra, abelian, filiform4, heisenberg, so3
from .polysymp import covelocities, is_polysymplectic
from .report import CONVENTIONS, ERROR, FAIL, PASS, WARN, Report

FORMAT_VERSION = 1
KINDS = ("polysymplectic", "polypoisson", "foliation", "avcourant", "groupoid", "reduction")
SUPPORTED_CONVENTIONS = {"canonical_symplectic": CONVENTIONS["canonical_symplectic"],
                         "ad_star": CONVENTIONS["ad_star"]}


class ScenarioError(ValueError):
    """A scenario file that does not parse or validate."""


# -- polynomial grammar ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<float>\d+\.\d*|\.\d+|\d+[eE][+-]?\d+)|(?P<int>\d+)"
                    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>\*\*|[-+*/^()·−]))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ScenarioError(f"malformed polynomial {text!r}: unexpected {text[pos:].strip()[:1]!r}")
        kind = m.lastgroup
        val = m.group(kind)
        if kind == "float":
            raise ScenarioError(f"non-rational literal {val!r} (write decimals as fractions)")
        if kind == "op":
            val = {"**": "^", "·": "*", "−": "-"}.get(val, val)
        out.append((kind, val))
        pos = m.end()
    return out


class _PolyParser:
    def __init__(self, text: str, ring):
        self.text = text
        self.ring = ring
        self.names = {v: i for i, v in enumerate(names_of(ring))}
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def fail(self, msg: str):
        raise ScenarioError(f"malformed polynomial {self.text!r}: {msg}")

    def parse(self):
        if not self.toks:
            self.fail("empty expression")
        v = self.expr()
        if self.i != len(self.toks):
            self.fail(f"unexpected {self.peek()[1]!r}")
        return v

    def expr(self):
        v = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self):
        v = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            w = self.unary()
            if op == "*":
                v = v * w
            else:
                if not w.is_ground or not w:
                    raise ScenarioError(f"non-polynomial division in {self.text!r}")
                v = v * self.ring(QQ(1) / w.LC)
        return v

    def unary(self):
        if self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            v = self.unary()
            return -v if op == "-" else v
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            e = self.unary()
            if not e.is_ground or e.LC < 0 or e.LC != int(e.LC):
                raise ScenarioError(f"non-polynomial exponent in {self.text!r}")
            return base ** int(e.LC)
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "int":
            return self.ring(int(val))
        if kind == "name":
            if val not in self.names:
                raise ScenarioError(f"unknown variable {val!r} in {self.text!r}")
            return self.ring.gens[self.names[val]]
        if val == "(":
            v = self.expr()
            if self.take()[1] != ")":
                self.fail("missing ')'")
            return v
        self.fail("unexpected end of expression" if kind is None else f"unexpected {val!r}")


def parse_poly(text, ring):
    """Parse a polynomial string (or an integer) over ``ring``."""
    if isinstance(text, bool):
        raise ScenarioError(f"expected a polynomial, got {text!r}")
    if isinstance(text, int):
        return ring(text)
    if isinstance(text, float):
        raise ScenarioError(f"non-rational literal {text!r} (write decimals as fractions)")
    if not isinstance(text, str):
        raise ScenarioError(f"expected a polynomial string, got {type(text).__name__}")
    return _PolyParser(text, ring).parse()


# -- strict document access -------------------------------------------------------------

def _line_map(text: str) -> dict:
    """Source line of every node, keyed by path; rejects duplicate keys."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as e:
        raise ScenarioError(f"malformed syntax: {e}") from None
    lines: dict = {}

    def walk(node, path):
        lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            seen = set()
            for k, v in node.value:
                key = k.value
                if key in seen:
                    raise ScenarioError(f"line {k.start_mark.line + 1}: duplicate field {key!r}")
                seen.add(key)
                lines[path + (key,)] = k.start_mark.line + 1
                walk(v, path + (key,))
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, path + (i,))

    if root is not None:
        walk(root, ())
    return lines


def _path_str(path: tuple) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<document>"


class _Doc:
    """Path-aware accessors that raise ScenarioError naming line and field."""

    def __init__(self, lines: dict):
        self.lines = lines

    def error(self, path: tuple, msg: str) -> ScenarioError:
        line = None
        p = path
        while line is None and p is not None:
            line = self.lines.get(p)
            p = p[:-1] if p else None
        where = f"line {line}: " if line else ""
        return ScenarioError(f"{where}{_path_str(path)}: {msg}")

    def mapping(self, value, path: tuple, required=(), optional=()) -> dict:
        if not isinstance(value, dict):
            raise self.error(path, "expected a mapping")
        allowed = set(required) | set(optional)
        for key in value:
            if key not in allowed:
                raise self.error(path + (key,), f"unknown field {key!r}")
        for key in required:
            if key not in value:
                raise self.error(path, f"missing field {key!r}")
        return value

    def seq(self, value, path: tuple, length: int | None = None) -> list:
        if not isinstance(value, list):
            raise self.error(path, "expected a list")
        if length is not None and len(value) != length:
            raise self.error(path, f"expected {length} entries, got {len(value)}")
        return value

    def integer(self, value, path: tuple, low: int | None = None) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(path, "expected an integer")
        if low is not None and value < low:
            raise self.error(path, f"must be at least {low}")
        return value

    def string(self, value, path: tuple, choices=None) -> str:
        if not isinstance(value, str):
            raise self.error(path, "expected a string")
        if choices is not None and value not in choices:
            raise self.error(path, f"must be one of {', '.join(choices)}")
        return value

    def rational(self, value, path: tuple):
        if isinstance(value, bool):
            raise self.error(path, "expected a rational number")
        if isinstance(value, int):
            return QQ(value)
        if isinstance(value, str):
            try:
                f = Fraction(value.strip())
            except ValueError:
                raise self.error(path, f"non-rational literal {value!r}") from None
            if "." in value or "e" in value.lower():
                raise self.error(path, f"non-rational literal {value!r} (write decimals as fractions)")
            return QQ(f.numerator, f.denominator)
        raise self.error(path, f"non-rational literal {value!r}")

    def poly(self, value, ring, path: tuple):
        try:
            return parse_poly(value, ring)
        except ScenarioError as e:
            raise self.error(path, str(e)) from None


# -- payload pieces ------------------------------------------------------------------------

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_TWO_FORM_KEY = re.compile(r"^\s*d([A-Za-z_][A-Za-z0-9_]*)\s*\^\s*d([A-Za-z_][A-Za-z0-9_]*)\s*$")


def _ring(doc: _Doc, value, path: tuple):
    names = doc.seq(value, path)
    if not names:
        raise doc.error(path, "need at least one variable")
    for i, v in enumerate(names):
        if not isinstance(v, str) or not _IDENT.match(v):
            raise doc.error(path + (i,), f"bad variable name {v!r}")
    if len(set(names)) != len(names):
        raise doc.error(path, "duplicate variable names")
    return poly_ring(tuple(names))


def _index(doc: _Doc, ring, name: str, path: tuple) -> int:
    names = names_of(ring)
    if name not in names:
        raise doc.error(path, f"unknown variable {name!r}")
    return names.index(name)


def _two_forms(doc: _Doc, ring, value, path: tuple, k: int) -> KForm:
    """k mappings ``"dx^dy": poly``."""
    comps = []
    for j, comp in enumerate(doc.seq(value, path, k)):
        cpath = path + (j,)
        if comp is None:
            comp = {}
        if not isinstance(comp, dict):
            raise doc.error(cpath, "expected a mapping of 'da^db' to polynomials")
        out: dict = {}
        for key, v in comp.items():
            kpath = cpath + (key,)
            m = _TWO_FORM_KEY.match(str(key))
            if not m:
                raise doc.error(kpath, f"bad 2-form key {key!r} (use 'dx^dy')")
            a = _index(doc, ring, m.group(1), kpath)
            b = _index(doc, ring, m.group(2), kpath)
            if a == b:
                raise doc.error(kpath, "dx^dx is zero; remove the entry")
            c = doc.poly(v, ring, kpath)
            if a > b:
                a, b, c = b, a, -c
            out[(a, b)] = out.get((a, b), ring.zero) + c
        comps.append(out)
    return KForm(ring, 2, tuple(comps))


def _one_form(doc: _Doc, ring, value, path: tuple) -> list:
    """A mapping ``"dx": poly`` as a coefficient row."""
    row = [ring.zero] * ring.ngens
    if value is None:
        return row
    if not isinstance(value, dict):
        raise doc.error(path, "expected a mapping of 'dx' to polynomials")
    for key, v in value.items():
        kpath = path + (key,)
        if not isinstance(key, str) or not key.startswith("d"):
            raise doc.error(kpath, f"bad 1-form key {key!r} (use 'dx')")
        row[_index(doc, ring, key[1:], kpath)] += doc.poly(v, ring, kpath)
    return row


def _vector_field(doc: _Doc, ring, value, path: tuple) -> VectorField:
    """A mapping ``"d/dx": poly``."""
    coeffs = [ring.zero] * ring.ngens
    if value is None:
        return VectorField(ring, tuple(coeffs))
    if not isinstance(value, dict):
        raise doc.error(path, "expected a mapping of 'd/dx' to polynomials")
    for key, v in value.items():
        kpath = path + (key,)
        if not isinstance(key, str) or not key.startswith("d/d"):
            raise doc.error(kpath, f"bad vector key {key!r} (use 'd/dx')")
        coeffs[_index(doc, ring, key[3:], kpath)] += doc.poly(v, ring, kpath)
    return VectorField(ring, tuple(coeffs))


def _algebra(doc: _Doc, value, path: tuple) -> LieAlgebra:
    if isinstance(value, str):
        named = {"heisenberg": heisenberg, "so3": so3, "filiform4": filiform4}
        if value in named:
            return named[value]()
        m = re.match(r"^abelian(\d+)$", value)
        if m and int(m.group(1)) > 0:
            return abelian(int(m.group(1)))
        raise doc.error(path, f"unknown Lie algebra {value!r} (heisenberg, so3, filiform4, abelianN)")
    spec = doc.mapping(value, path, ("dim", "brackets"))
    dim = doc.integer(spec["dim"], path + ("dim",), 1)
    br = {}
    for key, terms in (spec["brackets"] or {}).items():
        kpath = path + ("brackets", key)
        m = re.match(r"^\s*\[\s*e(\d+)\s*,\s*e(\d+)\s*\]\s*$", str(key))
        if not m:
            raise doc.error(kpath, f"bad bracket key {key!r} (use '[e1, e2]')")
        i, j = int(m.group(1)) - 1, int(m.group(2)) - 1
        if not (0 <= i < j < dim):
            raise doc.error(kpath, "need 1 <= i < j <= dim")
        tmap = doc.mapping(terms, kpath, (), tuple(f"e{l + 1}" for l in range(dim)))
        br[(i, j)] = {int(e[1:]) - 1: doc.rational(c, kpath + (e,)) for e, c in tmap.items()}
    g = LieAlgebra.from_brackets(dim, br)
    try:
        g.validate()
    except ValueError as e:
        raise doc.error(path, str(e)) from None
    return g


def _form_source(doc: _Doc, value, path: tuple) -> Callable[[], KForm]:
    spec = doc.mapping(value, path, ("type",), ("nq", "k", "variables", "components"))
    t = doc.string(spec["type"], path + ("type",), ("covelocities", "explicit"))
    if t == "covelocities":
        doc.mapping(spec, path, ("type", "nq", "k"))
        nq = doc.integer(spec["nq"], path + ("nq",), 1)
        k = doc.integer(spec["k"], path + ("k",), 1)
        return lambda: covelocities(nq, k).omega
    doc.mapping(spec, path, ("type", "variables", "k", "components"))
    ring = _ring(doc, spec["variables"], path + ("variables",))
    k = doc.integer(spec["k"], path + ("k",), 1)
    w = _two_forms(doc, ring, spec["components"], path + ("components",), k)
    return lambda: w


_STRUCT_FIELDS = ("type", "form", "algebra", "k", "variables", "matrix", "components", "variant", "frame",
                  "factors")


def _structure_source(doc: _Doc, value, path: tuple) -> Callable[[SamplePlan], polypoisson.PolyPoissonStruct]:
    spec = doc.mapping(value, path, ("type",), _STRUCT_FIELDS)
    types = ("form", "lie_poisson", "bivector", "poisson_product", "time_family", "trivial", "diagonal",
             "first_slot", "explicit")
    t = doc.string(spec["type"], path + ("type",), types)
    if t == "form":
        doc.mapping(spec, path, ("type", "form"))
        src = _form_source(doc, spec["form"], path + ("form",))
        return lambda plan: polypoisson.from_polysymplectic(src(), plan)
    if t == "lie_poisson":
        doc.mapping(spec, path, ("type", "algebra", "k"))
        g = _algebra(doc, spec["algebra"], path + ("algebra",))
        k = doc.integer(spec["k"], path + ("k",), 1)
        return lambda plan: polypoisson.lie_poisson_direct_sum(g, k, plan)
    if t == "bivector":
        doc.mapping(spec, path, ("type", "variables", "matrix"))
        ring, pi = _bivector(doc, spec, path)
        return lambda plan: polypoisson.poisson_structure(ring, pi, plan)
    if t == "poisson_product":
        doc.mapping(spec, path, ("type", "factors"))
        factors = []
        for i, f in enumerate(doc.seq(spec["factors"], path + ("factors",))):
            fpath = path + ("factors", i)
            doc.mapping(f, fpath, ("variables", "matrix"))
            ring, pi = _bivector(doc, f, fpath)
            factors.append((ring.ngens, pi))
        if not factors:
            raise doc.error(path + ("factors",), "need at least one factor")
        return lambda plan: polypoisson.product_of_poisson(factors, plan)
    if t == "time_family":
        doc.mapping(spec, path, ("type", "variables", "k", "components", "variant"))
        ring = _ring(doc, spec["variables"], path + ("variables",))
        k = doc.integer(spec["k"], path + ("k",), 1)
        w = _two_forms(doc, ring, spec["components"], path + ("components",), k)
        variant = doc.integer(spec["variant"], path + ("variant",), 0)
        if variant > 3:
            raise doc.error(path + ("variant",), "must be 0, 1, 2 or 3")
        return lambda plan: foliation.time_family_structure(w, variant, plan)
    if t in ("trivial", "diagonal", "first_slot"):
        doc.mapping(spec, path, ("type", "variables", "k"))
        ring = _ring(doc, spec["variables"], path + ("variables",))
        k = doc.integer(spec["k"], path + ("k",), 1)
        make = {"trivial": polypoisson.trivial_structure, "diagonal": polypoisson.diagonal_structure,
                "first_slot": polypoisson.first_slot_structure}[t]
        return lambda plan: make(ring, k, plan)
    doc.mapping(spec, path, ("type", "variables", "k", "frame"))
    ring = _ring(doc, spec["variables"], path + ("variables",))
    k = doc.integer(spec["k"], path + ("k",), 1)
    frame, anchor = [], []
    for i, el in enumerate(doc.seq(spec["frame"], path + ("frame",))):
        epath = path + ("frame", i)
        doc.mapping(el, epath, ("forms", "anchor"))
        rows = [_one_form(doc, ring, r, epath + ("forms", j))
                for j, r in enumerate(doc.seq(el["forms"], epath + ("forms",), k))]
        frame.append(KForm.one_forms(ring, rows))
        anchor.append(_vector_field(doc, ring, el["anchor"], epath + ("anchor",)))
    return lambda plan: polypoisson.PolyPoissonStruct(ring, k, tuple(frame), tuple(anchor), plan)


def _bivector(doc: _Doc, spec: dict, path: tuple):
    ring = _ring(doc, spec["variables"], path + ("variables",))
    n = ring.ngens
    rows = doc.seq(spec["matrix"], path + ("matrix",), n)
    pi = [[doc.poly(e, ring, path + ("matrix", i, j)) for j, e in enumerate(doc.seq(r, path + ("matrix", i), n))]
          for i, r in enumerate(rows)]
    for i in range(n):
        for j in range(n):
            if pi[i][j] + pi[j][i]:
                raise doc.error(path + ("matrix", i, j), "bivector matrix is not antisymmetric")
    return ring, pi


# -- scenario --------------------------------------------------------------------------------

@dataclass
class Scenario:
    """A parsed, validated scenario; ``inputs`` holds builders for the module inputs."""

    name: str
    kind: str
    inputs: dict
    sample: SamplePlan = field(default_factory=SamplePlan)
    conventions: dict = field(default_factory=lambda: dict(SUPPORTED_CONVENTIONS))
    expect: dict = field(default_factory=dict)
    description: str = ""

    @property
    def suites(self) -> tuple[str, ...]:
        return tuple(SUITES[self.kind])


def parse_scenario(data: bytes | str) -> Scenario:
    """Parse and validate a scenario document; errors name the line and field."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ScenarioError(f"not UTF-8 text: {e}") from None
    else:
        text = data
    lines = _line_map(text)
    doc = _Doc(lines)
    raw = yaml.safe_load(text)
    top = doc.mapping(raw, (), ("version", "name", "kind", "payload"),
                      ("description", "conventions", "sample", "expect"))
    version = doc.integer(top["version"], ("version",))
    if version != FORMAT_VERSION:
        raise doc.error(("version",), f"unsupported format version {version} (expected {FORMAT_VERSION})")
    name = doc.string(top["name"], ("name",))
    kind = doc.string(top["kind"], ("kind",), KINDS)
    description = doc.string(top.get("description", ""), ("description",))
    conventions = dict(SUPPORTED_CONVENTIONS)
    if "conventions" in top:
        conv = doc.mapping(top["conventions"], ("conventions",), (), tuple(SUPPORTED_CONVENTIONS))
        for key, v in conv.items():
            if v != SUPPORTED_CONVENTIONS[key]:
                raise doc.error(("conventions", key),
                                f"unsupported convention {v!r} (supported: {SUPPORTED_CONVENTIONS[key]!r})")
    plan = SamplePlan()
    if "sample" in top:
        s = doc.mapping(top["sample"], ("sample",), (), ("seed", "count", "box"))
        plan = SamplePlan(doc.integer(s.get("seed", plan.seed), ("sample", "seed"), 0),
                          doc.integer(s.get("count", plan.count), ("sample", "count"), 1),
                          doc.integer(s.get("box", plan.box), ("sample", "box"), 1))
    expect = {}
    if "expect" in top:
        e = top["expect"]
        if not isinstance(e, dict):
            raise doc.error(("expect",), "expected a mapping of check names to FAIL or WARN")
        for key, v in e.items():
            expect[str(key)] = doc.string(v, ("expect", key), (FAIL, WARN))
    inputs = PAYLOADS[kind](doc, top["payload"], ("payload",))
    return Scenario(name, kind, inputs, plan, conventions, expect, description)


# -- payloads per kind ---------------------------------------------------------------------

def _payload_polysymplectic(doc, value, path):
    return {"form": _form_source(doc, value, path)}


def _payload_polypoisson(doc, value, path):
    return {"structure": _structure_source(doc, value, path)}


def _payload_foliation(doc, value, path):
    spec = doc.mapping(value, path, ("type",), ("variables", "k", "distribution", "components", "mode",
                                                 "complement", "compare", "structures"))
    t = doc.string(spec["type"], path + ("type",), ("reconstruct", "shared_foliation"))
    if t == "shared_foliation":
        doc.mapping(spec, path, ("type", "structures"))
        items = doc.seq(spec["structures"], path + ("structures",))
        if len(items) < 2:
            raise doc.error(path + ("structures",), "need at least two structures")
        return {"type": t, "structures": [_structure_source(doc, s, path + ("structures", i))
                                          for i, s in enumerate(items)]}
    doc.mapping(spec, path, ("type", "variables", "k", "distribution", "components"),
                ("mode", "complement", "compare"))
    ring = _ring(doc, spec["variables"], path + ("variables",))
    k = doc.integer(spec["k"], path + ("k",), 1)
    gens = [_vector_field(doc, ring, v, path + ("distribution", i))
            for i, v in enumerate(doc.seq(spec["distribution"], path + ("distribution",)))]
    w = _two_forms(doc, ring, spec["components"], path + ("components",), k)
    mode = doc.string(spec.get("mode", "pointwise"), path + ("mode",), ("pointwise", "framed"))
    complement = None
    if "complement" in spec:
        complement = [_vector_field(doc, ring, v, path + ("complement", i))
                      for i, v in enumerate(doc.seq(spec["complement"], path + ("complement",)))]
    if mode == "framed" and complement is None:
        raise doc.error(path, "framed mode needs a 'complement'")
    compare = _structure_source(doc, spec["compare"], path + ("compare",)) if "compare" in spec else None
    return {"type": t, "ring": ring, "gens": gens, "form": w, "mode": mode, "complement": complement,
            "compare": compare}


def _payload_avcourant(doc, value, path):
    spec = doc.mapping(value, path, ("type",), ("structure", "form", "variables", "k", "frame"))
    t = doc.string(spec["type"], path + ("type",), ("graph", "graph_of_form", "tangent_bundle", "explicit"))
    if t == "graph":
        doc.mapping(spec, path, ("type", "structure"))
        src = _structure_source(doc, spec["structure"], path + ("structure",))
        return {"type": t, "structure": src}
    if t == "graph_of_form":
        doc.mapping(spec, path, ("type", "form"))
        return {"type": t, "form": _form_source(doc, spec["form"], path + ("form",))}
    if t == "tangent_bundle":
        doc.mapping(spec, path, ("type", "variables", "k"))
        ring = _ring(doc, spec["variables"], path + ("variables",))
        return {"type": t, "ring": ring, "k": doc.integer(spec["k"], path + ("k",), 1)}
    doc.mapping(spec, path, ("type", "variables", "k", "frame"))
    ring = _ring(doc, spec["variables"], path + ("variables",))
    k = doc.integer(spec["k"], path + ("k",), 1)
    sections = []
    for i, el in enumerate(doc.seq(spec["frame"], path + ("frame",))):
        epath = path + ("frame", i)
        doc.mapping(el, epath, ("X", "eta"))
        X = _vector_field(doc, ring, el["X"], epath + ("X",))
        rows = [_one_form(doc, ring, r, epath + ("eta", j))
                for j, r in enumerate(doc.seq(el["eta"], epath + ("eta",), k))]
        sections.append(avcourant.AVSection(X, KForm.one_forms(ring, rows)))
    if not sections:
        raise doc.error(path + ("frame",), "need at least one section")
    return {"type": t, "sections": sections}


def _payload_groupoid(doc, value, path):
    spec = doc.mapping(value, path, ("builder",), ("form", "nq", "k", "algebra", "mutant"))
    b = doc.string(spec["builder"], path + ("builder",), ("pair", "covelocity", "coadjoint"))
    out: dict = {"builder": b}
    if b == "pair":
        doc.mapping(spec, path, ("builder", "form"), ("mutant",))
        out["form"] = _form_source(doc, spec["form"], path + ("form",))
    elif b == "covelocity":
        doc.mapping(spec, path, ("builder", "nq", "k"), ("mutant",))
        out["nq"] = doc.integer(spec["nq"], path + ("nq",), 1)
        out["k"] = doc.integer(spec["k"], path + ("k",), 1)
    else:
        doc.mapping(spec, path, ("builder", "algebra", "k"), ("mutant",))
        out["algebra"] = _algebra(doc, spec["algebra"], path + ("algebra",))
        out["k"] = doc.integer(spec["k"], path + ("k",), 1)
    out["mutant"] = None
    if "mutant" in spec:
        mpath = path + ("mutant",)
        m = doc.mapping(spec["mutant"], mpath, (), ("drop_component", "corrupt_multiplication"))
        if len(m) != 1:
            raise doc.error(mpath, "give exactly one mutation")
        if "drop_component" in m:
            out["mutant"] = ("drop_component", doc.integer(m["drop_component"], mpath + ("drop_component",), 1))
        else:
            if m["corrupt_multiplication"] is not True:
                raise doc.error(mpath + ("corrupt_multiplication",), "expected true")
            out["mutant"] = ("corrupt_multiplication", None)
    return out


REDUCTION_FIXTURES = ("covelocity_translation", "heisenberg_cotangent", "product_planes", "degenerate_level",
                      "covelocity_groupoid", "pair_groupoid")


def _payload_reduction(doc, value, path):
    spec = doc.mapping(value, path, ("fixture",), ("nq", "k", "zeta"))
    name = doc.string(spec["fixture"], path + ("fixture",), REDUCTION_FIXTURES)
    allowed = {"covelocity_translation": ("nq", "k"), "heisenberg_cotangent": ("k", "zeta"),
               "covelocity_groupoid": ("k",)}.get(name, ())
    doc.mapping(spec, path, ("fixture",), allowed)
    out = {"fixture": name}
    if "nq" in spec:
        out["nq"] = doc.integer(spec["nq"], path + ("nq",), 2)
    if "k" in spec:
        out["k"] = doc.integer(spec["k"], path + ("k",), 1)
    if name == "heisenberg_cotangent":
        k = out.get("k", 2)
        if "zeta" not in spec:
            raise doc.error(path, "missing field 'zeta'")
        z = doc.seq(spec["zeta"], path + ("zeta",), 3 * k)
        out["zeta"] = tuple(doc.rational(v, path + ("zeta", i)) for i, v in enumerate(z))
        if not any(out["zeta"][3 * j + 2] for j in range(k)):
            raise doc.error(path + ("zeta",), "needs a nonzero e3-component in some slot")
    return out


PAYLOADS = {"polysymplectic": _payload_polysymplectic, "polypoisson": _payload_polypoisson,
            "foliation": _payload_foliation, "avcourant": _payload_avcourant, "groupoid": _payload_groupoid,
            "reduction": _payload_reduction}


# -- suites ----------------------------------------------------------------------------------

class _Run:
    """Memoized inputs for one scenario execution."""

    def __init__(self, sc: Scenario, plan: SamplePlan):
        self.sc = sc
        self.plan = plan
        self.memo: dict = {}

    def get(self, key, make):
        if key not in self.memo:
            self.memo[key] = make()
        return self.memo[key]


def _polysymplectic_check(run):
    w = run.get("form", run.sc.inputs["form"])
    return is_polysymplectic(w, run.plan)


def _suite_ps_form(run):
    return _polysymplectic_check(run)


def _suite_ps_induced(run):
    if not run.get("ps", lambda: _polysymplectic_check(run)).ok:
        return None
    w = run.get("form", run.sc.inputs["form"])
    return polypoisson.check_structure(polypoisson.from_polysymplectic(w, run.plan))


def _pp(run):
    return run.get("pp", lambda: run.sc.inputs["structure"](run.plan))


def _pp_ok(run) -> bool:
    return run.get("pp_check", lambda: polypoisson.check_structure(_pp(run))).ok


def _suite_pp_structure(run):
    return run.get("pp_check", lambda: polypoisson.check_structure(_pp(run)))


def _suite_pp_weak(run):
    return polypoisson.check_weak(_pp(run))


def _suite_pp_jacobiator(run):
    if not _pp_ok(run):
        return None
    return polypoisson.jacobiator(_pp(run))


def _suite_pp_avcourant(run):
    if not _pp_ok(run):
        return None
    return avcourant.classify(avcourant.graph(_pp(run), check=False))


def _regularity(pp, points) -> Report:
    rep = Report("regularity")
    D = foliation.distribution(pp, points)
    if D.regular:
        rep.add("regular distribution", True, f"rank {D.generic_rank} at {len(D.sample_ranks)} points")
    else:
        p, r = D.singular_points[0]
        rep.add("regular distribution", False, f"rank drops below {D.generic_rank}", point=p, rank=r)
    return rep


def _suite_pp_foliation(run):
    if not _pp_ok(run):
        return None
    pp = _pp(run)
    pts = points_for(run.plan, pp.ring)
    rep = _regularity(pp, pts)
    if rep.ok:
        rep.extend(foliation.round_trip(pp, pts))
    return rep


def _suite_fol_reconstruct(run):
    inp = run.sc.inputs
    rep = Report("reconstruct")
    if inp["type"] != "reconstruct":
        return None
    D = foliation.make_distribution(inp["ring"], inp["gens"], run.plan)
    try:
        res = foliation.structure_from_foliation(D, inp["form"], inp["mode"], inp["complement"])
    except ValueError as e:
        rep.add("preconditions", False, str(e), reason=str(e))
        return rep
    rep.add("preconditions", True, "regular, leafwise nondegenerate, closed on leaves")
    rep.extend(res.report)
    if inp["compare"] is not None and res.structure is not None:
        rep.extend(polypoisson.same_structure(res.structure, inp["compare"](run.plan)), "compare ")
    return rep


def _suite_fol_structures(run):
    inp = run.sc.inputs
    if inp["type"] != "shared_foliation":
        return None
    rep = Report("structures")
    for i, make in enumerate(inp["structures"]):
        pp = run.get(("S", i), lambda make=make: make(run.plan))
        rep.extend(polypoisson.check_structure(pp), f"S{i + 1} ")
    return rep


def _suite_fol_leaves(run):
    inp = run.sc.inputs
    if inp["type"] != "shared_foliation":
        return None
    pps = [run.get(("S", i), lambda make=make: make(run.plan)) for i, make in enumerate(inp["structures"])]
    rep = Report("leaves")
    pts = points_for(run.plan, pps[0].ring)
    ranks = [foliation.distribution(pp, pts).generic_rank for pp in pps]
    spans = all(foliation.span_equal_at([X.at(m) for X in pps[0].anchor], [X.at(m) for X in pp.anchor], pp.n)
                for pp in pps[1:] for m in pts)
    if len(set(ranks)) == 1 and spans:
        rep.add("same distribution", True, f"rank {ranks[0]} at {len(pts)} points")
    else:
        rep.add("same distribution", False, "distributions differ", ranks=ranks)
    leaf_bad = None
    for m in pts:
        ref = foliation.leafwise_form_at(pps[0], m)
        for i, pp in enumerate(pps[1:], start=2):
            if not foliation.same_leaf_data(ref, foliation.leafwise_form_at(pp, m)):
                leaf_bad = leaf_bad or (i, m)
    if leaf_bad:
        rep.add("same leaf forms", False, f"S{leaf_bad[0]} differs from S1", point=leaf_bad[1])
    else:
        rep.add("same leaf forms", True, f"at {len(pts)} points")
    distinct = all(not polypoisson.same_structure(pps[a], pps[b], pts).ok
                   for a in range(len(pps)) for b in range(a + 1, len(pps)))
    rep.add("structures pairwise distinct", distinct, "" if distinct else "two structures coincide",
            **({} if distinct else {"reason": "same span and anchor"}))
    return rep


def _av_bundle(run):
    def make():
        inp = run.sc.inputs
        t = inp["type"]
        if t == "graph":
            return avcourant.graph(run.get("pp", lambda: inp["structure"](run.plan)), check=False)
        if t == "graph_of_form":
            return avcourant.graph_of_form(inp["form"](), run.plan)
        if t == "tangent_bundle":
            return avcourant.tangent_bundle(inp["ring"], inp["k"], run.plan)
        return avcourant.AVSubbundle(tuple(inp["sections"]), run.plan)
    return run.get("L", make)


def _suite_av_classify(run):
    return run.get("classify", lambda: avcourant.classify(_av_bundle(run)))


def _suite_av_extract(run):
    cls = run.get("classify", lambda: avcourant.classify(_av_bundle(run)))
    if any(cls.verdict(c) == FAIL for c in avcourant.B_CLAUSES):
        return None
    rep = Report("extract")
    pp = avcourant.extract(_av_bundle(run))
    rep.add("extracted structure", True, f"rank {pp.rank}")
    if run.sc.inputs["type"] == "graph":
        rep.extend(polypoisson.same_structure(pp, run.memo["pp"]), "extract∘graph ")
    return rep


def _gp_model(run):
    def make():
        inp = run.sc.inputs
        b = inp["builder"]
        if b == "pair":
            model = groupoid.build_pair(inp["form"](), run.plan)
        elif b == "covelocity":
            model = groupoid.build_covelocity(inp["nq"], inp["k"], run.plan)
        else:
            model = groupoid.build_coadjoint(inp["algebra"], inp["k"], run.plan)
        mut = inp["mutant"]
        if mut and mut[0] == "drop_component":
            if mut[1] > model.k:
                raise ValueError(f"cannot drop component {mut[1]} of {model.k}")
            model = groupoid.drop_component(model, mut[1] - 1)
        elif mut:
            from dataclasses import replace
            model = replace(model, chart=groupoid.corrupt_multiplication(model.chart))
        return model
    return run.get("model", make)


def _suite_gp_model(run):
    return run.get("model_check", lambda: groupoid.check_model(_gp_model(run)))


def _suite_gp_induced(run):
    if not run.get("model_check", lambda: groupoid.check_model(_gp_model(run))).ok:
        return None
    inp = run.sc.inputs
    model = _gp_model(run)
    induced = groupoid.induced_structure(model)
    b = inp["builder"]
    if b == "pair":
        target = polypoisson.from_polysymplectic(inp["form"](), run.plan)
    elif b == "covelocity":
        target = polypoisson.trivial_structure(model.chart.base, model.k, run.plan)
    else:
        target = polypoisson.lie_poisson_direct_sum(inp["algebra"], model.k, run.plan)
    rep = Report("induced")
    rep.extend(polypoisson.same_structure(induced, target), "vs named target ")
    return rep


def _suite_gp_prop24(run):
    rep = Report("prop24")
    im, nd = groupoid.prop24_sides(_gp_model(run))
    rep.add("(2.11) ⇔ ω nondegenerate", im == nd, f"(2.11) {im}, nondegenerate {nd}",
            **({} if im == nd else {"im_2_11": im, "nondegenerate": nd}))
    return rep


def _red_system(run):
    def make():
        inp = run.sc.inputs
        name = inp["fixture"]
        if name == "covelocity_translation":
            s = fx.covelocity_translation(inp.get("nq", 2), inp.get("k", 2), run.plan)
            return s, fx.covelocity_translation_level(s)
        if name == "heisenberg_cotangent":
            s = fx.heisenberg_cotangent(inp.get("k", 2), run.plan)
            return s, fx.heisenberg_level(s, inp["zeta"])
        if name == "product_planes":
            return fx.product_planes(run.plan)
        if name == "degenerate_level":
            return fx.degenerate_level(run.plan)
        return None
    return run.get("system", make)


def _red_groupoid(run):
    def make():
        inp = run.sc.inputs
        if inp["fixture"] == "covelocity_groupoid":
            return fx.covelocity_groupoid_reduction(inp.get("k", 2), run.plan)
        if inp["fixture"] == "pair_groupoid":
            return fx.pair_groupoid_reduction(run.plan)
        return None
    return run.get("gred", make)


def _suite_red_action(run):
    sys = _red_system(run)
    if sys is None:
        g = _red_groupoid(run)
        rep = reduction.check_action(g.action)
        rep.extend(reduction.check_action(g.base_action), "base ")
        rep.extend(reduction.check_quotient(g.base_quotient, g.base_action), "base ")
        return rep
    s, _ = sys
    rep = reduction.check_action(s.action)
    rep.extend(reduction.check_quotient(s.quotient, s.action))
    return rep


def _reducible(run):
    s, _ = _red_system(run)
    return run.get("reducible", lambda: reduction.check_reducible(s.pp, s.action))


def _suite_red_reducible(run):
    if _red_system(run) is None:
        return None
    return _reducible(run)


def _reduced(run):
    s, _ = _red_system(run)
    return run.get("reduced", lambda: reduction.reduce_structure(s.pp, s.action, s.quotient))


def _suite_red_reduce(run):
    if _red_system(run) is None or not _reducible(run).ok:
        return None
    s, _ = _red_system(run)
    red = _reduced(run)
    rep = Report("reduce")
    rep.extend(polypoisson.check_structure(red), "reduced ")
    rep.extend(polypoisson.is_morphism(s.quotient.pi, s.pp, red), "pi morphism ")
    return rep


def _suite_red_moment(run):
    sys = _red_system(run)
    if sys is None:
        g = _red_groupoid(run)
        return reduction.check_moment(g.model.omega, g.action, g.J)
    s, _ = sys
    rep = reduction.check_moment(s.omega, s.action, s.J)
    if rep.ok:
        rep.extend(reduction.moment_is_morphism(s.omega, s.J, s.algebra, s.k, run.plan), "J morphism ")
    return rep


def _level(run):
    s, leaf = _red_system(run)
    return run.get("level", lambda: reduction.level_reduce(s.omega, s.action, s.J, leaf.lsm))


def _suite_red_level(run):
    if _red_system(run) is None:
        return None
    return _level(run)[1]


def _suite_red_leaf(run):
    if _red_system(run) is None or not _reducible(run).ok:
        return None
    wr, lrep = _level(run)
    if wr is None or not lrep.ok:
        return None
    _, leaf = _red_system(run)
    return reduction.compare_leaf(_reduced(run), wr, leaf.to_quotient, points_for(run.plan, wr.ring))


def _suite_red_groupoid(run):
    g = _red_groupoid(run)
    if g is None:
        return None
    model, rep = g.run()
    if rep.ok and run.sc.inputs["fixture"] == "covelocity_groupoid":
        ref = groupoid.build_covelocity(1, g.model.k, run.plan)
        same = rename(model.omega, ref.chart.arrows) == ref.omega
        rep.add("ω_red = covelocity form", same, "after relabeling",
                **({} if same else {"reduced": model.omega, "expected": ref.omega}))
    return rep


SUITES: dict[str, dict[str, Callable]] = {
    "polysymplectic": {"polysymplectic": _suite_ps_form, "induced": _suite_ps_induced},
    "polypoisson": {"structure": _suite_pp_structure, "weak": _suite_pp_weak, "jacobiator": _suite_pp_jacobiator,
                    "avcourant": _suite_pp_avcourant, "foliation": _suite_pp_foliation},
    "foliation": {"reconstruct": _suite_fol_reconstruct, "structures": _suite_fol_structures,
                  "leaves": _suite_fol_leaves},
    "avcourant": {"classify": _suite_av_classify, "extract": _suite_av_extract},
    "groupoid": {"model": _suite_gp_model, "induced": _suite_gp_induced, "prop24": _suite_gp_prop24},
    "reduction": {"action": _suite_red_action, "reducible": _suite_red_reducible, "reduce": _suite_red_reduce,
                  "moment": _suite_red_moment, "level": _suite_red_level, "leaf": _suite_red_leaf,
                  "groupoid": _suite_red_groupoid},
}


def run_suite(sc: Scenario, which: str | list[str] = "all", plan: SamplePlan | None = None) -> Report:
    """Run the kind's suites in their fixed order; internal errors become ERROR checks."""
    plan = plan or sc.sample
    table = SUITES[sc.kind]
    if which == "all":
        names = list(table)
    else:
        names = list(which)
        unknown = [n for n in names if n not in table]
        if unknown:
            raise ScenarioError(f"unknown suite {unknown[0]!r} for kind {sc.kind} (have {', '.join(table)})")
        names = [n for n in table if n in names]
    run = _Run(sc, plan)
    rep = Report(sc.name, conventions=dict(sc.conventions))
    for name in names:
        try:
            sub = table[name](run)
        except Exception as e:  # noqa: BLE001 - reported as an ERROR verdict
            rep.add(name, ERROR, f"{type(e).__name__}: {e}", error=f"{type(e).__name__}: {e}")
            continue
        if sub is not None:
            rep.extend(sub, f"{name}: ")
    return rep


def expectation_status(sc: Scenario, rep: Report) -> dict:
    """Per-check expected verdicts and the list of unexpected outcomes."""
    present = {c.name for c in rep.checks}
    ran = {name.split(": ", 1)[0] for name in present}
    # expectations for suites that were not selected are not missing
    missing = sorted(key for key in set(sc.expect) - present
                     if key.split(": ", 1)[0] in ran or key.split(": ", 1)[0] not in SUITES[sc.kind])
    unexpected = []
    for c in rep.checks:
        exp = sc.expect.get(c.name)
        if c.verdict == ERROR:
            continue
        if exp is None and c.verdict == FAIL:
            unexpected.append(c.name)
        elif exp is not None and c.verdict != exp:
            unexpected.append(c.name)
    errors = [c.name for c in rep.checks if c.verdict == ERROR]
    return {"unexpected": unexpected, "missing": missing, "errors": errors}


__all__ = ["FORMAT_VERSION", "KINDS", "PASS", "FAIL", "WARN", "ERROR", "Scenario", "ScenarioError",
           "parse_poly", "parse_scenario", "run_suite", "expectation_status", "SUITES"]
