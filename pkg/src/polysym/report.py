"""Verdict reports shared by every checker."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator

PASS = "PASS"
FAIL = "FAIL"
WARN = "WARN"
ERROR = "ERROR"

CONVENTIONS = {
    "canonical_symplectic": "omega_can = sum_i dq_i ^ dp_i",
    "ad_star": "<ad*_u zeta, v> = -<zeta, [u, v]>",
    "interior": "i_X contracts the first slot",
}


@dataclass
class Check:
    name: str
    verdict: str
    detail: str = ""
    witness: dict[str, str] = field(default_factory=dict)
    seconds: float = 0.0

    def as_dict(self, timings: bool = False) -> dict:
        d = {"name": self.name, "verdict": self.verdict, "detail": self.detail,
             "witness": {k: str(v) for k, v in self.witness.items()}}
        if timings:
            d["seconds"] = round(self.seconds, 6)
        return d


@dataclass
class Report:
    """An ordered list of named checks.

    ``data`` carries computed by-products (closure coefficients, frames, ...)
    for callers; it is never rendered.
    """

    title: str
    checks: list[Check] = field(default_factory=list)
    conventions: dict[str, str] = field(default_factory=lambda: dict(CONVENTIONS))
    data: dict = field(default_factory=dict, repr=False, compare=False)

    def add(self, name: str, ok: bool | str, detail: str = "", seconds: float = 0.0,
            **witness) -> Check:
        verdict = ok if isinstance(ok, str) else (PASS if ok else FAIL)
        if verdict == FAIL and not witness:
            witness = {"reason": detail or name}
        c = Check(name, verdict, detail, {k: _fmt(v) for k, v in witness.items()}, seconds)
        self.checks.append(c)
        return c

    def extend(self, other: "Report", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.verdict, c.detail, dict(c.witness), c.seconds))

    @property
    def ok(self) -> bool:
        return all(c.verdict in (PASS, WARN) for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.verdict in (FAIL, ERROR)]

    def verdict(self, name: str) -> str:
        for c in self.checks:
            if c.name == name:
                return c.verdict
        raise KeyError(name)

    def verdicts(self) -> dict[str, str]:
        return {c.name: c.verdict for c in self.checks}

    def first_failure(self) -> Check | None:
        f = self.failures
        return f[0] if f else None

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        lines = [f"{self.title}: {'PASS' if self.ok else 'FAIL'}"]
        for c in self.checks:
            lines.append(f"  [{c.verdict}] {c.name}" + (f" - {c.detail}" if c.detail else ""))
        return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, (list, tuple)):
        return "(" + ", ".join(_fmt(x) for x in v) + ")"
    return str(v)


@contextmanager
def timed() -> Iterator[list[float]]:
    box = [0.0]
    t0 = time.perf_counter()
    try:
        yield box
    finally:
        box[0] = time.perf_counter() - t0
