"""Command-line runner: ``polysym check <file>...`` and ``polysym scenarios``.

Exit status: 0 when every check matches its expectation, 1 on an
unexpected verdict, 2 on a parse error or an internal (ERROR) verdict.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .exactalg import SamplePlan
from .report import ERROR, FAIL, Report
from .scenario import Scenario, ScenarioError, expectation_status, parse_scenario, run_suite

REPORT_SCHEMA = "polysym.report"
REPORT_VERSION = 1


@dataclass
class Outcome:
    """One scenario's run: either a report or a parse error."""

    source: str
    scenario: Scenario | None = None
    report: Report | None = None
    plan: SamplePlan | None = None
    error: str | None = None
    status: dict = field(default_factory=dict)

    @property
    def result(self) -> str:
        if self.error is not None or self.status.get("errors"):
            return "error"
        if self.status.get("unexpected") or self.status.get("missing"):
            return "unexpected"
        return "ok"


def shipped_scenarios() -> list[Path]:
    root = resources.files("polysym") / "scenarios"
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".yaml"))


def _resolve(arg: str) -> Path:
    p = Path(arg)
    if p.exists():
        return p
    for s in shipped_scenarios():
        if s.stem == arg:
            return s
    return p


def run_file(path: Path, suite="all", seed=None, samples=None, box=None) -> Outcome:
    out = Outcome(path.name)
    try:
        sc = parse_scenario(path.read_bytes())
    except OSError as e:
        out.error = f"cannot read: {e.strerror or e}"
        return out
    except ScenarioError as e:
        out.error = str(e)
        return out
    base = sc.sample
    plan = SamplePlan(base.seed if seed is None else seed, base.count if samples is None else samples,
                      base.box if box is None else box)
    out.scenario, out.plan = sc, plan
    try:
        out.report = run_suite(sc, suite, plan)
    except ScenarioError as e:
        out.error = str(e)
        return out
    out.status = expectation_status(sc, out.report)
    return out


def exit_code(outcomes: list[Outcome]) -> int:
    results = [o.result for o in outcomes]
    if "error" in results:
        return 2
    if "unexpected" in results:
        return 1
    return 0


# -- rendering --------------------------------------------------------------------------

def to_document(outcomes: list[Outcome], timings: bool = False) -> dict:
    """The structured report; field names are frozen for schema version 1."""
    scenarios = []
    for o in outcomes:
        entry: dict = {"source": o.source}
        if o.scenario is None:
            entry.update({"name": None, "kind": None, "result": "error", "error": o.error})
            scenarios.append(entry)
            continue
        sc, rep = o.scenario, o.report
        entry.update({"name": sc.name, "kind": sc.kind,
                      "sample": {"seed": o.plan.seed, "count": o.plan.count, "box": o.plan.box},
                      "conventions": dict(sorted(sc.conventions.items()))})
        if rep is None:
            entry.update({"result": "error", "error": o.error})
            scenarios.append(entry)
            continue
        checks = []
        for c in rep.checks:
            d = c.as_dict(timings)
            d["expected"] = sc.expect.get(c.name)
            checks.append(d)
        entry.update({"checks": checks, "missing_expectations": o.status.get("missing", []),
                      "result": o.result})
        scenarios.append(entry)
    return {"schema": REPORT_SCHEMA, "version": REPORT_VERSION, "exit_code": exit_code(outcomes),
            "scenarios": scenarios}


def render(outcomes: list[Outcome], fmt: str = "text", timings: bool = False) -> bytes:
    if fmt == "structured":
        doc = to_document(outcomes, timings)
        return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    lines = []
    for o in outcomes:
        if o.scenario is None or o.report is None:
            lines.append(f"== {o.source}")
            lines.append(f"  error: {o.error}")
            lines.append("")
            continue
        sc, p = o.scenario, o.plan
        lines.append(f"== {sc.name} ({sc.kind}) seed={p.seed} samples={p.count} box={p.box}")
        for c in o.report.checks:
            exp = sc.expect.get(c.name)
            note = ""
            if exp is not None:
                note = " (expected)" if c.verdict == exp else f" (expected {exp})"
            detail = f" - {c.detail}" if c.detail else ""
            t = f" [{c.seconds:.3f}s]" if timings else ""
            lines.append(f"  [{c.verdict}] {c.name}{detail}{note}{t}")
            if c.verdict in (FAIL, ERROR):
                for key, val in c.witness.items():
                    lines.append(f"      {key}: {val}")
        for name in o.status.get("missing", []):
            lines.append(f"  expectation names a check that did not run: {name}")
        lines.append(f"  result: {o.result}")
        lines.append("")
    return ("\n".join(lines)).encode("utf-8")


def verdicts_from_document(doc: dict) -> dict[str, dict[str, str]]:
    """Per-scenario verdict vectors from a structured report."""
    return {s["name"]: {c["name"]: c["verdict"] for c in s.get("checks", [])}
            for s in doc["scenarios"] if s.get("name") is not None}


# -- entry point ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polysym", description="Exact checks for poly-symplectic and "
                                 "poly-Poisson structures on polynomial coordinate domains.")
    sub = ap.add_subparsers(dest="command", required=True)
    ck = sub.add_parser("check", help="run scenario files")
    ck.add_argument("files", nargs="+", help="scenario files, or names of shipped scenarios")
    ck.add_argument("--suite", default="all", help="'all' or a comma-separated list of suite names")
    ck.add_argument("--seed", type=int, help="override the scenario's sample seed")
    ck.add_argument("--samples", type=int, help="override the number of sample points")
    ck.add_argument("--box", type=int, help="override the sampling box bound")
    ck.add_argument("--format", choices=("text", "structured"), default="text")
    ck.add_argument("--out", help="write the report here instead of stdout")
    ck.add_argument("--timings", action="store_true", help="include wall time per check")
    sub.add_parser("scenarios", help="list the shipped scenario files")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "scenarios":
        for p in shipped_scenarios():
            print(p)
        return 0
    for flag in ("seed", "samples", "box"):
        v = getattr(args, flag)
        if v is not None and v < (0 if flag == "seed" else 1):
            print(f"polysym: --{flag} must be {'nonnegative' if flag == 'seed' else 'positive'}", file=sys.stderr)
            return 2
    suite = "all" if args.suite == "all" else [s.strip() for s in args.suite.split(",") if s.strip()]
    outcomes = [run_file(_resolve(f), suite, args.seed, args.samples, args.box) for f in args.files]
    data = render(outcomes, args.format, args.timings)
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.write(data.decode("utf-8"))
    for o in outcomes:
        if o.error:
            print(f"polysym: {o.source}: {o.error}", file=sys.stderr)
    return exit_code(outcomes)


if __name__ == "__main__":
    sys.exit(main())
