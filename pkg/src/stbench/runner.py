"""Execute a validated suite against its unit and produce the test report.

The report carries the three headline metrics: number of test cases,
statement coverage percentage of the unit under test, and the percentage of
successful assertions, plus per-case verdicts with exact expected/actual
values for every failed check.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import coverage as cov
from .frontend import types as T
from .frontend.diagnostics import FrontendError
from .frontend.parser import parse_source
from .frontend.resolve import TypedProgram, resolve
from .frontend.source import SourceUnit
from .harnessgen import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    AssemblyError,
    CollisionError,
    HarnessBundle,
    HarnessTemplate,
    build_harness,
)
from .runtime import values as V
from .runtime.interp import RuntimeFault, SimClock, run_program
from .testspec import CheckedSuite

MAX_SCANS = 100_000


class PipelineError(Exception):
    """An error wrapped with the pipeline phase it occurred in."""

    def __init__(self, phase: str, cause: Exception):
        self.phase = phase
        self.cause = cause
        super().__init__(f"[{phase}] {cause}")


class TypeMismatch(Exception):
    pass


# ---------------------------------------------------------------------------
# comparison policy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparePolicy:
    atol: float = DEFAULT_ATOL
    rtol: float = DEFAULT_RTOL


def compare(expected: V.Value, actual: V.Value, policy: ComparePolicy = ComparePolicy()) -> tuple[bool, str]:
    """Check an actual value against an expectation.

    Discrete types compare exactly; REAL/LREAL pass when
    |actual - expected| <= atol + rtol * |expected|.  Returns the verdict
    plus a rendered detail string; raises TypeMismatch across type families.
    """
    if T.family(expected.ty) != T.family(actual.ty):
        raise TypeMismatch(f"cannot compare {expected.ty} with {actual.ty}")
    detail = f"expected {V.render(expected)}, actual {V.render(actual)}"
    if expected.ty.kind in (T.Kind.REAL, T.Kind.LREAL):
        ok = abs(actual.v - expected.v) <= policy.atol + policy.rtol * abs(expected.v)
        return ok, detail
    return expected.v == actual.v, detail


# ---------------------------------------------------------------------------
# report model
# ---------------------------------------------------------------------------

@dataclass
class AssertionResult:
    state: int
    variable: str
    expected: str
    actual: str
    passed: bool


@dataclass
class CaseResult:
    name: str
    verdict: str                     # "pass" | "fail" | "fault"
    assertions: list[AssertionResult]
    fault: str | None = None

    def passed_count(self) -> int:
        return sum(1 for a in self.assertions if a.passed)


@dataclass
class RunOptions:
    cycle_time_ms: int = 10
    atol: float = DEFAULT_ATOL
    rtol: float = DEFAULT_RTOL
    max_scans: int = MAX_SCANS
    out_dir: Path | None = None
    fixed_clock: bool = False        # omit wall-clock timestamps from reports
    mode: str = ""                   # metadata: prompt mode that produced the suite
    provider: str = ""               # metadata: provider id
    warnings: tuple[str, ...] = ()   # metadata: e.g. columns dropped at generate time
    template: HarnessTemplate | None = None


@dataclass
class TestReport:
    unit: str
    cases: list[CaseResult]
    cases_total: int
    assertions_total: int
    assertions_passed: int
    assertion_success_pct: float | None      # None renders as "n/a"
    statement_coverage_pct: float
    coverage: cov.CoverageSummary
    cycles_executed: int
    cycle_time_ms: int
    mode: str = ""
    provider: str = ""
    warnings: tuple[str, ...] = ()
    artifacts: dict[str, str] = field(default_factory=dict)
    generated_at: str | None = None

    def all_green(self) -> bool:
        return all(c.verdict == "pass" for c in self.cases)

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "unit": self.unit,
            "metrics": {
                "cases_total": self.cases_total,
                "assertions_total": self.assertions_total,
                "assertions_passed": self.assertions_passed,
                "assertion_success_pct": self.assertion_success_pct,
                "statement_coverage_pct": self.statement_coverage_pct,
            },
            "cases": [
                {
                    "name": c.name,
                    "verdict": c.verdict,
                    "fault": c.fault,
                    "assertions": [
                        {
                            "state": a.state,
                            "variable": a.variable,
                            "expected": a.expected,
                            "actual": a.actual,
                            "passed": a.passed,
                        }
                        for a in c.assertions
                    ],
                }
                for c in self.cases
            ],
            "coverage": {
                "unit": {
                    "statements_total": self.coverage.unit.statements_total,
                    "statements_hit": self.coverage.unit.statements_hit,
                    "percentage": self.coverage.unit.percentage,
                },
                "per_pou": {
                    name: {
                        "statements_total": p.statements_total,
                        "statements_hit": p.statements_hit,
                        "percentage": p.percentage,
                    }
                    for name, p in sorted(self.coverage.per_pou.items())
                },
            },
            "meta": {
                "mode": self.mode,
                "provider": self.provider,
                "cycle_time_ms": self.cycle_time_ms,
                "cycles_executed": self.cycles_executed,
                "warnings": list(self.warnings),
                "generated_at": self.generated_at,
            },
            "artifacts": self.artifacts,
        }


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------

def run_suite(
    unit_src: str,
    library_srcs: list[str],
    checked_suite: CheckedSuite,
    options: RunOptions = RunOptions(),
) -> TestReport:
    """Generate the harness, execute it, and evaluate every assertion."""
    try:
        lib_programs: list[TypedProgram] = []
        for i, text in enumerate(library_srcs):
            lib_programs.append(resolve(parse_source(SourceUnit(text, f"library {i + 1}"))))
        unit_prog = resolve(parse_source(SourceUnit(unit_src, "unit")), lib_programs)
    except FrontendError as exc:
        raise PipelineError("assemble", exc) from exc

    try:
        bundle = build_harness(
            checked_suite,
            unit_prog,
            unit_src,
            library_srcs,
            template=options.template,
            cycle_time_ms=options.cycle_time_ms,
            atol=options.atol,
            rtol=options.rtol,
        )
    except CollisionError as exc:
        raise PipelineError("generate", exc) from exc
    except AssemblyError as exc:
        raise PipelineError("assemble", exc) from exc

    budget = max(c.total_dwell + 2 for c in bundle.cases)
    budget = min(budget, options.max_scans)
    clock = SimClock(now=0, cycle_time=options.cycle_time_ms)
    monitor_lines: list[str] = []
    done_vars = [bundle.hook_vars[c.name][0] for c in bundle.cases]
    instances = {c.instance_name for c in bundle.cases}

    def all_done(store, dead) -> bool:
        alive = [
            done
            for c, done in zip(bundle.cases, done_vars)
            if c.instance_name not in dead
        ]
        return all(store[d].v for d in alive)

    try:
        result = run_program(
            bundle.typed,
            bundle.program_name,
            budget,
            clock,
            monitor=monitor_lines.append,
            stop_when=all_done,
            quarantine=instances,
        )
    except RuntimeFault as exc:
        raise PipelineError("execute", exc) from exc

    cmap = cov.CoverageMap.for_program(bundle.typed)
    for trace in result.traces:
        cov.accumulate(cmap, trace)
    summary = cov.summarize(cmap, bundle.typed, checked_suite.fb_under_test)

    faults = {f.instance: f for f in result.faults}
    policy = ComparePolicy(options.atol, options.rtol)
    case_results: list[CaseResult] = []
    for c in bundle.cases:
        inst = result.instance.nested[c.instance_name]
        checked_upto = int(inst.store["CHECKED"].v)
        done = bool(inst.store["DONE"].v)
        assertions: list[AssertionResult] = []
        for slot in c.slots:
            if slot.state <= checked_upto:
                actual = inst.store[slot.actual_var]
                passed = not bool(inst.store[slot.flag_var].v)
                _ok, detail = compare(slot.expected, actual, policy)
                assertions.append(
                    AssertionResult(
                        slot.state,
                        slot.column,
                        V.render(slot.expected),
                        V.render(actual),
                        passed,
                    )
                )
            else:
                assertions.append(
                    AssertionResult(
                        slot.state,
                        slot.column,
                        V.render(slot.expected),
                        "(not evaluated)",
                        False,
                    )
                )
        if c.instance_name in faults:
            verdict = "fault"
            fault_text = faults[c.instance_name].fault.describe()
        elif done and all(a.passed for a in assertions):
            verdict = "pass"
            fault_text = None
        else:
            verdict = "fail"
            fault_text = None
        case_results.append(CaseResult(c.name, verdict, assertions, fault_text))

    assertions_total = checked_suite.assertion_count()
    assertions_passed = sum(c.passed_count() for c in case_results)
    pct = cov.round_pct(assertions_passed, assertions_total) if assertions_total else None

    report = TestReport(
        unit=checked_suite.fb_under_test,
        cases=case_results,
        cases_total=len(checked_suite.cases),
        assertions_total=assertions_total,
        assertions_passed=assertions_passed,
        assertion_success_pct=pct,
        statement_coverage_pct=summary.unit.percentage,
        coverage=summary,
        cycles_executed=result.cycles_executed,
        cycle_time_ms=options.cycle_time_ms,
        mode=options.mode,
        provider=options.provider,
        warnings=tuple(options.warnings),
        generated_at=None
        if options.fixed_clock
        else datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )

    if options.out_dir is not None:
        try:
            _write_artifacts(report, bundle, cmap, monitor_lines, options)
        except OSError as exc:
            raise PipelineError("report", exc) from exc
    return report


def _write_artifacts(
    report: TestReport,
    bundle: HarnessBundle,
    cmap: cov.CoverageMap,
    monitor_lines: list[str],
    options: RunOptions,
) -> None:
    out = options.out_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "harness.st").write_text(bundle.source.text, encoding="utf-8")
    (out / "coverage.lcov").write_text(
        cov.render_lcov(cmap, bundle.typed, bundle.source), encoding="utf-8"
    )
    (out / "coverage.annotated.txt").write_text(
        cov.render_annotated(cmap, bundle.typed, bundle.source), encoding="utf-8"
    )
    (out / "monitor.txt").write_text("\n".join(monitor_lines) + "\n", encoding="utf-8")
    report.artifacts = {
        "report_json": "report.json",
        "report_txt": "report.txt",
        "coverage_lcov": "coverage.lcov",
        "coverage_annotated": "coverage.annotated.txt",
        "harness": "harness.st",
        "monitor": "monitor.txt",
        "suite": "suite.csv",
    }
    (out / "report.json").write_text(render_report(report, "json"), encoding="utf-8")
    (out / "report.txt").write_text(render_report(report, "text"), encoding="utf-8")


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def _fmt_pct(pct: float | None) -> str:
    return "n/a" if pct is None else f"{pct:.2f}%"


def render_report(report: TestReport, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")

    name_w = max([len(c.name) for c in report.cases] + [len("case")])
    lines = [f"unit under test: {report.unit}"]
    lines.append("")
    lines.append(f"{'case':<{name_w}}  verdict  assertions")
    lines.append("-" * (name_w + 21))
    for c in report.cases:
        lines.append(f"{c.name:<{name_w}}  {c.verdict:<7}  {c.passed_count()}/{len(c.assertions)}")
    lines.append("-" * (name_w + 21))
    lines.append(
        f"cases: {report.cases_total}   "
        f"assertions: {report.assertions_passed}/{report.assertions_total} "
        f"({_fmt_pct(report.assertion_success_pct)})   "
        f"statement coverage: {report.statement_coverage_pct:.2f}%"
    )
    failures = [
        (c, a)
        for c in report.cases
        for a in c.assertions
        if not a.passed
    ]
    if failures:
        lines.append("")
        lines.append("failed assertions:")
        for c, a in failures:
            lines.append(f"  {c.name} state {a.state} {a.variable}: expected {a.expected}, actual {a.actual}")
    faults = [c for c in report.cases if c.verdict == "fault"]
    if faults:
        lines.append("")
        lines.append("faults:")
        for c in faults:
            lines.append(f"  {c.name}: {c.fault}")
    lines.append("")
    lines.append(
        f"executed {report.cycles_executed} cycles at {report.cycle_time_ms} ms"
        + (f"   mode: {report.mode}" if report.mode else "")
        + (f"   provider: {report.provider}" if report.provider else "")
    )
    return "\n".join(lines) + "\n"
