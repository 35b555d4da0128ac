"""Cyclic scan interpreter with retained FB state and a simulated clock.

One scan runs a POU body exactly once.  The clock is frozen during a scan
(every timer invoked in a scan sees the same `now`) and advances by the
configured cycle time after the scan completes.  Execution appends each
executed statement id to an ExecTrace; guard sites (IF/ELSIF conditions,
CASE selectors, loop headers) count once per evaluation.

Monitoring: run_program emits one line per scan in the fixed format

    cycle=<n> t=<ms> events=[<e1>;<e2>]

where events report harness hook activity: `TC_<i>_FAILS=<n>` when a
case's failure counter increases, `TC_<i>_DONE=PASS|FAIL` when its done
flag rises, and `FAULT=<instance>@<sid>` when a quarantined instance is
stopped by a contained fault.  Cycle indices are 0-based.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import math

from ..frontend import nodes as N
from ..frontend import types as T
from ..frontend.builtins import BUILTIN_FBS as _BUILTIN_TABLE
from ..frontend.nodes import PouKind, Section
from ..frontend.resolve import PouInfo, TypedProgram
from ..frontend.source import Span
from . import values as V
from .stdfb import BuiltinInstance, make_builtin
from .stdfuncs import BuiltinFuncError, call_builtin

_BUILTIN_NAMES = frozenset(_BUILTIN_TABLE)

_SCAN_SITE_BUDGET = 1_000_000
_MAX_CALL_DEPTH = 64


class UnknownPou(Exception):
    pass


class RuntimeFault(Exception):
    """A fault raised during a scan, attributed to a statement site."""

    def __init__(
        self,
        message: str,
        pou: str = "?",
        sid: int | None = None,
        span: Span | None = None,
        instance_path: str = "",
        cycle: int | None = None,
    ):
        self.message = message
        self.pou = pou
        self.sid = sid
        self.span = span
        self.instance_path = instance_path
        self.cycle = cycle
        super().__init__(self.describe())

    def describe(self) -> str:
        where = f"{self.pou}#{self.sid}" if self.sid is not None else self.pou
        at = f" at cycle {self.cycle}" if self.cycle is not None else ""
        path = f" in {self.instance_path}" if self.instance_path else ""
        return f"{self.message} ({where}){path}{at}"


@dataclass
class SimClock:
    """Simulated wall clock; advances only between scans."""

    now: int = 0
    cycle_time: int = 10

    def advance(self) -> None:
        self.now += self.cycle_time


class ExecTrace:
    """Ordered (pou, statement-id) pairs executed during one scan."""

    __slots__ = ("entries",)

    def __init__(self):
        self.entries: list[tuple[str, int]] = []

    def add(self, pou: str, sid: int) -> None:
        self.entries.append((pou, sid))

    def sids_for(self, pou: str) -> list[int]:
        return [sid for p, sid in self.entries if p == pou]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def _initial_store(info: PouInfo) -> dict[str, V.Value]:
    store: dict[str, V.Value] = {}
    for var in info.vars.values():
        if var.init is None:
            store[var.name] = V.default(var.ty)
        elif var.ty.kind is T.Kind.ARRAY:
            store[var.name] = V.Value(var.ty, [V.make(var.ty.elem, x) for x in var.init])
        else:
            store[var.name] = V.make(var.ty, var.init)
    return store


class FbInstance:
    """Retained state of one function block (or program) instance."""

    kind = "user"

    def __init__(self, prog: TypedProgram, info: PouInfo):
        self.prog = prog
        self.info = info
        self.fb_type = info.name
        self.store: dict[str, V.Value] = _initial_store(info)
        self.nested: dict[str, FbInstance | BuiltinInstance] = {}

    def outputs(self) -> dict[str, V.Value]:
        return {
            v.name: self.store[v.name]
            for v in self.info.vars.values()
            if v.section is Section.OUTPUT
        }


def instantiate(prog: TypedProgram, fb_name: str) -> FbInstance:
    """Create a fresh instance of a function block (or program) with all
    variables at their declared initial values and nested FBs idle."""
    return _instantiate(prog, fb_name.upper(), ())


def _instantiate(prog: TypedProgram, fb_name: str, path: tuple[str, ...]) -> FbInstance:
    info = prog.lookup_pou(fb_name)
    if info is None or info.kind is PouKind.FUNCTION:
        raise UnknownPou(f"no function block or program named {fb_name}")
    if fb_name in path:
        raise UnknownPou(f"recursive instantiation of {fb_name}")
    inst = FbInstance(prog, info)
    for var_name, fb_type in info.fb_instances.items():
        if fb_type in _BUILTIN_NAMES:
            user = prog.lookup_pou(fb_type)
            # user declarations shadow the built-in blocks
            if user is None or user.kind is not PouKind.FUNCTION_BLOCK:
                inst.nested[var_name] = make_builtin(fb_type)
                continue
        inst.nested[var_name] = _instantiate(prog, fb_type, path + (fb_name,))
    return inst


# ---------------------------------------------------------------------------
# Executor
# ---------------------------------------------------------------------------

class _ExitLoop(Exception):
    pass


class _ReturnPou(Exception):
    pass


@dataclass
class ContainedFault:
    instance: str
    fault: RuntimeFault
    cycle: int


class _FunctionFrame:
    """Transient store for one user-function invocation."""

    def __init__(self, prog: TypedProgram, info: PouInfo):
        self.prog = prog
        self.info = info
        self.fb_type = info.name
        self.nested: dict = {}
        self.store = _initial_store(info)


class Executor:
    """Runs scans over instances of one resolved program (plus libraries)."""

    def __init__(self, prog: TypedProgram):
        self.prog = prog
        self.trace: ExecTrace | None = None
        self.now = 0
        self.budget = 0
        self.depth = 0
        # active site for fault attribution
        self._pou = "?"
        self._sid: int | None = None
        self._span: Span | None = None
        self._path = ""
        # containment (run_program only)
        self.quarantine: frozenset[str] = frozenset()
        self.dead: set[str] = set()
        self.contained: list[ContainedFault] = []
        self._cycle: int | None = None

    # -- fault helpers -------------------------------------------------------

    def fault(self, message: str) -> RuntimeFault:
        return RuntimeFault(
            message,
            pou=self._pou,
            sid=self._sid,
            span=self._span,
            instance_path=self._path,
            cycle=self._cycle,
        )

    def _hit(self, kind: str, node, pou: str) -> None:
        sid = N.site_sid(kind, node)
        self.trace.add(pou, sid)
        self._pou = pou
        self._sid = sid
        self._span = N.site_span(kind, node)
        self.budget -= 1
        if self.budget <= 0:
            raise self.fault("scan statement budget exceeded (possible unbounded loop)")

    # -- scans ----------------------------------------------------------------

    def run_scan(self, inst: FbInstance, now: int, trace: ExecTrace, path: str = "") -> None:
        self.now = now
        self.trace = trace
        self.budget = _SCAN_SITE_BUDGET
        self.depth = 0
        self._reset_temps(inst)
        try:
            self.exec_body(inst.info.decl.body, inst, path or inst.fb_type)
        except _ReturnPou:
            pass

    def _reset_temps(self, inst) -> None:
        for var in inst.info.vars.values():
            if var.section is Section.TEMP:
                inst.store[var.name] = V.default(var.ty)

    # -- statements -------------------------------------------------------------

    def exec_body(self, body: list[N.Stmt], inst, path: str) -> None:
        for st in body:
            self.exec_stmt(st, inst, path)

    def exec_stmt(self, st: N.Stmt, inst, path: str) -> None:
        pou = inst.info.name
        if isinstance(st, N.Assign):
            self._hit("stmt", st, pou)
            val = self.eval(st.value, inst, path)
            self.assign(st.target, val, inst, path)
        elif isinstance(st, N.FbCall):
            self._hit("stmt", st, pou)
            self.exec_fb_call(st, inst, path)
        elif isinstance(st, N.ExitStmt):
            self._hit("stmt", st, pou)
            raise _ExitLoop()
        elif isinstance(st, N.ReturnStmt):
            self._hit("stmt", st, pou)
            raise _ReturnPou()
        elif isinstance(st, N.IfStmt):
            for br in st.branches:
                self._hit("guard", br, pou)
                if self.eval(br.cond, inst, path).v:
                    self.exec_body(br.body, inst, path)
                    return
            self.exec_body(st.else_body, inst, path)
        elif isinstance(st, N.CaseStmt):
            self._hit("selector", st, pou)
            sel = self.eval(st.selector, inst, path).v
            for br in st.branches:
                if any(lab.lo <= sel <= lab.hi for lab in br.labels):
                    self.exec_body(br.body, inst, path)
                    return
            self.exec_body(st.else_body, inst, path)  # no match, no ELSE: no-op
        elif isinstance(st, N.ForStmt):
            self._hit("header", st, pou)
            self.exec_for(st, inst, path)
        elif isinstance(st, N.WhileStmt):
            while True:
                self._hit("cond", st, pou)
                if not self.eval(st.cond, inst, path).v:
                    return
                try:
                    self.exec_body(st.body, inst, path)
                except _ExitLoop:
                    return
        elif isinstance(st, N.RepeatStmt):
            while True:
                try:
                    self.exec_body(st.body, inst, path)
                except _ExitLoop:
                    return
                self._hit("until", st, pou)
                if self.eval(st.until, inst, path).v:
                    return
        else:  # pragma: no cover
            raise TypeError(f"unhandled statement {st!r}")

    def exec_for(self, st: N.ForStmt, inst, path: str) -> None:
        var_ty = inst.info.vars[st.var].ty
        start = self.eval(st.start, inst, path)
        stop = self.eval(st.stop, inst, path)
        step = self.eval(st.step, inst, path).v if st.step is not None else 1
        if step == 0:
            raise self.fault("FOR step is zero")
        cur = V.convert_for_store(start, var_ty).v
        limit = stop.v
        while (cur <= limit) if step > 0 else (cur >= limit):
            inst.store[st.var] = V.make(var_ty, cur)
            try:
                self.exec_body(st.body, inst, path)
            except _ExitLoop:
                return
            cur = V.wrap_int(inst.store[st.var].v + step, var_ty.kind)
            self.budget -= 1
            if self.budget <= 0:
                raise self.fault("scan statement budget exceeded (possible unbounded loop)")

    def exec_fb_call(self, st: N.FbCall, inst, path: str) -> None:
        callee = inst.nested[st.instance]
        callee_path = f"{path}.{st.instance}"
        if isinstance(callee, BuiltinInstance):
            iface = _BUILTIN_TABLE[callee.fb_type]
            for p in st.params:
                if not p.is_output:
                    val = self.eval(p.expr, inst, path)
                    callee.store[p.name] = V.convert_for_store(val, iface[p.name][0])
            callee.step(self.now)
            for p in st.params:
                if p.is_output:
                    self.assign(p.expr, callee.store[p.name], inst, path)
            return

        # user FB: write inputs, run its body once, read outputs
        info = callee.info
        inout_backcopy: list[tuple[N.Expr, str]] = []
        for p in st.params:
            if p.is_output:
                continue
            slot = info.vars[p.name]
            val = self.eval(p.expr, inst, path)
            callee.store[p.name] = V.convert_for_store(val, slot.ty)
            if slot.section is Section.IN_OUT:
                inout_backcopy.append((p.expr, p.name))
        self._reset_temps(callee)
        outer = (self._pou, self._sid, self._span)
        self.depth += 1
        if self.depth > _MAX_CALL_DEPTH:
            raise self.fault("call depth exceeded")
        try:
            self.exec_body(info.decl.body, callee, callee_path)
        except _ReturnPou:
            pass
        finally:
            self.depth -= 1
        self._pou, self._sid, self._span = outer
        for target, name in inout_backcopy:
            self.assign(target, callee.store[name], inst, path)
        for p in st.params:
            if p.is_output:
                self.assign(p.expr, callee.store[p.name], inst, path)

    # -- lvalues -------------------------------------------------------------

    def assign(self, target: N.Expr, val: V.Value, inst, path: str) -> None:
        if isinstance(target, N.VarRef):
            slot_ty = inst.info.vars[target.name].ty
            inst.store[target.name] = V.convert_for_store(val, slot_ty)
            return
        if isinstance(target, N.IndexRef):
            name = target.base.name
            arr = inst.store[name]
            ty = arr.ty
            idx = self.eval(target.index, inst, path).v
            if not (ty.lo <= idx <= ty.hi):
                raise self.fault(f"array index {idx} outside {ty.lo}..{ty.hi}")
            items = list(arr.v)
            items[idx - ty.lo] = V.convert_for_store(val, ty.elem)
            inst.store[name] = V.Value(ty, items)
            return
        raise TypeError(f"invalid assignment target {target!r}")  # pragma: no cover

    # -- expressions -----------------------------------------------------------

    def eval(self, e: N.Expr, inst, path: str) -> V.Value:
        if isinstance(e, N.Literal):
            return V.make(e.ty, e.value)
        if isinstance(e, N.VarRef):
            return inst.store[e.name]
        if isinstance(e, N.MemberRef):
            nested = inst.nested[e.base.name]
            return nested.store[e.member]
        if isinstance(e, N.IndexRef):
            arr = inst.store[e.base.name]
            idx = self.eval(e.index, inst, path).v
            ty = arr.ty
            if not (ty.lo <= idx <= ty.hi):
                raise self.fault(f"array index {idx} outside {ty.lo}..{ty.hi}")
            return arr.v[idx - ty.lo]
        if isinstance(e, N.Unary):
            return self.eval_unary(e, inst, path)
        if isinstance(e, N.Binary):
            return self.eval_binary(e, inst, path)
        if isinstance(e, N.Call):
            return self.eval_call(e, inst, path)
        raise TypeError(f"unhandled expression {e!r}")  # pragma: no cover

    def eval_unary(self, e: N.Unary, inst, path: str) -> V.Value:
        val = self.eval(e.operand, inst, path)
        if e.op is N.UnOp.NOT:
            if e.ty.kind is T.Kind.BOOL:
                return V.Value(e.ty, not val.v)
            return V.make(e.ty, ~val.v)
        if e.op is N.UnOp.NEG:
            return V.make(e.ty, -val.v)
        return V.make(e.ty, val.v)

    def eval_binary(self, e: N.Binary, inst, path: str) -> V.Value:
        op = e.op
        lv = self.eval(e.left, inst, path)
        rv = self.eval(e.right, inst, path)
        a, b = lv.v, rv.v

        if op is N.BinOp.EQ:
            return V.Value(T.BOOL, a == b)
        if op is N.BinOp.NE:
            return V.Value(T.BOOL, a != b)
        if op is N.BinOp.LT:
            return V.Value(T.BOOL, a < b)
        if op is N.BinOp.LE:
            return V.Value(T.BOOL, a <= b)
        if op is N.BinOp.GT:
            return V.Value(T.BOOL, a > b)
        if op is N.BinOp.GE:
            return V.Value(T.BOOL, a >= b)

        if op in (N.BinOp.AND, N.BinOp.OR, N.BinOp.XOR):
            if e.ty.kind is T.Kind.BOOL:
                res = (a and b) if op is N.BinOp.AND else (a or b) if op is N.BinOp.OR else (a != b)
                return V.Value(T.BOOL, bool(res))
            res = (a & b) if op is N.BinOp.AND else (a | b) if op is N.BinOp.OR else (a ^ b)
            return V.make(e.ty, res)

        int_result = e.ty.kind in (T.Kind.INT, T.Kind.DINT, T.Kind.TIME)
        if op is N.BinOp.ADD:
            return V.make(e.ty, a + b)
        if op is N.BinOp.SUB:
            return V.make(e.ty, a - b)
        if op is N.BinOp.MUL:
            return V.make(e.ty, a * b)
        if op is N.BinOp.DIV:
            if int_result:
                if b == 0:
                    raise self.fault("division by zero")
                q = a // b
                if a % b != 0 and (a < 0) != (b < 0):
                    q += 1  # truncate toward zero
                return V.make(e.ty, q)
            if b == 0.0:
                if a == 0.0:
                    return V.make(e.ty, float("nan"))
                sign = math.copysign(1.0, a) * math.copysign(1.0, b)
                return V.make(e.ty, sign * float("inf"))
            return V.make(e.ty, a / b)
        if op is N.BinOp.MOD:
            if b == 0:
                raise self.fault("MOD by zero")
            q = a // b
            if a % b != 0 and (a < 0) != (b < 0):
                q += 1
            return V.make(e.ty, a - q * b)
        if op is N.BinOp.POW:
            try:
                return V.make(e.ty, float(a) ** float(b))
            except OverflowError:
                return V.make(e.ty, float("inf"))
            except (ValueError, ZeroDivisionError):
                return V.make(e.ty, float("nan"))
        raise TypeError(f"unhandled operator {op}")  # pragma: no cover

    def eval_call(self, e: N.Call, inst, path: str) -> V.Value:
        info = self.prog.lookup_pou(e.name)
        if info is not None and info.kind is PouKind.FUNCTION:
            return self.call_function(info, e, inst, path)
        args = [self.eval(a, inst, path) for a in e.args]
        try:
            return call_builtin(e.name, args, e.ty)
        except BuiltinFuncError as exc:
            raise self.fault(str(exc)) from exc

    def call_function(self, info: PouInfo, e: N.Call, inst, path: str) -> V.Value:
        self.depth += 1
        if self.depth > _MAX_CALL_DEPTH:
            raise self.fault("call depth exceeded")
        try:
            frame = _FunctionFrame(self.prog, info)
            params = [v for v in info.vars.values() if v.section is Section.INPUT]
            for param, arg in zip(params, e.args):
                frame.store[param.name] = V.convert_for_store(self.eval(arg, inst, path), param.ty)
            outer = (self._pou, self._sid, self._span)
            try:
                self.exec_body(info.decl.body, frame, f"{path}/{info.name}()")
            except _ReturnPou:
                pass
            self._pou, self._sid, self._span = outer
            return frame.store[info.name]
        finally:
            self.depth -= 1


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------

def execute_cycle(
    inst: FbInstance,
    inputs: dict[str, V.Value],
    clock: SimClock,
) -> tuple[dict[str, V.Value], ExecTrace]:
    """Apply inputs, run one scan, snapshot outputs, then advance the clock.

    Retained variables persist in `inst` between calls.  Raises ValueError
    for undeclared input names or un-assignable input types (precondition
    violations, not runtime faults).
    """
    for name, val in inputs.items():
        var = inst.info.vars.get(name.upper())
        if var is None or var.section is not Section.INPUT:
            raise ValueError(f"{inst.fb_type} has no input {name}")
        try:
            inst.store[var.name] = V.convert_for_store(val, var.ty)
        except TypeError as exc:
            raise ValueError(f"input {name}: {exc}") from exc
    trace = ExecTrace()
    executor = Executor(inst.prog)
    executor.run_scan(inst, clock.now, trace)
    outputs = inst.outputs()
    clock.advance()
    return outputs, trace


@dataclass
class RunResult:
    instance: FbInstance
    traces: list[ExecTrace]
    records: list[str]
    faults: list[ContainedFault]
    cycles_executed: int
    final_time: int = 0


_HOOK_RE = re.compile(r"^TC_(\d+)_(DONE|PASS|FAILS)$")


def _hook_snapshot(store: dict[str, V.Value]) -> dict[int, tuple[bool, bool, int]]:
    cases: dict[int, dict[str, object]] = {}
    for name, val in store.items():
        m = _HOOK_RE.match(name)
        if m:
            cases.setdefault(int(m.group(1)), {})[m.group(2)] = val.v
    return {
        i: (bool(d.get("DONE", False)), bool(d.get("PASS", False)), int(d.get("FAILS", 0)))
        for i, d in cases.items()
    }


def run_program(
    prog: TypedProgram,
    program_name: str,
    cycles: int,
    clock: SimClock,
    monitor: Callable[[str], None] | None = None,
    stop_when: Callable[[dict[str, V.Value], frozenset[str]], bool] | None = None,
    quarantine: frozenset[str] | set[str] = frozenset(),
) -> RunResult:
    """Run a PROGRAM POU for up to `cycles` scans, one monitor record each.

    Faults raised inside quarantined instances (by store name in the
    program) stop only that instance; everything else keeps running.
    Faults outside quarantined scopes propagate with the cycle attached.
    """
    info = prog.lookup_pou(program_name.upper())
    if info is None or info.kind is not PouKind.PROGRAM:
        raise UnknownPou(f"no program named {program_name}")
    inst = instantiate(prog, program_name)
    executor = Executor(prog)
    executor.quarantine = frozenset(quarantine)

    traces: list[ExecTrace] = []
    records: list[str] = []
    prev_hooks = _hook_snapshot(inst.store)
    cycles_executed = 0

    for cycle in range(cycles):
        trace = ExecTrace()
        executor._cycle = cycle
        executor.trace = trace
        executor.budget = _SCAN_SITE_BUDGET
        executor.depth = 0
        executor.now = clock.now
        executor._reset_temps(inst)
        faults_before = len(executor.contained)
        try:
            _run_program_body(executor, inst, cycle)
        except RuntimeFault as fault:
            fault.cycle = cycle
            raise
        traces.append(trace)

        events: list[str] = []
        for contained in executor.contained[faults_before:]:
            events.append(f"FAULT={contained.instance}@{contained.fault.sid}")
        hooks = _hook_snapshot(inst.store)
        for i in sorted(hooks):
            done, passed, fails = hooks[i]
            pdone, _ppassed, pfails = prev_hooks.get(i, (False, False, 0))
            if fails > pfails:
                events.append(f"TC_{i}_FAILS={fails}")
            if done and not pdone:
                events.append(f"TC_{i}_DONE={'PASS' if passed else 'FAIL'}")
        prev_hooks = hooks

        record = f"cycle={cycle} t={clock.now} events=[{';'.join(events)}]"
        records.append(record)
        if monitor is not None:
            monitor(record)

        clock.advance()
        cycles_executed = cycle + 1
        if stop_when is not None and stop_when(inst.store, frozenset(executor.dead)):
            break

    return RunResult(inst, traces, records, executor.contained, cycles_executed, clock.now)


def _run_program_body(executor: Executor, inst: FbInstance, cycle: int) -> None:
    """Program body scan with per-statement containment for quarantined calls."""
    path = inst.fb_type
    try:
        for st in inst.info.decl.body:
            if (
                isinstance(st, N.FbCall)
                and st.instance in executor.quarantine
            ):
                if st.instance in executor.dead:
                    continue
                try:
                    executor.exec_stmt(st, inst, path)
                except RuntimeFault as fault:
                    executor.dead.add(st.instance)
                    executor.contained.append(ContainedFault(st.instance, fault, cycle))
                continue
            executor.exec_stmt(st, inst, path)
    except _ReturnPou:
        pass
