"""Evaluation of built-in standard functions and X_TO_Y conversions.

Float domain edge cases follow IEEE (LN(0) is -inf, SQRT(-1) is nan, like
the C functions a transpiling toolchain would call).  Explicit narrowing
conversions whose value does not fit the target range raise, which the
interpreter turns into a runtime fault at the active statement.
"""

from __future__ import annotations

import math

from ..frontend import types as T
from ..frontend.types import Kind, STType
from . import values as V


class BuiltinFuncError(Exception):
    """Raised for faults inside built-in functions (conversion overflow,
    bad substring arguments, negative shift counts)."""


def _conv_overflow(name: str, value) -> BuiltinFuncError:
    return BuiltinFuncError(f"{name}: value {value} out of range")


def _to_int_kind(name: str, raw: int, kind: Kind) -> int:
    lo, hi = T.INT_RANGES[kind]
    if not (lo <= raw <= hi):
        raise _conv_overflow(name, raw)
    return raw


def call_builtin(name: str, args: list[V.Value], result_ty: STType) -> V.Value:
    """Evaluate a built-in by name; args are already type-checked."""
    conv = _try_conversion(name, args)
    if conv is not None:
        return conv

    vals = [a.v for a in args]

    if name == "ABS":
        return V.make(result_ty, -vals[0] if vals[0] < 0 else vals[0])
    if name == "MIN":
        return V.make(result_ty, min(vals[0], vals[1]))
    if name == "MAX":
        return V.make(result_ty, max(vals[0], vals[1]))
    if name == "LIMIT":
        mn, in_v, mx = vals
        return V.make(result_ty, min(max(in_v, mn), mx))
    if name == "SEL":
        return V.make(result_ty, vals[2] if vals[0] else vals[1])
    if name in ("SIN", "COS", "TAN"):
        f = {"SIN": math.sin, "COS": math.cos, "TAN": math.tan}[name]
        return V.make(result_ty, f(vals[0]))
    if name == "EXP":
        try:
            return V.make(result_ty, math.exp(vals[0]))
        except OverflowError:
            return V.make(result_ty, math.inf)
    if name == "LN":
        x = vals[0]
        if x > 0:
            return V.make(result_ty, math.log(x))
        return V.make(result_ty, -math.inf if x == 0 else math.nan)
    if name == "SQRT":
        x = vals[0]
        return V.make(result_ty, math.sqrt(x) if x >= 0 else math.nan)
    if name == "TRUNC":
        x = vals[0]
        if math.isnan(x) or math.isinf(x):
            raise _conv_overflow(name, x)
        raw = math.trunc(x)
        return V.make(result_ty, _to_int_kind(name, raw, Kind.DINT))
    if name in ("SHL", "SHR"):
        n = vals[1]
        if n < 0:
            raise BuiltinFuncError(f"{name}: negative shift count {n}")
        width = 8 if args[0].ty.kind is Kind.BYTE else 16
        if n >= width:
            return V.make(result_ty, 0)
        raw = vals[0] << n if name == "SHL" else vals[0] >> n
        return V.make(result_ty, raw)
    if name == "CONCAT":
        return V.make(result_ty, "".join(vals))
    if name == "LEN":
        return V.make(result_ty, len(vals[0]))
    if name == "MID":
        s, length, pos = vals
        if length < 0 or pos < 1:
            raise BuiltinFuncError(f"MID: invalid range L={length} P={pos}")
        return V.make(result_ty, s[pos - 1 : pos - 1 + length])
    raise TypeError(f"unknown builtin {name}")  # pragma: no cover


def _try_conversion(name: str, args: list[V.Value]) -> V.Value | None:
    from ..frontend import builtins as bi

    str_src = bi.string_conversion_source(name)
    if str_src is not None:
        return V.make(T.string(), _render_for_string(args[0]))
    conv = bi.conversion_target(name)
    if conv is None:
        return None
    _src, dst = conv
    raw = args[0].v
    k = dst.kind

    if k is Kind.BOOL:
        return V.Value(T.BOOL, raw != 0)
    if k in T.INT_RANGES:
        if isinstance(raw, bool):
            return V.make(dst, 1 if raw else 0)
        if isinstance(raw, float):
            if math.isnan(raw) or math.isinf(raw):
                raise _conv_overflow(name, raw)
            raw = round(raw)  # IEC rounding: nearest, ties to even
        return V.make(dst, _to_int_kind(name, int(raw), k))
    if k in (Kind.REAL, Kind.LREAL):
        return V.make(dst, float(raw))
    if k is Kind.TIME:
        if raw < 0:
            raise BuiltinFuncError(f"{name}: negative duration {raw}")
        return V.make(dst, int(raw))
    raise TypeError(f"unsupported conversion {name}")  # pragma: no cover


def _render_for_string(val: V.Value) -> str:
    k = val.ty.kind
    if k is Kind.BOOL:
        return "TRUE" if val.v else "FALSE"
    if k is Kind.TIME:
        return f"T#{val.v}ms"
    if k in (Kind.REAL, Kind.LREAL):
        return repr(float(val.v))
    return str(val.v)
