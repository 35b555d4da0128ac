"""Runtime values: a tagged union with exact-width integer semantics.

INT/DINT wrap two's-complement at 16/32 bits, BYTE/WORD wrap unsigned at
8/16 bits, REAL arithmetic is rounded to binary32 after every operation,
TIME is a signed millisecond count, STRING is truncated to its capacity.
Wrapping (not faulting) on integer overflow matches what C-transpiled PLC
code does and is what makes width-dependent bugs observable.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

from ..frontend import types as T
from ..frontend.types import Kind, STType

_F32_MAX = 3.4028234663852886e38


def f32(x: float) -> float:
    """Round a python float to the nearest binary32 value."""
    if math.isnan(x) or math.isinf(x):
        return x
    if x > _F32_MAX:
        return math.inf
    if x < -_F32_MAX:
        return -math.inf
    return struct.unpack("<f", struct.pack("<f", x))[0]


def wrap_int(v: int, kind: Kind) -> int:
    if kind is Kind.INT:
        return ((v + 0x8000) & 0xFFFF) - 0x8000
    if kind is Kind.DINT:
        return ((v + 0x8000_0000) & 0xFFFF_FFFF) - 0x8000_0000
    if kind is Kind.BYTE:
        return v & 0xFF
    if kind is Kind.WORD:
        return v & 0xFFFF
    raise TypeError(f"not an integer kind: {kind}")


@dataclass(frozen=True)
class Value:
    ty: STType
    v: object

    def __repr__(self) -> str:
        return f"Value({self.ty}, {self.v!r})"


def make(ty: STType, raw) -> Value:
    """Coerce a plain python value into a Value of the given type."""
    k = ty.kind
    if k is Kind.BOOL:
        return Value(ty, bool(raw))
    if k in T.INT_RANGES:
        return Value(ty, wrap_int(int(raw), k))
    if k is Kind.REAL:
        return Value(ty, f32(float(raw)))
    if k is Kind.LREAL:
        return Value(ty, float(raw))
    if k is Kind.TIME:
        return Value(ty, int(raw))
    if k is Kind.STRING:
        return Value(ty, str(raw)[: ty.cap])
    raise TypeError(f"cannot build scalar value of {ty}")


def default(ty: STType) -> Value:
    k = ty.kind
    if k is Kind.BOOL:
        return Value(ty, False)
    if k in T.INT_RANGES:
        return Value(ty, 0)
    if k in (Kind.REAL, Kind.LREAL):
        return Value(ty, 0.0)
    if k is Kind.TIME:
        return Value(ty, 0)
    if k is Kind.STRING:
        return Value(ty, "")
    if k is Kind.ARRAY:
        return Value(ty, [default(ty.elem) for _ in range(ty.hi - ty.lo + 1)])
    raise TypeError(f"no default for {ty}")


def convert_for_store(val: Value, dst: STType) -> Value:
    """Implicit widening (or string truncation) when storing into a slot."""
    if val.ty == dst:
        return val
    if val.ty.kind is Kind.ARRAY or dst.kind is Kind.ARRAY:
        if val.ty == dst:
            return val
        raise TypeError(f"cannot store {val.ty} into {dst}")
    if val.ty.kind is dst.kind or (val.ty.kind, dst.kind) in T.WIDENS:
        return make(dst, val.v)
    raise TypeError(f"cannot store {val.ty} into {dst}")


def render(val: Value) -> str:
    """Stable human-readable rendering used in reports and monitor events."""
    k = val.ty.kind
    if k is Kind.BOOL:
        return "TRUE" if val.v else "FALSE"
    if k in (Kind.INT, Kind.DINT, Kind.BYTE, Kind.WORD):
        return str(val.v)
    if k in (Kind.REAL, Kind.LREAL):
        return repr(float(val.v))
    if k is Kind.TIME:
        return f"T#{val.v}ms"
    if k is Kind.STRING:
        return f"'{val.v}'"
    return f"[{', '.join(render(x) for x in val.v)}]"
