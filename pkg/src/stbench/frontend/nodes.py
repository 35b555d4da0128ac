"""AST node definitions.

Spans, statement ids and resolved types are carried on the nodes but are
excluded from equality, so two parses of equivalent source compare equal
structurally.  Statement ids are dense 0-based over a compilation unit and
are assigned by the parser after a successful parse; branch-guard sites
(IF/ELSIF guards, CASE selectors, loop headers) get their own ids, mirroring
line-oriented coverage tools at AST level.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .source import Span, SourceUnit
from .types import STType

_NO_SID = -1


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class Expr:
    pass


@dataclass
class Literal(Expr):
    class K(enum.Enum):
        BOOL = "BOOL"
        INT = "INT"
        REAL = "REAL"
        TIME = "TIME"
        STRING = "STRING"

    lit_kind: K
    value: object
    span: Span = field(compare=False, default=Span(0, 0))
    ty: STType | None = field(compare=False, default=None)


@dataclass
class VarRef(Expr):
    name: str  # normalized upper-case
    span: Span = field(compare=False, default=Span(0, 0))
    ty: STType | None = field(compare=False, default=None)


@dataclass
class MemberRef(Expr):
    base: Expr
    member: str
    span: Span = field(compare=False, default=Span(0, 0))
    ty: STType | None = field(compare=False, default=None)


@dataclass
class IndexRef(Expr):
    base: Expr
    index: Expr
    span: Span = field(compare=False, default=Span(0, 0))
    ty: STType | None = field(compare=False, default=None)


class UnOp(enum.Enum):
    NEG = "-"
    PLUS = "+"
    NOT = "NOT"


class BinOp(enum.Enum):
    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"
    MOD = "MOD"
    POW = "**"
    AND = "AND"
    OR = "OR"
    XOR = "XOR"
    EQ = "="
    NE = "<>"
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="


@dataclass
class Unary(Expr):
    op: UnOp
    operand: Expr
    span: Span = field(compare=False, default=Span(0, 0))
    ty: STType | None = field(compare=False, default=None)


@dataclass
class Binary(Expr):
    op: BinOp
    left: Expr
    right: Expr
    span: Span = field(compare=False, default=Span(0, 0))
    ty: STType | None = field(compare=False, default=None)


@dataclass
class Call(Expr):
    name: str  # normalized upper-case function name
    args: list[Expr]
    span: Span = field(compare=False, default=Span(0, 0))
    ty: STType | None = field(compare=False, default=None)


# ---------------------------------------------------------------------------
# Statements
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class Stmt:
    pass


@dataclass
class Assign(Stmt):
    target: Expr
    value: Expr
    span: Span = field(compare=False, default=Span(0, 0))
    sid: int = field(compare=False, default=_NO_SID)


@dataclass
class IfBranch:
    cond: Expr
    body: list[Stmt]
    span: Span = field(compare=False, default=Span(0, 0))
    guard_sid: int = field(compare=False, default=_NO_SID)


@dataclass
class IfStmt(Stmt):
    branches: list[IfBranch]
    else_body: list[Stmt]
    span: Span = field(compare=False, default=Span(0, 0))


@dataclass
class CaseLabel:
    lo: int
    hi: int  # == lo for single-value labels


@dataclass
class CaseBranch:
    labels: list[CaseLabel]
    body: list[Stmt]
    span: Span = field(compare=False, default=Span(0, 0))


@dataclass
class CaseStmt(Stmt):
    selector: Expr
    branches: list[CaseBranch]
    else_body: list[Stmt]
    span: Span = field(compare=False, default=Span(0, 0))
    selector_sid: int = field(compare=False, default=_NO_SID)


@dataclass
class ForStmt(Stmt):
    var: str
    start: Expr
    stop: Expr
    step: Expr | None
    body: list[Stmt]
    span: Span = field(compare=False, default=Span(0, 0))
    header_sid: int = field(compare=False, default=_NO_SID)


@dataclass
class WhileStmt(Stmt):
    cond: Expr
    body: list[Stmt]
    span: Span = field(compare=False, default=Span(0, 0))
    cond_sid: int = field(compare=False, default=_NO_SID)


@dataclass
class RepeatStmt(Stmt):
    body: list[Stmt]
    until: Expr
    span: Span = field(compare=False, default=Span(0, 0))
    until_sid: int = field(compare=False, default=_NO_SID)


@dataclass
class ExitStmt(Stmt):
    span: Span = field(compare=False, default=Span(0, 0))
    sid: int = field(compare=False, default=_NO_SID)


@dataclass
class ReturnStmt(Stmt):
    span: Span = field(compare=False, default=Span(0, 0))
    sid: int = field(compare=False, default=_NO_SID)


@dataclass
class ParamBind:
    name: str            # formal parameter, upper-cased
    is_output: bool      # True for `Q => target`
    expr: Expr           # value expression, or assignment target for outputs
    span: Span = field(compare=False, default=Span(0, 0))


@dataclass
class FbCall(Stmt):
    instance: str        # instance variable name, upper-cased
    params: list[ParamBind]
    span: Span = field(compare=False, default=Span(0, 0))
    sid: int = field(compare=False, default=_NO_SID)


# ---------------------------------------------------------------------------
# Declarations
# ---------------------------------------------------------------------------

class Section(enum.Enum):
    INPUT = "VAR_INPUT"
    OUTPUT = "VAR_OUTPUT"
    IN_OUT = "VAR_IN_OUT"
    LOCAL = "VAR"
    TEMP = "VAR_TEMP"


@dataclass
class TypeRef:
    """Unresolved type reference as written in a declaration."""

    name: str                       # "INT", "STRING", "MY_FB", or "ARRAY"
    string_cap: int | None = None
    array_lo: int | None = None
    array_hi: int | None = None
    array_elem: "TypeRef | None" = None
    span: Span = field(compare=False, default=Span(0, 0))


@dataclass
class VarDecl:
    name: str
    type_ref: TypeRef
    init: Literal | list[Literal] | None
    section: Section
    span: Span = field(compare=False, default=Span(0, 0))


class PouKind(enum.Enum):
    FUNCTION_BLOCK = "FUNCTION_BLOCK"
    FUNCTION = "FUNCTION"
    PROGRAM = "PROGRAM"


@dataclass
class PouDecl:
    kind: PouKind
    name: str
    ret_type: TypeRef | None      # functions only
    decls: list[VarDecl]
    body: list[Stmt]
    span: Span = field(compare=False, default=Span(0, 0))


@dataclass
class Ast:
    pous: list[PouDecl]
    src: SourceUnit = field(compare=False, default=None)
    statement_count: int = field(compare=False, default=0)


# ---------------------------------------------------------------------------
# Walking helpers
# ---------------------------------------------------------------------------

def iter_sites(body: list[Stmt]):
    """Yield (kind, node) for every id site in source order.

    kind is one of 'stmt', 'guard', 'selector', 'header', 'cond', 'until';
    the numbering pass and the coverage renderers share this walk.
    """
    for st in body:
        if isinstance(st, (Assign, FbCall, ExitStmt, ReturnStmt)):
            yield "stmt", st
        elif isinstance(st, IfStmt):
            for br in st.branches:
                yield "guard", br
                yield from iter_sites(br.body)
            yield from iter_sites(st.else_body)
        elif isinstance(st, CaseStmt):
            yield "selector", st
            for br in st.branches:
                yield from iter_sites(br.body)
            yield from iter_sites(st.else_body)
        elif isinstance(st, ForStmt):
            yield "header", st
            yield from iter_sites(st.body)
        elif isinstance(st, WhileStmt):
            yield "cond", st
            yield from iter_sites(st.body)
        elif isinstance(st, RepeatStmt):
            yield from iter_sites(st.body)
            yield "until", st
        else:  # pragma: no cover - parser emits no other statement kinds
            raise TypeError(f"unknown statement {st!r}")


_SID_ATTR = {
    "stmt": "sid",
    "guard": "guard_sid",
    "selector": "selector_sid",
    "header": "header_sid",
    "cond": "cond_sid",
    "until": "until_sid",
}


def site_sid(kind: str, node) -> int:
    return getattr(node, _SID_ATTR[kind])


def site_span(kind: str, node) -> Span:
    if kind == "guard":
        return node.cond.span if hasattr(node.cond, "span") else node.span
    if kind == "selector":
        return node.selector.span if hasattr(node.selector, "span") else node.span
    if kind == "cond":
        return node.cond.span if hasattr(node.cond, "span") else node.span
    if kind == "until":
        return node.until.span if hasattr(node.until, "span") else node.span
    return node.span


def assign_statement_ids(ast: Ast) -> None:
    """Number every id site densely, 0-based, in source order over the unit."""
    next_id = 0
    for pou in ast.pous:
        for kind, node in iter_sites(pou.body):
            setattr(node, _SID_ATTR[kind], next_id)
            next_id += 1
    ast.statement_count = next_id


def pou_sids(pou: PouDecl) -> list[int]:
    return [site_sid(kind, node) for kind, node in iter_sites(pou.body)]
