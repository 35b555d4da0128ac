"""Canonical pretty-printer; re-parsing its output reproduces the Ast."""

from __future__ import annotations

from .nodes import (
    Assign,
    Ast,
    Binary,
    BinOp,
    Call,
    CaseStmt,
    Expr,
    ExitStmt,
    FbCall,
    ForStmt,
    IfStmt,
    IndexRef,
    Literal,
    MemberRef,
    PouDecl,
    PouKind,
    RepeatStmt,
    ReturnStmt,
    Section,
    Stmt,
    TypeRef,
    Unary,
    UnOp,
    VarRef,
    WhileStmt,
)

_IND = "    "

# binding strength per operator, for minimal parenthesization
_PREC = {
    BinOp.OR: 1,
    BinOp.XOR: 2,
    BinOp.AND: 3,
    BinOp.EQ: 4,
    BinOp.NE: 4,
    BinOp.LT: 5,
    BinOp.LE: 5,
    BinOp.GT: 5,
    BinOp.GE: 5,
    BinOp.ADD: 6,
    BinOp.SUB: 6,
    BinOp.MUL: 7,
    BinOp.DIV: 7,
    BinOp.MOD: 7,
    BinOp.POW: 8,
}
_UNARY_PREC = 9


def print_ast(ast: Ast) -> str:
    return "\n".join(print_pou(p) for p in ast.pous)


def print_pou(pou: PouDecl) -> str:
    lines: list[str] = []
    if pou.kind is PouKind.FUNCTION:
        lines.append(f"FUNCTION {pou.name} : {format_type_ref(pou.ret_type)}")
    else:
        lines.append(f"{pou.kind.value} {pou.name}")
    current: Section | None = None
    for d in pou.decls:
        if d.section is not current:
            if current is not None:
                lines.append("END_VAR")
            lines.append(d.section.value)
            current = d.section
        init = ""
        if d.init is not None:
            if isinstance(d.init, list):
                init = " := [" + ", ".join(format_literal(l) for l in d.init) + "]"
            else:
                init = " := " + format_literal(d.init)
        lines.append(f"{_IND}{d.name} : {format_type_ref(d.type_ref)}{init};")
    if current is not None:
        lines.append("END_VAR")
    lines.append("")
    _print_body(pou.body, lines, 0)
    lines.append("END_" + pou.kind.value)
    lines.append("")
    return "\n".join(lines)


def format_type_ref(t: TypeRef) -> str:
    if t.name == "ARRAY":
        return f"ARRAY[{t.array_lo}..{t.array_hi}] OF {format_type_ref(t.array_elem)}"
    if t.name == "STRING" and t.string_cap is not None:
        return f"STRING[{t.string_cap}]"
    return t.name


def format_literal(lit: Literal) -> str:
    k = lit.lit_kind
    if k is Literal.K.BOOL:
        return "TRUE" if lit.value else "FALSE"
    if k is Literal.K.INT:
        return str(lit.value)
    if k is Literal.K.REAL:
        return format_real(lit.value)
    if k is Literal.K.TIME:
        return f"T#{lit.value}ms"
    return format_string(lit.value)


def format_real(v: float) -> str:
    text = repr(float(v))
    # ensure the token lexes as a real literal even for integral values
    if "." not in text and "e" not in text and "E" not in text:
        text += ".0"
    return text


def format_string(s: str) -> str:
    out = ["'"]
    for ch in s:
        if ch == "'":
            out.append("$'")
        elif ch == "$":
            out.append("$$")
        elif ch == "\n":
            out.append("$N")
        elif ch == "\r":
            out.append("$R")
        elif ch == "\t":
            out.append("$T")
        elif ch == "\f":
            out.append("$P")
        elif ord(ch) < 32 or ord(ch) > 126:
            out.append(f"${ord(ch) & 0xFF:02X}")
        else:
            out.append(ch)
    out.append("'")
    return "".join(out)


def _print_body(body: list[Stmt], lines: list[str], depth: int) -> None:
    pad = _IND * depth
    for st in body:
        if isinstance(st, Assign):
            lines.append(f"{pad}{format_expr(st.target)} := {format_expr(st.value)};")
        elif isinstance(st, FbCall):
            parts = []
            for p in st.params:
                arrow = "=>" if p.is_output else ":="
                parts.append(f"{p.name} {arrow} {format_expr(p.expr)}")
            lines.append(f"{pad}{st.instance}({', '.join(parts)});")
        elif isinstance(st, ExitStmt):
            lines.append(f"{pad}EXIT;")
        elif isinstance(st, ReturnStmt):
            lines.append(f"{pad}RETURN;")
        elif isinstance(st, IfStmt):
            kw = "IF"
            for br in st.branches:
                lines.append(f"{pad}{kw} {format_expr(br.cond)} THEN")
                _print_body(br.body, lines, depth + 1)
                kw = "ELSIF"
            if st.else_body:
                lines.append(f"{pad}ELSE")
                _print_body(st.else_body, lines, depth + 1)
            lines.append(f"{pad}END_IF;")
        elif isinstance(st, CaseStmt):
            lines.append(f"{pad}CASE {format_expr(st.selector)} OF")
            for br in st.branches:
                labels = ", ".join(
                    str(l.lo) if l.lo == l.hi else f"{l.lo}..{l.hi}" for l in br.labels
                )
                lines.append(f"{pad}{_IND}{labels}:")
                _print_body(br.body, lines, depth + 2)
            if st.else_body:
                lines.append(f"{pad}ELSE")
                _print_body(st.else_body, lines, depth + 1)
            lines.append(f"{pad}END_CASE;")
        elif isinstance(st, ForStmt):
            step = f" BY {format_expr(st.step)}" if st.step is not None else ""
            lines.append(
                f"{pad}FOR {st.var} := {format_expr(st.start)} TO {format_expr(st.stop)}{step} DO"
            )
            _print_body(st.body, lines, depth + 1)
            lines.append(f"{pad}END_FOR;")
        elif isinstance(st, WhileStmt):
            lines.append(f"{pad}WHILE {format_expr(st.cond)} DO")
            _print_body(st.body, lines, depth + 1)
            lines.append(f"{pad}END_WHILE;")
        elif isinstance(st, RepeatStmt):
            lines.append(f"{pad}REPEAT")
            _print_body(st.body, lines, depth + 1)
            lines.append(f"{pad}UNTIL {format_expr(st.until)}")
            lines.append(f"{pad}END_REPEAT;")
        else:  # pragma: no cover
            raise TypeError(f"unhandled statement {st!r}")


def format_expr(e: Expr, parent_prec: int = 0) -> str:
    if isinstance(e, Literal):
        text = format_literal(e)
        if e.lit_kind in (Literal.K.INT, Literal.K.REAL) and e.value < 0 and parent_prec >= _UNARY_PREC:
            return f"({text})"
        return text
    if isinstance(e, VarRef):
        return e.name
    if isinstance(e, MemberRef):
        return f"{format_expr(e.base)}.{e.member}"
    if isinstance(e, IndexRef):
        return f"{format_expr(e.base)}[{format_expr(e.index)}]"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, Unary):
        op = "NOT " if e.op is UnOp.NOT else e.op.value
        inner = format_expr(e.operand, _UNARY_PREC)
        text = f"{op}{inner}"
        return f"({text})" if parent_prec > _UNARY_PREC else text
    if isinstance(e, Binary):
        prec = _PREC[e.op]
        op = e.op.value
        if e.op is BinOp.POW:  # right-associative
            left = format_expr(e.left, prec + 1)
            right = format_expr(e.right, prec)
        else:
            left = format_expr(e.left, prec)
            right = format_expr(e.right, prec + 1)
        text = f"{left} {op} {right}"
        return f"({text})" if parent_prec > prec else text
    raise TypeError(f"unhandled expression {e!r}")  # pragma: no cover
