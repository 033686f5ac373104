"""Scalar expression DSL: parsing, validation, jet evaluation, serialization.

Grammar (standard precedence, left-associative binary operators):

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' exponent)?
    exponent:= NUMBER | '(' '-'? NUMBER ')'
    atom    := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

Precedence: pow > unary minus > mul/div > add/sub.  The pow exponent must
be a numeric literal (integer or real); expression exponents are rejected.
There is no implicit multiplication.  "arctanh" is the only accepted
spelling for the inverse hyperbolic tangent.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import jets
from .errors import ExprError
from .jets import Jet

FUNCTIONS = (
    "exp",
    "log",
    "sin",
    "cos",
    "sinh",
    "cosh",
    "tan",
    "arctanh",
    "sqrt",
)


# -- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str
    kind: str  # "coord" or "param"


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expr"


Expr = Num | Var | Neg | BinOp | Call


# -- tokenizer -------------------------------------------------------------

_OPS = set("+-*/^()")


def _tokenize(text: str):
    tokens = []  # (kind, value, offset)
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPS:
            tokens.append(("op", ch, i))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    seen_dot = True
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    while k < n and text[k].isdigit():
                        k += 1
                    j = k
            lit = text[i:j]
            try:
                val = float(lit)
            except ValueError:
                raise ExprError(f"bad numeric literal {lit!r}", offset=i)
            tokens.append(("num", val, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
            continue
        raise ExprError(f"unexpected character {ch!r}", offset=i)
    tokens.append(("end", None, n))
    return tokens


# -- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, text, coords, params):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.coords = set(coords)
        self.params = set(params)
        overlap = self.coords & self.params
        if overlap:
            raise ExprError(f"names declared as both coordinate and parameter: {sorted(overlap)}")

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, value, offset = self.peek()
        if kind != "op" or value != op:
            raise ExprError(f"expected {op!r}", offset=offset)
        return self.take()

    def parse(self):
        e = self.expr()
        kind, value, offset = self.peek()
        if kind != "end":
            raise ExprError(f"unexpected trailing input {value!r}", offset=offset)
        return e

    def expr(self):
        node = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.take()
                node = BinOp(value, node, self.term())
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.take()
                node = BinOp(value, node, self.unary())
            else:
                return node

    def unary(self):
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.take()
            return BinOp("^", base, self.exponent())
        return base

    def exponent(self):
        kind, value, offset = self.peek()
        if kind == "num":
            self.take()
            return Num(value)
        if kind == "op" and value == "(":
            self.take()
            negate = False
            kind, value, offset = self.peek()
            if kind == "op" and value == "-":
                self.take()
                negate = True
            kind, value, offset = self.peek()
            if kind != "num":
                raise ExprError(
                    "pow exponent must be a numeric literal", offset=offset
                )
            self.take()
            self.expect_op(")")
            return Num(-value if negate else value)
        raise ExprError("pow exponent must be a numeric literal", offset=offset)

    def atom(self):
        kind, value, offset = self.take()
        if kind == "num":
            return Num(value)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "ident":
            nk, nv, _ = self.peek()
            if nk == "op" and nv == "(":
                if value not in FUNCTIONS:
                    raise ExprError(f"unknown function {value!r}", offset=offset)
                self.take()
                arg = self.expr()
                self.expect_op(")")
                return Call(value, arg)
            if value in self.coords:
                return Var(value, "coord")
            if value in self.params:
                return Var(value, "param")
            raise ExprError(f"unknown identifier {value!r}", offset=offset)
        raise ExprError("expected a value", offset=offset)


def parse(text: str, coords, params=()) -> Expr:
    """Parse an expression over the given coordinate and parameter names."""
    return _Parser(text, coords, params).parse()


# -- evaluation ------------------------------------------------------------


def eval_jet(e: Expr, point: dict, params: dict, dim: int, order: int,
             coord_index: dict) -> Jet:
    """Jet of the expression at `point` with exact partials to `order`.

    `coord_index` maps coordinate names to jet slots (chart ordering);
    derivatives are taken with respect to coordinates only, parameters are
    constants.
    """
    if isinstance(e, Num):
        return Jet.constant(e.value, dim, order)
    if isinstance(e, Var):
        if e.kind == "coord":
            return Jet.variable(coord_index[e.name], point[e.name], dim, order)
        return Jet.constant(float(params[e.name]), dim, order)
    if isinstance(e, Neg):
        return -eval_jet(e.arg, point, params, dim, order, coord_index)
    if isinstance(e, Call):
        return jets.compose(
            e.fn, eval_jet(e.arg, point, params, dim, order, coord_index)
        )
    if isinstance(e, BinOp):
        left = eval_jet(e.left, point, params, dim, order, coord_index)
        if e.op == "^":
            p = e.right.value
            if float(p).is_integer():
                return jets.int_power(left, int(p))
            return jets.compose("pow", left, exponent=p)
        right = eval_jet(e.right, point, params, dim, order, coord_index)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return left * right
        if e.op == "/":
            return left / right
    raise ExprError(f"cannot evaluate node {e!r}")


def eval_value(e: Expr, point: dict, params: dict) -> float:
    """Plain double evaluation (no derivatives); used for cheap domain
    checks during sampling."""
    import math

    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return float(point[e.name]) if e.kind == "coord" else float(params[e.name])
    if isinstance(e, Neg):
        return -eval_value(e.arg, point, params)
    if isinstance(e, Call):
        v = eval_value(e.arg, point, params)
        fns = {
            "exp": math.exp,
            "log": math.log,
            "sin": math.sin,
            "cos": math.cos,
            "sinh": math.sinh,
            "cosh": math.cosh,
            "tan": math.tan,
            "arctanh": math.atanh,
            "sqrt": math.sqrt,
        }
        return fns[e.fn](v)
    if isinstance(e, BinOp):
        a = eval_value(e.left, point, params)
        b = eval_value(e.right, point, params)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            return a / b
        return a**b
    raise ExprError(f"cannot evaluate node {e!r}")


# -- serialization ---------------------------------------------------------

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _num_text(value: float) -> str:
    if float(value).is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def serialize(e: Expr) -> str:
    """Canonical text form; parse(serialize(e)) is structurally equal to e."""

    def render(node, parent_prec, is_right):
        if isinstance(node, Num):
            return _num_text(node.value)
        if isinstance(node, Var):
            return node.name
        if isinstance(node, Call):
            return f"{node.fn}({render(node.arg, 0, False)})"
        if isinstance(node, Neg):
            inner = render(node.arg, _PRECEDENCE["neg"], False)
            text = f"-{inner}"
            if parent_prec > _PRECEDENCE["neg"] or (
                parent_prec == _PRECEDENCE["neg"] and is_right
            ):
                return f"({text})"
            return text
        if isinstance(node, BinOp):
            prec = _PRECEDENCE[node.op]
            if node.op == "^":
                base = render(node.left, prec + 1, False)
                if node.right.value < 0:
                    text = f"{base}^({_num_text(node.right.value)})"
                else:
                    text = f"{base}^{_num_text(node.right.value)}"
                if parent_prec > prec:
                    return f"({text})"
                return text
            left = render(node.left, prec, False)
            right = render(node.right, prec + 1, True)
            text = f"{left} {node.op} {right}"
            if parent_prec > prec:
                return f"({text})"
            return text
        raise ExprError(f"cannot serialize node {node!r}")

    return render(e, 0, False)


def variables(e: Expr) -> set[str]:
    """All coordinate names appearing in the expression."""
    if isinstance(e, Var):
        return {e.name} if e.kind == "coord" else set()
    if isinstance(e, Neg):
        return variables(e.arg)
    if isinstance(e, Call):
        return variables(e.arg)
    if isinstance(e, BinOp):
        return variables(e.left) | variables(e.right)
    return set()
