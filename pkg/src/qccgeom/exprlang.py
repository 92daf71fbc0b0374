"""Scalar expressions over chart coordinates.

Expressions are small immutable trees.  They are parsed from infix text,
evaluated (vectorised over numpy arrays of sample points), differentiated
exactly, and lightly simplified by constant folding and 0/1 identities.

>>> e = parse("x^2 + sin(y)")
>>> float(e.evaluate({"x": 2.0, "y": 0.0}))
4.0
>>> render(diff(e, "x"))
'2*x'
"""
from __future__ import annotations

import math
import re
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "Expr", "Const", "Var", "Unary", "Binary",
    "ExprError", "ExprSyntaxError", "UnknownIdentifierError", "ArityError",
    "ExprDomainError", "MissingBindingError",
    "parse", "evaluate", "evaluate_many", "diff", "simplify", "render", "const", "as_expr",
    "FUNCTIONS",
]


class ExprError(ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifierError(ExprSyntaxError):
    pass


class ArityError(ExprSyntaxError):
    pass


class ExprDomainError(ExprError, ArithmeticError):
    """Raised when evaluation leaves the real domain (1/0, log(-1), ...)."""


class MissingBindingError(ExprError, KeyError):
    def __str__(self) -> str:  # KeyError would quote the message
        return self.args[0] if self.args else ""


# numpy ufuncs backing the unary operators
FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
}
_CONSTANTS = {"pi": math.pi, "e": math.e}


class Expr:
    """Immutable expression node.

    Nodes never change after construction; derivatives are cached on the
    node, which is safe because a node's value is fixed.
    """

    __slots__ = ("_dcache", "__weakref__")

    def __init__(self) -> None:
        self._dcache: dict[str, Expr] = {}

    # structural helpers ------------------------------------------------
    def children(self) -> tuple["Expr", ...]:
        return ()

    def variables(self) -> frozenset[str]:
        out: set[str] = set()
        stack: list[Expr] = [self]
        seen: set[int] = set()
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            if isinstance(node, Var):
                out.add(node.name)
            stack.extend(node.children())
        return frozenset(out)

    def size(self) -> int:
        """Number of distinct nodes in the (shared) expression DAG."""
        stack: list[Expr] = [self]
        seen: set[int] = set()
        while stack:
            node = stack.pop()
            if id(node) not in seen:
                seen.add(id(node))
                stack.extend(node.children())
        return len(seen)

    def is_const(self, value: float | None = None) -> bool:
        return isinstance(self, Const) and (value is None or self.value == value)

    def evaluate(self, env: Mapping[str, object]):
        return evaluate(self, env)

    def diff(self, var: str) -> "Expr":
        return diff(self, var)

    def __str__(self) -> str:
        return render(self)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({render(self)!r})"

    # operator sugar, routed through the folding constructors
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, other):
        return power(self, as_expr(other))

    def __neg__(self):
        return neg(self)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: float):
        super().__init__()
        self.value = float(value)


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        super().__init__()
        self.name = name


class Unary(Expr):
    """Unary node; ``op`` is ``"neg"`` or a key of :data:`FUNCTIONS`."""

    __slots__ = ("op", "arg")

    def __init__(self, op: str, arg: Expr):
        super().__init__()
        if op != "neg" and op not in FUNCTIONS:
            raise ValueError(f"unknown unary op {op!r}")
        self.op = op
        self.arg = arg

    def children(self):
        return (self.arg,)


class Binary(Expr):
    __slots__ = ("op", "left", "right")
    OPS = ("add", "sub", "mul", "div", "pow")

    def __init__(self, op: str, left: Expr, right: Expr):
        super().__init__()
        if op not in self.OPS:
            raise ValueError(f"unknown binary op {op!r}")
        self.op = op
        self.left = left
        self.right = right

    def children(self):
        return (self.left, self.right)


ZERO = Const(0.0)
ONE = Const(1.0)


def const(value: float) -> Const:
    if value == 0.0:
        return ZERO
    if value == 1.0:
        return ONE
    return Const(value)


def as_expr(value, variables: Iterable[str] | None = None) -> Expr:
    """Coerce a number, string or Expr to an Expr."""
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return parse(value, variables)
    if isinstance(value, (int, float, np.integer, np.floating)):
        return const(float(value))
    # fractions.Fraction and friends
    try:
        return const(float(value))
    except (TypeError, ValueError):
        raise TypeError(f"cannot convert {type(value).__name__} to Expr") from None


# ---------------------------------------------------------------------------
# folding constructors

def _is_int(x: float) -> bool:
    return math.isfinite(x) and float(x).is_integer()


def _fold_binary(op: str, a: float, b: float) -> float | None:
    try:
        if op == "add":
            r = a + b
        elif op == "sub":
            r = a - b
        elif op == "mul":
            r = a * b
        elif op == "div":
            if b == 0.0:
                return None
            r = a / b
        else:
            if a < 0 and not _is_int(b):
                return None
            if a == 0 and b < 0:
                return None
            r = float(np.power(a, b))
    except (OverflowError, ZeroDivisionError):
        return None
    return r if math.isfinite(r) else None


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return const(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return const(a.value + b.value)
    if a.is_const(0.0):
        return b
    if b.is_const(0.0):
        return a
    if isinstance(b, Unary) and b.op == "neg":
        return Binary("sub", a, b.arg)
    return Binary("add", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return const(a.value - b.value)
    if b.is_const(0.0):
        return a
    if a.is_const(0.0):
        return neg(b)
    if a is b:
        return ZERO
    if isinstance(b, Unary) and b.op == "neg":
        return Binary("add", a, b.arg)
    return Binary("sub", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return const(a.value * b.value)
    # 0*x -> 0 is only exact for finite x; accepted, as in any light simplifier
    if a.is_const(0.0) or b.is_const(0.0):
        return ZERO
    if a.is_const(1.0):
        return b
    if b.is_const(1.0):
        return a
    if a.is_const(-1.0):
        return neg(b)
    if b.is_const(-1.0):
        return neg(a)
    if isinstance(b, Const) and not isinstance(a, Const):
        a, b = b, a
    return Binary("mul", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold_binary("div", a.value, b.value)
        if folded is not None:
            return const(folded)
        return Binary("div", a, b)
    if b.is_const(1.0):
        return a
    if a.is_const(0.0) and not b.is_const(0.0):
        return ZERO
    return Binary("div", a, b)


def power(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold_binary("pow", a.value, b.value)
        if folded is not None:
            return const(folded)
        return Binary("pow", a, b)
    if b.is_const(1.0):
        return a
    if b.is_const(0.0):
        return ONE
    if a.is_const(1.0):
        return ONE
    return Binary("pow", a, b)


def func(name: str, a: Expr) -> Expr:
    if isinstance(a, Const):
        try:
            with np.errstate(all="raise"):
                v = float(FUNCTIONS[name](a.value))
            if math.isfinite(v) and not (name in ("log", "sqrt") and a.value < 0):
                if name != "log" or a.value > 0:
                    return const(v)
        except FloatingPointError:
            pass
    return Unary(name, a)


_BINARY_BUILDERS = {"add": add, "sub": sub, "mul": mul, "div": div, "pow": power}


def simplify(e: Expr) -> Expr:
    """Constant folding and 0/1 identity elimination, bottom up."""
    memo: dict[int, Expr] = {}

    def walk(node: Expr) -> Expr:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, (Const, Var)):
            out = node
        elif isinstance(node, Unary):
            arg = walk(node.arg)
            out = neg(arg) if node.op == "neg" else func(node.op, arg)
        else:
            out = _BINARY_BUILDERS[node.op](walk(node.left), walk(node.right))
        memo[key] = out
        return out

    return walk(e)


# ---------------------------------------------------------------------------
# differentiation

def diff(e: Expr, var: str) -> Expr:
    """Exact symbolic derivative of ``e`` with respect to ``var``."""
    cached = e._dcache.get(var)
    if cached is not None:
        return cached
    if var not in e.variables():
        out: Expr = ZERO
    elif isinstance(e, Var):
        out = ONE
    elif isinstance(e, Unary):
        u = e.arg
        du = diff(u, var)
        op = e.op
        if op == "neg":
            out = neg(du)
        elif op == "sin":
            out = mul(func("cos", u), du)
        elif op == "cos":
            out = neg(mul(func("sin", u), du))
        elif op == "sinh":
            out = mul(func("cosh", u), du)
        elif op == "cosh":
            out = mul(func("sinh", u), du)
        elif op == "tanh":
            out = mul(sub(ONE, power(e, const(2.0))), du)
        elif op == "exp":
            out = mul(e, du)
        elif op == "log":
            out = div(du, u)
        else:  # sqrt
            out = div(du, mul(const(2.0), e))
    else:
        a, b = e.left, e.right
        op = e.op
        if op == "add":
            out = add(diff(a, var), diff(b, var))
        elif op == "sub":
            out = sub(diff(a, var), diff(b, var))
        elif op == "mul":
            out = add(mul(diff(a, var), b), mul(a, diff(b, var)))
        elif op == "div":
            da, db = diff(a, var), diff(b, var)
            if db.is_const(0.0):
                out = div(da, b)
            else:
                out = div(sub(mul(da, b), mul(a, db)), power(b, const(2.0)))
        elif var not in b.variables():
            # constant exponent: power rule, no log of the base
            b = simplify(b)
            out = mul(mul(b, power(a, sub(b, ONE))), diff(a, var))
        else:
            # a^b = exp(b log a)
            inner = add(mul(diff(b, var), func("log", a)), div(mul(b, diff(a, var)), a))
            out = mul(e, inner)
    e._dcache[var] = out
    return out


# ---------------------------------------------------------------------------
# evaluation

def _check(value, what: str):
    arr = np.asarray(value)
    if not np.all(np.isfinite(arr)):
        raise ExprDomainError(f"non-finite result in {what}")
    return value


def evaluate(e: Expr, env: Mapping[str, object]):
    """Evaluate ``e``; values in ``env`` may be floats or numpy arrays.

    Domain violations raise :class:`ExprDomainError` instead of producing
    NaN or inf.
    """
    return evaluate_many([e], env)[0]


def evaluate_many(exprs: Iterable[Expr], env: Mapping[str, object]) -> list:
    """Evaluate several expressions sharing one memo for common subtrees."""
    memo: dict[int, object] = {}

    def walk(node: Expr):
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Const):
            out = node.value
        elif isinstance(node, Var):
            try:
                out = env[node.name]
            except KeyError:
                raise MissingBindingError(f"no value bound for variable {node.name!r}") from None
            out = np.asarray(out, dtype=float) if not isinstance(out, float) else out
        elif isinstance(node, Unary):
            x = walk(node.arg)
            op = node.op
            if op == "neg":
                out = -x
            else:
                if op == "log" and np.any(np.asarray(x) <= 0):
                    raise ExprDomainError("log of non-positive argument")
                if op == "sqrt" and np.any(np.asarray(x) < 0):
                    raise ExprDomainError("sqrt of negative argument")
                with np.errstate(all="ignore"):
                    out = _check(FUNCTIONS[op](x), op)
        else:
            x = walk(node.left)
            y = walk(node.right)
            op = node.op
            with np.errstate(all="ignore"):
                if op == "add":
                    out = x + y
                elif op == "sub":
                    out = x - y
                elif op == "mul":
                    out = x * y
                elif op == "div":
                    if np.any(np.asarray(y) == 0):
                        raise ExprDomainError("division by zero")
                    out = x / y
                else:
                    xa, ya = np.asarray(x), np.asarray(y)
                    int_exp = np.all(np.floor(ya) == ya)
                    if not int_exp and np.any(xa < 0):
                        raise ExprDomainError("negative base with non-integer exponent")
                    if np.any((xa == 0) & (ya < 0)):
                        raise ExprDomainError("division by zero (zero to a negative power)")
                    out = np.power(x, y)
            out = _check(out, op)
        memo[key] = out
        return out

    def finish(result):
        if isinstance(result, np.ndarray) and result.ndim == 0:
            return float(result)
        if isinstance(result, (int, np.floating)):
            return float(result)
        return result

    return [finish(walk(e)) for e in exprs]


# ---------------------------------------------------------------------------
# rendering

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_SYM = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}


def _render_const(v: float) -> str:
    if _is_int(v) and abs(v) < 1e15:
        s = str(int(v))
    else:
        s = repr(v)
    return s


def render(e: Expr) -> str:
    """Infix text that parses back to an equivalent expression."""

    def walk(node: Expr) -> tuple[str, int]:
        if isinstance(node, Const):
            s = _render_const(node.value)
            return (s, 5) if node.value >= 0 else (s, 3)
        if isinstance(node, Var):
            return node.name, 5
        if isinstance(node, Unary):
            inner, p = walk(node.arg)
            if node.op == "neg":
                # -x^2 parses as -(x^2), so pow children need no parens
                return "-" + (inner if p >= 3 and not inner.startswith("-") else f"({inner})"), 3
            return f"{node.op}({inner})", 5
        prec = _PREC[node.op]
        ls, lp = walk(node.left)
        rs, rp = walk(node.right)
        if node.op == "pow":
            # right-associative; the base must bind tighter than ^
            if lp <= prec:
                ls = f"({ls})"
            if rp < 3:
                rs = f"({rs})"
        else:
            if lp < prec:
                ls = f"({ls})"
            if rp < prec or rp == 3 or (rp == prec and node.op in ("sub", "div")):
                rs = f"({rs})"
        return f"{ls}{_SYM[node.op]}{rs}", prec

    return walk(e)[0]


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<id>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        val = m.group(kind)
        start = m.start(kind)
        tokens.append((kind, "^" if val == "**" else val, start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text, variables, params):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = None if variables is None else set(variables)
        self.params = dict(params or {})

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, off = self.advance()
        if val != value or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", off, self.text)

    def parse(self):
        e = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", off, self.text)
        return e

    def expr(self):
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            right = self.term()
            left = Binary("add" if op == "+" else "sub", left, right)
        return left

    def term(self):
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            right = self.unary()
            left = Binary("mul" if op == "*" else "div", left, right)
        return left

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in ("-", "+"):
            self.advance()
            inner = self.unary()
            return Unary("neg", inner) if val == "-" else inner
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            exponent = self.unary()  # right-associative, allows x^-2
            return Binary("pow", base, exponent)
        return base

    def atom(self):
        kind, val, off = self.advance()
        if kind == "num":
            return Const(float(val))
        if kind == "id":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if val not in FUNCTIONS:
                    raise UnknownIdentifierError(f"unknown function {val!r}", off, self.text)
                self.advance()
                args = []
                if self.peek()[1] != ")":
                    args.append(self.expr())
                    while self.peek()[1] == ",":
                        self.advance()
                        args.append(self.expr())
                self.expect(")")
                if len(args) != 1:
                    raise ArityError(f"{val}() takes 1 argument, got {len(args)}", off, self.text)
                return Unary(val, args[0])
            if val in FUNCTIONS:
                raise ArityError(f"function {val!r} used without arguments", off, self.text)
            if val in self.params:
                return Const(self.params[val])
            if self.variables is not None and val in self.variables:
                return Var(val)
            if val in _CONSTANTS:
                return Const(_CONSTANTS[val])
            if self.variables is None:
                return Var(val)
            raise UnknownIdentifierError(f"unknown identifier {val!r}", off, self.text)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {found}", off, self.text)


def parse(text: str, variables: Iterable[str] | None = None,
          params: Mapping[str, float] | None = None) -> Expr:
    """Parse infix text into an expression tree.

    ``variables`` restricts identifiers to the declared coordinate names
    (``None`` accepts any identifier); ``params`` are substituted as
    constants.  ``pi`` and ``e`` are built-in constants unless shadowed.
    The tree is returned as written, without folding.
    """
    return _Parser(text, variables, params).parse()
