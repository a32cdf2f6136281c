"""Minimal symbolic expression engine over the complex numbers.

Expressions are immutable trees in the spectral variable ``x``, the
deformation variable ``t`` and named parameters.  The engine supports exact
symbolic differentiation, pointwise evaluation, compilation to fast Python
callables, adaptive contour quadrature along piecewise-linear paths, and a
plain-text infix grammar whose parser and printer round-trip structurally.

Design constraints:

* no general simplifier -- only local constant folding plus the rewrites
  ``e^0 -> 1``, ``0*e -> 0``, ``e*1 -> e``, ``e+0 -> e``;  identity checking
  is done numerically (see :func:`numerically_zero`);
* principal branches everywhere for ``log``, ``sqrt`` and fractional powers;
* integer exponents are stored exactly as ``int``, fractional exponents as
  exact :class:`fractions.Fraction` values;
* complex double precision throughout.

All values are immutable and all operations are pure, so expressions may be
shared and evaluated concurrently without locking.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

__all__ = [
    "Expr",
    "Binding",
    "Path",
    "ExprError",
    "UnboundSymbolError",
    "SingularEvaluationError",
    "QuadratureError",
    "ParseError",
    "X",
    "T",
    "const",
    "param",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "ipow",
    "fpow",
    "pow_any",
    "exp",
    "log",
    "sqrt",
    "differentiate",
    "evaluate",
    "free_symbols",
    "substitute",
    "compile_expr",
    "integrate_along_path",
    "integrate_callable",
    "numerically_zero",
    "to_string",
    "parse",
]


class ExprError(Exception):
    """Base class for expression-engine errors."""


class UnboundSymbolError(ExprError):
    """A variable or parameter required for evaluation has no value."""


class SingularEvaluationError(ExprError):
    """Evaluation hit a pole, a log of zero, or a zero base with a
    negative exponent."""


class QuadratureError(ExprError):
    """Adaptive quadrature failed to converge on a path segment."""


class ParseError(ExprError):
    """The expression text does not conform to the grammar."""


class Expr:
    """Immutable expression node.

    ``kind`` is one of ``const``, ``var``, ``param``, ``neg``, ``add``,
    ``mul``, ``div``, ``ipow``, ``fpow``, ``exp``, ``log``, ``sqrt``.
    ``value`` holds the payload for leaves and power exponents; ``children``
    holds sub-expressions.  Construct nodes through the module-level helper
    functions, which apply local constant folding.
    """

    __slots__ = ("kind", "value", "children", "_hash")

    def __init__(self, kind: str, value=None, children: tuple["Expr", ...] = ()):
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "children", children)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):  # pragma: no cover - guard rail
        raise AttributeError("Expr nodes are immutable")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.value == other.value
            and self.children == other.children
        )

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.kind, self.value, self.children))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"Expr({to_string(self)!r})"

    # Arithmetic sugar; every operator funnels through the folding helpers.
    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return pow_any(self, exponent)


def _coerce(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, Fraction):
        return const(complex(value))
    if isinstance(value, (int, float, complex)):
        return const(value)
    raise TypeError(f"cannot coerce {value!r} to Expr")


def _is_const(e: Expr, c: complex | None = None) -> bool:
    if e.kind != "const":
        return False
    return True if c is None else e.value == c


# ---------------------------------------------------------------------------
# Constructors (with local constant folding)

def const(value) -> Expr:
    return Expr("const", complex(value))


def param(name: str) -> Expr:
    if name in ("x", "t", "i"):
        raise ValueError(f"{name!r} is reserved and cannot name a parameter")
    return Expr("param", name)


X = Expr("var", "x")
T = Expr("var", "t")

_ZERO = const(0)
_ONE = const(1)


def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return const(a.value + b.value)
    if _is_const(a, 0j):
        return b
    if _is_const(b, 0j):
        return a
    return Expr("add", None, (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, neg(b))


def neg(a: Expr) -> Expr:
    if _is_const(a):
        return const(-a.value)
    if a.kind == "neg":
        return a.children[0]
    return Expr("neg", None, (a,))


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return const(a.value * b.value)
    if _is_const(a, 0j) or _is_const(b, 0j):
        return _ZERO
    if _is_const(a, 1 + 0j):
        return b
    if _is_const(b, 1 + 0j):
        return a
    return Expr("mul", None, (a, b))


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 1 + 0j):
        return a
    if _is_const(a, 0j):
        return _ZERO
    if _is_const(a) and _is_const(b) and b.value != 0:
        return const(a.value / b.value)
    return Expr("div", None, (a, b))


def ipow(base: Expr, exponent: int) -> Expr:
    if not isinstance(exponent, int):
        raise TypeError("integer-power exponent must be int")
    if exponent == 0:
        return _ONE
    if exponent == 1:
        return base
    if _is_const(base) and not (base.value == 0 and exponent < 0):
        return const(base.value ** exponent)
    return Expr("ipow", exponent, (base,))


def fpow(base: Expr, exponent: Fraction) -> Expr:
    exponent = Fraction(exponent)
    if exponent.denominator == 1:
        return ipow(base, int(exponent))
    if _is_const(base) and base.value != 0:
        return const(_principal_pow(base.value, float(exponent)))
    return Expr("fpow", exponent, (base,))


def pow_any(base: Expr, exponent) -> Expr:
    """Power with an int, Fraction or generic exponent.

    Generic (non-rational) exponents are lowered to ``exp(k*log(base))``;
    the tree itself only ever stores exact integer or rational exponents.
    """
    if isinstance(exponent, bool):
        raise TypeError("bool exponent")
    if isinstance(exponent, int):
        return ipow(base, exponent)
    if isinstance(exponent, Fraction):
        return fpow(base, exponent)
    if isinstance(exponent, float) and exponent == int(exponent):
        return ipow(base, int(exponent))
    return exp(mul(_coerce(exponent), log(base)))


def exp(a: Expr) -> Expr:
    if _is_const(a):
        return const(cmath.exp(a.value))
    return Expr("exp", None, (a,))


def log(a: Expr) -> Expr:
    if _is_const(a) and a.value != 0:
        return const(cmath.log(a.value))
    return Expr("log", None, (a,))


def sqrt(a: Expr) -> Expr:
    if _is_const(a):
        return const(cmath.sqrt(a.value))
    return Expr("sqrt", None, (a,))


# ---------------------------------------------------------------------------
# Differentiation

def differentiate(e: Expr, var: str) -> Expr:
    """Exact symbolic derivative of ``e`` with respect to ``x`` or ``t``.

    Derivatives of ``log``/``sqrt``/fractional powers introduce ``div``
    nodes; domain issues surface at evaluation time, not here.
    """
    if var not in ("x", "t"):
        raise ValueError("var must be 'x' or 't'")
    k = e.kind
    if k in ("const", "param"):
        return _ZERO
    if k == "var":
        return _ONE if e.value == var else _ZERO
    if k == "neg":
        return neg(differentiate(e.children[0], var))
    if k == "add":
        a, b = e.children
        return add(differentiate(a, var), differentiate(b, var))
    if k == "mul":
        a, b = e.children
        return add(
            mul(differentiate(a, var), b),
            mul(a, differentiate(b, var)),
        )
    if k == "div":
        a, b = e.children
        return div(
            sub(mul(differentiate(a, var), b), mul(a, differentiate(b, var))),
            ipow(b, 2),
        )
    if k == "ipow":
        base = e.children[0]
        n = e.value
        return mul(mul(const(n), ipow(base, n - 1)), differentiate(base, var))
    if k == "fpow":
        base = e.children[0]
        q = e.value
        return mul(mul(const(complex(q)), fpow(base, q - 1)), differentiate(base, var))
    if k == "exp":
        return mul(e, differentiate(e.children[0], var))
    if k == "log":
        return div(differentiate(e.children[0], var), e.children[0])
    if k == "sqrt":
        return div(differentiate(e.children[0], var), mul(const(2), e))
    raise ValueError(f"unknown node kind {k!r}")  # pragma: no cover


# ---------------------------------------------------------------------------
# Evaluation

@dataclass(frozen=True)
class Binding:
    """Values for the free symbols of an expression.

    Evaluation fails loudly (:class:`UnboundSymbolError`) if a required
    symbol is unbound.
    """

    x: complex | None = None
    t: complex | None = None
    params: Mapping[str, complex] = field(default_factory=dict)


def _principal_pow(base: complex, exponent: float) -> complex:
    """Principal-branch power, shared by evaluation and compiled code."""
    if base == 0:
        if exponent > 0:
            return 0j
        raise SingularEvaluationError("0 raised to a non-positive fractional power")
    return cmath.exp(exponent * cmath.log(base))


def evaluate(e: Expr, b: Binding) -> complex:
    """Evaluate ``e`` at a binding.  Pure: identical inputs give
    bit-identical outputs."""
    k = e.kind
    if k == "const":
        return e.value
    if k == "var":
        v = b.x if e.value == "x" else b.t
        if v is None:
            raise UnboundSymbolError(f"variable {e.value!r} is unbound")
        return complex(v)
    if k == "param":
        try:
            return complex(b.params[e.value])
        except KeyError:
            raise UnboundSymbolError(f"parameter {e.value!r} is unbound") from None
    if k == "neg":
        return -evaluate(e.children[0], b)
    if k == "add":
        return evaluate(e.children[0], b) + evaluate(e.children[1], b)
    if k == "mul":
        return evaluate(e.children[0], b) * evaluate(e.children[1], b)
    if k == "div":
        den = evaluate(e.children[1], b)
        if den == 0:
            raise SingularEvaluationError("division by zero")
        return evaluate(e.children[0], b) / den
    if k == "ipow":
        base = evaluate(e.children[0], b)
        if base == 0 and e.value < 0:
            raise SingularEvaluationError("pole: 0 raised to a negative power")
        return base ** e.value
    if k == "fpow":
        return _principal_pow(evaluate(e.children[0], b), float(e.value))
    if k == "exp":
        return cmath.exp(evaluate(e.children[0], b))
    if k == "log":
        v = evaluate(e.children[0], b)
        if v == 0:
            raise SingularEvaluationError("log of zero")
        return cmath.log(v)
    if k == "sqrt":
        return cmath.sqrt(evaluate(e.children[0], b))
    raise ValueError(f"unknown node kind {k!r}")  # pragma: no cover


def free_symbols(e: Expr) -> set[str]:
    """Names of the free symbols: ``'x'``, ``'t'`` and parameter names."""
    out: set[str] = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if n.kind == "var":
            out.add(n.value)
        elif n.kind == "param":
            out.add(n.value)
        stack.extend(n.children)
    return out


def substitute(e: Expr, x: Expr | complex | None = None,
               t: Expr | complex | None = None,
               params: Mapping[str, complex] | None = None) -> Expr:
    """Replace variables/parameters and re-fold constants."""
    rx = _coerce(x) if x is not None else None
    rt = _coerce(t) if t is not None else None

    memo: dict[int, Expr] = {}

    def rec(n: Expr) -> Expr:
        got = memo.get(id(n))
        if got is not None:
            return got
        k = n.kind
        if k == "var":
            r = rx if n.value == "x" else rt
            out = n if r is None else r
        elif k == "param":
            if params is not None and n.value in params:
                out = const(params[n.value])
            else:
                out = n
        elif k == "const":
            out = n
        else:
            kids = tuple(rec(c) for c in n.children)
            if kids == n.children:
                out = n
            elif k == "add":
                out = add(*kids)
            elif k == "mul":
                out = mul(*kids)
            elif k == "div":
                out = div(*kids)
            elif k == "neg":
                out = neg(*kids)
            elif k == "ipow":
                out = ipow(kids[0], n.value)
            elif k == "fpow":
                out = fpow(kids[0], n.value)
            elif k == "exp":
                out = exp(kids[0])
            elif k == "log":
                out = log(kids[0])
            elif k == "sqrt":
                out = sqrt(kids[0])
            else:  # pragma: no cover
                raise ValueError(f"unknown node kind {k!r}")
        memo[id(n)] = out
        return out

    return rec(e)


# ---------------------------------------------------------------------------
# Compilation to fast callables

def compile_expr(e: Expr, params: Mapping[str, complex] | None = None
                 ) -> Callable[[complex, complex], complex]:
    """Compile to a Python function ``f(x, t) -> complex``.

    Parameters are baked in as constants.  Shared subtrees are emitted once
    (straight-line code), so repeated evaluation is much faster than tree
    walking.  Singular inputs raise the native ZeroDivisionError/ValueError.
    """
    params = params or {}
    lines: list[str] = []
    names: dict[int, str] = {}
    counter = [0]

    def emit(n: Expr) -> str:
        got = names.get(id(n))
        if got is not None:
            return got
        k = n.kind
        if k == "const":
            s = repr(n.value)
        elif k == "var":
            s = n.value
        elif k == "param":
            if n.value not in params:
                raise UnboundSymbolError(f"parameter {n.value!r} is unbound")
            s = repr(complex(params[n.value]))
        else:
            kids = [emit(c) for c in n.children]
            if k == "neg":
                s = f"-{kids[0]}"
            elif k == "add":
                s = f"{kids[0]} + {kids[1]}"
            elif k == "mul":
                s = f"{kids[0]} * {kids[1]}"
            elif k == "div":
                s = f"{kids[0]} / {kids[1]}"
            elif k == "ipow":
                s = f"{kids[0]} ** {n.value}"
            elif k == "fpow":
                s = f"_powf({kids[0]}, {float(n.value)!r})"
            elif k == "exp":
                s = f"_exp({kids[0]})"
            elif k == "log":
                s = f"_log({kids[0]})"
            elif k == "sqrt":
                s = f"_sqrt({kids[0]})"
            else:  # pragma: no cover
                raise ValueError(f"unknown node kind {k!r}")
            v = f"v{counter[0]}"
            counter[0] += 1
            lines.append(f"    {v} = {s}")
            names[id(n)] = v
            return v
        names[id(n)] = s
        return s

    result = emit(e)
    src = "def _f(x, t):\n" + "\n".join(lines) + f"\n    return {result}\n"
    ns = {
        "_exp": cmath.exp,
        "_log": cmath.log,
        "_sqrt": cmath.sqrt,
        "_powf": _principal_pow,
    }
    exec(compile(src, "<fuchsreduce-expr>", "exec"), ns)
    return ns["_f"]


# ---------------------------------------------------------------------------
# Paths and quadrature

@dataclass(frozen=True)
class Path:
    """Piecewise-linear integration contour through complex waypoints."""

    points: tuple[complex, ...]

    def __init__(self, points: Iterable[complex]):
        pts = tuple(complex(p) for p in points)
        if len(pts) < 2:
            raise ValueError("a path needs at least two waypoints")
        object.__setattr__(self, "points", pts)

    def reversed(self) -> "Path":
        return Path(tuple(reversed(self.points)))

    @property
    def segments(self) -> list[tuple[complex, complex]]:
        return list(zip(self.points[:-1], self.points[1:]))


# Gauss 7 / Kronrod 15 nodes and weights on [-1, 1].
_XGK = (
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0,
)
_WGK = (
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
)
_WG = (
    0.129484966168870, 0.279705391489277,
    0.381830050505119, 0.417959183673469,
)


def _gk15_pair(fn: Callable[[complex], complex], a: complex, b: complex
               ) -> tuple[complex, complex]:
    """Kronrod-15 and Gauss-7 estimates over the straight segment [a, b]."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    f0 = fn(c)
    k = _WGK[7] * f0
    g = _WG[3] * f0
    for idx in range(7):
        xi = _XGK[idx]
        fp = fn(c + h * xi)
        fm = fn(c - h * xi)
        k += _WGK[idx] * (fp + fm)
        if idx % 2 == 1:
            g += _WG[idx // 2] * (fp + fm)
    return h * k, h * g


def integrate_callable(fn: Callable[[complex], complex], path: Path,
                       abs_tol: float = 1e-12, max_depth: int = 48) -> complex:
    """Adaptive Gauss-Kronrod quadrature of a callable along ``path``.

    Deterministic for a fixed path.  Raises :class:`QuadratureError` when a
    segment fails to converge (typically a singularity too close to the
    path)."""
    total = 0j
    for a0, b0 in path.segments:
        if a0 == b0:
            continue
        seg_tol = abs_tol / max(1, len(path.segments))
        stack = [(a0, b0, 0)]
        acc = 0j
        while stack:
            a, b, depth = stack.pop()
            k, g = _gk15_pair(fn, a, b)
            err = abs(k - g)
            local_tol = max(seg_tol * abs(b - a) / abs(b0 - a0), 1e-16 * (1 + abs(k)))
            if err <= local_tol or depth >= max_depth:
                if depth >= max_depth and err > 1e-6 * (1 + abs(k)):
                    raise QuadratureError(
                        f"quadrature did not converge on segment [{a}, {b}]"
                    )
                acc += k
            else:
                m = 0.5 * (a + b)
                stack.append((a, m, depth + 1))
                stack.append((m, b, depth + 1))
        total += acc
    return total


def integrate_along_path(e: Expr, var: str, path: Path, b: Binding,
                         abs_tol: float = 1e-12) -> complex:
    """Integrate ``e`` in ``var`` along a piecewise-linear contour.

    The other variable and all parameters are taken from ``b``; the caller
    routes the path around singular points of the integrand."""
    if var not in ("x", "t"):
        raise ValueError("var must be 'x' or 't'")
    syms = free_symbols(e)
    pnames = syms - {"x", "t"}
    missing = [p for p in pnames if p not in b.params]
    if missing:
        raise UnboundSymbolError(f"parameters {missing} are unbound")
    f = compile_expr(e, dict(b.params))
    if var == "x":
        if "t" in syms and b.t is None:
            raise UnboundSymbolError("variable 't' is unbound")
        tval = b.t if b.t is not None else 0j
        fn = lambda z: f(z, tval)
    else:
        if "x" in syms and b.x is None:
            raise UnboundSymbolError("variable 'x' is unbound")
        xval = b.x if b.x is not None else 0j
        fn = lambda z: f(xval, z)
    return integrate_callable(fn, path, abs_tol=abs_tol)


def numerically_zero(e: Expr, probes: Sequence[Binding], tol: float = 1e-10,
                     reference: Expr | None = None) -> bool:
    """Decide whether ``e`` vanishes on a probe set.

    True iff ``max |e|`` over the probes is at most ``tol * (1 + scale)``
    where ``scale`` is the max modulus of ``reference`` over the same probes
    (1 when no reference is given)."""
    mx = max(abs(evaluate(e, p)) for p in probes)
    scale = 1.0
    if reference is not None:
        scale = max(abs(evaluate(reference, p)) for p in probes)
    return mx <= tol * (1.0 + scale)


# ---------------------------------------------------------------------------
# Printer

def _fmt_real(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _print_const(c: complex) -> tuple[str, bool]:
    """Render a complex constant.  Second element: needs no outer parens."""
    re, im = c.real, c.imag
    if im == 0:
        return _fmt_real(re), re >= 0
    if re == 0:
        if im == 1:
            return "i", True
        if im == -1:
            return "(-i)", True
        return f"({_fmt_real(im)}*i)", True
    sign = "+" if im >= 0 else "-"
    im_abs = abs(im)
    im_part = "i" if im_abs == 1 else f"{_fmt_real(im_abs)}*i"
    return f"({_fmt_real(re)} {sign} {im_part})", True


def _atomish(e: Expr) -> bool:
    """Nodes that print as self-delimiting units."""
    if e.kind in ("var", "param", "exp", "log", "sqrt"):
        return True
    if e.kind == "const":
        return _print_const(e.value)[1]
    return False


def to_string(e: Expr) -> str:
    """Infix rendering; ``parse(to_string(e))`` rebuilds ``e`` structurally."""
    k = e.kind
    if k == "const":
        return _print_const(e.value)[0]
    if k == "var":
        return e.value
    if k == "param":
        return e.value
    if k == "neg":
        c = e.children[0]
        s = to_string(c)
        if c.kind in ("add", "mul", "div"):
            return f"-({s})"
        return f"-{s}"
    if k == "add":
        # The parser is left-associative, so only right-hand adds need
        # parentheses to round-trip structurally.
        a, b = e.children
        sa = to_string(a)
        if b.kind == "neg":
            inner = b.children[0]
            sb = to_string(inner)
            if inner.kind == "add":
                return f"{sa} - ({sb})"
            return f"{sa} - {sb}"
        if b.kind == "add":
            return f"{sa} + ({to_string(b)})"
        if b.kind == "const" and b.value.imag == 0 and b.value.real < 0:
            return f"{sa} - {_fmt_real(-b.value.real)}"
        return f"{sa} + {to_string(b)}"
    if k == "mul":
        a, b = e.children
        sa = to_string(a)
        sb = to_string(b)
        if a.kind in ("add", "neg", "div"):
            sa = f"({sa})"
        if b.kind in ("add", "neg", "div", "mul"):
            sb = f"({sb})"
        return f"{sa} * {sb}"
    if k == "div":
        a, b = e.children
        sa = to_string(a)
        sb = to_string(b)
        if a.kind in ("add", "neg"):
            sa = f"({sa})"
        if not _atomish(b) or b.kind == "const" and not _print_const(b.value)[1]:
            sb = f"({sb})"
        return f"{sa} / {sb}"
    if k in ("ipow", "fpow"):
        base = e.children[0]
        sb = to_string(base)
        if not _atomish(base):
            sb = f"({sb})"
        if k == "ipow":
            n = e.value
            return f"{sb}^{n}" if n >= 0 else f"{sb}^({n})"
        q: Fraction = e.value
        return f"{sb}^({q.numerator}/{q.denominator})"
    if k in ("exp", "log", "sqrt"):
        return f"{k}({to_string(e.children[0])})"
    raise ValueError(f"unknown node kind {k!r}")  # pragma: no cover


# ---------------------------------------------------------------------------
# Parser

_TOKEN_CHARS = set("+-*/^()")


def _tokenize(text: str) -> list[tuple[str, object]]:
    tokens: list[tuple[str, object]] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _TOKEN_CHARS:
            tokens.append((ch, ch))
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            seen_exp = False
            while j < n:
                cj = text[j]
                if cj.isdigit() or cj == ".":
                    j += 1
                elif cj in "eE" and j + 1 < n and (text[j + 1].isdigit() or text[j + 1] in "+-"):
                    seen_exp = True
                    j += 2
                elif seen_exp and cj.isdigit():
                    j += 1
                else:
                    break
            try:
                value = float(text[i:j])
            except ValueError as exc:
                raise ParseError(f"malformed number {text[i:j]!r}") from exc
            tokens.append(("num", value))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", text[i:j]))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r} at position {i}")
    tokens.append(("end", None))
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, object]]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> tuple[str, object]:
        return self.tokens[self.pos]

    def next(self) -> tuple[str, object]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        tok = self.next()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, got {tok[0]!r}")
        return tok

    def parse_expr(self) -> Expr:
        node = self.parse_term()
        while self.peek()[0] in ("+", "-"):
            op = self.next()[0]
            rhs = self.parse_term()
            node = add(node, rhs) if op == "+" else sub(node, rhs)
        return node

    def parse_term(self) -> Expr:
        node = self.parse_factor()
        while self.peek()[0] in ("*", "/"):
            op = self.next()[0]
            rhs = self.parse_factor()
            node = mul(node, rhs) if op == "*" else div(node, rhs)
        return node

    def parse_factor(self) -> Expr:
        if self.peek()[0] == "-":
            self.next()
            return neg(self.parse_factor())
        if self.peek()[0] == "+":
            self.next()
            return self.parse_factor()
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_atom()
        if self.peek()[0] != "^":
            return base
        self.next()
        num, den = self.parse_exponent()
        q = Fraction(num, den)
        return fpow(base, q) if q.denominator != 1 else ipow(base, int(q))

    def parse_exponent(self) -> tuple[int, int]:
        tok = self.peek()
        if tok[0] == "num":
            self.next()
            v = tok[1]
            if v != int(v):
                raise ParseError("exponents must be integers or (p/q) rationals")
            return int(v), 1
        if tok[0] == "(":
            self.next()
            sign = 1
            if self.peek()[0] == "-":
                self.next()
                sign = -1
            numtok = self.expect("num")
            v = numtok[1]
            if v != int(v):
                raise ParseError("exponents must be integers or (p/q) rationals")
            num = sign * int(v)
            den = 1
            if self.peek()[0] == "/":
                self.next()
                dentok = self.expect("num")
                dv = dentok[1]
                if dv != int(dv) or dv == 0:
                    raise ParseError("rational exponent denominator must be a nonzero integer")
                den = int(dv)
            self.expect(")")
            return num, den
        raise ParseError("malformed exponent")

    def parse_atom(self) -> Expr:
        kind, value = self.next()
        if kind == "num":
            return const(value)
        if kind == "(":
            node = self.parse_expr()
            self.expect(")")
            return node
        if kind == "ident":
            if value == "x":
                return X
            if value == "t":
                return T
            if value == "i":
                return const(1j)
            if value in ("exp", "log", "sqrt"):
                self.expect("(")
                arg = self.parse_expr()
                self.expect(")")
                return {"exp": exp, "log": log, "sqrt": sqrt}[value](arg)
            return param(value)
        raise ParseError(f"unexpected token {kind!r}")


def parse(text: str) -> Expr:
    """Parse the plain-text grammar back into an expression tree."""
    p = _Parser(_tokenize(text))
    node = p.parse_expr()
    if p.peek()[0] != "end":
        raise ParseError(f"trailing input at token {p.pos}")
    return node
