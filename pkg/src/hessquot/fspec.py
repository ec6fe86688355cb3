"""Prescription expressions, the homotopy family, and assumption checks.

Expressions are built from a small grammar:

    variables   x1..x{n+1}  nu1..nu{n+1}  rho        (rho binds to |X|)
    operators   + - * / ^                            (^ right-assoc, then
                                                       unary -, then * /,
                                                       then + -)
    functions   exp log sin cos sqrt abs
    literals    decimal numbers, optional exponent

The homotopy blends a user prescription f with a radial reference term so
that t = 0 is solved exactly by the unit sphere:

    f_t(X, nu) = t f(X, nu)
               + (1 - t) R (|X|^-m + eps (|X|^-m - 1)),   m = k - l,

with R = C(n,k)/C(n,l) (n-1)^m.  eps is picked so the bracket stays above
c0 = r2^-m / 2 on the annulus [r1, r2], halved for safety and capped at 0.1.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import BadAnnulus, EvalError, ParseError, UnknownIdentifier
from .symfun import QuotientParams

__all__ = [
    "Expr",
    "parse_f",
    "to_source",
    "eval_f",
    "HomotopyTarget",
    "make_homotopy",
    "eval_homotopy",
    "reference_level",
    "AssumptionCheck",
    "AssumptionReport",
    "validate_assumptions",
    "quasi_uniform_directions",
]

EPSILON_CAP = 0.1
ANNULUS_SAMPLES = 1024
_FUNCTIONS = {
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
_VAR_RE = re.compile(r"(x|nu)([0-9]+)$")


class Expr:
    """Base class of expression nodes."""


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    kind: str          # "rho", "x" or "nu"
    index: int         # 1-based component for x/nu, 0 for rho


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr


@dataclass(frozen=True)
class Bin(Expr):
    op: str
    left: Expr
    right: Expr


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            stripped = source[pos:].lstrip()
            at = len(source) - len(stripped)
            raise ParseError(f"unexpected character {stripped[0]!r}", at)
        if m.lastgroup is None:
            break
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of expression", len(self.source))
        self.pos += 1
        return tok

    def expect_op(self, op):
        tok = self.peek()
        if tok is None or tok[0] != "op" or tok[1] != op:
            at = tok[2] if tok else len(self.source)
            raise ParseError(f"expected '{op}'", at)
        self.pos += 1

    def parse(self) -> Expr:
        expr = self.expr()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"trailing input {tok[1]!r}", tok[2])
        return expr

    def expr(self) -> Expr:
        node = self.term()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in "+-":
                self.pos += 1
                node = Bin(tok[1], node, self.term())
            else:
                return node

    def term(self) -> Expr:
        node = self.unary()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in "*/":
                self.pos += 1
                node = Bin(tok[1], node, self.unary())
            else:
                return node

    def unary(self) -> Expr:
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] == "-":
            self.pos += 1
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] == "^":
            self.pos += 1
            return Bin("^", base, self.unary())   # right-assoc, signed exponent ok
        return base

    def atom(self) -> Expr:
        kind, text, at = self.next()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if text in _FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            if text == "rho":
                return Var("rho", 0)
            m = _VAR_RE.match(text)
            if m:
                return Var(m.group(1), int(m.group(2)))
            raise UnknownIdentifier(text, at)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(f"unexpected token {text!r}", at)


def parse_f(source: str) -> Expr:
    """Parse a prescription into an expression tree."""
    if not source or not source.strip():
        raise ParseError("empty expression", 0)
    return _Parser(source).parse()


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _prec(node: Expr) -> int:
    if isinstance(node, Bin):
        return _PRECEDENCE[node.op]
    if isinstance(node, Neg):
        return _PRECEDENCE["neg"]
    return 9


def to_source(node: Expr) -> str:
    """Render a tree back to text; parse(to_source(e)) is structurally e."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "rho" if node.kind == "rho" else f"{node.kind}{node.index}"
    if isinstance(node, Call):
        return f"{node.fn}({to_source(node.arg)})"
    if isinstance(node, Neg):
        inner = to_source(node.arg)
        if _prec(node.arg) < _PRECEDENCE["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Bin):
        left = to_source(node.left)
        right = to_source(node.right)
        p = _PRECEDENCE[node.op]
        # left operand: parenthesize strictly lower precedence; right operand:
        # also parenthesize equal precedence except for the right-assoc '^'
        if _prec(node.left) < p or (node.op == "^" and isinstance(node.left, (Bin, Neg))):
            left = f"({left})"
        rp = _prec(node.right)
        if rp < p or (rp == p and node.op in {"-", "/", "+", "*"}):
            right = f"({right})"
        return f"{left} {node.op} {right}" if node.op in "+-" else f"{left}{node.op}{right}"
    raise TypeError(f"not an expression node: {node!r}")


def _check_domain(ok: np.ndarray, message: str, node: Expr):
    if not np.all(ok):
        raise EvalError(message, to_source(node))


def _eval_node(node: Expr, rho, X, nu):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.kind == "rho":
            return rho
        source = X if node.kind == "x" else nu
        dim = source.shape[-1]
        if not 1 <= node.index <= dim:
            raise UnknownIdentifier(f"{node.kind}{node.index} (ambient dimension {dim})", 0)
        return source[..., node.index - 1]
    if isinstance(node, Neg):
        return -_eval_node(node.arg, rho, X, nu)
    if isinstance(node, Call):
        arg = np.asarray(_eval_node(node.arg, rho, X, nu), dtype=float)
        if node.fn == "log":
            _check_domain(arg > 0.0, "log of a nonpositive value", node)
        elif node.fn == "sqrt":
            _check_domain(arg >= 0.0, "sqrt of a negative value", node)
        return _FUNCTIONS[node.fn](arg)
    if isinstance(node, Bin):
        left = np.asarray(_eval_node(node.left, rho, X, nu), dtype=float)
        right = np.asarray(_eval_node(node.right, rho, X, nu), dtype=float)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            _check_domain(right != 0.0, "division by zero", node)
            return left / right
        if node.op == "^":
            with np.errstate(invalid="ignore", divide="ignore"):
                out = np.power(left, right)
            _check_domain(np.isfinite(out), "power outside the real domain", node)
            return out
    raise TypeError(f"not an expression node: {node!r}")


def eval_f(expr: Expr, X, nu):
    """Evaluate at position X and unit normal nu; both (d,) or (N, d) arrays."""
    X = np.asarray(X, dtype=float)
    nu = np.asarray(nu, dtype=float)
    scalar = X.ndim == 1
    rho = np.linalg.norm(X, axis=-1)
    if np.any(rho == 0.0):
        raise ValueError("X must be nonzero")
    nu_norm = np.linalg.norm(nu, axis=-1)
    if np.any(np.abs(nu_norm - 1.0) > 1e-8):
        raise ValueError("nu must be a unit vector (within 1e-8)")
    out = np.asarray(_eval_node(expr, rho, X, nu), dtype=float)
    if scalar:
        return float(out)
    return np.ascontiguousarray(np.broadcast_to(out, np.shape(rho)), dtype=float)


def _base_values(base, X, nu):
    if isinstance(base, Expr):
        return eval_f(base, X, nu)
    return base(X, nu)


def reference_level(p: QuotientParams) -> float:
    """Quotient value of the unit sphere: C(n,k)/C(n,l) (n-1)^(k-l)."""
    return p.binomial_ratio * (p.n - 1) ** p.gap


@dataclass
class HomotopyTarget:
    """The family f_t; `base` is an Expr or a callable f(X, nu)."""

    base: object
    p: QuotientParams
    r1: float
    r2: float
    epsilon: float
    c0: float


def _pick_epsilon(m: int, r1: float, r2: float):
    """Largest eps keeping rho^-m + eps (rho^-m - 1) >= c0 on [r1, r2], then
    halved and capped.  The bracket is monotone in rho, but the rule is applied
    to a fixed sample so the choice is reproducible."""
    c0 = 0.5 * r2 ** (-m)
    rho = np.linspace(r1, r2, ANNULUS_SAMPLES)
    a = rho ** (-float(m))
    shrinking = a < 1.0
    if np.any(shrinking):
        eps_star = float(np.min((a[shrinking] - c0) / (1.0 - a[shrinking])))
        eps = min(EPSILON_CAP, eps_star / 2.0)
    else:
        eps = EPSILON_CAP
    return eps, c0


def make_homotopy(base, p: QuotientParams, r1: float, r2: float) -> HomotopyTarget:
    if not (0.0 < r1 < 1.0 < r2):
        raise BadAnnulus(f"annulus must satisfy 0 < r1 < 1 < r2, got ({r1}, {r2})")
    eps, c0 = _pick_epsilon(p.gap, r1, r2)
    return HomotopyTarget(base=base, p=p, r1=r1, r2=r2, epsilon=eps, c0=c0)


def eval_homotopy(target: HomotopyTarget, t: float, X, nu):
    """f_t(X, nu) = t f + (1 - t) R (|X|^-m + eps (|X|^-m - 1))."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    X = np.asarray(X, dtype=float)
    m = target.p.gap
    rho_m = np.linalg.norm(X, axis=-1) ** (-float(m))
    bracket = rho_m + target.epsilon * (rho_m - 1.0)
    radial = reference_level(target.p) * bracket
    if t == 0.0:
        out = radial
    else:
        out = t * _base_values(target.base, X, nu) + (1.0 - t) * radial
    return float(out) if np.ndim(out) == 0 else out


def quasi_uniform_directions(count: int, dim: int) -> np.ndarray:
    """Deterministic quasi-uniform unit vectors in R^dim.

    dim = 3 uses the Fibonacci lattice; other dimensions map a Kronecker
    low-discrepancy sequence through the normal quantile and normalize.
    """
    if dim == 3:
        i = np.arange(count) + 0.5
        golden = (1.0 + math.sqrt(5.0)) / 2.0
        z = 1.0 - 2.0 * i / count
        r = np.sqrt(np.clip(1.0 - z * z, 0.0, 1.0))
        phi = 2.0 * math.pi * i / golden
        return np.stack([z, r * np.cos(phi), r * np.sin(phi)], axis=-1)
    from scipy.special import ndtri

    # generalized golden-ratio Kronecker sequence
    g = 2.0
    for _ in range(32):
        g = (1.0 + g) ** (1.0 / (dim + 1.0))
    alphas = np.array([(1.0 / g) ** (j + 1) for j in range(dim)])
    i = np.arange(1, count + 1)[:, None]
    u = np.mod(0.5 + i * alphas[None, :], 1.0)
    z = ndtri(np.clip(u, 1e-12, 1.0 - 1e-12))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


@dataclass
class AssumptionCheck:
    passed: bool
    worst_margin: float
    worst_point: np.ndarray


@dataclass
class AssumptionReport:
    """Checks required before continuation is trusted.

    outer_bound:    f(X, X/|X|) below the round-sphere level on |X| = r2
    inner_bound:    f(X, X/|X|) above the round-sphere level on |X| = r1
    radial_monotone: d/drho [rho^(k-l) f(X, nu)] <= 0 across the annulus
    """

    outer_bound: AssumptionCheck
    inner_bound: AssumptionCheck
    radial_monotone: AssumptionCheck

    @property
    def all_passed(self) -> bool:
        return (
            self.outer_bound.passed
            and self.inner_bound.passed
            and self.radial_monotone.passed
        )


def _worst(margins: np.ndarray, points: np.ndarray, tol: float) -> AssumptionCheck:
    i = int(np.argmin(margins))
    return AssumptionCheck(
        passed=bool(margins[i] >= -tol),
        worst_margin=float(margins[i]),
        worst_point=points[i],
    )


def validate_assumptions(
    base, p: QuotientParams, r1: float, r2: float, samples: int = 400
) -> AssumptionReport:
    """Numerically check the three structural conditions on f over the annulus."""
    if samples < 100:
        raise ValueError(f"samples must be >= 100, got {samples}")
    if not (0.0 < r1 < 1.0 < r2):
        raise BadAnnulus(f"annulus must satisfy 0 < r1 < 1 < r2, got ({r1}, {r2})")
    dim = p.n + 1
    m = p.gap
    dirs = quasi_uniform_directions(samples, dim)

    level = p.binomial_ratio * ((p.n - 1) / r2) ** m
    f_outer = np.asarray(_base_values(base, r2 * dirs, dirs), dtype=float)
    outer = _worst(level - f_outer, r2 * dirs, tol=1e-12 * max(1.0, abs(level)))

    level = p.binomial_ratio * ((p.n - 1) / r1) ** m
    f_inner = np.asarray(_base_values(base, r1 * dirs, dirs), dtype=float)
    inner = _worst(f_inner - level, r1 * dirs, tol=1e-12 * max(1.0, abs(level)))

    n_dir = min(samples, 64)
    n_rho = 16
    n_nu = 8
    xdirs = quasi_uniform_directions(n_dir, dim)
    nus = quasi_uniform_directions(n_nu, dim)
    h = 1e-5 * (r2 - r1)
    rhos = np.linspace(r1 + 2 * h, r2 - 2 * h, n_rho)

    margins = []
    points = []
    for d in xdirs:
        for nu in nus:
            nu_rep = np.broadcast_to(nu, (n_rho, dim))
            up = (rhos + h) ** m * np.asarray(
                _base_values(base, (rhos + h)[:, None] * d[None, :], nu_rep), dtype=float
            )
            dn = (rhos - h) ** m * np.asarray(
                _base_values(base, (rhos - h)[:, None] * d[None, :], nu_rep), dtype=float
            )
            deriv = (up - dn) / (2.0 * h)
            margins.append(-deriv)
            points.append(rhos[:, None] * d[None, :])
    margins = np.concatenate(margins)
    points = np.concatenate(points, axis=0)
    scale = max(1.0, float(np.abs(margins).max()))
    monotone = _worst(margins, points, tol=1e-8 * scale)
    return AssumptionReport(outer_bound=outer, inner_bound=inner, radial_monotone=monotone)
