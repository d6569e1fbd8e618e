"""Sparse multivariate polynomial systems with complex coefficients.

Parsing, canonical printing, evaluation, Taylor expansion at a point and the
symmetric derivative tensors ``D^k f(x)``.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from itertools import combinations_with_replacement
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels

MAX_EXPONENT = 100
# dense Taylor arrays have (deg+1)**n entries
MAX_DENSE_TAYLOR = 4_000_000


class ParseError(ValueError):
    """Syntax or semantic error in system text, with 1-based position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


class DimensionError(ValueError):
    """Point, matrix or system sizes do not agree."""


Exponent = tuple[int, ...]


class Polynomial:
    """Immutable sparse polynomial ``sum c_e x^e`` in ``nvars`` variables.

    Terms are kept sorted lexicographically by exponent vector; every
    summation over terms follows that order.
    """

    __slots__ = ("nvars", "_terms", "_exps", "_coefs", "_degree")

    def __init__(self, terms: Mapping[Exponent, complex], nvars: int):
        if nvars < 1:
            raise ValueError("nvars must be positive")
        clean = {}
        for e, c in terms.items():
            e = tuple(int(v) for v in e)
            if len(e) != nvars:
                raise DimensionError(f"exponent {e} has length {len(e)}, expected {nvars}")
            if any(v < 0 for v in e):
                raise ValueError(f"negative exponent in {e}")
            c = complex(c)
            if c != 0:
                clean[e] = c
        self.nvars = nvars
        self._terms = MappingProxyType(dict(sorted(clean.items())))
        if clean:
            self._exps = np.ascontiguousarray(list(self._terms.keys()), dtype=np.int64)
            self._coefs = np.ascontiguousarray(list(self._terms.values()), dtype=np.complex128)
        else:
            self._exps = np.zeros((0, nvars), dtype=np.int64)
            self._coefs = np.zeros(0, dtype=np.complex128)
        self._degree = int(self._exps.sum(axis=1).max()) if clean else 0

    @classmethod
    def constant(cls, c: complex, nvars: int) -> "Polynomial":
        return cls({(0,) * nvars: c}, nvars)

    @classmethod
    def variable(cls, j: int, nvars: int) -> "Polynomial":
        e = [0] * nvars
        e[j] = 1
        return cls({tuple(e): 1.0}, nvars)

    @property
    def terms(self) -> Mapping[Exponent, complex]:
        return self._terms

    @property
    def exps(self) -> np.ndarray:
        return self._exps

    @property
    def coefs(self) -> np.ndarray:
        return self._coefs

    @property
    def degree(self) -> int:
        return self._degree

    def is_zero(self) -> bool:
        return not self._terms

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise DimensionError("polynomials in different numbers of variables")
            return other
        return Polynomial.constant(complex(other), self.nvars)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = out.get(e, 0) + c
        return Polynomial(out, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({e: -c for e, c in self._terms.items()}, self.nvars)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            c = complex(other)
            return Polynomial({e: c * v for e, v in self._terms.items()}, self.nvars)
        other = self._coerce(other)
        out: dict[Exponent, complex] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial(out, self.nvars)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = Polynomial.constant(1.0, self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and dict(self._terms) == dict(other._terms)

    def __hash__(self):
        return hash((self.nvars, tuple(self._terms.items())))

    def __repr__(self):
        return f"Polynomial({format_polynomial(self, default_varnames(self.nvars))!r})"

    def partial(self, j: int) -> "Polynomial":
        out = {}
        for e, c in self._terms.items():
            if e[j]:
                d = list(e)
                d[j] -= 1
                out[tuple(d)] = c * e[j]
        return Polynomial(out, self.nvars)

    def __call__(self, x) -> complex:
        pts = np.ascontiguousarray(np.asarray(x, dtype=np.complex128).reshape(1, -1))
        if pts.shape[1] != self.nvars:
            raise DimensionError(f"point has {pts.shape[1]} coordinates, expected {self.nvars}")
        return complex(kernels.eval_points(self._exps, self._coefs, pts, self._degree)[0])


def default_varnames(n: int) -> tuple[str, ...]:
    return tuple(f"x{j + 1}" for j in range(n))


@dataclass(frozen=True)
class PolySystem:
    """Ordered list of polynomials sharing one set of variables."""

    polys: tuple[Polynomial, ...]
    varnames: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "polys", tuple(self.polys))
        object.__setattr__(self, "varnames", tuple(self.varnames))
        n = len(self.varnames)
        if n < 1:
            raise ValueError("a system needs at least one variable")
        for p in self.polys:
            if p.nvars != n:
                raise DimensionError("all polynomials must share nvars")

    @classmethod
    def from_polys(cls, polys: Iterable[Polynomial], varnames: Sequence[str] | None = None):
        polys = tuple(polys)
        if varnames is None:
            varnames = default_varnames(polys[0].nvars)
        return cls(polys, tuple(varnames))

    @property
    def nvars(self) -> int:
        return len(self.varnames)

    @property
    def neqs(self) -> int:
        return len(self.polys)

    @property
    def degree(self) -> int:
        return max((p.degree for p in self.polys), default=0)

    def is_square(self) -> bool:
        return self.neqs == self.nvars

    def coef_scale(self) -> float:
        """Largest coefficient modulus; the natural magnitude of the system."""
        return max((float(np.abs(p.coefs).max()) for p in self.polys if not p.is_zero()), default=0.0)

    def __len__(self):
        return len(self.polys)

    def __iter__(self):
        return iter(self.polys)

    def __getitem__(self, i):
        return self.polys[i]

    def __sub__(self, other: "PolySystem") -> "PolySystem":
        if other.nvars != self.nvars or other.neqs != self.neqs:
            raise DimensionError("systems differ in shape")
        return PolySystem(tuple(a - b for a, b in zip(self.polys, other.polys)), self.varnames)

    def __str__(self):
        return format_system(self)


# ---------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*^(),;])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    pos = 0
    line, line_start = 1, 0
    tokens = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "ws":
            nl = value.count("\n")
            if nl:
                line += nl
                line_start = pos + value.rfind("\n") + 1
        else:
            tokens.append((kind, value, line, col))
        pos = m.end()
    tokens.append(("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.vars: dict[str, int] = {}

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2], tok[3])
        return tok

    def header(self):
        tok = self.take()
        if tok[0] != "ident" or tok[1] != "vars":
            raise ParseError("system must start with 'vars <id>(,<id>)*;'", tok[2], tok[3])
        names = []
        while True:
            tok = self.take()
            if tok[0] != "ident":
                raise ParseError("expected a variable name", tok[2], tok[3])
            if tok[1] in names:
                raise ParseError(f"variable {tok[1]!r} declared twice", tok[2], tok[3])
            names.append(tok[1])
            nxt = self.take()
            if nxt[1] == ";":
                break
            if nxt[1] != ",":
                raise ParseError("expected ',' or ';' in variable list", nxt[2], nxt[3])
        self.vars = {v: j for j, v in enumerate(names)}
        return names

    def system(self):
        names = self.header()
        n = len(names)
        polys = []
        while self.peek()[0] != "eof":
            if self.peek()[1] == ";":
                self.take()
                continue
            polys.append(self.expr(n))
            tok = self.peek()
            if tok[1] == ";":
                self.take()
            elif tok[0] != "eof":
                raise ParseError(f"unexpected token {tok[1]!r}", tok[2], tok[3])
        return PolySystem(tuple(polys), tuple(names))

    def expr(self, n):
        acc = self.term(n)
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term(n)
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self, n):
        acc = self.unary(n)
        while self.peek()[1] == "*":
            self.take()
            acc = acc * self.unary(n)
        return acc

    def unary(self, n):
        if self.peek()[1] == "-":
            self.take()
            return -self.unary(n)
        if self.peek()[1] == "+":
            self.take()
            return self.unary(n)
        return self.power(n)

    def power(self, n):
        base = self.atom(n)
        if self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "num" or not tok[1].isdigit():
                raise ParseError("'^' needs a non-negative integer exponent", tok[2], tok[3])
            k = int(tok[1])
            if k > MAX_EXPONENT:
                raise ParseError(f"exponent {k} exceeds limit {MAX_EXPONENT}", tok[2], tok[3])
            base = base ** k
        return base

    def atom(self, n):
        tok = self.take()
        kind, value, line, col = tok
        if kind == "num":
            if value.endswith("i"):
                return Polynomial.constant(complex(0.0, float(value[:-1])), n)
            return Polynomial.constant(float(value), n)
        if kind == "ident":
            if value in self.vars:
                return Polynomial.variable(self.vars[value], n)
            if value == "i":
                return Polynomial.constant(1j, n)
            raise ParseError(f"undeclared variable {value!r}", line, col)
        if value == "(":
            inner = self.expr(n)
            self.expect(")")
            return inner
        raise ParseError(f"unexpected token {value or 'end of input'!r}", line, col)


def parse_system(text: str) -> PolySystem:
    """Parse ``vars x,y; expr; expr; ...`` into a :class:`PolySystem`."""
    return _Parser(text).system()


def _format_real(v: float) -> str:
    return repr(float(v))


def _format_coef(c: complex) -> str:
    if c.imag == 0:
        return _format_real(c.real)
    im = c.imag
    sign = "-" if im < 0 else "+"
    return f"({_format_real(c.real)}{sign}{_format_real(abs(im))}i)"


def format_polynomial(p: Polynomial, varnames: Sequence[str]) -> str:
    if p.is_zero():
        return "0"
    pieces = []
    # highest exponent first reads naturally; order is canonical either way
    for e, c in reversed(list(p.terms.items())):
        mono = "*".join(
            v if k == 1 else f"{v}^{k}" for v, k in zip(varnames, e) if k
        )
        negative = c.imag == 0 and c.real < 0
        mag = complex(-c.real, 0.0) if negative else c
        if mono and mag == 1:
            body = mono
        else:
            body = _format_coef(mag) + ("*" + mono if mono else "")
        if not pieces:
            pieces.append("-" + body if negative else body)
        else:
            pieces.append(("- " if negative else "+ ") + body)
    return " ".join(pieces)


def format_system(f: PolySystem) -> str:
    lines = ["vars " + ",".join(f.varnames) + ";"]
    lines += [format_polynomial(p, f.varnames) + ";" for p in f.polys]
    return "\n".join(lines) + "\n"


def load_point(text: str) -> np.ndarray:
    """Point file: JSON array of ``[re, im]`` pairs (bare reals accepted)."""
    raw = json.loads(text)
    coords = []
    for item in raw:
        if isinstance(item, (list, tuple)):
            if len(item) != 2:
                raise ValueError("point coordinates must be [re, im] pairs")
            coords.append(complex(float(item[0]), float(item[1])))
        else:
            coords.append(complex(float(item)))
    return np.array(coords, dtype=np.complex128)


def dump_point(x) -> str:
    return json.dumps([[float(z.real), float(z.imag)] for z in np.asarray(x, dtype=complex)])


# ------------------------------------------------------------- evaluation

def _as_point(f: PolySystem, x) -> np.ndarray:
    x = np.ascontiguousarray(np.asarray(x, dtype=np.complex128).ravel())
    if x.shape[0] != f.nvars:
        raise DimensionError(f"point has {x.shape[0]} coordinates, system has {f.nvars} variables")
    return x


def evaluate(f: PolySystem, x) -> np.ndarray:
    """``f(x)`` as a complex vector."""
    x = _as_point(f, x)
    return evaluate_many(f, x.reshape(1, -1))[0]


def evaluate_many(f: PolySystem, points) -> np.ndarray:
    """Evaluate at each row of ``points``; returns shape ``(p, neqs)``."""
    pts = np.ascontiguousarray(np.asarray(points, dtype=np.complex128))
    if pts.ndim != 2 or pts.shape[1] != f.nvars:
        raise DimensionError("points must have shape (p, nvars)")
    out = np.empty((pts.shape[0], f.neqs), dtype=np.complex128)
    for i, p in enumerate(f.polys):
        out[:, i] = kernels.eval_points(p.exps, p.coefs, pts, p.degree)
    return out


def multi_indices(n: int, k: int) -> list[Exponent]:
    """All exponent vectors of total degree exactly ``k``, lexicographically sorted."""
    out = []
    for combo in combinations_with_replacement(range(n), k):
        a = [0] * n
        for j in combo:
            a[j] += 1
        out.append(tuple(a))
    return sorted(out)


def multinomial_weight(alpha: Exponent) -> int:
    """``k!/alpha!``: how many slots of the expanded tensor hold ``alpha``."""
    w = math.factorial(sum(alpha))
    for a in alpha:
        w //= math.factorial(a)
    return w


class TaylorExpansion:
    """Taylor coefficients ``c_alpha = d^alpha f_i(x) / alpha!`` of a system at a point."""

    def __init__(self, f: PolySystem, x):
        self.system = f
        self.point = _as_point(f, x)
        self._dense = []
        for p in f.polys:
            shape = (p.degree + 1,) * f.nvars
            if math.prod(shape) > MAX_DENSE_TAYLOR:
                raise ValueError("system too large for dense Taylor expansion")
            flat = kernels.taylor_shift(p.exps, p.coefs, self.point, p.degree)
            self._dense.append(flat.reshape(shape))

    def coefficient(self, i: int, alpha: Exponent) -> complex:
        dense = self._dense[i]
        if any(a >= dense.shape[0] for a in alpha):
            return 0j
        return complex(dense[tuple(alpha)])

    def value(self) -> np.ndarray:
        zero = (0,) * self.system.nvars
        return np.array([self.coefficient(i, zero) for i in range(self.system.neqs)])

    def as_polynomials(self) -> list[Polynomial]:
        """The system re-expanded in the shifted variable ``w = y - x``."""
        out = []
        for dense in self._dense:
            nz = np.argwhere(dense != 0)
            out.append(Polynomial({tuple(idx): dense[tuple(idx)] for idx in nz}, self.system.nvars))
        return out

    def tensor(self, k: int) -> "DerivTensor":
        if k < 1:
            raise ValueError("derivative order must be >= 1")
        n = self.system.nvars
        alphas = multi_indices(n, k)
        fact = np.array([math.prod(math.factorial(a) for a in al) for al in alphas], dtype=float)
        vals = np.zeros((self.system.neqs, len(alphas)), dtype=np.complex128)
        for i in range(self.system.neqs):
            for col, al in enumerate(alphas):
                vals[i, col] = self.coefficient(i, al)
        vals *= fact
        return DerivTensor(k, n, tuple(alphas), vals)


@dataclass(frozen=True)
class DerivTensor:
    """``D^k f(x)`` stored once per multi-index ``alpha`` (``|alpha| = k``).

    ``values[i, j]`` is the raw partial derivative ``d^alpha_j f_i (x)``.
    The symmetric tensor is only expanded on demand.
    """

    order: int
    nvars: int
    indices: tuple[Exponent, ...]
    values: np.ndarray

    @property
    def neqs(self) -> int:
        return self.values.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return np.array([multinomial_weight(a) for a in self.indices], dtype=float)

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def expand(self) -> np.ndarray:
        """Dense symmetric tensor of shape ``(neqs, n, ..., n)``."""
        n, k = self.nvars, self.order
        lookup = {a: j for j, a in enumerate(self.indices)}
        out = np.zeros((self.neqs,) + (n,) * k, dtype=np.complex128)
        for slots in np.ndindex(*(n,) * k):
            a = [0] * n
            for s in slots:
                a[s] += 1
            out[(slice(None),) + slots] = self.values[:, lookup[tuple(a)]]
        return out

    def apply_same(self, w) -> np.ndarray:
        """``D^k f(x)(w, ..., w)``; ``w`` may be a batch of shape ``(s, n)``."""
        w = np.asarray(w, dtype=np.complex128)
        single = w.ndim == 1
        W = w.reshape(-1, self.nvars)
        A = np.array(self.indices, dtype=np.int64)
        mono = np.prod(W[:, None, :] ** A[None, :, :], axis=2)
        out = (mono * self.weights) @ self.values.T
        return out[0] if single else out

    def unfolding_frobenius(self, left=None) -> float:
        """Frobenius norm of the mode-1 unfolding of ``left @ D^k f(x) / k!``.

        ``left`` is an optional matrix applied to the output slot. This
        bounds the tensor operator norm from above.
        """
        vals = self.values / math.factorial(self.order)
        if left is not None:
            vals = left @ vals
        col = np.sum(np.abs(vals) ** 2, axis=0)
        return float(np.sqrt(np.dot(self.weights, col)))


def derivative_tensor(f: PolySystem, x, k: int) -> DerivTensor:
    """The order-``k`` derivative tensor of ``f`` at ``x`` (``k=1``: Jacobian)."""
    return TaylorExpansion(f, x).tensor(k)


def jacobian(f: PolySystem, x) -> np.ndarray:
    t = derivative_tensor(f, x, 1)
    # order-1 indices are e_{n-1}, ..., e_0 in lex order
    J = np.zeros((f.neqs, f.nvars), dtype=np.complex128)
    for col, a in enumerate(t.indices):
        J[:, a.index(1)] = t.values[:, col]
    return J


def apply_tensor(T: DerivTensor, vectors: Sequence) -> np.ndarray:
    """Multilinear application ``T(v_1, ..., v_k)``."""
    if len(vectors) != T.order:
        raise ValueError(f"tensor of order {T.order} applied to {len(vectors)} vectors")
    vecs = [np.asarray(v, dtype=np.complex128).ravel() for v in vectors]
    for v in vecs:
        if v.shape[0] != T.nvars:
            raise DimensionError("vector length does not match the tensor")
    if all(v is vecs[0] or np.array_equal(v, vecs[0]) for v in vecs):
        return T.apply_same(vecs[0])
    out = T.expand()
    for v in reversed(vecs):
        out = out @ v
    return out


def hessian_tensor(f: PolySystem, x) -> np.ndarray:
    """Dense ``(neqs, n, n)`` array of second partials at ``x``."""
    return derivative_tensor(f, x, 2).expand()


def shift_system(f: PolySystem, x, c, H) -> PolySystem:
    """``g(y) = f(y) - c - H (y - x)``.

    Only constant and linear coefficients change, so ``D^k g = D^k f``
    for ``k >= 2`` holds coefficient for coefficient.
    """
    x = _as_point(f, x)
    c = np.asarray(c, dtype=np.complex128).ravel()
    H = np.asarray(H, dtype=np.complex128)
    if c.shape[0] != f.neqs or H.shape != (f.neqs, f.nvars):
        raise DimensionError("c must have neqs entries and H shape (neqs, nvars)")
    n = f.nvars
    polys = []
    for i, p in enumerate(f.polys):
        terms = dict(p.terms)
        zero = (0,) * n
        terms[zero] = terms.get(zero, 0) - c[i] + complex(H[i] @ x)
        for j in range(n):
            if H[i, j] != 0:
                e = tuple(1 if q == j else 0 for q in range(n))
                terms[e] = terms.get(e, 0) - H[i, j]
        polys.append(Polynomial(terms, n))
    return PolySystem(tuple(polys), f.varnames)


def taylor_norm_bound(f: PolySystem, x, R: float) -> float:
    """Upper bound on ``max_{|y-x| <= R} |f(y)|``.

    Sums ``|D^k f(x)/k!|_F R^k`` over ``k = 0..deg`` with the unfolding
    Frobenius norm, which dominates the tensor operator norm.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    ex = TaylorExpansion(f, x)
    total = float(np.linalg.norm(ex.value()))
    for k in range(1, f.degree + 1):
        total += ex.tensor(k).unfolding_frobenius() * R ** k
    return total
