"""
Sparse multivariate polynomials over two coefficient domains
Exact rationals for geometry, complex doubles for numeric solving
"""

import ast
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations
from sympy.polys.polyerrors import BasePolynomialError

from error_handler import (
    DimensionMismatchError,
    IndexOutOfRangeError,
    NegativeExponentError,
    PolynomialSyntaxError,
    UnknownVariableError,
    ZeroDirectionError,
    ZeroPolynomialError,
)
from exact_linalg import to_fraction, to_rational

EXACT = "exact"
NUMERIC = "numeric"

ExponentVector = Tuple[int, ...]
Coefficient = Union[Fraction, complex]
SupportSet = FrozenSet[ExponentVector]


def _grlex_key(exponents: ExponentVector):
    # descending total degree, then descending lexicographic
    return (-sum(exponents), tuple(-e for e in exponents))


@dataclass(frozen=True)
class Polynomial:
    """Immutable sparse polynomial; terms are kept in graded lexicographic order"""

    arity: int
    terms: Tuple[Tuple[ExponentVector, Coefficient], ...]
    domain: str = EXACT

    @classmethod
    def from_terms(cls, arity: int, terms: Union[Mapping, Iterable], domain: str = EXACT) -> "Polynomial":
        """Collect like terms, drop zeros and canonicalize"""
        if arity < 1:
            raise DimensionMismatchError(f"arity must be positive, got {arity}")
        items = terms.items() if isinstance(terms, Mapping) else terms
        collected: Dict[ExponentVector, Coefficient] = {}
        for exponents, coeff in items:
            exponents = tuple(int(e) for e in exponents)
            if len(exponents) != arity:
                raise DimensionMismatchError(
                    f"exponent vector {exponents} has length {len(exponents)}, expected {arity}")
            if any(e < 0 for e in exponents):
                raise NegativeExponentError(f"negative exponent in {exponents}", 0)
            coeff = Fraction(coeff) if domain == EXACT else complex(coeff)
            collected[exponents] = collected.get(exponents, 0) + coeff
        ordered = sorted(((e, c) for e, c in collected.items() if c != 0),
                         key=lambda item: _grlex_key(item[0]))
        return cls(arity, tuple(ordered), domain)

    @classmethod
    def from_sympy(cls, poly: sp.Poly) -> "Polynomial":
        """Exact polynomial from a sympy Poly over QQ; its generators become the variables in order"""
        return cls.from_terms(len(poly.gens),
                              [(monom, to_fraction(coeff)) for monom, coeff in poly.terms()])

    @classmethod
    def zero(cls, arity: int, domain: str = EXACT) -> "Polynomial":
        return cls.from_terms(arity, {}, domain)

    @classmethod
    def constant(cls, arity: int, value, domain: str = EXACT) -> "Polynomial":
        return cls.from_terms(arity, {(0,) * arity: value}, domain)

    @classmethod
    def monomial(cls, arity: int, exponents: Sequence[int], coeff=1, domain: str = EXACT) -> "Polynomial":
        return cls.from_terms(arity, {tuple(exponents): coeff}, domain)

    @classmethod
    def variable(cls, arity: int, index: int, domain: str = EXACT) -> "Polynomial":
        exponents = [0] * arity
        exponents[index] = 1
        return cls.monomial(arity, exponents, 1, domain)

    @property
    def coefficients(self) -> Dict[ExponentVector, Coefficient]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e, _ in self.terms)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial"""
        return max((sum(e) for e, _ in self.terms), default=-1)

    def _check_domain(self, other: "Polynomial"):
        if other.arity != self.arity:
            raise DimensionMismatchError(f"arity {self.arity} vs {other.arity}")
        if other.domain != self.domain:
            raise TypeError("mixing coefficient domains; call to_numeric() first")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check_domain(other)
            return other
        return Polynomial.constant(self.arity, other, self.domain)

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        return Polynomial.from_terms(self.arity, list(self.terms) + list(other.terms), self.domain)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.arity, tuple((e, -c) for e, c in self.terms), self.domain)

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        other = self._coerce(other)
        products = [
            (tuple(a + b for a, b in zip(e1, e2)), c1 * c2)
            for e1, c1 in self.terms
            for e2, c2 in other.terms
        ]
        return Polynomial.from_terms(self.arity, products, self.domain)

    __rmul__ = __mul__

    def lift(self, arity: int, offset: int = 0) -> "Polynomial":
        """Embed into `arity` variables, placing the old variables at `offset`"""
        if offset < 0 or offset + self.arity > arity:
            raise DimensionMismatchError(f"cannot embed arity {self.arity} into {arity} at {offset}")
        pad_left = (0,) * offset
        pad_right = (0,) * (arity - offset - self.arity)
        return Polynomial(arity, tuple(
            (pad_left + e + pad_right, c) for e, c in self.terms), self.domain)

    def to_numeric(self) -> "Polynomial":
        """Explicit exact -> numeric conversion; numeric -> exact does not exist"""
        if self.domain == NUMERIC:
            return self
        return Polynomial(self.arity, tuple((e, complex(c)) for e, c in self.terms), NUMERIC)

    def exponent_matrix(self) -> np.ndarray:
        return np.array([e for e, _ in self.terms], dtype=np.int64).reshape(len(self.terms), self.arity)

    def coefficient_array(self) -> np.ndarray:
        return np.array([complex(c) for _, c in self.terms], dtype=np.complex128)

    def to_text(self, variables: Optional[Sequence[str]] = None) -> str:
        """Print against the problem-file grammar"""
        names = list(variables) if variables else [f"x{i + 1}" for i in range(self.arity)]
        if len(names) != self.arity:
            raise DimensionMismatchError(f"{len(names)} names for arity {self.arity}")
        if not self.terms:
            return "0"
        pieces = []
        for exponents, coeff in self.terms:
            factors = [name if e == 1 else f"{name}^{e}"
                       for name, e in zip(names, exponents) if e > 0]
            sign, magnitude = _split_sign(coeff)
            if not factors:
                body = _format_coefficient(magnitude)
            elif magnitude == 1:
                body = "*".join(factors)
            else:
                body = _format_coefficient(magnitude) + "*" + "*".join(factors)
            pieces.append((sign, body))
        first_sign, first_body = pieces[0]
        text = ("-" if first_sign < 0 else "") + first_body
        for sign, body in pieces[1:]:
            text += (" - " if sign < 0 else " + ") + body
        return text

    def __str__(self) -> str:
        return self.to_text()


def _split_sign(coeff: Coefficient):
    if isinstance(coeff, Fraction):
        return (-1, -coeff) if coeff < 0 else (1, coeff)
    return 1, coeff


def _format_coefficient(value: Coefficient) -> str:
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    return f"({value.real!r}{value.imag:+}j)"


# --- parsing -----------------------------------------------------------------

_FOREIGN = re.compile(r"[^A-Za-z0-9_\s+\-*/^?]")
_NEGATIVE_EXPONENT = re.compile(r"\^\s*(-)")
_ZERO_DENOMINATOR = re.compile(r"/\s*(0+)(?!\w)")
# '?' coefficients and coefficients written against a factor ("3x", "? y")
_JUXTAPOSED = re.compile(
    r"(?P<mark>\?)(?P<gap>\s*(?=[A-Za-z0-9_?]))?"
    r"|(?<![\w.])(?P<num>\d+)(?=\s*[A-Za-z_?])")
_PLACEHOLDER = "_coeff"
_TRANSFORMATIONS = standard_transformations + (convert_xor,)
_BINARY_OPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.BitXor)
_UNARY_OPS = (ast.UAdd, ast.USub)


def _normalize(text: str) -> Tuple[str, List[int], int]:
    """
    Rewrite into sympy-parsable text: '?' becomes a numbered placeholder and
    juxtaposed coefficients get an explicit '*'. Returns the rewritten text,
    the source position of each rewritten character (plus one end entry)
    and the number of placeholders
    """
    pieces, origin = [], []
    count = last = 0
    for match in _JUXTAPOSED.finditer(text):
        start, end = match.span()
        pieces.append(text[last:start])
        origin.extend(range(last, start))
        if match.group("mark"):
            chunk = f"{_PLACEHOLDER}{count}" + ("*" if match.group("gap") is not None else "")
            count += 1
            origin.extend([start] * len(chunk))
        else:
            chunk = match.group("num") + "*"
            origin.extend(list(range(start, end)) + [end])
        pieces.append(chunk)
        last = end
    pieces.append(text[last:])
    origin.extend(range(last, len(text) + 1))
    return "".join(pieces), origin, count


def _check_grammar(rewritten: str, origin: List[int], variables: Sequence[str], placeholders: int):
    """Sums of signed products of integers, variables and powers; nothing else"""
    def at(offset: int) -> int:
        return origin[min(max(offset, 0), len(origin) - 1)]

    try:
        tree = ast.parse(rewritten.strip(), mode="eval")
    except SyntaxError as e:
        indent = len(rewritten) - len(rewritten.lstrip())
        raise PolynomialSyntaxError(e.msg, at(indent + (e.offset or 1) - 1)) from None

    indent = len(rewritten) - len(rewritten.lstrip())
    known = set(variables) | {f"{_PLACEHOLDER}{k}" for k in range(placeholders)}
    unknown = []
    for node in ast.walk(tree.body):
        if isinstance(node, (ast.operator, ast.unaryop, ast.expr_context)):
            continue
        if isinstance(node, ast.Name):
            if node.id not in known:
                unknown.append(node)
            continue
        if isinstance(node, ast.BinOp) and isinstance(node.op, _BINARY_OPS):
            continue
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, _UNARY_OPS):
            continue
        if isinstance(node, ast.Constant) and type(node.value) is int:
            continue
        raise PolynomialSyntaxError("not a sum of monomial terms", at(indent + node.col_offset))
    if unknown:
        first = min(unknown, key=lambda node: node.col_offset)
        raise UnknownVariableError(f"unknown variable {first.id!r}", at(indent + first.col_offset))


def parse_polynomial(text: str, variables: Sequence[str],
                     coefficient_sampler: Optional[Callable[[], Fraction]] = None) -> Polynomial:
    """Parse polynomial text over the given ordered variable names"""
    if len(set(variables)) != len(variables):
        raise DimensionMismatchError(f"duplicate variable names in {list(variables)}")
    if not text.strip():
        raise PolynomialSyntaxError("empty polynomial", len(text))
    foreign = _FOREIGN.search(text)
    if foreign:
        raise PolynomialSyntaxError(f"unexpected character {foreign.group()!r}", foreign.start())
    negative = _NEGATIVE_EXPONENT.search(text)
    if negative:
        raise NegativeExponentError("negative exponent", negative.start(1))
    zero = _ZERO_DENOMINATOR.search(text)
    if zero:
        raise PolynomialSyntaxError("zero denominator", zero.start(1))
    if "?" in text and coefficient_sampler is None:
        raise PolynomialSyntaxError("random coefficient '?' needs a coefficient sampler", text.index("?"))

    rewritten, origin, placeholders = _normalize(text)
    _check_grammar(rewritten, origin, variables, placeholders)

    gens = [sp.Symbol(name) for name in variables]
    names = dict(zip(variables, gens))
    # placeholders are drawn left to right
    names.update({f"{_PLACEHOLDER}{k}": to_rational(coefficient_sampler())
                  for k in range(placeholders)})
    expr = parse_expr(rewritten.strip(), local_dict=names,
                      global_dict={"Integer": sp.Integer, "Symbol": sp.Symbol},
                      transformations=_TRANSFORMATIONS)
    try:
        poly = sp.Poly(expr, *gens, domain=sp.QQ)
    except BasePolynomialError as e:
        raise PolynomialSyntaxError(f"{expr} is not a polynomial in {', '.join(variables)}", 0) from e
    return Polynomial.from_sympy(poly)


# --- operations ----------------------------------------------------------------

def partial_derivative(p: Polynomial, i: int) -> Polynomial:
    """Formal partial derivative with respect to variable i (0-based)"""
    if not 0 <= i < p.arity:
        raise IndexOutOfRangeError(f"variable index {i} outside 0..{p.arity - 1}")
    terms = []
    for exponents, coeff in p.terms:
        if exponents[i] == 0:
            continue
        lowered = exponents[:i] + (exponents[i] - 1,) + exponents[i + 1:]
        terms.append((lowered, coeff * exponents[i]))
    return Polynomial.from_terms(p.arity, terms, p.domain)


def support(p: Polynomial) -> SupportSet:
    return frozenset(e for e, _ in p.terms)


def _check_direction(p: Polynomial, q: Sequence) -> Tuple:
    q = tuple(q)
    if len(q) != p.arity:
        raise DimensionMismatchError(f"direction of length {len(q)} for arity {p.arity}")
    if all(x == 0 for x in q):
        raise ZeroDirectionError("direction vector is zero")
    return q


def _pairing(q: Sequence, exponents: ExponentVector):
    return sum(a * b for a, b in zip(q, exponents))


def weighted_value(p: Polynomial, q: Sequence):
    """d(q, Gamma(p)) = min over the support of <q, alpha>"""
    q = _check_direction(p, q)
    if p.is_zero():
        raise ZeroPolynomialError("the zero polynomial has no weighted value")
    return min(_pairing(q, e) for e, _ in p.terms)


def face_polynomial(p: Polynomial, q: Sequence) -> Polynomial:
    """Sum of the terms of p attaining min <q, alpha>; zero for p = 0"""
    q = _check_direction(p, q)
    if p.is_zero():
        return p
    minimum = min(_pairing(q, e) for e, _ in p.terms)
    return Polynomial(p.arity, tuple((e, c) for e, c in p.terms if _pairing(q, e) == minimum), p.domain)


def evaluate(p: Polynomial, point: Sequence[complex]) -> complex:
    """Direct evaluation of sum a_alpha x^alpha in complex arithmetic"""
    if len(point) != p.arity:
        raise DimensionMismatchError(f"point of length {len(point)} for arity {p.arity}")
    if p.is_zero():
        return 0j
    x = np.asarray(point, dtype=np.complex128)
    monomials = np.prod(np.power(x[np.newaxis, :], p.exponent_matrix()), axis=1)
    return complex(monomials @ p.to_numeric().coefficient_array())
