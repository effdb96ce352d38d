"""Exact base fields and the truncated polynomial rings k[t]/(t^n).

Everything here is exact: rationals are ``gmpy2.mpq`` values (parsed via
:class:`fractions.Fraction`), prime fields use the small :class:`ModP` value type below.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import numbers
import re

from gmpy2 import mpq


class ModP:
    """An element of Z/pZ."""

    __slots__ = ("v", "p")

    def __init__(self, v, p):
        self.p = p
        self.v = int(v) % p

    def _coerce(self, other):
        if isinstance(other, ModP):
            if other.p != self.p:
                raise ValueError("mixing prime fields %d and %d" % (self.p, other.p))
            return other.v
        if isinstance(other, int):
            return other % self.p
        if isinstance(other, numbers.Rational):
            return int(other.numerator) * pow(int(other.denominator), -1, self.p) % self.p
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ModP(self.v + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ModP(self.v - o, self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ModP(o - self.v, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ModP(self.v * o, self.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o == 0:
            raise ZeroDivisionError("division by zero in GF(%d)" % self.p)
        return ModP(self.v * pow(o, -1, self.p), self.p)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.v == 0:
            raise ZeroDivisionError("division by zero in GF(%d)" % self.p)
        return ModP(o * pow(self.v, -1, self.p), self.p)

    def __neg__(self):
        return ModP(-self.v, self.p)

    def __pos__(self):
        return self

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return self.v == o

    def __hash__(self):
        return hash((self.v, self.p))

    def __bool__(self):
        return self.v != 0

    def __repr__(self):
        return "ModP(%d, %d)" % (self.v, self.p)

    def __str__(self):
        return str(self.v)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class Field:
    """Either the rationals (``char == 0``) or a prime field GF(p)."""

    char: int = 0

    def __post_init__(self):
        if self.char != 0 and not _is_prime(self.char):
            raise ValueError("GF(%d): characteristic must be prime" % self.char)

    @classmethod
    def rationals(cls) -> "Field":
        return cls(0)

    @classmethod
    def prime(cls, p: int) -> "Field":
        return cls(p)

    @property
    def name(self) -> str:
        return "QQ" if self.char == 0 else "GF(%d)" % self.char

    def __call__(self, x):
        if self.char == 0:
            if isinstance(x, ModP):
                raise TypeError("cannot coerce a GF(p) element into QQ")
            return mpq(Fraction(x)) if isinstance(x, str) else mpq(x)
        if isinstance(x, ModP):
            if x.p != self.char:
                raise ValueError("wrong prime field")
            return x
        if isinstance(x, str):
            x = Fraction(x)
        if isinstance(x, numbers.Rational) and not isinstance(x, int):
            return ModP(int(x.numerator), self.char) / ModP(int(x.denominator), self.char)
        return ModP(x, self.char)

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def parse(self, s: str):
        return self(Fraction(s.strip()))

    def format(self, x) -> str:
        if self.char == 0:
            x = Fraction(x)
            if x.denominator == 1:
                return str(x.numerator)
            return "%d/%d" % (x.numerator, x.denominator)
        return str(self(x).v)


Weight = tuple  # grading vectors are plain int tuples


def wadd(a: Weight, b: Weight) -> Weight:
    return tuple(x + y for x, y in zip(a, b))


def wsub(a: Weight, b: Weight) -> Weight:
    return tuple(x - y for x, y in zip(a, b))


def wscale(k: int, a: Weight) -> Weight:
    return tuple(k * x for x in a)


def parse_weight(s: str, rank: int | None = None) -> Weight:
    """``"1"`` -> (1,), ``"1,-2"`` -> (1, -2)."""
    s = s.strip().strip("()")
    w = tuple(int(p) for p in s.split(","))
    if rank is not None and len(w) != rank:
        raise ValueError("weight %r has %d components, expected %d" % (s, len(w), rank))
    return w


def format_weight(w: Weight) -> str:
    return ",".join(str(x) for x in w)


@dataclass(frozen=True)
class ArtinRing:
    """R = k[t]/(t^order), with t of grading weight ``t_weight``.

    ``order == 1`` is the base field itself.
    """

    field: Field
    order: int
    t_weight: Weight = (0,)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("nilpotency order must be positive")

    def with_order(self, n: int) -> "ArtinRing":
        return ArtinRing(self.field, n, self.t_weight)

    def element(self, coeffs) -> "ArtinElement":
        coeffs = [self.field(c) for c in coeffs][: self.order]
        coeffs += [self.field.zero] * (self.order - len(coeffs))
        return ArtinElement(self, tuple(coeffs))

    def parse(self, s: str) -> "ArtinElement":
        """Parse ``a0 + a1*t + a2*t^2`` (any term order, coefficients may be fractions)."""
        coeffs = [self.field.zero] * self.order
        s = s.replace(" ", "")
        if not s:
            raise ValueError("empty scalar")
        for sign, body in re.findall(r"([+-]?)([^+-]+)", s):
            c = Fraction(1)
            j = 0
            for factor in body.split("*"):
                m = re.fullmatch(r"t(?:\^(\d+))?", factor)
                if m:
                    j += int(m.group(1) or 1)
                else:
                    c *= Fraction(factor)
            if sign == "-":
                c = -c
            if j < self.order:
                coeffs[j] += self.field(c)
        return ArtinElement(self, tuple(coeffs))


@dataclass(frozen=True)
class ArtinElement:
    ring: ArtinRing
    coeffs: tuple

    def __add__(self, other):
        return ArtinElement(self.ring, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        return ArtinElement(self.ring, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return ArtinElement(self.ring, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        n = self.ring.order
        out = [self.ring.field.zero] * n
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs[: n - i]):
                out[i + j] += a * b
        return ArtinElement(self.ring, tuple(out))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __str__(self):
        fmt = self.ring.field.format
        parts = []
        for j, c in enumerate(self.coeffs):
            if not c:
                continue
            if j == 0:
                parts.append(fmt(c))
            else:
                tp = "t" if j == 1 else "t^%d" % j
                parts.append(tp if c == 1 else "%s*%s" % (fmt(c), tp))
        if not parts:
            return "0"
        return " + ".join(parts).replace("+ -", "- ")


@dataclass(frozen=True)
class SmallExtension:
    """The surjection k[t]/(t^(n+1)) -> k[t]/(t^n); its kernel J = (t^n) is one-dimensional."""

    source: ArtinRing
    target: ArtinRing

    def __post_init__(self):
        if self.source.order != self.target.order + 1:
            raise ValueError("a small extension raises the nilpotency order by exactly one")
        if self.source.field != self.target.field or self.source.t_weight != self.target.t_weight:
            raise ValueError("small extension must keep the base field and the weight of t")

    @classmethod
    def above(cls, ring: ArtinRing) -> "SmallExtension":
        return cls(ring.with_order(ring.order + 1), ring)

    @property
    def ideal_power(self) -> int:
        """J is generated by t^ideal_power."""
        return self.target.order


def reduce_scalar(x: ArtinElement, target: ArtinRing) -> ArtinElement:
    if target.order > x.ring.order:
        raise ValueError("cannot reduce from order %d to larger order %d" % (x.ring.order, target.order))
    if target.field != x.ring.field:
        raise ValueError("base fields differ")
    return ArtinElement(target, x.coeffs[: target.order])


def canonical_lift(x: ArtinElement, target: ArtinRing) -> ArtinElement:
    """Coefficient-preserving section of the truncation map."""
    if target.order < x.ring.order:
        raise ValueError("lift target must have order >= source order")
    pad = (x.ring.field.zero,) * (target.order - x.ring.order)
    return ArtinElement(target, x.coeffs + pad)


class NotNilpotentError(ValueError):
    pass


def flat_rank_pattern(action, order: int, field: Field | None = None):
    """Freeness of a finite k[t]/(t^order)-module given the matrix of t.

    ``action`` is a square matrix (list of rows).  Returns ``(is_free, rank)``;
    rank is ``None`` when the module is not free.
    """
    from . import linalg

    dim = len(action)
    if field is None:
        field = Field.rationals()
    mat = [[field(c) for c in row] for row in action]
    power = linalg.identity(dim, field)
    kernel_dims = []
    for _ in range(order):
        power = linalg.matmul(mat, power) if dim else power
        kernel_dims.append(dim - linalg.rank_dense(power))
    if dim and kernel_dims[-1] != dim:
        raise NotNilpotentError("t-action is not nilpotent of order <= %d" % order)
    if dim % order:
        return False, None
    rank = dim // order
    ok = all(kernel_dims[j] == (j + 1) * rank for j in range(order))
    return (True, rank) if ok else (False, None)


@dataclass(frozen=True)
class Window:
    """A box of grading weights: one inclusive ``(lo, hi)`` interval per component."""

    ranges: tuple

    @classmethod
    def parse(cls, text: str) -> "Window":
        """``"-6:6"`` or ``"-3:3,0:2"``."""
        out = []
        for part in text.split(","):
            lo, _, hi = part.strip().partition(":")
            if not _:
                raise ValueError("window component %r must look like lo:hi" % part)
            out.append((int(lo), int(hi)))
        return cls(tuple(out))

    @classmethod
    def interval(cls, lo: int, hi: int) -> "Window":
        return cls(((lo, hi),))

    def __post_init__(self):
        for lo, hi in self.ranges:
            if lo > hi:
                raise ValueError("empty window component %d:%d" % (lo, hi))

    @property
    def rank(self) -> int:
        return len(self.ranges)

    def weights(self) -> list:
        out = [()]
        for lo, hi in self.ranges:
            out = [w + (x,) for w in out for x in range(lo, hi + 1)]
        return out

    def __contains__(self, w) -> bool:
        return len(w) == self.rank and all(lo <= x <= hi for x, (lo, hi) in zip(w, self.ranges))

    def extend(self, step: Weight, times: int) -> "Window":
        """Smallest box containing ``W + j*step`` for ``0 <= j <= times``."""
        return Window(tuple((min(lo, lo + times * s), max(hi, hi + times * s))
                            for (lo, hi), s in zip(self.ranges, step)))

    def __str__(self):
        return ",".join("%d:%d" % r for r in self.ranges)
