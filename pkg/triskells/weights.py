"""
Weight monoids, weights, measure maps and series summation.

A weight is an element of a monoid Omega, tagged with the monoid it belongs to.
Numeric monoids (nonneg-real, signed-real, complex, rational) store a Python
number; ``signed-pair-of(base)`` stores a ``(sign, base_payload)`` tuple; the
unit monoid stores ``1``. The absorbing zero of Omega^0 is the distinguished
``ZERO`` weight, which carries no monoid: a numeric payload equal to zero is
always normalised to it.

Measure maps push weights into a numeric codomain (exact rationals, floating
reals or complex numbers) where traces and determinants are summed.
"""

import logging
import math
import operator
from collections.abc import Sized
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import reduce
from typing import Any, Callable, Iterable, Optional, Tuple, Union

from .config import settings
from .errors import (
    InvalidWeight,
    MeasureError,
    MonoidMismatch,
    NoAddition,
    SeriesDivergence,
    UnsignedMonoid,
)

logger = logging.getLogger(__name__)

# Consecutive small terms before an open-ended series counts as settled
SETTLE_STEPS = 3

NumericValue = Union[Fraction, float, complex]


class Codomain(str, Enum):
    RATIONAL = "rational"
    REAL = "real"
    COMPLEX = "complex"

    @property
    def zero(self) -> NumericValue:
        return {"rational": Fraction(0), "real": 0.0, "complex": 0j}[self.value]

    @property
    def one(self) -> NumericValue:
        return {"rational": Fraction(1), "real": 1.0, "complex": 1 + 0j}[self.value]

    def coerce(self, value: Any) -> NumericValue:
        """Bring a number into this codomain, refusing lossy conversions."""
        if self is Codomain.RATIONAL:
            if isinstance(value, (int, Fraction)):
                return Fraction(value)
            raise MeasureError(f"{value!r} is not an exact rational")
        if self is Codomain.REAL:
            if isinstance(value, complex):
                if value.imag != 0:
                    raise MeasureError(f"{value!r} is not real")
                value = value.real
            return float(value)
        return complex(value)


class MonoidKind(str, Enum):
    UNIT = "unit"
    NONNEG_REAL = "nonneg-real"
    SIGNED_REAL = "signed-real"
    COMPLEX = "complex"
    RATIONAL = "rational"
    SIGNED_PAIR = "signed-pair"


_NUMERIC_KINDS = (MonoidKind.NONNEG_REAL, MonoidKind.SIGNED_REAL, MonoidKind.COMPLEX, MonoidKind.RATIONAL)
_PAIRABLE_WITH_ADDITION = (MonoidKind.NONNEG_REAL, MonoidKind.SIGNED_REAL, MonoidKind.RATIONAL)


@dataclass(frozen=True)
class WeightMonoid:
    """Descriptor of a weight monoid; ``base`` is set only for signed pairs."""

    kind: MonoidKind
    base: Optional["WeightMonoid"] = None

    def __post_init__(self):
        if (self.kind is MonoidKind.SIGNED_PAIR) != (self.base is not None):
            raise InvalidWeight("signed-pair monoids (and only they) need a base monoid")

    @property
    def tag(self) -> str:
        if self.kind is MonoidKind.SIGNED_PAIR:
            return f"signed-pair-of({self.base.tag})"
        return self.kind.value

    @property
    def is_signed(self) -> bool:
        return self.kind in (MonoidKind.SIGNED_REAL, MonoidKind.COMPLEX, MonoidKind.RATIONAL, MonoidKind.SIGNED_PAIR)

    @property
    def codomain(self) -> Codomain:
        """Numeric codomain of the canonical embedding."""
        if self.kind is MonoidKind.SIGNED_PAIR:
            return self.base.codomain
        if self.kind in (MonoidKind.UNIT, MonoidKind.RATIONAL):
            return Codomain.RATIONAL
        if self.kind is MonoidKind.COMPLEX:
            return Codomain.COMPLEX
        return Codomain.REAL

    @property
    def has_addition(self) -> bool:
        if self.kind is MonoidKind.SIGNED_PAIR:
            return self.base.kind in _PAIRABLE_WITH_ADDITION
        return self.kind in _NUMERIC_KINDS

    def __str__(self) -> str:
        return self.tag


UNIT = WeightMonoid(MonoidKind.UNIT)
NONNEG_REAL = WeightMonoid(MonoidKind.NONNEG_REAL)
SIGNED_REAL = WeightMonoid(MonoidKind.SIGNED_REAL)
COMPLEX = WeightMonoid(MonoidKind.COMPLEX)
RATIONAL = WeightMonoid(MonoidKind.RATIONAL)


def signed_pair(base: WeightMonoid) -> WeightMonoid:
    """The monoid {-1,+1} x base."""
    if base.kind is MonoidKind.SIGNED_PAIR:
        raise InvalidWeight("signed pairs do not nest")
    return WeightMonoid(MonoidKind.SIGNED_PAIR, base)


def parse_monoid(tag: str) -> WeightMonoid:
    tag = tag.strip()
    prefix = "signed-pair-of("
    if tag.startswith(prefix) and tag.endswith(")"):
        return signed_pair(parse_monoid(tag[len(prefix):-1]))
    try:
        kind = MonoidKind(tag)
    except ValueError:
        raise InvalidWeight(f"unknown monoid {tag!r}") from None
    if kind is MonoidKind.SIGNED_PAIR:
        raise InvalidWeight("signed-pair needs a base: signed-pair-of(<base>)")
    return WeightMonoid(kind)


@dataclass(frozen=True)
class Weight:
    """A tagged monoid element. ``monoid is None`` marks the absorbing zero."""

    monoid: Optional[WeightMonoid]
    value: Any = None

    @property
    def is_zero(self) -> bool:
        return self.monoid is None

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        return _payload_str(self.monoid, self.value)


ZERO = Weight(None, None)


def _payload_str(monoid: WeightMonoid, value: Any) -> str:
    if monoid.kind is MonoidKind.UNIT:
        return "1"
    if monoid.kind is MonoidKind.SIGNED_PAIR:
        sign, inner = value
        return ("+" if sign > 0 else "-") + _payload_str(monoid.base, inner)
    if isinstance(value, complex):
        return f"{value.real:g}{value.imag:+g}i"
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)


def _finite(value: Any) -> bool:
    if isinstance(value, complex):
        return math.isfinite(value.real) and math.isfinite(value.imag)
    if isinstance(value, float):
        return math.isfinite(value)
    return True


def _coerce_payload(monoid: WeightMonoid, value: Any) -> Any:
    """Validate a payload; ``None`` means the payload is the absorbing zero."""
    kind = monoid.kind
    if kind is MonoidKind.UNIT:
        if value is None or value == 1:
            return 1
        raise InvalidWeight(f"unit monoid has a single element, got {value!r}")
    if kind is MonoidKind.SIGNED_PAIR:
        if not isinstance(value, (tuple, list)) or len(value) != 2 or value[0] not in (1, -1):
            raise InvalidWeight(f"{monoid.tag} payload must be (sign, base value), got {value!r}")
        inner = _coerce_payload(monoid.base, value[1])
        return None if inner is None else (int(value[0]), inner)
    try:
        if kind is MonoidKind.RATIONAL:
            payload = Fraction(value)
        elif kind is MonoidKind.COMPLEX:
            payload = complex(value)
        else:
            if isinstance(value, complex):
                raise TypeError("complex value")
            payload = float(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InvalidWeight(f"{value!r} is not an element of {monoid.tag}: {exc}") from None
    if not _finite(payload):
        raise InvalidWeight(f"non-finite payload {value!r}")
    if payload == 0:
        return None
    if kind is MonoidKind.NONNEG_REAL and payload < 0:
        raise InvalidWeight(f"{value!r} is negative")
    return payload


def make_weight(monoid: WeightMonoid, value: Any = None) -> Weight:
    """Validating constructor; zero payloads become ``ZERO``."""
    payload = _coerce_payload(monoid, value)
    return ZERO if payload is None else Weight(monoid, payload)


def _same_monoid(a: Weight, b: Weight) -> WeightMonoid:
    if a.monoid != b.monoid:
        raise MonoidMismatch(f"cannot combine {a.monoid} with {b.monoid}")
    return a.monoid


def _product(monoid: WeightMonoid, x: Any, y: Any) -> Any:
    if monoid.kind is MonoidKind.UNIT:
        return 1
    if monoid.kind is MonoidKind.SIGNED_PAIR:
        inner = _product(monoid.base, x[1], y[1])
        return None if inner is None else (x[0] * y[0], inner)
    value = x * y
    return None if value == 0 else value


def w_mul(a: Weight, b: Weight) -> Weight:
    if a.is_zero or b.is_zero:
        return ZERO
    monoid = _same_monoid(a, b)
    payload = _product(monoid, a.value, b.value)
    return ZERO if payload is None else Weight(monoid, payload)


def w_neg(a: Weight) -> Weight:
    if a.is_zero:
        return ZERO
    if not a.monoid.is_signed:
        raise UnsignedMonoid(f"{a.monoid} has no sign structure")
    if a.monoid.kind is MonoidKind.SIGNED_PAIR:
        sign, inner = a.value
        return Weight(a.monoid, (-sign, inner))
    return Weight(a.monoid, -a.value)


def w_unit(monoid: WeightMonoid) -> Weight:
    if monoid.kind is MonoidKind.SIGNED_PAIR:
        return Weight(monoid, (1, w_unit(monoid.base).value))
    return make_weight(monoid, 1)


def w_minus_one(monoid: WeightMonoid) -> Weight:
    return w_neg(w_unit(monoid))


def apply_sign(sign: int, a: Weight) -> Weight:
    return a if sign > 0 else w_neg(a)


def w_prod(weights: Iterable[Weight], monoid: WeightMonoid) -> Weight:
    """Ordered product; the empty product is the unit."""
    return reduce(w_mul, weights, w_unit(monoid))


def to_numeric(a: Weight, monoid: Optional[WeightMonoid] = None) -> NumericValue:
    """Canonical embedding of a weight into its numeric codomain."""
    if a.is_zero:
        return (monoid.codomain if monoid else Codomain.RATIONAL).zero
    return _embed_payload(a.monoid, a.value)


def _embed_payload(monoid: WeightMonoid, value: Any) -> NumericValue:
    if monoid.kind is MonoidKind.UNIT:
        return Fraction(1)
    if monoid.kind is MonoidKind.SIGNED_PAIR:
        sign, inner = value
        embedded = _embed_payload(monoid.base, inner)
        return embedded if sign > 0 else -embedded
    return value


def from_numeric(monoid: WeightMonoid, value: NumericValue) -> Weight:
    """Inverse of the embedding for monoids with addition."""
    if value == 0:
        return ZERO
    if monoid.kind in _NUMERIC_KINDS:
        return make_weight(monoid, value)
    if monoid.kind is MonoidKind.SIGNED_PAIR and monoid.base.kind in _PAIRABLE_WITH_ADDITION + (MonoidKind.UNIT,):
        if isinstance(value, complex):
            raise InvalidWeight(f"{value!r} has no sign decomposition")
        sign = 1 if value > 0 else -1
        return make_weight(monoid, (sign, abs(value)))
    raise NoAddition(f"{monoid} has no numeric addition")


def w_add(a: Weight, b: Weight) -> Weight:
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    monoid = _same_monoid(a, b)
    if not monoid.has_addition:
        raise NoAddition(f"{monoid} has no addition")
    return from_numeric(monoid, to_numeric(a) + to_numeric(b))


def conjugate(a: Weight) -> Weight:
    if a.is_zero:
        return a
    if a.monoid.kind is MonoidKind.COMPLEX:
        return Weight(a.monoid, a.value.conjugate())
    if a.monoid.kind is MonoidKind.SIGNED_PAIR and a.monoid.base.kind is MonoidKind.COMPLEX:
        sign, inner = a.value
        return Weight(a.monoid, (sign, inner.conjugate()))
    return a


def weight_key(a: Weight) -> Tuple:
    """Total order on weights, used to sort canonical forms."""
    if a.is_zero:
        return (0,)
    return (1, a.monoid.tag, _payload_key(a.monoid, a.value))


def _payload_key(monoid: WeightMonoid, value: Any) -> Tuple:
    if monoid.kind is MonoidKind.UNIT:
        return ()
    if monoid.kind is MonoidKind.SIGNED_PAIR:
        return (value[0], _payload_key(monoid.base, value[1]))
    if isinstance(value, complex):
        return (value.real, value.imag)
    return (value,)


def numeric_close(x: NumericValue, y: NumericValue, tol: Optional[float] = None) -> bool:
    """Exact equality for rationals, absolute tolerance otherwise."""
    if isinstance(x, (int, Fraction)) and isinstance(y, (int, Fraction)):
        return x == y
    tol = settings().tol if tol is None else tol
    return abs(complex(x) - complex(y)) <= tol


@dataclass(frozen=True)
class MeasureMap:
    """A map m from a weight monoid into a numeric codomain."""

    name: str
    source: WeightMonoid
    codomain: Codomain
    rule: Callable[[NumericValue], NumericValue] = field(compare=False, repr=False)
    multiplicative: bool = True
    maps_minus_one: bool = False


def measure_map(name: str, monoid: WeightMonoid) -> MeasureMap:
    """Named measure maps: ``identity`` (the embedding) and ``abs``."""
    if name == "identity":
        return MeasureMap("identity", monoid, monoid.codomain, lambda v: v,
                          multiplicative=True, maps_minus_one=monoid.is_signed)
    if name == "abs":
        codomain = Codomain.RATIONAL if monoid.codomain is Codomain.RATIONAL else Codomain.REAL
        return MeasureMap("abs", monoid, codomain, abs, multiplicative=True, maps_minus_one=False)
    raise MeasureError(f"unknown measure map {name!r}")


def measure(m: MeasureMap, a: Weight) -> NumericValue:
    if a.is_zero:
        return m.codomain.zero
    if a.monoid != m.source:
        raise MonoidMismatch(f"measure {m.name} reads {m.source}, got {a.monoid}")
    return m.codomain.coerce(m.rule(to_numeric(a)))


def check_multiplicative(m: MeasureMap, pairs: Iterable[Tuple[Weight, Weight]], tol: Optional[float] = None) -> bool:
    """m(a.b) = m(a).m(b) on every sampled pair."""
    for a, b in pairs:
        if not numeric_close(measure(m, w_mul(a, b)), measure(m, a) * measure(m, b), tol):
            return False
    return True


def sum_series(terms: Iterable[NumericValue], tol: Optional[float] = None,
               max_terms: Optional[int] = None) -> NumericValue:
    """Sum a stream of numbers.

    A sized collection is folded exactly. An iterator is folded term by term and
    stops early once ``SETTLE_STEPS`` consecutive nonzero terms were each smaller
    than ``tol``; exact zeros neither settle nor reset the count, so a stream that
    ends before settling is its exact left fold. SeriesDivergence is raised once
    ``max_terms`` terms were consumed without settling.
    """
    if isinstance(terms, Sized):
        return reduce(operator.add, terms, Fraction(0))
    tol = settings().tol if tol is None else tol
    max_terms = settings().max_terms if max_terms is None else max_terms
    total: NumericValue = Fraction(0)
    small = 0
    for count, term in enumerate(terms, start=1):
        total = total + term
        if term != 0:
            small = small + 1 if abs(term) < tol else 0
            if small >= SETTLE_STEPS:
                logger.debug("series settled after %d terms", count)
                return total
        if count >= max_terms:
            raise SeriesDivergence(f"no convergence to {tol:g} within {max_terms} terms")
    return total


def positive_weight(monoid: WeightMonoid, value: NumericValue) -> Weight:
    """The weight of ``monoid`` embedding to the positive number ``value``.

    The unit monoid only has 1, whatever ``value`` is asked for.
    """
    if monoid.kind is MonoidKind.UNIT:
        return w_unit(monoid)
    if monoid.kind is MonoidKind.SIGNED_PAIR:
        inner = positive_weight(monoid.base, value)
        return Weight(monoid, (1, inner.value))
    return make_weight(monoid, value)
