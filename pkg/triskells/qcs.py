"""
Quantitative coherence spaces over triskells.

Orthogonality is ``tr_m(t o u) in bot`` for an ``OrthoSpec`` (m, bot). A space
is represented by explicit generator and dual-generator lists; biorthogonal
closures are never computed, so every membership answer here is a necessary
condition (a candidate failing a check is certainly outside the space).
"""

import cmath
import itertools
import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .config import settings
from .errors import CarrierMismatch, InvalidTriskell, MeasureError, SeriesDivergence, SpecMismatch
from .fock import det_m, fock_lift, fock_sym, multisets, tr_m
from .relmat import WeightedMatrix, embed, identity_matrix, m_contract, mat_compose, mat_det, mat_trace, spectral_radius
from .triskell import (
    Carrier,
    Edge,
    Triskell,
    carrier_product,
    carrier_sum,
    compose,
    direct_sum,
    identity,
    partial_identity,
    power,
    scale,
    split_product,
    tensor,
    union,
)
from .weights import (
    MeasureMap,
    MonoidKind,
    NumericValue,
    Weight,
    WeightMonoid,
    measure,
    measure_map,
    numeric_close,
    positive_weight,
    sum_series,
    w_minus_one,
    w_mul,
)

logger = logging.getLogger(__name__)


def _real(value: NumericValue) -> Optional[float]:
    if isinstance(value, complex):
        if abs(value.imag) > settings().tol:
            return None
        return value.real
    return value


@dataclass(frozen=True)
class Interval:
    low: Any
    high: Any
    closed: bool = False

    @property
    def label(self) -> str:
        return f"{'closed' if self.closed else 'open'}({self.low},{self.high})"

    def __call__(self, value: NumericValue) -> bool:
        x = _real(value)
        if x is None:
            return False
        if self.closed:
            return self.low <= x <= self.high
        return self.low < x < self.high


@dataclass(frozen=True)
class NonZero:
    label: str = "nonzero"

    def __call__(self, value: NumericValue) -> bool:
        return value != 0


@dataclass(frozen=True)
class Predicate:
    """A user-defined acceptance set."""

    label: str
    test: Callable[[NumericValue], bool] = field(compare=False)

    def __call__(self, value: NumericValue) -> bool:
        return bool(self.test(value))


_INTERVAL = re.compile(r"^(open|closed)\(\s*([^,]+?)\s*,\s*([^)]+?)\s*\)$")


def _bound(text: str) -> Any:
    if text in ("inf", "+inf"):
        return math.inf
    if text == "-inf":
        return -math.inf
    return Fraction(text)


def parse_bot(label: str):
    """``open(a,b)``, ``closed(a,b)`` or ``nonzero``."""
    label = label.strip()
    if label == "nonzero":
        return NonZero()
    match = _INTERVAL.match(label)
    if not match:
        raise MeasureError(f"unknown acceptance set {label!r}")
    kind, low, high = match.groups()
    return Interval(_bound(low), _bound(high), closed=(kind == "closed"))


@dataclass(frozen=True)
class OrthoSpec:
    m: MeasureMap
    bot: Any
    label: str = ""

    def accepts(self, value: NumericValue) -> bool:
        return self.bot(value)


def default_spec(monoid: WeightMonoid) -> OrthoSpec:
    """Identity measure with the open unit interval."""
    return OrthoSpec(measure_map("identity", monoid), Interval(0, 1), "identity/open(0,1)")


@dataclass(frozen=True)
class Verdict:
    """Outcome of a membership check; falsy with a witness when it fails."""

    passed: bool
    witness: Any = None
    value: Optional[NumericValue] = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed


def trace_value(t: Triskell, u: Triskell, spec: OrthoSpec) -> NumericValue:
    return tr_m(compose(t, u), spec.m)


def ortho(t: Triskell, u: Triskell, spec: OrthoSpec) -> bool:
    return spec.accepts(trace_value(t, u, spec))


@dataclass(frozen=True)
class QcsSpace:
    web: Carrier
    spec: OrthoSpec
    generators: Tuple[Triskell, ...] = ()
    dual_generators: Tuple[Triskell, ...] = ()
    bounded: bool = False

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "dual_generators", tuple(self.dual_generators))
        for t in self.generators + self.dual_generators:
            if t.source != self.web or t.target != self.web:
                raise CarrierMismatch("every generator must be a triskell over the web")

    @property
    def monoid(self) -> WeightMonoid:
        return self.spec.m.source


def check_space(space: QcsSpace) -> Verdict:
    """Every generator is orthogonal to every dual generator."""
    for i, g in enumerate(space.generators):
        for j, d in enumerate(space.dual_generators):
            value = trace_value(g, d, space.spec)
            if not space.spec.accepts(value):
                return Verdict(False, (i, j), value, f"generator {i} is not orthogonal to dual generator {j}")
    return Verdict(True)


def make_space(web: Carrier, spec: OrthoSpec, generators: Iterable[Triskell] = (),
               dual_generators: Iterable[Triskell] = (), bounded: bool = False) -> QcsSpace:
    """Build a space and enforce the generator/dual-generator orthogonality."""
    space = QcsSpace(web, spec, tuple(generators), tuple(dual_generators), bounded)
    verdict = check_space(space)
    if not verdict:
        raise InvalidTriskell(verdict.detail)
    return space


def polar_check(candidate: Triskell, space: QcsSpace, side: str = "primal") -> Verdict:
    """Orthogonality of ``candidate`` to the listed generators of the opposite side."""
    if side not in ("primal", "dual"):
        raise ValueError(f"side must be 'primal' or 'dual', got {side!r}")
    opposite = space.dual_generators if side == "primal" else space.generators
    for i, other in enumerate(opposite):
        value = trace_value(candidate, other, space.spec)
        if not space.spec.accepts(value):
            return Verdict(False, i, value, f"fails against {'dual ' if side == 'primal' else ''}generator {i}")
    return Verdict(True)


def _same_spec(a: QcsSpace, b: QcsSpace) -> OrthoSpec:
    if a.spec != b.spec:
        raise SpecMismatch(f"{a.spec.label or a.spec} vs {b.spec.label or b.spec}")
    return a.spec


def apply_arrow(f: Triskell, a: Triskell, y: Optional[Carrier] = None) -> Triskell:
    """[F]A: pairs of an F-edge (x,y)->(x',y') and an A-edge x->x', projected to Y."""
    if not a.is_endo or not f.is_endo:
        raise CarrierMismatch("application needs triskells over their webs")
    pairs = split_product(f.source, a.source)
    if y is None:
        y = Carrier(tuple(sorted({py for _, py in pairs.values()})))
    if f.source != carrier_product(a.source, y):
        raise CarrierMismatch("the function web is not the product of the argument web and Y")
    edges = []
    for fe in f.edges:
        x, fy = pairs[fe.src]
        x2, fy2 = pairs[fe.tgt]
        for ae in a.between(x, x2):
            edges.append(Edge(fy, fy2, w_mul(fe.weight, ae.weight)))
    return Triskell(y, y, f.monoid, tuple(edges))


def qcs_tensor(a: QcsSpace, b: QcsSpace, dual_generators: Iterable[Triskell] = ()) -> QcsSpace:
    spec = _same_spec(a, b)
    generators = [tensor(g, h) for g in a.generators for h in b.generators]
    return make_space(carrier_product(a.web, b.web), spec, generators, dual_generators, a.bounded and b.bounded)


def arrow_member(f: Triskell, a: QcsSpace, b: QcsSpace) -> Verdict:
    """For every generator of A, the application [F]A passes B's dual generators."""
    _same_spec(a, b)
    if f.source != carrier_product(a.web, b.web):
        raise CarrierMismatch("F must live on the product of the two webs")
    for i, g in enumerate(a.generators):
        image = apply_arrow(f, g, b.web)
        verdict = polar_check(image, b, "primal")
        if not verdict:
            return Verdict(False, i, verdict.value, f"[F]A{i} {verdict.detail}")
    return Verdict(True)


def _empty(web: Carrier, monoid: WeightMonoid) -> Triskell:
    return Triskell(web, web, monoid)


def qcs_with(a: QcsSpace, b: QcsSpace) -> QcsSpace:
    """Web a + b, generators all sums, dual generators the two injections of the duals."""
    spec = _same_spec(a, b)
    monoid = a.monoid
    generators = [direct_sum(g, h) for g in a.generators for h in b.generators]
    duals = [direct_sum(d, _empty(b.web, monoid)) for d in a.dual_generators]
    duals += [direct_sum(_empty(a.web, monoid), d) for d in b.dual_generators]
    return make_space(carrier_sum(a.web, b.web), spec, generators, duals)


def dual(a: QcsSpace) -> QcsSpace:
    return QcsSpace(a.web, a.spec, a.dual_generators, a.generators, a.bounded)


def qcs_plus(a: QcsSpace, b: QcsSpace) -> QcsSpace:
    """The dual of (dual(a) & dual(b))."""
    return dual(qcs_with(dual(a), dual(b)))


def qcs_bang(a: QcsSpace, degree_bound: Optional[int] = None) -> QcsSpace:
    """Web of bounded multisets, generators the symmetric Fock images."""
    web = multisets(a.web, degree_bound)
    generators = [fock_sym(g, web.degree) for g in a.generators]
    return QcsSpace(web.carrier, a.spec, tuple(generators), ())


def default_weight_grid(monoid: WeightMonoid) -> List[Weight]:
    if monoid.kind is MonoidKind.UNIT:
        return [positive_weight(monoid, 1)]
    return [positive_weight(monoid, Fraction(1, 2 ** i)) for i in range(11)]


def bounded_check(space: QcsSpace, grid: Optional[Sequence[Weight]] = None) -> Verdict:
    """Every web point carries some partial identity from the grid accepted on both sides."""
    grid = list(grid) if grid is not None else default_weight_grid(space.monoid)
    for index, x in enumerate(space.web):
        if not any(polar_check(candidate, space, "primal") and polar_check(candidate, space, "dual")
                   for candidate in (partial_identity(space.web, [x], lam, space.monoid) for lam in grid)):
            return Verdict(False, index, None, f"no partial identity accepted at {x}")
    return Verdict(True)


@dataclass(frozen=True)
class SeriesCoefficients:
    """The family a_k with m(a_k) = 1/k for k = 1..max_index."""

    monoid: WeightMonoid
    max_index: int

    def __getitem__(self, k: int) -> Weight:
        if not 1 <= k <= self.max_index:
            raise IndexError(k)
        return positive_weight(self.monoid, Fraction(1, k))

    def check(self, m: MeasureMap, tol: Optional[float] = None) -> bool:
        return all(numeric_close(measure(m, self[k]), Fraction(1, k), tol) for k in range(1, self.max_index + 1))


def series_coefficients(monoid: WeightMonoid, max_index: Optional[int] = None) -> SeriesCoefficients:
    return SeriesCoefficients(monoid, settings().max_terms if max_index is None else max_index)


@dataclass(frozen=True)
class Measurement:
    det: NumericValue
    lhs: NumericValue
    mid: NumericValue
    terms: int


def _require_measurable(m: MeasureMap) -> None:
    if not m.multiplicative:
        raise MeasureError(f"measure {m.name} is not multiplicative")
    if not m.maps_minus_one:
        raise MeasureError(f"measure {m.name} does not send -1 to -1")


def _neg_log(value: NumericValue) -> NumericValue:
    if isinstance(value, complex):
        if value == 0:
            raise MeasureError("log of a vanishing determinant")
        return -cmath.log(value)
    if value <= 0:
        raise MeasureError(f"log of a non-positive determinant {value}")
    return -math.log(value)


def series_term(ab: Triskell, coeffs: SeriesCoefficients, m: MeasureMap, k: int) -> NumericValue:
    """tr_m(a_k . (ab)^k), computed on triskells."""
    return tr_m(scale(coeffs[k], power(ab, k)), m)


def trace_series(ab: Triskell, m: MeasureMap, coeffs: SeriesCoefficients) -> Iterator[NumericValue]:
    """The terms tr_m(a_k (ab)^k) for k = 1, 2, ...

    Since m is multiplicative each term equals m(a_k) tr(P^k) where P is the
    m-contraction of ab. The first powers are exact, so a nilpotent P gives a
    finite stream; from power n + 1 on they are taken in floating point.
    """
    p = m_contract(ab, m)
    n = len(p.rows)
    current = p.entries
    for k in range(1, n + 1):
        if all(v == 0 for v in current.flat):
            return
        yield measure(m, coeffs[k]) * mat_trace(WeightedMatrix(p.rows, p.cols, current))
        current = current.dot(p.entries)
    if all(v == 0 for v in current.flat):
        return
    work = p.to_array()
    power_f = np.linalg.matrix_power(work, n + 1)
    for k in itertools.count(n + 1):
        value = complex(measure(m, coeffs[k])) * complex(np.trace(power_f))
        yield value if np.iscomplexobj(work) else value.real
        power_f = power_f @ work


def measurement(a: Triskell, b: Triskell, m: MeasureMap, coeffs: Optional[SeriesCoefficients] = None,
                tol: Optional[float] = None) -> Measurement:
    """-log det_m(1 - ab) next to the series sum_k tr_m(a_k (ab)^k).

    The series is summed by ``sum_series`` under ``tol``, with at most as many
    terms as ``coeffs`` provides.
    """
    _require_measurable(m)
    tol = settings().tol if tol is None else tol
    ab = compose(a, b)
    if not ab.is_endo:
        raise CarrierMismatch("a and b must live on the same web")
    monoid = ab.monoid
    coeffs = coeffs or series_coefficients(monoid)

    radius = spectral_radius(m_contract(ab, m))
    if radius >= 1.0:
        raise SeriesDivergence(f"spectral radius {radius:.6g} of ab is not below 1")

    det = det_m(union(identity(ab.source, monoid), scale(w_minus_one(monoid), ab)), m)
    lhs = _neg_log(det)

    consumed = 0

    def counted() -> Iterator[NumericValue]:
        nonlocal consumed
        for term in trace_series(ab, m, coeffs):
            consumed += 1
            yield term

    mid = sum_series(counted(), tol=tol, max_terms=coeffs.max_index)
    logger.debug("measurement summed %d terms (radius %.3g)", consumed, radius)
    return Measurement(det=det, lhs=lhs, mid=mid, terms=consumed)


def goi_orthogonal(a: WeightedMatrix, b: WeightedMatrix) -> bool:
    """|det(1 - AB)| in ]0,1[."""
    ab = mat_compose(a, b)
    ident = identity_matrix(ab.rows, ab.codomain)
    value = abs(mat_det(WeightedMatrix(ab.rows, ab.cols, ident.entries - ab.entries)))
    return 0 < value < 1


def goi_fock_trace(a: WeightedMatrix, b: WeightedMatrix) -> NumericValue:
    """Fock-side value tr_m(F-up(-(A o B))) with the identity measure; equals det(1 - AB)."""
    ta, tb = embed(a), embed(b)
    if ta.monoid != tb.monoid:
        tb = embed(b, monoid=ta.monoid)
    ab = compose(ta, tb)
    return tr_m(fock_lift(scale(w_minus_one(ab.monoid), ab)), measure_map("identity", ab.monoid))


def coh_orthogonal(a: WeightedMatrix, b: WeightedMatrix, normalized: bool = False) -> bool:
    """tr(AB) in ]0,1[ (plain trace unless ``normalized``)."""
    value = _real(mat_trace(mat_compose(a, b), normalized))
    return value is not None and 0 < value < 1


@dataclass(frozen=True)
class Agreement:
    ig_value: NumericValue
    qcs_value: NumericValue
    ig_orthogonal: bool
    qcs_orthogonal: bool

    @property
    def agree(self) -> bool:
        return self.ig_orthogonal == self.qcs_orthogonal


def ig_qcs_agreement(a: Triskell, b: Triskell, m: MeasureMap, coeffs: Optional[SeriesCoefficients] = None,
                     tol: Optional[float] = None) -> Agreement:
    """Interaction-graph orthogonality (measurement in ]0,inf[) against QCS
    orthogonality of the lifted Fock images (m-trace in ]0,1[)."""
    result = measurement(a, b, m, coeffs, tol)
    ab = compose(a, b)
    lifted = fock_lift(scale(w_minus_one(ab.monoid), ab))
    qcs_value = tr_m(lifted, m)
    ig_value = _real(result.lhs)
    qcs_real = _real(qcs_value)
    return Agreement(
        ig_value=result.lhs,
        qcs_value=qcs_value,
        ig_orthogonal=ig_value is not None and ig_value > 0,
        qcs_orthogonal=qcs_real is not None and 0 < qcs_real < 1,
    )
