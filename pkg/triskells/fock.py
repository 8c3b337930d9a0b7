"""
Fock constructions.

* ``fock_rel``  - relational functor F: minors of a weighted relation, indexed by
  finite subsets.
* ``fock_lift`` - the edge-level functor F-up: one signed edge per matching.
* ``fock_sym``  - the symmetric functor S over bounded multisets, unsigned.

Subsets are labelled ``{x,y}`` and multisets ``[x:2,y:1]``, both with points in
carrier order. ``det_m`` / ``tr_m`` push triskells through a measure map.
"""

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .config import settings
from .errors import BoundExceeded, CarrierMismatch, InvalidTriskell, MonoidMismatch
from .permutations import heap_permutations, lexicographic_permutations, permutation_sign
from .relmat import WeightedMatrix, minor_det
from .triskell import Carrier, Edge, Triskell, product_label, promote_signed
from .weights import MeasureMap, NumericValue, Weight, apply_sign, measure, w_prod

logger = logging.getLogger(__name__)

Multiset = Union[Mapping[str, int], Sequence[str]]


def subset_label(points: Sequence[str]) -> str:
    return "{" + ",".join(sorted(points)) + "}"


def multiset_label(points: Sequence[str]) -> str:
    counts = Counter(points)
    return "[" + ",".join(f"{x}:{counts[x]}" for x in sorted(counts)) + "]"


def _check_carrier_bound(c: Carrier, bound: Optional[int]) -> None:
    bound = settings().fock_bound if bound is None else bound
    if len(c) > bound:
        raise BoundExceeded(f"Fock construction on {len(c)} points exceeds the bound {bound}")


@dataclass(frozen=True)
class PowersetCarrier:
    base: Carrier

    @cached_property
    def members(self) -> Dict[str, Tuple[str, ...]]:
        """Label -> subset, by size then lexicographically."""
        found = {}
        for k in range(len(self.base) + 1):
            for subset in itertools.combinations(self.base.points, k):
                found[subset_label(subset)] = subset
        return found

    @cached_property
    def carrier(self) -> Carrier:
        return Carrier(tuple(self.members))

    def label(self, points: Sequence[str]) -> str:
        return subset_label(points)


@dataclass(frozen=True)
class MultisetCarrier:
    base: Carrier
    degree: int

    @cached_property
    def members(self) -> Dict[str, Tuple[str, ...]]:
        """Label -> sorted point sequence with repetitions, by degree then lexicographically."""
        found = {}
        for k in range(self.degree + 1):
            for mset in itertools.combinations_with_replacement(self.base.points, k):
                found[multiset_label(mset)] = mset
        return found

    @cached_property
    def carrier(self) -> Carrier:
        return Carrier(tuple(self.members))

    def label(self, points: Sequence[str]) -> str:
        return multiset_label(points)


def powerset(base: Carrier, bound: Optional[int] = None) -> PowersetCarrier:
    _check_carrier_bound(base, bound)
    return PowersetCarrier(base)


def multisets(base: Carrier, degree: Optional[int] = None, bound: Optional[int] = None) -> MultisetCarrier:
    _check_carrier_bound(base, bound)
    limit = settings().degree_bound
    degree = limit if degree is None else degree
    if degree > limit:
        raise BoundExceeded(f"multiset degree {degree} exceeds the bound {limit}")
    return MultisetCarrier(base, degree)


@dataclass(frozen=True)
class Matching:
    """A permutation sigma with an edge sequence e_i : a_i -> b_sigma(i)."""

    a_bar: Tuple[str, ...]
    b_bar: Tuple[str, ...]
    sigma: Tuple[int, ...]
    edges: Tuple[Edge, ...]
    sign: int
    weight: Weight

    def __post_init__(self):
        if not len(self.a_bar) == len(self.b_bar) == len(self.sigma) == len(self.edges):
            raise InvalidTriskell("matching components differ in length")
        if self.sign != permutation_sign(self.sigma):
            raise InvalidTriskell("matching sign disagrees with its permutation")

    @property
    def signed_weight(self) -> Weight:
        return apply_sign(self.sign, self.weight)


def matchings(t: Triskell, a_bar: Sequence[str], b_bar: Sequence[str]) -> List[Matching]:
    """Every (sigma, edges) pair between a_bar and b_bar.

    sigma runs in lexicographic order; edge choices follow the triskell's edge order.
    """
    a_bar, b_bar = tuple(a_bar), tuple(b_bar)
    t.source.require(a_bar)
    t.target.require(b_bar)
    if len(a_bar) != len(b_bar):
        return []
    found = []
    for sigma, sign in lexicographic_permutations(len(a_bar)):
        cells = [t.between(a_bar[i], b_bar[sigma[i]]) for i in range(len(a_bar))]
        for choice in itertools.product(*cells):
            found.append(Matching(a_bar, b_bar, sigma, tuple(choice), sign, w_prod((e.weight for e in choice), t.monoid)))
    return found


def fock_rel(m: WeightedMatrix, bound: Optional[int] = None, diagonal_only: bool = False) -> WeightedMatrix:
    """Matrix of minors: entry (A, B) is det m[A, B] for |A| = |B|.

    ``diagonal_only`` fills principal minors only (enough for traces).
    """
    rows, cols = powerset(m.rows, bound), powerset(m.cols, bound)
    if diagonal_only and m.rows != m.cols:
        raise CarrierMismatch("principal minors need equal carriers")
    codomain = m.codomain
    row_carrier, col_carrier = rows.carrier, cols.carrier
    table = np.full((len(row_carrier), len(col_carrier)), codomain.zero, dtype=object)
    for a_label, a_bar in rows.members.items():
        ri = [m.rows.index(x) for x in a_bar]
        targets = [(a_label, a_bar)] if diagonal_only else cols.members.items()
        for b_label, b_bar in targets:
            if len(b_bar) != len(a_bar):
                continue
            ci = [m.cols.index(y) for y in b_bar]
            if a_bar:
                value = minor_det(m.entries[np.ix_(ri, ci)])
            else:
                value = codomain.one
            table[row_carrier.index(a_label), col_carrier.index(b_label)] = value
    logger.debug("fock_rel: %dx%d minors table", len(row_carrier), len(col_carrier))
    return WeightedMatrix(row_carrier, col_carrier, table)


def _injective_choices(t: Triskell, a_bar: Sequence[str]) -> Iterator[Tuple[Edge, ...]]:
    chosen: List[Edge] = []
    used = set()

    def extend(i: int) -> Iterator[Tuple[Edge, ...]]:
        if i == len(a_bar):
            yield tuple(chosen)
            return
        for e in t.edges_from(a_bar[i]):
            if e.tgt in used:
                continue
            used.add(e.tgt)
            chosen.append(e)
            yield from extend(i + 1)
            chosen.pop()
            used.discard(e.tgt)

    return extend(0)


def _all_choices(t: Triskell, a_bar: Sequence[str]) -> Iterator[Tuple[Edge, ...]]:
    return itertools.product(*(t.edges_from(a) for a in a_bar))


def fock_lift(t: Triskell, bound: Optional[int] = None) -> Triskell:
    """One edge per matching, weighted by the signed ordered product."""
    t = promote_signed(t)
    src, tgt = powerset(t.source, bound), powerset(t.target, bound)
    edges = []
    for a_label, a_bar in src.members.items():
        for choice in _injective_choices(t, a_bar):
            targets = [e.tgt for e in choice]
            b_bar = tuple(sorted(targets))
            sigma = tuple(b_bar.index(y) for y in targets)
            weight = apply_sign(permutation_sign(sigma), w_prod((e.weight for e in choice), t.monoid))
            edges.append(Edge(a_label, subset_label(b_bar), weight))
    logger.debug("fock_lift: %d edges over %d source subsets", len(edges), len(src.members))
    return Triskell(src.carrier, tgt.carrier, t.monoid, tuple(edges))


def multiset_factorial(mset: Multiset) -> int:
    counts = mset if isinstance(mset, Mapping) else Counter(mset)
    return math.prod(math.factorial(n) for n in counts.values())


def multinomial(mset: Multiset) -> int:
    counts = mset if isinstance(mset, Mapping) else Counter(mset)
    return math.factorial(sum(counts.values())) // multiset_factorial(counts)


def fock_sym(t: Triskell, degree_bound: Optional[int] = None, bound: Optional[int] = None) -> Triskell:
    """One unsigned edge per matching between multisets of degree at most ``degree_bound``.

    For a fixed edge sequence the matchings are the label-preserving bijections
    onto the sorted targets, so each sequence yields nu! parallel edges.
    """
    src = multisets(t.source, degree_bound, bound)
    tgt = multisets(t.target, src.degree, bound)
    edges = []
    for a_label, a_bar in src.members.items():
        for choice in _all_choices(t, a_bar):
            targets = tuple(sorted(e.tgt for e in choice))
            weight = w_prod((e.weight for e in choice), t.monoid)
            edge = Edge(a_label, multiset_label(targets), weight)
            edges.extend([edge] * multiset_factorial(targets))
    logger.debug("fock_sym: %d edges up to degree %d", len(edges), src.degree)
    return Triskell(src.carrier, tgt.carrier, t.monoid, tuple(edges))


def _permanent(table: np.ndarray) -> NumericValue:
    n = table.shape[0]
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        term = Fraction(1)
        for i in range(n):
            term = term * table[i, perm[i]]
        total = total + term
    return total


def fock_sym_rel(m: WeightedMatrix, degree: Optional[int] = None) -> WeightedMatrix:
    """Relational symmetric Fock image: permanents of row/column-repeated submatrices."""
    rows, cols = multisets(m.rows, degree), multisets(m.cols, degree)
    row_carrier, col_carrier = rows.carrier, cols.carrier
    table = np.full((len(row_carrier), len(col_carrier)), m.codomain.zero, dtype=object)
    for a_label, a_bar in rows.members.items():
        ri = [m.rows.index(x) for x in a_bar]
        for b_label, b_bar in cols.members.items():
            if len(b_bar) != len(a_bar):
                continue
            ci = [m.cols.index(y) for y in b_bar]
            block = m.entries[np.ix_(ri, ci)] if a_bar else np.empty((0, 0), dtype=object)
            table[row_carrier.index(a_label), col_carrier.index(b_label)] = _permanent(block)
    return WeightedMatrix(row_carrier, col_carrier, table)


def danos_ehrhard_coefficient(m: WeightedMatrix, mu: Multiset, nu: Multiset) -> NumericValue:
    """Sum over integer matrices rho with row margins mu and column margins nu of
    (nu!/rho!) * prod m[a,b]^rho(a,b)."""
    mu = dict(mu) if isinstance(mu, Mapping) else dict(Counter(mu))
    nu = dict(nu) if isinstance(nu, Mapping) else dict(Counter(nu))
    if sum(mu.values()) != sum(nu.values()):
        return m.codomain.zero
    rows = sorted(mu)
    cols = sorted(nu)

    def distributions(count: int, remaining: Dict[str, int], start: int = 0) -> Iterator[Dict[str, int]]:
        if count == 0:
            yield {}
            return
        for idx in range(start, len(cols)):
            col = cols[idx]
            for k in range(min(count, remaining[col]), 0, -1):
                remaining[col] -= k
                for rest in distributions(count - k, remaining, idx + 1):
                    yield {col: k, **rest}
                remaining[col] += k

    def expand(i: int, remaining: Dict[str, int]) -> NumericValue:
        if i == len(rows):
            return Fraction(1) if not any(remaining.values()) else Fraction(0)
        a = rows[i]
        total: NumericValue = Fraction(0)
        for dist in list(distributions(mu[a], remaining)):
            term: NumericValue = Fraction(1)
            for b, k in dist.items():
                term = term * m[a, b] ** k / math.factorial(k)
            if term == 0:
                continue
            for b, k in dist.items():
                remaining[b] -= k
            total = total + term * expand(i + 1, remaining)
            for b, k in dist.items():
                remaining[b] += k
        return total

    return multiset_factorial(nu) * expand(0, dict(nu))


def powerset_sum_bijection(a: Carrier, b: Carrier) -> Dict[str, str]:
    """Subsets of a + b to pairs (subset of a, subset of b), as product labels."""
    mapping = {}
    for label, subset in PowersetCarrier(Carrier(tuple(f"L.{x}" for x in a) + tuple(f"R.{y}" for y in b))).members.items():
        left = [p[2:] for p in subset if p.startswith("L.")]
        right = [p[2:] for p in subset if p.startswith("R.")]
        mapping[label] = product_label(subset_label(left), subset_label(right))
    return mapping


def multiset_sum_bijection(a: Carrier, b: Carrier, degree: int) -> Dict[str, str]:
    """Multisets of a + b (degree <= d) to pairs of multisets, as product labels."""
    mapping = {}
    both = Carrier(tuple(f"L.{x}" for x in a) + tuple(f"R.{y}" for y in b))
    for label, mset in MultisetCarrier(both, degree).members.items():
        left = [p[2:] for p in mset if p.startswith("L.")]
        right = [p[2:] for p in mset if p.startswith("R.")]
        mapping[label] = product_label(multiset_label(left), multiset_label(right))
    return mapping


def _require_endo(t: Triskell, m: Optional[MeasureMap] = None) -> None:
    if not t.is_endo:
        raise CarrierMismatch("m-trace and m-determinant need equal source and target")
    if m is not None and t.monoid != m.source:
        raise MonoidMismatch(f"measure {m.name} reads {m.source}, triskell is {t.monoid}")


def det_m(t: Triskell, m: MeasureMap, bound: Optional[int] = None) -> NumericValue:
    """Sum over sigma and edge choices e_i in E[sigma(i), i] of m(sign(sigma) * prod w(e_i))."""
    _require_endo(t, m)
    _check_carrier_bound(t.source, bound)
    points = t.source.points
    n = len(points)
    total = m.codomain.zero
    for perm, sign in heap_permutations(n):
        cells = []
        for i in range(n):
            cell = t.between(points[perm[i]], points[i])
            if not cell:
                break
            cells.append(cell)
        else:
            for choice in itertools.product(*cells):
                weight = w_prod((e.weight for e in choice), t.monoid)
                total = total + measure(m, apply_sign(sign, weight))
    return total


def tr_m(t: Triskell, m: MeasureMap) -> NumericValue:
    """Sum of m over the self-loops."""
    _require_endo(t, m)
    total = m.codomain.zero
    for e in t.edges:
        if e.src == e.tgt:
            total = total + measure(m, e.weight)
    return total
