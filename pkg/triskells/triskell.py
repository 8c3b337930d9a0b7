"""
Triskells over finite carriers.

A triskell is a finite multiset of weighted edges between a source carrier and
a target carrier. Morphism equality is decided on ``CanonicalForm`` (sorted
multiset of edges); the dataclass equality of ``Triskell`` itself is list
equality and is only used for identical constructions.

Carrier labels: disjoint unions prefix points with ``L.``/``R.``, cartesian
products tuple them as ``(x,y)``.
"""

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import networkx as nx

from .errors import CarrierMismatch, InvalidTriskell, MonoidMismatch, NoAddition, NonNilpotentExecution, UnsignedMonoid
from .weights import (
    MonoidKind,
    RATIONAL,
    Weight,
    WeightMonoid,
    conjugate,
    make_weight,
    signed_pair,
    w_add,
    w_mul,
    w_neg,
    w_unit,
    weight_key,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Carrier:
    """Finite set of named points, kept in lexicographic order."""

    points: Tuple[str, ...] = ()

    def __post_init__(self):
        labels = tuple(sorted(str(p) for p in self.points))
        if len(set(labels)) != len(labels):
            duplicates = sorted(label for label, n in Counter(labels).items() if n > 1)
            raise InvalidTriskell(f"duplicate carrier labels: {duplicates}")
        object.__setattr__(self, "points", labels)

    @cached_property
    def _positions(self) -> Dict[str, int]:
        return {p: i for i, p in enumerate(self.points)}

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, label: object) -> bool:
        return label in self._positions

    def index(self, label: str) -> int:
        try:
            return self._positions[label]
        except KeyError:
            raise CarrierMismatch(f"{label!r} is not a point of this carrier") from None

    def require(self, labels: Iterable[str]) -> None:
        missing = [p for p in labels if p not in self]
        if missing:
            raise CarrierMismatch(f"points {missing} are not in the carrier")


EMPTY = Carrier()
ONE = Carrier(("*",))


def sum_label(side: str, point: str) -> str:
    return f"{side}.{point}"


def product_label(x: str, y: str) -> str:
    return f"({x},{y})"


def carrier_sum(a: Carrier, b: Carrier) -> Carrier:
    return Carrier([sum_label("L", x) for x in a] + [sum_label("R", y) for y in b])


def carrier_product(a: Carrier, b: Carrier) -> Carrier:
    return Carrier([product_label(x, y) for x in a for y in b])


def split_product(web: Carrier, left: Carrier) -> Dict[str, Tuple[str, str]]:
    """Recover (x, y) from every "(x,y)" point of ``web`` with x in ``left``."""
    pairs: Dict[str, Tuple[str, str]] = {}
    for label in web:
        if not (label.startswith("(") and label.endswith(")")):
            raise CarrierMismatch(f"{label!r} is not a product point")
        matches = [(x, label[len(x) + 2:-1]) for x in left if label.startswith(f"({x},")]
        if len(matches) != 1:
            raise CarrierMismatch(f"{label!r} does not decompose over the left carrier")
        pairs[label] = matches[0]
    return pairs


class Edge(NamedTuple):
    src: str
    tgt: str
    weight: Weight


EdgeLike = Union[Edge, Tuple[str, str, object]]


@dataclass(frozen=True)
class Triskell:
    source: Carrier
    target: Carrier
    monoid: WeightMonoid
    edges: Tuple[Edge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(Edge(*e) for e in self.edges))

    @classmethod
    def from_edges(cls, source: Iterable[str], target: Iterable[str], monoid: WeightMonoid,
                   edges: Iterable[EdgeLike]) -> "Triskell":
        """Build and validate; raw payloads are turned into weights of ``monoid``."""
        source = source if isinstance(source, Carrier) else Carrier(tuple(source))
        target = target if isinstance(target, Carrier) else Carrier(tuple(target))
        built = []
        for src, tgt, w in edges:
            if not isinstance(w, Weight):
                w = make_weight(monoid, w)
            built.append(Edge(str(src), str(tgt), w))
        return validate(cls(source, target, monoid, tuple(built)))

    @cached_property
    def _outgoing(self) -> Dict[str, Tuple[Edge, ...]]:
        index: Dict[str, List[Edge]] = defaultdict(list)
        for e in self.edges:
            index[e.src].append(e)
        return {k: tuple(v) for k, v in index.items()}

    @cached_property
    def _cells(self) -> Dict[Tuple[str, str], Tuple[Edge, ...]]:
        index: Dict[Tuple[str, str], List[Edge]] = defaultdict(list)
        for e in self.edges:
            index[(e.src, e.tgt)].append(e)
        return {k: tuple(v) for k, v in index.items()}

    def edges_from(self, point: str) -> Tuple[Edge, ...]:
        return self._outgoing.get(point, ())

    def between(self, src: str, tgt: str) -> Tuple[Edge, ...]:
        """E[src, tgt]."""
        return self._cells.get((src, tgt), ())

    def cells(self) -> Dict[Tuple[str, str], Tuple[Edge, ...]]:
        return dict(self._cells)

    @property
    def is_endo(self) -> bool:
        return self.source == self.target

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class CanonicalForm:
    source: Carrier
    target: Carrier
    monoid: WeightMonoid
    entries: Tuple[Tuple[str, str, Weight, int], ...]

    @property
    def edge_count(self) -> int:
        return sum(n for *_, n in self.entries)

    def to_triskell(self) -> Triskell:
        edges = [Edge(s, t, w) for s, t, w, n in self.entries for _ in range(n)]
        return Triskell(self.source, self.target, self.monoid, tuple(edges))


def _require_same_monoid(t: Triskell, u: Triskell) -> WeightMonoid:
    if t.monoid != u.monoid:
        raise MonoidMismatch(f"{t.monoid} vs {u.monoid}")
    return t.monoid


def _check_sum_labels(c: Carrier, side: str) -> None:
    tagged = [p for p in c if p.startswith(("L.", "R."))]
    if tagged and len(tagged) != len(c):
        raise InvalidTriskell(f"{side} carrier mixes sum labels {tagged[0]!r} with plain labels")


def validate(t: Triskell) -> Triskell:
    _check_sum_labels(t.source, "source")
    _check_sum_labels(t.target, "target")
    for e in t.edges:
        if e.src not in t.source:
            raise InvalidTriskell(f"edge source {e.src!r} is outside the source carrier")
        if e.tgt not in t.target:
            raise InvalidTriskell(f"edge target {e.tgt!r} is outside the target carrier")
        if not isinstance(e.weight, Weight):
            raise InvalidTriskell(f"edge {e.src}->{e.tgt} has an untagged weight {e.weight!r}")
        if not e.weight.is_zero and e.weight.monoid != t.monoid:
            raise MonoidMismatch(f"edge {e.src}->{e.tgt} is tagged {e.weight.monoid}, triskell is {t.monoid}")
    return t


def _edge_sort_key(item: Tuple[str, str, Weight, int]):
    return (item[0], item[1], weight_key(item[2]))


def _canonical_from_counts(t: Triskell, counts: Mapping[Tuple[str, str, Weight], int]) -> CanonicalForm:
    entries = sorted(((s, tg, w, n) for (s, tg, w), n in counts.items() if n > 0), key=_edge_sort_key)
    return CanonicalForm(t.source, t.target, t.monoid, tuple(entries))


def canonical(t: Triskell) -> CanonicalForm:
    return _canonical_from_counts(t, Counter(t.edges))


def compose(f: Triskell, g: Triskell) -> Triskell:
    """g after f: one edge per length-2 path through the shared carrier."""
    if f.target != g.source:
        raise CarrierMismatch("target of the first triskell is not the source of the second")
    monoid = _require_same_monoid(f, g)
    edges = [Edge(e.src, e2.tgt, w_mul(e.weight, e2.weight)) for e in f.edges for e2 in g.edges_from(e.tgt)]
    return Triskell(f.source, g.target, monoid, tuple(edges))


def identity(c: Carrier, monoid: WeightMonoid = RATIONAL) -> Triskell:
    one = w_unit(monoid)
    return Triskell(c, c, monoid, tuple(Edge(x, x, one) for x in c))


def tensor(t: Triskell, u: Triskell) -> Triskell:
    monoid = _require_same_monoid(t, u)
    edges = [
        Edge(product_label(e.src, f.src), product_label(e.tgt, f.tgt), w_mul(e.weight, f.weight))
        for e in t.edges for f in u.edges
    ]
    return Triskell(carrier_product(t.source, u.source), carrier_product(t.target, u.target), monoid, tuple(edges))


def direct_sum(t: Triskell, u: Triskell) -> Triskell:
    monoid = _require_same_monoid(t, u)
    edges = [Edge(sum_label("L", e.src), sum_label("L", e.tgt), e.weight) for e in t.edges]
    edges += [Edge(sum_label("R", e.src), sum_label("R", e.tgt), e.weight) for e in u.edges]
    return Triskell(carrier_sum(t.source, u.source), carrier_sum(t.target, u.target), monoid, tuple(edges))


def juxtapose(t: Triskell, u: Triskell) -> Triskell:
    """Disjoint union keeping labels; the carriers must not overlap."""
    monoid = _require_same_monoid(t, u)
    for a, b in ((t.source, u.source), (t.target, u.target)):
        shared = set(a) & set(b)
        if shared:
            raise CarrierMismatch(f"carriers overlap on {sorted(shared)}")
    return Triskell(Carrier(t.source.points + u.source.points), Carrier(t.target.points + u.target.points),
                    monoid, t.edges + u.edges)


def union(t: Triskell, u: Triskell) -> Triskell:
    if t.source != u.source or t.target != u.target:
        raise CarrierMismatch("union needs identical carriers")
    monoid = _require_same_monoid(t, u)
    return Triskell(t.source, t.target, monoid, t.edges + u.edges)


def scale(a: Weight, t: Triskell) -> Triskell:
    """Left-multiply every edge weight by ``a``."""
    if not a.is_zero and a.monoid != t.monoid:
        raise MonoidMismatch(f"cannot scale a {t.monoid} triskell by a {a.monoid} weight")
    return Triskell(t.source, t.target, t.monoid, tuple(Edge(e.src, e.tgt, w_mul(a, e.weight)) for e in t.edges))


def drop_zeros(t: Triskell) -> Triskell:
    return Triskell(t.source, t.target, t.monoid, tuple(e for e in t.edges if not e.weight.is_zero))


LabelMap = Union[Mapping[str, str], Callable[[str], str]]


def _lookup(mapping: LabelMap) -> Callable[[str], str]:
    if callable(mapping):
        return mapping
    return lambda p: mapping.get(p, p)


def relabel(t: Triskell, source_map: LabelMap, target_map: Optional[LabelMap] = None,
            source: Optional[Carrier] = None, target: Optional[Carrier] = None) -> Triskell:
    """Rename points; the new carriers default to the images of the old ones."""
    fs = _lookup(source_map)
    ft = _lookup(source_map if target_map is None else target_map)
    source = source if source is not None else Carrier(tuple(fs(p) for p in t.source))
    target = target if target is not None else Carrier(tuple(ft(p) for p in t.target))
    edges = tuple(Edge(fs(e.src), ft(e.tgt), e.weight) for e in t.edges)
    return validate(Triskell(source, target, t.monoid, edges))


def restrict(t: Triskell, source: Carrier, target: Carrier) -> Triskell:
    """Edges with both endpoints inside the given sub-carriers."""
    t.source.require(source)
    t.target.require(target)
    edges = tuple(e for e in t.edges if e.src in source and e.tgt in target)
    return Triskell(source, target, t.monoid, edges)


def symmetry(c: Carrier, monoid: WeightMonoid = RATIONAL) -> Triskell:
    """The swap on c + c."""
    one = w_unit(monoid)
    edges = [Edge(sum_label("L", x), sum_label("R", x), one) for x in c]
    edges += [Edge(sum_label("R", x), sum_label("L", x), one) for x in c]
    both = carrier_sum(c, c)
    return Triskell(both, both, monoid, tuple(edges))


def power(t: Triskell, k: int) -> Triskell:
    """t composed with itself k times, left to right; power(t, 0) is the identity."""
    if not t.is_endo:
        raise CarrierMismatch("powers need equal source and target")
    if k < 0:
        raise InvalidTriskell(f"negative power {k}")
    result = identity(t.source, t.monoid)
    for _ in range(k):
        result = compose(result, t)
    return result


def promote_signed(t: Triskell) -> Triskell:
    """Embed an unsigned triskell into {-1,1} x Omega with positive signs."""
    if t.monoid.is_signed:
        return t
    monoid = signed_pair(t.monoid)
    edges = tuple(Edge(e.src, e.tgt, e.weight if e.weight.is_zero else Weight(monoid, (1, e.weight.value)))
                  for e in t.edges)
    return Triskell(t.source, t.target, monoid, edges)


PointSpec = Union[str, Sequence[str]]


def resolve_points(c: Carrier, spec: PointSpec) -> List[str]:
    """A prefix selects every point starting with it (carrier order); a list is taken as is."""
    if isinstance(spec, str):
        return [p for p in c if p.startswith(spec)]
    points = [str(p) for p in spec]
    c.require(points)
    if len(set(points)) != len(points):
        raise CarrierMismatch(f"repeated points in {points}")
    return points


def _feedback_cycle(t: Triskell, u_src: List[str], feedback: Dict[str, str]) -> Optional[List[str]]:
    graph = nx.DiGraph()
    graph.add_nodes_from(u_src)
    for e in t.edges:
        if e.src in graph and e.tgt in feedback:
            graph.add_edge(e.src, feedback[e.tgt])
    try:
        cycle = nx.find_cycle(graph)
    except nx.NetworkXNoCycle:
        return None
    return [u for u, _ in cycle] + [cycle[0][0]]


def exec_trace(t: Triskell, u_src: PointSpec, u_tgt: PointSpec) -> Triskell:
    """Execution: all finite paths from X to Y through the hidden part U.

    The i-th point of ``u_tgt`` is fed back into the i-th point of ``u_src``.
    """
    u_src = resolve_points(t.source, u_src)
    u_tgt = resolve_points(t.target, u_tgt)
    if len(u_src) != len(u_tgt):
        raise CarrierMismatch(f"hidden parts differ in size: {len(u_src)} vs {len(u_tgt)}")
    feedback = dict(zip(u_tgt, u_src))
    cycle = _feedback_cycle(t, u_src, feedback)
    if cycle is not None:
        raise NonNilpotentExecution(cycle)

    hidden_src = set(u_src)
    x = Carrier(tuple(p for p in t.source if p not in hidden_src))
    y = Carrier(tuple(p for p in t.target if p not in feedback))
    edges: List[Edge] = []

    def walk(start: str, point: str, weight: Optional[Weight]) -> None:
        for e in t.edges_from(point):
            w = e.weight if weight is None else w_mul(weight, e.weight)
            if e.tgt in feedback:
                walk(start, feedback[e.tgt], w)
            else:
                edges.append(Edge(start, e.tgt, w))

    for start in x:
        walk(start, start, None)
    logger.debug("execution over %d hidden points produced %d paths", len(u_src), len(edges))
    return Triskell(x, y, t.monoid, tuple(edges))


def is_simple(t: Triskell) -> bool:
    return all(len(cell) == 1 for cell in t._cells.values())


def contract_simple(t: Triskell, plus: Optional[Callable[[Weight, Weight], Weight]] = None) -> Triskell:
    """Merge parallel edges by summing their weights; zero sums are dropped."""
    if plus is None:
        if not t.monoid.has_addition:
            raise NoAddition(f"{t.monoid} has no addition")
        plus = w_add
    edges = []
    for (src, tgt), cell in sorted(t._cells.items()):
        total = cell[0].weight
        for e in cell[1:]:
            total = plus(total, e.weight)
        if not total.is_zero:
            edges.append(Edge(src, tgt, total))
    return Triskell(t.source, t.target, t.monoid, tuple(edges))


def zero_normalize(t: Triskell) -> CanonicalForm:
    """Canonical form after cancelling every parallel pair of opposite weights."""
    if not t.monoid.is_signed:
        raise UnsignedMonoid(f"{t.monoid} has no sign structure")
    counts = Counter(t.edges)
    for key in sorted(counts, key=lambda k: (k[0], k[1], weight_key(k[2]))):
        src, tgt, w = key
        opposite = (src, tgt, w_neg(w))
        if opposite == key:
            counts[key] %= 2
            continue
        cancelled = min(counts[key], counts.get(opposite, 0))
        if cancelled:
            counts[key] -= cancelled
            counts[opposite] -= cancelled
    return _canonical_from_counts(t, counts)


def zero_equivalent(t: Triskell, u: Triskell) -> bool:
    """Equal up to the congruence generated by zero triskells."""
    return t.source == u.source and t.target == u.target and zero_normalize(t) == zero_normalize(u)


@dataclass(frozen=True)
class Classification:
    diagonal: bool
    hermitian: bool
    simple: bool


def classify(t: Triskell) -> Classification:
    diagonal = t.is_endo and all(e.src == e.tgt for e in t.edges)
    hermitian = False
    if t.is_endo and MonoidKind.COMPLEX in (t.monoid.kind, getattr(t.monoid.base, "kind", None)):
        counts = Counter(t.edges)
        hermitian = all(counts.get((e.tgt, e.src, conjugate(e.weight)), 0) == n for e, n in counts.items())
    return Classification(diagonal=diagonal, hermitian=hermitian, simple=is_simple(t))


def partial_identity(c: Carrier, sub: Iterable[str], lam: Weight, monoid: Optional[WeightMonoid] = None) -> Triskell:
    """Loop of weight ``lam`` on each point of ``sub``, carrier ``c`` on both sides."""
    sub = list(sub)
    if any(p not in c for p in sub):
        raise CarrierMismatch(f"{sub} is not contained in the carrier")
    monoid = monoid or lam.monoid
    if monoid is None:
        raise MonoidMismatch("a zero-weighted partial identity needs an explicit monoid")
    return Triskell(c, c, monoid, tuple(Edge(x, x, lam) for x in sub))
