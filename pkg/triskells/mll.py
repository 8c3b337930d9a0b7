"""
Multiplicative linear logic front end.

Formulas are atoms, negated atoms, ``(A*B)`` (tensor) and ``(A|B)`` (par).
Proofs are trees of ax / tensor / par / cut / xch nodes; every node computes
and checks its conclusion when constructed.

Conventions:
  ax(A)        |- ~A, A
  tensor(p, q) |- Gamma, A*B, Delta   for p |- Gamma, A and q |- Delta, B
  par(p)       |- Gamma, A|B          for p |- Gamma, A, B
  cut(p, q)    |- Gamma, Delta        for p |- Gamma, A and q |- ~A, Delta
  xch(p, i, j) swaps positions i and j (0-based)

Interpretation: a formula occupies one point per atom point ("0".."n-1" for an
atom of size n, L./R. prefixes for compound formulas); position i of a sequent
turns point x into the location "i:x". Axioms are symmetric matchings, the
other rules relabel, and cuts execute.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import parsy
from parsy import generate, regex, string

from .config import settings
from .errors import (
    BoundExceeded,
    InterpretationError,
    InvalidWeight,
    NonNilpotentExecution,
    ProofSyntaxError,
    ProofTypingError,
)
from .fock import fock_lift, fock_rel, powerset_sum_bijection
from .relmat import WeightedMatrix, contract
from .triskell import (
    CanonicalForm,
    Carrier,
    Edge,
    Triskell,
    direct_sum,
    exec_trace,
    relabel,
    tensor as tensor_triskell,
    union,
    zero_normalize,
)
from .weights import RATIONAL, Weight, WeightMonoid, w_unit

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Atom:
    name: str
    negated: bool = False

    def __str__(self) -> str:
        return ("~" if self.negated else "") + self.name


@dataclass(frozen=True)
class Tensor:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"({self.left}*{self.right})"


@dataclass(frozen=True)
class Par:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"({self.left}|{self.right})"


Formula = Union[Atom, Tensor, Par]


def dual(f: Formula) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.name, not f.negated)
    if isinstance(f, Tensor):
        return Par(dual(f.left), dual(f.right))
    return Tensor(dual(f.left), dual(f.right))


def sequent_str(conclusion: Sequence[Formula]) -> str:
    return "|- " + ", ".join(str(f) for f in conclusion)


class Proof:
    """Base of the proof nodes; ``conclusion`` is set at construction."""

    conclusion: Tuple[Formula, ...]

    def _set_conclusion(self, conclusion: Sequence[Formula]) -> None:
        object.__setattr__(self, "conclusion", tuple(conclusion))


@dataclass(frozen=True)
class Axiom(Proof):
    formula: Formula
    conclusion: Tuple[Formula, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        self._set_conclusion((dual(self.formula), self.formula))

    def __str__(self) -> str:
        return f"ax({self.formula})"


@dataclass(frozen=True)
class TensorRule(Proof):
    left: Proof
    right: Proof
    conclusion: Tuple[Formula, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        lc, rc = self.left.conclusion, self.right.conclusion
        self._set_conclusion(lc[:-1] + (Tensor(lc[-1], rc[-1]),) + rc[:-1])

    def __str__(self) -> str:
        return f"tensor({self.left},{self.right})"


@dataclass(frozen=True)
class ParRule(Proof):
    premise: Proof
    conclusion: Tuple[Formula, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        c = self.premise.conclusion
        if len(c) < 2:
            raise ProofTypingError(f"par needs two formulas, premise is {sequent_str(c)}")
        self._set_conclusion(c[:-2] + (Par(c[-2], c[-1]),))

    def __str__(self) -> str:
        return f"par({self.premise})"


@dataclass(frozen=True)
class Cut(Proof):
    left: Proof
    right: Proof
    conclusion: Tuple[Formula, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        lc, rc = self.left.conclusion, self.right.conclusion
        if rc[0] != dual(lc[-1]):
            raise ProofTypingError(f"cut formulas {lc[-1]} and {rc[0]} are not dual")
        self._set_conclusion(lc[:-1] + rc[1:])

    def __str__(self) -> str:
        return f"cut({self.left},{self.right})"


@dataclass(frozen=True)
class Exchange(Proof):
    premise: Proof
    i: int
    j: int
    conclusion: Tuple[Formula, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        c = list(self.premise.conclusion)
        if not (0 <= self.i < len(c) and 0 <= self.j < len(c)):
            raise ProofTypingError(f"exchange indices {self.i},{self.j} out of range for {sequent_str(c)}")
        c[self.i], c[self.j] = c[self.j], c[self.i]
        self._set_conclusion(c)

    def __str__(self) -> str:
        return f"xch({self.premise},{self.i},{self.j})"


# Grammar

_ws = regex(r"\s*")


def _lexeme(p):
    return p << _ws


def _token(s: str):
    return _lexeme(string(s))


_name = _lexeme(regex(r"[A-Za-z_][A-Za-z0-9_]*")).desc("atom")
_integer = _lexeme(regex(r"[0-9]+")).map(int).desc("index")


@generate("formula")
def _formula():
    negated = yield _token("~").optional()
    if negated is not None:
        name = yield _name
        return Atom(name, True)
    opened = yield _token("(").optional()
    if opened is None:
        name = yield _name
        return Atom(name)
    left = yield _formula
    op = yield _token("*") | _token("|")
    right = yield _formula
    yield _token(")")
    return Tensor(left, right) if op == "*" else Par(left, right)


@generate("proof")
def _proof():
    start = yield parsy.index
    rule = yield _lexeme(regex(r"ax|tensor|par|cut|xch")).desc("rule name")
    yield _token("(")
    if rule == "ax":
        formula = yield _formula
        yield _token(")")
        build: Callable[[], Proof] = lambda: Axiom(formula)
    elif rule in ("tensor", "cut"):
        left = yield _proof
        yield _token(",")
        right = yield _proof
        yield _token(")")
        build = (lambda: TensorRule(left, right)) if rule == "tensor" else (lambda: Cut(left, right))
    elif rule == "par":
        premise = yield _proof
        yield _token(")")
        build = lambda: ParRule(premise)
    else:
        premise = yield _proof
        yield _token(",")
        i = yield _integer
        yield _token(",")
        j = yield _integer
        yield _token(")")
        build = lambda: Exchange(premise, i, j)
    try:
        return build()
    except ProofTypingError as exc:
        raise ProofTypingError(str(exc), start) from None


def parse_formula(text: str) -> Formula:
    try:
        return (_ws >> _formula).parse(text)
    except parsy.ParseError as exc:
        raise ProofSyntaxError(f"expected {', '.join(sorted(exc.expected))}", exc.index) from None


def parse_proof(text: str) -> Proof:
    try:
        return (_ws >> _proof).parse(text)
    except parsy.ParseError as exc:
        raise ProofSyntaxError(f"expected {', '.join(sorted(exc.expected))}", exc.index) from None


# Cut elimination
#
# elim(p, i, q, j) eliminates a cut between position i of the cut-free proof p and
# position j of the cut-free proof q. Its conclusion lists p's formulas without i
# followed by q's formulas without j, occurrence by occurrence. Occurrences are
# tracked with ids so that exchanges restore exactly that order.

Ids = List[Any]


def _cut_order(p_ids: Ids, i: int, q_ids: Ids, j: int) -> Ids:
    return [x for k, x in enumerate(p_ids) if k != i] + [x for k, x in enumerate(q_ids) if k != j]


def _arrange(proof: Proof, ids: Ids, wanted: Ids) -> Proof:
    ids = list(ids)
    for pos, want in enumerate(wanted):
        k = ids.index(want)
        if k != pos:
            proof = Exchange(proof, pos, k)
            ids[pos], ids[k] = ids[k], ids[pos]
    return proof


def reorder(p: Proof, order: Sequence[int]) -> Proof:
    """Exchanges so that position k of the result holds position order[k] of p."""
    if sorted(order) != list(range(len(p.conclusion))):
        raise ProofTypingError(f"{list(order)} is not a permutation of the conclusion positions")
    return _arrange(p, list(range(len(p.conclusion))), list(order))


def _principal(p: Proof, i: int) -> bool:
    if isinstance(p, TensorRule):
        return i == len(p.left.conclusion) - 1
    if isinstance(p, ParRule):
        return i == len(p.conclusion) - 1
    return False


def _elim(p: Proof, i: int, q: Proof, j: int) -> Proof:
    P = [("P", k) for k in range(len(p.conclusion))]
    Q = [("Q", k) for k in range(len(q.conclusion))]
    wanted = _cut_order(P, i, Q, j)

    if isinstance(p, Axiom):
        q_ids = [P[1 - i] if k == j else x for k, x in enumerate(Q)]
        return _arrange(q, q_ids, wanted)
    if isinstance(q, Axiom):
        p_ids = [Q[1 - j] if k == i else x for k, x in enumerate(P)]
        return _arrange(p, p_ids, wanted)

    if not _principal(p, i):
        return _commute(p, i, q, j, P, Q, wanted)
    if not _principal(q, j):
        swapped = _elim(q, j, p, i)
        return _arrange(swapped, _cut_order(Q, j, P, i), wanted)

    if isinstance(p, TensorRule):
        l, r, qq = p.left, p.right, q.premise
        kl = len(l.conclusion) - 1
        l_ids = P[:kl] + ["A1"]
        r_ids = P[kl + 1:] + ["A2"]
        q_ids = Q[:-1] + ["nA1", "nA2"]
        s = _elim(r, len(r_ids) - 1, qq, len(q_ids) - 1)
        s_ids = _cut_order(r_ids, len(r_ids) - 1, q_ids, len(q_ids) - 1)
        t = _elim(l, kl, s, s_ids.index("nA1"))
        return _arrange(t, _cut_order(l_ids, kl, s_ids, s_ids.index("nA1")), wanted)

    pp, l, r = p.premise, q.left, q.right
    kl = len(l.conclusion) - 1
    p_ids = P[:-1] + ["A1", "A2"]
    l_ids = Q[:kl] + ["nA1"]
    r_ids = Q[kl + 1:] + ["nA2"]
    s = _elim(pp, len(p_ids) - 1, r, len(r_ids) - 1)
    s_ids = _cut_order(p_ids, len(p_ids) - 1, r_ids, len(r_ids) - 1)
    t = _elim(s, s_ids.index("A1"), l, kl)
    return _arrange(t, _cut_order(s_ids, s_ids.index("A1"), l_ids, kl), wanted)


def _commute(p: Proof, i: int, q: Proof, j: int, P: Ids, Q: Ids, wanted: Ids) -> Proof:
    """Push the cut above the last rule of p, which does not touch position i."""
    if isinstance(p, Exchange):
        swap = {p.i: p.j, p.j: p.i}
        inner_ids = [P[swap.get(m, m)] for m in range(len(P))]
        inner_i = swap.get(i, i)
        s = _elim(p.premise, inner_i, q, j)
        return _arrange(s, _cut_order(inner_ids, inner_i, Q, j), wanted)

    if isinstance(p, TensorRule):
        l, r = p.left, p.right
        kl = len(l.conclusion) - 1
        if i < kl:
            l_ids = P[:kl] + ["A"]
            s = _elim(l, i, q, j)
            s_ids = _cut_order(l_ids, i, Q, j)
            moved = [x for x in s_ids if x != "A"] + ["A"]
            rebuilt = TensorRule(_arrange(s, s_ids, moved), r)
            rebuilt_ids = moved[:-1] + [P[kl]] + P[kl + 1:]
        else:
            ri = i - kl - 1
            r_ids = P[kl + 1:] + ["B"]
            s = _elim(r, ri, q, j)
            s_ids = _cut_order(r_ids, ri, Q, j)
            moved = [x for x in s_ids if x != "B"] + ["B"]
            rebuilt = TensorRule(l, _arrange(s, s_ids, moved))
            rebuilt_ids = P[:kl] + [P[kl]] + moved[:-1]
        return _arrange(rebuilt, rebuilt_ids, wanted)

    if isinstance(p, ParRule):
        last = len(P) - 1
        p_ids = P[:last] + ["A", "B"]
        s = _elim(p.premise, i, q, j)
        s_ids = _cut_order(p_ids, i, Q, j)
        moved = [x for x in s_ids if x not in ("A", "B")] + ["A", "B"]
        rebuilt = ParRule(_arrange(s, s_ids, moved))
        return _arrange(rebuilt, moved[:-2] + [P[last]], wanted)

    raise ProofTypingError(f"cut-free proof expected, found {type(p).__name__}")


def normalize(p: Proof) -> Proof:
    """Cut-free proof of the same sequent."""
    if isinstance(p, Axiom):
        return p
    if isinstance(p, TensorRule):
        return TensorRule(normalize(p.left), normalize(p.right))
    if isinstance(p, ParRule):
        return ParRule(normalize(p.premise))
    if isinstance(p, Exchange):
        return Exchange(normalize(p.premise), p.i, p.j)
    left, right = normalize(p.left), normalize(p.right)
    return _elim(left, len(left.conclusion) - 1, right, 0)


def count_cuts(p: Proof) -> int:
    if isinstance(p, Axiom):
        return 0
    if isinstance(p, (TensorRule, Cut)):
        return count_cuts(p.left) + count_cuts(p.right) + (1 if isinstance(p, Cut) else 0)
    return count_cuts(p.premise)


# Interpretation

@dataclass(frozen=True)
class AtomAssignment:
    """Carrier sizes of the atoms plus axiom weights.

    Axiom occurrences are numbered in left-to-right preorder from 0;
    ``occurrence_weights`` overrides ``axiom_weight`` (default: the unit).
    """

    atoms: Mapping[str, int]
    monoid: WeightMonoid = RATIONAL
    axiom_weight: Optional[Weight] = None
    occurrence_weights: Mapping[int, Weight] = field(default_factory=dict)

    def __post_init__(self):
        for name, size in self.atoms.items():
            if int(size) < 1:
                raise InterpretationError(f"atom {name} needs at least one point, got {size}")
        for w in [self.axiom_weight, *self.occurrence_weights.values()]:
            if w is not None and not w.is_zero and w.monoid != self.monoid:
                raise InvalidWeight(f"axiom weight tagged {w.monoid}, assignment uses {self.monoid}")

    def size(self, atom: str) -> int:
        try:
            return int(self.atoms[atom])
        except KeyError:
            raise InterpretationError(f"atom {atom} has no carrier size") from None

    def weight_for(self, occurrence: int) -> Weight:
        if occurrence in self.occurrence_weights:
            return self.occurrence_weights[occurrence]
        return self.axiom_weight if self.axiom_weight is not None else w_unit(self.monoid)


def formula_points(f: Formula, asg: AtomAssignment) -> List[str]:
    if isinstance(f, Atom):
        return [str(k) for k in range(asg.size(f.name))]
    return [f"L.{x}" for x in formula_points(f.left, asg)] + [f"R.{x}" for x in formula_points(f.right, asg)]


def location(position: Any, point: str) -> str:
    return f"{position}:{point}"


def _split(label: str) -> Tuple[str, str]:
    position, point = label.split(":", 1)
    return position, point


def sequent_carrier(conclusion: Sequence[Formula], asg: AtomAssignment) -> Carrier:
    return Carrier(tuple(location(i, x) for i, f in enumerate(conclusion) for x in formula_points(f, asg)))


def _place(t: Triskell, move: Callable[[int, str], str], carrier: Carrier) -> Triskell:
    def rename(label: str) -> str:
        position, point = _split(label)
        return move(int(position), point)

    return relabel(t, rename, rename, source=carrier, target=carrier)


def interp_ig(p: Proof, asg: AtomAssignment) -> Triskell:
    """Triskell over the locations of the conclusion sequent."""
    counter = itertools.count()
    return _interpret(p, asg, counter)


def _interpret(p: Proof, asg: AtomAssignment, counter) -> Triskell:
    carrier = sequent_carrier(p.conclusion, asg)
    monoid = asg.monoid

    if isinstance(p, Axiom):
        weight = asg.weight_for(next(counter))
        edges = []
        for x in formula_points(p.formula, asg):
            a, b = location(0, x), location(1, x)
            edges += [Edge(a, b, weight), Edge(b, a, weight)]
        return Triskell(carrier, carrier, monoid, tuple(edges))

    if isinstance(p, TensorRule):
        left = _interpret(p.left, asg, counter)
        right = _interpret(p.right, asg, counter)
        nl, nr = len(p.left.conclusion), len(p.right.conclusion)
        placed_left = _place(left, lambda k, x: location(nl - 1, f"L.{x}") if k == nl - 1 else location(k, x), carrier)
        placed_right = _place(right, lambda k, x: location(nl - 1, f"R.{x}") if k == nr - 1 else location(nl + k, x),
                              carrier)
        return union(placed_left, placed_right)

    if isinstance(p, ParRule):
        inner = _interpret(p.premise, asg, counter)
        n = len(p.premise.conclusion)

        def move(k: int, x: str) -> str:
            if k == n - 2:
                return location(n - 2, f"L.{x}")
            if k == n - 1:
                return location(n - 2, f"R.{x}")
            return location(k, x)

        return _place(inner, move, carrier)

    if isinstance(p, Exchange):
        inner = _interpret(p.premise, asg, counter)
        swap = {p.i: p.j, p.j: p.i}
        return _place(inner, lambda k, x: location(swap.get(k, k), x), carrier)

    left = _interpret(p.left, asg, counter)
    right = _interpret(p.right, asg, counter)
    nl = len(p.left.conclusion)
    cut_points = formula_points(p.left.conclusion[-1], asg)
    left_cut = [location("cutL", x) for x in cut_points]
    right_cut = [location("cutR", x) for x in cut_points]
    work = Carrier(carrier.points + tuple(left_cut) + tuple(right_cut))
    placed_left = _place(left, lambda k, x: location("cutL", x) if k == nl - 1 else location(k, x), work)
    placed_right = _place(right, lambda k, x: location("cutR", x) if k == 0 else location(nl - 2 + k, x), work)
    try:
        return exec_trace(union(placed_left, placed_right), left_cut + right_cut, right_cut + left_cut)
    except NonNilpotentExecution as exc:
        raise InterpretationError(f"cut on {p.left.conclusion[-1]} did not execute: {exc}") from exc


def interp_wr(p: Proof, asg: AtomAssignment) -> WeightedMatrix:
    """Static interpretation: the contraction of the dynamic one."""
    return contract(interp_ig(p, asg))


@dataclass(frozen=True)
class MappingReport:
    passed: bool
    failed_check: Optional[str] = None
    cell: Optional[Tuple[str, str]] = None
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "failed_check": self.failed_check,
            "cell": list(self.cell) if self.cell else None,
            "detail": self.detail,
        }


def _cells_of(form: CanonicalForm) -> Dict[Tuple[str, str], List[Tuple[Any, int]]]:
    cells: Dict[Tuple[str, str], List[Tuple[Any, int]]] = {}
    for s, t, w, n in form.entries:
        cells.setdefault((s, t), []).append((w, n))
    return cells


def first_cell_difference(a: CanonicalForm, b: CanonicalForm) -> Optional[Tuple[str, str]]:
    """First (source, target) cell, in sorted order, where two canonical forms differ."""
    ca, cb = _cells_of(a), _cells_of(b)
    for cell in sorted(set(ca) | set(cb)):
        if ca.get(cell) != cb.get(cell):
            return cell
    return None


def mapping_check(p: Proof, q: Proof, asg: AtomAssignment,
                  lift: Callable[[Triskell], Triskell] = fock_lift, bound: Optional[int] = None) -> MappingReport:
    """Dynamic-to-static mapping on a pair of proofs.

    (i) the lifted Fock image of the sum equals the tensor of the images, up to
    zero triskells and the subset bijection; (ii) the lifted image contracts to
    the relational Fock image of the contraction.
    """
    tp, tq = interp_ig(p, asg), interp_ig(q, asg)
    bound = settings().fock_bound if bound is None else bound
    total = len(tp.source) + len(tq.source)
    if total > bound:
        raise BoundExceeded(f"proof carriers total {total} points, bound is {bound}")

    summed = lift(direct_sum(tp, tq))
    bijection = powerset_sum_bijection(tp.source, tq.source)
    lifted_p, lifted_q = lift(tp), lift(tq)
    product = tensor_triskell(lifted_p, lifted_q)
    moved = relabel(summed, bijection, bijection, source=product.source, target=product.target)
    left, right = zero_normalize(moved), zero_normalize(product)
    if left != right:
        return MappingReport(False, "tensor", first_cell_difference(left, right),
                             "lifted image of the sum differs from the tensor of the lifted images")

    for name, t, lifted in (("p", tp, lifted_p), ("q", tq, lifted_q)):
        static, dynamic = fock_rel(contract(t)), contract(lifted)
        cell = static.first_difference(dynamic)
        if cell is not None:
            return MappingReport(False, "contraction", cell,
                                 f"relational Fock image of {name} differs from the contracted lifted image")
    return MappingReport(True)
