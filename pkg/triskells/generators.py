"""
Seeded random instances for the check suites.

Every trial draws from its own counter-based generator keyed by (seed, trial
index), so trials can run in any order or in parallel and still reproduce.
"""

from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .mll import Atom, AtomAssignment, Axiom, Cut, Exchange, Formula, Par, ParRule, Proof, Tensor, TensorRule, dual, reorder
from .relmat import WeightedMatrix
from .triskell import Carrier, Edge, Triskell
from .weights import MonoidKind, RATIONAL, Weight, WeightMonoid, make_weight


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def random_rational(rng: np.random.Generator, numerators: int = 5, denominators: int = 4,
                    nonzero: bool = True) -> Fraction:
    while True:
        value = Fraction(int(rng.integers(-numerators, numerators + 1)), int(rng.integers(1, denominators + 1)))
        if value != 0 or not nonzero:
            return value


def _payload(rng: np.random.Generator, monoid: WeightMonoid):
    kind = monoid.kind
    if kind is MonoidKind.UNIT:
        return 1
    if kind is MonoidKind.SIGNED_PAIR:
        return (int(rng.choice([-1, 1])), _payload(rng, monoid.base))
    if kind is MonoidKind.RATIONAL:
        return random_rational(rng)
    if kind is MonoidKind.NONNEG_REAL:
        return float(rng.uniform(0.05, 1.0))
    if kind is MonoidKind.SIGNED_REAL:
        return float(rng.uniform(0.05, 1.0)) * float(rng.choice([-1.0, 1.0]))
    return complex(rng.normal(), rng.normal())


def random_weight(rng: np.random.Generator, monoid: WeightMonoid) -> Weight:
    return make_weight(monoid, _payload(rng, monoid))


def random_carrier(rng: np.random.Generator, max_size: int, prefix: str = "p", min_size: int = 1) -> Carrier:
    size = int(rng.integers(min_size, max(min_size, max_size) + 1))
    return Carrier(tuple(f"{prefix}{k}" for k in range(size)))


def random_triskell(rng: np.random.Generator, source: Carrier, target: Carrier,
                    monoid: WeightMonoid = RATIONAL, max_edges: int = 12) -> Triskell:
    """Edges drawn uniformly between the carriers; parallel edges allowed."""
    if not len(source) or not len(target):
        return Triskell(source, target, monoid)
    count = int(rng.integers(0, max_edges + 1))
    edges = [
        Edge(source.points[int(rng.integers(len(source)))], target.points[int(rng.integers(len(target)))],
             random_weight(rng, monoid))
        for _ in range(count)
    ]
    return Triskell(source, target, monoid, tuple(edges))


def random_nilpotent(rng: np.random.Generator, points: Carrier, monoid: WeightMonoid = RATIONAL,
                     max_edges: int = 12, order: Optional[Sequence[str]] = None) -> Triskell:
    """Endo-triskell whose edges all go forward along ``order`` (a random order by default)."""
    order = list(order) if order is not None else [points.points[i] for i in rng.permutation(len(points))]
    if len(order) < 2:
        return Triskell(points, points, monoid)
    edges = []
    for _ in range(int(rng.integers(0, max_edges + 1))):
        a, b = sorted(int(i) for i in rng.choice(len(order), size=2, replace=False))
        edges.append(Edge(order[a], order[b], random_weight(rng, monoid)))
    return Triskell(points, points, monoid, tuple(edges))


def random_matrix(rng: np.random.Generator, rows: Carrier, cols: Optional[Carrier] = None,
                  kind: str = "rational", density: float = 0.7) -> WeightedMatrix:
    """``kind`` is rational, complex, real or unit-interval."""
    cols = rows if cols is None else cols
    table = np.empty((len(rows), len(cols)), dtype=object)
    for idx in np.ndindex(table.shape):
        if rng.random() > density:
            table[idx] = Fraction(0) if kind == "rational" else 0.0
        elif kind == "rational":
            table[idx] = random_rational(rng)
        elif kind == "complex":
            table[idx] = complex(rng.normal(), rng.normal())
        elif kind == "real":
            table[idx] = float(rng.normal())
        else:
            table[idx] = float(rng.uniform(0.0, 1.0))
    return WeightedMatrix(rows, cols, table)


# Proofs

def random_formula(rng: np.random.Generator, atoms: Sequence[str], depth: int = 2) -> Formula:
    if depth == 0 or rng.random() < 0.4:
        return Atom(str(rng.choice(list(atoms))), bool(rng.random() < 0.5))
    left = random_formula(rng, atoms, depth - 1)
    right = random_formula(rng, atoms, depth - 1)
    return Tensor(left, right) if rng.random() < 0.5 else Par(left, right)


def _move_last(p: Proof, positions: Sequence[int]) -> Proof:
    n = len(p.conclusion)
    rest = [k for k in range(n) if k not in positions]
    return reorder(p, rest + list(positions))


def proof_ending(rng: np.random.Generator, formula: Formula, eta: float = 0.7) -> Proof:
    """Cut-free proof whose last conclusion formula is ``formula``.

    Compound formulas are eta-expanded with probability ``eta``, so the last rule
    introduces the formula and cuts against it reach the key cases.
    """
    if isinstance(formula, Atom) or rng.random() >= eta:
        return Axiom(formula)
    if isinstance(formula, Tensor):
        left = proof_ending(rng, formula.left, eta)
        right = proof_ending(rng, formula.right, eta)
        return _move_last(TensorRule(left, right), [len(left.conclusion) - 1])
    left = proof_ending(rng, formula.left, eta)
    right = proof_ending(rng, formula.right, eta)
    left = Exchange(left, 0, len(left.conclusion) - 1)
    right = Exchange(right, 0, len(right.conclusion) - 1)
    joined = TensorRule(left, right)
    return ParRule(_move_last(joined, [0, len(left.conclusion)]))


def random_proof(rng: np.random.Generator, atoms: Sequence[str], cuts: int = 2, depth: int = 2) -> Proof:
    """Typed proof with exactly ``cuts`` cuts, shuffled by a final random exchange."""
    proof = _random_cut_proof(rng, atoms, cuts, depth)
    n = len(proof.conclusion)
    if n > 2 and rng.random() < 0.5:
        i, j = (int(k) for k in rng.choice(n, size=2, replace=False))
        proof = Exchange(proof, i, j)
    if n > 2 and rng.random() < 0.3:
        proof = ParRule(proof)
    return proof


def _random_cut_proof(rng: np.random.Generator, atoms: Sequence[str], cuts: int, depth: int) -> Proof:
    if cuts == 0:
        return proof_ending(rng, random_formula(rng, atoms, depth))
    cut_formula = random_formula(rng, atoms, depth)
    split = int(rng.integers(0, cuts))
    left = _with_context(rng, proof_ending(rng, cut_formula), atoms, split, depth)
    right = _with_context(rng, proof_ending(rng, dual(cut_formula)), atoms, cuts - 1 - split, depth)
    right = reorder(right, [len(right.conclusion) - 1] + list(range(len(right.conclusion) - 1)))
    return Cut(left, right)


def _with_context(rng: np.random.Generator, p: Proof, atoms: Sequence[str], cuts: int, depth: int) -> Proof:
    """Tensor a proof carrying ``cuts`` cuts into the context of p; p's last formula stays last."""
    if cuts == 0:
        return p
    other = _random_cut_proof(rng, atoms, cuts, depth)
    front = Exchange(p, 0, len(p.conclusion) - 1)
    joined = TensorRule(front, other)
    return _move_last(joined, [0])


def random_assignment(rng: np.random.Generator, atoms: Sequence[str], max_points: int = 3,
                      monoid: WeightMonoid = RATIONAL, occurrences: int = 0) -> AtomAssignment:
    """Atom sizes up to ``max_points``; the axiom weight and the weights of the
    first ``occurrences`` axiom occurrences are drawn from ``monoid``."""
    sizes = {a: int(rng.integers(1, max_points + 1)) for a in atoms}
    weights = {k: random_weight(rng, monoid) for k in range(occurrences)}
    return AtomAssignment(sizes, monoid, axiom_weight=random_weight(rng, monoid), occurrence_weights=weights)
