"""
Randomised check suites.

Each suite runs a number of independent trials. Trial i draws from its own
generator keyed by (seed, i); a trial either passes or returns a failure with a
serialised counterexample. Reports never contain timings, so the same seed and
flags give byte-identical output.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, NamedTuple, Optional

import numpy as np

from .config import settings
from .errors import BoundExceeded, TriskellError, UnknownSuite
from .fock import (
    danos_ehrhard_coefficient,
    det_m,
    fock_lift,
    fock_rel,
    fock_sym,
    fock_sym_rel,
    multinomial,
    multiset_factorial,
    multiset_sum_bijection,
    multisets,
    powerset_sum_bijection,
    tr_m,
)
from .generators import (
    random_assignment,
    random_matrix,
    random_proof,
    random_triskell,
    random_weight,
    trial_rng,
)
from .mll import Atom, Axiom, count_cuts, interp_ig, mapping_check, normalize, sequent_carrier, sequent_str
from .qcs import ig_qcs_agreement, measurement, series_coefficients, series_term, trace_series
from .relmat import (
    WeightedMatrix,
    contract,
    identity_matrix,
    mat_add,
    mat_compose,
    mat_det,
    mat_dsum,
    mat_tensor,
    mat_trace,
    relabel_matrix,
    spectral_radius,
)
from .serialize import matrix_to_json, number_to_json, triskell_to_json
from .triskell import (
    EMPTY,
    Carrier,
    Edge,
    Triskell,
    canonical,
    compose,
    direct_sum,
    exec_trace,
    identity,
    juxtapose,
    relabel,
    restrict,
    scale,
    symmetry,
    tensor,
    union,
    zero_normalize,
)
from .weights import (
    NONNEG_REAL,
    RATIONAL,
    UNIT,
    MeasureMap,
    make_weight,
    measure,
    measure_map,
    numeric_close,
    signed_pair,
)

logger = logging.getLogger(__name__)


class TrialFailure(NamedTuple):
    detail: str
    counterexample: Dict[str, Any]


TrialFn = Callable[[np.random.Generator, int, float], Optional[TrialFailure]]


@dataclass(frozen=True)
class CheckSuite:
    name: str
    description: str
    trial: TrialFn = field(repr=False)
    size_limit: int
    default_trials: int = 100
    default_max_size: int = 4
    default_tol: Optional[float] = None
    min_size: int = 1


SUITES: Dict[str, CheckSuite] = {}


def register(name: str, description: str, size_limit: int, default_trials: int = 100,
             default_max_size: int = 4, default_tol: Optional[float] = None, min_size: int = 1):
    def wrap(fn: TrialFn) -> TrialFn:
        SUITES[name] = CheckSuite(name, description, fn, size_limit, default_trials, default_max_size, default_tol,
                                  min_size)
        return fn
    return wrap


@dataclass(frozen=True)
class TrialOutcome:
    index: int
    passed: bool
    detail: str = ""
    counterexample: Optional[Dict[str, Any]] = None


@dataclass(frozen=True)
class CheckReport:
    suite: str
    seed: int
    trials: int
    max_size: int
    tol: float
    outcomes: List[TrialOutcome]

    @property
    def failures(self) -> List[TrialOutcome]:
        return [o for o in self.outcomes if not o.passed]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, Any]:
        failures = self.failures
        first = failures[0] if failures else None
        return {
            "suite": self.suite,
            "seed": self.seed,
            "trials": self.trials,
            "max_size": self.max_size,
            "tol": self.tol,
            "passed": len(self.outcomes) - len(failures),
            "failed": len(failures),
            "ok": self.ok,
            "failures": [{"trial": o.index, "detail": o.detail} for o in failures],
            "first_counterexample": None if first is None else {
                "trial": first.index,
                "detail": first.detail,
                "data": first.counterexample,
            },
        }

    def summary_lines(self) -> List[str]:
        total = len(self.outcomes)
        if self.ok:
            return [f"✓ {self.suite}: {total}/{total} trials passed (seed {self.seed})"]
        first = self.failures[0]
        return [
            f"✗ {self.suite}: {len(self.failures)}/{total} trials failed (seed {self.seed})",
            f"  first failure at trial {first.index}: {first.detail}",
        ]


def run_check(name: str, seed: Optional[int] = None, trials: Optional[int] = None, tol: Optional[float] = None,
              max_size: Optional[int] = None, jobs: Optional[int] = None) -> CheckReport:
    """Run a registered suite; the trials are assembled in index order whatever ``jobs`` is."""
    if name not in SUITES:
        raise UnknownSuite(f"unknown suite {name!r}; known suites: {', '.join(sorted(SUITES))}")
    suite = SUITES[name]
    config = settings()
    seed = config.seed if seed is None else seed
    trials = config.trials.get(name, suite.default_trials) if trials is None else trials
    max_size = config.max_size.get(name, suite.default_max_size) if max_size is None else max_size
    if tol is None:
        tol = suite.default_tol if suite.default_tol is not None else config.tol
    jobs = config.jobs if jobs is None else jobs
    if max_size > suite.size_limit:
        raise BoundExceeded(f"{name}: max size {max_size} exceeds the suite limit {suite.size_limit}")
    if max_size < suite.min_size or trials < 0:
        raise BoundExceeded(f"{name}: max size must be at least {suite.min_size} and trials non-negative")

    def one(index: int) -> TrialOutcome:
        rng = trial_rng(seed, index)
        try:
            failure = suite.trial(rng, max_size, tol)
        except TriskellError as exc:
            failure = TrialFailure(f"{type(exc).__name__}: {exc}", {})
        if failure is None:
            return TrialOutcome(index, True)
        return TrialOutcome(index, False, failure.detail, failure.counterexample)

    logger.info("running %s: %d trials, seed %d, max size %d, %d jobs", name, trials, seed, max_size, jobs)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(one, range(trials)))
    else:
        outcomes = [one(i) for i in range(trials)]
    return CheckReport(name, seed, trials, max_size, tol, outcomes)


# Helpers

def _carrier(prefix: str, n: int) -> Carrier:
    return Carrier(tuple(f"{prefix}{k}" for k in range(n)))


def _size(rng: np.random.Generator, max_size: int, low: int = 1) -> int:
    return int(rng.integers(low, max(low, max_size) + 1))


def _same(law: str, lhs: Triskell, rhs: Triskell, **inputs: Triskell) -> Optional[TrialFailure]:
    if canonical(lhs) == canonical(rhs):
        return None
    data = {k: triskell_to_json(v) for k, v in inputs.items()}
    data.update(lhs=triskell_to_json(lhs), rhs=triskell_to_json(rhs))
    return TrialFailure(f"{law}: the two sides differ", data)


def _same_matrix(law: str, lhs: WeightedMatrix, rhs: WeightedMatrix, tol: float,
                 **inputs: WeightedMatrix) -> Optional[TrialFailure]:
    cell = lhs.first_difference(rhs, tol) if lhs.rows == rhs.rows and lhs.cols == rhs.cols else ("*", "*")
    if cell is None:
        return None
    data = {k: matrix_to_json(v) for k, v in inputs.items()}
    data.update(lhs=matrix_to_json(lhs), rhs=matrix_to_json(rhs), cell=list(cell))
    return TrialFailure(f"{law}: matrices differ at {cell}", data)


def _same_number(law: str, lhs: Any, rhs: Any, tol: float, **inputs: Any) -> Optional[TrialFailure]:
    """Exact for rationals; floats are compared relative to max(1, |rhs|)."""
    if numeric_close(lhs, rhs, tol * max(1.0, abs(complex(rhs)))):
        return None
    data = {k: (triskell_to_json(v) if isinstance(v, Triskell) else matrix_to_json(v)) for k, v in inputs.items()}
    data.update(lhs=number_to_json(lhs), rhs=number_to_json(rhs))
    return TrialFailure(f"{law}: {lhs} != {rhs}", data)


def _first(*checks: Callable[[], Optional[TrialFailure]]) -> Optional[TrialFailure]:
    for check in checks:
        failure = check()
        if failure is not None:
            return failure
    return None


def _traceable(rng: np.random.Generator, xs: Carrier, us: Carrier, ys: Carrier, max_edges: int = 12) -> Triskell:
    """Random X+U -> Y+U triskell whose U-to-U edges go forward in carrier order."""
    source = Carrier(xs.points + us.points)
    target = Carrier(ys.points + us.points)
    edges = []
    for _ in range(int(rng.integers(0, max_edges + 1))):
        s = source.points[int(rng.integers(len(source)))]
        t = target.points[int(rng.integers(len(target)))]
        if s in us and t in us and us.index(t) <= us.index(s):
            continue
        edges.append(Edge(s, t, random_weight(rng, RATIONAL)))
    return Triskell(source, target, RATIONAL, tuple(edges))


# Traced monoidal structure

@register("thm3.1", "traced monoidal laws of execution", size_limit=8, default_trials=200, default_max_size=6)
def check_traced_laws(rng: np.random.Generator, max_size: int, tol: float) -> Optional[TrialFailure]:
    half = max(1, max_size // 2)
    xs, ys = _carrier("x", _size(rng, half)), _carrier("y", _size(rng, half))
    us = _carrier("u", _size(rng, half))
    t = _traceable(rng, xs, us, ys)
    traced = exec_trace(t, "u", "u")

    def yanking():
        sym = symmetry(xs)
        return _same("yanking", exec_trace(sym, "R.", "R."), relabel(identity(xs), lambda p: f"L.{p}"), symmetry=sym)

    def vanishing_empty():
        plain = _traceable(rng, xs, EMPTY, ys)
        return _same("vanishing over the empty carrier", exec_trace(plain, [], []), plain, t=plain)

    def vanishing_sum():
        vs = _carrier("v", _size(rng, half))
        hidden = Carrier(us.points + vs.points)
        both = _traceable(rng, xs, hidden, ys)
        lhs = exec_trace(both, list(hidden), list(hidden))
        rhs = exec_trace(exec_trace(both, "v", "v"), "u", "u")
        return _same("vanishing over a sum", lhs, rhs, t=both)

    def superposing():
        g = random_triskell(rng, _carrier("w", _size(rng, half)), _carrier("z", _size(rng, half)), RATIONAL)
        return _same("superposing", juxtapose(traced, g), exec_trace(juxtapose(t, g), "u", "u"), t=t, g=g)

    def naturality_left():
        f = random_triskell(rng, _carrier("a", _size(rng, half)), xs, RATIONAL)
        lhs = exec_trace(compose(juxtapose(f, identity(us)), t), "u", "u")
        return _same("naturality in the source", lhs, compose(f, traced), t=t, f=f)

    def naturality_right():
        g = random_triskell(rng, ys, _carrier("b", _size(rng, half)), RATIONAL)
        lhs = exec_trace(compose(t, juxtapose(g, identity(us))), "u", "u")
        return _same("naturality in the target", lhs, compose(traced, g), t=t, g=g)

    def sliding():
        n = _size(rng, half)
        hu, hv = _carrier("u", n), _carrier("v", n)
        source, target = Carrier(xs.points + hu.points), Carrier(ys.points + hv.points)
        edges = []
        for _ in range(int(rng.integers(0, 13))):
            s = source.points[int(rng.integers(len(source)))]
            tg = target.points[int(rng.integers(len(target)))]
            if s in hu and tg in hv and hv.index(tg) <= hu.index(s):
                continue
            edges.append(Edge(s, tg, random_weight(rng, RATIONAL)))
        body = Triskell(source, target, RATIONAL, tuple(edges))
        h_edges = []
        for _ in range(int(rng.integers(0, 2 * n + 1))):
            j, k = sorted(int(i) for i in rng.integers(0, n, size=2))
            h_edges.append(Edge(hv.points[j], hu.points[k], random_weight(rng, RATIONAL)))
        h = Triskell(hv, hu, RATIONAL, tuple(h_edges))
        lhs = exec_trace(compose(body, juxtapose(identity(ys), h)), "u", "u")
        rhs = exec_trace(compose(juxtapose(identity(xs), h), body), "v", "v")
        return _same("sliding", lhs, rhs, t=body, h=h)

    return _first(yanking, vanishing_empty, vanishing_sum, superposing, naturality_left, naturality_right, sliding)


@register("thm3.6", "contraction is a strict monoidal functor to matrices", size_limit=8,
          default_trials=200, default_max_size=6)
def check_contraction_functor(rng: np.random.Generator, max_size: int, tol: float) -> Optional[TrialFailure]:
    a, b, c = (_carrier(p, _size(rng, max_size)) for p in "abc")
    f = random_triskell(rng, a, b, RATIONAL)
    g = random_triskell(rng, b, c, RATIONAL)
    h = random_triskell(rng, c, a, RATIONAL)
    cf, cg, ch = contract(f), contract(g), contract(h)
    return _first(
        lambda: _same_matrix("composition", contract(compose(f, g)), mat_compose(cf, cg), tol, f=cf, g=cg),
        lambda: _same_matrix("tensor", contract(tensor(f, h)), mat_tensor(cf, ch), tol, f=cf, h=ch),
        lambda: _same_matrix("direct sum", contract(direct_sum(f, h)), mat_dsum(cf, ch), tol, f=cf, h=ch),
    )


# Fock functors

@register("thm4.3", "relational Fock functor: strict monoidality and functoriality", size_limit=8,
          default_trials=200, default_max_size=6)
def check_fock_rel(rng: np.random.Generator, max_size: int, tol: float) -> Optional[TrialFailure]:
    half = max(1, max_size // 2)
    a, b = _carrier("a", _size(rng, half)), _carrier("b", _size(rng, half))
    c, d = _carrier("c", _size(rng, half)), _carrier("d", _size(rng, half))
    m, n = random_matrix(rng, a, b), random_matrix(rng, c, d)
    rows, cols = powerset_sum_bijection(a, c), powerset_sum_bijection(b, d)
    summed = relabel_matrix(fock_rel(mat_dsum(m, n)), rows, cols)
    k = random_matrix(rng, b, _carrier("e", _size(rng, max_size)))
    return _first(
        lambda: _same_matrix("monoidality", summed, mat_tensor(fock_rel(m), fock_rel(n)), tol, m=m, n=n),
        lambda: _same_matrix("functoriality", fock_rel(mat_compose(m, k)), mat_compose(fock_rel(m), fock_rel(k)),
                             tol, m=m, n=k),
    )


@register("thm4.7", "lifted Fock functor up to zero triskells", size_limit=5, default_trials=200, default_max_size=4)
def check_fock_lift(rng: np.random.Generator, max_size: int, tol: float) -> Optional[TrialFailure]:
    a, b, c = (_carrier(p, _size(rng, max_size)) for p in "abc")
    f = random_triskell(rng, a, b, RATIONAL, max_edges=2 * max_size)
    g = random_triskell(rng, b, c, RATIONAL, max_edges=2 * max_size)

    def functoriality():
        lhs, rhs = fock_lift(compose(f, g)), compose(fock_lift(f), fock_lift(g))
        if zero_normalize(lhs) == zero_normalize(rhs):
            return None
        return TrialFailure("functoriality: lifted images differ modulo zero triskells",
                            {"f": triskell_to_json(f), "g": triskell_to_json(g)})

    def monoidality():
        half = max(1, max_size // 2)
        t = random_triskell(rng, _carrier("p", _size(rng, half)), _carrier("q", _size(rng, half)), RATIONAL, 6)
        u = random_triskell(rng, _carrier("r", _size(rng, half)), _carrier("s", _size(rng, half)), RATIONAL, 6)
        product = tensor(fock_lift(t), fock_lift(u))
        src, tgt = powerset_sum_bijection(t.source, u.source), powerset_sum_bijection(t.target, u.target)
        moved = relabel(fock_lift(direct_sum(t, u)), src, tgt, source=product.source, target=product.target)
        if zero_normalize(moved) == zero_normalize(product):
            return None
        return TrialFailure("monoidality: lifted images differ modulo zero triskells",
                            {"t": triskell_to_json(t), "u": triskell_to_json(u)})

    def contraction():
        return _same_matrix("contraction", contract(fock_lift(f)), fock_rel(contract(f)), tol, f=contract(f))

    return _first(functoriality, monoidality, contraction)


@register("thm5.1", "trace of the Fock image is det(1 + A)", size_limit=10, default_trials=200, default_max_size=8)
def check_trace_det(rng: np.random.Generator, max_size: int, tol: float) -> Optional[TrialFailure]:
    rows = _carrier("a", _size(rng, max_size))
    kind = "rational" if rng.random() < 0.5 else "complex"
    a = random_matrix(rng, rows, kind=kind)
    lhs = mat_trace(fock_rel(a, diagonal_only=True))
    rhs = mat_det(mat_add(identity_matrix(rows, a.codomain), a))
    return _same_number(f"trace/det over {kind}", lhs, rhs, 0 if kind == "rational" else tol, a=a)


@register("thm5.2", "m-determinant of 1 + T is the m-trace of the lifted Fock image", size_limit=7,
          default_trials=200, default_max_size=6)
def check_det_m(rng: np.random.Generator, max_size: int, tol: float) -> Optional[TrialFailure]:
    monoid = RATIONAL if rng.random() < 0.5 else signed_pair(RATIONAL)
    points = _carrier("p", _size(rng, max_size))
    t = random_triskell(rng, points, points, monoid, max_edges=2 * len(points))
    m = measure_map("identity", monoid)
    lhs = det_m(union(identity(points, monoid), t), m)
    return _same_number("det_m/tr_m", lhs, tr_m(fock_lift(t), m), 0, t=t)


@register("prop6.12", "symmetric Fock functor: strict monoidality and contraction", size_limit=5,
          default_trials=200, default_max_size=4)
def check_fock_sym(rng: np.random.Generator, max_size: int, tol: float) -> Optional[TrialFailure]:
    half = max(1, max_size // 2)
    degree = int(rng.integers(1, 4))
    t = random_triskell(rng, _carrier("p", _size(rng, half)), _carrier("q", _size(rng, half)), RATIONAL, 4)
    u = random_triskell(rng, _carrier("r", _size(rng, half)), _carrier("s", _size(rng, half)), RATIONAL, 4)
    src = multiset_sum_bijection(t.source, u.source, degree)
    tgt = multiset_sum_bijection(t.target, u.target, degree)
    image_src, image_tgt = Carrier(tuple(src.values())), Carrier(tuple(tgt.values()))

    def monoidality():
        summed = relabel(fock_sym(direct_sum(t, u), degree), src, tgt, source=image_src, target=image_tgt)
        product = restrict(tensor(fock_sym(t, degree), fock_sym(u, degree)), image_src, image_tgt)
        return _same(f"monoidality up to degree {degree}", summed, product, t=t, u=u)

    def contraction():
        return _same_matrix("contraction", contract(fock_sym(t, degree)), fock_sym_rel(contract(t), degree), tol,
                            t=contract(t))

    return _first(monoidality, contraction)


@register("de-bridge", "contracted symmetric weights against the Danos-Ehrhard coefficients", size_limit=5,
          default_trials=100, default_max_size=4)
def check_de_bridge(rng: np.random.Generator, max_size: int, tol: float) -> Optional[TrialFailure]:
    points = _carrier("p", _size(rng, max_size))
    cells = {}
    for x in points:
        for y in points:
            if x != y and rng.random() < 0.6:
                cells[(x, y)] = Fraction(int(rng.integers(1, 5)), 4)
    r = Triskell(points, points, RATIONAL, tuple(Edge(x, y, make_weight(RATIONAL, w)) for (x, y), w in cells.items()))
    degree = 3
    weights = contract(fock_sym(r, degree))
    m = contract(r)
    members = multisets(points, degree).members
    for mu_label, mu in members.items():
        for nu_label, nu in members.items():
            if len(mu) != len(nu):
                continue
            expected = multiset_factorial(mu) * danos_ehrhard_coefficient(m, mu, nu)
            if weights[mu_label, nu_label] != expected:
                return TrialFailure(f"weight at ({mu_label}, {nu_label}) is {weights[mu_label, nu_label]}, "
                                    f"expected {expected}", {"r": triskell_to_json(r)})
            if mu == nu and multinomial(mu) * weights[mu_label, nu_label] != \
                    math.factorial(len(mu)) * danos_ehrhard_coefficient(m, mu, nu):
                return TrialFailure(f"diagonal identity fails at {mu_label}", {"r": triskell_to_json(r)})
    return None


# Coherence spaces

@register("prop6.8", "linearity and cyclicity of the m-trace", size_limit=8, default_trials=500, default_max_size=6)
def check_trace_linearity(rng: np.random.Generator, max_size: int, tol: float) -> Optional[TrialFailure]:
    if rng.random() < 0.5:
        monoid, m = RATIONAL, measure_map("identity", RATIONAL)
    else:
        monoid, m = NONNEG_REAL, measure_map("identity", NONNEG_REAL)
    exact = monoid is RATIONAL
    a, b = _carrier("a", _size(rng, max_size)), _carrier("b", _size(rng, max_size))
    t = random_triskell(rng, a, a, monoid)
    u = random_triskell(rng, a, a, monoid)
    f = random_triskell(rng, a, b, monoid)
    g = random_triskell(rng, b, a, monoid)
    w = random_weight(rng, monoid)
    eps = 0 if exact else tol
    return _first(
        lambda: _same_number("union", tr_m(union(t, u), m), tr_m(t, m) + tr_m(u, m), eps, t=t, u=u),
        lambda: _same_number("scaling", tr_m(scale(w, t), m), measure(m, w) * tr_m(t, m), eps, t=t),
        lambda: _same_number("cyclicity", tr_m(compose(f, g), m), tr_m(compose(g, f), m), eps, f=f, g=g),
    )


@register("prop6.9", "measurement equals its trace series", size_limit=5, default_trials=100, default_max_size=4,
          default_tol=1e-7)
def check_measurement(rng: np.random.Generator, max_size: int, tol: float) -> Optional[TrialFailure]:
    web = _carrier("w", _size(rng, max_size))
    n = len(web)
    a = random_triskell(rng, web, web, RATIONAL, max_edges=n + 2)
    b = random_triskell(rng, web, web, RATIONAL, max_edges=n + 2)
    radius = spectral_radius(contract(compose(a, b)))
    if radius > 0.8:
        factor = Fraction(int(800 / radius), 1000)
        b = scale(make_weight(RATIONAL, factor), b)
    m: MeasureMap = measure_map("identity", RATIONAL)
    ab, coeffs = compose(a, b), series_coefficients(RATIONAL)
    for k, term in enumerate(itertools.islice(trace_series(ab, m, coeffs), 2), start=1):
        failure = _same_number(f"series term {k}", series_term(ab, coeffs, m, k), term, tol, a=a, b=b)
        if failure is not None:
            return failure
    result = measurement(a, b, m, coeffs, tol=tol / 100)
    failure = _same_number("measurement", result.lhs, result.mid, tol, a=a, b=b)
    if failure is not None:
        return failure
    agreement = ig_qcs_agreement(a, b, m, tol=tol / 100)
    if not agreement.agree:
        return TrialFailure(f"orthogonality disagrees: measurement {agreement.ig_value}, "
                            f"Fock trace {agreement.qcs_value}", {"a": triskell_to_json(a), "b": triskell_to_json(b)})
    return None


# Proofs

_ATOMS = ("X", "Y", "Z")
# Axiom occurrences given their own weight; later ones take the common axiom weight
_OCCURRENCES = 12


@register("mll-invariance", "interpretation is invariant under cut elimination", size_limit=3,
          default_trials=300, default_max_size=3)
def check_cut_invariance(rng: np.random.Generator, max_size: int, tol: float) -> Optional[TrialFailure]:
    proof = random_proof(rng, _ATOMS, cuts=int(rng.integers(0, 7)), depth=2)
    asg = random_assignment(rng, _ATOMS, max_size, UNIT)
    normal = normalize(proof)
    data = {"proof": str(proof), "normal": str(normal), "atoms": dict(asg.atoms)}
    if count_cuts(normal) or normal.conclusion != proof.conclusion:
        return TrialFailure(f"normal form is not a cut-free proof of {sequent_str(proof.conclusion)}", data)
    before = interp_ig(proof, asg)
    after = interp_ig(normal, asg)
    if canonical(before) != canonical(after):
        return TrialFailure("interpretations differ after cut elimination", data)
    out_degree: Dict[str, int] = {}
    in_degree: Dict[str, int] = {}
    for e in after.edges:
        out_degree[e.src] = out_degree.get(e.src, 0) + 1
        in_degree[e.tgt] = in_degree.get(e.tgt, 0) + 1
    if any(v > 1 for v in out_degree.values()) or any(v > 1 for v in in_degree.values()):
        return TrialFailure("cut-free interpretation is not a partial permutation", data)
    weighted = random_assignment(rng, _ATOMS, max_size, RATIONAL, occurrences=_OCCURRENCES)
    assigned = {weighted.weight_for(k) for k in range(_OCCURRENCES + 1)}
    stray = [e for e in interp_ig(normal, weighted).edges if e.weight not in assigned]
    if stray:
        return TrialFailure(f"edge {stray[0].src}->{stray[0].tgt} carries {stray[0].weight}, not an axiom weight",
                            dict(data, weights={str(k): str(w) for k, w in weighted.occurrence_weights.items()}))
    return None


@register("mll-mapping", "dynamic-to-static mapping on pairs of proofs", size_limit=10,
          default_trials=100, default_max_size=8, min_size=4)
def check_mapping(rng: np.random.Generator, max_size: int, tol: float) -> Optional[TrialFailure]:
    asg = random_assignment(rng, _ATOMS, 2 if max_size >= 8 else 1, RATIONAL, occurrences=_OCCURRENCES)
    budget = max_size // 2

    def small_proof():
        for _ in range(20):
            candidate = random_proof(rng, _ATOMS, cuts=int(rng.integers(0, 3)), depth=1)
            if len(sequent_carrier(candidate.conclusion, asg)) <= budget:
                return candidate
        return Axiom(Atom("X"))

    p, q = small_proof(), small_proof()
    report = mapping_check(p, q, asg, bound=max_size)
    if report.passed:
        return None
    return TrialFailure(f"{report.failed_check} check failed at {report.cell}",
                        {"p": str(p), "q": str(q), "atoms": dict(asg.atoms)})
