"""
Weighted relations as matrices over a numeric codomain.

Matrices are indexed by carriers (row = source, column = target) and stored as
dense numpy object arrays so that exact ``Fraction`` entries stay exact while
floating entries use ordinary Python arithmetic. Composition is diagrammatic:
``mat_compose(m, n)`` is the product m.n, so that
``contract(compose(f, g)) == mat_compose(contract(f), contract(g))``.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .config import settings
from .errors import BoundExceeded, CarrierMismatch, InvalidWeight, NoConvergence, SeriesDivergence
from .permutations import heap_permutations
from .triskell import (
    Carrier,
    Edge,
    PointSpec,
    Triskell,
    carrier_product,
    carrier_sum,
    product_label,
    resolve_points,
    sum_label,
)
from .weights import (
    COMPLEX,
    RATIONAL,
    SIGNED_REAL,
    Codomain,
    MeasureMap,
    NumericValue,
    WeightMonoid,
    from_numeric,
    measure,
    numeric_close,
    to_numeric,
)

logger = logging.getLogger(__name__)


def _scalar(value: Any) -> NumericValue:
    if isinstance(value, (bool, np.bool_)):
        raise InvalidWeight(f"{value!r} is not a number")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (float, np.floating)):
        number: NumericValue = float(value)
    elif isinstance(value, (complex, np.complexfloating)):
        number = complex(value)
    else:
        raise InvalidWeight(f"{value!r} is not a number")
    if not np.isfinite(number):
        raise InvalidWeight(f"non-finite matrix entry {value!r}")
    return number


def _widest(values) -> Codomain:
    codomain = Codomain.RATIONAL
    for v in values:
        if isinstance(v, complex):
            return Codomain.COMPLEX
        if isinstance(v, float):
            codomain = Codomain.REAL
    return codomain


@dataclass(frozen=True, eq=False)
class WeightedMatrix:
    rows: Carrier
    cols: Carrier
    entries: Any

    def __post_init__(self):
        shape = (len(self.rows), len(self.cols))
        given = np.asarray(self.entries, dtype=object)
        table = np.empty(shape, dtype=object)
        if given.size == 0 and table.size == 0:
            pass
        elif given.shape != shape:
            raise CarrierMismatch(f"table of shape {given.shape} does not match carriers {shape}")
        else:
            for idx, value in np.ndenumerate(given):
                table[idx] = _scalar(value)
        table.setflags(write=False)
        object.__setattr__(self, "entries", table)

    @classmethod
    def from_rows(cls, rows: Sequence[str], cols: Sequence[str], table: Sequence[Sequence[Any]]) -> "WeightedMatrix":
        """Build from a table listed in the given label order (not necessarily sorted)."""
        row_carrier, col_carrier = Carrier(tuple(rows)), Carrier(tuple(cols))
        ordered = np.empty((len(row_carrier), len(col_carrier)), dtype=object)
        for i, r in enumerate(rows):
            for j, c in enumerate(cols):
                ordered[row_carrier.index(str(r)), col_carrier.index(str(c))] = table[i][j]
        return cls(row_carrier, col_carrier, ordered)

    @classmethod
    def from_cells(cls, rows: Carrier, cols: Carrier, cells: Mapping[Tuple[str, str], Any],
                   codomain: Codomain = Codomain.RATIONAL) -> "WeightedMatrix":
        table = np.full((len(rows), len(cols)), codomain.zero, dtype=object)
        for (r, c), value in cells.items():
            table[rows.index(r), cols.index(c)] = value
        return cls(rows, cols, table)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    @property
    def codomain(self) -> Codomain:
        return _widest(self.entries.flat)

    def __getitem__(self, key: Tuple[str, str]) -> NumericValue:
        r, c = key
        return self.entries[self.rows.index(r), self.cols.index(c)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightedMatrix):
            return NotImplemented
        return (self.rows == other.rows and self.cols == other.cols
                and all(a == b for a, b in zip(self.entries.flat, other.entries.flat)))

    __hash__ = None

    def allclose(self, other: "WeightedMatrix", tol: Optional[float] = None) -> bool:
        if self.rows != other.rows or self.cols != other.cols:
            return False
        return all(numeric_close(a, b, tol) for a, b in zip(self.entries.flat, other.entries.flat))

    def first_difference(self, other: "WeightedMatrix", tol: Optional[float] = None) -> Optional[Tuple[str, str]]:
        """First (row, col) cell, in carrier order, where the two matrices disagree."""
        for (i, j), value in np.ndenumerate(self.entries):
            if not numeric_close(value, other.entries[i, j], tol):
                return self.rows.points[i], self.cols.points[j]
        return None

    def nonzero_cells(self) -> Dict[Tuple[str, str], NumericValue]:
        return {(self.rows.points[i], self.cols.points[j]): v
                for (i, j), v in np.ndenumerate(self.entries) if v != 0}

    def to_array(self) -> np.ndarray:
        """Float or complex numpy copy, for LAPACK routines."""
        dtype = complex if self.codomain is Codomain.COMPLEX else float
        return _as_array(self.entries, dtype)

    def __repr__(self) -> str:
        return f"WeightedMatrix(rows={list(self.rows)}, cols={list(self.cols)}, entries={self.entries.tolist()})"


def _as_array(table: np.ndarray, dtype: type) -> np.ndarray:
    convert = complex if dtype is complex else float
    return np.array([[convert(v) for v in row] for row in table.tolist()], dtype=dtype).reshape(table.shape)


def identity_matrix(c: Carrier, codomain: Codomain = Codomain.RATIONAL) -> WeightedMatrix:
    table = np.full((len(c), len(c)), codomain.zero, dtype=object)
    for i in range(len(c)):
        table[i, i] = codomain.one
    return WeightedMatrix(c, c, table)


def zero_matrix(rows: Carrier, cols: Carrier, codomain: Codomain = Codomain.RATIONAL) -> WeightedMatrix:
    return WeightedMatrix(rows, cols, np.full((len(rows), len(cols)), codomain.zero, dtype=object))


def contract(t: Triskell) -> WeightedMatrix:
    """Sum the weights of parallel edges into matrix entries."""
    codomain = t.monoid.codomain
    table = np.full((len(t.source), len(t.target)), codomain.zero, dtype=object)
    for e in t.edges:
        i, j = t.source.index(e.src), t.target.index(e.tgt)
        table[i, j] = table[i, j] + to_numeric(e.weight, t.monoid)
    return WeightedMatrix(t.source, t.target, table)


def m_contract(t: Triskell, m: MeasureMap) -> WeightedMatrix:
    """Contraction after pushing every edge weight through ``m``."""
    table = np.full((len(t.source), len(t.target)), m.codomain.zero, dtype=object)
    for e in t.edges:
        i, j = t.source.index(e.src), t.target.index(e.tgt)
        table[i, j] = table[i, j] + measure(m, e.weight)
    return WeightedMatrix(t.source, t.target, table)


_DEFAULT_MONOID = {Codomain.RATIONAL: RATIONAL, Codomain.REAL: SIGNED_REAL, Codomain.COMPLEX: COMPLEX}


def embed(mat: WeightedMatrix, minimal: bool = True, monoid: Optional[WeightMonoid] = None) -> Triskell:
    """The simple triskell of a matrix; ``minimal`` drops zero entries."""
    monoid = monoid or _DEFAULT_MONOID[mat.codomain]
    edges = []
    for (i, j), value in np.ndenumerate(mat.entries):
        if minimal and value == 0:
            continue
        edges.append(Edge(mat.rows.points[i], mat.cols.points[j], from_numeric(monoid, value)))
    return Triskell(mat.rows, mat.cols, monoid, tuple(edges))


def mat_compose(m: WeightedMatrix, n: WeightedMatrix) -> WeightedMatrix:
    if m.cols != n.rows:
        raise CarrierMismatch("inner carriers differ")
    return WeightedMatrix(m.rows, n.cols, m.entries.dot(n.entries))


def mat_add(m: WeightedMatrix, n: WeightedMatrix) -> WeightedMatrix:
    if m.rows != n.rows or m.cols != n.cols:
        raise CarrierMismatch("mat_add needs equal carriers")
    return WeightedMatrix(m.rows, m.cols, m.entries + n.entries)


def mat_scale(a: NumericValue, m: WeightedMatrix) -> WeightedMatrix:
    return WeightedMatrix(m.rows, m.cols, m.entries * a)


def mat_tensor(m: WeightedMatrix, n: WeightedMatrix) -> WeightedMatrix:
    """Kronecker product on product carriers."""
    rows, cols = carrier_product(m.rows, n.rows), carrier_product(m.cols, n.cols)
    table = np.empty((len(rows), len(cols)), dtype=object)
    for i, r1 in enumerate(m.rows):
        for k, r2 in enumerate(n.rows):
            ri = rows.index(product_label(r1, r2))
            for j, c1 in enumerate(m.cols):
                for l, c2 in enumerate(n.cols):
                    table[ri, cols.index(product_label(c1, c2))] = m.entries[i, j] * n.entries[k, l]
    return WeightedMatrix(rows, cols, table)


def mat_dsum(m: WeightedMatrix, n: WeightedMatrix) -> WeightedMatrix:
    """Block-diagonal matrix on disjoint-union carriers."""
    rows, cols = carrier_sum(m.rows, n.rows), carrier_sum(m.cols, n.cols)
    zero = _widest(list(m.entries.flat) + list(n.entries.flat)).zero
    table = np.full((len(rows), len(cols)), zero, dtype=object)
    for side, part in (("L", m), ("R", n)):
        for (i, j), value in np.ndenumerate(part.entries):
            table[rows.index(sum_label(side, part.rows.points[i])), cols.index(sum_label(side, part.cols.points[j]))] = value
    return WeightedMatrix(rows, cols, table)


def _require_square(m: WeightedMatrix) -> int:
    if len(m.rows) != len(m.cols):
        raise CarrierMismatch(f"matrix is not square: {m.shape}")
    return len(m.rows)


def mat_trace(m: WeightedMatrix, normalized: bool = False) -> NumericValue:
    if m.rows != m.cols:
        raise CarrierMismatch("trace needs equal row and column carriers")
    n = len(m.rows)
    total = m.codomain.zero
    for i in range(n):
        total = total + m.entries[i, i]
    if normalized:
        return total / Fraction(n) if n else total
    return total


def mat_det(m: WeightedMatrix, max_dim: Optional[int] = None) -> NumericValue:
    """Leibniz expansion over all permutations."""
    n = _require_square(m)
    bound = settings().det_bound if max_dim is None else max_dim
    if n > bound:
        raise BoundExceeded(f"Leibniz determinant of dimension {n} exceeds the bound {bound}")
    codomain = m.codomain
    a = m.entries
    total = codomain.zero
    for perm, sign in heap_permutations(n):
        term = codomain.one
        for i in range(n):
            value = a[i, perm[i]]
            if value == 0:
                break
            term = term * value
        else:
            total = total + term if sign > 0 else total - term
    return total


def minor_det(table: np.ndarray) -> NumericValue:
    """Determinant by elimination: exact for rationals, LAPACK LU otherwise."""
    n = table.shape[0]
    if n == 0:
        return Fraction(1)
    values = list(table.flat)
    if all(isinstance(v, Fraction) for v in values):
        rows = [list(r) for r in table.tolist()]
        det = Fraction(1)
        for col in range(n):
            pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
            if pivot is None:
                return Fraction(0)
            if pivot != col:
                rows[col], rows[pivot] = rows[pivot], rows[col]
                det = -det
            p = rows[col][col]
            det *= p
            for r in range(col + 1, n):
                factor = rows[r][col] / p
                if factor:
                    for c in range(col, n):
                        rows[r][c] -= factor * rows[col][c]
        return det
    value = complex(np.linalg.det(_as_array(table, complex)))
    return value if _widest(values) is Codomain.COMPLEX else value.real


def spectral_radius(m: Union[WeightedMatrix, np.ndarray]) -> float:
    array = m.to_array() if isinstance(m, WeightedMatrix) else m
    if array.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(array))))


def _star_array(a: np.ndarray, tol: Optional[float] = None, max_terms: Optional[int] = None) -> np.ndarray:
    n = a.shape[0]
    if n == 0:
        return np.empty((0, 0), dtype=object)
    codomain = _widest(a.flat)
    total = np.full((n, n), codomain.zero, dtype=object)
    for i in range(n):
        total[i, i] = codomain.one
    power = total.copy()
    for _ in range(n):
        power = power.dot(a)
        if all(v == 0 for v in power.flat):
            return total
        total = total + power

    tol = settings().tol if tol is None else tol
    max_terms = settings().max_terms if max_terms is None else max_terms
    dtype = complex if codomain is Codomain.COMPLEX else float
    work = _as_array(a, dtype)
    radius = spectral_radius(work)
    if radius >= 1.0:
        raise SeriesDivergence(f"star diverges: spectral radius {radius:.6g} >= 1")
    logger.warning("star of a non-nilpotent %dx%d matrix is approximated in floating point", n, n)
    total_f = _as_array(total, dtype)
    power_f = _as_array(power, dtype)
    for _ in range(n, max_terms):
        power_f = power_f @ work
        total_f = total_f + power_f
        if np.max(np.abs(power_f)) < tol:
            return np.array(total_f.tolist(), dtype=object).reshape(n, n)
    raise SeriesDivergence(f"star did not reach tolerance {tol:g} within {max_terms} terms")


def mat_star(m: WeightedMatrix, tol: Optional[float] = None, max_terms: Optional[int] = None) -> WeightedMatrix:
    """Sum of all powers of m: exact when m is nilpotent, a tolerance-bounded series otherwise."""
    if m.rows != m.cols:
        raise CarrierMismatch("star needs equal row and column carriers")
    return WeightedMatrix(m.rows, m.cols, _star_array(m.entries, tol, max_terms))


def _block(m: WeightedMatrix, rows: List[str], cols: List[str]) -> np.ndarray:
    ri = [m.rows.index(r) for r in rows]
    ci = [m.cols.index(c) for c in cols]
    if not ri or not ci:
        return np.empty((len(ri), len(ci)), dtype=object)
    return m.entries[np.ix_(ri, ci)]


def mat_exec(m: WeightedMatrix, u_rows: PointSpec, u_cols: PointSpec,
             tol: Optional[float] = None, max_terms: Optional[int] = None) -> WeightedMatrix:
    """Execution at matrix level: M_XY + M_XU . star(M_UU) . M_UY.

    Column ``u_cols[i]`` is fed back into row ``u_rows[i]``.
    """
    u_rows = resolve_points(m.rows, u_rows)
    u_cols = resolve_points(m.cols, u_cols)
    if len(u_rows) != len(u_cols):
        raise CarrierMismatch(f"hidden parts differ in size: {len(u_rows)} vs {len(u_cols)}")
    x = [r for r in m.rows if r not in set(u_rows)]
    y = [c for c in m.cols if c not in set(u_cols)]
    zero = m.codomain.zero
    paths = _block(m, x, u_cols).dot(_star_array(_block(m, u_rows, u_cols), tol, max_terms)).dot(_block(m, u_rows, y))
    direct = _block(m, x, y)
    table = np.full((len(x), len(y)), zero, dtype=object)
    if table.size:
        table = direct + paths
    return WeightedMatrix(Carrier(tuple(x)), Carrier(tuple(y)), table)


def op_norm(m: WeightedMatrix) -> float:
    """Largest singular value."""
    if m.entries.size == 0:
        return 0.0
    try:
        return float(np.linalg.norm(_as_array(m.entries, complex), 2))
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"singular values did not converge: {exc}") from None


def relabel_matrix(m: WeightedMatrix, row_map: Mapping[str, str], col_map: Optional[Mapping[str, str]] = None) -> WeightedMatrix:
    col_map = row_map if col_map is None else col_map
    rows = [row_map.get(r, r) for r in m.rows]
    cols = [col_map.get(c, c) for c in m.cols]
    return WeightedMatrix.from_rows(rows, cols, m.entries.tolist())


def restrict_matrix(m: WeightedMatrix, rows: Carrier, cols: Carrier) -> WeightedMatrix:
    return WeightedMatrix(rows, cols, _block(m, list(rows), list(cols)).reshape(len(rows), len(cols)))
