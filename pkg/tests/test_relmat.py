"""Tests for weighted matrices: contraction, determinants, star, execution and norms."""

from fractions import Fraction

import numpy as np
import pytest

from tests.fixtures.triskell_data import A, B, C, D, chain, square_relation, make_triskell
from triskells.errors import BoundExceeded, CarrierMismatch, InvalidWeight, NoConvergence, SeriesDivergence
from triskells.generators import random_carrier, random_matrix, random_nilpotent, random_triskell, trial_rng
from triskells.permutations import heap_permutations, lexicographic_permutations, permutation_sign
from triskells.relmat import (
    WeightedMatrix,
    contract,
    embed,
    identity_matrix,
    m_contract,
    mat_compose,
    mat_det,
    mat_dsum,
    mat_exec,
    mat_scale,
    mat_star,
    mat_tensor,
    mat_trace,
    minor_det,
    op_norm,
    relabel_matrix,
    restrict_matrix,
    spectral_radius,
)
from triskells.triskell import Carrier, carrier_sum, compose, direct_sum, exec_trace, tensor
from triskells.weights import RATIONAL, Codomain, measure_map


def square(table, labels=("1", "2")) -> WeightedMatrix:
    return WeightedMatrix.from_rows(list(labels), list(labels), table)


@pytest.mark.smoke
class TestWeightedMatrix:
    """Construction and indexing."""

    def test_from_rows_reorders_labels(self):
        m = WeightedMatrix.from_rows(["b", "a"], ["y", "x"], [[1, 2], [3, 4]])
        assert m["a", "x"] == 4
        assert m["b", "y"] == 1
        assert m.rows.points == ("a", "b")

    def test_integers_become_fractions(self):
        assert isinstance(square_relation()["1", "4"], Fraction)

    def test_shape_mismatch(self):
        with pytest.raises(CarrierMismatch):
            WeightedMatrix(Carrier(("1",)), Carrier(("2",)), [[1, 2]])

    def test_rejects_non_numbers(self):
        with pytest.raises(InvalidWeight):
            WeightedMatrix.from_rows(["1"], ["2"], [["x"]])
        with pytest.raises(InvalidWeight):
            WeightedMatrix.from_rows(["1"], ["2"], [[float("inf")]])

    def test_nonzero_cells(self):
        m = WeightedMatrix.from_rows(["1"], ["2", "3"], [[0, A]])
        assert m.nonzero_cells() == {("1", "3"): A}

    def test_relabel_and_restrict(self):
        m = square_relation()
        moved = relabel_matrix(m, {"1": "one"}, {})
        assert moved["one", "5"] == B
        corner = restrict_matrix(m, Carrier(("2",)), Carrier(("4",)))
        assert corner["2", "4"] == C


class TestContraction:
    """Contraction is a functor onto matrices."""

    def test_parallel_edges_are_summed(self):
        t = make_triskell(["1"], ["2"], [("1", "2", A), ("1", "2", B)])
        assert contract(t)["1", "2"] == A + B

    def test_embed_then_contract(self):
        m = square_relation()
        assert contract(embed(m)) == m
        assert len(embed(m).edges) == 4

    def test_measured_contraction(self):
        t = make_triskell(["1"], ["2"], [("1", "2", -A), ("1", "2", B)])
        assert m_contract(t, measure_map("abs", RATIONAL))["1", "2"] == A + B
        assert m_contract(t, measure_map("identity", RATIONAL))["1", "2"] == B - A

    @pytest.mark.property
    @pytest.mark.parametrize("trial", range(50))
    def test_preserves_the_monoidal_structure(self, trial):
        rng = trial_rng(11, trial)
        a, b, c = (random_carrier(rng, 4, p) for p in "abc")
        f, g = random_triskell(rng, a, b), random_triskell(rng, b, c)
        assert contract(compose(f, g)) == mat_compose(contract(f), contract(g))
        assert contract(tensor(f, g)) == mat_tensor(contract(f), contract(g))
        assert contract(direct_sum(f, g)) == mat_dsum(contract(f), contract(g))


class TestDeterminant:
    """Leibniz determinants and minors."""

    def test_square_relation(self):
        assert mat_det(square_relation()) == A * D - B * C == -1

    def test_empty_matrix(self):
        assert mat_det(WeightedMatrix(Carrier(), Carrier(), [])) == 1
        assert minor_det(np.empty((0, 0), dtype=object)) == 1

    def test_not_square(self):
        with pytest.raises(CarrierMismatch):
            mat_det(WeightedMatrix.from_rows(["1"], ["2", "3"], [[A, B]]))

    def test_dimension_bound(self):
        with pytest.raises(BoundExceeded):
            mat_det(square_relation(), max_dim=1)

    @pytest.mark.parametrize("trial", range(30))
    def test_agrees_with_elimination_and_lapack(self, trial):
        rng = trial_rng(12, trial)
        m = random_matrix(rng, random_carrier(rng, 5))
        exact = mat_det(m)
        assert exact == minor_det(m.entries)
        assert float(exact) == pytest.approx(np.linalg.det(m.to_array()), rel=1e-9, abs=1e-9)

    @pytest.mark.parametrize("trial", range(30))
    def test_multiplicative(self, trial):
        rng = trial_rng(13, trial)
        rows = random_carrier(rng, 4)
        m, n = random_matrix(rng, rows), random_matrix(rng, rows)
        assert mat_det(mat_compose(m, n)) == mat_det(m) * mat_det(n)

    def test_complex_minor_stays_complex(self):
        table = np.array([[1j, 0.0], [0.0, 2.0]], dtype=object)
        assert minor_det(table) == pytest.approx(2j)


class TestTrace:
    """Plain and normalized traces."""

    def test_plain_trace(self):
        assert mat_trace(square([[A, B], [C, D]])) == A + D

    def test_normalized_trace(self):
        assert mat_trace(square([[A, B], [C, D]]), normalized=True) == (A + D) / 2

    def test_needs_equal_carriers(self):
        with pytest.raises(CarrierMismatch):
            mat_trace(square_relation())


class TestStar:
    """Sums of powers."""

    def test_nilpotent_star_is_exact(self):
        star = mat_star(square([[0, A], [0, 0]]))
        assert star == square([[1, A], [0, 1]])

    def test_zero_matrix(self):
        assert mat_star(square([[0, 0], [0, 0]])) == identity_matrix(Carrier(("1", "2")))

    def test_contraction_below_one(self):
        star = mat_star(square([[0.5]], labels=("1",)))
        assert star["1", "1"] == pytest.approx(2.0, abs=1e-8)

    def test_spectral_radius_one_diverges(self):
        with pytest.raises(SeriesDivergence):
            mat_star(square([[1]], labels=("1",)))

    def test_spectral_radius(self):
        assert spectral_radius(square([[0.3, 0], [0, -0.9]])) == pytest.approx(0.9)


class TestExecution:
    """Matrix execution agrees with execution of triskells."""

    def test_chain(self):
        executed = mat_exec(contract(chain()), ["u"], ["u"])
        assert executed["x", "y"] == A * B

    def test_hidden_parts_must_pair_up(self):
        with pytest.raises(CarrierMismatch):
            mat_exec(contract(chain()), ["u"], [])

    @pytest.mark.property
    @pytest.mark.parametrize("trial", range(50))
    def test_contraction_commutes_with_execution(self, trial):
        rng = trial_rng(14, trial)
        points = Carrier(tuple(f"p{k}" for k in range(6)))
        t = random_nilpotent(rng, points)
        hidden = [points.points[int(i)] for i in sorted(rng.choice(6, size=int(rng.integers(1, 5)), replace=False))]
        assert contract(exec_trace(t, hidden, hidden)) == mat_exec(contract(t), hidden, hidden)


def small_matrix(rng, rows, cols) -> WeightedMatrix:
    """Entries in [0, 0.1]: every star of a block converges."""
    return mat_scale(0.1, random_matrix(rng, Carrier(tuple(rows)), Carrier(tuple(cols)), kind="unit-interval"))


def with_identity(ident, m: WeightedMatrix) -> WeightedMatrix:
    """Block diagonal of the identity on ``ident`` and ``m``."""
    cells = {(p, p): 1.0 for p in ident}
    cells.update(m.nonzero_cells())
    return WeightedMatrix.from_cells(Carrier(tuple(ident) + m.rows.points), Carrier(tuple(ident) + m.cols.points),
                                     cells, Codomain.REAL)


@pytest.mark.property
class TestTracedLaws:
    """Matrix execution is a trace on floating matrices."""

    def test_yanking(self):
        xs = ["a", "b", "c"]
        both = carrier_sum(Carrier(tuple(xs)), Carrier(tuple(xs)))
        swap = WeightedMatrix.from_cells(both, both, {(f"{s}.{x}", f"{t}.{x}"): 1 for x in xs for s, t in (("L", "R"), ("R", "L"))})
        yanked = mat_exec(swap, "R.", "R.")
        assert yanked == identity_matrix(Carrier(tuple(f"L.{x}" for x in xs)))

    @pytest.mark.parametrize("trial", range(20))
    def test_vanishing(self, trial):
        rng = trial_rng(61, trial)
        first, second = ["u0", "u1"], ["v0", "v1", "v2"][:int(rng.integers(1, 4))]
        m = small_matrix(rng, ["x0", "x1"] + first + second, ["y0", "y1", "y2"] + first + second)
        in_steps = mat_exec(mat_exec(m, first, first, tol=1e-13), second, second, tol=1e-13)
        at_once = mat_exec(m, first + second, first + second, tol=1e-13)
        assert in_steps.allclose(at_once, tol=1e-9)

    @pytest.mark.parametrize("trial", range(20))
    def test_sliding(self, trial):
        rng = trial_rng(62, trial)
        xs, ys, us, vs = ["x0", "x1"], ["y0", "y1"], ["u0", "u1"], ["v0", "v1", "v2"]
        m = small_matrix(rng, xs + us, ys + vs)
        g = small_matrix(rng, vs, us)
        before = mat_exec(mat_compose(m, with_identity(ys, g)), us, us, tol=1e-13)
        after = mat_exec(mat_compose(with_identity(xs, g), m), vs, vs, tol=1e-13)
        assert before.allclose(after, tol=1e-9)


class TestOperatorNorm:
    """Largest singular value."""

    def test_diagonal(self):
        assert op_norm(square([[0.3, 0], [0, 0.9]])) == pytest.approx(0.9, rel=1e-6)

    def test_identity(self):
        assert op_norm(identity_matrix(Carrier(("1", "2", "3")))) == pytest.approx(1.0)

    def test_zero(self):
        assert op_norm(square([[0, 0], [0, 0]])) == 0.0

    def test_all_ones_is_a_lower_singular_vector(self):
        assert op_norm(square([[2, -1], [-1, 2]])) == pytest.approx(3.0, rel=1e-9)

    @pytest.mark.parametrize("table", [
        [[1, 2], [3, 4]],
        [[2, 0], [0, -3]],
        [[1j, 0], [0, 0.5]],
        [[0, 1], [0, 0]],
        [[1, 1], [1, -1]],
    ])
    def test_matches_the_singular_values(self, table):
        m = square(table)
        expected = np.linalg.svd(m.to_array(), compute_uv=False)[0]
        assert op_norm(m) == pytest.approx(expected, rel=1e-6)

    @pytest.mark.property
    @pytest.mark.parametrize("trial", range(100))
    def test_random_matrices_against_svd(self, trial):
        rng = trial_rng(63, trial)
        kind = ("rational", "real", "complex")[trial % 3]
        m = random_matrix(rng, random_carrier(rng, 4, "r"), random_carrier(rng, 4, "c"), kind=kind)
        expected = np.linalg.svd(m.to_array(), compute_uv=False)[0]
        assert op_norm(m) == pytest.approx(expected, rel=1e-6, abs=1e-12)

    def test_lapack_failure(self, monkeypatch):
        def refuse(*args, **kwargs):
            raise np.linalg.LinAlgError("SVD did not converge")

        monkeypatch.setattr(np.linalg, "norm", refuse)
        with pytest.raises(NoConvergence):
            op_norm(identity_matrix(Carrier(("1", "2"))))


class TestPermutations:
    """Enumeration orders and signatures."""

    @pytest.mark.parametrize("n", range(6))
    def test_heap_order_covers_every_permutation_once(self, n):
        seen = list(heap_permutations(n))
        assert len({p for p, _ in seen}) == len(seen) == len(list(lexicographic_permutations(n)))
        assert all(sign == permutation_sign(p) for p, sign in seen)

    def test_signs(self):
        assert permutation_sign((0, 1, 2)) == 1
        assert permutation_sign((1, 0, 2)) == -1
        assert permutation_sign((1, 2, 0)) == 1
