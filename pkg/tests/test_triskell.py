"""Tests for triskells: construction, the monoidal structure, execution and zero triskells."""

import networkx as nx
import pytest
from hypothesis import given, settings as hyp_settings
from hypothesis import strategies as st

from tests.fixtures.triskell_data import A, B, C, D, chain, cancelling_pair, loop_through_hidden, make_triskell
from triskells.errors import CarrierMismatch, InvalidTriskell, MonoidMismatch, NoAddition, NonNilpotentExecution, UnsignedMonoid
from triskells.fock import fock_lift
from triskells.generators import random_carrier, random_nilpotent, random_triskell, trial_rng
from triskells.relmat import contract, mat_add
from triskells.triskell import (
    EMPTY,
    ONE,
    Carrier,
    Edge,
    Triskell,
    canonical,
    classify,
    compose,
    contract_simple,
    direct_sum,
    drop_zeros,
    exec_trace,
    identity,
    is_simple,
    juxtapose,
    partial_identity,
    power,
    relabel,
    restrict,
    scale,
    symmetry,
    tensor,
    union,
    validate,
    zero_equivalent,
    zero_normalize,
)
from triskells.weights import COMPLEX, NONNEG_REAL, RATIONAL, UNIT, ZERO, make_weight, w_prod, w_unit


def _weights(t: Triskell):
    return sorted((e.src, e.tgt, e.weight.value) for e in t.edges)


def path_oracle(t: Triskell, u_src, u_tgt) -> list:
    """Every X->Y path through the hidden part, enumerated with networkx."""
    feedback = dict(zip(u_tgt, u_src))
    graph = nx.MultiDiGraph()
    for k, e in enumerate(t.edges):
        start = ("hidden", e.src) if e.src in u_src else ("in", e.src)
        end = ("hidden", feedback[e.tgt]) if e.tgt in feedback else ("out", e.tgt)
        graph.add_edge(start, end, key=k, weight=e.weight)
    found = []
    ins = [n for n in graph if n[0] == "in"]
    outs = [n for n in graph if n[0] == "out"]
    for x in ins:
        for y in outs:
            for path in nx.all_simple_edge_paths(graph, x, y):
                weight = w_prod((graph.edges[u, v, k]["weight"] for u, v, k in path), t.monoid)
                found.append((x[1], y[1], weight))
    return found


@pytest.mark.smoke
class TestValidation:
    """Well-formedness and canonical forms."""

    def test_valid_triskell_is_returned(self):
        t = make_triskell(["1"], ["2"], [("1", "2", A)])
        assert validate(t) is t

    def test_dangling_endpoint(self):
        with pytest.raises(InvalidTriskell):
            make_triskell(["1"], ["2"], [("3", "2", A)])

    def test_mixed_monoid_tags(self):
        bad = Triskell(Carrier(("1",)), Carrier(("2",)), RATIONAL, (Edge("1", "2", make_weight(NONNEG_REAL, 0.5)),))
        with pytest.raises(MonoidMismatch):
            validate(bad)

    def test_duplicate_carrier_labels(self):
        with pytest.raises(InvalidTriskell):
            Carrier(("x", "x"))

    def test_sum_labels_beside_plain_labels(self):
        with pytest.raises(InvalidTriskell):
            make_triskell(["L.x", "y"], ["1"], [])
        with pytest.raises(InvalidTriskell):
            make_triskell(["1"], ["x", "R.x"], [("1", "x", A)])

    def test_sum_carriers_validate(self):
        s = direct_sum(make_triskell(["1"], ["2"], [("1", "2", A)]), make_triskell(["1"], ["2"], [("1", "2", B)]))
        assert validate(s) is s
        assert validate(symmetry(Carrier(("x", "y")))).source.points == ("L.x", "L.y", "R.x", "R.y")

    def test_edge_order_does_not_matter(self):
        edges = [("1", "3", A), ("2", "3", B), ("1", "3", C)]
        assert canonical(make_triskell(["1", "2"], ["3"], edges)) == canonical(
            make_triskell(["1", "2"], ["3"], list(reversed(edges))))

    def test_parallel_duplicates_have_multiplicity(self):
        t = make_triskell(["1"], ["2"], [("1", "2", A), ("1", "2", A)])
        (entry,) = canonical(t).entries
        assert entry[3] == 2


class TestComposition:
    """Composition, identities and the monoidal products."""

    def test_fig3_composite(self):
        t, t_prime = cancelling_pair()
        assert _weights(compose(t, t_prime)) == sorted([
            ("1", "4", A * C), ("1", "5", A * D), ("2", "4", B * C), ("2", "5", B * D),
        ])

    def test_identity_laws(self):
        t, _ = cancelling_pair()
        assert canonical(compose(identity(t.source), t)) == canonical(t)
        assert canonical(compose(t, identity(t.target))) == canonical(t)

    def test_identity_edges(self):
        assert _weights(identity(Carrier(("1", "2")))) == [("1", "1", 1), ("2", "2", 1)]
        assert len(identity(EMPTY).edges) == 0

    def test_no_shared_edges_gives_empty_composite(self):
        f = make_triskell(["1"], ["2", "3"], [("1", "2", A)])
        g = make_triskell(["2", "3"], ["4"], [("3", "4", B)])
        assert compose(f, g).edges == ()

    def test_carrier_mismatch(self):
        t, t_prime = cancelling_pair()
        with pytest.raises(CarrierMismatch):
            compose(t_prime, t)

    def test_tensor_pairs_edges(self):
        t = make_triskell(["1"], ["2"], [("1", "2", A)])
        u = make_triskell(["3"], ["4"], [("3", "4", B)])
        assert _weights(tensor(t, u)) == [("(1,3)", "(2,4)", A * B)]

    def test_tensor_multiplies_edge_counts(self):
        t = make_triskell(["a", "b"], ["c"], [("a", "c", A), ("b", "c", B)])
        u = make_triskell(["x"], ["y", "z"], [("x", "y", C), ("x", "z", D), ("x", "y", A)])
        assert len(tensor(t, u).edges) == 6

    def test_tensor_with_the_unit_object(self):
        t, _ = cancelling_pair()
        unit = identity(ONE)
        moved = relabel(tensor(t, unit), lambda p: p[1:-3])
        assert canonical(moved) == canonical(t)

    def test_direct_sum_has_no_cross_edges(self):
        t, t_prime = cancelling_pair()
        s = direct_sum(t, t_prime)
        assert len(s.edges) == len(t.edges) + len(t_prime.edges)
        assert all(e.src[:2] == e.tgt[:2] for e in s.edges)

    def test_direct_sum_with_the_empty_triskell(self):
        t, _ = cancelling_pair()
        empty = Triskell(EMPTY, EMPTY, RATIONAL)
        moved = relabel(direct_sum(t, empty), lambda p: p[2:])
        assert canonical(moved) == canonical(t)

    def test_union_is_a_multiset_union(self):
        t = make_triskell(["1"], ["2"], [("1", "2", A)])
        (entry,) = canonical(union(t, t)).entries
        assert entry[3] == 2
        empty = Triskell(t.source, t.target, RATIONAL)
        assert canonical(union(t, empty)) == canonical(t)

    def test_union_contracts_to_matrix_addition(self, rng):
        x, y = random_carrier(rng, 4, "x"), random_carrier(rng, 4, "y")
        t, u = random_triskell(rng, x, y), random_triskell(rng, x, y)
        assert contract(union(t, u)) == mat_add(contract(t), contract(u))

    def test_union_needs_equal_carriers(self):
        t, t_prime = cancelling_pair()
        with pytest.raises(CarrierMismatch):
            union(t, t_prime)

    def test_scale(self):
        t, _ = cancelling_pair()
        assert canonical(scale(w_unit(RATIONAL), t)) == canonical(t)
        assert drop_zeros(scale(ZERO, t)).edges == ()

    def test_symmetry_is_an_involution(self):
        c = Carrier(("x", "y"))
        swap = symmetry(c)
        assert canonical(compose(swap, swap)) == canonical(identity(swap.source))

    def test_powers(self):
        t = make_triskell(["1", "2"], ["1", "2"], [("1", "2", A), ("2", "1", B)])
        assert canonical(power(t, 0)) == canonical(identity(t.source))
        assert _weights(power(t, 2)) == [("1", "1", A * B), ("2", "2", B * A)]
        with pytest.raises(CarrierMismatch):
            power(cancelling_pair()[0], 2)

    def test_restrict_and_juxtapose(self):
        t, t_prime = cancelling_pair()
        assert _weights(restrict(t, Carrier(("1",)), t.target)) == [("1", "3", A)]
        side_by_side = juxtapose(t, relabel(t_prime, lambda p: "z" + p))
        assert len(side_by_side.edges) == 4
        with pytest.raises(CarrierMismatch):
            juxtapose(t, t)


@pytest.mark.property
class TestCompositionLaws:
    """Associativity and bifunctoriality on random instances."""

    @hyp_settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_associativity(self, seed):
        rng = trial_rng(seed, 0)
        a, b, c, d = (random_carrier(rng, 6, p) for p in "abcd")
        f, g, h = random_triskell(rng, a, b), random_triskell(rng, b, c), random_triskell(rng, c, d)
        assert canonical(compose(compose(f, g), h)) == canonical(compose(f, compose(g, h)))

    @hyp_settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_bifunctoriality(self, seed):
        rng = trial_rng(seed, 1)
        a, b, c = (random_carrier(rng, 3, p) for p in "abc")
        x, y, z = (random_carrier(rng, 3, p) for p in "xyz")
        f, g = random_triskell(rng, a, b, max_edges=5), random_triskell(rng, b, c, max_edges=5)
        f2, g2 = random_triskell(rng, x, y, max_edges=5), random_triskell(rng, y, z, max_edges=5)
        for product in (tensor, direct_sum):
            assert canonical(product(compose(f, g), compose(f2, g2))) == canonical(
                compose(product(f, f2), product(g, g2)))


class TestExecution:
    """The execution trace over a hidden part."""

    def test_single_path(self):
        assert _weights(exec_trace(chain(), "u", "u")) == [("x", "y", A * B)]

    def test_untouched_hidden_part_is_a_restriction(self):
        t = make_triskell(["u", "x"], ["u", "y"], [("x", "y", A)])
        assert _weights(exec_trace(t, ["u"], ["u"])) == [("x", "y", A)]

    def test_cycle_is_reported_with_a_witness(self):
        with pytest.raises(NonNilpotentExecution) as info:
            exec_trace(loop_through_hidden(), "u", "u")
        assert info.value.witness == ["u", "u"]

    def test_hidden_parts_must_pair_up(self):
        with pytest.raises(CarrierMismatch):
            exec_trace(chain(), ["u"], [])

    @pytest.mark.property
    @pytest.mark.parametrize("trial", range(100))
    def test_matches_the_path_oracle(self, trial):
        rng = trial_rng(99, trial)
        points = Carrier(tuple(f"p{k}" for k in range(6)))
        t = random_nilpotent(rng, points, max_edges=14)
        hidden = [points.points[int(i)] for i in sorted(rng.choice(6, size=int(rng.integers(1, 5)), replace=False))]
        executed = exec_trace(t, hidden, hidden)
        expected = path_oracle(t, hidden, hidden)
        assert canonical(executed) == canonical(Triskell(executed.source, executed.target, RATIONAL,
                                                         tuple(Edge(*e) for e in expected)))


class TestSimpleTriskells:
    """Simplicity, contraction, classification and partial identities."""

    def test_is_simple(self):
        assert is_simple(make_triskell(["1"], ["2"], [("1", "2", A)]))
        assert not is_simple(make_triskell(["1"], ["2"], [("1", "2", A), ("1", "2", B)]))
        assert is_simple(Triskell(EMPTY, EMPTY, RATIONAL))

    def test_contract_merges_parallel_edges(self):
        t = make_triskell(["1"], ["2"], [("1", "2", 0.2), ("1", "2", 0.3)], monoid=NONNEG_REAL)
        (edge,) = contract_simple(t).edges
        assert edge.weight.value == pytest.approx(0.5)

    def test_contract_is_idempotent_on_simple_input(self):
        t, _ = cancelling_pair()
        assert canonical(contract_simple(t)) == canonical(t)

    def test_opposite_weights_cancel(self):
        t = make_triskell(["1"], ["2"], [("1", "2", A), ("1", "2", -A)])
        assert contract_simple(t).edges == ()

    def test_contract_needs_addition(self):
        t = make_triskell(["1"], ["2"], [("1", "2", 1), ("1", "2", 1)], monoid=UNIT)
        with pytest.raises(NoAddition):
            contract_simple(t)

    def test_classify(self):
        diagonal = make_triskell(["1", "2"], ["1", "2"], [("1", "1", A), ("2", "2", B)])
        assert classify(diagonal).diagonal
        hermitian = make_triskell(["1", "2"], ["1", "2"], [("1", "2", 1j), ("2", "1", -1j)], monoid=COMPLEX)
        assert classify(hermitian).hermitian
        neither = make_triskell(["1"], ["2"], [("1", "2", A)])
        flags = classify(neither)
        assert not flags.diagonal and not flags.hermitian

    def test_hermitian_needs_complex_weights(self):
        edges = [("1", "2", 1), ("2", "1", 1)]
        assert not classify(make_triskell(["1", "2"], ["1", "2"], edges)).hermitian
        assert classify(make_triskell(["1", "2"], ["1", "2"], edges, monoid=COMPLEX)).hermitian

    def test_partial_identity(self):
        c = Carrier(("x", "y"))
        assert canonical(partial_identity(c, c, w_unit(RATIONAL))) == canonical(identity(c))
        assert partial_identity(c, [], w_unit(RATIONAL)).edges == ()
        half = make_weight(NONNEG_REAL, 0.5)
        assert partial_identity(c, ["x"], half).edges == (Edge("x", "x", half),)
        with pytest.raises(CarrierMismatch):
            partial_identity(c, ["z"], half)


class TestZeroTriskells:
    """Cancellation of opposite parallel pairs."""

    def test_cancelling_pair_cancels(self):
        t, t_prime = cancelling_pair()
        lifted = fock_lift(compose(t, t_prime))
        cell = [e for e in lifted.edges if (e.src, e.tgt) == ("{1,2}", "{4,5}")]
        assert sorted(e.weight.value for e in cell) == [-A * B * C * D, A * B * C * D]
        assert not [e for e in zero_normalize(lifted).entries if (e[0], e[1]) == ("{1,2}", "{4,5}")]

    def test_no_opposite_pairs(self):
        t, _ = cancelling_pair()
        assert zero_normalize(t) == canonical(t)

    def test_pure_zero_triskell(self):
        t = make_triskell(["1"], ["2"], [("1", "2", A), ("1", "2", -A), ("1", "2", B), ("1", "2", -B)])
        assert zero_normalize(t).entries == ()

    def test_unsigned_monoid(self):
        t = make_triskell(["1"], ["2"], [("1", "2", 0.5)], monoid=NONNEG_REAL)
        with pytest.raises(UnsignedMonoid):
            zero_normalize(t)

    @pytest.mark.property
    @pytest.mark.parametrize("trial", range(30))
    def test_idempotent_and_order_invariant(self, trial):
        rng = trial_rng(5, trial)
        x, y = random_carrier(rng, 3, "x"), random_carrier(rng, 3, "y")
        t = random_triskell(rng, x, y, max_edges=6)
        t = union(t, scale(make_weight(RATIONAL, -1), random_triskell(rng, x, y, max_edges=6)))
        form = zero_normalize(t)
        assert zero_normalize(form.to_triskell()) == form
        shuffled = Triskell(t.source, t.target, t.monoid, tuple(reversed(t.edges)))
        assert zero_normalize(shuffled) == form

    @pytest.mark.parametrize("trial", range(20))
    def test_zero_equivalence_implies_equal_contractions(self, trial):
        rng = trial_rng(6, trial)
        x, y = random_carrier(rng, 3, "x"), random_carrier(rng, 3, "y")
        t = random_triskell(rng, x, y, max_edges=6)
        noise = random_triskell(rng, x, y, max_edges=4)
        padded = union(union(t, noise), scale(make_weight(RATIONAL, -1), noise))
        assert zero_equivalent(t, padded)
        assert contract(t) == contract(padded)

