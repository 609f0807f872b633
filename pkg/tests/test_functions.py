from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algebra import build_modular_linear_family, min_family
from convexity import Subset
from errors import DimensionMismatch, EmptySet, FamilyMismatch, InvalidInput, NoSupremum, NotAChain, OutOfRange, UnknownIndex
from functions import (
    FunctionTable,
    OrderedRange,
    check_compatible,
    check_nondecreasing,
    check_order_automorphism,
    check_range_automorphisms,
    check_range_distributive,
    check_range_reflexive,
    is_affine_map,
    is_concave_map,
    is_convex_map,
    linear_automorphism,
    pointwise_inf_chain,
    pointwise_sup,
)
from order import FinitePoset, RationalCone
from rational_utils import invert_matrix, mat
from strategies import convex_chains, lattice_family, monotone_tables, operation_families


def test_constant_is_affine_for_midpoint(z5, midpoint_range):
    assert is_affine_map(FunctionTable.scalars([2] * 5), z5, midpoint_range)


def test_identity_is_not_convex_for_modular_midpoint(z5, midpoint_range):
    verdict = is_convex_map(FunctionTable.scalars(range(5)), z5, midpoint_range)
    assert not verdict
    assert verdict.witness == {"op": "omega1", "args": [0, 1], "lhs": ["3"], "rhs": ["1/2"]}


def test_min_function_classification(min4, min_range, min_f):
    assert is_convex_map(min_f, min4, min_range)
    verdict = is_concave_map(min_f, min4, min_range)
    assert not verdict
    assert verdict.witness == {"op": "min2", "args": [0, 1], "lhs": ["1"], "rhs": ["3/2"]}
    assert not is_affine_map(min_f, min4, min_range)
    assert is_affine_map(min_f, min4, min_range, domain=Subset.from_indices(4, [1, 2]))


def test_compatibility_is_checked(z5, min_range, min4):
    with pytest.raises(FamilyMismatch):
        check_compatible(z5, min_range)
    ternary = OrderedRange.scalar({"min2": [1, 1, 1]})
    with pytest.raises(FamilyMismatch) as info:
        check_compatible(min4, ternary)
    assert info.value.witness == {"index": "min2"}
    with pytest.raises(DimensionMismatch):
        is_convex_map(FunctionTable.scalars([1, 2]), min4, min_range)


def test_finite_range_identity_is_affine(min4):
    rng = OrderedRange.finite(FinitePoset.chain(4), min_family(4))
    assert is_affine_map(FunctionTable.elements([0, 1, 2, 3]), min4, rng)
    with pytest.raises(OutOfRange):
        is_convex_map(FunctionTable.elements([0, 1, 2, 5]), min4, rng)


def test_range_constructor_errors():
    with pytest.raises(DimensionMismatch):
        OrderedRange.linear(2, RationalCone.orthant(1), {"g": [[[1]]]})
    with pytest.raises(DimensionMismatch):
        OrderedRange.linear(2, RationalCone.orthant(2), {"g": [[[1, 0]]]})
    with pytest.raises(InvalidInput):
        OrderedRange.linear(1, RationalCone.orthant(1), {"g": []})
    with pytest.raises(InvalidInput):
        OrderedRange("circular")
    with pytest.raises(DimensionMismatch):
        OrderedRange.finite(FinitePoset.chain(3), min_family(4))
    with pytest.raises(UnknownIndex):
        OrderedRange.scalar({"g": [1]}).arity_of("h")


def test_range_to_dict(midpoint_range):
    assert midpoint_range.to_dict() == {
        "flavor": "linear",
        "dim": 1,
        "cone": {"kind": "polyhedral", "generators": [["1"]]},
        "matrices": {"omega1": [[["1/2"]], [["1/2"]]]},
    }
    assert midpoint_range.apply("omega1", [(Fraction(1),), (Fraction(2),)]) == (Fraction(3, 2),)


# --- suprema and infima ------------------------------------------------------


def test_pointwise_sup_on_scalars(midpoint_range):
    f, g = FunctionTable.scalars([1, 2]), FunctionTable.scalars([3, 0])
    assert pointwise_sup([f, g], midpoint_range).values == ((3,), (2,))
    with pytest.raises(EmptySet):
        pointwise_sup([], midpoint_range)
    with pytest.raises(DimensionMismatch):
        pointwise_sup([f, FunctionTable.scalars([1])], midpoint_range)


def test_pointwise_sup_needs_a_lattice():
    skewed = OrderedRange.scalar({"g": [1]}, cone=RationalCone.polyhedral([[2]]))
    with pytest.raises(NoSupremum):
        pointwise_sup([FunctionTable.scalars([1]), FunctionTable.scalars([2])], skewed)
    anti = OrderedRange.finite(FinitePoset.antichain(3), min_family(3))
    with pytest.raises(NoSupremum) as info:
        pointwise_sup([FunctionTable.elements([0, 0, 0]), FunctionTable.elements([1, 0, 0])], anti)
    assert info.value.witness == {"x": 0, "values": [0, 1]}
    chain = OrderedRange.finite(FinitePoset.chain(3), min_family(3))
    top = pointwise_sup([FunctionTable.elements([0, 2, 1]), FunctionTable.elements([1, 0, 1])], chain)
    assert top.values == (1, 2, 1)


def test_pointwise_inf_chain(midpoint_range):
    low, high = FunctionTable.scalars([1, 2]), FunctionTable.scalars([2, 3])
    assert pointwise_inf_chain([high, low], midpoint_range).values == low.values
    with pytest.raises(NotAChain):
        pointwise_inf_chain([low, FunctionTable.scalars([2, 1])], midpoint_range)
    with pytest.raises(EmptySet):
        pointwise_inf_chain([], midpoint_range)
    chain = OrderedRange.finite(FinitePoset.chain(3), min_family(3))
    bottom = pointwise_inf_chain([FunctionTable.elements([1, 2, 2]), FunctionTable.elements([0, 1, 2])], chain)
    assert bottom.values == (0, 1, 2)


@settings(max_examples=100, deadline=None)
@given(st.data(), st.integers(1, 5), st.integers(1, 5), st.integers(1, 5))
def test_sup_of_affine_tables_is_convex(data, size, top, count):
    omega = lattice_family(size)
    rng = OrderedRange.finite(FinitePoset.chain(top), lattice_family(top))
    tables = data.draw(monotone_tables(size, top, count))
    for f in tables:
        assert is_affine_map(f, omega, rng)
    sup = pointwise_sup(tables, rng)
    assert is_convex_map(sup, omega, rng)
    assert all(sup(x) == max(f(x) for f in tables) for x in range(size))


@settings(max_examples=100, deadline=None)
@given(st.data(), st.integers(1, 5))
def test_inf_of_convex_chain_is_convex(data, size):
    omega = min_family(size)
    rng = OrderedRange.scalar({"min2": [Fraction(1, 2), Fraction(1, 2)]})
    chain, least = data.draw(convex_chains(size))
    for f in chain:
        assert is_convex_map(f, omega, rng)
    inf = pointwise_inf_chain(chain, rng)
    assert inf.values == least.values
    assert is_convex_map(inf, omega, rng)


# --- hypotheses on the range -------------------------------------------------


def test_linear_automorphism():
    orthant = RationalCone.orthant(2)
    assert linear_automorphism(mat([[0, 1], [1, 0]]), orthant)
    shear = linear_automorphism(mat([[1, 1], [0, 1]]), orthant)
    assert not shear
    assert shear.witness["reason"] == "A^-1(K) not inside K"
    assert linear_automorphism(mat([[1, 0], [0, 0]]), orthant).witness == {"reason": "singular"}
    round_cone = RationalCone.lorenz(1, 2, "l2")
    assert linear_automorphism(mat([[2, 0, 0], [0, 2, 0], [0, 0, 2]]), round_cone)
    assert not linear_automorphism(mat([[0, 1, 0], [1, 0, 0], [0, 0, 1]]), round_cone)


def test_invert_matrix_is_exact():
    inverse = invert_matrix(mat([[2, 1], [1, 1]]))
    assert inverse == mat([[1, -1], [-1, 2]])
    assert all(isinstance(v, Fraction) for row in inverse for v in row)
    assert invert_matrix(mat([["1/3", 0], [0, "-2/5"]])) == mat([[3, 0], [0, "-5/2"]])
    assert invert_matrix(mat([[1, 2], [2, 4]])) is None


def test_scalar_sections_are_automorphisms(midpoint_range):
    assert check_order_automorphism(midpoint_range, "omega1", 1)
    assert check_range_automorphisms(midpoint_range)
    with pytest.raises(OutOfRange):
        check_order_automorphism(midpoint_range, "omega1", 3)
    flipped = OrderedRange.scalar({"g": [-1]})
    verdict = check_range_automorphisms(flipped)
    assert not verdict
    assert verdict.witness["op"] == "g" and verdict.witness["slot"] == 1


def test_finite_sections():
    min_chain = OrderedRange.finite(FinitePoset.chain(4), min_family(4))
    verdict = check_order_automorphism(min_chain, "min2", 1)
    assert verdict.witness == {"op": "min2", "slot": 1, "fixed": [0], "reason": "not a bijection"}
    add3 = build_modular_linear_family(3, [(1, 1)], names=["add3"])
    assert check_range_automorphisms(OrderedRange.finite(FinitePoset.antichain(3), add3))
    rotated = check_order_automorphism(OrderedRange.finite(FinitePoset.chain(3), add3), "add3", 1)
    assert rotated.witness == {"op": "add3", "slot": 1, "fixed": [1], "reason": "not an order isomorphism"}


def test_check_nondecreasing(midpoint_range):
    assert check_nondecreasing(midpoint_range, "omega1")
    assert check_nondecreasing(OrderedRange.finite(FinitePoset.chain(4), min_family(4)), "min2")
    add3 = build_modular_linear_family(3, [(1, 1)], names=["add3"])
    assert not check_nondecreasing(OrderedRange.finite(FinitePoset.chain(3), add3), "add3")
    verdict = check_nondecreasing(OrderedRange.scalar({"g": [1, -1]}), "g")
    assert verdict.witness == {"op": "g", "slot": 2, "generator": ["1"], "image": ["-1"]}


def test_range_distributive_and_reflexive(midpoint_range):
    assert check_range_distributive(midpoint_range)
    assert check_range_reflexive(midpoint_range)
    plus = OrderedRange.scalar({"g": [1, 1]})
    assert not check_range_distributive(plus)
    assert check_range_reflexive(plus).witness == {"op": "g", "reason": "matrices do not sum to the identity"}
    rotation = OrderedRange.linear(2, RationalCone.orthant(2), {"g": [[[0, 1], [1, 0]], [[1, 0], [0, 0]]]})
    verdict = check_range_distributive(rotation)
    assert not verdict
    assert "do not commute" in verdict.witness["reason"]
    assert check_range_distributive(OrderedRange.finite(FinitePoset.chain(4), min_family(4)))


@settings(max_examples=100, deadline=None)
@given(operation_families(max_size=3), st.data())
def test_convex_iff_negation_concave(family, data):
    coefficients = {name: [Fraction(1, family.arity_of(name))] * family.arity_of(name) for name in family.indices}
    rng = OrderedRange.scalar(coefficients)
    values = data.draw(st.lists(st.integers(-3, 3), min_size=family.size, max_size=family.size))
    f = FunctionTable.scalars(values)
    g = FunctionTable.scalars([-v for v in values])
    assert bool(is_convex_map(f, family, rng)) == bool(is_concave_map(g, family, rng))
    assert bool(is_affine_map(f, family, rng)) == (bool(is_convex_map(f, family, rng)) and bool(is_concave_map(f, family, rng)))
