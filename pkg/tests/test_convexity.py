import pytest
from hypothesis import given, settings

from algebra import Carrier, Operation, OperationFamily
from convexity import (
    Subset,
    all_subsets,
    convex_hull,
    extreme_hull,
    hull_trace,
    image,
    is_convex_set,
    is_extreme_set,
    omega_boundary,
    omega_interior,
    preimage_coordinates,
)
from errors import DimensionMismatch, OutOfRange
from strategies import brute_convex_hull, brute_extreme_hull, families_with_subset, operation_families


def S(size, *items):
    return Subset.from_indices(size, items)


def test_subset_algebra():
    a, b = S(4, 0, 1), S(4, 1, 2)
    assert (a | b).indices() == [0, 1, 2]
    assert (a & b).indices() == [1]
    assert (a - b).indices() == [0]
    assert (~a).indices() == [2, 3]
    assert S(4, 1) <= a
    assert Subset.full(3).is_full()
    assert len(Subset.empty(3)) == 0
    with pytest.raises(OutOfRange):
        S(3, 3)
    with pytest.raises(DimensionMismatch):
        a | S(5, 0)


def test_convex_set_examples(z5, min4):
    assert is_convex_set(z5, Subset.full(5))
    verdict = is_convex_set(z5, S(5, 0, 1))
    assert not verdict
    assert verdict.witness == {"op": "omega1", "args": [0, 1], "value": 3}
    assert is_convex_set(min4, S(4, 1, 3))
    assert is_convex_set(min4, Subset.empty(4))


def test_extreme_set_examples(z5, min4):
    assert is_extreme_set(min4, S(4, 2, 3))
    verdict = is_extreme_set(min4, S(4, 1, 3))
    assert not verdict
    assert verdict.witness == {"op": "min2", "args": [1, 2], "value": 1}
    assert not is_extreme_set(z5, S(5, 2))
    assert is_extreme_set(z5, Subset.empty(5))


def test_hulls_of_examples(z5, min4):
    assert convex_hull(z5, S(5, 0, 1)).is_full()
    assert convex_hull(min4, S(4, 1, 3)).indices() == [1, 3]
    assert extreme_hull(min4, S(4, 2)).indices() == [2, 3]
    assert extreme_hull(min4, S(4, 0)).is_full()
    assert convex_hull(z5, Subset.empty(5)) == Subset.empty(5)


def test_hull_trace_records_each_step(z5):
    trace = hull_trace(z5, S(5, 0, 1))
    assert trace[0].indices() == [0, 1]
    assert trace[1].indices() == [0, 1, 3]
    assert trace[-1].is_full()
    assert all(a <= b for a, b in zip(trace, trace[1:]))
    with pytest.raises(ValueError):
        hull_trace(z5, S(5, 0), "bogus")


def test_one_step_maps(min4):
    assert image(min4, "min2", S(4, 2, 3)).indices() == [2, 3]
    assert preimage_coordinates(min4, "min2", S(4, 1)).indices() == [1, 2, 3]


def test_interior_and_boundary(z5, min4):
    assert omega_interior(z5).is_full()
    assert omega_boundary(z5).indices() == []
    assert omega_interior(min4).indices() == [0]
    assert omega_boundary(min4).indices() == [1, 2, 3]


def test_interior_with_unary_identity():
    fam = OperationFamily(Carrier(3), {"id": Operation(3, 1, [0, 1, 2])})
    assert omega_interior(fam).indices() == []


@settings(max_examples=1000, deadline=None)
@given(families_with_subset(max_size=5))
def test_hulls_match_brute_force(case):
    family, subset = case
    assert convex_hull(family, subset) == brute_convex_hull(family, subset)
    assert extreme_hull(family, subset) == brute_extreme_hull(family, subset)


@settings(max_examples=150, deadline=None)
@given(families_with_subset(max_size=4))
def test_hull_closure_laws(case):
    family, subset = case
    for hull in (convex_hull, extreme_hull):
        h = hull(family, subset)
        assert subset <= h
        assert hull(family, h) == h
    assert is_convex_set(family, convex_hull(family, subset))
    assert is_extreme_set(family, extreme_hull(family, subset))


@settings(max_examples=150, deadline=None)
@given(families_with_subset(max_size=4))
def test_complement_of_extreme_set_is_convex(case):
    family, subset = case
    if is_extreme_set(family, subset):
        assert is_convex_set(family, ~subset)


@settings(max_examples=100, deadline=None)
@given(operation_families(max_size=4))
def test_boundary_is_largest_proper_extreme_set(family):
    boundary = omega_boundary(family)
    assert is_extreme_set(family, boundary)
    for candidate in all_subsets(family.size):
        if not candidate.is_full() and is_extreme_set(family, candidate):
            assert candidate <= boundary
