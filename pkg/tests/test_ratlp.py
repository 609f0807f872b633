from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import DimensionMismatch, InternalError, InvalidInput, ResourceLimit
from ratlp import (
    LinearProgram,
    LPStatus,
    ProgramBuilder,
    Relation,
    active_rows,
    lp_feasible,
    lp_optimize,
    row,
    verify_certificate,
    verify_point,
)


def test_row_parses_strings():
    r = row(["1/2", 1], "<=", "3/2", "cap")
    assert r.coeffs == (Fraction(1, 2), Fraction(1))
    assert r.relation is Relation.LE
    assert r.holds_at((1, 1))
    assert not r.holds_at((2, 1))
    assert r.normalized() == ((Fraction(-1, 2), Fraction(-1)), Fraction(-3, 2))


def test_feasible_point_satisfies_rows():
    lp = LinearProgram(2, [row([1, 1], "<=", 4), row([1, 0], ">=", 1), row([0, 1], ">=", 1)])
    result = lp_feasible(lp)
    assert result.status is LPStatus.FEASIBLE
    assert result.feasible
    assert all(r.holds_at(result.point) for r in lp.rows)


def test_equality_needs_a_fraction():
    result = lp_feasible(LinearProgram(1, [row([2], "=", 1)]))
    assert result.point == (Fraction(1, 2),)


def test_empty_system_is_feasible():
    assert lp_feasible(LinearProgram(2, [])).status is LPStatus.FEASIBLE


def test_infeasible_system_has_checked_certificate():
    lp = LinearProgram(1, [row([1], ">=", 2, "lower"), row([1], "<=", 1, "upper")])
    result = lp_feasible(lp)
    assert result.status is LPStatus.INFEASIBLE
    assert not result.feasible
    assert all(mu >= 0 for mu in result.certificate)
    verify_certificate(lp.all_rows(), 1, result.certificate)
    assert active_rows(lp, result.certificate) == ["lower", "upper"]
    assert result.certificate_strings() == [str(mu) for mu in result.certificate]


def test_zero_row_with_positive_bound_is_infeasible():
    result = lp_feasible(LinearProgram(2, [row([0, 0], ">=", 1)]))
    assert result.status is LPStatus.INFEASIBLE
    assert result.certificate == (Fraction(1),)


def test_optimum_at_vertex():
    rows = [row([1, 2], "<=", 4), row([3, 1], "<=", 7), row([1, 0], ">=", 0), row([0, 1], ">=", 0)]
    best = lp_optimize(LinearProgram(2, rows, objective=(1, 1), sense="max"))
    assert best.status is LPStatus.OPTIMAL
    assert best.point == (Fraction(2), Fraction(1))
    assert best.value == 3
    low = lp_optimize(LinearProgram(2, rows, objective=(-1, -1), sense="min"))
    assert low.value == -3


def test_unbounded_objective_returns_ray():
    lp = LinearProgram(1, [row([1], ">=", 0)], objective=(-1,), sense="min")
    result = lp_optimize(lp)
    assert result.status is LPStatus.UNBOUNDED
    assert result.ray[0] > 0
    assert result.value is None


def test_variable_bounds_become_rows():
    lp = LinearProgram(1, [], objective=(1,), sense="max", bounds=((0, 3),))
    assert [r.label for r in lp.all_rows()] == ["bound:x0>=", "bound:x0<="]
    assert lp_optimize(lp).value == 3


def test_infeasible_optimisation_reports_certificate():
    lp = LinearProgram(1, [row([1], ">=", 1)], objective=(1,), bounds=((None, 0),))
    result = lp_optimize(lp)
    assert result.status is LPStatus.INFEASIBLE
    assert active_rows(lp, result.certificate) == ["row0", "bound:x0<="]


def test_program_builder_blocks():
    builder = ProgramBuilder()
    xs = builder.add_block("x", 2)
    (t,) = builder.add_block("t", 1)
    assert builder.block("x") == range(0, 2)
    builder.add_row({xs[0]: 1, xs[1]: 1}, "<=", 3, "cap")
    builder.add_row({xs[0]: 1, t: 0}, ">=", 0)
    builder.add_row({xs[1]: 1}, ">=", 0)
    assert builder.num_rows == 3
    lp = builder.build({xs[0]: 1, xs[1]: 1}, "max")
    assert lp.num_vars == 3
    assert lp.rows[1].coeffs == (1, 0, 0)
    assert lp_optimize(lp).value == 3


def test_dimension_checks():
    with pytest.raises(DimensionMismatch):
        LinearProgram(2, [row([1], "<=", 0)])
    with pytest.raises(DimensionMismatch):
        LinearProgram(2, [], objective=(1,))
    with pytest.raises(DimensionMismatch):
        LinearProgram(2, [], bounds=((0, None),))
    with pytest.raises(InvalidInput):
        LinearProgram(1, [], objective=(1,), sense="mid")


def test_optimize_requires_objective():
    with pytest.raises(InvalidInput):
        lp_optimize(LinearProgram(1, [row([1], ">=", 0)]))


def test_pivot_cap():
    lp = LinearProgram(2, [row([1, 0], ">=", 1), row([0, 1], ">=", 1)])
    with pytest.raises(ResourceLimit) as info:
        lp_feasible(lp, max_pivots=1)
    assert info.value.witness == {"max_pivots": 1}


def test_verifiers_reject_bad_claims():
    rows = [row([1], ">=", 2), row([1], "<=", 1)]
    with pytest.raises(InternalError):
        verify_point(rows, (Fraction(2),))
    with pytest.raises(InternalError):
        verify_certificate(rows, 1, (Fraction(1), Fraction(2)))
    with pytest.raises(InternalError):
        verify_certificate(rows, 1, (Fraction(-1), Fraction(-1)))


small_rows = st.lists(
    st.tuples(
        st.lists(st.integers(-3, 3), min_size=2, max_size=2),
        st.sampled_from(["<=", "=", ">="]),
        st.integers(-5, 5),
    ),
    min_size=1,
    max_size=4,
)


@settings(max_examples=200, deadline=None)
@given(small_rows, st.lists(st.integers(-3, 3), min_size=2, max_size=2))
def test_every_answer_is_checked(rows, objective):
    lp = LinearProgram(
        2,
        [row(c, rel, b) for c, rel, b in rows],
        objective=tuple(objective),
        bounds=((-10, 10), (-10, 10)),
    )
    result = lp_optimize(lp)
    if result.status is LPStatus.INFEASIBLE:
        verify_certificate(lp.all_rows(), 2, result.certificate)
        assert lp_feasible(lp).status is LPStatus.INFEASIBLE
    else:
        assert result.status is LPStatus.OPTIMAL
        assert all(r.holds_at(result.point) for r in lp.all_rows())
        # no lattice point in the box beats the optimum
        for x in range(-10, 11):
            for y in range(-10, 11):
                if all(r.holds_at((x, y)) for r in lp.all_rows()):
                    assert objective[0] * x + objective[1] * y >= result.value
