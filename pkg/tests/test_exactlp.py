from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lipiso.errors import InputError
from lipiso.exactlp import (
    EQ,
    GE,
    INFEASIBLE,
    LE,
    OPTIMAL,
    UNBOUNDED,
    Constraint,
    LinearProgram,
    check_farkas,
    check_separator,
    check_weights,
    membership,
    solve,
)

F = Fraction


def test_single_variable_bound():
    lp = LinearProgram((1,), [((1,), LE, 3), ((1,), GE, 0)])
    out = solve(lp, "maximize")
    assert out.status == OPTIMAL
    assert out.solution == (F(3),)


def test_contradictory_equalities_give_farkas_certificate():
    lp = LinearProgram((0,), [((1,), EQ, 1), ((1,), EQ, 2)])
    out = solve(lp)
    assert out.status == INFEASIBLE
    assert check_farkas(lp, out.certificate)
    # Subtracting the rows: 0 = -1.
    assert out.certificate in ((F(1), F(-1)), (F(-1), F(1)))


def test_equilateral_peaking_program_margin():
    # f_e = 0, f_a - f_b = 1, |f_a| <= 1 - t, |f_b| <= 1 - t, t <= 1.
    rows = [
        ((1, 0, 0, 0), EQ, 0),
        ((0, 1, -1, 0), EQ, 1),
        ((0, 1, 0, 1), LE, 1),
        ((0, -1, 0, 1), LE, 1),
        ((0, 0, 1, 1), LE, 1),
        ((0, 0, -1, 1), LE, 1),
    ]
    lp = LinearProgram((0, 0, 0, 1), rows, upper=(None, None, None, 1))
    out = solve(lp, "maximize")
    assert out.value == F(1, 2)


def test_unbounded():
    lp = LinearProgram((1, 1), [((1, -1), LE, 3)], lower=(0, 0))
    assert solve(lp).status == UNBOUNDED


def test_minimize_and_bounds():
    lp = LinearProgram((1, 2), [((1, 1), GE, 3)], lower=(0, 0), upper=(2, None))
    out = solve(lp, "minimize")
    assert out.status == OPTIMAL and out.value == 4
    assert out.solution == (F(2), F(1))


def test_infeasible_box_certificate():
    lp = LinearProgram((1, 0), [((1, 1), GE, 13)], lower=(1, 1), upper=(5, 5))
    out = solve(lp)
    assert out.status == INFEASIBLE and check_farkas(lp, out.certificate)


def test_dimension_mismatch_is_input_error():
    with pytest.raises(InputError):
        LinearProgram((1, 2), [((1,), LE, 3)])
    with pytest.raises(InputError):
        Constraint((1,), "<", 3)
    with pytest.raises(InputError):
        membership([1, 2], [[1]])
    with pytest.raises(InputError):
        membership([1], [])


def test_floats_rejected():
    with pytest.raises(InputError):
        LinearProgram((0.5,))


def test_degenerate_program_terminates():
    # Beale's classic cycling example under the textbook largest-coefficient rule.
    rows = [
        ((F(1, 4), -60, F(-1, 25), 9), LE, 0),
        ((F(1, 2), -90, F(-1, 50), 3), LE, 0),
        ((0, 0, 1, 0), LE, 1),
    ]
    lp = LinearProgram((F(3, 4), -150, F(1, 50), -6), rows, lower=(0, 0, 0, 0))
    out = solve(lp, "maximize")
    assert out.status == OPTIMAL
    assert out.value == F(1, 20)


def test_membership_midpoint_and_outside():
    inside = membership([0], [[1], [-1]])
    assert inside.inside and inside.weights == (F(1, 2), F(1, 2))
    outside = membership([2], [[1], [-1]])
    assert not outside.inside and outside.separator == (F(1),)


def _vertex_optimum(c, rows):
    """Brute force for 2-variable LPs: best feasible pairwise intersection."""
    lines = [(a, b) for a, _, b in rows]
    best = None
    for (a1, b1), (a2, b2) in combinations(lines, 2):
        det = a1[0] * a2[1] - a1[1] * a2[0]
        if det == 0:
            continue
        x = ((b1 * a2[1] - b2 * a1[1]) / det, (a1[0] * b2 - a2[0] * b1) / det)
        if all(a[0] * x[0] + a[1] * x[1] <= b for a, _, b in rows):
            val = c[0] * x[0] + c[1] * x[1]
            if best is None or val > best:
                best = val
    return best


small = st.integers(-5, 5).map(F)


@settings(max_examples=150, deadline=None)
@given(
    st.tuples(small, small),
    st.lists(st.tuples(st.tuples(small, small), small), min_size=1, max_size=4),
)
def test_maximum_matches_vertex_enumeration(c, extra):
    # A box keeps every program bounded; extra rows may make it infeasible.
    box = [((F(1), F(0)), LE, F(4)), ((F(-1), F(0)), LE, F(4)),
           ((F(0), F(1)), LE, F(4)), ((F(0), F(-1)), LE, F(4))]
    rows = box + [(a, LE, b) for a, b in extra]
    lp = LinearProgram(c, rows)
    out = solve(lp, "maximize")
    expected = _vertex_optimum(c, rows)
    if expected is None:
        assert out.status == INFEASIBLE
        assert check_farkas(lp, out.certificate)
    else:
        assert out.status == OPTIMAL and out.value == expected


vec = st.lists(st.integers(-3, 3).map(F), min_size=2, max_size=2)


@settings(max_examples=150, deadline=None)
@given(vec, st.lists(vec, min_size=1, max_size=6))
def test_membership_round_trip(target, gens):
    out = membership(target, gens)
    if out.inside:
        assert check_weights(target, gens, out.weights)
    else:
        assert check_separator(target, gens, out.separator)
    assert membership(target, gens) == out


def test_membership_agrees_with_segment_geometry():
    gens = [[F(0), F(0)], [F(2), F(2)]]
    assert membership([1, 1], gens).inside
    assert not membership([1, F(11, 10)], gens).inside
