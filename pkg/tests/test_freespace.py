from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lipiso import exactlp
from lipiso.errors import EmptyDomainError, InputError
from lipiso.freespace import (
    FreeVector,
    ball_membership,
    classify,
    is_exposed_molecule,
    is_extreme_molecule,
    molecule,
    triangle_scan_extreme,
)
from lipiso.lipfunc import has_peak_property
from lipiso.metric import check_concave

from conftest import make_space, metric_spaces

F = Fraction


def test_molecule_coordinates(collinear, two_point):
    assert molecule(collinear, (2, 0)).vector.coords == (0, F(1, 2))
    assert molecule(collinear, (1, 2)).vector.coords == (1, -1)
    assert molecule(two_point, (0, 1)).vector.coords == (F(-1, 2),)


def test_one_point_space_has_no_molecules():
    with pytest.raises(EmptyDomainError):
        ball_membership(FreeVector(make_space(["e"], [[0]]), ()))


def test_collinear_middle_pair_is_not_extreme(collinear):
    rep = is_extreme_molecule(collinear, (2, 0))
    assert not rep.extreme
    assert rep.combination == (((1, 0), F(1, 2)), ((2, 1), F(1, 2)))
    assert not is_exposed_molecule(collinear, (2, 0)).exposed
    assert is_extreme_molecule(collinear, (1, 0)).extreme


def test_equilateral_all_exposed(equilateral):
    for pair, ext, exp in classify(equilateral):
        assert ext.extreme and exp.exposed
        assert exp.margin == F(1, 2)


def test_bad_pair_rejected(equilateral):
    with pytest.raises(InputError):
        is_extreme_molecule(equilateral, (0, 0))


def test_ball_membership(collinear):
    zero = FreeVector(collinear, (0, 0))
    assert ball_membership(zero).inside
    m = molecule(collinear, (2, 1)).vector
    inside = ball_membership(m)
    assert inside.inside
    assert sum(inside.weights) == 1
    outside = ball_membership(m.scaled(2))
    assert not outside.inside
    assert exactlp.check_separator(
        m.scaled(2).coords, [x.vector.coords for x in _mols(collinear)], outside.separator
    )


def _mols(space):
    return [molecule(space, p) for p in space.pairs()]


@settings(max_examples=60, deadline=None)
@given(metric_spaces(max_n=5), st.data())
def test_extreme_matches_triangle_scan(space, data):
    pair = data.draw(st.sampled_from(space.pairs()))
    rep = is_extreme_molecule(space, pair)
    assert rep.extreme == triangle_scan_extreme(space, pair)
    if not rep.extreme:
        target = molecule(space, pair).vector.coords
        gens = [molecule(space, p).vector.coords for p, _ in rep.combination]
        assert exactlp.check_weights(target, gens, [w for _, w in rep.combination])


@settings(max_examples=40, deadline=None)
@given(metric_spaces(max_n=5))
def test_finite_equivalences(space):
    rows = classify(space)
    for pair, ext, exp in rows:
        # exposed implies extreme, and on a polytope the converse holds
        assert ext.extreme == exp.exposed
    flip = {pair: (ext.extreme, exp.margin) for pair, ext, exp in rows}
    for (x, y), value in flip.items():
        assert flip[(y, x)] == value
    all_extreme = all(ext.extreme for _, ext, _ in rows)
    assert all_extreme == check_concave(space).concave
    assert all_extreme == has_peak_property(space).holds
