"""The free space of a finite pointed metric space, in delta coordinates.

With ``n`` points the free space has dimension ``n - 1``: one coordinate
per non-basepoint point (``delta`` of the basepoint is zero).  Its unit
ball is the convex hull of the ``n(n-1)`` molecules.  Being finite
dimensional, preserved-extreme means extreme and, the ball being a
polytope, exposed vertices are strongly exposed.  Verdicts here say
nothing about infinite spaces.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import exactlp
from .errors import EmptyDomainError, InputError
from .exactlp import EQ, LE, Constraint, LinearProgram
from .metric import PointedMetricSpace, require_valid

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class FreeVector:
    space: PointedMetricSpace
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != len(self.space) - 1:
            raise InputError(
                f"free vector on {self.space.name!r} needs {len(self.space) - 1} "
                f"coordinates, got {len(self.coords)}"
            )
        object.__setattr__(self, "coords", tuple(exactlp.as_fraction(c) for c in self.coords))

    def __neg__(self):
        return FreeVector(self.space, tuple(-c for c in self.coords))

    def scaled(self, c) -> "FreeVector":
        return FreeVector(self.space, tuple(c * v for v in self.coords))


@dataclass(frozen=True)
class Molecule:
    pair: tuple
    vector: FreeVector


def coordinate_index(space: PointedMetricSpace) -> dict:
    """Point index -> coordinate slot, skipping the basepoint."""
    return {p: k for k, p in enumerate(q for q in space.points if q != space.basepoint)}


def delta_difference(space: PointedMetricSpace, x: int, y: int, scale) -> tuple:
    """Coordinates of ``scale * (delta_x - delta_y)``."""
    slot = coordinate_index(space)
    coords = [_ZERO] * (len(space) - 1)
    if x in slot:
        coords[slot[x]] += scale
    if y in slot:
        coords[slot[y]] -= scale
    return tuple(coords)


def molecule(space: PointedMetricSpace, pair) -> Molecule:
    x, y = space.check_pair(pair)
    vec = FreeVector(space, delta_difference(space, x, y, 1 / space.dist[x][y]))
    return Molecule((x, y), vec)


def all_molecules(space: PointedMetricSpace) -> list:
    if len(space) < 2:
        raise EmptyDomainError("a one-point space has no molecules")
    return [molecule(space, p) for p in space.pairs()]


@dataclass(frozen=True)
class ExtremeReport:
    extreme: bool
    combination: tuple = ()  # ((pair, weight), ...) with positive weights


def is_extreme_molecule(space: PointedMetricSpace, pair) -> ExtremeReport:
    """Extreme iff the molecule is outside the hull of all other molecules."""
    require_valid(space)
    pair = space.check_pair(pair)
    mols = all_molecules(space)
    target = next(m for m in mols if m.pair == pair)
    others = [m for m in mols if m.pair != pair]
    out = exactlp.membership(target.vector.coords, [m.vector.coords for m in others])
    if not out.inside:
        return ExtremeReport(True)
    combo = tuple((m.pair, w) for m, w in zip(others, out.weights) if w)
    return ExtremeReport(False, combo)


def triangle_scan_extreme(space: PointedMetricSpace, pair) -> bool:
    """Independent check: extreme iff no third point lies metrically between."""
    x, y = space.check_pair(pair)
    d = space.dist
    return all(d[x][z] + d[z][y] > d[x][y] for z in space.points if z not in (x, y))


@dataclass(frozen=True)
class ExposedReport:
    exposed: bool
    functional: Optional[tuple] = None
    margin: Optional[Fraction] = None


def exposing_program(space: PointedMetricSpace, pair) -> LinearProgram:
    """Variables: functional coordinates ``g``, then ``delta`` (capped at 1)."""
    mols = all_molecules(space)
    dim = len(space) - 1
    target = next(m for m in mols if m.pair == pair)
    cons = [Constraint(target.vector.coords + (_ZERO,), EQ, _ONE)]
    for m in mols:
        if m.pair != pair:
            cons.append(Constraint(m.vector.coords + (_ONE,), LE, _ONE))
    objective = (_ZERO,) * dim + (_ONE,)
    upper = (None,) * dim + (_ONE,)
    return LinearProgram(objective, tuple(cons), upper=upper)


def is_exposed_molecule(space: PointedMetricSpace, pair) -> ExposedReport:
    """Maximise the gap between the molecule and every other molecule.

    Exposed iff the best gap is positive; the exposing functional is a
    Lipschitz function given by its non-basepoint values.
    """
    require_valid(space)
    pair = space.check_pair(pair)
    out = exactlp.solve(exposing_program(space, pair), "maximize")
    margin = out.value
    if margin <= 0:
        return ExposedReport(False, margin=margin)
    return ExposedReport(True, functional=out.solution[:-1], margin=margin)


def ball_membership(v: FreeVector) -> exactlp.Membership:
    """Is ``v`` in the unit ball?  Weights align with :func:`all_molecules`."""
    mols = all_molecules(v.space)
    return exactlp.membership(v.coords, [m.vector.coords for m in mols])


def classify(space: PointedMetricSpace) -> list:
    """Per ordered pair: extreme and exposed verdicts with the exposing margin."""
    rows = []
    for pair in space.pairs():
        ext = is_extreme_molecule(space, pair)
        exp = is_exposed_molecule(space, pair)
        rows.append((pair, ext, exp))
    return rows


def classification_to_json(space: PointedMetricSpace, rows) -> list:
    out = []
    for pair, ext, exp in rows:
        item = {
            "pair": space.pair_labels(pair),
            "extreme": ext.extreme,
            "exposed": exp.exposed,
            "margin": str(exp.margin) if exp.exposed else None,
        }
        if not ext.extreme:
            item["combination"] = [
                {"pair": space.pair_labels(p), "weight": str(w)} for p, w in ext.combination
            ]
        if exp.exposed:
            labels = [space.labels[q] for q in space.points if q != space.basepoint]
            item["functional"] = {p: str(g) for p, g in zip(labels, exp.functional)}
        out.append(item)
    return out
