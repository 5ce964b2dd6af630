"""Exact rational linear programming.

Two-phase tableau simplex over exact rationals with Bland's
pivot rule, so it terminates on degenerate programs and gives the same
answer for the same input every time.

Infeasible programs come back with a Farkas certificate ``y`` (one
multiplier per constraint row).  Writing ``r = sum_i y_i a_i``, the
certificate is valid when

* ``y_i >= 0`` on ``<=`` rows and ``y_i <= 0`` on ``>=`` rows,
* ``min { r.x : lower <= x <= upper }`` is finite and strictly greater
  than ``sum_i y_i b_i``.

Any feasible ``x`` would give ``r.x <= sum_i y_i b_i``, so both cannot hold.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import InconsistencyError, InputError

try:  # C rationals for the tableau; results are handed back as Fractions
    from gmpy2 import mpq as _num
except ImportError:  # pragma: no cover
    _num = Fraction

LE = "<="
EQ = "=="
GE = ">="
_RELATIONS = (LE, EQ, GE)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_ZERO = Fraction(0)
_ONE = Fraction(1)
_NZERO = _num(0)
_NONE = _num(1)


def _frac(q) -> Fraction:
    return q if isinstance(q, Fraction) else Fraction(int(q.numerator), int(q.denominator))


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise InputError(f"refusing inexact float {value!r}; pass a Fraction, int or string")
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"not a rational number: {value!r}") from exc


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple
    rel: str
    rhs: Fraction

    def __post_init__(self):
        if self.rel not in _RELATIONS:
            raise InputError(f"unknown relation {self.rel!r}")
        object.__setattr__(self, "coeffs", tuple(as_fraction(a) for a in self.coeffs))
        object.__setattr__(self, "rhs", as_fraction(self.rhs))


@dataclass(frozen=True)
class LinearProgram:
    """``objective . x`` subject to ``constraints`` and per-variable bounds.

    Variables are free unless ``lower``/``upper`` say otherwise; ``None``
    entries mean no bound on that side.
    """

    objective: tuple
    constraints: tuple = ()
    lower: Optional[tuple] = None
    upper: Optional[tuple] = None

    def __post_init__(self):
        n = len(self.objective)
        object.__setattr__(self, "objective", tuple(as_fraction(c) for c in self.objective))
        cons = tuple(c if isinstance(c, Constraint) else Constraint(*c) for c in self.constraints)
        for k, c in enumerate(cons):
            if len(c.coeffs) != n:
                raise InputError(
                    f"constraint {k} has {len(c.coeffs)} coefficients, expected {n}"
                )
        object.__setattr__(self, "constraints", cons)
        for side in ("lower", "upper"):
            bounds = getattr(self, side)
            if bounds is None:
                bounds = (None,) * n
            if len(bounds) != n:
                raise InputError(f"{side} bounds have length {len(bounds)}, expected {n}")
            object.__setattr__(
                self, side, tuple(None if b is None else as_fraction(b) for b in bounds)
            )
        for j, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if lo is not None and hi is not None and lo > hi:
                raise InputError(f"variable {j} has lower bound {lo} above upper bound {hi}")

    @property
    def n_vars(self) -> int:
        return len(self.objective)


@dataclass(frozen=True)
class LpOutcome:
    status: str
    solution: Optional[tuple] = None
    value: Optional[Fraction] = None
    certificate: Optional[tuple] = None


def _dot(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b) if x and y), _ZERO)


def is_feasible_point(lp: LinearProgram, x: Sequence[Fraction]) -> bool:
    if len(x) != lp.n_vars:
        return False
    for xj, lo, hi in zip(x, lp.lower, lp.upper):
        if (lo is not None and xj < lo) or (hi is not None and xj > hi):
            return False
    for c in lp.constraints:
        lhs = _dot(c.coeffs, x)
        if (c.rel == LE and lhs > c.rhs) or (c.rel == GE and lhs < c.rhs) or (
            c.rel == EQ and lhs != c.rhs
        ):
            return False
    return True


def check_farkas(lp: LinearProgram, y: Sequence[Fraction]) -> bool:
    """True when ``y`` proves ``lp`` has no feasible point."""
    if len(y) != len(lp.constraints):
        return False
    for yi, c in zip(y, lp.constraints):
        if (c.rel == LE and yi < 0) or (c.rel == GE and yi > 0):
            return False
    r = [_ZERO] * lp.n_vars
    for yi, c in zip(y, lp.constraints):
        if yi:
            for j, a in enumerate(c.coeffs):
                if a:
                    r[j] += yi * a
    floor = _ZERO
    for rj, lo, hi in zip(r, lp.lower, lp.upper):
        if rj > 0:
            if lo is None:
                return False
            floor += rj * lo
        elif rj < 0:
            if hi is None:
                return False
            floor += rj * hi
    return floor > _dot(y, (c.rhs for c in lp.constraints))


class _Tableau:
    """Dense tableau for ``min c.p  s.t.  A p = b, p >= 0, b >= 0``.

    Row ``m`` (the last) holds reduced costs; its final entry is minus the
    current objective value.
    """

    def __init__(self, rows, basis):
        self.rows = rows
        self.basis = basis

    def pivot(self, r: int, c: int) -> None:
        rows = self.rows
        prow = rows[r]
        piv = prow[c]
        if piv != 1:
            inv = 1 / piv
            prow = rows[r] = [v * inv if v else v for v in prow]
        nz = [k for k, v in enumerate(prow) if v]
        for i, row in enumerate(rows):
            if i == r:
                continue
            f = row[c]
            if f:
                for k in nz:
                    row[k] -= f * prow[k]
        self.basis[r] = c

    def run(self, allowed) -> bool:
        """Bland-rule simplex iterations; False if unbounded."""
        rows = self.rows
        cost = rows[-1]
        m = len(rows) - 1
        while True:
            enter = next((j for j in allowed if cost[j] < 0), None)
            if enter is None:
                return True
            best = None
            for i in range(m):
                a = rows[i][enter]
                if a > 0:
                    ratio = rows[i][-1] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return False
            self.pivot(best[1], enter)


def solve(lp: LinearProgram, sense: str = "maximize") -> LpOutcome:
    """Optimize ``lp`` exactly.

    ``sense`` is ``"maximize"`` or ``"minimize"``.  An all-zero objective
    turns this into a pure feasibility check.
    """
    if sense not in ("maximize", "minimize"):
        raise InputError(f"unknown sense {sense!r}")
    n = lp.n_vars

    # x_j = offset_j + sum(sign * p_col) over the columns assigned to j.
    offsets = []
    var_cols = []
    ncols = 0
    bound_rows = []  # (column, width) for variables bounded on both sides
    for lo, hi in zip(lp.lower, lp.upper):
        if lo is not None:
            offsets.append(lo)
            var_cols.append(((ncols, 1),))
            if hi is not None:
                bound_rows.append((ncols, hi - lo))
            ncols += 1
        elif hi is not None:
            offsets.append(hi)
            var_cols.append(((ncols, -1),))
            ncols += 1
        else:
            offsets.append(_ZERO)
            var_cols.append(((ncols, 1), (ncols + 1, -1)))
            ncols += 2
    n_struct = ncols

    # Standard-form rows before slacks: (coeff dict, relation, rhs).
    std_rows = []
    for c in lp.constraints:
        coeffs = {}
        for j, a in enumerate(c.coeffs):
            if a:
                for col, s in var_cols[j]:
                    coeffs[col] = a * s
        std_rows.append((coeffs, c.rel, c.rhs - _dot(c.coeffs, offsets)))
    for col, width in bound_rows:
        std_rows.append(({col: _ONE}, LE, width))
    m = len(std_rows)

    slack_col = {}
    for k, (_, rel, _) in enumerate(std_rows):
        if rel != EQ:
            slack_col[k] = ncols
            ncols += 1
    art_start = ncols

    flips = []
    basis = []
    init_cols = []
    init_cost = []
    dense = []
    for k, (coeffs, rel, rhs) in enumerate(std_rows):
        flip = -1 if rhs < 0 else 1
        flips.append(flip)
        slack_sign = {LE: 1, GE: -1, EQ: 0}[rel] * flip
        if slack_sign == 1:
            basis.append(slack_col[k])
            init_cols.append(slack_col[k])
            init_cost.append(_ZERO)
        else:
            basis.append(ncols)
            init_cols.append(ncols)
            init_cost.append(_ONE)
            ncols += 1
        dense.append((coeffs, slack_sign, rhs * flip, flip))

    rows = []
    for k, (coeffs, slack_sign, rhs, flip) in enumerate(dense):
        row = [_NZERO] * (ncols + 1)
        for col, a in coeffs.items():
            row[col] = _num(a * flip)
        if slack_sign:
            row[slack_col[k]] = _num(slack_sign)
        row[basis[k]] = _NONE
        row[-1] = _num(rhs)
        rows.append(row)

    # Phase 1: minimise the sum of artificials.
    cost = [_NZERO] * (ncols + 1)
    for col in range(art_start, ncols):
        cost[col] = _NONE
    for k, row in enumerate(rows):
        if basis[k] >= art_start:
            for col, v in enumerate(row):
                if v:
                    cost[col] -= v
    tab = _Tableau(rows + [cost], basis)
    tab.run(range(ncols))
    infeasibility = -tab.rows[-1][-1]

    if infeasibility > 0:
        red = tab.rows[-1]
        y = []
        for k in range(len(lp.constraints)):
            dual = init_cost[k] - _frac(red[init_cols[k]])
            y.append(-dual * flips[k])
        y = tuple(y)
        if not check_farkas(lp, y):
            raise InconsistencyError("phase-1 duals failed to certify infeasibility")
        return LpOutcome(INFEASIBLE, certificate=y)

    # Drive zero-level artificials out of the basis; drop redundant rows.
    keep = []
    for i in range(m):
        if tab.basis[i] >= art_start:
            row = tab.rows[i]
            col = next((j for j in range(art_start) if row[j]), None)
            if col is None:
                continue
            tab.pivot(i, col)
        keep.append(i)
    tab.rows = [tab.rows[i] for i in keep] + [tab.rows[-1]]
    tab.basis = [tab.basis[i] for i in keep]

    flip_obj = -1 if sense == "maximize" else 1
    cost = [_NZERO] * (ncols + 1)
    for j, cj in enumerate(lp.objective):
        if cj:
            for col, s in var_cols[j]:
                cost[col] = _num(cj * s * flip_obj)
    for i, b in enumerate(tab.basis):
        f = cost[b]
        if f:
            for col, v in enumerate(tab.rows[i]):
                if v:
                    cost[col] -= f * v
    tab.rows[-1] = cost
    if not tab.run(range(art_start)):
        return LpOutcome(UNBOUNDED)

    p = [_ZERO] * n_struct
    for i, b in enumerate(tab.basis):
        if b < n_struct:
            p[b] = _frac(tab.rows[i][-1])
    x = tuple(
        offsets[j] + sum((p[col] * s for col, s in var_cols[j]), _ZERO) for j in range(n)
    )
    if not is_feasible_point(lp, x):
        raise InconsistencyError("simplex returned a point violating the constraints")
    return LpOutcome(OPTIMAL, solution=x, value=_dot(lp.objective, x))


@dataclass(frozen=True)
class Membership:
    """Result of a convex-hull membership query.

    ``weights`` is set when inside, ``separator`` when outside.
    """

    inside: bool
    weights: Optional[tuple] = None
    separator: Optional[tuple] = None


def check_weights(target, generators, weights) -> bool:
    if len(weights) != len(generators) or any(w < 0 for w in weights):
        return False
    if sum(weights, _ZERO) != 1:
        return False
    for k, t in enumerate(target):
        if sum((w * g[k] for w, g in zip(weights, generators) if w), _ZERO) != t:
            return False
    return True


def check_separator(target, generators, separator) -> bool:
    if len(separator) != len(target):
        return False
    top = _dot(separator, target)
    return all(_dot(separator, g) < top for g in generators)


def _check_dims(target, generators):
    if not generators:
        raise InputError("membership needs at least one generator")
    dim = len(target)
    for i, g in enumerate(generators):
        if len(g) != dim:
            raise InputError(f"generator {i} has dimension {len(g)}, expected {dim}")


def membership(target: Sequence, generators: Sequence[Sequence]) -> Membership:
    """Decide whether ``target`` lies in the convex hull of ``generators``.

    Inside: exact convex weights.  Outside: a separator ``g`` with
    ``<g, target>`` strictly above every ``<g, generator>``, scaled so the
    largest generator value is 1 when positive (or -1 when negative).
    """
    target = tuple(as_fraction(t) for t in target)
    generators = [tuple(as_fraction(v) for v in g) for g in generators]
    _check_dims(target, generators)
    dim, count = len(target), len(generators)

    constraints = [
        Constraint(tuple(g[k] for g in generators), EQ, target[k]) for k in range(dim)
    ]
    constraints.append(Constraint((_ONE,) * count, EQ, _ONE))
    lp = LinearProgram((_ZERO,) * count, tuple(constraints), lower=(_ZERO,) * count)
    out = solve(lp, "minimize")

    if out.status == OPTIMAL:
        weights = out.solution
        if not check_weights(target, generators, weights):
            raise InconsistencyError("membership weights failed exact recombination")
        return Membership(True, weights=weights)

    sep = tuple(-v for v in out.certificate[:dim])
    top = max(_dot(sep, g) for g in generators)
    if top:
        sep = tuple(v / abs(top) for v in sep)
    else:
        scale = _dot(sep, target)
        sep = tuple(v / scale for v in sep)
    if not check_separator(target, generators, sep):
        raise InconsistencyError("membership separator failed exact evaluation")
    return Membership(False, separator=sep)
