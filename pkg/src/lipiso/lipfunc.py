"""Lipschitz functions vanishing at the basepoint, and peaking functions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional

from . import exactlp
from .errors import EmptyDomainError, InputError
from .exactlp import LE, EQ, Constraint, LinearProgram
from .metric import PointedMetricSpace, parse_rational, require_valid

_ZERO = Fraction(0)


@dataclass(frozen=True)
class LipschitzFunction:
    space: PointedMetricSpace
    values: tuple

    def __post_init__(self):
        vals = tuple(exactlp.as_fraction(v) for v in self.values)
        if len(vals) != len(self.space):
            raise InputError(
                f"function has {len(vals)} values but space {self.space.name!r} "
                f"has {len(self.space)} points"
            )
        if vals[self.space.basepoint] != 0:
            raise InputError("function must vanish at the basepoint")
        object.__setattr__(self, "values", vals)

    def __call__(self, i: int) -> Fraction:
        return self.values[i]

    def scaled(self, c) -> "LipschitzFunction":
        return LipschitzFunction(self.space, tuple(c * v for v in self.values))

    def __neg__(self):
        return self.scaled(-1)

    def __add__(self, other: "LipschitzFunction") -> "LipschitzFunction":
        if other.space != self.space:
            raise InputError("cannot add functions on different spaces")
        return LipschitzFunction(self.space, tuple(a + b for a, b in zip(self.values, other.values)))


def quotient(f: LipschitzFunction, pair) -> Fraction:
    """Signed slope ``(f(x) - f(y)) / d(x, y)``."""
    x, y = pair
    return (f.values[x] - f.values[y]) / f.space.dist[x][y]


def lip_norm(f: LipschitzFunction) -> Fraction:
    d = f.space.dist
    v = f.values
    best = _ZERO
    for i, j in combinations(range(len(v)), 2):
        q = abs(v[i] - v[j]) / d[i][j]
        if q > best:
            best = q
    return best


def attaining_pairs(f: LipschitzFunction) -> list:
    """Every ordered pair whose signed slope equals ``Lip(f)``."""
    if len(f.space) < 2:
        raise EmptyDomainError("a one-point space has no pairs of distinct points")
    norm = lip_norm(f)
    return [p for p in f.space.pairs() if quotient(f, p) == norm]


@dataclass(frozen=True)
class PeakCertificate:
    function: LipschitzFunction
    pair: tuple
    margin: Fraction


def verify_peak_certificate(cert: PeakCertificate) -> bool:
    """Re-check a peaking certificate by enumerating every pair."""
    f = cert.function
    x, y = cert.pair
    if cert.margin <= 0 or quotient(f, (x, y)) != 1:
        return False
    bound = 1 - cert.margin
    d = f.space.dist
    v = f.values
    for i, j in combinations(range(len(v)), 2):
        if {i, j} == {x, y}:
            continue
        if abs(v[i] - v[j]) > bound * d[i][j]:
            return False
    return True


def peaking_program(space: PointedMetricSpace, pair) -> LinearProgram:
    """Margin LP: variables ``f_0 .. f_{n-1}, delta``; maximise ``delta``.

    ``delta`` is capped at 1 so the program stays bounded when the pair
    is the only one (two-point spaces).
    """
    n = len(space)
    x, y = pair
    d = space.dist

    def row(coef, rel, rhs):
        return Constraint(tuple(coef), rel, rhs)

    cons = []
    unit = [_ZERO] * (n + 1)
    unit[space.basepoint] = Fraction(1)
    cons.append(row(unit, EQ, 0))
    top = [_ZERO] * (n + 1)
    top[x], top[y] = Fraction(1), Fraction(-1)
    cons.append(row(top, EQ, d[x][y]))
    for z, w in combinations(range(n), 2):
        if {z, w} == {x, y}:
            continue
        for s in (1, -1):
            c = [_ZERO] * (n + 1)
            c[z], c[w], c[n] = Fraction(s), Fraction(-s), d[z][w]
            cons.append(row(c, LE, d[z][w]))
    objective = [_ZERO] * n + [Fraction(1)]
    upper = [None] * n + [Fraction(1)]
    return LinearProgram(tuple(objective), tuple(cons), upper=tuple(upper))


def construct_peaking(space: PointedMetricSpace, pair) -> Optional[PeakCertificate]:
    """Norm-one function peaking at ``pair`` with the largest possible margin.

    Returns ``None`` when no function of norm at most one peaks there.
    """
    require_valid(space)
    pair = space.check_pair(pair)
    out = exactlp.solve(peaking_program(space, pair), "maximize")
    # Always feasible (delta -> -inf) and bounded (delta <= 1).
    margin = out.value
    if margin <= 0:
        return None
    f = LipschitzFunction(space, out.solution[:-1])
    return PeakCertificate(f, pair, margin)


@dataclass(frozen=True)
class PeakReport:
    holds: bool
    witness: Optional[tuple] = None
    certificates: tuple = ()


def peak_pairs(space: PointedMetricSpace):
    """One representative ``(i, j)``, ``i > j``, per unordered pair."""
    return [(i, j) for i in range(len(space)) for j in range(i)]


def has_peak_property(space: PointedMetricSpace) -> PeakReport:
    """Try every unordered pair; stop at the first one nothing peaks at.

    Checking one orientation suffices: ``-f`` peaks at the reversed pair.
    """
    require_valid(space)
    certs = []
    for pair in peak_pairs(space):
        cert = construct_peaking(space, pair)
        if cert is None:
            return PeakReport(False, witness=pair, certificates=tuple(certs))
        certs.append(cert)
    return PeakReport(True, certificates=tuple(certs))


def function_from_json(data: dict, space: PointedMetricSpace) -> LipschitzFunction:
    try:
        raw = data["values"]
    except (KeyError, TypeError):
        raise InputError("function JSON needs a 'values' object") from None
    if data.get("space", space.name) != space.name:
        raise InputError(f"function lives on {data['space']!r}, not {space.name!r}")
    unknown = set(raw) - set(space.labels)
    if unknown:
        raise InputError(f"function has values at unknown points {sorted(unknown)}")
    base = space.labels[space.basepoint]
    missing = [p for p in space.labels if p not in raw and p != base]
    if missing:
        raise InputError(f"function has no value at {missing}")
    values = [parse_rational(raw.get(p, "0")) for p in space.labels]
    return LipschitzFunction(space, values)


def function_to_json(f: LipschitzFunction) -> dict:
    return {
        "space": f.space.name,
        "values": {p: str(v) for p, v in zip(f.space.labels, f.values)},
    }


def certificate_to_json(cert: PeakCertificate) -> dict:
    return {
        "function": function_to_json(cert.function),
        "pair": cert.function.space.pair_labels(cert.pair),
        "margin": str(cert.margin),
    }


def certificate_from_json(data: dict, space: PointedMetricSpace) -> PeakCertificate:
    try:
        f = function_from_json(data["function"], space)
        pair = space.check_pair(tuple(space.index(p) for p in data["pair"]))
        margin = parse_rational(data["margin"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed peak certificate: {exc}") from None
    return PeakCertificate(f, pair, margin)
