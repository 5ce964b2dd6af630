"""Finite pointed metric spaces with exact rational distances."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional

from .errors import InputError
from .exactlp import as_fraction


@dataclass(frozen=True)
class PointedMetricSpace:
    labels: tuple
    basepoint: int
    dist: tuple
    name: str = "X"

    def __post_init__(self):
        labels = tuple(str(p) for p in self.labels)
        n = len(labels)
        if len(self.dist) != n or any(len(row) != n for row in self.dist):
            raise InputError(f"space {self.name!r}: distance matrix is not {n}x{n}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(
            self, "dist", tuple(tuple(as_fraction(v) for v in row) for row in self.dist)
        )

    def __len__(self):
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise InputError(f"space {self.name!r} has no point {label!r}") from None

    @property
    def points(self) -> range:
        return range(len(self.labels))

    def pairs(self):
        """Ordered pairs of distinct points, row-major."""
        n = len(self.labels)
        return [(i, j) for i in range(n) for j in range(n) if i != j]

    def check_pair(self, pair) -> tuple:
        i, j = pair
        n = len(self.labels)
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise InputError(f"space {self.name!r}: {pair!r} is not a pair of distinct points")
        return (i, j)

    def pair_labels(self, pair) -> list:
        return [self.labels[pair[0]], self.labels[pair[1]]]


@dataclass(frozen=True)
class MetricReport:
    ok: bool
    problem: Optional[str] = None
    points: tuple = ()

    @property
    def message(self) -> str:
        return "ok" if self.ok else f"{self.problem} at {', '.join(self.points)}"


def validate(space: PointedMetricSpace) -> MetricReport:
    """Check the metric axioms, reporting the first violation found."""
    n = len(space)
    lab = space.labels
    if len(set(lab)) != n:
        dup = next(p for p in lab if lab.count(p) > 1)
        return MetricReport(False, "duplicate label", (dup,))
    if not 0 <= space.basepoint < n:
        return MetricReport(False, "basepoint out of range", (str(space.basepoint),))
    d = space.dist
    for i in range(n):
        if d[i][i] != 0:
            return MetricReport(False, "nonzero self-distance", (lab[i],))
    for i, j in combinations(range(n), 2):
        if d[i][j] != d[j][i]:
            return MetricReport(False, "asymmetric distance", (lab[i], lab[j]))
        if d[i][j] <= 0:
            return MetricReport(False, "non-positive distance", (lab[i], lab[j]))
    for i, j in combinations(range(n), 2):
        for k in range(n):
            if k != i and k != j and d[i][j] > d[i][k] + d[k][j]:
                return MetricReport(False, "triangle inequality violated", (lab[i], lab[k], lab[j]))
    return MetricReport(True)


def require_valid(space: PointedMetricSpace) -> PointedMetricSpace:
    report = validate(space)
    if not report.ok:
        raise InputError(f"space {space.name!r}: {report.message}")
    return space


def _slacks(space):
    """(slack, (x, z, y)) for every unordered pair {x, y} and third point z."""
    d = space.dist
    n = len(space)
    for i, j in combinations(range(n), 2):
        for k in range(n):
            if k != i and k != j:
                yield d[i][k] + d[k][j] - d[i][j], (i, k, j)


@dataclass(frozen=True)
class ConcavityReport:
    concave: bool
    witness: Optional[tuple] = None
    min_slack: Optional[Fraction] = None


def check_concave(space: PointedMetricSpace) -> ConcavityReport:
    """Strict triangle inequality over all triples of distinct points.

    ``witness`` is ``(x, z, y)`` with ``d(x, y) >= d(x, z) + d(z, y)``.
    """
    for slack, triple in _slacks(space):
        if slack <= 0:
            return ConcavityReport(False, witness=triple)
    return ConcavityReport(True)


def check_uniformly_concave(space: PointedMetricSpace) -> ConcavityReport:
    """Concavity with the smallest triangle slack.

    A finite space has finitely many slacks, so the uniform version holds
    exactly when the strict one does.  ``min_slack`` is ``None`` when the
    space has fewer than three points (vacuously uniformly concave).
    """
    best = None
    for slack, triple in _slacks(space):
        if slack <= 0:
            return ConcavityReport(False, witness=triple, min_slack=slack)
        if best is None or slack < best:
            best = slack
    return ConcavityReport(True, min_slack=best)


def _iroot(x: int, k: int) -> int:
    """floor(x ** (1/k)) for integers x >= 0, k >= 1."""
    if x < 2 or k == 1:
        return x
    g = 1 << -(-x.bit_length() // k)
    while True:
        h = ((k - 1) * g + x // g ** (k - 1)) // k
        if h >= g:
            return g
        g = h


def round_power(value: Fraction, alpha: Fraction, digits: int) -> Fraction:
    """``value ** alpha`` correctly rounded (half-even) to ``digits`` decimals."""
    p, q = value.numerator, value.denominator
    a, b = alpha.numerator, alpha.denominator
    scale = 10**digits
    # N = round(scale * (p/q)^(a/b));  compare N^b * q^a with scale^b * p^a.
    num = scale**b * p**a
    den = q**a
    low = _iroot(num // den, b)
    lhs = (2 * low + 1) ** b * den
    rhs = 2**b * num
    if lhs < rhs or (lhs == rhs and low % 2):
        low += 1
    return Fraction(low, scale)


def holder_transform(space: PointedMetricSpace, alpha, digits: int) -> PointedMetricSpace:
    """The snowflake ``(X, d**alpha)`` with distances rounded to ``digits`` decimals."""
    alpha = as_fraction(alpha)
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    if not isinstance(digits, int) or digits < 1:
        raise InputError(f"digits must be a positive integer, got {digits!r}")
    require_valid(space)
    n = len(space)
    dist = [[Fraction(0)] * n for _ in range(n)]
    for i, j in combinations(range(n), 2):
        dist[i][j] = dist[j][i] = round_power(space.dist[i][j], alpha, digits)
    out = PointedMetricSpace(
        space.labels, space.basepoint, dist, name=f"{space.name}^{alpha}@{digits}"
    )
    report = validate(out)
    if not report.ok:
        raise InputError(
            f"rounding to {digits} digits broke the metric ({report.message}); "
            "use a higher digits value"
        )
    return out


def shortest_path_closure(weights) -> list:
    """All-pairs shortest paths (Floyd-Warshall) on a symmetric weight matrix."""
    n = len(weights)
    d = [list(row) for row in weights]
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            di = d[i]
            for j in range(n):
                via = dik + dk[j]
                if via < di[j]:
                    di[j] = via
    return d


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"``, a finite decimal string, or a JSON integer."""
    if isinstance(text, bool) or isinstance(text, float):
        raise InputError(f"rationals must be strings or integers, got {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise InputError(f"not a rational: {text!r}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not a rational: {text!r}") from None


def space_from_json(data: dict) -> PointedMetricSpace:
    try:
        points = [str(p) for p in data["points"]]
        base = str(data["basepoint"])
        metric = data["metric"]
        name = str(data.get("name", "X"))
    except (KeyError, TypeError) as exc:
        raise InputError(f"space JSON is missing field {exc}") from None
    if base not in points:
        raise InputError(f"space {name!r}: basepoint {base!r} is not among its points")
    if not isinstance(metric, list) or any(not isinstance(r, list) for r in metric):
        raise InputError(f"space {name!r}: metric must be a list of rows")
    dist = [[parse_rational(v) for v in row] for row in metric]
    return PointedMetricSpace(points, points.index(base), dist, name=name)


def space_to_json(space: PointedMetricSpace) -> dict:
    return {
        "name": space.name,
        "points": list(space.labels),
        "basepoint": space.labels[space.basepoint],
        "metric": [[str(v) for v in row] for row in space.dist],
    }
