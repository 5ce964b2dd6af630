"""Composition operators ``f -> f o phi`` induced by basepoint-preserving maps.

Two independent ways to decide whether ``C_phi`` is an isometry:

* :func:`isometry_oracle` works in the free space.  ``Lip(f o phi)`` is the
  support function at ``f`` of the hull of the pushed-forward molecules
  ``(delta_phi(u) - delta_phi(v)) / d_Y(u, v)``, so ``C_phi`` is isometric
  iff ``phi`` is nonexpansive and that hull contains every molecule of X.
* :func:`isometry_via_theorem` uses the metric characterisation:
  nonexpansive plus property (M) is sufficient for any codomain, and
  necessary when the codomain has the peak property.

On finite spaces a convergent sequence is eventually constant, and a ratio
sequence bounded by 1 that tends to 1 is eventually equal to 1.  Property
(M) therefore reduces to: every ordered pair ``(x, y)`` of X has a preimage
pair ``(u, v)`` with ``d_Y(u, v) = d_X(x, y)`` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional, Union

from . import exactlp
from .errors import EmptyDomainError, InconsistencyError, InputError
from .freespace import delta_difference, molecule
from .lipfunc import (
    LipschitzFunction,
    PeakReport,
    construct_peaking,
    function_from_json,
    has_peak_property,
    lip_norm,
    peak_pairs,
)
from .metric import PointedMetricSpace, parse_rational

_ZERO = Fraction(0)


@dataclass(frozen=True)
class BasepointMap:
    domain: PointedMetricSpace
    codomain: PointedMetricSpace
    images: tuple

    def __post_init__(self):
        images = tuple(int(i) for i in self.images)
        if len(images) != len(self.domain):
            raise InputError(
                f"map gives {len(images)} images for {len(self.domain)} points of "
                f"{self.domain.name!r}"
            )
        if any(not 0 <= i < len(self.codomain) for i in images):
            raise InputError(f"map sends a point outside {self.codomain.name!r}")
        if images[self.domain.basepoint] != self.codomain.basepoint:
            raise InputError("map does not send basepoint to basepoint")
        object.__setattr__(self, "images", images)

    def __call__(self, u: int) -> int:
        return self.images[u]

    def ratio(self, pair) -> Fraction:
        u, v = pair
        return self.codomain.dist[self.images[u]][self.images[v]] / self.domain.dist[u][v]


def is_surjective(phi: BasepointMap) -> bool:
    return set(phi.images) == set(phi.codomain.points)


def apply(phi: BasepointMap, f: LipschitzFunction) -> LipschitzFunction:
    if f.space != phi.codomain:
        raise InputError(
            f"function lives on {f.space.name!r} but the map lands in {phi.codomain.name!r}"
        )
    return LipschitzFunction(phi.domain, tuple(f.values[i] for i in phi.images))


def operator_norm(phi: BasepointMap) -> Fraction:
    """``||C_phi|| = Lip(phi)``."""
    best = _ZERO
    for pair in combinations(phi.domain.points, 2):
        r = phi.ratio(pair)
        if r > best:
            best = r
    return best


@dataclass(frozen=True)
class NonexpansiveReport:
    holds: bool
    witness: Optional[tuple] = None


def check_nonexpansive(phi: BasepointMap) -> NonexpansiveReport:
    for u, v in combinations(phi.domain.points, 2):
        if phi.ratio((u, v)) > 1:
            return NonexpansiveReport(False, (u, v))
    return NonexpansiveReport(True)


@dataclass(frozen=True)
class DilationReport:
    k: Optional[Fraction]
    witness: tuple = ()

    @property
    def is_dilation(self) -> bool:
        return self.k is not None


def detect_dilation(phi: BasepointMap) -> DilationReport:
    """The constant ratio ``k > 0`` if there is one, else two pairs that differ.

    A map collapsing every pair has ratio 0 throughout and is reported with
    its first pair as the witness.
    """
    if len(phi.domain) < 2:
        raise EmptyDomainError("dilation needs a domain with at least two points")
    pairs = list(combinations(phi.domain.points, 2))
    first = pairs[0]
    k = phi.ratio(first)
    for pair in pairs[1:]:
        if phi.ratio(pair) != k:
            return DilationReport(None, (first, pair))
    if k == 0:
        return DilationReport(None, (first,))
    return DilationReport(k)


@dataclass(frozen=True)
class PropertyMReport:
    holds: bool
    matches: dict = field(default_factory=dict)  # X pair -> Y pair or None

    @property
    def unmatched(self) -> list:
        return [p for p, m in self.matches.items() if m is None]


def check_property_m(phi: BasepointMap) -> PropertyMReport:
    """Exact preimage pairs attaining each codomain distance."""
    dy = phi.domain.dist
    dx = phi.codomain.dist
    found = {}
    for u, v in phi.domain.pairs():
        key = (phi.images[u], phi.images[v])
        if key[0] != key[1] and key not in found and dy[u][v] == dx[key[0]][key[1]]:
            found[key] = (u, v)
    matches = {p: found.get(p) for p in phi.codomain.pairs()}
    return PropertyMReport(all(m is not None for m in matches.values()), matches)


# -- certificates ---------------------------------------------------------


@dataclass(frozen=True)
class CoverWitness:
    """Per ordered X pair: Y pairs whose pushed molecules average to it."""

    cover: dict  # X pair -> ((Y pair, weight), ...)


@dataclass(frozen=True)
class SeparatingFunction:
    """``Lip(function) = 1`` but ``Lip(function o phi) = composed_norm != 1``."""

    function: LipschitzFunction
    composed_norm: Fraction


Certificate = Union[CoverWitness, SeparatingFunction]


@dataclass(frozen=True)
class IsometryVerdict:
    isometric: bool
    method: str
    certificate: Certificate
    degenerate: bool = False


def pushed_molecule(phi: BasepointMap, pair) -> tuple:
    u, v = pair
    return delta_difference(
        phi.codomain, phi.images[u], phi.images[v], 1 / phi.domain.dist[u][v]
    )


def _distance_function(phi: BasepointMap, pair) -> SeparatingFunction:
    """For an expanding pair: ``d(., phi(v))`` shifted to vanish at the basepoint."""
    u, v = pair
    X = phi.codomain
    anchor = phi.images[v]
    f = LipschitzFunction(
        X, tuple(X.dist[z][anchor] - X.dist[X.basepoint][anchor] for z in X.points)
    )
    return SeparatingFunction(f, lip_norm(apply(phi, f)))


def _degenerate(phi: BasepointMap, method: str) -> Optional[IsometryVerdict]:
    if len(phi.codomain) < 2:
        return IsometryVerdict(True, method, CoverWitness({}), degenerate=True)
    return None


def isometry_oracle(phi: BasepointMap) -> IsometryVerdict:
    """Decide isometry by convex-hull membership of codomain molecules."""
    verdict = _degenerate(phi, "oracle")
    if verdict is not None:
        return verdict
    ne = check_nonexpansive(phi)
    if not ne.holds:
        return IsometryVerdict(False, "oracle", _distance_function(phi, ne.witness))

    X = phi.codomain
    gens, owners = [], []
    seen = set()
    for pair in phi.domain.pairs():
        vec = pushed_molecule(phi, pair)
        if vec not in seen:
            seen.add(vec)
            gens.append(vec)
            owners.append(pair)
    if not gens:
        # One-point domain: C_phi is the zero map.
        gens, owners = [(_ZERO,) * (len(X) - 1)], [None]

    cover = {}
    for x, y in ((i, j) for i in X.points for j in range(i)):
        target = molecule(X, (x, y)).vector.coords
        out = exactlp.membership(target, gens)
        if not out.inside:
            slot = [q for q in X.points if q != X.basepoint]
            values = [_ZERO] * len(X)
            for q, s in zip(slot, out.separator):
                values[q] = s
            f = LipschitzFunction(X, values)
            f = f.scaled(1 / lip_norm(f))
            composed = lip_norm(apply(phi, f))
            if composed >= 1:
                raise InconsistencyError("hull separator did not lower the Lipschitz norm")
            return IsometryVerdict(False, "oracle", SeparatingFunction(f, composed))
        combo = tuple((owners[k], w) for k, w in enumerate(out.weights) if w)
        cover[(x, y)] = combo
        # Pushed molecules come in +/- pairs, so the reversed pair reuses
        # the same weights on reversed Y pairs.
        cover[(y, x)] = tuple(((p[1], p[0]), w) for p, w in combo)
    return IsometryVerdict(True, "oracle", CoverWitness(cover))


def isometry_via_theorem(
    phi: BasepointMap, peak: Optional[PeakReport] = None
) -> Optional[IsometryVerdict]:
    """Metric characterisation; ``None`` where the theorems give no verdict.

    ``peak`` may carry a precomputed :func:`has_peak_property` of the codomain.
    """
    verdict = _degenerate(phi, "theorem")
    if verdict is not None:
        return verdict
    ne = check_nonexpansive(phi)
    pm = check_property_m(phi)
    if ne.holds and pm.holds:
        cover = {xy: ((uv, Fraction(1)),) for xy, uv in pm.matches.items()}
        return IsometryVerdict(True, "theorem", CoverWitness(cover))
    if peak is None:
        peak = has_peak_property(phi.codomain)
    if not peak.holds:
        return None
    if not ne.holds:
        return IsometryVerdict(False, "theorem", _distance_function(phi, ne.witness))
    # A function peaking at an unmatched pair loses norm under composition.
    pair = next(p for p in peak_pairs(phi.codomain) if pm.matches[p] is None)
    cert = construct_peaking(phi.codomain, pair)
    composed = lip_norm(apply(phi, cert.function))
    if composed >= 1:
        raise InconsistencyError("peaking function kept its norm at an unmatched pair")
    return IsometryVerdict(False, "theorem", SeparatingFunction(cert.function, composed))


def verify_certificate(verdict: IsometryVerdict, phi: BasepointMap) -> bool:
    """Re-check a verdict's witness with exact arithmetic only."""
    cert = verdict.certificate
    X, Y = phi.codomain, phi.domain
    if isinstance(cert, SeparatingFunction):
        if cert.function.space != X:
            raise InputError("separating function does not live on the map's codomain")
        if verdict.isometric:
            return False
        if lip_norm(cert.function) != 1:
            return False
        composed = lip_norm(apply(phi, cert.function))
        return composed == cert.composed_norm and composed != 1
    if not isinstance(cert, CoverWitness):
        raise InputError(f"unknown certificate type {type(cert).__name__}")
    if not verdict.isometric:
        return False
    if len(X) < 2:
        return verdict.degenerate
    if not check_nonexpansive(phi).holds:
        return False
    if set(cert.cover) != set(X.pairs()):
        return False
    for xy, combo in cert.cover.items():
        target = molecule(X, xy).vector.coords
        pairs = [p for p, _ in combo]
        for p in pairs:
            if p is not None:
                Y.check_pair(p)
        gens = [pushed_molecule(phi, p) if p is not None else (_ZERO,) * (len(X) - 1)
                for p in pairs]
        if not combo or not exactlp.check_weights(target, gens, [w for _, w in combo]):
            return False
    return True


# -- JSON ---------------------------------------------------------------


def map_from_json(data: dict, spaces: dict) -> BasepointMap:
    """``spaces`` maps names to :class:`PointedMetricSpace` objects."""
    try:
        dom, cod, raw = data["domain"], data["codomain"], data["map"]
    except (KeyError, TypeError) as exc:
        raise InputError(f"map JSON is missing field {exc}") from None
    for name in (dom, cod):
        if name not in spaces:
            raise InputError(f"map refers to unknown space {name!r}")
    Y, X = spaces[dom], spaces[cod]
    unknown = set(raw) - set(Y.labels)
    if unknown:
        raise InputError(f"map sends unknown points {sorted(unknown)}")
    missing = [p for p in Y.labels if p not in raw]
    if missing:
        raise InputError(f"map has no image for {missing}")
    return BasepointMap(Y, X, tuple(X.index(raw[p]) for p in Y.labels))


def map_to_json(phi: BasepointMap) -> dict:
    Y, X = phi.domain, phi.codomain
    return {
        "domain": Y.name,
        "codomain": X.name,
        "map": {Y.labels[u]: X.labels[x] for u, x in enumerate(phi.images)},
    }


def verdict_to_json(verdict: Optional[IsometryVerdict], phi: BasepointMap) -> dict:
    lip = str(operator_norm(phi))
    if verdict is None:
        return {"isometric": None, "method": "theorem", "inconclusive": True, "lip_phi": lip}
    X, Y = phi.codomain, phi.domain
    cert = verdict.certificate
    if isinstance(cert, CoverWitness):
        body = {
            "kind": "cover",
            "pairs": [
                {
                    "pair": X.pair_labels(xy),
                    "combination": [
                        {"pair": None if uv is None else Y.pair_labels(uv), "weight": str(w)}
                        for uv, w in cert.cover[xy]
                    ],
                }
                for xy in sorted(cert.cover)
            ],
        }
    else:
        body = {
            "kind": "separating_function",
            "function": {
                "space": X.name,
                "values": {p: str(v) for p, v in zip(X.labels, cert.function.values)},
            },
            "composed_norm": str(cert.composed_norm),
        }
    return {
        "isometric": verdict.isometric,
        "method": verdict.method,
        "degenerate": verdict.degenerate,
        "lip_phi": lip,
        "certificate": body,
    }


def verdict_from_json(data: dict, phi: BasepointMap) -> IsometryVerdict:
    X, Y = phi.codomain, phi.domain
    try:
        body = data["certificate"]
        kind = body["kind"]
        if kind == "cover":
            cover = {}
            for item in body["pairs"]:
                xy = X.check_pair(tuple(X.index(p) for p in item["pair"]))
                combo = []
                for part in item["combination"]:
                    uv = part["pair"]
                    if uv is not None:
                        uv = Y.check_pair(tuple(Y.index(p) for p in uv))
                    combo.append((uv, parse_rational(part["weight"])))
                cover[xy] = tuple(combo)
            cert = CoverWitness(cover)
        elif kind == "separating_function":
            cert = SeparatingFunction(
                function_from_json(body["function"], X), parse_rational(body["composed_norm"])
            )
        else:
            raise InputError(f"unknown certificate kind {kind!r}")
        return IsometryVerdict(
            bool(data["isometric"]), str(data["method"]), cert, bool(data.get("degenerate", False))
        )
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed verdict JSON: {exc}") from None
