"""Seeded instance generation, corpus-wide property runs, counterexample search.

Every instance is generated from its own ``random.Random`` seeded with
``"<seed>/<index>"``, so instance ``i`` does not depend on how many
instances came before it or on worker scheduling.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

from . import compop, freespace, lipfunc, metric
from .errors import GenerationError, InputError
from .metric import PointedMetricSpace

SPACE_SCHEMES = ("euclidean-grid", "random-metric")
MAP_SCHEMES = (
    "random-nonexpansive",
    "random-surjective-nonexpansive",
    "dilation",
    "identity-plus-noise",
)
GRID_SIZE = 6
GRID_DIGITS = 4
MAX_TRIES = 200

COMPOP_PROPERTIES = (
    "m_implies_isometry",
    "peak_codomain_equivalence",
    "isometry_needs_surjection",
    "norm_matches_nonexpansive",
    "dilation_surjective_isometry",
    "certificates_verify",
    "theorem_route_agrees",
)
FREESPACE_PROPERTIES = (
    "extreme_sign_symmetry",
    "exposed_sign_symmetry",
    "exposed_implies_extreme",
    "concave_iff_all_extreme",
    "peak_iff_all_exposed",
    "extreme_matches_triangle_scan",
    "peak_certificates_verify",
)
PROPERTIES = COMPOP_PROPERTIES + FREESPACE_PROPERTIES


@dataclass(frozen=True)
class GenProfile:
    seed: int = 0
    n_min: int = 2
    n_max: int = 5
    scheme: str = "random-metric"  # or "euclidean-grid", "mixed"
    holder: Optional[tuple] = None  # (alpha, digits) snowflake applied to the base scheme
    map_scheme: str = "random-nonexpansive"  # see MAP_SCHEMES, or "mixed"
    k: Fraction = Fraction(1)  # dilation factor

    def check(self) -> "GenProfile":
        if not 1 <= self.n_min <= self.n_max:
            raise GenerationError(f"need 1 <= n_min <= n_max, got {self.n_min}, {self.n_max}")
        if self.scheme not in SPACE_SCHEMES + ("mixed",):
            raise GenerationError(f"unknown space scheme {self.scheme!r}")
        if self.map_scheme not in MAP_SCHEMES + ("mixed",):
            raise GenerationError(f"unknown map scheme {self.map_scheme!r}")
        if Fraction(self.k) <= 0:
            raise GenerationError(f"dilation factor must be positive, got {self.k}")
        if self.holder is not None:
            alpha, digits = self.holder
            if not 0 < Fraction(alpha) < 1 or int(digits) < 1:
                raise GenerationError(f"bad Holder parameters {self.holder!r}")
        return self

    def to_json(self) -> dict:
        out = asdict(self)
        out["k"] = str(Fraction(self.k))
        if self.holder is not None:
            out["holder"] = [str(Fraction(self.holder[0])), int(self.holder[1])]
        return out


@dataclass(frozen=True)
class Instance:
    index: int
    domain: PointedMetricSpace
    codomain: PointedMetricSpace
    phi: compop.BasepointMap
    scheme: str
    map_scheme: str
    rejected: int = 0


def _labels(prefix: str, n: int) -> list:
    return ["e"] + [f"{prefix}{i}" for i in range(1, n)]


def _random_metric(rng: random.Random, n: int) -> list:
    w = [[Fraction(0)] * n for _ in range(n)]
    for i, j in combinations(range(n), 2):
        w[i][j] = w[j][i] = Fraction(rng.randint(1, 8), rng.choice((1, 2)))
    return metric.shortest_path_closure(w)


def _euclidean(rng: random.Random, n: int) -> list:
    cells = [(a, b) for a in range(GRID_SIZE + 1) for b in range(GRID_SIZE + 1)]
    pts = rng.sample(cells, n)
    d = [[Fraction(0)] * n for _ in range(n)]
    for i, j in combinations(range(n), 2):
        sq = (pts[i][0] - pts[j][0]) ** 2 + (pts[i][1] - pts[j][1]) ** 2
        d[i][j] = d[j][i] = metric.round_power(Fraction(sq), Fraction(1, 2), GRID_DIGITS)
    return d


def _codomain(rng, profile, n, name):
    """Random space; returns (space, scheme used, rejected attempts)."""
    scheme = profile.scheme
    if scheme == "mixed":
        scheme = rng.choice(SPACE_SCHEMES)
    labels = _labels("x", n)
    for attempt in range(MAX_TRIES):
        dist = _euclidean(rng, n) if scheme == "euclidean-grid" else _random_metric(rng, n)
        space = PointedMetricSpace(labels, 0, dist, name=name)
        if not metric.validate(space).ok:
            continue
        if profile.holder is not None:
            alpha, digits = profile.holder
            try:
                space = metric.holder_transform(space, Fraction(alpha), int(digits))
            except InputError:
                continue
            space = PointedMetricSpace(space.labels, 0, space.dist, name=name)
            scheme = f"{scheme}+holder"
        return space, scheme, attempt
    raise GenerationError(f"no valid {scheme} space after {MAX_TRIES} attempts")


_NOISE_FACTORS = (Fraction(1, 2), Fraction(3, 4), Fraction(5, 4), Fraction(3, 2), Fraction(2))


def _lifted_domain(rng, X, images, name):
    """Metric on the domain dominating the pulled-back codomain metric.

    Shortest paths of weights >= d_X(phi u, phi v) stay >= it, because the
    pulled-back distance is itself a pseudometric; so phi is nonexpansive.
    """
    m = len(images)
    w = [[Fraction(0)] * m for _ in range(m)]
    for u, v in combinations(range(m), 2):
        base = X.dist[images[u]][images[v]]
        noise = Fraction(0) if base and rng.random() < 0.75 else Fraction(rng.randint(1, 4), 2)
        w[u][v] = w[v][u] = base + noise
    return PointedMetricSpace(_labels("y", m), 0, metric.shortest_path_closure(w), name=name)


def _map(rng, profile, X, name):
    scheme = profile.map_scheme
    if scheme == "mixed":
        scheme = rng.choice(MAP_SCHEMES)
    n = len(X)
    if scheme == "random-nonexpansive":
        m = rng.randint(profile.n_min, profile.n_max)
        images = [0] + [rng.randrange(n) for _ in range(m - 1)]
        Y = _lifted_domain(rng, X, images, name)
    elif scheme == "random-surjective-nonexpansive":
        m = rng.randint(n, max(n, profile.n_max))
        rest = list(range(1, n))
        rng.shuffle(rest)
        images = [0] + rest + [rng.randrange(n) for _ in range(m - n)]
        Y = _lifted_domain(rng, X, images, name)
    elif scheme == "dilation":
        k = Fraction(profile.k)
        rest = list(range(1, n))
        rng.shuffle(rest)
        images = [0] + rest
        dist = [[X.dist[a][b] / k for b in images] for a in images]
        Y = PointedMetricSpace(_labels("y", n), 0, dist, name=name)
    else:  # identity-plus-noise
        w = [list(row) for row in X.dist]
        for u, v in combinations(range(n), 2):
            if rng.random() < 0.5:
                w[u][v] = w[v][u] = w[u][v] * rng.choice(_NOISE_FACTORS)
        images = list(range(n))
        Y = PointedMetricSpace(_labels("y", n), 0, metric.shortest_path_closure(w), name=name)
    return Y, compop.BasepointMap(Y, X, tuple(images)), scheme


def generate_one(profile: GenProfile, index: int) -> Instance:
    profile.check()
    rng = random.Random(f"{profile.seed}/{index}")
    n = rng.randint(profile.n_min, profile.n_max)
    X, scheme, rejected = _codomain(rng, profile, n, f"X{index}")
    Y, phi, map_scheme = _map(rng, profile, X, f"Y{index}")
    if not metric.validate(Y).ok:
        raise GenerationError(f"instance {index}: generated domain is not a metric")
    return Instance(index, Y, X, phi, scheme, map_scheme, rejected)


def generate(profile: GenProfile, count: int) -> list:
    """``count`` instances ``(domain, codomain, map)``, deterministic per seed."""
    profile.check()
    return [generate_one(profile, i) for i in range(count)]


# -- evaluation ------------------------------------------------------------


@dataclass
class Evaluation:
    results: dict  # property -> True / False / None (not applicable)
    oracle: compop.IsometryVerdict
    theorem: Optional[compop.IsometryVerdict]
    peak: lipfunc.PeakReport
    nonexpansive: bool
    property_m: bool
    peak_certificates: int

    @property
    def failed(self) -> list:
        return [p for p in PROPERTIES if self.results.get(p) is False]


def _implies(a, b):
    return (not a) or b


def evaluate(phi: compop.BasepointMap) -> Evaluation:
    """Run every compop and freespace property on one map and its codomain."""
    X = phi.codomain
    r = {}
    ne = compop.check_nonexpansive(phi).holds
    pm = compop.check_property_m(phi).holds
    peak = lipfunc.has_peak_property(X)
    oracle = compop.isometry_oracle(phi)
    theorem = compop.isometry_via_theorem(phi, peak=peak)
    surj = compop.is_surjective(phi)

    r["m_implies_isometry"] = _implies(ne and pm, oracle.isometric)
    r["peak_codomain_equivalence"] = (oracle.isometric == (ne and pm)) if peak.holds else None
    r["isometry_needs_surjection"] = _implies(oracle.isometric, ne and surj)
    r["norm_matches_nonexpansive"] = (compop.operator_norm(phi) <= 1) == ne
    if len(phi.domain) >= 2:
        dil = compop.detect_dilation(phi)
        applies = dil.k == 1 and surj
        r["dilation_surjective_isometry"] = oracle.isometric if applies else None
    else:
        r["dilation_surjective_isometry"] = None
    ok = compop.verify_certificate(oracle, phi)
    if theorem is not None:
        ok = ok and compop.verify_certificate(theorem, phi)
    r["certificates_verify"] = ok
    r["theorem_route_agrees"] = None if theorem is None else theorem.isometric == oracle.isometric

    certs = list(peak.certificates)
    if len(X) >= 2:
        pairs = X.pairs()
        ext = {p: freespace.is_extreme_molecule(X, p).extreme for p in pairs}
        exp = {p: freespace.is_exposed_molecule(X, p).exposed for p in pairs}
        r["extreme_sign_symmetry"] = all(ext[(a, b)] == ext[(b, a)] for a, b in pairs)
        r["exposed_sign_symmetry"] = all(exp[(a, b)] == exp[(b, a)] for a, b in pairs)
        r["exposed_implies_extreme"] = all(_implies(exp[p], ext[p]) for p in pairs)
        r["concave_iff_all_extreme"] = metric.check_concave(X).concave == all(ext.values())
        r["peak_iff_all_exposed"] = peak.holds == all(exp.values())
        r["extreme_matches_triangle_scan"] = all(
            ext[p] == freespace.triangle_scan_extreme(X, p) for p in pairs
        )
    else:
        for name in FREESPACE_PROPERTIES[:-1]:
            r[name] = None
    r["peak_certificates_verify"] = (
        all(lipfunc.verify_peak_certificate(c) for c in certs) if certs else None
    )
    return Evaluation(r, oracle, theorem, peak, ne, pm, len(certs))


def bundle(inst_phi: compop.BasepointMap, ev: Evaluation, index: int) -> dict:
    """Self-contained JSON record; replays through the CLI formats."""
    phi = inst_phi
    return {
        "index": index,
        "failed": ev.failed,
        "domain": metric.space_to_json(phi.domain),
        "codomain": metric.space_to_json(phi.codomain),
        "map": compop.map_to_json(phi),
        "oracle": compop.verdict_to_json(ev.oracle, phi),
        "theorem": compop.verdict_to_json(ev.theorem, phi),
        "peak_property": {
            "holds": ev.peak.holds,
            "witness": None
            if ev.peak.witness is None
            else phi.codomain.pair_labels(ev.peak.witness),
        },
        "nonexpansive": ev.nonexpansive,
        "property_m": ev.property_m,
    }


def load_bundle(data: dict) -> compop.BasepointMap:
    Y = metric.space_from_json(data["domain"])
    X = metric.space_from_json(data["codomain"])
    return compop.map_from_json(data["map"], {Y.name: Y, X.name: X})


def replay_bundle(data: dict) -> dict:
    """Re-derive a bundle's findings from its JSON alone.

    Returns the freshly failing properties and whether the stored
    certificates still verify against the stored map.
    """
    phi = load_bundle(data)
    ev = evaluate(phi)
    stored = []
    for key in ("oracle", "theorem"):
        if data.get(key) and not data[key].get("inconclusive"):
            verdict = compop.verdict_from_json(data[key], phi)
            stored.append(compop.verify_certificate(verdict, phi))
    return {"failed": ev.failed, "certificates_verify": all(stored)}


# -- corpus runs -------------------------------------------------------------


def _run_one(args):
    profile, index = args
    inst = generate_one(profile, index)
    ev = evaluate(inst.phi)
    return inst, ev


def _map_instances(profile, indices, workers):
    jobs = [(profile, i) for i in indices]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            yield from pool.map(_run_one, jobs, chunksize=8)
    else:
        yield from map(_run_one, jobs)


@dataclass
class RunReport:
    profile: dict
    instances: int = 0
    rejected_spaces: int = 0
    counts: dict = field(default_factory=dict)
    tallies: dict = field(default_factory=dict)
    anomalies: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "profile": self.profile,
            "instances": self.instances,
            "rejected_spaces": self.rejected_spaces,
            "counts": dict(sorted(self.counts.items())),
            "properties": {p: self.tallies[p] for p in PROPERTIES},
            "anomalies": self.anomalies,
        }

    @property
    def failures(self) -> int:
        return sum(t["fail"] for t in self.tallies.values())


_COUNT_KEYS = (
    "peak_codomains",
    "nonexpansive_and_m",
    "oracle_isometric",
    "theorem_inconclusive",
    "peak_certificates",
    "certificates_checked",
)


def run_corpus(profile: GenProfile, count: int, workers: int = 1) -> RunReport:
    """Evaluate every property on ``count`` generated instances.

    Anomalies are kept as full bundles, in instance order.
    """
    profile.check()
    report = RunReport(profile.to_json())
    report.tallies = {p: {"pass": 0, "fail": 0, "skipped": 0} for p in PROPERTIES}
    report.counts = {k: 0 for k in _COUNT_KEYS}
    for inst, ev in _map_instances(profile, range(count), workers):
        _absorb(report, inst, ev)
    return report


def _absorb(report: RunReport, inst: Instance, ev: Evaluation) -> None:
    report.instances += 1
    report.rejected_spaces += inst.rejected
    c = report.counts
    c["peak_codomains"] += ev.peak.holds
    c["nonexpansive_and_m"] += ev.nonexpansive and ev.property_m
    c["oracle_isometric"] += ev.oracle.isometric
    c["theorem_inconclusive"] += ev.theorem is None
    c["peak_certificates"] += ev.peak_certificates
    c["certificates_checked"] += 1 + (ev.theorem is not None)
    for p in PROPERTIES:
        v = ev.results.get(p)
        report.tallies[p]["skipped" if v is None else ("pass" if v else "fail")] += 1
    if ev.failed:
        report.anomalies.append(bundle(inst.phi, ev, inst.index))


# -- open-question search ----------------------------------------------------


@dataclass
class SearchResult:
    found: bool
    examined: int
    inconclusive_region: int
    witness: Optional[dict] = None

    def to_json(self) -> dict:
        return {
            "found": self.found,
            "examined": self.examined,
            "inconclusive_region": self.inconclusive_region,
            "witness": self.witness,
        }


def search_open_question(profile: GenProfile, budget: int) -> SearchResult:
    """Look for an isometric ``C_phi`` whose map fails property (M).

    Only codomains without the peak property can host one.  Examines at
    most ``budget`` instances and stops at the first witness.
    """
    profile.check()
    inconclusive = 0
    for index in range(budget):
        inst = generate_one(profile, index)
        phi = inst.phi
        if len(phi.codomain) < 2:
            continue
        ne = compop.check_nonexpansive(phi).holds
        pm = compop.check_property_m(phi)
        if ne and pm.holds:
            continue
        peak = lipfunc.has_peak_property(phi.codomain)
        if peak.holds:
            continue
        inconclusive += 1
        if not ne:
            continue
        oracle = compop.isometry_oracle(phi)
        if oracle.isometric:
            ev = evaluate(phi)
            witness = bundle(phi, ev, index)
            witness["unmatched"] = [phi.codomain.pair_labels(p) for p in pm.unmatched]
            return SearchResult(True, index + 1, inconclusive, witness)
    return SearchResult(False, budget, inconclusive)
