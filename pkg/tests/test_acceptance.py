"""Acceptance criteria 1-9, each printing one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s`` or ``python3
tests/test_acceptance.py``; the lines are printed even under capture.
All comparisons are exact.
"""

import json
import time
from fractions import Fraction
from itertools import combinations

import pytest

from lipiso import compop, freespace, lipfunc, metric
from lipiso.cli import main
from lipiso.harness import GenProfile, generate, run_corpus

from conftest import make_space

F = Fraction
MAP_SCHEMES = ("random-nonexpansive", "random-surjective-nonexpansive", "dilation",
               "identity-plus-noise", "mixed")


def mixed_profiles():
    # 5 x 100 instances, every map scheme, both space schemes, n <= 6
    return [GenProfile(seed=100 + i, n_min=1, n_max=6, scheme="mixed", map_scheme=m)
            for i, m in enumerate(MAP_SCHEMES)]


def peak_profiles():
    # snowflaked codomains are concave, hence have the peak property
    out = []
    for i, alpha in enumerate((F(1, 2), F(2, 3), F(3, 4), F(4, 5))):
        for j, m in enumerate(("random-surjective-nonexpansive", "mixed")):
            out.append(GenProfile(seed=200 + 2 * i + j, n_min=2, n_max=5, scheme="mixed",
                                  holder=(alpha, 6), map_scheme=m))
    return out


def merge(reports):
    tallies, counts = {}, {}
    for r in reports:
        for p, t in r.tallies.items():
            acc = tallies.setdefault(p, {"pass": 0, "fail": 0, "skipped": 0})
            for k in acc:
                acc[k] += t[k]
        for k, v in r.counts.items():
            counts[k] = counts.get(k, 0) + v
    return tallies, counts, sum(r.instances for r in reports)


@pytest.fixture(scope="module")
def mixed_corpus():
    start = time.perf_counter()
    reports = [run_corpus(p, 100) for p in mixed_profiles()]
    return merge(reports) + (time.perf_counter() - start,)


@pytest.fixture(scope="module")
def peak_corpus():
    return merge([run_corpus(p, 65) for p in peak_profiles()])


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def test_criterion_1_sufficiency(capsys, mixed_corpus):
    tallies, counts, n, seconds = mixed_corpus
    t = tallies["m_implies_isometry"]
    ok = n >= 500 and t["fail"] == 0 and counts["nonexpansive_and_m"] > 0 and seconds < 120
    report(capsys, 1, ok, f"{n} maps, {counts['nonexpansive_and_m']} with nonexpansive and (M), "
                          f"{t['fail']} not oracle-isometric, {seconds:.1f}s")


def test_criterion_2_equivalence_on_peak_codomains(capsys, peak_corpus):
    tallies, counts, n = peak_corpus
    t = tallies["peak_codomain_equivalence"]
    checked = t["pass"] + t["fail"]
    ok = checked >= 500 and t["fail"] == 0 and 0 < counts["oracle_isometric"] < checked
    report(capsys, 2, ok, f"{checked} peak-property codomains, {t['fail']} disagreements, "
                          f"{counts['oracle_isometric']} isometric")


def test_criterion_3_isometries_are_nonexpansive_surjections(capsys, mixed_corpus):
    tallies, counts, n, _ = mixed_corpus
    t = tallies["isometry_needs_surjection"]
    ok = t["fail"] == 0 and counts["oracle_isometric"] > 0
    report(capsys, 3, ok, f"{counts['oracle_isometric']} oracle-isometric maps, "
                          f"{t['fail']} not nonexpansive and surjective")


def test_criterion_4_dilation_example(capsys):
    failures = []
    Y = make_space(["e", "u"], [[0, 1], [1, 0]], "Y")
    for k in (F(1, 4), F(1, 2), F(3, 4), F(1)):
        X = make_space(["e", "x"], [[0, k], [k, 0]], "X")
        phi = compop.BasepointMap(Y, X, (0, 1))
        verdict = compop.isometry_oracle(phi)
        if compop.detect_dilation(phi).k != k:
            failures.append(f"k={k}: wrong dilation factor")
        if verdict.isometric != (k == 1):
            failures.append(f"k={k}: isometric={verdict.isometric}")
        if not compop.verify_certificate(verdict, phi):
            failures.append(f"k={k}: certificate refuted")
        if k != 1 and verdict.certificate.composed_norm != k:
            failures.append(f"k={k}: composed norm {verdict.certificate.composed_norm}")
    report(capsys, 4, not failures, "; ".join(failures) or "k in {1/4, 1/2, 3/4, 1}")


def test_criterion_5_extremal_structure(capsys, mixed_corpus, peak_corpus):
    names = ("concave_iff_all_extreme", "peak_iff_all_exposed", "extreme_matches_triangle_scan")
    parts, ok = [], True
    for name in names:
        checked = fails = 0
        for tallies in (mixed_corpus[0], peak_corpus[0]):
            checked += tallies[name]["pass"] + tallies[name]["fail"]
            fails += tallies[name]["fail"]
        ok = ok and checked >= 200 and fails == 0
        parts.append(f"{name} {checked - fails}/{checked}")
    report(capsys, 5, ok, ", ".join(parts))


def _enumerated_peak_check(cert):
    f, (x, y), margin = cert.function, cert.pair, cert.margin
    d = f.space.dist
    if margin <= 0 or (f(x) - f(y)) / d[x][y] != 1:
        return False
    for a, b in combinations(f.space.points, 2):
        if {a, b} != {x, y} and abs(f(a) - f(b)) / d[a][b] > 1 - margin:
            return False
    return True


def test_criterion_6_peak_certificates(capsys, mixed_corpus, peak_corpus):
    fails = mixed_corpus[0]["peak_certificates_verify"]["fail"]
    fails += peak_corpus[0]["peak_certificates_verify"]["fail"]
    emitted = mixed_corpus[1]["peak_certificates"] + peak_corpus[1]["peak_certificates"]
    # independent enumeration over a fresh sample of codomains
    enumerated = bad = 0
    for inst in generate(peak_profiles()[0], 60) + generate(mixed_profiles()[0], 60):
        for cert in lipfunc.has_peak_property(inst.codomain).certificates:
            enumerated += 1
            bad += not _enumerated_peak_check(cert)
    ok = fails == 0 and bad == 0 and emitted > 0 and enumerated > 0
    report(capsys, 6, ok, f"{emitted} corpus certificates, {fails} refuted; "
                          f"{enumerated} re-enumerated, {bad} refuted")


def test_criterion_7_collinear_witness(capsys, collinear):
    peak = lipfunc.has_peak_property(collinear)
    ext = freespace.is_extreme_molecule(collinear, (2, 0))
    expected = (((1, 0), F(1, 2)), ((2, 1), F(1, 2)))
    ok = (not peak.holds and peak.witness == (2, 0)
          and not ext.extreme and ext.combination == expected)
    report(capsys, 7, ok, f"peak witness {peak.witness}, combination {ext.combination}")


def _cli(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_criterion_8_certificate_closure(capsys, tmp_path, mixed_corpus, peak_corpus):
    fails = sum(c[0]["certificates_verify"]["fail"] for c in (mixed_corpus, peak_corpus))
    disagree = sum(c[0]["theorem_route_agrees"]["fail"] for c in (mixed_corpus, peak_corpus))
    checked = mixed_corpus[1]["certificates_checked"] + peak_corpus[1]["certificates_checked"]
    exit3 = runs = unconfirmed = 0
    instances = generate(peak_profiles()[1], 25) + generate(mixed_profiles()[4], 25)
    for inst in instances:
        Y, X = inst.domain, inst.codomain
        ypath, xpath = tmp_path / "Y.json", tmp_path / "X.json"
        ypath.write_text(json.dumps(metric.space_to_json(Y)))
        xpath.write_text(json.dumps(metric.space_to_json(X)))
        mpath = tmp_path / "map.json"
        mpath.write_text(json.dumps(compop.map_to_json(inst.phi)))
        vpath = tmp_path / "verdict.json"
        args = ["--map", str(mpath), "--spaces", str(ypath), str(xpath)]
        code, _ = _cli(capsys, "isometry", *args, "--method", "both", "-o", str(vpath))
        runs += 1
        exit3 += code == 3
        code, out = _cli(capsys, "isometry", *args, "--verify", str(vpath))
        unconfirmed += json.loads(out) != {"confirmed": True}
    ok = fails == 0 and disagree == 0 and exit3 == 0 and unconfirmed == 0
    report(capsys, 8, ok, f"{checked} corpus certificates, {fails} refuted, {disagree} route "
                          f"disagreements; {runs} CLI runs, exit 3 count {exit3}, "
                          f"{unconfirmed} unconfirmed round trips")


def test_criterion_9_reproducibility(capsys):
    runs = [
        ("corpus", "--seed", "7", "--count", "40", "--scheme", "mixed", "--map-scheme", "mixed",
         "--n-max", "6"),
        ("corpus", "--seed", "8", "--count", "20", "--holder-alpha", "2/3"),
        ("search", "--seed", "0", "--n-min", "3", "--budget", "150",
         "--map-scheme", "random-surjective-nonexpansive"),
    ]
    same = 0
    for argv in runs:
        first = _cli(capsys, *argv)
        second = _cli(capsys, *argv)
        same += first == second and first[0] == 0
    report(capsys, 9, same == len(runs), f"{same}/{len(runs)} reruns byte-identical")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
