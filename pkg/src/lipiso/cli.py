"""Command-line entry point.

Exit codes: 0 ran to completion (negative verdicts included), 2 invalid
input, 3 internal inconsistency such as disagreeing decision routes.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import compop, freespace, harness, lipfunc, metric
from .errors import InconsistencyError, InputError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INCONSISTENT = 3


def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def _space(path, check=True):
    space = metric.space_from_json(_read_json(path))
    return metric.require_valid(space) if check else space


def _map(args):
    spaces = {}
    for path in args.spaces:
        s = _space(path)
        spaces[s.name] = s
    return compop.map_from_json(_read_json(args.map), spaces)


def _pair(space, labels):
    return space.check_pair(tuple(space.index(p) for p in labels))


def _fraction(text):
    try:
        return metric.parse_rational(text)
    except InputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# -- subcommands -------------------------------------------------------------


def cmd_validate(args):
    space = _space(args.space, check=False)
    report = metric.validate(space)
    out = {"space": space.name, "valid": report.ok}
    if not report.ok:
        out["violation"] = report.problem
        out["points"] = list(report.points)
        return EXIT_INPUT, out, f"space {space.name!r}: {report.message}"
    return EXIT_OK, out, None


def cmd_concave(args):
    space = _space(args.space)
    rep = metric.check_uniformly_concave(space)
    return EXIT_OK, {
        "space": space.name,
        "concave": rep.concave,
        "uniformly_concave": rep.concave,
        "witness": None if rep.witness is None else [space.labels[i] for i in rep.witness],
        "min_slack": None if rep.min_slack is None or not rep.concave else str(rep.min_slack),
    }, None


def cmd_peak(args):
    space = _space(args.space)
    if args.verify:
        data = _read_json(args.verify)
        if "certificates" in data:
            raw = data["certificates"]
        elif "certificate" in data:
            raw = [data["certificate"]] if data["certificate"] else []
        else:
            raw = [data]
        certs = [lipfunc.certificate_from_json(c, space) for c in raw]
        ok = bool(certs) and all(lipfunc.verify_peak_certificate(c) for c in certs)
        return EXIT_OK, {"confirmed": ok, "checked": len(certs)}, None
    if args.pair:
        pair = _pair(space, args.pair)
        cert = lipfunc.construct_peaking(space, pair)
        return EXIT_OK, {
            "space": space.name,
            "pair": space.pair_labels(pair),
            "peaks": cert is not None,
            "certificate": None if cert is None else lipfunc.certificate_to_json(cert),
        }, None
    rep = lipfunc.has_peak_property(space)
    return EXIT_OK, {
        "space": space.name,
        "peak_property": rep.holds,
        "witness": None if rep.witness is None else space.pair_labels(rep.witness),
        "certificates": [lipfunc.certificate_to_json(c) for c in rep.certificates],
    }, None


def _verify_molecule_row(space, row):
    pair = _pair(space, row["pair"])
    target = freespace.molecule(space, pair).vector.coords
    ok = True
    if row.get("combination") is not None:
        gens = [freespace.molecule(space, _pair(space, c["pair"])).vector.coords
                for c in row["combination"]]
        weights = [metric.parse_rational(c["weight"]) for c in row["combination"]]
        ok = ok and not row["extreme"] and all(g != target for g in gens)
        ok = ok and freespace.exactlp.check_weights(target, gens, weights)
    if row.get("functional") is not None:
        labels = [space.labels[q] for q in space.points if q != space.basepoint]
        g = [metric.parse_rational(row["functional"][p]) for p in labels]
        margin = metric.parse_rational(row["margin"])

        def dot(v):
            return sum((a * b for a, b in zip(g, v)), Fraction(0))

        ok = ok and margin > 0 and dot(target) == 1
        for m in freespace.all_molecules(space):
            if m.pair != pair and dot(m.vector.coords) > 1 - margin:
                ok = False
    return ok


def cmd_molecules(args):
    space = _space(args.space)
    if args.verify:
        data = _read_json(args.verify)
        rows = data["pairs"] if isinstance(data, dict) else data
        return EXIT_OK, {"confirmed": all(_verify_molecule_row(space, r) for r in rows)}, None
    if args.pair:
        pair = _pair(space, args.pair)
        rows = [(pair, freespace.is_extreme_molecule(space, pair),
                 freespace.is_exposed_molecule(space, pair))]
    else:
        rows = freespace.classify(space)
    return EXIT_OK, {
        "space": space.name,
        "pairs": freespace.classification_to_json(space, rows),
    }, None


def cmd_property_m(args):
    phi = _map(args)
    rep = compop.check_property_m(phi)
    X, Y = phi.codomain, phi.domain
    return EXIT_OK, {
        "holds": rep.holds,
        "matches": [
            {"pair": X.pair_labels(xy), "witness": None if uv is None else Y.pair_labels(uv)}
            for xy, uv in rep.matches.items()
        ],
        "nonexpansive": compop.check_nonexpansive(phi).holds,
        "lip_phi": str(compop.operator_norm(phi)),
    }, None


def cmd_dilation(args):
    phi = _map(args)
    rep = compop.detect_dilation(phi)
    return EXIT_OK, {
        "dilation": rep.is_dilation,
        "k": None if rep.k is None else str(rep.k),
        "witness": [phi.domain.pair_labels(p) for p in rep.witness],
    }, None


def _verify_verdicts(phi, data):
    verdicts = [data[k] for k in ("oracle", "theorem") if k in data] if "routes" in data else [data]
    results = []
    for v in verdicts:
        if v.get("inconclusive"):
            continue
        results.append(compop.verify_certificate(compop.verdict_from_json(v, phi), phi))
    return bool(results) and all(results)


def cmd_isometry(args):
    phi = _map(args)
    if args.verify:
        return EXIT_OK, {"confirmed": _verify_verdicts(phi, _read_json(args.verify))}, None
    if args.method == "oracle":
        return EXIT_OK, compop.verdict_to_json(compop.isometry_oracle(phi), phi), None
    if args.method == "theorem":
        return EXIT_OK, compop.verdict_to_json(compop.isometry_via_theorem(phi), phi), None
    oracle = compop.isometry_oracle(phi)
    theorem = compop.isometry_via_theorem(phi)
    agree = theorem is None or theorem.isometric == oracle.isometric
    out = {
        "isometric": oracle.isometric,
        "method": "both",
        "routes": ["oracle", "theorem"],
        "routes_agree": agree,
        "degenerate": oracle.degenerate,
        "lip_phi": str(compop.operator_norm(phi)),
        "oracle": compop.verdict_to_json(oracle, phi),
        "theorem": compop.verdict_to_json(theorem, phi),
    }
    if not agree:
        return EXIT_INCONSISTENT, out, "oracle and theorem routes disagree"
    return EXIT_OK, out, None


def cmd_holder(args):
    space = _space(args.space)
    return EXIT_OK, metric.space_to_json(metric.holder_transform(space, args.alpha, args.digits)), None


def _profile(args):
    holder = None
    if args.holder_alpha is not None:
        holder = (args.holder_alpha, args.holder_digits)
    return harness.GenProfile(
        seed=args.seed,
        n_min=args.n_min,
        n_max=args.n_max,
        scheme=args.scheme,
        holder=holder,
        map_scheme=args.map_scheme,
        k=args.k,
    ).check()


def cmd_corpus(args):
    report = harness.run_corpus(_profile(args), args.count, workers=args.workers)
    return EXIT_OK, report.to_json(), None


def cmd_search(args):
    result = harness.search_open_question(_profile(args), args.budget)
    return EXIT_OK, result.to_json(), None


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lipiso",
        description="Exact decisions for Lipschitz spaces of finite pointed metric spaces.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="also write the JSON result to this path")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    def with_space(p):
        p.add_argument("--space", required=True, help="space JSON file")
        return p

    def with_map(p):
        p.add_argument("--map", required=True, help="map JSON file")
        p.add_argument("--spaces", nargs="+", required=True, help="domain and codomain JSON files")
        return p

    with_space(add("validate", help="check the metric axioms")).set_defaults(
        func=cmd_validate
    )
    with_space(add("concave", help="strict triangle inequality")).set_defaults(
        func=cmd_concave
    )

    p = with_space(add("peak", help="peaking functions and the peak property"))
    group = p.add_mutually_exclusive_group()
    group.add_argument("--pair", nargs=2, metavar=("X", "Y"))
    group.add_argument("--all", action="store_true", help="test every pair (default)")
    group.add_argument("--verify", metavar="CERT", help="re-check a peak certificate")
    p.set_defaults(func=cmd_peak)

    p = with_space(add("molecules", help="extreme/exposed molecule table"))
    group = p.add_mutually_exclusive_group()
    group.add_argument("--pair", nargs=2, metavar=("X", "Y"))
    group.add_argument("--verify", metavar="TABLE", help="re-check a molecules output")
    p.set_defaults(func=cmd_molecules)

    with_map(add("property-m", help="exact preimage pairs")).set_defaults(
        func=cmd_property_m
    )
    with_map(add("dilation", help="constant distance ratio")).set_defaults(
        func=cmd_dilation
    )

    p = with_map(add("isometry", help="is C_phi an isometry?"))
    p.add_argument("--method", choices=("oracle", "theorem", "both"), default="both")
    p.add_argument("--verify", metavar="VERDICT", help="re-check a verdict's certificate")
    p.set_defaults(func=cmd_isometry)

    p = with_space(add("holder", help="snowflake transform d**alpha"))
    p.add_argument("--alpha", type=_fraction, required=True)
    p.add_argument("--digits", type=int, default=6)
    p.set_defaults(func=cmd_holder)

    for name, func, help_text in (
        ("corpus", cmd_corpus, "run every property over generated instances"),
        ("search", cmd_search, "look for isometries without property (M)"),
    ):
        p = add(name, help=help_text)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--n-min", type=int, default=2)
        p.add_argument("--n-max", type=int, default=5)
        p.add_argument("--scheme", default="random-metric",
                       choices=harness.SPACE_SCHEMES + ("mixed",))
        p.add_argument("--map-scheme", default="random-nonexpansive",
                       choices=harness.MAP_SCHEMES + ("mixed",))
        p.add_argument("--k", type=_fraction, default=Fraction(1), help="dilation factor")
        p.add_argument("--holder-alpha", type=_fraction)
        p.add_argument("--holder-digits", type=int, default=6)
        if name == "corpus":
            p.add_argument("--count", type=int, default=100)
            p.add_argument("--workers", type=int, default=1)
        else:
            p.add_argument("--budget", type=int, default=1000)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, payload, message = args.func(args)
    except InconsistencyError as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except InputError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    if message:
        print(message, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
