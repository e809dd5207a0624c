"""Command-line entry point (``hypbergman`` or ``python -m hypbergman``)."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from .bounds import GAMMA_VARIANTS, noncompact_breakdown, c_constant
from .fuchsian import POLICIES, EnumerationIncomplete, counting_N, injectivity_radius, load_group
from .geometry import UhpPoint
from .harness import (
    EXIT_CONFIG,
    EXIT_INCOMPLETE,
    ConfigError,
    SamplingError,
    VerificationConfig,
    emit_report,
    resolve_delta,
    run_trace_check,
    run_verification,
    sample_pairs,
)
from .kernel import kernel_estimates


def _point(text: str) -> UhpPoint:
    try:
        x, y = (float(t) for t in text.split(","))
        return UhpPoint(x, y)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'x,y' with y > 0, got {text!r} ({exc})")


def _int_list(text: str) -> list:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _group(name):
    try:
        return load_group(name)
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from None


def _print(obj):
    print(json.dumps(obj, indent=2, default=float))


def cmd_verify(a) -> int:
    cfg = VerificationConfig.from_json(a.config)
    if a.output:
        cfg.output = a.output
    if a.format:
        cfg.format = a.format
    report = run_verification(cfg)
    text = emit_report(report, cfg.format, cfg.output)
    if not cfg.output:
        sys.stdout.write(text)
    s = report.summary()
    print(f"cases={s['cases']} violations={s['violations']} uncertified={s['uncertified']} "
          f"min_slack={s['min_slack']} r_x={s['r_x']:.9g} ({s['r_method']}) "
          f"runtime={s['runtime']:.1f}s", file=sys.stderr)
    for err in report.errors:
        print(f"delta={err['delta']:.6g}: {err['error']}", file=sys.stderr)
    return report.exit_code


def cmd_kernel(a) -> int:
    G = _group(a.group)
    est = kernel_estimates(G, a.z, a.w, [a.k], a.tol)[a.k]
    _print({"norm": asdict(est[0]), "majorant": asdict(est[1])})
    return 0


def cmd_bound(a) -> int:
    if (a.y is None) != (a.v is None):
        raise ConfigError("give both --y and --v or neither")
    if a.y is None:
        b = c_constant(a.k, a.delta, a.r)
    else:
        b = noncompact_breakdown(a.k, a.delta, a.r, a.y, a.v, a.gamma_variant)
    out = asdict(b)
    out.pop("log_terms")
    _print(out)
    return 0


def cmd_count(a) -> int:
    G = _group(a.group)
    try:
        n = counting_N(G, a.z, a.w, a.rho)
    except EnumerationIncomplete as exc:
        print(f"{exc} (at least {exc.lower_bound})", file=sys.stderr)
        return EXIT_INCOMPLETE
    print(n)
    return 0


def cmd_injectivity(a) -> int:
    G = _group(a.group)
    est = injectivity_radius(G, a.policy, value=a.value, cutoff=a.cutoff)
    _print({"value": est.value, "method": est.method, "certified": est.certified,
            "cutoff": est.cutoff, "witnesses": [list(m.entries) for m in est.witnesses]})
    return 0


def cmd_trace(a) -> int:
    G = _group(a.group)
    rep = run_trace_check(G, a.k, a.mesh, a.cutoff)
    print("k,trace,expected,relative_error")
    for k, val, exp, rel in rep.table():
        print(f"{k},{val:.8f},{'' if exp is None else exp},{'' if rel is None else format(rel, '.3g')}")
    return 0


def cmd_pairs(a) -> int:
    G = _group(a.group)
    r = injectivity_radius(G).value
    delta = resolve_delta(a.delta, r)
    try:
        pairs = sample_pairs(G, delta, a.n, a.seed, a.cutoff)
    except SamplingError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INCOMPLETE
    print("zx,zy,wx,wy,qdist")
    for z, w, q in pairs:
        print(f"{z.x!r},{z.y!r},{w.x!r},{w.y!r},{q!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypbergman", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify", help="run a verification sweep from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--output")
    s.add_argument("--format", choices=("csv", "json"))
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("kernel", help="certified kernel norm and majorant at one pair")
    s.add_argument("--group", required=True)
    s.add_argument("--z", type=_point, required=True)
    s.add_argument("--w", type=_point, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--tol", type=float, default=1e-6)
    s.set_defaults(func=cmd_kernel)

    s = sub.add_parser("bound", help="closed-form bound with its term breakdown")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--r", type=float, required=True)
    s.add_argument("--y", type=float)
    s.add_argument("--v", type=float)
    s.add_argument("--gamma-variant", choices=GAMMA_VARIANTS, default="derived")
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("count", help="orbit count N(z, w; rho)")
    s.add_argument("--group", required=True)
    s.add_argument("--z", type=_point, required=True)
    s.add_argument("--w", type=_point, required=True)
    s.add_argument("--rho", type=float, required=True)
    s.set_defaults(func=cmd_count)

    s = sub.add_parser("injectivity", help="injectivity radius estimate")
    s.add_argument("--group", required=True)
    s.add_argument("--cutoff", type=float)
    s.add_argument("--policy", choices=POLICIES, default="auto")
    s.add_argument("--value", type=float)
    s.set_defaults(func=cmd_injectivity)

    s = sub.add_parser("trace", help="integrated diagonal kernel against dim S_2k")
    s.add_argument("--group", required=True)
    s.add_argument("--k", type=_int_list, required=True, help="weight or comma-separated weights")
    s.add_argument("--mesh", type=float, default=0.05)
    s.add_argument("--cutoff", type=float)
    s.set_defaults(func=cmd_trace)

    s = sub.add_parser("pairs", help="sample pairs at quotient distance >= delta")
    s.add_argument("--group", required=True)
    s.add_argument("--delta", required=True, help="number or expression such as r, r+1, 2r")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--cutoff", type=float)
    s.set_defaults(func=cmd_pairs)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else 0
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
