"""Command-line interface.

Subcommands: evolve, test, verify, distance, period, genfar, experiment.
Exit codes: 0 = success / Accept, 1 = Reject, 2 = usage or runtime error.
"""
from __future__ import annotations

import argparse
import json
import random
import sys

from . import bruteforce, lab, verifier
from .core import (
    Configuration,
    LazyEnvironment,
    evolve,
    load_env_binary,
    load_env_text,
    save_env_binary,
    save_env_text,
)
from .oracle import QueryOracle
from .rules import builtin_meta, resolve_rule_name, trivial_rule


def _rule_object(name: str):
    kind, canonical = resolve_rule_name(name)
    if kind == "meta":
        return builtin_meta(canonical).rule
    return trivial_rule(canonical)


def _make_initial(init: str, n: int, rng) -> Configuration:
    if init == "random":
        return Configuration.random(n, rng)
    if init == "zeros":
        return Configuration.zeros(n)
    if init == "ones":
        return Configuration.ones(n)
    if init == "alternating":
        return Configuration.alternating(n)
    if set(init) <= {"0", "1"}:
        return Configuration.from_string(init)
    raise ValueError(f"unknown initial configuration {init!r}")


def _load_env(spec: str, seed: int):
    """An --env argument is a file path or a generator spec
    'gen:rule=<name>,n=<N>,m=<M>[,init=<...>][,lazy=1]'."""
    if spec.startswith("gen:"):
        opts = dict(kv.split("=", 1) for kv in spec[4:].split(","))
        rule = _rule_object(opts.get("rule", "maj"))
        n, m = int(opts["n"]), int(opts["m"])
        rng = random.Random(int(opts.get("seed", seed)))
        initial = _make_initial(opts.get("init", "random"), n, rng)
        if opts.get("lazy", "0") == "1":
            return LazyEnvironment(initial, rule, m)
        return evolve(initial, rule, m)
    if spec.endswith(".bin"):
        return load_env_binary(spec)
    env, _ = load_env_text(spec)
    return env


def cmd_evolve(args) -> int:
    rule = _rule_object(args.rule)
    rng = random.Random(args.seed)
    initial = _make_initial(args.init, args.n, rng)
    env = evolve(initial, rule, args.m)
    if args.format == "binary":
        save_env_binary(env, args.out)
    else:
        save_env_text(env, args.out, rule.wolfram_code)
    print(f"wrote {args.out} ({env.m} x {env.n}, rule {rule.wolfram_code})")
    return 0


def cmd_test(args) -> int:
    env = _load_env(args.env, args.seed)
    oracle = QueryOracle(env)
    rng = random.Random(args.seed)
    verdict = lab.dispatch_test(oracle, args.rule, args.eps, rng,
                                args.profile, args.variant)
    if args.json:
        print(json.dumps(verdict.to_json(), sort_keys=True))
    else:
        print(f"{verdict.decision.capitalize()}"
              + (f" ({verdict.reason})" if verdict.reason else "")
              + f" [queries={verdict.stats.total},"
              f" temporal={verdict.stats.temporal_max}]")
    return 0 if verdict.accepted else 1


def cmd_verify(args) -> int:
    kind, name = resolve_rule_name(args.rule)
    if kind != "meta":
        print(f"rule {name} has no condition metadata (trivial tester only)")
        return 2
    meta = builtin_meta(name)
    results = verifier.verify_all(meta, args.nmax, args.mmax)
    for r in results:
        print(r.describe())
    return 0 if all(results) else 1


def cmd_distance(args) -> int:
    env = _load_env(args.env, args.seed)
    report = bruteforce.exact_distance(env, _rule_object(args.rule))
    out = {"distance": float(report.distance),
           "numerator": report.distance.numerator,
           "denominator": report.distance.denominator,
           "argmin_initial": report.argmin_initial.to_string(),
           "ties": report.ties}
    if args.json:
        print(json.dumps(out, sort_keys=True))
    else:
        print(f"distance = {report.distance} "
              f"(~{float(report.distance):.4f}), ties = {report.ties}")
    return 0


def cmd_period(args) -> int:
    p = bruteforce.period(_rule_object(args.rule), args.n)
    print(p if not args.json else json.dumps({"period": p}))
    return 0


def cmd_genfar(args) -> int:
    kind, name = resolve_rule_name(args.rule)
    rule = _rule_object(args.rule)
    meta = builtin_meta(name) if kind == "meta" else None
    rng = random.Random(args.seed)
    env, cert = bruteforce.make_far(rule, meta, args.n, args.m, args.eps,
                                    rng, args.strategy)
    save_env_text(env, args.out, rule.wolfram_code)
    sidecar = args.out + ".cert.json"
    with open(sidecar, "w") as fh:
        json.dump(cert.to_json(), fh, indent=2, sort_keys=True)
    certified = cert.certifies(args.eps)
    print(f"wrote {args.out} (certificate: {cert.kind}, "
          f"eps={args.eps} certified: {certified})")
    return 0


def cmd_experiment(args) -> int:
    spec = lab.load_spec(args.spec)
    if args.seed is not None:
        spec.seed = args.seed
    table = lab.run_experiment(spec)
    csv_text = table.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv_text)
        print(f"wrote {args.out}")
    else:
        print(csv_text, end="")
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(table.to_json())
        print(f"wrote {args.json_out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ecatest")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.add_argument("--profile", choices=("paper", "lab"), default="paper")
    # the global flags are also accepted after the subcommand; SUPPRESS keeps
    # the subparser from clobbering values parsed before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--json", action="store_true",
                        default=argparse.SUPPRESS)
    common.add_argument("--profile", choices=("paper", "lab"),
                        default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True,
                           parser_class=lambda **kw: argparse.ArgumentParser(
                               parents=[common], **kw))

    sp = sub.add_parser("evolve", help="materialize an evolution to a file")
    sp.add_argument("--rule", required=True)
    sp.add_argument("--init", default="random")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--format", choices=("text", "binary"), default="text")
    sp.set_defaults(fn=cmd_evolve)

    sp = sub.add_parser("test", help="run the tester against an environment")
    sp.add_argument("--rule", required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--env", required=True)
    sp.add_argument("--variant", choices=("auto", "wide", "fallback"),
                    default="auto")
    sp.set_defaults(fn=cmd_test)

    sp = sub.add_parser("verify", help="machine-check the rule conditions")
    sp.add_argument("--rule", required=True)
    sp.add_argument("--nmax", type=int, default=12)
    sp.add_argument("--mmax", type=int, default=12)
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("distance", help="exact distance to the rule's evolutions")
    sp.add_argument("--env", required=True)
    sp.add_argument("--rule", required=True)
    sp.set_defaults(fn=cmd_distance)

    sp = sub.add_parser("period", help="state-machine period by enumeration")
    sp.add_argument("--rule", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.set_defaults(fn=cmd_period)

    sp = sub.add_parser("genfar", help="generate a certified far instance")
    sp.add_argument("--rule", required=True)
    sp.add_argument("--strategy", default="row-complement-suffix")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_genfar)

    sp = sub.add_parser("experiment", help="run a batch experiment spec")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--out")
    sp.add_argument("--json-out")
    sp.set_defaults(fn=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
