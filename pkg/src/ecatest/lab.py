"""Experiment harness: batches of seeded tester trials with CSV/JSON output.

A spec names a rule, a grid of eps values, instance sizes, an instance
strategy and a trial count; the harness runs every cell, collects
accept/reject rates and query statistics, and emits one CSV row per cell.
Trial seeds derive from the master seed and the trial index through a
stable hash, so identical specs reproduce byte-identical tables.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import random
import time
from dataclasses import dataclass, field

from . import bruteforce, tester
from .core import Configuration, Environment, LazyEnvironment, NoisyEnvironment, evolve
from .oracle import QueryOracle
from .rules import builtin_meta, resolve_rule_name, trivial_rule

CSV_COLUMNS = ["rule", "variant", "profile", "n", "m", "eps", "strategy",
               "trials", "accepts", "rejects", "mean_queries", "max_queries",
               "mean_temporal", "max_temporal", "mean_ms"]


@dataclass
class ExperimentSpec:
    rule: str
    eps: list[float]
    sizes: list[tuple[int, int]]
    trials: int
    strategy: str = "evolving"
    profile: str = "lab"
    seed: int = 0
    variant: str = "auto"           # auto | meta | wide | fallback | trivial
    backend: str = "materialized"   # materialized | lazy | noisy0
    timing: bool = False
    workers: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown experiment keys: {sorted(extra)}")
        d = dict(d)
        if "sizes" in d:
            d["sizes"] = [tuple(sz) for sz in d["sizes"]]
        if "eps" in d and not isinstance(d["eps"], list):
            d["eps"] = [d["eps"]]
        return cls(**d)


@dataclass
class ResultTable:
    rows: list[dict] = field(default_factory=list)
    trial_details: list[dict] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: row[k] for k in CSV_COLUMNS})
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"cells": self.rows, "trials": self.trial_details},
                          indent=2, sort_keys=True)


def trial_seed(master: int, index: int) -> int:
    digest = hashlib.blake2b(f"{master}:{index}".encode(), digest_size=8)
    return int.from_bytes(digest.digest(), "little")


def build_instance(rule_name: str, strategy: str, n: int, m: int, seed: int,
                   backend: str = "materialized"):
    """Build one environment instance; returns (env, certificate-or-None)."""
    kind, name = resolve_rule_name(rule_name)
    rule = builtin_meta(name).rule if kind == "meta" else trivial_rule(name)
    rng = random.Random(seed)
    if strategy == "evolving":
        initial = Configuration.random(n, rng)
        if backend == "lazy":
            return LazyEnvironment(initial, rule, m), None
        env = evolve(initial, rule, m)
        if backend == "noisy0":
            return NoisyEnvironment(env, 0.0, seed), None
        return env, None
    meta = builtin_meta(name) if kind == "meta" else None
    env, cert = bruteforce.make_far(rule, meta, n, m, eps=0.0, rng=rng,
                                    strategy=strategy)
    return env, cert


def dispatch_test(oracle: QueryOracle, rule_name: str, eps: float, rng,
                  profile: str, variant: str = "auto") -> tester.Verdict:
    """Route to the tester matching the rule kind and requested variant."""
    kind, name = resolve_rule_name(rule_name)
    if kind == "trivial":
        return tester.test_trivial(oracle, name, eps, rng, profile)
    meta = builtin_meta(name)
    if variant == "fallback":
        return tester.test_fallback(oracle, meta.rule, eps, rng, profile)
    if variant == "wide":
        return tester.test_wide(oracle, meta, eps, rng, profile)
    return tester.test(oracle, meta, eps, rng, profile)


def run_trial(rule: str, strategy: str, n: int, m: int, eps: float,
              profile: str, variant: str, backend: str, seed: int,
              timing: bool = False) -> dict:
    env, cert = build_instance(rule, strategy, n, m, seed, backend)
    oracle = QueryOracle(env)
    rng = random.Random(seed ^ 0x5EED)
    t0 = time.perf_counter() if timing else 0.0
    verdict = dispatch_test(oracle, rule, eps, rng, profile, variant)
    ms = (time.perf_counter() - t0) * 1000.0 if timing else 0.0
    out = {
        "decision": verdict.decision,
        "reason": verdict.reason,
        "variant": verdict.variant,
        "total": verdict.stats.total,
        "temporal": verdict.stats.temporal_max,
        "ms": ms,
        "seed": seed,
    }
    if cert is not None:
        out["certificate"] = cert.to_json()
    return out


def _trial_args(spec: ExperimentSpec, eps, n, m, cell_index, trial):
    seed = trial_seed(spec.seed, cell_index * spec.trials + trial)
    return (spec.rule, spec.strategy, n, m, eps, spec.profile, spec.variant,
            spec.backend, seed, spec.timing)


def _run_trial_tuple(args) -> dict:
    return run_trial(*args)


def run_experiment(spec: ExperimentSpec) -> ResultTable:
    table = ResultTable()
    cell_index = 0
    pool = None
    if spec.workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        pool = ProcessPoolExecutor(max_workers=spec.workers)
    try:
        for eps in spec.eps:
            for (n, m) in spec.sizes:
                args = [_trial_args(spec, eps, n, m, cell_index, t)
                        for t in range(spec.trials)]
                if pool is None:
                    records = [run_trial(*a) for a in args]
                else:
                    # map preserves trial order, so merging stays deterministic
                    records = list(pool.map(_run_trial_tuple, args))
                accepts = rejects = 0
                totals, temporals, times = [], [], []
                for trial, rec in enumerate(records):
                    if rec["decision"] == "accept":
                        accepts += 1
                    else:
                        rejects += 1
                    totals.append(rec["total"])
                    temporals.append(rec["temporal"])
                    times.append(rec["ms"])
                    rec.update({"rule": spec.rule, "eps": eps, "n": n, "m": m,
                                "trial": trial})
                    table.trial_details.append(rec)
                table.rows.append({
                    "rule": spec.rule,
                    "variant": spec.variant,
                    "profile": spec.profile,
                    "n": n,
                    "m": m,
                    "eps": f"{eps:g}",
                    "strategy": spec.strategy,
                    "trials": spec.trials,
                    "accepts": accepts,
                    "rejects": rejects,
                    "mean_queries": f"{sum(totals) / len(totals):.2f}",
                    "max_queries": max(totals),
                    "mean_temporal": f"{sum(temporals) / len(temporals):.2f}",
                    "max_temporal": max(temporals),
                    "mean_ms": f"{sum(times) / len(times):.3f}",
                })
                cell_index += 1
    finally:
        if pool is not None:
            pool.shutdown()
    return table


def load_spec(path: str) -> ExperimentSpec:
    if path.endswith(".json"):
        with open(path) as fh:
            return ExperimentSpec.from_dict(json.load(fh))
    try:
        import tomllib as toml
    except ModuleNotFoundError:  # python 3.10
        import tomli as toml
    with open(path, "rb") as fh:
        data = toml.load(fh)
    return ExperimentSpec.from_dict(data.get("experiment", data))
