"""Ground-truth oracles by exhaustive enumeration over initial configurations.

Everything here is deliberately independent of the tester's machinery: the
distance oracle and the feasibility oracle work by evolving all 2^n initial
configurations, so they certify the fast paths rather than share code with
them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import Configuration, Environment, Rule, evolve
from .rules import RuleMeta

MAX_DISTANCE_N = 24
MAX_FEASIBLE_N = 16
MAX_PERIOD_N = 20


class BudgetError(ValueError):
    pass


@dataclass
class DistanceReport:
    distance: Fraction
    argmin_initial: Configuration
    ties: int


@dataclass
class Certificate:
    kind: str                      # "exact" | "constructive" | "uncertified"
    bound: Optional[Fraction]      # certified lower bound on the distance
    strategy: str
    details: dict = field(default_factory=dict)

    def certifies(self, eps: Fraction | float) -> bool:
        return self.bound is not None and self.bound > eps

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "bound": None if self.bound is None else
            {"num": self.bound.numerator, "den": self.bound.denominator},
            "strategy": self.strategy,
            "details": self.details,
        }


_CONFIG_CACHE: dict[int, np.ndarray] = {}
_ROW_CACHE: dict[tuple[int, int, int], np.ndarray] = {}


def _all_configs(n: int) -> np.ndarray:
    if n not in _CONFIG_CACHE:
        s = np.arange(1 << n, dtype=np.int64)
        _CONFIG_CACHE[n] = ((s[:, None] >> np.arange(n - 1, -1, -1)) & 1
                            ).astype(np.uint8)
    return _CONFIG_CACHE[n]


def _rows_at(rule: Rule, n: int, t: int) -> np.ndarray:
    """Row t of every initial configuration's evolution, shape (2^n, n)."""
    key = (rule.wolfram_code, n, t)
    if key not in _ROW_CACHE:
        if t == 0:
            _ROW_CACHE[key] = _all_configs(n)
        else:
            prev = _rows_at(rule, n, t - 1)
            table = rule.table_array()
            idx = (4 * np.roll(prev, 1, axis=1) + 2 * prev
                   + np.roll(prev, -1, axis=1))
            _ROW_CACHE[key] = table[idx]
    return _ROW_CACHE[key]


def exact_distance(env: Environment, rule: Rule) -> DistanceReport:
    """Exact minimum normalized Hamming distance to any evolution."""
    n, m = env.n, env.m
    if n > MAX_DISTANCE_N:
        raise BudgetError(f"n={n} exceeds the 2^n enumeration budget")
    # the observed first row is the natural first candidate; a distance of 0
    # can only be achieved by it, so the scan can stop early there
    base = evolve(env.config(0), rule, m)
    if np.array_equal(base.rows, env.rows):
        return DistanceReport(Fraction(0), env.config(0), 1)
    table = rule.table_array()
    cur = _all_configs(n).copy()
    diffs = np.zeros(cur.shape[0], dtype=np.int64)
    for t in range(m):
        if t > 0:
            idx = (4 * np.roll(cur, 1, axis=1) + 2 * cur
                   + np.roll(cur, -1, axis=1))
            cur = table[idx]
        diffs += (cur != env.row(t)[None, :]).sum(axis=1)
    best = int(diffs.min())
    where = np.flatnonzero(diffs == best)
    argmin = Configuration(_all_configs(n)[where[0]])
    return DistanceReport(Fraction(best, m * n), argmin, int(where.size))


def feasible(grid, patterns, t1: int, rule: Rule, n: int, k: int) -> bool:
    """Does any initial configuration's evolution match the grid windows?"""
    if n > MAX_FEASIBLE_N:
        raise BudgetError(f"n={n} exceeds the 2^n enumeration budget")
    rows = _rows_at(rule, n, t1)
    ok = np.ones(rows.shape[0], dtype=bool)
    width = 2 * k + 1
    for g, pat in zip(grid, patterns):
        for j in range(width):
            bit = (pat >> (width - 1 - j)) & 1
            ok &= rows[:, (int(g) - k + j) % n] == bit
        if not ok.any():
            return False
    return bool(ok.any())


def period(rule: Rule, n: int) -> int:
    """Longest directed cycle length of the rule's state machine on n cells."""
    if n > MAX_PERIOD_N:
        raise BudgetError(f"n={n} exceeds the 2^n enumeration budget")
    configs = _all_configs(n)
    table = rule.table_array()
    idx = (4 * np.roll(configs, 1, axis=1) + 2 * configs
           + np.roll(configs, -1, axis=1))
    stepped = table[idx]
    weights = (1 << np.arange(n - 1, -1, -1)).astype(np.int64)
    nxt = stepped.astype(np.int64) @ weights
    size = 1 << n
    color = np.zeros(size, dtype=np.int8)      # 0 new, 1 in progress, 2 done
    longest = 1
    order: dict[int, int] = {}
    for s0 in range(size):
        if color[s0]:
            continue
        path = []
        s = s0
        while color[s] == 0:
            color[s] = 1
            order[s] = len(path)
            path.append(s)
            s = int(nxt[s])
        if color[s] == 1:  # found a new cycle
            longest = max(longest, len(path) - order[s])
        for v in path:
            color[v] = 2
            order.pop(v, None)
    return longest


# ---------------------------------------------------------------------------
# Far-instance generation
# ---------------------------------------------------------------------------

def _alternating_bound_blocky(n: int, m: int) -> Fraction:
    """Distance bound for constant-alternating-row environments tested
    against maj or min.

    Any evolution either stays an alternating configuration forever (then
    half of all rows, possibly off by one, disagree everywhere) or contains
    a final seed whose influence grows two cells per step; a final location
    forces a disagreement within its radius-1 window against a perfectly
    alternating row, giving at least #final(t)/3 disagreements per row.
    """
    total = 0
    for t in range(m):
        total += min(2 * t, n)
    spread = Fraction(total, 3 * m * n)
    flip = Fraction((m - 1) // 2, m)
    return min(spread, flip)


def _alternating_bound_or(n: int, m: int, hot: int) -> Fraction:
    """Distance bound for constant-alternating-row environments tested
    against or/and: a t-step-reachable row is constant or carries hot runs
    of length >= 2t+1, either way disagreeing with a perfect alternation on
    at least (n/2) * t/(3t+1) cells."""
    half = Fraction(n, 2)
    total = Fraction(0)
    for t in range(1, m):
        if 2 * t + 1 >= n:
            total += half
        else:
            total += half * Fraction(t, 3 * t + 1)
    return total / (m * n)


def make_far(rule: Rule, meta: Optional[RuleMeta], n: int, m: int,
             eps: float, rng, strategy: str) -> tuple[Environment, Certificate]:
    """Build an environment intended to be eps-far from evolving under
    `rule`, together with a distance certificate.

    The certificate is exact when the ring is small enough to enumerate,
    constructive for the instance families with a proven bound, and
    otherwise the environment is returned uncertified.
    """
    details: dict = {"n": n, "m": m}
    if strategy == "row-complement-suffix":
        cut = max(1, m // 2)
        env = evolve(Configuration.random(n, rng), rule, m)
        rows = env.rows.copy()
        rows[cut:] ^= 1
        env = Environment(rows)
        details["cut"] = cut
        cert = _certify(env, rule, strategy, None, details)
    elif strategy == "splice-two-evolutions":
        cut = max(1, m // 2)
        a = evolve(Configuration.random(n, rng), rule, m)
        b = evolve(Configuration.random(n, rng), rule, m)
        rows = a.rows.copy()
        rows[cut:] = b.rows[cut:]
        env = Environment(rows)
        details["cut"] = cut
        cert = _certify(env, rule, strategy, None, details)
    elif strategy.startswith("iid-noise"):
        p = float(strategy.split("(")[1].rstrip(")")) if "(" in strategy else 0.1
        env0 = evolve(Configuration.random(n, rng), rule, m)
        rows = env0.rows.copy()
        mask = np.array([[rng.random() < p for _ in range(n)] for _ in range(m)])
        rows[mask] ^= 1
        env = Environment(rows)
        details["p"] = p
        cert = _certify(env, rule, strategy, None, details)
    elif strategy == "wrong-rule-evolution":
        if n % 2:
            raise ValueError("alternating far instances need even n")
        env, bound = _alternating_instance(rule, meta, n, m)
        cert = _certify(env, rule, strategy, bound, details)
    else:
        raise ValueError(f"unknown far-instance strategy {strategy!r}")
    return env, cert


def _alternating_instance(rule: Rule, meta: Optional[RuleMeta],
                          n: int, m: int) -> tuple[Environment, Fraction]:
    """The certified wrong-rule family: rows that are perfect alternations,
    frozen or flipping so that they evolve under the tested rule's partner."""
    name = meta.name if meta is not None else f"wolfram:{rule.wolfram_code}"
    alt = Configuration.alternating(n).bits
    if name in ("maj", "or", "and"):
        rows = np.tile(alt, (m, 1))            # frozen alternation (min-evolution)
        bound = (_alternating_bound_blocky(n, m) if name == "maj"
                 else _alternating_bound_or(n, m, hot=1))
    elif name == "min":
        rows = np.empty((m, n), dtype=np.uint8)
        for t in range(m):
            rows[t] = alt ^ (t & 1)            # flipping alternation (maj-evolution)
        bound = _alternating_bound_blocky(n, m)
    else:
        raise ValueError(f"no constructive far family for rule {name}")
    return Environment(rows), bound


def _certify(env: Environment, rule: Rule, strategy: str,
             constructive_bound: Optional[Fraction],
             details: dict) -> Certificate:
    if env.n <= MAX_DISTANCE_N and (1 << env.n) * env.m * env.n <= 120_000_000:
        report = exact_distance(env, rule)
        details = dict(details, ties=report.ties)
        return Certificate("exact", report.distance, strategy, details)
    if constructive_bound is not None:
        return Certificate("constructive", constructive_bound, strategy, details)
    return Certificate("uncertified", None, strategy, details)
