"""The meta-algorithm for testing evolution according to a local rule.

The tester queries the k-neighborhoods of a sparse grid of locations at a
single early time t1, rejects if that partial view is infeasible, then
samples Theta(1/eps) random time-location pairs and rejects if any of them
violates the prediction functions relative to the grid.  Violations are
defined per the classification of a pair into the sets A (deep inside a
final grid interval), B (on the growing flanks of one), C (deep inside a
non-final grid interval) and U (uncertain; never checked).

Also provided: the small-instance fallback tester (reads all of row 0),
the interval variant for n >> m, and the trivial testers for the
one-step-converging rules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import feasibility
from .core import Rule, dist, in_interval
from .oracle import OracleStats, QueryOracle
from .rules import RuleMeta, row_pattern_indices, trivial_rule

PROFILES = {
    "paper": {"b0": 48, "b1": 15, "b2": 3,
              "wide_b0": 84, "wide_b1": 20, "wide_b3": 32, "wide_b4": 4,
              "wide_b5": 8},
    "lab": {"b0": 4, "b1": 2, "b2": 3,
            "wide_b0": 4, "wide_b1": 2, "wide_b3": 4, "wide_b4": 4,
            "wide_b5": 3},
}


class ParameterError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Planning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Params:
    n: int
    m: int
    eps: float
    k: int
    profile: str
    b0: int
    b1: int
    b2: int
    delta: int
    t1: int
    t2: int
    grid: tuple[int, ...]
    s: int

    def total_query_budget(self) -> int:
        w = 2 * self.k + 1
        return w * len(self.grid) + 2 * w * self.s


@dataclass(frozen=True)
class FallbackPlan:
    n: int
    m: int
    eps: float
    profile: str
    s: int
    reason: str


def _check_plan_args(n: int, m: int, eps: float) -> None:
    if not 0 < eps < 1:
        raise ParameterError(f"eps must be in (0,1), got {eps}")
    if n < 3:
        raise ParameterError(f"n must be >= 3, got {n}")
    if m < 2:
        raise ParameterError(f"m must be >= 2, got {m}")


def plan(n: int, m: int, eps: float, k: int,
         profile: str = "paper") -> Params | FallbackPlan:
    """Lay out grid spacing, probe times and sample count for one test run."""
    _check_plan_args(n, m, eps)
    c = PROFILES[profile]
    s = math.ceil(2 * c["b2"] / eps)
    delta = max(1, math.floor(eps * eps * min(n, m) / c["b0"]))
    t1 = math.ceil(c["b1"] * delta / eps)
    t2 = t1 + delta
    if t2 + 1 >= m:
        return FallbackPlan(n, m, eps, profile, s,
                            f"t2+1 = {t2 + 1} does not leave sampling room in m = {m}")
    size = n // delta
    if size < 2:
        return FallbackPlan(n, m, eps, profile, s, "grid would be degenerate")
    grid = tuple(sorted({j * n // size for j in range(size)}))
    return Params(n=n, m=m, eps=eps, k=k, profile=profile,
                  b0=c["b0"], b1=c["b1"], b2=c["b2"],
                  delta=delta, t1=t1, t2=t2, grid=grid, s=s)


# ---------------------------------------------------------------------------
# Grid views and intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridView:
    t1: int
    k: int
    grid: tuple[int, ...]
    patterns: tuple[int, ...]

    def pattern_at(self, g: int) -> int:
        return self.patterns[self.grid.index(g)]

    def center_at(self, j: int) -> int:
        return (self.patterns[j] >> self.k) & 1


def check_feasible(meta: RuleMeta, gv: GridView, pr: Params) -> "feasibility.FeasibilityResult":
    """Can the grid view be completed to a genuine evolution at t1?

    Exact wherever the windows pin the row down or leave few gaps (and
    certified against the brute-force oracle there); for large sparse grids
    it applies structural conditions that every evolution satisfies.
    """
    return feasibility.feasible_cyclic(meta, gv.grid, gv.patterns, gv.t1, pr.n)


@dataclass(frozen=True)
class GridIntervals:
    homogeneous: Optional[str]              # "final" | "nonfinal" | None
    final_flags: tuple[bool, ...]
    f_intervals: tuple[tuple[int, int], ...]    # grid index pairs (j1, j2)
    bf_intervals: tuple[tuple[int, int], ...]


def grid_intervals(meta: RuleMeta, gv: GridView) -> GridIntervals:
    flags = tuple(p in meta.final_patterns for p in gv.patterns)
    if all(flags):
        return GridIntervals("final", flags, (), ())
    if not any(flags):
        return GridIntervals("nonfinal", flags, (), ())
    p = len(flags)
    f_iv, bf_iv = [], []
    for j in range(p):
        if flags[j] != flags[j - 1]:
            if flags[j]:
                e = j
                while flags[(e + 1) % p]:
                    e = (e + 1) % p
                f_iv.append((j, e))
            else:
                e = j
                while not flags[(e + 1) % p]:
                    e = (e + 1) % p
                bf_iv.append((j, e))
    return GridIntervals(None, flags, tuple(f_iv), tuple(bf_iv))


# ---------------------------------------------------------------------------
# Pair classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairClass:
    kind: str                                # "A" | "B" | "C" | "U"
    interval: Optional[tuple[int, int]] = None   # grid index pair
    side: Optional[str] = None               # for B: "left" | "right"


def _zone_member(i: int, a: int, length: int, n: int) -> bool:
    """Is i in the wrapped interval starting at a with `length` cells?"""
    if length <= 0:
        return False
    if length >= n:
        return True
    return (i - a) % n < length


def _in_A(gv: GridView, iv: GridIntervals, pr: Params, t: int, i: int) -> bool:
    if iv.homogeneous == "final":
        return True
    if iv.homogeneous == "nonfinal":
        return False
    n = pr.n
    for (j1, j2) in iv.f_intervals:
        g1, g2 = gv.grid[j1], gv.grid[j2]
        span = (g2 - g1) % n
        if span < 2 * pr.t1:
            continue
        if _zone_member(i, (g1 + pr.t1) % n, span - 2 * pr.t1 + 1, n):
            return True
    return False


def _b_pick(gv: GridView, iv: GridIntervals, pr: Params,
            t: int, i: int) -> Optional[tuple[tuple[int, int], str]]:
    if iv.homogeneous is not None:
        return None
    n = pr.n
    r = t - pr.t1
    zone_len = r + pr.t1 - pr.delta
    cands = []
    for (j1, j2) in iv.f_intervals:
        g1, g2 = gv.grid[j1], gv.grid[j2]
        if _zone_member(i, (g1 - r) % n, zone_len, n):
            cands.append(((j1, j2), "left", g1))
        if _zone_member(i, (g2 - pr.t1 + pr.delta + 1) % n, zone_len, n):
            cands.append(((j1, j2), "right", g2))
    picked = []
    for (jj, side, anchor) in cands:
        ok = True
        for (h1, h2) in iv.f_intervals:
            if (h1, h2) == jj:
                continue
            other = gv.grid[h2] if side == "left" else gv.grid[h1]
            if not dist(anchor, i, n) < dist(other, i, n) - pr.delta:
                ok = False
                break
        if ok:
            picked.append((dist(anchor, i, n), 0 if side == "right" else 1,
                           jj, side))
    if not picked:
        return None
    picked.sort(key=lambda c: (c[0], c[1]))
    _, _, jj, side = picked[0]
    return jj, side


def _in_C(gv: GridView, iv: GridIntervals, pr: Params,
          t: int, i: int) -> Optional[tuple[int, int]]:
    if iv.homogeneous == "nonfinal":
        return (-1, -1)
    if iv.homogeneous == "final":
        return None
    n = pr.n
    r = t - pr.t1
    for (j1, j2) in iv.bf_intervals:
        g1, g2 = gv.grid[j1], gv.grid[j2]
        if not in_interval(i, g1, g2, n):
            continue
        if dist(i, (g1 + 1) % n, n) <= r or dist(i, (g2 - 1) % n, n) <= r:
            continue
        return (j1, j2)
    return None


def raw_memberships(meta: RuleMeta, gv: GridView, iv: GridIntervals,
                    pr: Params, t: int, i: int) -> tuple[bool, bool, bool]:
    """Independent evaluation of the three defining predicates (for the
    disjointness sweep); classify_pair picks the single class."""
    return (_in_A(gv, iv, pr, t, i),
            _b_pick(gv, iv, pr, t, i) is not None,
            _in_C(gv, iv, pr, t, i) is not None)


def classify_pair(meta: RuleMeta, gv: GridView, iv: GridIntervals,
                  pr: Params, t: int, i: int) -> PairClass:
    if not pr.t2 < t < pr.m:
        raise ParameterError(f"t={t} outside the sampling range ({pr.t2}, {pr.m})")
    if _in_A(gv, iv, pr, t, i):
        return PairClass("A")
    b = _b_pick(gv, iv, pr, t, i)
    if b is not None:
        return PairClass("B", interval=b[0], side=b[1])
    c = _in_C(gv, iv, pr, t, i)
    if c is not None:
        return PairClass("C", interval=None if c == (-1, -1) else c)
    return PairClass("U")


def membership_rows(meta: RuleMeta, gv: GridView, iv: GridIntervals,
                    pr: Params, t: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized raw membership of every location at time t in A, B, C."""
    n = pr.n
    i = np.arange(n)
    if iv.homogeneous == "final":
        full = np.ones(n, dtype=bool)
        return full, np.zeros(n, dtype=bool), np.zeros(n, dtype=bool)
    if iv.homogeneous == "nonfinal":
        full = np.ones(n, dtype=bool)
        return np.zeros(n, dtype=bool), np.zeros(n, dtype=bool), full

    def zone_mask(a, length):
        if length <= 0:
            return np.zeros(n, dtype=bool)
        if length >= n:
            return np.ones(n, dtype=bool)
        return (i - a) % n < length

    def dist_to(g):
        d = (i - g) % n
        return np.minimum(d, n - d)

    in_a = np.zeros(n, dtype=bool)
    for (j1, j2) in iv.f_intervals:
        g1, g2 = gv.grid[j1], gv.grid[j2]
        span = (g2 - g1) % n
        if span >= 2 * pr.t1:
            in_a |= zone_mask((g1 + pr.t1) % n, span - 2 * pr.t1 + 1)
    r = t - pr.t1
    zone_len = r + pr.t1 - pr.delta
    in_b = np.zeros(n, dtype=bool)
    for (j1, j2) in iv.f_intervals:
        g1, g2 = gv.grid[j1], gv.grid[j2]
        for side, anchor in (("left", g1), ("right", g2)):
            start = (g1 - r) % n if side == "left" \
                else (g2 - pr.t1 + pr.delta + 1) % n
            mask = zone_mask(start, zone_len)
            if not mask.any():
                continue
            da = dist_to(anchor)
            for (h1, h2) in iv.f_intervals:
                if (h1, h2) == (j1, j2):
                    continue
                other = gv.grid[h2] if side == "left" else gv.grid[h1]
                mask &= da < dist_to(other) - pr.delta
            in_b |= mask
    in_c = np.zeros(n, dtype=bool)
    for (j1, j2) in iv.bf_intervals:
        g1, g2 = gv.grid[j1], gv.grid[j2]
        mask = zone_mask(g1, (g2 - g1) % n + 1)
        mask &= dist_to((g1 + 1) % n) > r
        mask &= dist_to((g2 - 1) % n) > r
        in_c |= mask
    return in_a, in_b, in_c


def classify_row(meta: RuleMeta, gv: GridView, iv: GridIntervals,
                 pr: Params, t: int) -> np.ndarray:
    """Vectorized classification of every location at time t.

    Returns an int8 array: 0 = A, 1 = B, 2 = C, 3 = U.
    """
    in_a, in_b, in_c = membership_rows(meta, gv, iv, pr, t)
    out = np.full(pr.n, 3, dtype=np.int8)
    out[in_c] = 2
    out[in_b] = 1
    out[in_a] = 0
    return out


# ---------------------------------------------------------------------------
# Violations
# ---------------------------------------------------------------------------

def _nearest_grid_index(grid: tuple[int, ...], i: int, n: int) -> int:
    """Index of the grid location nearest to i (ties toward the left one)."""
    best = None
    for j, g in enumerate(grid):
        d = dist(g, i, n)
        left_off = (i - g) % n  # 0..n-1; smaller means g is at or left of i
        key = (d, 0 if left_off <= n // 2 else 1)
        if best is None or key < best[0]:
            best = (key, j)
    return best[1]


def violation_check(meta: RuleMeta, cls: PairClass, t: int, i: int,
                    w_t: int, w_t2: int, gv: GridView,
                    pr: Params) -> Optional[str]:
    """Check the class requirements; returns the failed requirement id."""
    if cls.kind == "U":
        raise ParameterError("uncertain pairs are never violation-checked")
    final = meta.final_patterns
    center_t = (w_t >> meta.k) & 1
    n = pr.n
    if cls.kind == "A":
        if w_t2 not in final:
            return "A1"
        if w_t not in final:
            return "A2"
        center_t2 = (w_t2 >> meta.k) & 1
        if center_t != meta.f_fwd(center_t2, (t - pr.t2) & 1, 0):
            return "A3"
        return None
    if cls.kind == "B":
        if w_t not in final:
            return "B1"
        j1, j2 = cls.interval
        p = len(gv.grid)
        zone = []
        if cls.side == "right":
            g2 = gv.grid[j2]
            j = j2
            steps = (j2 - j1) % p + 1
            for _ in range(steps):
                g = gv.grid[j]
                if not in_interval(g, (g2 - pr.t1 + pr.delta) % n, g2, n):
                    break
                zone.append(j)
                j = (j - 1) % p
            ref = gv.grid[j1]
        else:
            g1 = gv.grid[j1]
            j = j1
            steps = (j2 - j1) % p + 1
            for _ in range(steps):
                g = gv.grid[j]
                if not in_interval(g, g1, (g1 + pr.t1 - pr.delta) % n, n):
                    break
                zone.append(j)
                j = (j + 1) % p
            ref = g1
        anchor = min(zone, key=lambda jj: (dist(gv.grid[jj], i, n),
                                           dist(gv.grid[jj], ref, n)))
        g = gv.grid[anchor]
        pred = meta.f_fwd(gv.center_at(anchor), (t - pr.t1) & 1,
                          dist(i, g, n) & 1)
        if center_t != pred:
            return "B2"
        return None
    # class C
    if w_t in final:
        return "C1"
    anchor = _nearest_grid_index(gv.grid, i, n)
    g = gv.grid[anchor]
    pred = meta.h_fwd(gv.patterns[anchor], (t - pr.t1) & 1, dist(g, i, n))
    if w_t != pred:
        return "C2"
    return None


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

@dataclass
class Verdict:
    decision: str                       # "accept" | "reject"
    reason: Optional[dict]
    stats: OracleStats
    variant: str
    params: dict = field(default_factory=dict)
    delegated_from: Optional[str] = None

    @property
    def accepted(self) -> bool:
        return self.decision == "accept"

    def to_json(self) -> dict:
        return {
            "decision": self.decision.capitalize(),
            "reason": self.reason,
            "params": self.params,
            "stats": {"total": self.stats.total,
                      "temporal_max": self.stats.temporal_max},
            "variant": self.variant,
            "delegated_from": self.delegated_from,
        }


def _accept(oracle, variant, params, delegated=None) -> Verdict:
    return Verdict("accept", None, oracle.stats(), variant, params, delegated)


def _reject(oracle, variant, params, reason, delegated=None) -> Verdict:
    return Verdict("reject", reason, oracle.stats(), variant, params, delegated)


# ---------------------------------------------------------------------------
# The meta-tester
# ---------------------------------------------------------------------------

def test(oracle: QueryOracle, meta: RuleMeta, eps: float, rng,
         profile: str = "paper") -> Verdict:
    """One-sided tester for evolution according to a rule with metadata."""
    pr = plan(oracle.n, oracle.m, eps, meta.k, profile)
    if isinstance(pr, FallbackPlan):
        v = test_fallback(oracle, meta.rule, eps, rng, profile)
        v.delegated_from = pr.reason
        return v
    par = {"n": pr.n, "m": pr.m, "eps": eps, "delta": pr.delta, "t1": pr.t1,
           "t2": pr.t2, "grid_size": len(pr.grid), "s": pr.s,
           "profile": profile}
    # the full query set is fixed before any answer is read
    samples = [(rng.randrange(pr.t2 + 1, pr.m), rng.randrange(pr.n))
               for _ in range(pr.s)]
    patterns = tuple(oracle.query_window_pattern(pr.t1, g, meta.k)
                     for g in pr.grid)
    gv = GridView(pr.t1, meta.k, pr.grid, patterns)
    feas = check_feasible(meta, gv, pr)
    if not feas:
        return _reject(oracle, "meta", par,
                       {"kind": "infeasible-grid", "detail": feas.reason})
    w_t2 = [0] * pr.s
    for idx in sorted(range(pr.s), key=lambda ix: samples[ix][1]):
        w_t2[idx] = oracle.query_window_pattern(pr.t2, samples[idx][1], meta.k)
    w_t = [0] * pr.s
    for idx in sorted(range(pr.s), key=lambda ix: samples[ix]):
        w_t[idx] = oracle.query_window_pattern(samples[idx][0],
                                               samples[idx][1], meta.k)
    iv = grid_intervals(meta, gv)
    for idx, (t, i) in enumerate(samples):
        cls = classify_pair(meta, gv, iv, pr, t, i)
        if cls.kind == "U":
            continue
        req = violation_check(meta, cls, t, i, w_t[idx], w_t2[idx], gv, pr)
        if req is not None:
            return _reject(oracle, "meta", par,
                           {"kind": "violation", "t": t, "i": i,
                            "class": cls.kind, "requirement": req})
    return _accept(oracle, "meta", par)


# ---------------------------------------------------------------------------
# Fallback tester for small instances
# ---------------------------------------------------------------------------

def test_fallback(oracle: QueryOracle, rule: Rule, eps: float, rng,
                  profile: str = "paper") -> Verdict:
    """Read all of row 0, evolve internally, and spot-check O(1/eps) cells."""
    _check_plan_args(oracle.n, oracle.m, eps)
    n, m = oracle.n, oracle.m
    s = math.ceil(2 * PROFILES[profile]["b2"] / eps)
    par = {"n": n, "m": m, "eps": eps, "s": s, "profile": profile}
    samples = sorted((rng.randrange(1, m), rng.randrange(n))
                     for _ in range(s))
    row = np.array([oracle.query(0, i) for i in range(n)], dtype=np.uint8)
    table = rule.table_array()
    current_t = 0
    for (t, i) in samples:
        while current_t < t:
            idx = 4 * np.roll(row, 1) + 2 * row + np.roll(row, -1)
            row = table[idx]
            current_t += 1
        if oracle.query(t, i) != int(row[i]):
            return _reject(oracle, "fallback", par,
                           {"kind": "violation", "t": t, "i": i,
                            "class": "row0-evolution", "requirement": "F1"})
    return _accept(oracle, "fallback", par)


# ---------------------------------------------------------------------------
# Trivial testers for one-step-converging rules
# ---------------------------------------------------------------------------

_BAD_FACTORS = {"nor": ("101", "1001"), "nand": ("010", "0110")}


def _has_bad_factor(bits: tuple[int, ...], factors) -> bool:
    s = "".join(map(str, bits))
    return any(f in s for f in factors)


def test_trivial(oracle: QueryOracle, name: str, eps: float, rng,
                 profile: str = "paper") -> Verdict:
    """Testers for all1/all0 (converge in one step to a constant) and
    nor/nand (period two from time 1 on, with no short blocks)."""
    _check_plan_args(oracle.n, oracle.m, eps)
    rule = trivial_rule(name)
    n, m = oracle.n, oracle.m
    s = math.ceil(2 * PROFILES[profile]["b2"] / eps)
    par = {"n": n, "m": m, "eps": eps, "s": s, "profile": profile, "rule": name}
    if name in ("all1", "all0"):
        want = 1 if name == "all1" else 0
        if m < 2:
            return _accept(oracle, "trivial", par)
        samples = sorted((rng.randrange(1, m), rng.randrange(n))
                         for _ in range(s))
        for (t, i) in samples:
            if oracle.query(t, i) != want:
                return _reject(oracle, "trivial", par,
                               {"kind": "violation", "t": t, "i": i,
                                "class": "constant", "requirement": "T1"})
        return _accept(oracle, "trivial", par)
    # nor / nand
    if m < 3 or n < 7:
        v = test_fallback(oracle, rule, eps, rng, profile)
        v.delegated_from = "instance too small for the window tester"
        return v
    factors = _BAD_FACTORS[name]
    samples = [(rng.randrange(1, m), rng.randrange(n)) for _ in range(s)]
    w1, w2 = {}, {}
    for i in sorted({i for _, i in samples}):
        w1[i] = oracle.query_window(1, i, 3)
    for i in sorted({i for _, i in samples}):
        w2[i] = oracle.query_window(2, i, 3)
    wt = {}
    for (t, i) in sorted(samples):
        if t > 2:
            wt[(t, i)] = oracle.query_window(t, i, 3)
    for (t, i) in samples:
        base = w1[i] if t % 2 == 1 else w2[i]
        win = base if t <= 2 else wt[(t, i)]
        if _has_bad_factor(w1[i], factors) or _has_bad_factor(w2[i], factors) \
                or _has_bad_factor(win, factors):
            return _reject(oracle, "trivial", par,
                           {"kind": "violation", "t": t, "i": i,
                            "class": "short-block", "requirement": "T2"})
        stepped = tuple(rule(*w1[i][j:j + 3]) for j in range(5))
        if stepped != w2[i][1:6]:
            return _reject(oracle, "trivial", par,
                           {"kind": "violation", "t": t, "i": i,
                            "class": "step", "requirement": "T3"})
        if win != base:
            return _reject(oracle, "trivial", par,
                           {"kind": "violation", "t": t, "i": i,
                            "class": "period-2", "requirement": "T4"})
    return _accept(oracle, "trivial", par)


# ---------------------------------------------------------------------------
# The interval variant for n >> m
# ---------------------------------------------------------------------------

def plan_wide(n: int, m: int, eps: float, k: int, profile: str = "paper"):
    """Parameters of the interval variant; None when the plain tester applies."""
    _check_plan_args(n, m, eps)
    c = PROFILES[profile]
    if n <= c["wide_b3"] * m / (eps * eps):
        return None
    n_prime = math.ceil(c["wide_b3"] * m / eps)
    delta = max(1, math.floor(eps * eps * m / c["wide_b0"]))
    t1 = math.ceil(c["wide_b1"] * delta / eps)
    t2 = t1 + delta
    if t2 + 1 >= m or n_prime >= n:
        return None
    count = n // n_prime
    s_int = math.ceil(2 * c["wide_b5"] / eps)
    s = math.ceil(2 * c["b2"] / eps)
    return {"n_prime": n_prime, "delta": delta, "t1": t1, "t2": t2,
            "count": count, "s_int": s_int, "s": s}


def test_wide(oracle: QueryOracle, meta: RuleMeta, eps: float, rng,
              profile: str = "paper") -> Verdict:
    """Tester for m << n: test Theta(1/eps) random intervals of length
    ~b3*m/eps, each with its own interval grid."""
    wp = plan_wide(oracle.n, oracle.m, eps, meta.k, profile)
    if wp is None:
        v = test(oracle, meta, eps, rng, profile)
        v.delegated_from = "wide preconditions not met"
        return v
    n, m, k = oracle.n, oracle.m, meta.k
    n_prime, delta, t1, t2 = wp["n_prime"], wp["delta"], wp["t1"], wp["t2"]
    count = wp["count"]
    par = {"n": n, "m": m, "eps": eps, "profile": profile, **wp}
    chosen = sorted(rng.sample(range(count), min(wp["s_int"], count)))
    plans = []
    for q in chosen:
        i0 = q * n_prime
        j0 = (q + 1) * n_prime - 1 if q < count - 1 else n - 1
        lo = i0 + t1 + k + 1
        hi = j0 - t1 - k - 1
        grid = list(range(lo, hi + 1, delta))
        if len(grid) < 2:
            continue
        half = (hi - lo) // 2
        t_max = min(m - 1, t1 + half)
        if t_max <= t2:
            continue
        samples = []
        for _ in range(wp["s"]):
            t = rng.randrange(t2 + 1, t_max + 1)
            i = rng.randrange(lo + (t - t1), hi - (t - t1) + 1)
            samples.append((t, i))
        plans.append({"q": q, "i0": i0, "j0": j0, "lo": lo, "hi": hi,
                      "grid": grid, "samples": samples})
    # phase 1: every interval's grid at t1
    for p in plans:
        p["patterns"] = [oracle.query_window_pattern(t1, g % n, k)
                         for g in p["grid"]]
    for p in plans:
        feas = feasibility.feasible_segment(meta, p["grid"], p["patterns"], t1)
        if not feas:
            return _reject(oracle, "wide", par,
                           {"kind": "infeasible-grid", "interval": p["q"],
                            "detail": feas.reason})
    # phase 2: t2 windows, then sampled windows in time order
    for p in plans:
        p["w2"] = {}
        for (t, i) in sorted(p["samples"], key=lambda ti: ti[1]):
            p["w2"][(t, i)] = oracle.query_window_pattern(t2, i % n, k)
    flat = [(t, i, p) for p in plans for (t, i) in p["samples"]]
    wt = {}
    for (t, i, p) in sorted(flat, key=lambda x: (x[0], x[1])):
        wt[(p["q"], t, i)] = oracle.query_window_pattern(t, i % n, k)
    for p in plans:
        verdict = _check_interval(meta, p, wt, t1, t2, delta, n)
        if verdict is not None:
            return _reject(oracle, "wide", par, verdict)
    return _accept(oracle, "wide", par)


def _check_interval(meta: RuleMeta, p: dict, wt: dict, t1: int, t2: int,
                    delta: int, n: int) -> Optional[dict]:
    """Classify and check one interval's samples with linear geometry."""
    grid = p["grid"]
    patterns = p["patterns"]
    flags = [pat in meta.final_patterns for pat in patterns]
    size = len(grid)
    runs = []
    j = 0
    while j < size:
        e = j
        while e + 1 < size and flags[e + 1] == flags[j]:
            e += 1
        runs.append((flags[j], j, e))
        j = e + 1
    for (t, i) in p["samples"]:
        w_t = wt[(p["q"], t, i)]
        w_t2 = p["w2"][(t, i)]
        req = _check_interval_pair(meta, runs, grid, patterns, flags,
                                   t, i, w_t, w_t2, t1, t2, delta)
        if req is not None:
            return {"kind": "violation", "interval": p["q"], "t": t, "i": i,
                    "class": req[0], "requirement": req[1]}
    return None


def _check_interval_pair(meta, runs, grid, patterns, flags, t, i, w_t, w_t2,
                         t1, t2, delta):
    final = meta.final_patterns
    k = meta.k
    r = t - t1
    center_t = (w_t >> k) & 1
    for (is_final, j1, j2) in runs:
        g1, g2 = grid[j1], grid[j2]
        if is_final and g1 + t1 <= i <= g2 - t1:
            # class A
            if w_t2 not in final:
                return ("A", "A1")
            if w_t not in final:
                return ("A", "A2")
            if center_t != meta.f_fwd((w_t2 >> k) & 1, (t - t2) & 1, 0):
                return ("A", "A3")
            return None
    for (is_final, j1, j2) in runs:
        if not is_final:
            continue
        g1, g2 = grid[j1], grid[j2]
        side = None
        if g1 - r <= i <= g1 + t1 - delta - 1:
            side, anchor_zone = "left", [j for j in range(j1, j2 + 1)
                                         if grid[j] <= g1 + t1 - delta]
        elif g2 - t1 + delta + 1 <= i <= g2 + r:
            side, anchor_zone = "right", [j for j in range(j2, j1 - 1, -1)
                                          if grid[j] >= g2 - t1 + delta]
        if side is None:
            continue
        others_ok = True
        anchor_end = g1 if side == "left" else g2
        for (o_final, o1, o2) in runs:
            if not o_final or (o1, o2) == (j1, j2):
                continue
            other = grid[o2] if side == "left" else grid[o1]
            if not abs(anchor_end - i) < abs(other - i) - delta:
                others_ok = False
                break
        if not others_ok:
            continue
        # class B
        if w_t not in final:
            return ("B", "B1")
        anchor = min(anchor_zone,
                     key=lambda j: (abs(grid[j] - i), abs(grid[j] - g1)))
        pred = meta.f_fwd((patterns[anchor] >> k) & 1, (t - t1) & 1,
                          abs(i - grid[anchor]) & 1)
        if center_t != pred:
            return ("B", "B2")
        return None
    for (is_final, j1, j2) in runs:
        if is_final:
            continue
        g1, g2 = grid[j1], grid[j2]
        if not g1 <= i <= g2:
            continue
        if abs(i - (g1 + 1)) <= r or abs(i - (g2 - 1)) <= r:
            continue
        # class C
        if w_t in final:
            return ("C", "C1")
        anchor = min(range(j1, j2 + 1), key=lambda j: (abs(grid[j] - i), j))
        pred = meta.h_fwd(patterns[anchor], (t - t1) & 1, abs(i - grid[anchor]))
        if w_t != pred:
            return ("C", "C2")
        return None
    return None
