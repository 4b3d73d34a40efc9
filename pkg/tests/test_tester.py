import random

import numpy as np
import pytest

from ecatest import tester
from ecatest.core import (
    Configuration,
    Environment,
    LazyEnvironment,
    evolve,
)
from ecatest.oracle import QueryOracle
from ecatest.rules import builtin_meta, window_pattern
from ecatest.tester import (
    FallbackPlan,
    GridView,
    ParameterError,
    Params,
    classify_pair,
    classify_row,
    grid_intervals,
    plan,
    raw_memberships,
    violation_check,
)


def test_plan_flagship_example():
    pr = plan(9600, 9600, 0.1, 1, "paper")
    assert isinstance(pr, Params)
    assert pr.delta == 2
    assert pr.t1 == 300
    assert pr.t2 == 302
    assert len(pr.grid) == 4800
    assert pr.s == 60
    assert pr.total_query_budget() == 14760


def test_plan_fallback_example():
    pr = plan(100, 100, 0.1, 1, "paper")
    assert isinstance(pr, FallbackPlan)


def test_plan_sample_count_bound():
    for eps in (0.05, 0.1, 0.2, 0.37, 0.5):
        pr = plan(4000, 4000, eps, 1, "paper")
        s = pr.s if isinstance(pr, Params) else pr.s
        assert s >= 2 * 3 / eps


def test_plan_rejects_bad_args():
    with pytest.raises(ParameterError):
        plan(100, 100, 0.0, 1)
    with pytest.raises(ParameterError):
        plan(100, 100, 1.5, 1)
    with pytest.raises(ParameterError):
        plan(2, 100, 0.1, 1)


def _gv(meta, patterns, t1=20, n=None, delta=None):
    size = len(patterns)
    n = n or size * 4
    grid = tuple(j * n // size for j in range(size))
    pr = Params(n=n, m=10 * n, eps=0.2, k=meta.k, profile="lab", b0=4, b1=2,
                b2=3, delta=delta or n // size, t1=t1, t2=t1 + (delta or n // size),
                grid=grid, s=10)
    return GridView(t1, meta.k, grid, tuple(patterns)), pr


def test_grid_intervals_homogeneous():
    meta = builtin_meta("maj")
    gv, _ = _gv(meta, [0b111, 0b110, 0b011, 0b000])
    iv = grid_intervals(meta, gv)
    assert iv.homogeneous == "final"
    assert iv.f_intervals == () and iv.bf_intervals == ()
    gv, _ = _gv(meta, [0b101, 0b010, 0b101, 0b010])
    assert grid_intervals(meta, gv).homogeneous == "nonfinal"


def test_grid_intervals_mixed():
    meta = builtin_meta("maj")
    gv, _ = _gv(meta, [0b111, 0b111, 0b010, 0b111])
    iv = grid_intervals(meta, gv)
    assert iv.homogeneous is None
    assert iv.bf_intervals == ((2, 2),)
    assert iv.f_intervals == ((3, 1),)   # wraps: grid points 3, 0, 1
    gv, _ = _gv(meta, [0b111, 0b010, 0b111, 0b010])
    iv = grid_intervals(meta, gv)
    assert len(iv.f_intervals) == 2 and len(iv.bf_intervals) == 2
    assert all(j1 == j2 for (j1, j2) in iv.f_intervals + iv.bf_intervals)


def test_classify_homogeneous_final_all_A():
    meta = builtin_meta("maj")
    gv, pr = _gv(meta, [0b111] * 6)
    iv = grid_intervals(meta, gv)
    rng = random.Random(0)
    for _ in range(50):
        t = rng.randrange(pr.t2 + 1, pr.m)
        i = rng.randrange(pr.n)
        assert classify_pair(meta, gv, iv, pr, t, i).kind == "A"


def test_classify_homogeneous_nonfinal_all_C():
    meta = builtin_meta("maj")
    gv, pr = _gv(meta, [0b010, 0b101, 0b010, 0b101], n=16)
    iv = grid_intervals(meta, gv)
    rng = random.Random(0)
    for _ in range(50):
        t = rng.randrange(pr.t2 + 1, pr.m)
        assert classify_pair(meta, gv, iv, pr, t,
                             rng.randrange(pr.n)).kind == "C"


def test_classify_deep_C_and_U():
    meta = builtin_meta("maj")
    # one non-final interval between final ones on a large ring
    n = 400
    grid = tuple(range(0, n, 4))
    pats = []
    for g in grid:
        pats.append(0b010 if 100 <= g <= 200 else 0b111)
    pr = Params(n=n, m=4 * n, eps=0.2, k=1, profile="lab", b0=4, b1=2, b2=3,
                delta=4, t1=40, t2=44, grid=grid, s=10)
    gv = GridView(40, 1, grid, tuple(pats))
    iv = grid_intervals(meta, gv)
    # deep inside the non-final interval, shortly after t2: class C
    cls = classify_pair(meta, gv, iv, pr, 50, 150)
    assert cls.kind == "C"
    # the width-delta gap between the A and B zones is uncertain:
    # A ends at g2 - t1 = 56 and B starts at g2 - t1 + delta + 1 = 61
    for i in (57, 58, 59, 60):
        in_a, in_b, in_c = raw_memberships(meta, gv, iv, pr, 50, i)
        assert not in_a and not in_b and not in_c
    assert raw_memberships(meta, gv, iv, pr, 50, 56)[0]
    assert raw_memberships(meta, gv, iv, pr, 50, 61)[1]


def test_classify_disjoint_and_vector_agreement():
    rng = random.Random(7)
    for name in ("maj", "fih", "or"):
        meta = builtin_meta(name)
        for _ in range(6):
            n = rng.randrange(60, 140)
            m = 6 * n
            env = evolve(Configuration.random(n, rng), meta.rule, 60)
            pr0 = plan(n, m, 0.3, meta.k, "lab")
            if isinstance(pr0, FallbackPlan):
                continue
            t1 = min(pr0.t1, 50)
            pr = Params(n=n, m=m, eps=0.3, k=meta.k, profile="lab", b0=4,
                        b1=2, b2=3, delta=pr0.delta, t1=t1, t2=t1 + pr0.delta,
                        grid=pr0.grid, s=pr0.s)
            pats = tuple(window_pattern(env.row(t1), g, meta.k)
                         for g in pr.grid)
            gv = GridView(t1, meta.k, pr.grid, pats)
            iv = grid_intervals(meta, gv)
            for _ in range(8):
                t = rng.randrange(pr.t2 + 1, min(pr.m, pr.t2 + 4 * n))
                codes = classify_row(meta, gv, iv, pr, t)
                for i in rng.sample(range(n), 12):
                    a, b, c = raw_memberships(meta, gv, iv, pr, t, i)
                    assert a + b + c <= 1, (name, n, t1, t, i)
                    kind = classify_pair(meta, gv, iv, pr, t, i).kind
                    assert kind == "ABCU"[codes[i]]
                    assert (kind == "A") == a and (kind == "B") == b \
                        and (kind == "C") == c


def test_violation_planted_nonfinal_window_in_A():
    meta = builtin_meta("maj")
    gv, pr = _gv(meta, [0b111] * 8)
    cls = tester.PairClass("A")
    # requirement 2: the sampled window at time t must be final
    assert violation_check(meta, cls, pr.t2 + 3, 5, 0b010, 0b111, gv, pr) == "A2"
    assert violation_check(meta, cls, pr.t2 + 3, 5, 0b111, 0b010, gv, pr) == "A1"
    # requirement 3: f-prediction from t2 (identity for maj)
    assert violation_check(meta, cls, pr.t2 + 3, 5, 0b000, 0b111, gv, pr) == "A3"
    assert violation_check(meta, cls, pr.t2 + 3, 5, 0b111, 0b111, gv, pr) is None


def test_violation_all_ones_as_min_odd_gap():
    # the all-ones environment under min flips every step; a frozen window
    # violates the f-prediction at odd time gaps
    mn = builtin_meta("min")
    gv, pr = _gv(mn, [0b111] * 8)
    cls = tester.PairClass("A")
    t = pr.t2 + 3  # odd gap from t2
    assert (t - pr.t2) % 2 == 1
    assert violation_check(mn, cls, t, 5, 0b111, 0b111, gv, pr) == "A3"
    assert violation_check(mn, cls, t, 5, 0b000, 0b111, gv, pr) is None


def test_violation_check_rejects_U():
    meta = builtin_meta("maj")
    gv, pr = _gv(meta, [0b111] * 8)
    with pytest.raises(ParameterError):
        violation_check(meta, tester.PairClass("U"), pr.t2 + 1, 0,
                        0b111, 0b111, gv, pr)


def test_meta_tester_accepts_evolving():
    rng = random.Random(11)
    for name in ("maj", "min", "or", "and", "fih", "fuh"):
        meta = builtin_meta(name)
        for profile in ("paper", "lab"):
            n = rng.randrange(40, 200)
            m = rng.randrange(40, 200)
            env = evolve(Configuration.random(n, rng), meta.rule, m)
            v = tester.test(QueryOracle(env), meta, 0.25, random.Random(5),
                            profile)
            assert v.accepted, (name, profile, n, m, v.reason)


def test_meta_tester_query_budget_exact():
    meta = builtin_meta("maj")
    rng = random.Random(12)
    for _ in range(10):
        n = rng.randrange(60, 300)
        m = rng.randrange(60, 300)
        eps = rng.choice([0.1, 0.2, 0.4])
        env = evolve(Configuration.random(n, rng), meta.rule, m)
        oracle = QueryOracle(env)
        v = tester.test(oracle, meta, eps, random.Random(1), "lab")
        if v.variant != "meta":
            continue
        pr = plan(n, m, eps, 1, "lab")
        assert oracle.stats().total == pr.total_query_budget()
        assert oracle.stats().temporal_max == 3 * len(pr.grid)


def test_meta_tester_non_adaptive():
    # the query multiset depends only on the shape, eps and seed
    meta = builtin_meta("maj")
    rng = random.Random(13)
    n, m = 120, 120
    env_a = evolve(Configuration.random(n, rng), meta.rule, m)
    env_b = evolve(Configuration.random(n, rng), meta.rule, m)
    logs = []
    for env in (env_a, env_b):
        oracle = QueryOracle(env, record=True)
        v = tester.test(oracle, meta, 0.2, random.Random(99), "lab")
        assert v.accepted
        logs.append(sorted(oracle.query_log))
    assert logs[0] == logs[1]


def test_meta_tester_rejects_infeasible_grid_before_sampling():
    meta = builtin_meta("maj")
    # rows equal to an odd-ring alternation-with-defect that no evolution
    # reaches by t1: build an explicitly infeasible row at t1
    n, m = 121, 600
    rows = np.tile(Configuration.alternating(120).bits, (m, 1))
    rows = np.concatenate([rows, rows[:, :1]], axis=1)  # odd ring, all bF-ish
    env = Environment(rows)
    oracle = QueryOracle(env)
    v = tester.test(oracle, meta, 0.2, random.Random(0), "lab")
    assert not v.accepted
    assert v.reason["kind"] == "infeasible-grid"
    pr = plan(n, m, 0.2, 1, "lab")
    assert oracle.stats().total == 3 * len(pr.grid)  # no step-2 queries


def test_meta_tester_rejects_complemented_suffix():
    meta = builtin_meta("maj")
    rng = random.Random(14)
    rejects = 0
    for trial in range(30):
        n = m = 96
        env = evolve(Configuration.random(n, rng), meta.rule, m)
        pr = plan(n, m, 0.2, 1, "lab")
        rows = env.rows.copy()
        rows[pr.t2 + 1:] ^= 1
        v = tester.test(QueryOracle(Environment(rows)), meta, 0.2,
                        random.Random(trial), "lab")
        rejects += not v.accepted
    assert rejects >= 20


def test_fallback_accepts_evolving_and_rejects_suffix():
    meta = builtin_meta("maj")
    rng = random.Random(15)
    env = evolve(Configuration.random(24, rng), meta.rule, 30)
    v = tester.test_fallback(QueryOracle(env), meta.rule, 0.25,
                             random.Random(0))
    assert v.accepted
    assert v.stats.total == 24 + v.params["s"]
    rows = env.rows.copy()
    rows[15:] ^= 1
    rejected = sum(
        not tester.test_fallback(QueryOracle(Environment(rows)), meta.rule,
                                 0.25, random.Random(t)).accepted
        for t in range(40))
    assert rejected >= 35  # half the rows mismatch; miss odds (1/2)^s


def test_fallback_m2_samples_row_one():
    meta = builtin_meta("or")
    env = evolve(Configuration.from_string("010011010"), meta.rule, 2)
    oracle = QueryOracle(env, record=True)
    assert tester.test_fallback(oracle, meta.rule, 0.5, random.Random(3)).accepted
    assert {t for (t, _) in oracle.query_log} == {0, 1}


def test_trivial_all1():
    rule = builtin_meta("or").rule  # any env that is all ones after row 0
    env = evolve(Configuration.ones(20), rule, 15)
    v = tester.test_trivial(QueryOracle(env), "all1", 0.2, random.Random(0))
    assert v.accepted
    rows = env.rows.copy()
    rows[7, 3] = 0
    hits = sum(not tester.test_trivial(QueryOracle(Environment(rows)), "all1",
                                       0.2, random.Random(t)).accepted
               for t in range(30))
    assert hits >= 1  # single flipped cell is found only occasionally


def test_trivial_nor_accepts_evolving():
    rng = random.Random(16)
    from ecatest.rules import trivial_rule
    nor = trivial_rule("nor")
    for _ in range(25):
        n = rng.randrange(7, 60)
        m = rng.randrange(3, 60)
        env = evolve(Configuration.random(n, rng), nor, m)
        v = tester.test_trivial(QueryOracle(env), "nor", 0.3, random.Random(1))
        assert v.accepted, (n, m, v.reason)


def test_nor_period_two_exhaustive():
    # period-2 from time 1 on, enumerated over every initial configuration
    from ecatest.rules import trivial_rule
    from ecatest.verifier import all_configs, evolve_all
    nor = trivial_rule("nor")
    for n in range(3, 15):
        env = evolve_all(all_configs(n), nor, 5)
        for t in range(1, 4):
            assert np.array_equal(env[:, t + 2], env[:, t]), (n, t)


def test_trivial_nor_soundness_against_distance_oracle():
    # the window tester rejects certified far instances at rate >= 2/3
    from ecatest import bruteforce
    from ecatest.rules import trivial_rule
    nor = trivial_rule("nor")
    rng = random.Random(23)
    rejects = trials = 0
    for tr in range(60):
        n, m = 14, 20
        env = evolve(Configuration.random(n, rng), nor, m)
        rows = env.rows.copy()
        if tr % 2:
            rows[10:] ^= 1
        else:
            noise = random.Random(tr)
            for t in range(1, m):
                for i in range(n):
                    if noise.random() < 0.35:
                        rows[t, i] ^= 1
        far = Environment(rows)
        if bruteforce.exact_distance(far, nor).distance <= 0.2:
            continue
        trials += 1
        v = tester.test_trivial(QueryOracle(far), "nor", 0.2,
                                random.Random(tr))
        rejects += not v.accepted
    assert trials >= 40
    assert rejects / trials >= 2 / 3


def test_trivial_nor_rejects_forbidden_pattern():
    from ecatest.rules import trivial_rule
    nor = trivial_rule("nor")
    env = evolve(Configuration.from_string("0011100111001110"), nor, 12)
    rows = env.rows.copy()
    rows[5:, :] = 0
    rows[5:, 3] = 1
    rows[5:, 5] = 1   # pattern 101 at every t >= 5
    rejected = sum(
        not tester.test_trivial(QueryOracle(Environment(rows)), "nor", 0.3,
                                random.Random(t)).accepted
        for t in range(20))
    assert rejected >= 16


def test_wide_accepts_evolving_and_respects_interval_edges():
    meta = builtin_meta("maj")
    rng = random.Random(17)
    n, m, eps = 6000, 40, 0.3
    env = LazyEnvironment(Configuration.random(n, rng), meta.rule, m)
    oracle = QueryOracle(env, record=True)
    v = tester.test_wide(oracle, meta, eps, random.Random(2), "lab")
    assert v.accepted and v.variant == "wide"
    wp = tester.plan_wide(n, m, eps, 1, "lab")
    n_prime, t1 = wp["n_prime"], wp["t1"]
    count = wp["count"]
    for (t, i) in oracle.query_log:
        if t <= wp["t2"]:
            continue
        q = min(i // n_prime, count - 1)
        i0 = q * n_prime
        j0 = (q + 1) * n_prime - 1 if q < count - 1 else n - 1
        # sampled windows never reach within t+k of the interval edge
        assert i0 + t + 1 <= i <= j0 - t - 1 + 0, (t, i, q)


def test_wide_delegates_when_precondition_fails():
    meta = builtin_meta("maj")
    rng = random.Random(18)
    env = evolve(Configuration.random(64, rng), meta.rule, 64)
    v = tester.test_wide(QueryOracle(env), meta, 0.3, random.Random(0), "lab")
    assert v.accepted
    assert v.delegated_from is not None


def test_tester_delegates_to_fallback_on_small_m():
    meta = builtin_meta("maj")
    rng = random.Random(19)
    env = evolve(Configuration.random(50, rng), meta.rule, 6)
    v = tester.test(QueryOracle(env), meta, 0.2, random.Random(0), "paper")
    assert v.accepted
    assert v.variant == "fallback"
    assert v.delegated_from is not None
