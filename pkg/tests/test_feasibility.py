import itertools
import random

from ecatest import bruteforce, feasibility
from ecatest.core import Configuration, evolve
from ecatest.rules import builtin_meta, window_pattern


def test_image_member_or():
    # 1-runs must have grown to length 2t+1
    assert feasibility.image_member("or", [0] * 10, 3)
    assert feasibility.image_member("or", [1] * 10, 3)
    assert feasibility.image_member("or", [1, 1, 1, 1, 1, 1, 1, 0, 0, 0], 3)
    assert not feasibility.image_member("or", [1, 1, 1, 0, 0, 0, 0, 0, 0, 0], 3)
    assert feasibility.image_member("and", [0, 0, 0, 0, 0, 0, 0, 1, 1, 1], 3)


def test_image_member_maj_margins():
    # a block flanked by singletons needs 2 + sides*t cells
    t = 2
    assert feasibility.image_member("maj", [0, 1, 0, 1] * 3, t)  # alternating
    assert feasibility.image_member("maj", [0, 0, 1, 1, 0, 0, 1, 1], t)  # blocks
    assert feasibility.image_member("maj", [1] * 6 + [0, 1, 0, 1, 0], t)
    assert not feasibility.image_member("maj", [1] * 5 + [0, 1, 0, 1, 0], t)


def test_image_member_fih_trails():
    t = 1
    # long run needs alternating flanks and t+1 trail cells
    assert feasibility.image_member("fih", [0, 0, 0, 1, 0, 0, 1], t)
    assert not feasibility.image_member("fih", [0, 0, 0, 1, 1, 0, 1], t)
    # two long runs too close
    assert not feasibility.image_member("fih", [0, 0, 0, 1, 1, 1] + [0, 1] * 3, t)
    assert feasibility.image_member("fih", [0] * 8, t)  # constant flips whole


def test_image_member_matches_bruteforce():
    # direct cross-check of the row characterizations against enumeration
    rng = random.Random(0)
    for name in ("or", "and", "maj", "min", "fih", "fuh"):
        meta = builtin_meta(name)
        for n in (6, 8, 9):
            for t in (1, 2, 3, 5):
                reachable = {
                    evolve(Configuration([(s >> j) & 1 for j in range(n)]),
                           meta.rule, t + 1).config(t).to_string()
                    for s in range(1 << n)
                }
                for s in range(1 << n):
                    row = [(s >> j) & 1 for j in range(n)]
                    claimed = feasibility.image_member(name, row, t)
                    truth = "".join(map(str, row)) in reachable
                    assert claimed == truth, (name, n, t, row, claimed, truth)


def test_known_cells_conflict():
    # overlapping windows that disagree are infeasible
    meta = builtin_meta("maj")
    res = feasibility.feasible_cyclic(meta, (0, 2), (0b111, 0b000), 2, 6)
    assert not res
    assert "disagree" in res.reason


def test_full_coverage_uses_exact_membership():
    meta = builtin_meta("maj")
    n, t1 = 12, 20
    row = Configuration.alternating(n).bits.tolist()
    grid = tuple(range(0, n, 2))
    pats = tuple(window_pattern(Configuration(row).bits, g, 1) for g in grid)
    assert feasibility.feasible_cyclic(meta, grid, pats, t1, n)
    # odd ring: a fully alternating view is impossible
    row13 = (Configuration.alternating(12).bits.tolist() + [0])
    grid13 = tuple(range(13))
    pats13 = tuple(window_pattern(Configuration(row13).bits, g, 1)
                   for g in grid13)
    res = feasibility.feasible_cyclic(meta, grid13, pats13, 20, 13)
    assert not res


def test_equivalence_exhaustive_small():
    rng = random.Random(1)
    mismatches = 0
    for name in ("maj", "or"):
        meta = builtin_meta(name)
        k = meta.k
        for n, gsize, t1 in [(8, 2, 3), (10, 3, 2), (12, 4, 4)]:
            grid = tuple(sorted({j * n // gsize for j in range(gsize)}))
            for pats in itertools.product(range(1 << (2 * k + 1)),
                                          repeat=len(grid)):
                fast = bool(feasibility.feasible_cyclic(meta, grid, pats, t1, n))
                slow = bruteforce.feasible(grid, pats, t1, meta.rule, n, k)
                mismatches += fast != slow
    assert mismatches == 0


def test_structural_path_never_rejects_evolving():
    # large sparse grids take the structural path; genuine grid views pass
    rng = random.Random(2)
    for name in ("maj", "min", "fih", "fuh"):
        meta = builtin_meta(name)
        for _ in range(30):
            n = rng.randrange(300, 800)
            t1 = rng.randrange(10, 40)
            delta = rng.randrange(6, 12)  # sparse: free cells exceed the cap
            env = evolve(Configuration.random(n, rng), meta.rule, t1 + 1)
            grid = tuple(range(0, n - delta + 1, delta))
            pats = tuple(window_pattern(env.row(t1), g, meta.k) for g in grid)
            assert feasibility.feasible_cyclic(meta, grid, pats, t1, n), name


def test_segment_never_rejects_evolving():
    rng = random.Random(3)
    for name in ("maj", "or", "fih"):
        meta = builtin_meta(name)
        for _ in range(20):
            n = rng.randrange(400, 900)
            t1 = rng.randrange(5, 25)
            env = evolve(Configuration.random(n, rng), meta.rule, t1 + 1)
            lo = rng.randrange(0, n // 2)
            grid = list(range(lo, lo + 120, rng.randrange(1, 5)))
            pats = [window_pattern(env.row(t1), g % n, meta.k) for g in grid]
            assert feasibility.feasible_segment(meta, grid, pats, t1), name


def test_segment_rejects_obvious_contradiction():
    meta = builtin_meta("or")
    # isolated hot window deep between cold ones with big t1
    grid = [0, 4, 8]
    pats = [0, 1, 0]
    assert not feasibility.feasible_segment(meta, grid, pats, 10)
