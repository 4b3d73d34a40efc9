"""Grid feasibility: can a partial configuration at time t1 be completed to
a row of a genuine evolution?

The supplied rules fall into three families whose t-step-reachable rows
have a clean structural description:

* or/and: every maximal run of the absorbing value has length at least
  min(2t+1, n) (or the row is constant).
* maj/min: every maximal constant run of length >= 2 needs a margin of t
  cells for each side that touches a singleton run (isolated cells shrink,
  blocks grow one cell per step per alternating side).
* fih/fuh: every maximal run of length >= 3 sheds its interior one layer
  per step, leaving alternating trails; runs of length >= 3 therefore carry
  alternating flanks of length t+1 and consecutive long runs sit at
  boundary distance >= 2t+1.

check_feasible dispatches on how much of the ring the grid windows pin
down: fully covered rows get the exact membership test, small gaps are
closed by enumeration (still exact), and large sparse grids fall back to
structural conditions that every genuine evolution satisfies (so the
tester never rejects an evolving environment there).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .rules import RuleMeta

FREE_ENUM_MAX = 12

FAMILY = {"or": "or", "and": "or", "maj": "maj", "min": "maj",
          "fih": "fih", "fuh": "fih"}


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.feasible


FEASIBLE = FeasibilityResult(True)


def infeasible(reason: str) -> FeasibilityResult:
    return FeasibilityResult(False, reason)


# ---------------------------------------------------------------------------
# Run structure and image membership for full rows
# ---------------------------------------------------------------------------

def cyclic_runs(row: list[int]) -> list[tuple[int, int, int]]:
    """Maximal constant runs of a cyclic row as (start, length, value)."""
    n = len(row)
    start = None
    for i in range(n):
        if row[i] != row[i - 1]:
            start = i
            break
    if start is None:
        return [(0, n, row[0])]
    runs = []
    i = start
    covered = 0
    while covered < n:
        v = row[i]
        length = 1
        while length < n - covered and row[(i + length) % n] == v:
            length += 1
        runs.append((i, length, v))
        covered += length
        i = (i + length) % n
    return runs


def _or_member(row: list[int], t: int, hot: int) -> bool:
    n = len(row)
    runs = cyclic_runs(row)
    if len(runs) == 1:
        return True
    need = min(2 * t + 1, n)
    return all(l >= need for _, l, v in runs if v == hot)


def _maj_member(row: list[int], t: int) -> bool:
    runs = cyclic_runs(row)
    if len(runs) == 1:
        return True
    count = len(runs)
    for j, (_, length, _) in enumerate(runs):
        if length == 1:
            continue
        sides = (runs[(j - 1) % count][1] == 1) + (runs[(j + 1) % count][1] == 1)
        if length < 2 + sides * t:
            return False
    return True


def _fih_member(row: list[int], t: int) -> bool:
    n = len(row)
    runs = cyclic_runs(row)
    if len(runs) == 1:
        return True
    long_ix = [j for j, (_, l, _) in enumerate(runs) if l >= 3]
    if not long_ix:
        return True
    if len(long_ix) == 1:
        _, length, _ = runs[long_ix[0]]
        if n - length < 2 * t + 1:
            return False
    else:
        for a in range(len(long_ix)):
            s1, l1, _ = runs[long_ix[a]]
            s2, _, _ = runs[long_ix[(a + 1) % len(long_ix)]]
            end1 = (s1 + l1 - 1) % n
            if (s2 - end1) % n < 2 * t + 1:
                return False
    for j in long_ix:
        start, length, x = runs[j]
        end = (start + length - 1) % n
        for d in range(1, t + 2):
            expect = x ^ (d & 1)
            if row[(end + d) % n] != expect or row[(start - d) % n] != expect:
                return False
    return True


def image_member(family: str, row: list[int], t: int) -> bool:
    """Is `row` reachable in exactly t steps under a rule of this family?"""
    if t == 0:
        return True
    if family == "or":
        return _or_member(row, t, hot=1)
    if family == "and":
        return _or_member(row, t, hot=0)
    if family in ("maj", "min"):
        return _maj_member(row, t)
    if family in ("fih", "fuh"):
        return _fih_member(row, t)
    raise ValueError(f"no image characterization for family {family!r}")


# ---------------------------------------------------------------------------
# Known-cell assembly
# ---------------------------------------------------------------------------

def known_cells(n: int, k: int, grid, patterns) -> np.ndarray | None:
    """Merge the grid windows into a per-cell map (-1 = unobserved).

    Returns None when overlapping windows disagree.
    """
    known = np.full(n, -1, dtype=np.int8)
    width = 2 * k + 1
    for g, pat in zip(grid, patterns):
        for j in range(width):
            bit = (pat >> (width - 1 - j)) & 1
            c = (int(g) - k + j) % n
            if known[c] >= 0 and known[c] != bit:
                return None
            known[c] = bit
    return known


# ---------------------------------------------------------------------------
# Exact or/and feasibility (closed form, any n)
# ---------------------------------------------------------------------------

def _or_feasible(grid, hot_flags, t: int, n: int) -> FeasibilityResult:
    p = len(grid)
    if all(hot_flags) or not any(hot_flags):
        return FEASIBLE
    need = min(2 * t + 1, n)
    for j in range(p):
        if hot_flags[j] and not hot_flags[j - 1]:
            # j opens a maximal hot grid interval; find its end
            e = j
            while hot_flags[(e + 1) % p]:
                e = (e + 1) % p
            # cells strictly between the flanking cold grid points (the two
            # flanks coincide when only one grid window is cold)
            room = (grid[(e + 1) % p] - grid[(j - 1) % p] - 1) % n
            if room < need:
                return infeasible(
                    f"hot interval at grid {grid[j]} has room {room} < {need}")
    return FEASIBLE


# ---------------------------------------------------------------------------
# Structural necessary conditions (sparse grids, large n)
# ---------------------------------------------------------------------------

def _maj_structural(meta: RuleMeta, grid, patterns, t: int, n: int) -> FeasibilityResult:
    p = len(grid)
    if p < 2:
        return FEASIBLE
    fin = [pat in meta.final_patterns for pat in patterns]
    full = (1 << meta.width) - 1

    def gap(j):
        return (grid[(j + 1) % p] - grid[j]) % n

    # non-final chain: too-small gaps force the alternation phase through
    for j in range(p):
        if not fin[j] and not fin[(j + 1) % p]:
            d = gap(j)
            if d - 1 < 2 + 2 * t:
                expect = patterns[j] ^ (full if d & 1 else 0)
                if patterns[(j + 1) % p] != expect:
                    return infeasible(
                        f"phase break between non-final grid windows "
                        f"{grid[j]} and {grid[(j + 1) % p]}")
    if not any(fin):
        return FEASIBLE
    if all(fin):
        return FEASIBLE
    # every maximal final grid interval needs room for a margin-bearing block
    for j in range(p):
        if fin[j] and not fin[j - 1]:
            e = j
            while fin[(e + 1) % p]:
                e = (e + 1) % p
            left = (j - 1) % p
            right = (e + 1) % p
            room = (grid[right] - grid[left] - 1) % n
            if room < 2 + 2 * t:
                return infeasible(
                    f"final interval at grid {grid[j]} has room {room} < {2 + 2 * t}")
            # grid centers close to a flank share the flank block's value
            for flank, direction in ((left, 1), (right, -1)):
                zone = []
                idx = (flank + direction) % p
                while fin[idx]:
                    d = (grid[idx] - grid[flank]) % n if direction == 1 \
                        else (grid[flank] - grid[idx]) % n
                    if d > t:
                        break
                    zone.append((patterns[idx] >> meta.k) & 1)
                    idx = (idx + direction) % p
                if len(set(zone)) > 1:
                    return infeasible(
                        f"unequal centers within {t} of flank grid {grid[flank]}")
    return FEASIBLE


def _fih_structural(meta: RuleMeta, grid, patterns, t: int, n: int) -> FeasibilityResult:
    p = len(grid)
    if p < 2:
        return FEASIBLE
    fin = [pat in meta.final_patterns for pat in patterns]
    for j in range(p):
        if not fin[j] and not fin[(j + 1) % p]:
            d = (grid[(j + 1) % p] - grid[j]) % n
            # a run boundary between the two windows would need 2t+1 cells
            if d - 2 < 2 * t + 1 and patterns[(j + 1) % p] != patterns[j]:
                return infeasible(
                    f"distinct non-final windows {grid[j]} and "
                    f"{grid[(j + 1) % p]} too close for a run boundary")
    return FEASIBLE


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def feasible_cyclic(meta: RuleMeta, grid, patterns, t1: int, n: int) -> FeasibilityResult:
    """Feasibility of a cyclic grid view at time t1."""
    family = FAMILY[meta.name]
    known = known_cells(n, meta.k, grid, patterns)
    if known is None:
        return infeasible("overlapping windows disagree")
    if family == "or":
        hot = 1 if meta.name == "or" else 0
        flags = [bool((pat & 1) == hot) for pat in patterns]
        return _or_feasible(list(grid), flags, t1, n)
    free = np.flatnonzero(known < 0)
    if free.size == 0:
        if image_member(meta.name, known.tolist(), t1):
            return FEASIBLE
        return infeasible("fully determined row is not reachable")
    if free.size <= FREE_ENUM_MAX:
        row = known.tolist()
        for assignment in product((0, 1), repeat=free.size):
            for pos, bit in zip(free, assignment):
                row[pos] = bit
            if image_member(meta.name, row, t1):
                return FEASIBLE
        return infeasible("no completion of the grid view is reachable")
    if family == "maj":
        return _maj_structural(meta, list(grid), list(patterns), t1, n)
    return _fih_structural(meta, list(grid), list(patterns), t1, n)


def feasible_segment(meta: RuleMeta, grid, patterns, t1: int) -> FeasibilityResult:
    """Feasibility of an interval grid (test_wide); necessary conditions
    only, with run structure at the segment edges left unconstrained."""
    if len(grid) < 2:
        return FEASIBLE
    # reuse the cyclic machinery on a ring padded far beyond the segment,
    # so no wraparound constraint can fire across the open edges
    lo = min(grid) - meta.k
    shifted = [g - lo for g in grid]
    span = max(shifted) + meta.k + 1
    n_virtual = span + 4 * (t1 + meta.k + 2)
    family = FAMILY[meta.name]
    known = known_cells(n_virtual, meta.k, shifted, patterns)
    if known is None:
        return infeasible("overlapping windows disagree")
    if family == "or":
        # interior hot intervals only: both flanking cold windows visible
        hot = 1 if meta.name == "or" else 0
        flags = [bool((pat & 1) == hot) for pat in patterns]
        p = len(grid)
        need = 2 * t1 + 1
        for j in range(1, p):
            if flags[j] and not flags[j - 1]:
                e = j
                while e + 1 < p and flags[e + 1]:
                    e += 1
                if e + 1 < p:
                    room = grid[e + 1] - grid[j - 1] - 1
                    if room < need:
                        return infeasible(
                            f"hot interval at grid {grid[j]} has room "
                            f"{room} < {need}")
        return FEASIBLE
    fin = [pat in meta.final_patterns for pat in patterns]
    full = (1 << meta.width) - 1
    for j in range(len(grid) - 1):
        if fin[j] or fin[j + 1]:
            continue
        d = grid[j + 1] - grid[j]
        if family == "maj" and d - 1 < 2 + 2 * t1:
            expect = patterns[j] ^ (full if d & 1 else 0)
            if patterns[j + 1] != expect:
                return infeasible(
                    f"phase break between non-final grid windows "
                    f"{grid[j]} and {grid[j + 1]}")
        if family == "fih" and d - 2 < 2 * t1 + 1 and patterns[j + 1] != patterns[j]:
            return infeasible(
                f"distinct non-final windows {grid[j]} and {grid[j + 1]} "
                f"too close for a run boundary")
    # interior final intervals need block room, as on the ring
    p = len(grid)
    for j in range(1, p):
        if fin[j] and not fin[j - 1]:
            e = j
            while e + 1 < p and fin[e + 1]:
                e += 1
            if e + 1 < p and family == "maj":
                room = grid[e + 1] - grid[j - 1] - 1
                if room < 2 + 2 * t1:
                    return infeasible(
                        f"final interval at grid {grid[j]} has room "
                        f"{room} < {2 + 2 * t1}")
    return FEASIBLE
