"""Machine checks of the six rule conditions for a RuleMeta.

Conditions 1 and 2 are window-local and checked over all (2k+3)-bit
windows, which is strictly stronger than quantifying over evolving
environments.  Conditions 3-6 quantify over unbounded environments, so
they are checked exhaustively at small scale: every initial configuration
of every length up to n_max, evolved for m_max steps (3-4), and every
configuration with every valid argument tuple (5-6).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Rule
from .rules import (
    LEFT,
    RIGHT,
    RuleMeta,
    pattern_str,
    plant_raw,
    row_pattern_indices,
    window_pattern,
)


@dataclass
class CondResult:
    condition: int
    passed: bool
    counterexample: Optional[dict] = None

    def __bool__(self) -> bool:
        return self.passed

    def describe(self) -> str:
        if self.passed:
            return f"Condition {self.condition}: PASS"
        parts = ", ".join(f"{k}={v}" for k, v in self.counterexample.items())
        return f"Condition {self.condition}: FAIL ({parts})"


def all_configs(n: int) -> np.ndarray:
    """All 2^n rows of length n, row s = binary digits of s (MSB first)."""
    s = np.arange(1 << n, dtype=np.int64)
    return ((s[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.uint8)


def evolve_all(configs: np.ndarray, rule: Rule, m: int) -> np.ndarray:
    """Evolve a batch of rows for m steps; result is (batch, m+1, n)."""
    table = rule.table_array()
    batch, n = configs.shape
    env = np.empty((batch, m + 1, n), dtype=np.uint8)
    env[:, 0] = configs
    for t in range(1, m + 1):
        prev = env[:, t - 1]
        idx = 4 * np.roll(prev, 1, axis=1) + 2 * prev + np.roll(prev, -1, axis=1)
        env[:, t] = table[idx]
    return env


def batch_patterns(env: np.ndarray, k: int) -> np.ndarray:
    """Window pattern index at every (config, t, i)."""
    idx = np.zeros(env.shape, dtype=np.int64)
    for d in range(-k, k + 1):
        idx = (idx << 1) | np.roll(env, -d, axis=2).astype(np.int64)
    return idx


# ---------------------------------------------------------------------------
# Conditions 1-2: exhaustive window checks
# ---------------------------------------------------------------------------

def _window_step(bits: tuple[int, ...], rule: Rule) -> tuple[int, ...]:
    return tuple(rule(bits[j], bits[j + 1], bits[j + 2])
                 for j in range(len(bits) - 2))


def verify_cond1(meta: RuleMeta) -> CondResult:
    """Finality persists: a final center window stays final after one step."""
    width = 2 * meta.k + 3
    inner_mask = (1 << meta.width) - 1
    for w in range(1 << width):
        bits = tuple((w >> (width - 1 - j)) & 1 for j in range(width))
        center = (w >> 1) & inner_mask
        if center not in meta.final_patterns:
            continue
        nxt = _window_step(bits, meta.rule)
        nxt_pattern = int("".join(map(str, nxt)), 2)
        if nxt_pattern not in meta.final_patterns:
            return CondResult(1, False, {
                "window": pattern_str(w, width),
                "next_center": pattern_str(nxt_pattern, meta.width),
            })
    return CondResult(1, True)


def verify_cond2(meta: RuleMeta) -> CondResult:
    """Finality is infectious: a non-final center becomes final in one step
    iff a neighboring window is final."""
    width = 2 * meta.k + 3
    inner_mask = (1 << meta.width) - 1
    for w in range(1 << width):
        bits = tuple((w >> (width - 1 - j)) & 1 for j in range(width))
        center = (w >> 1) & inner_mask
        if center in meta.final_patterns:
            continue
        left = (w >> 2) & inner_mask
        right = w & inner_mask
        nxt = _window_step(bits, meta.rule)
        nxt_pattern = int("".join(map(str, nxt)), 2)
        becomes_final = nxt_pattern in meta.final_patterns
        has_final_neighbor = (left in meta.final_patterns
                              or right in meta.final_patterns)
        if becomes_final != has_final_neighbor:
            return CondResult(2, False, {
                "window": pattern_str(w, width),
                "becomes_final": becomes_final,
                "has_final_neighbor": has_final_neighbor,
            })
    return CondResult(2, True)


# ---------------------------------------------------------------------------
# Conditions 3-4: exhaustive small-environment sweeps (vectorized per n)
# ---------------------------------------------------------------------------

def verify_cond3(meta: RuleMeta, n_max: int = 12, m_max: int = 12) -> CondResult:
    """Final-value prediction from the unique closest final ancestor."""
    if n_max > 16:
        raise ValueError("n_max capped at 16 (enumeration budget)")
    fmask = meta.final_mask()
    for n in range(3, n_max + 1):
        env = evolve_all(all_configs(n), meta.rule, m_max)
        pats = batch_patterns(env, meta.k)
        final = fmask[pats]                       # (S, m+1, n)
        m = m_max + 1
        for t_anc in range(m - 1):
            f_anc = final[:, t_anc]               # (S, n)
            # distance to nearest final location and whether it is unique
            mindist = np.full(f_anc.shape, n, dtype=np.int16)
            unique = np.zeros(f_anc.shape, dtype=bool)
            offset = np.zeros(f_anc.shape, dtype=np.int16)
            for d in range(n // 2 + 1):
                if d == 0:
                    cnt = f_anc.astype(np.int8)
                    src_off = np.zeros(f_anc.shape, dtype=np.int16)
                elif 2 * d == n:
                    cnt = np.roll(f_anc, -d, axis=1).astype(np.int8)
                    src_off = np.full(f_anc.shape, d, dtype=np.int16)
                else:
                    left = np.roll(f_anc, d, axis=1)
                    right = np.roll(f_anc, -d, axis=1)
                    cnt = left.astype(np.int8) + right.astype(np.int8)
                    src_off = np.where(right, d, -d).astype(np.int16)
                fresh = (mindist == n) & (cnt > 0)
                mindist[fresh] = d
                unique[fresh] = cnt[fresh] == 1
                offset[fresh] = src_off[fresh]
            cols = np.arange(n)
            anc_col = (cols[None, :] + offset) % n
            src_val = np.take_along_axis(env[:, t_anc], anc_col, axis=1)
            for t in range(t_anc + 1, m):
                gap = t - t_anc
                mask = unique & (mindist <= gap) & final[:, t]
                if not mask.any():
                    continue
                pred = (src_val
                        ^ (meta.f_time_mask & (gap & 1))
                        ^ (meta.f_dist_mask & (mindist & 1))).astype(np.uint8)
                bad = mask & (env[:, t] != pred)
                if bad.any():
                    s, i = np.argwhere(bad)[0]
                    return CondResult(3, False, {
                        "n": n, "initial": int(s), "t": int(t),
                        "i": int(i), "t_anc": int(t_anc),
                        "i_anc": int((i + offset[s, i]) % n),
                    })
    return CondResult(3, True)


def verify_cond4(meta: RuleMeta, n_max: int = 12, m_max: int = 12) -> CondResult:
    """Non-final window transport when every ancestor is non-final."""
    if n_max > 16:
        raise ValueError("n_max capped at 16 (enumeration budget)")
    fmask = meta.final_mask()
    htab = meta.h_table
    for n in range(3, n_max + 1):
        env = evolve_all(all_configs(n), meta.rule, m_max)
        pats = batch_patterns(env, meta.k)
        nonfinal = ~fmask[pats]
        m = m_max + 1
        for t_anc in range(m - 1):
            all_bf = nonfinal[:, t_anc].copy()    # AND over the light cone
            radius = 0
            for t in range(t_anc + 1, m):
                gap = t - t_anc
                while radius < min(gap, n // 2):
                    radius += 1
                    all_bf &= np.roll(nonfinal[:, t_anc], radius, axis=1)
                    all_bf &= np.roll(nonfinal[:, t_anc], -radius, axis=1)
                mask = all_bf & nonfinal[:, t]
                if not mask.any():
                    continue
                for ell in range(n):
                    short = min(ell, n - ell)
                    if short > gap:
                        continue
                    src = np.roll(pats[:, t_anc], ell, axis=1)
                    pred = htab[src, gap & 1, short & 1]
                    bad = mask & (pats[:, t] != pred)
                    if bad.any():
                        s, i = np.argwhere(bad)[0]
                        return CondResult(4, False, {
                            "n": n, "initial": int(s), "t": int(t),
                            "i": int(i), "t_anc": int(t_anc),
                            "i_anc": int((i - ell) % n), "ddist": ell,
                        })
    return CondResult(4, True)


# ---------------------------------------------------------------------------
# Conditions 5-6: exhaustive constructor checks
# ---------------------------------------------------------------------------

def _path_cells(n: int, x: int, y: int) -> list[int]:
    length = (y - x) % n
    count = n + 1 if length == 0 else length + 1
    return [(x + p) % n for p in range(count)]


def verify_cond5(meta: RuleMeta, n_max: int = 12) -> CondResult:
    """finalize_interval fulfils every clause on every valid input."""
    if n_max > 14:
        raise ValueError("n_max capped at 14 (enumeration budget)")
    fmask = meta.final_mask()
    for n in range(3, n_max + 1):
        configs = all_configs(n)
        pats0 = batch_patterns(configs[:, None, :], meta.k)[:, 0]
        final0 = fmask[pats0]
        for s in range(configs.shape[0]):
            row = configs[s]
            row_list = row.tolist()
            final_here = final0[s].tolist()
            finals = np.flatnonzero(final0[s])
            for x in finals:
                for y in finals:
                    out = meta.finalize_fn(meta, row, int(x), int(y))
                    cells = _path_cells(n, int(x), int(y))
                    err = _check_cond5(meta, row_list, out.tolist(), cells,
                                       final_here)
                    if err:
                        return CondResult(5, False, {
                            "n": n, "config": row_str(row),
                            "x": int(x), "y": int(y), "clause": err,
                        })
    return CondResult(5, True)


def _check_cond5(meta, row, out, cells, final_before) -> str | None:
    n = len(row)
    k = meta.k
    finals = meta.final_patterns
    inside = [False] * n
    for c in cells:
        inside[c] = True
    for i in range(n):
        if not inside[i] and out[i] != row[i]:
            return "modified outside [x,y]"
    for c in cells:
        p = 0
        for d in range(c - k, c + k + 1):
            p = (p << 1) | out[d % n]
        if p not in finals:
            return "non-final window inside [x,y]"
        if final_before[c] and out[c] != row[c]:
            return "changed a final location's value"
    return None


def verify_cond6(meta: RuleMeta, n_max: int = 12) -> CondResult:
    """plant_final fulfils every clause on every valid input."""
    if n_max > 14:
        raise ValueError("n_max capped at 14 (enumeration budget)")
    fmask = meta.final_mask()
    centers = sorted(meta.final_centers())
    for n in range(3, n_max + 1):
        if n < 2 * meta.k + 3:
            continue
        configs = all_configs(n)
        pats0 = batch_patterns(configs[:, None, :], meta.k)[:, 0]
        final0 = fmask[pats0]
        for s in range(configs.shape[0]):
            row = configs[s]
            for z in np.flatnonzero(~final0[s]):
                for nu in centers:
                    for gamma in (0, 1):
                        for gamma_prime in (0, 1):
                            for side in (RIGHT, LEFT):
                                err = _check_cond6(meta, row, int(z), nu,
                                                   gamma, gamma_prime, side)
                                if err:
                                    return CondResult(6, False, {
                                        "n": n, "config": row_str(row),
                                        "z": int(z), "nu": nu, "gamma": gamma,
                                        "gamma_prime": gamma_prime,
                                        "side": side, "clause": err,
                                    })
    return CondResult(6, True)


def _check_cond6(meta, row, z, nu, gamma, gamma_prime, side) -> str | None:
    n = row.size
    k = meta.k
    out, zp = plant_raw(meta, row, z, nu, gamma, gamma_prime, side)
    step = (zp - z) % n if side == RIGHT else (z - zp) % n
    if not 1 <= step <= 2 * k + 1:
        return f"z'={zp} outside the allowed range"
    if window_pattern(out, zp, k) not in meta.final_patterns:
        return "window at z' not final"
    if meta.f_fwd(int(out[zp]), gamma, (step & 1) ^ gamma_prime) != nu:
        return "prediction at z' does not equal nu"
    for j in range(1, step):
        between = (z + j) % n if side == RIGHT else (zp + j) % n
        if window_pattern(out, between, k) in meta.final_patterns:
            return f"final window strictly between z and z' at {between}"
    if side == RIGHT:
        lo, hi = (z + k) % n, (zp + k) % n
    else:
        lo, hi = (zp - k) % n, (z - k) % n
    span = (hi - lo) % n
    allowed = np.zeros(n, dtype=bool)
    for d in range(span + 1):
        allowed[(lo + d) % n] = True
    if np.any((out != row) & ~allowed):
        return "modified outside the allowed margin"
    return None


def row_str(row: np.ndarray) -> str:
    return "".join(str(int(v)) for v in row)


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

def verify_all(meta: RuleMeta, n_max: int = 12, m_max: int = 12) -> list[CondResult]:
    return [
        verify_cond1(meta),
        verify_cond2(meta),
        verify_cond3(meta, n_max, m_max),
        verify_cond4(meta, n_max, m_max),
        verify_cond5(meta, min(n_max, 12)),
        verify_cond6(meta, min(n_max, 12)),
    ]
