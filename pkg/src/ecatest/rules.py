"""Tester-facing rule metadata.

For each supported rule this module knows the radius k, the final /
non-final partition of (2k+1)-bit window patterns, the prediction
functions (f forward on final values, h forward/backward on non-final
windows), and the two configuration constructors used to certify the
rule's conditions (finalize_interval and plant_final).

Patterns are ints of width 2k+1 with the leftmost cell in the most
significant bit, so the string "110" is the pattern 0b110 = 6.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import Configuration, Rule, ddist, dist

LEFT = "left"
RIGHT = "right"


class MetaError(ValueError):
    pass


class PatternDomainError(MetaError):
    pass


class UnknownRule(KeyError):
    pass


def pattern_width(k: int) -> int:
    return 2 * k + 1


def pattern_from_bits(bits) -> int:
    p = 0
    for b in bits:
        p = (p << 1) | int(b)
    return p


def pattern_to_bits(p: int, width: int) -> tuple[int, ...]:
    return tuple((p >> (width - 1 - j)) & 1 for j in range(width))


def pattern_str(p: int, width: int) -> str:
    return format(p, f"0{width}b")


def pattern_complement(p: int, width: int) -> int:
    return p ^ ((1 << width) - 1)


def window_pattern(bits: np.ndarray, i: int, k: int) -> int:
    """The (2k+1)-pattern of Gamma_k(i) read off a raw row."""
    n = bits.size
    p = 0
    for d in range(-k, k + 1):
        p = (p << 1) | int(bits[(i + d) % n])
    return p


def row_pattern_indices(row: np.ndarray, k: int) -> np.ndarray:
    """Vector of window patterns for every location of a row (cyclic)."""
    idx = np.zeros_like(row, dtype=np.int64)
    for d in range(-k, k + 1):
        idx = (idx << 1) | np.roll(row, -d).astype(np.int64)
    return idx


# ---------------------------------------------------------------------------
# RuleMeta
# ---------------------------------------------------------------------------

FinalizeFn = Callable[["RuleMeta", np.ndarray, int, int], np.ndarray]
PlantFn = Callable[["RuleMeta", np.ndarray, int, int, int, int], tuple[np.ndarray, int]]


@dataclass(frozen=True, eq=False)
class RuleMeta:
    """Everything the meta-tester needs to know about one rule."""

    name: str
    rule: Rule
    k: int
    final_patterns: frozenset[int]
    f_time_mask: int            # f(b, p, q) = b ^ (f_time_mask & p) ^ (f_dist_mask & q)
    f_dist_mask: int
    h_table: np.ndarray         # [pattern, time parity, ddist parity] -> pattern, -1 off-domain
    finalize_fn: FinalizeFn
    plant_fn: PlantFn
    tester_kind: str = "meta"
    h_bwd_table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        validate_partition(self)
        object.__setattr__(self, "h_bwd_table", invert_h_table(self))

    # -- pattern classification -------------------------------------------

    @property
    def width(self) -> int:
        return pattern_width(self.k)

    @property
    def nonfinal_patterns(self) -> frozenset[int]:
        return frozenset(range(1 << self.width)) - self.final_patterns

    def is_final(self, pattern: int) -> bool:
        if not 0 <= pattern < (1 << self.width):
            raise PatternDomainError(f"pattern {pattern} wider than {self.width} bits")
        return pattern in self.final_patterns

    def classify(self, pattern) -> str:
        """'final' or 'nonfinal' for a pattern given as int, bits, or string."""
        if isinstance(pattern, str):
            if len(pattern) != self.width:
                raise PatternDomainError(
                    f"pattern length {len(pattern)} != {self.width}")
            pattern = int(pattern, 2)
        elif not isinstance(pattern, (int, np.integer)):
            if len(pattern) != self.width:
                raise PatternDomainError(
                    f"pattern length {len(pattern)} != {self.width}")
            pattern = pattern_from_bits(pattern)
        return "final" if self.is_final(int(pattern)) else "nonfinal"

    def final_mask(self) -> np.ndarray:
        mask = np.zeros(1 << self.width, dtype=bool)
        for p in self.final_patterns:
            mask[p] = True
        return mask

    def final_centers(self) -> frozenset[int]:
        """Legal center bits of final patterns ({tau_{k+1} : tau in F})."""
        return frozenset((p >> self.k) & 1 for p in self.final_patterns)

    # -- prediction functions ----------------------------------------------

    def f_fwd(self, value: int, dt_parity: int, dd_parity: int) -> int:
        return value ^ (self.f_time_mask & dt_parity) ^ (self.f_dist_mask & dd_parity)

    def h_fwd(self, pattern: int, dt_parity: int, dd: int) -> int:
        """Transport a non-final window forward in time.

        `dd` is the location offset measured along the short path between
        the two locations (only its parity matters).  The directed distance
        has the same parity whenever the ring is even or the offset is
        below n/2, which covers every use the tester makes of it.
        """
        out = int(self.h_table[pattern, dt_parity & 1, dd & 1])
        if out < 0:
            raise PatternDomainError(
                f"{pattern_str(pattern, self.width)} is not non-final for {self.name}")
        return out

    def h_bwd(self, pattern: int, dt_parity: int, dd: int) -> int:
        """Inverse of h_fwd in its first argument (same dd convention)."""
        out = int(self.h_bwd_table[pattern, dt_parity & 1, dd & 1])
        if out < 0:
            raise PatternDomainError(
                f"{pattern_str(pattern, self.width)} is not non-final for {self.name}")
        return out

    # -- condition constructors --------------------------------------------

    def finalize_interval(self, sigma: Configuration, x: int, y: int) -> Configuration:
        """Condition-5 constructor; [x, x] is read as the whole ring."""
        row = sigma.bits.copy()
        self._require_final(row, x)
        self._require_final(row, y)
        return Configuration(self.finalize_fn(self, row, x, y))

    def plant_final(self, sigma: Configuration, z: int, nu: int, gamma: int,
                    gamma_prime: int, side: str = RIGHT) -> tuple[Configuration, int]:
        """Condition-6 constructor; returns (modified configuration, z')."""
        row = sigma.bits.copy()
        if window_pattern(row, z, self.k) in self.final_patterns:
            raise MetaError(f"window at z={z} must be non-final")
        if nu not in self.final_centers():
            raise MetaError(f"nu={nu} is not a final center bit for {self.name}")
        out, zp = plant_raw(self, row, z, nu, gamma, gamma_prime, side)
        return Configuration(out), zp

    def _require_final(self, row: np.ndarray, i: int) -> None:
        if window_pattern(row, i, self.k) not in self.final_patterns:
            raise MetaError(f"window at location {i} must be final")


def validate_partition(meta: RuleMeta) -> None:
    all_patterns = frozenset(range(1 << meta.width))
    if not meta.final_patterns <= all_patterns:
        raise MetaError("final patterns wider than 2k+1 bits")
    if not meta.final_patterns or meta.final_patterns == all_patterns:
        raise MetaError("final/non-final partition must be non-trivial")
    bf = all_patterns - meta.final_patterns
    for p in (0, 1):
        for q in (0, 1):
            img = {int(meta.h_table[t, p, q]) for t in bf}
            if img != bf:
                raise MetaError(
                    f"h is not a bijection on non-final patterns at (p={p}, q={q})")
    for t in meta.final_patterns:
        if any(meta.h_table[t, p, q] >= 0 for p in (0, 1) for q in (0, 1)):
            raise MetaError("h must be undefined on final patterns")


def invert_h_table(meta: RuleMeta) -> np.ndarray:
    inv = np.full_like(meta.h_table, -1)
    for t in range(meta.h_table.shape[0]):
        for p in (0, 1):
            for q in (0, 1):
                out = meta.h_table[t, p, q]
                if out >= 0:
                    inv[out, p, q] = t
    return inv


def h_table_from_callable(h, bf_patterns, width: int, n_probe: int = 16) -> np.ndarray:
    """Build the (pattern, parity, parity) lookup table from h(tau, beta, ell).

    Rejects callables whose value depends on ell through anything beyond its
    parity, probing ell over [0, n_probe).
    """
    table = np.full((1 << width, 2, 2), -1, dtype=np.int64)
    for tau in bf_patterns:
        for p in (0, 1):
            for q in (0, 1):
                vals = {h(tau, p, ell) for ell in range(q, n_probe, 2)}
                if len(vals) != 1:
                    raise MetaError(
                        "h depends on the directed distance beyond its parity")
                table[tau, p, q] = vals.pop()
    return table


def _flip_h_table(bf_patterns, width: int, time_mask: int, dist_mask: int) -> np.ndarray:
    """h tables of the supplied rules all either keep or complement the
    window, flipping iff (time_mask & p) ^ (dist_mask & q)."""
    full = (1 << width) - 1
    return h_table_from_callable(
        lambda tau, p, ell: tau ^ (full if ((time_mask & p) ^ (dist_mask & (ell & 1))) else 0),
        bf_patterns, width)


# ---------------------------------------------------------------------------
# Condition-5 / Condition-6 constructors
# ---------------------------------------------------------------------------

def plant_raw(meta: RuleMeta, row: np.ndarray, z: int, nu: int, gamma: int,
              gamma_prime: int, side: str) -> tuple[np.ndarray, int]:
    """plant_final on a raw row, preconditions unchecked."""
    n = row.size
    if side == RIGHT:
        out, zp = meta.plant_fn(meta, row, z, nu, gamma, gamma_prime)
        return out, zp % n
    if side == LEFT:
        # mirror around z; all supplied rules and their pattern sets are
        # reflection-symmetric, so the right-variant construction transfers
        rev = row[::-1].copy()
        zr = (n - 1 - z) % n
        out, zpr = meta.plant_fn(meta, rev, zr, nu, gamma, gamma_prime)
        zp = (n - 1 - (zpr % n)) % n
        return out[::-1].copy(), zp
    raise MetaError(f"side must be {LEFT!r} or {RIGHT!r}")


def _interval_positions(n: int, x: int, y: int) -> int:
    """Number of path positions for [x, y]; [x, x] is read as x, ..., x+n
    (the whole ring, with x at both ends)."""
    length = (y - x) % n
    return n + 1 if length == 0 else length + 1


def _finalize_nearest(meta: RuleMeta, row: np.ndarray, x: int, y: int,
                      parity_flip: bool) -> np.ndarray:
    """Shared Condition-5 construction for the k=1 rules: every location in
    [x, y] copies the nearest final location along the interval (with a
    parity flip for the homogeneous-flip rules)."""
    n = row.size
    count = _interval_positions(n, x, y)
    cells = [(x + p) % n for p in range(count)]
    is_final = [window_pattern(row, c, meta.k) in meta.final_patterns
                for c in cells]
    inf = 3 * count
    left = [inf] * count
    d = inf
    for p in range(count):
        d = 0 if is_final[p] else d + 1
        left[p] = d
    right = [inf] * count
    d = inf
    for p in range(count - 1, -1, -1):
        d = 0 if is_final[p] else d + 1
        right[p] = d
    out = row.copy()
    for p in range(count):
        # nearest final position along the path, ties toward x
        d = left[p] if left[p] <= right[p] else right[p]
        q = p - d if left[p] <= right[p] else p + d
        v = int(row[cells[q]])
        if parity_flip:
            v ^= d & 1
        out[cells[p]] = v
    return out


def _finalize_constant(meta: RuleMeta, row: np.ndarray, x: int, y: int,
                       value: int) -> np.ndarray:
    n = row.size
    out = row.copy()
    for p in range(_interval_positions(n, x, y)):
        out[(x + p) % n] = value
    return out


def _plant_k0(meta: RuleMeta, row: np.ndarray, z: int, nu: int,
              gamma: int, gamma_prime: int, value: int) -> tuple[np.ndarray, int]:
    out = row.copy()
    zp = (z + 1) % row.size
    out[zp] = value
    return out, zp


def _plant_maj_family(meta: RuleMeta, row: np.ndarray, z: int, nu: int,
                      gamma: int, gamma_prime: int) -> tuple[np.ndarray, int]:
    """Condition 6 for maj/min: one- or two-step plant depending on whether
    the requested bit continues or breaks the alternation at z."""
    n = row.size
    b = int(row[z])
    target = nu ^ (meta.f_time_mask & gamma)  # f ignores distance for these rules
    out = row.copy()
    if target == 1 - b:
        zp = (z + 1) % n
        out[(z + 2) % n] = target
    else:
        zp = (z + 2) % n
        out[(z + 2) % n] = target
        out[(z + 3) % n] = target
    return out, zp


def _plant_fih_family(meta: RuleMeta, row: np.ndarray, z: int, nu: int,
                      gamma: int, gamma_prime: int) -> tuple[np.ndarray, int]:
    """Condition 6 for fih/fuh: plant at z+1; the target bit folds in the
    rule's time/distance prediction masks."""
    n = row.size
    v = int(row[z])  # window at z is homogeneous, so row[z-1..z+1] == v
    zp = (z + 1) % n
    target = nu ^ (meta.f_time_mask & gamma) ^ (meta.f_dist_mask & (1 ^ gamma_prime))
    out = row.copy()
    out[zp] = target
    if target == v:
        out[(z + 2) % n] = 1 - v
    return out, zp


# ---------------------------------------------------------------------------
# Built-in metadata
# ---------------------------------------------------------------------------

def _make_or() -> RuleMeta:
    return RuleMeta(
        name="or",
        rule=Rule.from_wolfram(254),
        k=0,
        final_patterns=frozenset({1}),
        f_time_mask=0,
        f_dist_mask=0,
        h_table=_flip_h_table({0}, 1, 0, 0),
        finalize_fn=lambda meta, row, x, y: _finalize_constant(meta, row, x, y, 1),
        plant_fn=lambda meta, row, z, nu, g, gp: _plant_k0(meta, row, z, nu, g, gp, 1),
    )


def _make_maj() -> RuleMeta:
    return RuleMeta(
        name="maj",
        rule=Rule.from_wolfram(232),
        k=1,
        final_patterns=frozenset({0b111, 0b110, 0b011, 0b000, 0b001, 0b100}),
        f_time_mask=0,
        f_dist_mask=0,
        h_table=_flip_h_table({0b101, 0b010}, 3, 1, 1),
        finalize_fn=lambda meta, row, x, y: _finalize_nearest(meta, row, x, y, False),
        plant_fn=_plant_maj_family,
    )


def _make_min() -> RuleMeta:
    # h for minority is spatial-only: its all-non-final environments are
    # frozen alternations, so windows repeat in time and flip with distance
    return RuleMeta(
        name="min",
        rule=Rule.from_wolfram(23),
        k=1,
        final_patterns=frozenset({0b111, 0b110, 0b011, 0b000, 0b001, 0b100}),
        f_time_mask=1,
        f_dist_mask=0,
        h_table=_flip_h_table({0b101, 0b010}, 3, 0, 1),
        finalize_fn=lambda meta, row, x, y: _finalize_nearest(meta, row, x, y, False),
        plant_fn=_plant_maj_family,
    )


def _make_fih() -> RuleMeta:
    return RuleMeta(
        name="fih",
        rule=Rule.from_wolfram(77),
        k=1,
        final_patterns=frozenset(range(8)) - {0b000, 0b111},
        f_time_mask=0,
        f_dist_mask=1,
        h_table=_flip_h_table({0b000, 0b111}, 3, 1, 0),
        finalize_fn=lambda meta, row, x, y: _finalize_nearest(meta, row, x, y, True),
        plant_fn=_plant_fih_family,
    )


def _make_fuh() -> RuleMeta:
    return RuleMeta(
        name="fuh",
        rule=Rule.from_wolfram(178),
        k=1,
        final_patterns=frozenset(range(8)) - {0b000, 0b111},
        f_time_mask=1,
        f_dist_mask=1,
        h_table=_flip_h_table({0b000, 0b111}, 3, 0, 0),
        finalize_fn=lambda meta, row, x, y: _finalize_nearest(meta, row, x, y, True),
        plant_fn=_plant_fih_family,
    )


def transport_meta(meta: RuleMeta, name: str) -> RuleMeta:
    """Bit-complement transport: derives the complementary rule's metadata.

    Patterns are complemented, f keeps its masks (an XOR offset cancels),
    h conjugates by complementation, and the constructors run on the
    complemented configuration.
    """
    width = meta.width
    full = (1 << width) - 1
    final = frozenset(p ^ full for p in meta.final_patterns)

    h = np.full_like(meta.h_table, -1)
    for tau in range(1 << width):
        for p in (0, 1):
            for q in (0, 1):
                src = meta.h_table[tau ^ full, p, q]
                if src >= 0:
                    h[tau, p, q] = int(src) ^ full

    def finalize(m: RuleMeta, row: np.ndarray, x: int, y: int) -> np.ndarray:
        return 1 - meta.finalize_fn(meta, 1 - row, x, y)

    def plant(m: RuleMeta, row: np.ndarray, z: int, nu: int, g: int,
              gp: int) -> tuple[np.ndarray, int]:
        out, zp = meta.plant_fn(meta, 1 - row, z, 1 - nu, g, gp)
        return 1 - out, zp

    return RuleMeta(
        name=name,
        rule=meta.rule.complement(),
        k=meta.k,
        final_patterns=final,
        f_time_mask=meta.f_time_mask,
        f_dist_mask=meta.f_dist_mask,
        h_table=h,
        finalize_fn=finalize,
        plant_fn=plant,
    )


_METAS: dict[str, RuleMeta] = {}
_TRIVIAL: dict[str, Rule] = {
    "all1": Rule.from_wolfram(255),
    "all0": Rule.from_wolfram(0),
    "nor": Rule.from_wolfram(1),
    "nand": Rule.from_wolfram(127),
}

META_NAMES = ("or", "and", "maj", "min", "fih", "fuh")
TRIVIAL_NAMES = ("all1", "all0", "nor", "nand")


def builtin_meta(name: str) -> RuleMeta:
    if not _METAS:
        _METAS["or"] = _make_or()
        _METAS["and"] = transport_meta(_METAS["or"], "and")
        _METAS["maj"] = _make_maj()
        _METAS["min"] = _make_min()
        _METAS["fih"] = _make_fih()
        _METAS["fuh"] = _make_fuh()
    try:
        return _METAS[name]
    except KeyError:
        raise UnknownRule(f"no metadata registered for rule {name!r}") from None


def trivial_rule(name: str) -> Rule:
    try:
        return _TRIVIAL[name]
    except KeyError:
        raise UnknownRule(f"unknown trivial rule {name!r}") from None


def resolve_rule_name(name: str) -> tuple[str, str]:
    """Map a user-supplied rule name to ('meta'|'trivial', canonical name).

    Accepts the symbolic names and 'wolfram:<code>'; wolfram codes resolve
    only to rules with registered metadata or trivial testers.
    """
    name = name.strip().lower()
    if name in META_NAMES:
        return "meta", name
    if name in TRIVIAL_NAMES:
        return "trivial", name
    if name.startswith("wolfram:"):
        code = int(name[len("wolfram:"):])
        for cand in META_NAMES:
            if builtin_meta(cand).rule.wolfram_code == code:
                return "meta", cand
        for cand, rule in _TRIVIAL.items():
            if rule.wolfram_code == code:
                return "trivial", cand
        raise UnknownRule(f"wolfram code {code} has no registered tester metadata")
    raise UnknownRule(f"unknown rule name {name!r}")
