"""Cyclic configurations, rule tables, environments, and deterministic evolution.

Everything here lives on the ring Z_n: locations are plain ints, all index
arithmetic wraps mod n, and an interval [i, j] means i, i+1, ..., j (so j < i
is allowed and denotes a wrapping interval).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

MAGIC = b"ECAENV1\x00"


class InvalidConfiguration(ValueError):
    pass


class InvalidRadius(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


# ---------------------------------------------------------------------------
# Ring arithmetic
# ---------------------------------------------------------------------------

def ddist(i: int, j: int, n: int) -> int:
    """Directed distance from i to j on Z_n (steps going rightward)."""
    return (j - i) % n


def dist(i: int, j: int, n: int) -> int:
    """Undirected cyclic distance, always <= n // 2."""
    d = (j - i) % n
    return min(d, n - d)


def descends(t: int, i: int, t_anc: int, i_anc: int, n: int) -> bool:
    """(t, i) descends from (t_anc, i_anc) iff it is strictly later and
    within the light cone: dist(i, i_anc) <= t - t_anc."""
    return t > t_anc and dist(i, i_anc, n) <= t - t_anc


def neighborhood(i: int, r: int, n: int) -> list[int]:
    """The wrapped interval [i-r, i+r], length 2r+1."""
    if 2 * r + 1 > n:
        raise InvalidRadius(f"radius {r} does not fit on a ring of size {n}")
    return [(i + d) % n for d in range(-r, r + 1)]


def interval_members(a: int, b: int, n: int) -> Iterator[int]:
    """Iterate the wrapped interval [a, b]."""
    length = (b - a) % n + 1
    for d in range(length):
        yield (a + d) % n


def in_interval(i: int, a: int, b: int, n: int) -> bool:
    """Membership in the wrapped interval [a, b]."""
    return (i - a) % n <= (b - a) % n


# ---------------------------------------------------------------------------
# Rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Rule:
    """An elementary CA rule: 8 output bits indexed by (b1, b2, b3).

    table[4*b1 + 2*b2 + b3] is the successor bit of the window (b1, b2, b3),
    which makes wolfram_code the standard Wolfram numbering.
    """

    table: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.table) != 8 or any(b not in (0, 1) for b in self.table):
            raise ValueError("rule table must be 8 bits")

    @classmethod
    def from_wolfram(cls, code: int) -> "Rule":
        if not 0 <= code <= 255:
            raise ValueError(f"wolfram code out of range: {code}")
        return cls(tuple((code >> i) & 1 for i in range(8)))

    @property
    def wolfram_code(self) -> int:
        return sum(b << i for i, b in enumerate(self.table))

    def __call__(self, b1: int, b2: int, b3: int) -> int:
        return self.table[4 * b1 + 2 * b2 + b3]

    def table_array(self) -> np.ndarray:
        return np.array(self.table, dtype=np.uint8)

    def complement(self) -> "Rule":
        """The complementary rule: rho'(b) = 1 - rho(1-b1, 1-b2, 1-b3)."""
        return Rule(tuple(1 - self.table[7 - i] for i in range(8)))

    def __repr__(self) -> str:
        return f"Rule({self.wolfram_code})"


# ---------------------------------------------------------------------------
# Configurations
# ---------------------------------------------------------------------------

class Configuration:
    """An immutable cyclic binary string of length n >= 3."""

    __slots__ = ("_bits",)

    def __init__(self, bits: Sequence[int] | np.ndarray):
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.ndim != 1 or arr.size < 3:
            raise InvalidConfiguration("configuration needs length >= 3")
        if arr.max(initial=0) > 1:
            raise InvalidConfiguration("configuration bits must be 0/1")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "_bits", arr)

    def __setattr__(self, *a):  # immutable value semantics
        raise AttributeError("Configuration is immutable")

    @classmethod
    def from_string(cls, s: str) -> "Configuration":
        return cls([int(c) for c in s])

    @classmethod
    def zeros(cls, n: int) -> "Configuration":
        return cls(np.zeros(n, dtype=np.uint8))

    @classmethod
    def ones(cls, n: int) -> "Configuration":
        return cls(np.ones(n, dtype=np.uint8))

    @classmethod
    def alternating(cls, n: int, phase: int = 0) -> "Configuration":
        return cls((np.arange(n) + phase) % 2)

    @classmethod
    def random(cls, n: int, rng) -> "Configuration":
        return cls([rng.randrange(2) for _ in range(n)])

    @property
    def n(self) -> int:
        return int(self._bits.size)

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        return int(self._bits[i % self.n])

    def window(self, i: int, r: int) -> tuple[int, ...]:
        return tuple(self[j] for j in neighborhood(i, r, self.n))

    def complement(self) -> "Configuration":
        return Configuration(1 - self._bits)

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self._bits)

    def __eq__(self, other) -> bool:
        return isinstance(other, Configuration) and np.array_equal(
            self._bits, other._bits
        )

    def __hash__(self) -> int:
        return hash(self._bits.tobytes())

    def __repr__(self) -> str:
        return f"Configuration({self.to_string()!r})"


def step_row(row: np.ndarray, table: np.ndarray) -> np.ndarray:
    """One synchronous rule application to a raw uint8 row (cyclic)."""
    idx = 4 * np.roll(row, 1) + 2 * row + np.roll(row, -1)
    return table[idx]


def evolve_step(config: Configuration, rule: Rule) -> Configuration:
    """Apply the rule once: output(i) = rule(c(i-1), c(i), c(i+1))."""
    return Configuration(step_row(config.bits, rule.table_array()))


# ---------------------------------------------------------------------------
# Environments
# ---------------------------------------------------------------------------

class Environment:
    """Materialized m x n space-time matrix; row t is the configuration at t."""

    def __init__(self, rows: np.ndarray):
        rows = np.asarray(rows, dtype=np.uint8)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 3:
            raise InvalidConfiguration("environment must be m>=1 by n>=3")
        self._rows = rows

    @property
    def m(self) -> int:
        return int(self._rows.shape[0])

    @property
    def n(self) -> int:
        return int(self._rows.shape[1])

    @property
    def rows(self) -> np.ndarray:
        return self._rows

    def cell(self, t: int, i: int) -> int:
        if not 0 <= t < self.m:
            raise IndexError(f"time {t} out of range [0, {self.m})")
        return int(self._rows[t, i % self.n])

    def row(self, t: int) -> np.ndarray:
        if not 0 <= t < self.m:
            raise IndexError(f"time {t} out of range [0, {self.m})")
        return self._rows[t]

    def config(self, t: int) -> Configuration:
        return Configuration(self.row(t))

    def complement(self) -> "Environment":
        return Environment(1 - self._rows)


class LazyEnvironment:
    """Evolving environment that keeps a single row in memory.

    Rows are generated on demand; time access must be non-decreasing
    (forward-only, single consumer).
    """

    def __init__(self, initial: Configuration, rule: Rule, m: int):
        if m < 1:
            raise ValueError("m must be >= 1")
        self.m = m
        self.n = initial.n
        self._table = rule.table_array()
        self._row = initial.bits.copy()
        self._t = 0

    @property
    def current_time(self) -> int:
        return self._t

    def cell(self, t: int, i: int) -> int:
        if not 0 <= t < self.m:
            raise IndexError(f"time {t} out of range [0, {self.m})")
        if t < self._t:
            raise ValueError(
                f"lazy environment cannot rewind from t={self._t} to t={t}"
            )
        while self._t < t:
            self._row = step_row(self._row, self._table)
            self._t += 1
        return int(self._row[i % self.n])


class NoisyEnvironment:
    """Wraps a backend and flips each cell independently with probability p.

    The flip decision is keyed by (seed, t, i) through a per-row PCG stream,
    so any cell is reproducible without storing a mask.
    """

    def __init__(self, base, p: float, seed: int):
        self.base = base
        self.p = float(p)
        self.seed = int(seed)
        self.m = base.m
        self.n = base.n
        self._cached_t: int | None = None
        self._cached_mask: np.ndarray | None = None

    def _mask_row(self, t: int) -> np.ndarray:
        if self._cached_t != t:
            rng = np.random.Generator(np.random.PCG64([self.seed, t]))
            self._cached_mask = (rng.random(self.n) < self.p).astype(np.uint8)
            self._cached_t = t
        return self._cached_mask

    def cell(self, t: int, i: int) -> int:
        v = self.base.cell(t, i)
        if self.p <= 0.0:
            return v
        return int(v ^ self._mask_row(t)[i % self.n])


def evolve(initial: Configuration, rule: Rule, m: int) -> Environment:
    """Materialize the m-row evolution of `initial` under `rule`."""
    if m < 1:
        raise ValueError("m must be >= 1")
    table = rule.table_array()
    rows = np.empty((m, initial.n), dtype=np.uint8)
    rows[0] = initial.bits
    for t in range(1, m):
        rows[t] = step_row(rows[t - 1], table)
    return Environment(rows)


def env_distance(a: Environment, b: Environment) -> Fraction:
    """Normalized Hamming distance between two environments of equal shape."""
    if a.m != b.m or a.n != b.n:
        raise ShapeMismatch(f"({a.m},{a.n}) vs ({b.m},{b.n})")
    diff = int(np.count_nonzero(a.rows != b.rows))
    return Fraction(diff, a.m * a.n)


# ---------------------------------------------------------------------------
# Environment file formats
# ---------------------------------------------------------------------------

def save_env_text(env: Environment, path: str, wolfram_code: int = 0) -> None:
    with open(path, "w") as fh:
        fh.write(f"{env.n} {env.m} rule={wolfram_code}\n")
        for t in range(env.m):
            fh.write("".join("1" if v else "0" for v in env.row(t)) + "\n")


def load_env_text(path: str) -> tuple[Environment, int]:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3 or not header[2].startswith("rule="):
            raise ValueError(f"bad environment header in {path}")
        n, m = int(header[0]), int(header[1])
        code = int(header[2][len("rule="):])
        rows = np.empty((m, n), dtype=np.uint8)
        for t in range(m):
            line = fh.readline().strip()
            if len(line) != n:
                raise ValueError(f"row {t} has length {len(line)}, expected {n}")
            rows[t] = np.frombuffer(line.encode(), dtype=np.uint8) - ord("0")
    return Environment(rows), code


def save_env_binary(env: Environment, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", env.n, env.m))
        for t in range(env.m):
            fh.write(np.packbits(env.row(t)).tobytes())


def load_env_binary(path: str) -> Environment:
    with open(path, "rb") as fh:
        if fh.read(8) != MAGIC:
            raise ValueError(f"bad magic in {path}")
        n, m = struct.unpack("<II", fh.read(8))
        row_bytes = (n + 7) // 8
        rows = np.empty((m, n), dtype=np.uint8)
        for t in range(m):
            packed = np.frombuffer(fh.read(row_bytes), dtype=np.uint8)
            rows[t] = np.unpackbits(packed)[:n]
    return Environment(rows)
