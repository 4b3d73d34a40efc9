"""Query access to an environment with time-conformity enforcement.

A QueryOracle wraps any environment backend (materialized, lazy-evolving,
or noisy) and refuses queries that go back in time: once some cell at time
t has been read, every later query must have time >= t.  It also keeps the
per-time query counts that the complexity accounting is stated in.
"""
from __future__ import annotations

from dataclasses import dataclass, field


class TimeConformityViolation(RuntimeError):
    """Raised when a query goes back in time."""


#: total violations ever raised; lets a harness assert a batch stayed clean
VIOLATIONS_RAISED = 0


@dataclass
class OracleStats:
    total: int
    temporal_max: int
    per_time: dict[int, int] = field(default_factory=dict)


class QueryOracle:
    def __init__(self, env, record: bool = False):
        self.env = env
        self.m = env.m
        self.n = env.n
        self.current_time_floor = 0
        self.total_queries = 0
        self.per_time_counts: dict[int, int] = {}
        self.query_log: list[tuple[int, int]] | None = [] if record else None

    def query(self, t: int, i: int) -> int:
        if not 0 <= t < self.m:
            raise IndexError(f"time {t} out of range [0, {self.m})")
        if not 0 <= i < self.n:
            raise IndexError(f"location {i} out of range [0, {self.n})")
        if t < self.current_time_floor:
            global VIOLATIONS_RAISED
            VIOLATIONS_RAISED += 1
            raise TimeConformityViolation(
                f"query at t={t} after a query at t={self.current_time_floor}")
        self.current_time_floor = t
        self.total_queries += 1
        self.per_time_counts[t] = self.per_time_counts.get(t, 0) + 1
        if self.query_log is not None:
            self.query_log.append((t, i))
        return self.env.cell(t, i)

    def query_window(self, t: int, i: int, r: int) -> tuple[int, ...]:
        """Read Gamma_r(i) at time t; counts as 2r+1 queries."""
        return tuple(self.query(t, (i + d) % self.n) for d in range(-r, r + 1))

    def query_window_pattern(self, t: int, i: int, r: int) -> int:
        p = 0
        for d in range(-r, r + 1):
            p = (p << 1) | self.query(t, (i + d) % self.n)
        return p

    def stats(self) -> OracleStats:
        temporal = max(self.per_time_counts.values(), default=0)
        return OracleStats(self.total_queries, temporal, dict(self.per_time_counts))
