"""Exact big-integer partition counts.

Two families are counted:

* d-distinct partitions ``q_d^(a)(n)``: parts >= a, pairwise differing by >= d.
* congruence partitions ``Q_d^(a)(n)``: parts congruent to +-a mod d+3,
  optionally with the single part d+3-a removed (``Q_d^(a,-)``).

Counts are Python ints held in numpy object arrays so the inner loops run as
vectorised slice additions.  ``brute_force_count`` is an independent oracle
that walks partitions directly and shares nothing with the recursions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import CapacityError, DomainError

DEFAULT_MEMORY_BUDGET = 8 * 2**30
ORACLE_CAP = 300


class Kind(str, enum.Enum):
    DISTINCT = "distinct"
    CONGRUENCE = "congruence"


@dataclass(frozen=True)
class FamilyConfig:
    d: int
    a: int
    minus: bool = False
    kind: Kind = Kind.CONGRUENCE

    def __post_init__(self):
        if self.d < 1 or self.a < 1:
            raise DomainError(f"need d >= 1 and a >= 1, got d={self.d}, a={self.a}")
        if not isinstance(self.kind, Kind):
            object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.DISTINCT and self.minus:
            raise DomainError("minus only applies to the congruence family")

    @property
    def modulus(self) -> int:
        return self.d + 3

    @property
    def excluded_part(self) -> int | None:
        return self.d + 3 - self.a if self.minus else None


@dataclass(frozen=True)
class CountSeries:
    """Counts ``values[n]`` for ``0 <= n <= n_max``; immutable once built."""

    config: FamilyConfig
    values: tuple[int, ...]

    def __post_init__(self):
        if not self.values or self.values[0] != 1:
            raise ValueError("a count series starts with the empty partition count 1")

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class AllowedParts:
    d: int
    a: int
    minus: bool
    parts: tuple[int, ...]


def allowed_parts(d: int, a: int, minus: bool, limit: int) -> AllowedParts:
    """Parts m <= limit with m = +-a (mod d+3), ascending and deduplicated."""
    if d < 1 or a < 1:
        raise DomainError(f"need d >= 1 and a >= 1, got d={d}, a={a}")
    m = d + 3
    residues = {a % m, (-a) % m}
    excluded = d + 3 - a if minus else None
    parts = tuple(
        p for p in range(1, limit + 1) if p % m in residues and p != excluded
    )
    return AllowedParts(d, a, minus, parts)


# -- memory accounting -------------------------------------------------------


def _bits_upper(n: int) -> float:
    # p(n) < exp(pi*sqrt(2n/3)) bounds every family counted here.
    return math.pi * math.sqrt(2 * n / 3) / math.log(2) + 1


def estimate_table_bytes(n_max: int, rows: int = 1) -> int:
    """Rough upper estimate for ``rows`` object arrays of counts up to n_max."""
    per_int = 28 + 4 * math.ceil(_bits_upper(n_max) / 30) + 8
    return rows * (n_max + 1) * per_int


def check_capacity(n_max: int, budget: int | None, rows: int = 1) -> None:
    if budget is None:
        return
    need = estimate_table_bytes(n_max, rows)
    if need <= budget:
        return
    lo, hi = 0, n_max
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if estimate_table_bytes(mid, rows) <= budget:
            lo = mid
        else:
            hi = mid - 1
    raise CapacityError(
        f"n_max={n_max} needs ~{need} bytes, budget is {budget}; "
        f"largest admissible n_max is {lo}",
        max_n=lo,
    )


def _zeros(n_max: int) -> np.ndarray:
    v = np.empty(n_max + 1, dtype=object)
    v[:] = 0
    return v


def _accumulate_part(v: np.ndarray, p: int) -> None:
    """In place ``v[j] += v[j-p]`` for increasing j (unbounded use of part p)."""
    n = len(v)
    for j in range(p, n, p):
        end = min(j + p, n)
        v[j:end] += v[j - p:end - p]


# -- congruence family -------------------------------------------------------


class CongruenceDP:
    """Largest-part recursion over the allowed parts a_0 < a_1 < ...

    With ``C_k(n) = sum_{i<=k} Q_i(n)`` the recursion
    ``Q_k(n) = Q_k(n-a_k) + sum_{i<k} Q_i(n-a_k)`` becomes
    ``C_k(n) = C_{k-1}(n) + C_k(n-a_k)``, so the table stores the cumulative
    sums in place.  After part a_k is processed every entry below a_{k+1} is
    final; the sweep harness relies on this to emit results in order of n.
    """

    def __init__(self, config: FamilyConfig, n_max: int, *, values=None, next_index=0):
        if config.kind is not Kind.CONGRUENCE:
            raise DomainError("CongruenceDP counts the congruence family only")
        self.config = config
        self.n_max = n_max
        self.parts = allowed_parts(config.d, config.a, config.minus, n_max).parts
        if values is None:
            values = _zeros(n_max)
            values[0] = 1
        elif len(values) != n_max + 1:
            raise ValueError("state length does not match n_max")
        self.values = values
        self.next_index = next_index

    @property
    def done(self) -> bool:
        return self.next_index >= len(self.parts)

    @property
    def final_below(self) -> int:
        """Entries with index < this value will not change any more."""
        if self.done:
            return self.n_max + 1
        return min(self.parts[self.next_index], self.n_max + 1)

    def step(self) -> None:
        _accumulate_part(self.values, self.parts[self.next_index])
        self.next_index += 1

    def run(self) -> np.ndarray:
        while not self.done:
            self.step()
        return self.values


def count_congruence(
    config: FamilyConfig, n_max: int, memory_budget: int | None = DEFAULT_MEMORY_BUDGET
) -> CountSeries:
    if n_max < 0:
        raise DomainError("n_max must be nonnegative")
    check_capacity(n_max, memory_budget)
    values = CongruenceDP(config, n_max).run()
    return CountSeries(config, tuple(values.tolist()))


# -- partitions into exactly k parts ------------------------------------------


def iter_exact_parts_rows(n_max: int, k_max: int) -> Iterator[np.ndarray]:
    """Yield rows ``p_k(0..n_max)`` for k = 0..k_max, two rows alive at a time.

    ``p_k(n) = p_{k-1}(n-1) + p_k(n-k)``: either 1 is a part, or every part
    can be lowered by one.
    """
    row = _zeros(n_max)
    row[0] = 1
    yield row
    for k in range(1, k_max + 1):
        nxt = _zeros(n_max)
        nxt[1:] = row[:-1]
        nxt[:k] = 0
        _accumulate_part(nxt, k)
        row = nxt
        yield row


def count_exact_parts(
    n_max: int, k_max: int, memory_budget: int | None = DEFAULT_MEMORY_BUDGET
) -> list[tuple[int, ...]]:
    """Table ``p[k][n]`` of partitions of n into exactly k parts, 0 <= k <= k_max."""
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    check_capacity(n_max, memory_budget, rows=k_max + 1)
    return [tuple(r.tolist()) for r in iter_exact_parts_rows(n_max, k_max)]


# -- d-distinct family -------------------------------------------------------


def _distinct_offset(d: int, a: int, k: int) -> int:
    # Lowering the i-th largest of k parts by d*(k-i) + (a-1) turns a d-distinct
    # partition with parts >= a into an ordinary partition with k parts.
    return d * (k * (k - 1) // 2) + (a - 1) * k


def count_distinct(
    d: int, a: int, n_max: int, memory_budget: int | None = DEFAULT_MEMORY_BUDGET
) -> CountSeries:
    """``q_d^(a)(N) = sum_k p_k(N - d*C(k,2) - (a-1)*k)``.

    Equivalently ``sum_k p_{<=k}(N - d*C(k,2) - a*k)`` with
    ``p_{<=k}(m) = p_k(m+k)``.
    """
    config = FamilyConfig(d, a, False, Kind.DISTINCT)
    if n_max < 0:
        raise DomainError("n_max must be nonnegative")
    check_capacity(n_max, memory_budget, rows=3)
    q = _zeros(n_max)
    q[0] = 1
    k_max = 0
    while _distinct_offset(d, a, k_max + 1) + (k_max + 1) <= n_max:
        k_max += 1
    if k_max:
        for k, row in enumerate(iter_exact_parts_rows(n_max, k_max)):
            if k == 0:
                continue
            off = _distinct_offset(d, a, k)
            q[off:] += row[: n_max + 1 - off]
    return CountSeries(config, tuple(q.tolist()))


def count_series(
    config: FamilyConfig, n_max: int, memory_budget: int | None = DEFAULT_MEMORY_BUDGET
) -> CountSeries:
    if config.kind is Kind.DISTINCT:
        return count_distinct(config.d, config.a, n_max, memory_budget)
    return count_congruence(config, n_max, memory_budget)


def delta(
    d: int, a: int, minus: bool, n_max: int,
    memory_budget: int | None = DEFAULT_MEMORY_BUDGET,
) -> tuple[int, ...]:
    """Exact ``q_d^(a)(n) - Q_d^(a[,-])(n)`` for 0 <= n <= n_max."""
    q = count_distinct(d, a, n_max, memory_budget)
    Q = count_congruence(FamilyConfig(d, a, minus), n_max, memory_budget)
    return tuple(x - y for x, y in zip(q.values, Q.values))


# -- independent oracle -----------------------------------------------------


def _congruence_predicate(config: FamilyConfig):
    m = config.d + 3
    a = config.a
    excluded = config.excluded_part

    def ok(part):
        r = part % m
        return (r == a % m or r == (m - a) % m) and part != excluded

    return ok


@lru_cache(maxsize=256)
def _oracle(config: FamilyConfig):
    if config.kind is Kind.DISTINCT:
        d, a = config.d, config.a

        @lru_cache(maxsize=None)
        def count(rest, largest):
            # number of ways to finish `rest` with parts in [a, largest],
            # each next part at least d below the previous one
            if rest == 0:
                return 1
            total = 0
            for part in range(min(rest, largest), a - 1, -1):
                total += count(rest - part, part - d)
            return total

        return lambda n: count(n, n)

    ok = _congruence_predicate(config)

    @lru_cache(maxsize=None)
    def count(rest, largest):
        if rest == 0:
            return 1
        total = 0
        for part in range(min(rest, largest), 0, -1):
            if ok(part):
                total += count(rest - part, part)
        return total

    return lambda n: count(n, n)


def brute_force_count(n: int, config: FamilyConfig, cap: int = ORACLE_CAP) -> int:
    """Count partitions of n satisfying the family predicate by direct recursion."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    if n > cap:
        raise DomainError(f"n={n} exceeds the oracle cap {cap}")
    return _oracle(config)(n)


def partitions(n: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    """Every partition of n as a non-increasing tuple."""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


def satisfies(parts: Sequence[int], config: FamilyConfig) -> bool:
    """Family predicate on an explicit partition (non-increasing parts)."""
    if config.kind is Kind.DISTINCT:
        if any(p < config.a for p in parts):
            return False
        return all(x - y >= config.d for x, y in zip(parts, parts[1:]))
    ok = _congruence_predicate(config)
    return all(ok(p) for p in parts)
