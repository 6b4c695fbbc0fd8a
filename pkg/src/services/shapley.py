"""Shapley attribution engines.

Three engines share the same inputs:

* ``shapley_naive`` evaluates the permutation-weighted marginal contributions
  over every coalition. It is exponential in the channel count and exists as
  an oracle for the other two.
* ``shapley_simplified`` credits each observed coalition T with R(T)/|T| per
  member channel. It touches stored coalitions only.
* ``shapley_ordered`` applies the same weight to the per-slot tensor, giving
  credit per (channel, touchpoint) with the unordered values as row sums.
"""
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Literal, Tuple

import numpy as np

from src.core.coalition import CoalitionKey
from src.core.config import settings
from src.services.error_handling import CapacityError, PreconditionError, StructuredLogger
from src.services.revenue import CoalitionRevenue, OrderedRevenue, UtilityTable, zeta_transform

logger = StructuredLogger(__name__)


class AttributionMethod(str, Enum):
    NAIVE = "naive"
    SIMPLIFIED = "simplified"
    ORDERED_COLLAPSED = "ordered-collapsed"
    FIRST_TOUCH = "first-touch"
    LAST_TOUCH = "last-touch"
    LINEAR = "linear"


@dataclass(frozen=True)
class Attribution:
    """Per-channel credit phi_j indexed by channel ordinal."""

    values: np.ndarray
    method: AttributionMethod
    total: float = field(init=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "total", math.fsum(values.tolist()))

    @property
    def p(self) -> int:
        return len(self.values)

    def __getitem__(self, channel: int) -> float:
        return float(self.values[channel])


@dataclass(frozen=True)
class OrderedAttribution:
    """Credit phi_j^i per channel j (rows) and slot i (columns, slot i at index i-1)."""

    matrix: np.ndarray
    total: float = field(init=False)

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise PreconditionError("ordered attribution needs a 2-d matrix")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "total", math.fsum(matrix.ravel().tolist()))

    @property
    def p(self) -> int:
        return self.matrix.shape[0]

    @property
    def max_position(self) -> int:
        return self.matrix.shape[1]

    def at(self, channel: int, slot: int) -> float:
        return float(self.matrix[channel, slot - 1])


@contextmanager
def _engine_run(method: str, p: int, size: int) -> Iterator[None]:
    started = time.perf_counter()
    yield
    logger.info(
        "Attribution engine finished",
        extra={"method": method, "p": p, "coalitions": size, "seconds": round(time.perf_counter() - started, 6)},
    )


# ============ Marginal contribution ============
def marginal_contribution(table: UtilityTable, channel: int, coalition: int) -> float:
    """M(j, S) = v(S + {j}) - v(S); requires j not in S."""
    if not 0 <= channel < table.p:
        raise PreconditionError(f"channel {channel} not valid for p={table.p}")
    key = CoalitionKey(coalition)
    if key.contains(channel):
        raise PreconditionError(f"channel {channel} already belongs to {key!r}")
    return table[key.with_channel(channel)] - table[key]


# ============ Naive engine ============
def shapley_weights(p: int) -> np.ndarray:
    """w[s] = s!(p-s-1)!/p! = 1/(p * C(p-1, s)) for s = 0..p-1, exact binomials then one division."""
    return np.array([1.0 / (p * math.comb(p - 1, s)) for s in range(p)], dtype=np.float64)


def _popcounts(p: int) -> np.ndarray:
    counts = np.zeros(1 << p, dtype=np.int64)
    for bit in range(p):
        blocks = counts.reshape(-1, 2, 1 << bit)
        blocks[:, 1, :] += 1
    return counts


def _naive_sum(p: int, gains_for: Callable[[np.ndarray, int], np.ndarray]) -> Attribution:
    weights = shapley_weights(p)
    sizes = _popcounts(p)
    coalitions = np.arange(1 << p, dtype=np.int64)
    phi: List[float] = []
    for channel in range(p):
        bit = 1 << channel
        without = coalitions[(coalitions & bit) == 0]
        gains = gains_for(without, bit)
        phi.append(math.fsum((weights[sizes[without]] * gains).tolist()))
    return Attribution(np.array(phi, dtype=np.float64), AttributionMethod.NAIVE)


def naive_with_table(table: UtilityTable) -> Attribution:
    """Naive engine over an existing utility table."""
    if table.p == 0:
        return Attribution(np.zeros(0), AttributionMethod.NAIVE)
    values = table.values
    return _naive_sum(table.p, lambda without, bit: values[without | bit] - values[without])


def _direct_utility(keys: np.ndarray, values: np.ndarray, coalition: int) -> float:
    return float(values[(keys & ~coalition) == 0].sum())


def shapley_naive(
    rev: CoalitionRevenue, utility_mode: Literal["zeta", "direct"] = "zeta"
) -> Attribution:
    """phi_j as the weighted sum of marginal contributions over all S not containing j.

    ``utility_mode="zeta"`` reads v(S) from the dense subset-sum table;
    ``"direct"`` recomputes v(S) by scanning stored coalitions on every call and
    exists to time the oracle without the table.
    """
    p = rev.p
    if p > settings.NAIVE_MAX_CHANNELS:
        logger.warning("Naive engine refused", extra={"p": p, "limit": settings.NAIVE_MAX_CHANNELS})
        raise CapacityError(
            f"naive engine enumerates 2^{p} coalitions; p={p} exceeds {settings.NAIVE_MAX_CHANNELS}"
        )
    if utility_mode not in ("zeta", "direct"):
        raise PreconditionError(f"unknown utility mode {utility_mode!r}")
    if p == 0:
        return Attribution(np.zeros(0), AttributionMethod.NAIVE)

    with _engine_run(f"naive/{utility_mode}", p, len(rev)):
        if utility_mode == "zeta":
            return naive_with_table(zeta_transform(rev))

        keys, stored = rev.arrays()
        keys = keys.astype(np.int64)

        def gains(without: np.ndarray, bit: int) -> np.ndarray:
            return np.array(
                [
                    _direct_utility(keys, stored, s | bit) - _direct_utility(keys, stored, s)
                    for s in without.tolist()
                ],
                dtype=np.float64,
            )

        return _naive_sum(p, gains)


# ============ Simplified engine ============
def shapley_simplified(rev: CoalitionRevenue) -> Attribution:
    """phi_j = sum over stored T containing j of R(T)/|T|.

    Per-channel sums use ``math.fsum`` over contributions in key order, so the
    result does not depend on channel labeling or summation order.
    """
    phi = np.zeros(rev.p, dtype=np.float64)
    if not len(rev):
        return Attribution(phi, AttributionMethod.SIMPLIFIED)
    with _engine_run("simplified", rev.p, len(rev)):
        keys, values = rev.arrays()
        sizes = np.fromiter((k.bit_count() for k in rev.entries), dtype=np.float64, count=len(rev))
        shares = values / sizes
        for channel in range(rev.p):
            members = ((keys >> np.uint64(channel)) & np.uint64(1)).astype(bool)
            phi[channel] = math.fsum(shares[members].tolist())
        return Attribution(phi, AttributionMethod.SIMPLIFIED)


# ============ Ordered engine ============
def shapley_ordered(orev: OrderedRevenue) -> OrderedAttribution:
    """phi_j^i = sum over stored (T, j, i) of R^i(T)/|T|."""
    with _engine_run("ordered", orev.p, len(orev)):
        cells: Dict[Tuple[int, int], List[float]] = {}
        for (bits, channel, slot), value in orev.entries.items():
            cells.setdefault((channel, slot), []).append(value / bits.bit_count())
        matrix = np.zeros((orev.p, orev.max_position), dtype=np.float64)
        for (channel, slot), shares in cells.items():
            matrix[channel, slot - 1] = math.fsum(shares)
        return OrderedAttribution(matrix)


def channel_totals(oa: OrderedAttribution) -> Attribution:
    """Row sums: per-channel credit, equal to the unordered Shapley value."""
    values = [math.fsum(row) for row in oa.matrix.tolist()]
    return Attribution(np.array(values, dtype=np.float64), AttributionMethod.ORDERED_COLLAPSED)


def touchpoint_totals(oa: OrderedAttribution) -> np.ndarray:
    """Column sums: credit per touchpoint, length N."""
    return np.array([math.fsum(col) for col in oa.matrix.T.tolist()], dtype=np.float64)


# ============ Lemma ============
def lemma_weight(n: int, n0: int) -> float:
    """sum_{N=n0}^{n-1} N!(n-n0-1)! / (n!(N-n0)!), evaluated exactly term by term.

    Equals 1/(n0+1) for 1 <= n0 < n; the range is empty when n0 == n and the
    result is 0.
    """
    if not (isinstance(n, int) and isinstance(n0, int)) or not 1 <= n0 <= n <= 170:
        raise PreconditionError(f"lemma_weight needs 1 <= n0 <= n <= 170, got n={n}, n0={n0}")
    if n0 == n:
        return 0.0
    scale = Fraction(math.factorial(n - n0 - 1), math.factorial(n))
    total = sum(
        (Fraction(math.factorial(big_n), math.factorial(big_n - n0)) for big_n in range(n0, n)),
        Fraction(0),
    )
    return float(total * scale)
