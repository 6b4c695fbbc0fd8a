"""Invariant audit of a journey store against the attribution properties."""
import math
from typing import List, Optional

import numpy as np

from src.core.coalition import EMPTY, CoalitionKey, iter_members
from src.core.config import settings
from src.models.journey import JourneyStore
from src.schemas.report import AuditCheck, AuditReport
from src.schemas.run_config import Kpi
from src.services.error_handling import NoDataError, StructuredLogger
from src.services.revenue import (
    CoalitionRevenue,
    OrderedRevenue,
    aggregate,
    aggregate_ordered,
    full_value,
    journey_value,
    zeta_transform,
)
from src.services.shapley import (
    Attribution,
    channel_totals,
    shapley_naive,
    shapley_ordered,
    shapley_simplified,
)

logger = StructuredLogger(__name__)

ORACLE_MAX_CHANNELS = 12


def _relative(residual: float, scale: float) -> float:
    return residual / scale if scale else residual


def check_efficiency(name: str, attribution: Attribution, total: float, tolerance: float) -> AuditCheck:
    residual = _relative(abs(attribution.total - total), abs(total))
    return AuditCheck(
        name=f"efficiency[{name}]",
        passed=residual <= tolerance,
        residual=residual,
        detail=f"sum phi = {attribution.total!r}, total value = {total!r}",
    )


def check_dummy(attribution: Attribution, visited: int) -> AuditCheck:
    visited = CoalitionKey(visited)
    dummies = [j for j in range(attribution.p) if not visited.contains(j)]
    offenders = [j for j in dummies if attribution.values[j] != 0.0]
    residual = max((abs(float(attribution.values[j])) for j in dummies), default=0.0)
    return AuditCheck(
        name="dummy",
        passed=not offenders,
        residual=residual,
        detail=f"{len(dummies)} unvisited channels" + (f", nonzero at {offenders}" if offenders else ""),
    )


def check_nonnegativity(attribution: Attribution, ordered_min: float) -> AuditCheck:
    smallest = min(float(attribution.values.min()) if attribution.p else 0.0, ordered_min)
    return AuditCheck(
        name="nonnegativity",
        passed=smallest >= 0.0,
        residual=max(0.0, -smallest),
        detail=f"smallest credit {smallest!r}",
    )


def check_reconstruction(rev: CoalitionRevenue, orev: OrderedRevenue, tolerance: float) -> AuditCheck:
    """sum_i R^i(S, j) must equal R(S) for every stored S and every j in S."""
    collapsed = orev.collapse()
    worst = 0.0
    failures = 0
    for bits, value in rev.entries.items():
        for channel in iter_members(bits):
            residual = _relative(abs(collapsed.get((bits, channel), 0.0) - value), abs(value))
            worst = max(worst, residual)
            failures += residual > tolerance
    stray = [key for key in collapsed if key[0] not in rev.entries]
    return AuditCheck(
        name="reconstruction",
        passed=failures == 0 and not stray,
        residual=worst,
        detail=f"{failures} mismatched (S, j) pairs, {len(stray)} entries without R(S)",
    )


def check_ordered_consistency(ordered: Attribution, simplified: Attribution, tolerance: float) -> AuditCheck:
    scale = abs(simplified.total)
    residual = _relative(float(np.max(np.abs(ordered.values - simplified.values), initial=0.0)), scale)
    return AuditCheck(name="ordered-consistency", passed=residual <= tolerance, residual=residual)


def check_monotonicity(rev: CoalitionRevenue, tolerance: float) -> AuditCheck:
    table = zeta_transform(rev).values
    coalitions = np.arange(len(table), dtype=np.int64)
    worst = 0.0
    for bit in range(rev.p):
        without = coalitions[(coalitions & (1 << bit)) == 0]
        drops = table[without] - table[without | (1 << bit)]
        worst = max(worst, float(drops.max(initial=0.0)))
    residual = _relative(worst, abs(rev.total))
    return AuditCheck(name="monotonicity", passed=residual <= tolerance, residual=residual)


def check_oracle(rev: CoalitionRevenue, simplified: Attribution, tolerance: float) -> AuditCheck:
    naive = shapley_naive(rev)
    residual = _relative(float(np.max(np.abs(naive.values - simplified.values), initial=0.0)), abs(rev.total))
    return AuditCheck(name="naive-equivalence", passed=residual <= tolerance, residual=residual)


def audit(
    store: JourneyStore,
    kpi: Kpi = Kpi.REVENUE,
    threads: int = 1,
    tolerance: Optional[float] = None,
    rev: Optional[CoalitionRevenue] = None,
    orev: Optional[OrderedRevenue] = None,
) -> AuditReport:
    """Run every applicable invariant check on the store's actual aggregates."""
    if not len(store):
        raise NoDataError(f"{store.provenance}: no converted journeys to audit")
    tolerance = settings.INVARIANT_TOLERANCE if tolerance is None else tolerance
    rev = rev if rev is not None else aggregate(store, kpi=kpi, threads=threads)
    orev = orev if orev is not None else aggregate_ordered(store, kpi=kpi, threads=threads)

    simplified = shapley_simplified(rev)
    ordered = shapley_ordered(orev)
    collapsed = channel_totals(ordered)
    store_total = math.fsum(journey_value(j, kpi) for j in store.journeys)

    visited = EMPTY
    for journey in store.journeys:
        visited = visited.union(journey.coalition)
    campaign_value = full_value(rev)

    checks: List[AuditCheck] = [
        AuditCheck(
            name="total-value",
            passed=_relative(abs(campaign_value - store_total), abs(store_total)) <= tolerance,
            residual=_relative(abs(campaign_value - store_total), abs(store_total)),
            detail=f"v(P) = {campaign_value!r}, journeys total = {store_total!r}",
        ),
        check_efficiency("simplified", simplified, rev.total, tolerance),
        check_efficiency("ordered", collapsed, rev.total, tolerance),
        check_dummy(simplified, visited),
        check_nonnegativity(simplified, float(ordered.matrix.min(initial=0.0))),
        check_reconstruction(rev, orev, tolerance),
        check_ordered_consistency(collapsed, simplified, tolerance),
    ]
    if rev.p <= settings.NAIVE_MAX_CHANNELS:
        checks.append(check_monotonicity(rev, tolerance))
    if rev.p <= ORACLE_MAX_CHANNELS:
        checks.append(check_oracle(rev, simplified, tolerance))

    report = AuditReport(journeys=len(store), channels=store.p, total_value=rev.total, checks=checks)
    logger.info(
        "Audit finished",
        extra={"passed": report.passed, "failed": [c.name for c in checks if not c.passed]},
    )
    return report
