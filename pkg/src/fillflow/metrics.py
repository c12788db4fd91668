"""Market-level measures aggregated over UTC calendar intervals.

Per token side and interval, three measures are derived from the summed
transaction components (all exact integer micro-USDC):

* exchange-equivalent volume: trade + min(mint, burn). Offsetting issuance
  and redemption inside the interval are treated as secondary-market
  turnover, since the matching engine's exchange-vs-mint split is an
  artifact of order routing.
* net inflow: mint - burn, signed. Positive means fresh collateral was
  committed on net to that side.
* gross activity: trade + max(mint, burn) = exchange-equivalent + |inflow|.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .decompose import DecomposedTransaction
from .units import interval_floor, interval_range

SIDES = ("yes", "no")


@dataclass(frozen=True)
class SideTotals:
    """Summed components of one token side over one interval."""

    trade: int = 0
    mint: int = 0
    burn: int = 0

    def __add__(self, other: "SideTotals") -> "SideTotals":
        return SideTotals(self.trade + other.trade, self.mint + other.mint, self.burn + other.burn)


@dataclass(frozen=True)
class IntervalTotals:
    start: int
    partition: str
    yes: SideTotals
    no: SideTotals

    def side(self, side: str) -> SideTotals:
        if side == "yes":
            return self.yes
        if side == "no":
            return self.no
        if side == "combined":
            return self.yes + self.no
        raise ValueError(f"unknown side {side!r}")


@dataclass(frozen=True)
class MarketMeasures:
    """The three measures for one token side; v_g == v_e + |f| exactly."""

    v_e: int
    f: int
    v_g: int


def side_measures(totals: SideTotals) -> MarketMeasures:
    v_e = totals.trade + min(totals.mint, totals.burn)
    f = totals.mint - totals.burn
    return MarketMeasures(v_e=v_e, f=f, v_g=v_e + abs(f))


def exchange_equivalent_volume(totals: IntervalTotals) -> dict[str, int]:
    return {s: side_measures(totals.side(s)).v_e for s in SIDES}


def net_inflow(totals: IntervalTotals) -> dict[str, int]:
    return {s: side_measures(totals.side(s)).f for s in SIDES}


def gross_activity(totals: IntervalTotals) -> dict[str, int]:
    return {s: side_measures(totals.side(s)).v_g for s in SIDES}


def aggregate_components(
    records: Iterable[DecomposedTransaction],
    partition: str,
    market: str | None = None,
    dense: bool = False,
    start: int | None = None,
    end: int | None = None,
) -> list[IntervalTotals]:
    """Sum decomposed components into UTC-aligned hour/day/month intervals.

    By default only intervals containing at least one transaction are
    emitted; with ``dense`` the full [start, end) grid is emitted with
    zero totals for empty intervals (bounds default to the record span).
    """
    rows = [r for r in records if market is None or r.market == market]
    if start is not None or end is not None:
        lo = start if start is not None else min((r.timestamp for r in rows), default=0)
        hi = end if end is not None else max((r.timestamp for r in rows), default=0) + 1
        rows = [r for r in rows if lo <= r.timestamp < hi]

    sums: dict[int, list[int]] = {}
    for row in rows:
        key = interval_floor(row.timestamp, partition)
        acc = sums.setdefault(key, [0, 0, 0, 0, 0, 0])
        c = row.components
        acc[0] += c.yes_trade
        acc[1] += c.yes_mint
        acc[2] += c.yes_burn
        acc[3] += c.no_trade
        acc[4] += c.no_mint
        acc[5] += c.no_burn

    if dense:
        lo = start if start is not None else min(sums, default=0)
        hi = end if end is not None else (max(sums) + 1 if sums else 0)
        keys = interval_range(lo, hi, partition)
    else:
        keys = sorted(sums)

    out = []
    for key in keys:
        acc = sums.get(key, [0, 0, 0, 0, 0, 0])
        out.append(IntervalTotals(
            start=key,
            partition=partition,
            yes=SideTotals(trade=acc[0], mint=acc[1], burn=acc[2]),
            no=SideTotals(trade=acc[3], mint=acc[4], burn=acc[5]),
        ))
    return out


def merge_totals(intervals: Sequence[IntervalTotals]) -> IntervalTotals:
    """Union of intervals as a single aggregate (exact integer addition)."""
    if not intervals:
        raise ValueError("nothing to merge")
    yes = no = SideTotals()
    for it in intervals:
        yes = yes + it.yes
        no = no + it.no
    return IntervalTotals(
        start=min(it.start for it in intervals),
        partition=intervals[0].partition,
        yes=yes,
        no=no,
    )
