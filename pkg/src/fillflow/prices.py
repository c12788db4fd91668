"""Per-token price series, arbitrage deviation, and disagreement analytics.

Transaction prices are exact rationals (collateral flow over share flow);
they only become floats inside the correlation layer. The YES+NO price sum
of a complementary pair is pinned to 1 by the split/merge arbitrage
mechanisms, so the deviation series delta = p_yes + p_no - 1 measures how
tightly that constraint binds between trade arrivals.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .decompose import DecomposedTransaction
from .errors import DataError
from .events import Transaction
from .metrics import aggregate_components, side_measures
from .units import DAY, day_floor, parse_utc

logger = logging.getLogger(__name__)

# Biden's withdrawal date; the combined Democrat series switches source here.
DEFAULT_SPLICE_DAY = "2024-07-21"


@dataclass(frozen=True)
class PricePoint:
    """One transaction-level trade price for a token.

    Outcome shares resolve to 0 or 1, so a tradable price lies strictly
    inside (0, 1): 0 < usdc_micro < share_micro.
    """

    timestamp: int
    block: int
    tx_index: int
    usdc_micro: int
    share_micro: int

    def __post_init__(self):
        if self.share_micro <= 0:
            raise DataError("price point needs a positive share quantity")
        if not 0 < self.usdc_micro < self.share_micro:
            raise DataError(
                f"price {self.usdc_micro}/{self.share_micro} outside (0, 1)")

    @property
    def price(self) -> Fraction:
        """USD per share (micro units cancel)."""
        return Fraction(self.usdc_micro, self.share_micro)

    @property
    def size_shares(self) -> Fraction:
        return Fraction(self.share_micro, 10**6)


@dataclass(frozen=True)
class DeviationPoint:
    timestamp: int
    delta: float
    p_yes: float
    p_no: float
    yes_staleness: int
    no_staleness: int


@dataclass(frozen=True)
class InflowSeries:
    """Dense day-aligned net-inflow series, values in micro-USDC."""

    days: tuple[int, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.days) != len(self.values):
            raise DataError("days and values differ in length")
        for prev, cur in zip(self.days, self.days[1:]):
            if cur - prev != DAY:
                raise DataError("inflow series must be dense and day-aligned")

    def usd(self) -> list[float]:
        return [v / 10**6 for v in self.values]


def build_price_series(transactions: Iterable[Transaction], token_id: str) -> list[PricePoint]:
    """One price point per transaction touching the token.

    Price is the transaction-level collateral flow over share flow for the
    token. When the token trades on both sides within one settlement, the
    side with the larger share total is the aggregate order that netted the
    partial fills, so only that side is used (summing both would double
    count the exchanged quantity). Zero-share and out-of-(0,1) prices are
    skipped with a warning.
    """
    points: list[PricePoint] = []
    skipped = 0
    for tx in transactions:
        buy_usdc = buy_shares = sell_usdc = sell_shares = 0
        for fill in tx.fills:
            if fill.token_id != token_id:
                continue
            if fill.is_buy:
                buy_usdc += fill.usdc_amount
                buy_shares += fill.share_amount
            else:
                sell_usdc += fill.usdc_amount
                sell_shares += fill.share_amount
        if buy_shares == 0 and sell_shares == 0:
            continue
        if buy_shares >= sell_shares:
            usdc, shares = buy_usdc, buy_shares
        else:
            usdc, shares = sell_usdc, sell_shares
        if shares == 0 or not 0 < Fraction(usdc, shares) < 1:
            skipped += 1
            continue
        points.append(PricePoint(
            timestamp=tx.timestamp,
            block=tx.block,
            tx_index=tx.tx_index,
            usdc_micro=usdc,
            share_micro=shares,
        ))
    if skipped:
        logger.warning("skipped %d transactions with degenerate prices for token %s",
                       skipped, token_id)
    return points


def arbitrage_deviation(
    yes_series: Sequence[PricePoint],
    no_series: Sequence[PricePoint],
    grid_step: int = 3600,
) -> list[DeviationPoint]:
    """delta = p_yes + p_no - 1 on a fixed grid with last-trade carry-forward.

    The grid starts at the later of the two series' first observations (so
    both legs have a price) and ends at the last observation of either leg.
    Legs are piecewise-constant between trades; per-leg staleness is the
    seconds since the leg's latest trade at the grid time.
    """
    if not yes_series or not no_series:
        raise DataError("both legs need at least one trade")
    if grid_step <= 0:
        raise ValueError("grid step must be positive")
    start = max(yes_series[0].timestamp, no_series[0].timestamp)
    end = max(yes_series[-1].timestamp, no_series[-1].timestamp)

    out: list[DeviationPoint] = []
    i = j = 0
    t = start
    while t <= end:
        while i + 1 < len(yes_series) and yes_series[i + 1].timestamp <= t:
            i += 1
        while j + 1 < len(no_series) and no_series[j + 1].timestamp <= t:
            j += 1
        p_yes = yes_series[i].price
        p_no = no_series[j].price
        delta = p_yes + p_no - 1  # exact rational; float only at the boundary
        out.append(DeviationPoint(
            timestamp=t,
            delta=float(delta),
            p_yes=float(p_yes),
            p_no=float(p_no),
            yes_staleness=t - yes_series[i].timestamp,
            no_staleness=t - no_series[j].timestamp,
        ))
        t += grid_step
    return out


def daily_net_inflow(
    records: Iterable[DecomposedTransaction],
    market: str,
    side: str = "yes",
    start: int | None = None,
    end: int | None = None,
) -> InflowSeries:
    """Dense daily net inflow (mint - burn) for one token side of a market."""
    totals = aggregate_components(records, "day", market=market, dense=True, start=start, end=end)
    days = tuple(t.start for t in totals)
    values = tuple(side_measures(t.side(side)).f for t in totals)
    return InflowSeries(days=days, values=values)


def splice_inflow_series(before: InflowSeries, after: InflowSeries, splice_day: int) -> InflowSeries:
    """Days strictly before ``splice_day`` from one series, the rest from the other."""
    splice_day = day_floor(splice_day)
    days: list[int] = []
    values: list[int] = []
    for day, value in zip(before.days, before.values):
        if day < splice_day:
            days.append(day)
            values.append(value)
    for day, value in zip(after.days, after.values):
        if day >= splice_day:
            days.append(day)
            values.append(value)
    if not days:
        raise DataError("splice produced an empty series")
    first, last = days[0], days[-1]
    dense = {d: 0 for d in range(first, last + DAY, DAY)}
    for day, value in zip(days, values):
        dense[day] = value
    return InflowSeries(days=tuple(sorted(dense)), values=tuple(dense[d] for d in sorted(dense)))


def splice_democrat_market(
    records: Iterable[DecomposedTransaction],
    first_market: str = "Biden",
    second_market: str = "Harris",
    splice_day: str | int = DEFAULT_SPLICE_DAY,
    side: str = "yes",
    start: int | None = None,
    end: int | None = None,
) -> InflowSeries:
    """Combined daily net-inflow series across the nominee hand-off.

    Uses ``first_market`` on days before the splice day (00:00 UTC) and
    ``second_market`` from that day on; the hand-off announcement happened
    mid-day but the series is spliced at the date boundary.
    """
    rows = list(records)
    boundary = day_floor(parse_utc(splice_day))
    before = daily_net_inflow(rows, first_market, side, start=start, end=end)
    after = daily_net_inflow(rows, second_market, side, start=start, end=end)
    return splice_inflow_series(before, after, boundary)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Pearson correlation; None when either side has zero variance."""
    n = len(xs)
    if n != len(ys) or n < 2:
        raise DataError("correlation needs two equal-length series of >= 2 points")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        return None
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / math.sqrt(sxx * syy)


def rolling_inflow_correlation(
    series_a: InflowSeries,
    series_b: InflowSeries,
    window_days: int = 90,
    step_days: int = 1,
) -> list[tuple[int, float | None]]:
    """Trailing-window Pearson correlation of two daily inflow series.

    Series are aligned on their common day span, which must cover at least
    one window. Each output (day, value) is the correlation over the
    ``window_days`` ending on that day; windows where either leg is
    constant yield None rather than 0.
    """
    if window_days < 2 or step_days < 1:
        raise ValueError("window must be >= 2 days and step >= 1 day")
    lo = max(series_a.days[0], series_b.days[0])
    hi = min(series_a.days[-1], series_b.days[-1])
    if hi - lo < (window_days - 1) * DAY:
        raise DataError("common span shorter than the correlation window")

    a_by_day = dict(zip(series_a.days, series_a.values))
    b_by_day = dict(zip(series_b.days, series_b.values))
    days = list(range(lo, hi + DAY, DAY))
    raw_x = [a_by_day[d] for d in days]
    raw_y = [b_by_day[d] for d in days]
    xs = [v / 10**6 for v in raw_x]
    ys = [v / 10**6 for v in raw_y]

    out: list[tuple[int, float | None]] = []
    for i in range(window_days - 1, len(days), step_days):
        window = slice(i - window_days + 1, i + 1)
        # constancy decided on the exact integers, not their float images
        if min(raw_x[window]) == max(raw_x[window]) or min(raw_y[window]) == max(raw_y[window]):
            out.append((days[i], None))
            continue
        out.append((days[i], pearson(xs[window], ys[window])))
    return out
