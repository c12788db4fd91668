"""Fixed-point money units and UTC calendar helpers.

All monetary and share amounts are carried as exact integers in 10^-6 units
(micro-USDC / micro-shares). Conversion to decimal USD strings happens only
at presentation time, so ledger arithmetic never touches floating point.
"""

from __future__ import annotations

import calendar
from datetime import datetime, timezone

MICRO = 10**6
HOUR = 3600
DAY = 86400

# Analysis window defaults: market launch through the first network call of
# the election outcome (both UTC).
DEFAULT_WINDOW_START = "2024-01-05T00:00:00Z"
DEFAULT_WINDOW_END = "2024-11-06T06:46:00Z"


def micro_to_usd(amount: int) -> str:
    """Render integer micro-USDC as a decimal USD string with 6 digits."""
    sign = "-" if amount < 0 else ""
    amount = abs(amount)
    return f"{sign}{amount // MICRO}.{amount % MICRO:06d}"


def micro_to_musd(amount: int) -> float:
    """Micro-USDC to million USD (statistics layer only)."""
    return amount / 10**12


def parse_utc(value: str | int | float) -> int:
    """Parse an ISO-8601 UTC instant (or epoch seconds) to epoch seconds.

    Accepts ``2024-07-21``, ``2024-07-21T17:46:00Z``, an explicit ``+00:00``
    offset, or a bare integer. Naive datetimes are taken as UTC.
    """
    if isinstance(value, bool):
        raise ValueError(f"not a timestamp: {value!r}")
    if isinstance(value, (int, float)):
        return int(value)
    text = value.strip()
    if text.isdigit():
        return int(text)
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def format_utc(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def format_date(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%d")


def hour_floor(ts: int) -> int:
    return ts - ts % HOUR


def day_floor(ts: int) -> int:
    return ts - ts % DAY


def month_floor(ts: int) -> int:
    dt = datetime.fromtimestamp(ts, tz=timezone.utc)
    return int(datetime(dt.year, dt.month, 1, tzinfo=timezone.utc).timestamp())


def next_month(ts: int) -> int:
    """Start of the month after the month containing ``ts``."""
    dt = datetime.fromtimestamp(ts, tz=timezone.utc)
    days = calendar.monthrange(dt.year, dt.month)[1]
    return int(datetime(dt.year, dt.month, 1, tzinfo=timezone.utc).timestamp()) + days * DAY


def interval_floor(ts: int, partition: str) -> int:
    """UTC-aligned start of the hour/day/month interval containing ``ts``."""
    if partition == "hour":
        return hour_floor(ts)
    if partition == "day":
        return day_floor(ts)
    if partition == "month":
        return month_floor(ts)
    raise ValueError(f"unknown partition {partition!r}")


def interval_next(start: int, partition: str) -> int:
    if partition == "hour":
        return start + HOUR
    if partition == "day":
        return start + DAY
    if partition == "month":
        return next_month(start)
    raise ValueError(f"unknown partition {partition!r}")


def interval_range(start: int, end: int, partition: str) -> list[int]:
    """Aligned interval starts covering [start, end)."""
    if end <= start:
        return []
    out = []
    cur = interval_floor(start, partition)
    while cur < end:
        out.append(cur)
        cur = interval_next(cur, partition)
    return out
