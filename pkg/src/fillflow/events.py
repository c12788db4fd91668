"""Fill-event data model, ledger file parsing, and market configuration.

A ledger is a list of OrderFilled records. Every fill swaps collateral
(asset id "0", USDC) against exactly one outcome token; amounts are integers
in 10^-6 units. Fills sharing (block, txIndex) form one settlement
transaction, the unit of the volume decomposition.

File shards can be parsed independently and merged: ``group_transactions``
gives the same partition for any input permutation, so a deterministic
merge by (block, txIndex, logIndex) is just concatenation.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, DuplicateEventError, ParseError, SchemaError
from .units import parse_utc

COLLATERAL_ID = "0"

# Canonical wire schema: JSONL object keys / CSV columns, in order.
FILL_FIELDS = (
    "block",
    "txIndex",
    "logIndex",
    "maker",
    "taker",
    "makerAssetId",
    "takerAssetId",
    "makerAmountFilled",
    "takerAmountFilled",
    "timestamp",
)


@dataclass(frozen=True)
class FillEvent:
    """One OrderFilled record.

    ``maker_amount`` is in micro-USDC when ``maker_asset_id`` is "0", else
    micro-shares; symmetrically for the taker side. Exactly one of the two
    asset ids must be the collateral id.
    """

    block: int
    tx_index: int
    log_index: int
    maker: str
    taker: str
    maker_asset_id: str
    taker_asset_id: str
    maker_amount: int
    taker_amount: int
    timestamp: int

    def __post_init__(self):
        for name in ("block", "tx_index", "log_index", "maker_amount", "taker_amount"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise SchemaError(f"{name} must be a non-negative integer, got {value!r}")
        maker_is_cash = self.maker_asset_id == COLLATERAL_ID
        taker_is_cash = self.taker_asset_id == COLLATERAL_ID
        if maker_is_cash == taker_is_cash:
            which = "both" if maker_is_cash else "neither"
            raise SchemaError(
                f"{which} asset ids are collateral in fill "
                f"({self.block}, {self.tx_index}, {self.log_index}); "
                "every fill must exchange collateral against one outcome token"
            )
        for name in ("maker_asset_id", "taker_asset_id"):
            token = getattr(self, name)
            if not token.isdigit():
                raise SchemaError(f"{name} must be a decimal string, got {token!r}")

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.block, self.tx_index, self.log_index)

    @property
    def is_buy(self) -> bool:
        """True when the maker pays collateral for outcome tokens."""
        return self.maker_asset_id == COLLATERAL_ID

    @property
    def token_id(self) -> str:
        return self.taker_asset_id if self.is_buy else self.maker_asset_id

    @property
    def usdc_amount(self) -> int:
        return self.maker_amount if self.is_buy else self.taker_amount

    @property
    def share_amount(self) -> int:
        return self.taker_amount if self.is_buy else self.maker_amount

    def to_record(self) -> dict[str, str | int]:
        """Canonical wire record; amounts as integer strings."""
        return {
            "block": self.block,
            "txIndex": self.tx_index,
            "logIndex": self.log_index,
            "maker": self.maker,
            "taker": self.taker,
            "makerAssetId": self.maker_asset_id,
            "takerAssetId": self.taker_asset_id,
            "makerAmountFilled": str(self.maker_amount),
            "takerAmountFilled": str(self.taker_amount),
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class Transaction:
    """All fills sharing (block, txIndex), ordered by logIndex."""

    block: int
    tx_index: int
    timestamp: int
    fills: tuple[FillEvent, ...]

    def __post_init__(self):
        if not self.fills:
            raise SchemaError(f"transaction ({self.block}, {self.tx_index}) has no fills")

    @property
    def key(self) -> tuple[int, int]:
        return (self.block, self.tx_index)

    def token_ids(self) -> set[str]:
        return {f.token_id for f in self.fills}


@dataclass(frozen=True)
class MarketSpec:
    """A binary market: one candidate, complementary YES/NO token pair."""

    candidate: str
    yes_token_id: str
    no_token_id: str
    launch: int
    resolution: int | None = None

    def __post_init__(self):
        if self.yes_token_id == self.no_token_id:
            raise ConfigError(f"market {self.candidate!r}: YES and NO token ids are equal")
        if COLLATERAL_ID in (self.yes_token_id, self.no_token_id):
            raise ConfigError(f"market {self.candidate!r}: token id clashes with collateral id")

    @property
    def token_ids(self) -> tuple[str, str]:
        return (self.yes_token_id, self.no_token_id)

    def side_of(self, token_id: str) -> str:
        if token_id == self.yes_token_id:
            return "yes"
        if token_id == self.no_token_id:
            return "no"
        raise KeyError(f"token {token_id} not in market {self.candidate!r}")

    def complement(self, token_id: str) -> str:
        if token_id == self.yes_token_id:
            return self.no_token_id
        if token_id == self.no_token_id:
            return self.yes_token_id
        raise KeyError(f"token {token_id} not in market {self.candidate!r}")


@dataclass(frozen=True)
class LedgerWindow:
    """Transactions ordered by (block, txIndex), timestamps in [start, end)."""

    transactions: tuple[Transaction, ...]
    start: int
    end: int

    def __post_init__(self):
        if self.end <= self.start:
            raise SchemaError("window end must be after start")
        prev = None
        for tx in self.transactions:
            if not self.start <= tx.timestamp < self.end:
                raise SchemaError(
                    f"tx {tx.key} at {tx.timestamp} outside window [{self.start}, {self.end})"
                )
            if prev is not None and tx.key <= prev:
                raise SchemaError(f"transactions out of order at {tx.key}")
            prev = tx.key


def clip_window(transactions: Sequence[Transaction], start: int, end: int) -> LedgerWindow:
    """Restrict an ordered transaction list to [start, end)."""
    kept = tuple(tx for tx in transactions if start <= tx.timestamp < end)
    return LedgerWindow(kept, start, end)


def _to_amount(value, field: str) -> int:
    # Amounts arrive as integer strings (token amounts exceed 64-bit range
    # is fine for Python ints); ints are accepted, floats are not.
    if isinstance(value, bool):
        raise ValueError(f"{field}: not an integer: {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str) and value.strip().lstrip("-").isdigit():
        return int(value.strip())
    raise ValueError(f"{field}: not an integer: {value!r}")


def fill_from_record(
    record: Mapping,
    line_no: int | None = None,
    block_times: Mapping[int, int] | None = None,
) -> FillEvent:
    """Build a FillEvent from a decoded wire record.

    ``timestamp`` may be omitted when a block->time sidecar mapping is
    supplied; one timestamp per block is the unit of time assignment.
    """
    try:
        block = _to_amount(record["block"], "block")
        timestamp = record.get("timestamp")
        if timestamp in (None, "") and block_times is not None:
            timestamp = block_times.get(block)
        if timestamp in (None, ""):
            raise ValueError("missing timestamp (no inline value, no sidecar entry)")
        return FillEvent(
            block=block,
            tx_index=_to_amount(record["txIndex"], "txIndex"),
            log_index=_to_amount(record["logIndex"], "logIndex"),
            maker=str(record["maker"]),
            taker=str(record["taker"]),
            maker_asset_id=str(record["makerAssetId"]).strip(),
            taker_asset_id=str(record["takerAssetId"]).strip(),
            maker_amount=_to_amount(record["makerAmountFilled"], "makerAmountFilled"),
            taker_amount=_to_amount(record["takerAmountFilled"], "takerAmountFilled"),
            timestamp=_to_amount(timestamp, "timestamp"),
        )
    except KeyError as exc:
        raise ParseError(f"missing field {exc.args[0]!r}", line_no) from exc
    except ValueError as exc:
        raise ParseError(str(exc), line_no) from exc


def parse_fill_record(
    line: str,
    fmt: str = "jsonl",
    line_no: int | None = None,
    columns: Sequence[str] = FILL_FIELDS,
    block_times: Mapping[int, int] | None = None,
) -> FillEvent:
    """Parse one text line in the declared format into a FillEvent.

    CSV lines follow ``columns`` (canonical order by default; file readers
    pass the header they saw). Malformed lines raise ParseError with the
    line number; fills where both or neither asset id is collateral raise
    SchemaError.
    """
    if fmt == "jsonl":
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}", line_no) from exc
        if not isinstance(record, dict):
            raise ParseError("record is not an object", line_no)
    elif fmt == "csv":
        row = next(csv.reader([line]))
        if len(row) != len(columns):
            raise ParseError(
                f"expected {len(columns)} columns, got {len(row)}", line_no
            )
        record = dict(zip(columns, row))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return fill_from_record(record, line_no, block_times)


def read_fills(
    path,
    fmt: str | None = None,
    block_times: Mapping[int, int] | None = None,
) -> list[FillEvent]:
    """Read a ledger shard (JSONL, or CSV with a header row)."""
    path = str(path)
    if fmt is None:
        fmt = "csv" if path.endswith(".csv") else "jsonl"
    fills: list[FillEvent] = []
    with open(path, encoding="utf-8") as fh:
        if fmt == "csv":
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                return fills
            missing = [c for c in FILL_FIELDS if c not in header and c != "timestamp"]
            if missing:
                raise ParseError(f"CSV header missing columns: {missing}", 1)
            for line_no, row in enumerate(reader, start=2):
                if not row:
                    continue
                record = dict(zip(header, row))
                fills.append(fill_from_record(record, line_no, block_times))
        else:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                fills.append(parse_fill_record(line, "jsonl", line_no, block_times=block_times))
    return fills


def write_fills(path, fills: Iterable[FillEvent], fmt: str = "jsonl") -> None:
    """Write fills in the canonical wire schema (round-trips bit-exactly)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if fmt == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(FILL_FIELDS)
            for fill in fills:
                record = fill.to_record()
                writer.writerow([record[c] for c in FILL_FIELDS])
        else:
            for fill in fills:
                fh.write(json.dumps(fill.to_record()) + "\n")


def load_block_times(path) -> dict[int, int]:
    """Block->timestamp sidecar: JSON object of block number to UTC seconds."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return {int(block): parse_utc(ts) for block, ts in raw.items()}


def group_transactions(fills: Iterable[FillEvent]) -> list[Transaction]:
    """Partition fills into transactions keyed by (block, txIndex).

    Within each transaction fills are ordered by logIndex; transactions are
    ordered by (block, txIndex). The partition is permutation-invariant and
    loses or duplicates nothing. Exact duplicate coordinates are rejected:
    fill streams are assumed pre-deduplicated.
    """
    groups: dict[tuple[int, int], list[FillEvent]] = {}
    seen: set[tuple[int, int, int]] = set()
    for fill in fills:
        if fill.key in seen:
            raise DuplicateEventError(f"duplicate fill coordinates {fill.key}")
        seen.add(fill.key)
        groups.setdefault((fill.block, fill.tx_index), []).append(fill)

    transactions = []
    for (block, tx_index), group in sorted(groups.items()):
        group.sort(key=lambda f: f.log_index)
        timestamps = {f.timestamp for f in group}
        if len(timestamps) > 1:
            raise SchemaError(
                f"transaction ({block}, {tx_index}) has conflicting timestamps {sorted(timestamps)}"
            )
        transactions.append(
            Transaction(block=block, tx_index=tx_index, timestamp=group[0].timestamp, fills=tuple(group))
        )
    return transactions


def markets_from_entries(entries) -> list[MarketSpec]:
    """Build validated MarketSpecs from decoded config entries."""
    if not isinstance(entries, list):
        raise ConfigError("market config must contain a 'markets' list")
    markets: list[MarketSpec] = []
    claimed: dict[str, str] = {}
    for i, entry in enumerate(entries):
        try:
            spec = MarketSpec(
                candidate=str(entry["candidate"]),
                yes_token_id=str(entry["yesTokenId"]),
                no_token_id=str(entry["noTokenId"]),
                launch=parse_utc(entry["launch"]),
                resolution=parse_utc(entry["resolution"]) if entry.get("resolution") else None,
            )
        except KeyError as exc:
            raise ConfigError(f"market entry {i}: missing field {exc.args[0]!r}") from exc
        for token in spec.token_ids:
            if token in claimed:
                raise ConfigError(
                    f"token id {token} claimed by both {claimed[token]!r} and {spec.candidate!r}"
                )
            claimed[token] = spec.candidate
        markets.append(spec)
    return markets


def load_market_config(path) -> list[MarketSpec]:
    """Load the market configuration document.

    One JSON document listing markets; every token id may appear in at most
    one market, and each market must pair YES and NO explicitly.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid market config JSON: {exc}") from exc
    entries = doc.get("markets") if isinstance(doc, dict) else doc
    return markets_from_entries(entries)


def write_market_config(path, markets: Sequence[MarketSpec]) -> None:
    from .units import format_utc

    doc = {
        "markets": [
            {
                "candidate": m.candidate,
                "yesTokenId": m.yes_token_id,
                "noTokenId": m.no_token_id,
                "launch": format_utc(m.launch),
                **({"resolution": format_utc(m.resolution)} if m.resolution else {}),
            }
            for m in markets
        ]
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def market_for_token(markets: Sequence[MarketSpec], token_id: str) -> MarketSpec | None:
    for market in markets:
        if token_id in market.token_ids:
            return market
    return None
