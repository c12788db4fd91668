"""Transaction classification and six-component volume decomposition.

Each settlement transaction is split into trade/mint/burn volume per token
side, in exact integer micro-USDC:

* ``buy_vol``  = sum of makerAmountFilled over fills paying collateral,
* ``sell_vol`` = sum of takerAmountFilled over fills receiving collateral.

Equal gross flows mean a pure token exchange. A buy surplus means new full
sets were minted against fresh collateral; a sell surplus means full sets
were burned back into collateral. Mixed transactions carry an exchange leg
alongside the mint/burn: the exchange volume is min(buy_vol, sell_vol) and
is attributed to the token of the single-token side, with the per-token
mint/burn components taken from the surplus side's sums.

The identity buy_vol - sell_vol = total mint - total burn holds exactly for
every decomposed transaction, and all six components are non-negative;
shapes for which this cannot hold (e.g. simultaneous mint and burn) raise
DecompositionAnomalyError instead of guessing.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import DecompositionAnomalyError, WrongMarketError
from .events import MarketSpec, Transaction, market_for_token

logger = logging.getLogger(__name__)


class TxKind(str, Enum):
    PURE_EXCHANGE = "pure_exchange"
    SHARE_MINTING = "share_minting"
    SHARE_BURNING = "share_burning"
    MIXED_MINT = "mixed_mint"
    MIXED_BURN = "mixed_burn"


@dataclass(frozen=True)
class VolumeComponents:
    """Per-transaction volume split, all in micro-USDC integers."""

    yes_trade: int = 0
    no_trade: int = 0
    yes_mint: int = 0
    no_mint: int = 0
    yes_burn: int = 0
    no_burn: int = 0
    buy_vol: int = 0
    sell_vol: int = 0

    def check(self) -> None:
        """Assert the decomposition invariants (used by tests and fuzzing)."""
        parts = (self.yes_trade, self.no_trade, self.yes_mint,
                 self.no_mint, self.yes_burn, self.no_burn)
        assert all(p >= 0 for p in parts), f"negative component in {self}"
        assert self.yes_trade == 0 or self.no_trade == 0, "trade volume on both tokens"
        assert self.yes_trade + self.no_trade == min(self.buy_vol, self.sell_vol)
        mint = self.yes_mint + self.no_mint
        burn = self.yes_burn + self.no_burn
        assert self.buy_vol - self.sell_vol == mint - burn, "conservation violated"
        if self.buy_vol >= self.sell_vol:
            assert burn == 0
        if self.buy_vol <= self.sell_vol:
            assert mint == 0


@dataclass(frozen=True)
class DecomposedTransaction:
    block: int
    tx_index: int
    timestamp: int
    market: str
    kind: TxKind
    components: VolumeComponents


@dataclass(frozen=True)
class AnomalyRecord:
    block: int
    tx_index: int
    timestamp: int
    market: str
    reason: str


def _usdc_sums(fills) -> tuple[dict[str, int], dict[str, int]]:
    """Per-token collateral sums: (buy-side by token bought, sell-side by token sold)."""
    buy: dict[str, int] = {}
    sell: dict[str, int] = {}
    for fill in fills:
        if fill.is_buy:
            buy[fill.taker_asset_id] = buy.get(fill.taker_asset_id, 0) + fill.maker_amount
        else:
            sell[fill.maker_asset_id] = sell.get(fill.maker_asset_id, 0) + fill.taker_amount
    return buy, sell


def gross_flows(tx) -> tuple[int, int]:
    """The two gross collateral flows (buy_vol, sell_vol).

    Accepts a Transaction or any iterable of fills; a transaction left with
    no fills after market filtering has (0, 0) flows.
    """
    fills = tx.fills if isinstance(tx, Transaction) else tx
    buy, sell = _usdc_sums(fills)
    return sum(buy.values()), sum(sell.values())


def _check_market(tx: Transaction, market: MarketSpec) -> None:
    foreign = tx.token_ids() - set(market.token_ids)
    if foreign:
        raise WrongMarketError(
            f"tx {tx.key} references token ids outside market {market.candidate!r}: "
            f"{sorted(foreign)}"
        )


def classify_transaction(tx: Transaction, market: MarketSpec) -> TxKind:
    """Classify by gross-flow comparison and distinct asset ids.

    A buy surplus is minting; it is mixed when the maker side carries more
    than one distinct asset id (collateral plus an exchanged token). A sell
    surplus mirrors this on the taker side.
    """
    _check_market(tx, market)
    buy_vol, sell_vol = gross_flows(tx.fills)
    if buy_vol == sell_vol:
        return TxKind.PURE_EXCHANGE
    if buy_vol > sell_vol:
        maker_ids = {f.maker_asset_id for f in tx.fills}
        return TxKind.MIXED_MINT if len(maker_ids) > 1 else TxKind.SHARE_MINTING
    taker_ids = {f.taker_asset_id for f in tx.fills}
    return TxKind.MIXED_BURN if len(taker_ids) > 1 else TxKind.SHARE_BURNING


def decompose_transaction(tx: Transaction, market: MarketSpec) -> VolumeComponents:
    """Decompose one transaction into the six volume components.

    The exchange volume min(buy_vol, sell_vol) is attributed to a single
    token: the exchange-leg token of a mixed transaction (the token on the
    smaller side), else the bought token. When the choice is ambiguous the
    lexicographically smallest token id is used, which only happens on
    equal-flow transactions spanning both tokens (flagged in logs).
    """
    kind = classify_transaction(tx, market)
    buy, sell = _usdc_sums(tx.fills)
    buy_vol, sell_vol = sum(buy.values()), sum(sell.values())
    trade_vol = min(buy_vol, sell_vol)

    if len(buy) > 1 and len(sell) > 1:
        raise DecompositionAnomalyError(
            "simultaneous mint and burn (both sides span multiple tokens)",
            tx.block, tx.tx_index,
        )

    trade: dict[str, int] = {}
    mint: dict[str, int] = {}
    burn: dict[str, int] = {}

    if kind is TxKind.PURE_EXCHANGE:
        if trade_vol:
            if len(buy) > 1:
                logger.warning(
                    "equal-flow tx %s spans tokens %s; attributing exchange volume "
                    "to the lexicographically smallest id", tx.key, sorted(buy))
            trade[min(buy)] = trade_vol
    elif kind in (TxKind.SHARE_MINTING, TxKind.MIXED_MINT):
        mint = dict(buy)
        if trade_vol:
            leg = min(sell)  # the exchanged token: the one sold for collateral
            trade[leg] = trade_vol
            mint[leg] = mint.get(leg, 0) - trade_vol
    else:
        burn = dict(sell)
        if trade_vol:
            leg = min(buy)  # the exchanged token: the one bought with collateral
            trade[leg] = trade_vol
            burn[leg] = burn.get(leg, 0) - trade_vol

    for name, sums in (("mint", mint), ("burn", burn)):
        for token, value in sums.items():
            if value < 0:
                raise DecompositionAnomalyError(
                    f"negative {name} component on token {token}", tx.block, tx.tx_index
                )

    yes, no = market.yes_token_id, market.no_token_id
    components = VolumeComponents(
        yes_trade=trade.get(yes, 0),
        no_trade=trade.get(no, 0),
        yes_mint=mint.get(yes, 0),
        no_mint=mint.get(no, 0),
        yes_burn=burn.get(yes, 0),
        no_burn=burn.get(no, 0),
        buy_vol=buy_vol,
        sell_vol=sell_vol,
    )
    components.check()
    return components


def restrict_to_market(tx: Transaction, market: MarketSpec) -> Transaction | None:
    """Drop fills of other markets; None when nothing remains."""
    kept = tuple(f for f in tx.fills if f.token_id in market.token_ids)
    if not kept:
        return None
    if len(kept) == len(tx.fills):
        return tx
    return Transaction(block=tx.block, tx_index=tx.tx_index, timestamp=tx.timestamp, fills=kept)


def decompose_ledger(
    transactions: Iterable[Transaction],
    markets: Sequence[MarketSpec],
) -> tuple[list[DecomposedTransaction], list[AnomalyRecord]]:
    """Decompose a ledger market by market.

    Transactions touching several markets are split per complementary token
    pair before decomposition. A transaction either decomposes cleanly (one
    output row per touched market) or is quarantined whole: fills on
    unconfigured token ids and shapes outside the taxonomy yield one
    anomaly record and no rows, so quarantined plus decomposed transaction
    counts always equal the input count.
    """
    decomposed: list[DecomposedTransaction] = []
    anomalies: list[AnomalyRecord] = []
    for tx in transactions:
        unknown = {t for t in tx.token_ids() if market_for_token(markets, t) is None}
        if unknown:
            anomalies.append(AnomalyRecord(
                tx.block, tx.tx_index, tx.timestamp, "",
                f"unconfigured token ids {sorted(unknown)}",
            ))
            continue
        rows: list[DecomposedTransaction] = []
        anomaly: AnomalyRecord | None = None
        for market in markets:
            part = restrict_to_market(tx, market)
            if part is None:
                continue
            try:
                kind = classify_transaction(part, market)
                components = decompose_transaction(part, market)
            except DecompositionAnomalyError as exc:
                anomaly = AnomalyRecord(
                    tx.block, tx.tx_index, tx.timestamp, market.candidate, str(exc)
                )
                break
            rows.append(DecomposedTransaction(
                block=tx.block,
                tx_index=tx.tx_index,
                timestamp=tx.timestamp,
                market=market.candidate,
                kind=kind,
                components=components,
            ))
        if anomaly is not None:
            anomalies.append(anomaly)
        else:
            decomposed.extend(rows)
    return decomposed, anomalies


# Decomposed-ledger wire schema: micro-USDC integer columns.
DECOMPOSED_FIELDS = (
    "block", "txIndex", "timestamp", "market", "kind",
    "buyVol", "sellVol",
    "yesTradeVol", "noTradeVol", "yesMintVol", "noMintVol", "yesBurnVol", "noBurnVol",
)


def decomposed_to_record(row: DecomposedTransaction) -> dict[str, str | int]:
    c = row.components
    return {
        "block": row.block,
        "txIndex": row.tx_index,
        "timestamp": row.timestamp,
        "market": row.market,
        "kind": row.kind.value,
        "buyVol": str(c.buy_vol),
        "sellVol": str(c.sell_vol),
        "yesTradeVol": str(c.yes_trade),
        "noTradeVol": str(c.no_trade),
        "yesMintVol": str(c.yes_mint),
        "noMintVol": str(c.no_mint),
        "yesBurnVol": str(c.yes_burn),
        "noBurnVol": str(c.no_burn),
    }


def decomposed_from_record(record: dict) -> DecomposedTransaction:
    return DecomposedTransaction(
        block=int(record["block"]),
        tx_index=int(record["txIndex"]),
        timestamp=int(record["timestamp"]),
        market=str(record["market"]),
        kind=TxKind(record["kind"]),
        components=VolumeComponents(
            yes_trade=int(record["yesTradeVol"]),
            no_trade=int(record["noTradeVol"]),
            yes_mint=int(record["yesMintVol"]),
            no_mint=int(record["noMintVol"]),
            yes_burn=int(record["yesBurnVol"]),
            no_burn=int(record["noBurnVol"]),
            buy_vol=int(record["buyVol"]),
            sell_vol=int(record["sellVol"]),
        ),
    )


def write_decomposed(path, rows: Iterable[DecomposedTransaction], fmt: str = "csv") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if fmt == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(DECOMPOSED_FIELDS)
            for row in rows:
                record = decomposed_to_record(row)
                writer.writerow([record[c] for c in DECOMPOSED_FIELDS])
        else:
            for row in rows:
                fh.write(json.dumps(decomposed_to_record(row)) + "\n")


def read_decomposed(path, fmt: str | None = None) -> list[DecomposedTransaction]:
    path = str(path)
    if fmt is None:
        fmt = "csv" if path.endswith(".csv") else "jsonl"
    rows: list[DecomposedTransaction] = []
    with open(path, encoding="utf-8") as fh:
        if fmt == "csv":
            for record in csv.DictReader(fh):
                rows.append(decomposed_from_record(record))
        else:
            for line in fh:
                if line.strip():
                    rows.append(decomposed_from_record(json.loads(line)))
    return rows
