"""Bundled four-transaction example ledger with known decompositions.

One settlement of each basic shape (simple trade, share minting, share
burning, mixed trade), with the exact amounts of the worked examples this
package is tested against. ``python -m fillflow.fixtures OUTDIR`` writes
the ledger and market config as files for CLI experimentation.
"""

from __future__ import annotations

import sys
from pathlib import Path

from .decompose import TxKind, VolumeComponents
from .events import FillEvent, MarketSpec, write_fills, write_market_config
from .units import parse_utc

TRUMP_YES = "21742633143259441447983030473045965376011705119946994490068495762835835322219"
TRUMP_NO = "48331043334124233536346841862726479099297553739109529663581634542112421454120"
BIDEN_YES = "88027839609243624193415614179328679602612916497045596227438675976194679281349"
BIDEN_NO = "34731657774863765724006700722244121211949251577951557898712942114443804463892"
HARRIS_YES = "65818619657568813474341868652308942079804919287380422192892211131408793125422"
HARRIS_NO = "11148867259893425014459663947479819431161629737241515018575369713012195913742"

EXCHANGE_ADDRESS = "0xc5d563a36ae78145c45a50134d48a1215220f80a"

_A_9D8 = "0x9d84ce0306f8551e02efef1680475fc0f1dc1344"
_A_869 = "0x869ac9f1472d9d9a0b70e62ec32cfe2690a1ca3e"
_A_D42 = "0xd42b425ad1dcf7571f15f02e55b204597f2eb3cf"
_A_351 = "0x351efa0c97c1c7250be919e032b9b09cb4ee2aa9"
_A_E0D = "0xe0d87a3a6c22a16ea8ecb3f4bcbbbbcc1f522de5"
_A_64C = "0x64c9c10cbf3d1b0a44e83b633b5f98e3b4e632e1"
_A_FF6 = "0xff6e4ee6e04c94547f676b3aa9b53b89a8601bb4"
_A_F0B = "0xf0b302c99b9e5a8695b9d9862ba0e82be0f42a2d"

SIMPLE_TS = parse_utc("2024-03-05T12:00:00Z")
MINTING_TS = parse_utc("2024-05-01T10:00:00Z")
BURNING_TS = parse_utc("2024-05-20T15:00:00Z")
MIXED_TS = parse_utc("2024-06-15T09:30:00Z")


def market_specs() -> list[MarketSpec]:
    launch = parse_utc("2024-01-04T23:00:00Z")
    resolution = parse_utc("2024-11-06T06:46:00Z")
    return [
        MarketSpec("Trump", TRUMP_YES, TRUMP_NO, launch, resolution),
        MarketSpec("Biden", BIDEN_YES, BIDEN_NO, launch, resolution),
        MarketSpec("Harris", HARRIS_YES, HARRIS_NO, launch, resolution),
    ]


def fixture_fills() -> list[FillEvent]:
    def fill(block, tx_index, log_index, maker, taker, m_asset, t_asset, m_amt, t_amt, ts):
        return FillEvent(block, tx_index, log_index, maker, taker,
                         m_asset, t_asset, m_amt, t_amt, ts)

    return [
        # Simple trade: 210 Trump NO change hands for 123.9 USDC; the buyer's
        # aggregate fill nets two partial sells (200 @ 0.59, 10 @ 0.59).
        fill(51953200, 180, 826, _A_9D8, EXCHANGE_ADDRESS, "0", TRUMP_NO,
             123_900_000, 210_000_000, SIMPLE_TS),
        fill(51953200, 180, 827, _A_869, _A_9D8, TRUMP_NO, "0",
             200_000_000, 118_000_000, SIMPLE_TS),
        fill(51953200, 180, 828, _A_D42, _A_9D8, TRUMP_NO, "0",
             10_000_000, 5_900_000, SIMPLE_TS),
        # Share minting: opposing buys lock 6000 USDC and mint 6000 full sets
        # of Biden YES/NO at 0.34/0.66.
        fill(54432034, 44, 101, _A_351, EXCHANGE_ADDRESS, "0", BIDEN_NO,
             3_960_000_000, 6_000_000_000, MINTING_TS),
        fill(54432034, 44, 102, _A_E0D, EXCHANGE_ADDRESS, "0", BIDEN_YES,
             2_040_000_000, 6_000_000_000, MINTING_TS),
        # Share burning: opposing sells burn 206.19 full Trump sets, releasing
        # the collateral at 0.60/0.40.
        fill(55100000, 12, 50, _A_64C, EXCHANGE_ADDRESS, TRUMP_NO, "0",
             206_190_000, 123_714_000, BURNING_TS),
        fill(55100000, 12, 51, _A_FF6, EXCHANGE_ADDRESS, TRUMP_YES, "0",
             206_190_000, 82_476_000, BURNING_TS),
        # Mixed trade: 238.095237 Trump YES bought at 0.42; 200 supplied by a
        # direct sell, the remaining 38.095237 minted against a NO buy at 0.58.
        fill(56200000, 7, 200, _A_F0B, EXCHANGE_ADDRESS, "0", TRUMP_YES,
             99_999_999, 238_095_237, MIXED_TS),
        fill(56200000, 7, 201, _A_869, _A_F0B, TRUMP_YES, "0",
             200_000_000, 84_000_000, MIXED_TS),
        fill(56200000, 7, 202, _A_D42, EXCHANGE_ADDRESS, "0", TRUMP_NO,
             22_095_238, 38_095_237, MIXED_TS),
    ]


def expected_decompositions() -> dict[tuple[int, int], tuple[str, TxKind, VolumeComponents]]:
    """(block, txIndex) -> (market, kind, exact expected components)."""
    return {
        (51953200, 180): ("Trump", TxKind.PURE_EXCHANGE, VolumeComponents(
            no_trade=123_900_000, buy_vol=123_900_000, sell_vol=123_900_000)),
        (54432034, 44): ("Biden", TxKind.SHARE_MINTING, VolumeComponents(
            yes_mint=2_040_000_000, no_mint=3_960_000_000, buy_vol=6_000_000_000)),
        (55100000, 12): ("Trump", TxKind.SHARE_BURNING, VolumeComponents(
            yes_burn=82_476_000, no_burn=123_714_000, sell_vol=206_190_000)),
        (56200000, 7): ("Trump", TxKind.MIXED_MINT, VolumeComponents(
            yes_trade=84_000_000, yes_mint=15_999_999, no_mint=22_095_238,
            buy_vol=122_095_237, sell_vol=84_000_000)),
    }


def write_fixture(directory) -> tuple[Path, Path]:
    """Write fills.jsonl and markets.json into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    fills_path = directory / "fills.jsonl"
    markets_path = directory / "markets.json"
    write_fills(fills_path, fixture_fills())
    write_market_config(markets_path, market_specs())
    return fills_path, markets_path


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "fixture"
    paths = write_fixture(target)
    print("\n".join(str(p) for p in paths))
