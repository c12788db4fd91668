"""Conditional-token primitives: split, merge, convert, resolution payoff.

Models a winner-take-all market with N mutually exclusive outcomes. Each
outcome has complementary YES/NO shares; the winning outcome's YES shares
and every losing outcome's NO shares redeem for 1 unit of collateral. A
binary market is the N=2 case.

Quantities and cash are integers in a common unit (micro-USDC-compatible);
every operation conserves resolution value for all possible winners, which
is what makes position conversion a pure capital-efficiency move.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ConfigError, InsufficientBalanceError

YES = "yes"
NO = "no"


@dataclass(frozen=True)
class CategoricalMarket:
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) < 2:
            raise ConfigError("a categorical market needs at least 2 outcomes")
        if len(set(self.labels)) != len(self.labels):
            raise ConfigError("outcome labels must be distinct")

    @property
    def n(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class Portfolio:
    """Holdings keyed by (outcome index, side); cash in collateral units."""

    holdings: Mapping[tuple[int, str], int] = field(default_factory=dict)
    cash: int = 0

    def __post_init__(self):
        clean = {k: int(v) for k, v in self.holdings.items() if v}
        if any(v < 0 for v in clean.values()):
            raise InsufficientBalanceError("negative share quantity")
        object.__setattr__(self, "holdings", clean)

    def quantity(self, outcome: int, side: str) -> int:
        return self.holdings.get((outcome, side), 0)

    def adjusted(self, deltas: Mapping[tuple[int, str], int], cash_delta: int = 0) -> "Portfolio":
        merged = dict(self.holdings)
        for key, delta in deltas.items():
            merged[key] = merged.get(key, 0) + delta
        new_cash = self.cash + cash_delta
        if new_cash < 0:
            raise InsufficientBalanceError("insufficient cash")
        if any(v < 0 for v in merged.values()):
            raise InsufficientBalanceError("insufficient shares")
        return Portfolio(holdings=merged, cash=new_cash)


def _check_outcome(market: CategoricalMarket, outcome: int) -> None:
    if not 0 <= outcome < market.n:
        raise ConfigError(f"outcome index {outcome} outside market of size {market.n}")


def payoff_at_resolution(portfolio: Portfolio, winner: int, market: CategoricalMarket) -> int:
    """Collateral value at resolution when ``winner`` resolves YES.

    YES shares of the winner and NO shares of every other outcome pay 1;
    everything else pays 0; cash carries through.
    """
    _check_outcome(market, winner)
    total = portfolio.cash
    for (outcome, side), qty in portfolio.holdings.items():
        _check_outcome(market, outcome)
        if side == YES and outcome == winner:
            total += qty
        elif side == NO and outcome != winner:
            total += qty
    return total


def split_position(portfolio: Portfolio, market: CategoricalMarket, outcome: int, quantity: int) -> Portfolio:
    """Lock ``quantity`` collateral, mint a full YES/NO set of ``outcome``."""
    _check_outcome(market, outcome)
    if quantity < 0:
        raise InsufficientBalanceError("negative split quantity")
    return portfolio.adjusted({(outcome, YES): quantity, (outcome, NO): quantity}, -quantity)


def merge_positions(portfolio: Portfolio, market: CategoricalMarket, outcome: int, quantity: int) -> Portfolio:
    """Burn a full YES/NO set of ``outcome``, reclaim the collateral."""
    _check_outcome(market, outcome)
    if quantity < 0:
        raise InsufficientBalanceError("negative merge quantity")
    return portfolio.adjusted({(outcome, YES): -quantity, (outcome, NO): -quantity}, quantity)


def convert_positions(
    portfolio: Portfolio,
    outcomes: Iterable[int],
    quantity: int,
    market: CategoricalMarket,
) -> Portfolio:
    """Convert Q NO shares over M outcomes into Q YES shares of the rest.

    Removes ``quantity`` NO shares of each outcome in ``outcomes``; adds
    ``quantity`` YES shares of each remaining outcome and (M-1) * quantity
    in cash. Resolution value is unchanged for every possible winner.
    """
    chosen = sorted(set(outcomes))
    for outcome in chosen:
        _check_outcome(market, outcome)
    m = len(chosen)
    if m == 0:
        raise ConfigError("conversion needs at least one outcome")
    if m >= market.n:
        raise ConfigError("conversion must leave at least one outcome")
    if quantity < 0:
        raise InsufficientBalanceError("negative conversion quantity")
    remaining = [i for i in range(market.n) if i not in chosen]
    deltas: dict[tuple[int, str], int] = {(i, NO): -quantity for i in chosen}
    for i in remaining:
        deltas[(i, YES)] = deltas.get((i, YES), 0) + quantity
    return portfolio.adjusted(deltas, (m - 1) * quantity)
