"""Continuous double auction for one-share limit orders.

Prices are held as integer tick counts so every comparison is exact.  This
module is the readable reference book; the simulation kernel in
``aimarket._engine`` implements the same rules on flat arrays.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import IntEnum


class Side(IntEnum):
    BUY = 1
    SELL = 2

    @property
    def opposite(self) -> "Side":
        return Side.SELL if self is Side.BUY else Side.BUY


# owner id reserved for the AI agent; normal agents are 1..n
AIA_OWNER = 0

_SNAP = 1e-9


def round_price(raw: float, side: Side, tick_size: float = 0.01) -> int:
    """Round a raw price onto the tick grid, returning a tick count.

    Buys round down and sells round up, so rounding never creates a cross.
    Anything below one tick is clamped to one tick.
    """
    if not math.isfinite(raw):
        raise ValueError(f"order price must be finite, got {raw!r}")
    x = raw / tick_size
    nearest = round(x)
    if abs(x - nearest) < _SNAP * max(1.0, abs(x)):
        ticks = nearest
    elif side == Side.BUY:
        ticks = math.floor(x)
    else:
        ticks = math.ceil(x)
    return max(int(ticks), 1)


def ticks_to_price(ticks: int, tick_size: float = 0.01) -> float:
    return ticks * tick_size


def format_ticks(ticks: int, tick_size: float = 0.01) -> str:
    """Tick-exact decimal rendering, e.g. 1000001 ticks of 0.01 -> '10000.01'."""
    decimals = max(0, -math.floor(math.log10(tick_size) + 1e-12))
    return f"{ticks * tick_size:.{decimals}f}"


@dataclass(frozen=True, slots=True)
class Order:
    id: int
    side: Side
    price: int
    owner: int
    birth_tick: int


@dataclass(frozen=True, slots=True)
class Fill:
    price: int
    taker_side: Side
    maker_order_id: int
    tick: int
    maker_owner: int = -1
    taker_owner: int = -1


class Book:
    """Two-sided resting order set with price-time priority.

    ``last_mid`` remembers the most recent two-sided mid so that
    :meth:`mid_price` stays defined when one side empties out.
    """

    def __init__(self, fundamental_ticks: int):
        self.fundamental_ticks = fundamental_ticks
        self.last_mid: int | None = None
        self._orders: dict[int, Order] = {}
        self._bids: list[tuple[int, int]] = []  # (-price, id)
        self._asks: list[tuple[int, int]] = []  # (price, id)

    def __len__(self):
        return len(self._orders)

    def __contains__(self, order_id):
        return order_id in self._orders

    @property
    def orders(self) -> list[Order]:
        return list(self._orders.values())

    def _top(self, heap):
        while heap and heap[0][1] not in self._orders:
            heapq.heappop(heap)
        return heap[0][1] if heap else None

    def best_bid_order(self) -> Order | None:
        oid = self._top(self._bids)
        return None if oid is None else self._orders[oid]

    def best_ask_order(self) -> Order | None:
        oid = self._top(self._asks)
        return None if oid is None else self._orders[oid]

    @property
    def best_bid(self) -> int | None:
        o = self.best_bid_order()
        return None if o is None else o.price

    @property
    def best_ask(self) -> int | None:
        o = self.best_ask_order()
        return None if o is None else o.price

    def _touch(self):
        bid, ask = self.best_bid, self.best_ask
        if bid is not None and ask is not None:
            self.last_mid = (bid + ask + 1) // 2

    def _remove(self, order: Order):
        del self._orders[order.id]

    def submit_limit(self, order: Order) -> Fill | None:
        """Match against the best opposite order if crossing, otherwise rest."""
        if order.id in self._orders:
            raise ValueError(f"duplicate order id {order.id}")
        if order.price < 1:
            raise ValueError("order price must be at least one tick")
        if order.side == Side.BUY:
            maker = self.best_ask_order()
            crosses = maker is not None and order.price >= maker.price
        else:
            maker = self.best_bid_order()
            crosses = maker is not None and order.price <= maker.price
        fill = None
        if crosses:
            self._remove(maker)
            fill = Fill(maker.price, order.side, maker.id, order.birth_tick, maker.owner, order.owner)
        else:
            self._orders[order.id] = order
            if order.side == Side.BUY:
                heapq.heappush(self._bids, (-order.price, order.id))
            else:
                heapq.heappush(self._asks, (order.price, order.id))
        self._touch()
        return fill

    def submit_market(self, side: Side, tick: int, owner: int = AIA_OWNER) -> Fill | None:
        """Take the best opposite order; ``None`` if that side is empty."""
        maker = self.best_ask_order() if side == Side.BUY else self.best_bid_order()
        if maker is None:
            return None
        self._remove(maker)
        self._touch()
        return Fill(maker.price, side, maker.id, tick, maker.owner, owner)

    def cancel_expired(self, now: int, max_age: int) -> list[Order]:
        """Drop every order with ``now - birth_tick > max_age``."""
        expired = [o for o in self._orders.values() if now - o.birth_tick > max_age]
        for o in expired:
            self._remove(o)
        if expired:
            self._touch()
        return expired

    def mid_price(self) -> int:
        """Mid in ticks, rounded half up; falls back to the last mid, then the fundamental."""
        bid, ask = self.best_bid, self.best_ask
        if bid is not None and ask is not None:
            return (bid + ask + 1) // 2
        if self.last_mid is not None:
            return self.last_mid
        return self.fundamental_ticks
