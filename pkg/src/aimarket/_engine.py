"""Compiled simulation kernel.

Same rules as ``orderbook.Book`` + ``agents.decide_order``, laid out for
speed: orders are indexed by birth tick (at most one resting order is born
per tick), each side is a binary heap of packed (price, id) keys with lazy
deletion, and expiry touches exactly one order per tick.
"""

import math
import warnings

import numpy as np

warnings.filterwarnings("ignore", message="The TBB threading layer")

from numba import njit, prange  # noqa: E402

ID_BITS = 24
ID_MASK = (1 << ID_BITS) - 1
PRICE_CEIL = 1 << 38
SNAP = 1e-9

BUY = 1
SELL = 2

# trade log columns
T_TICK, T_SIDE, T_PRICE, T_MAKER, T_TAKER = range(5)


@njit(cache=True, inline="always")
def _push(heap, size, key):
    i = size
    heap[i] = key
    while i > 0:
        parent = (i - 1) >> 1
        if heap[parent] <= heap[i]:
            break
        heap[parent], heap[i] = heap[i], heap[parent]
        i = parent
    return size + 1


@njit(cache=True, inline="always")
def _pop(heap, size):
    size -= 1
    heap[0] = heap[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        child = left
        if left + 1 < size and heap[left + 1] < heap[left]:
            child = left + 1
        if heap[i] <= heap[child]:
            break
        heap[i], heap[child] = heap[child], heap[i]
        i = child
    return size


@njit(cache=True)
def round_ticks(raw, side, tick_size):
    x = raw / tick_size
    nearest = round(x)
    if abs(x - nearest) < SNAP * max(1.0, abs(x)):
        ticks = nearest
    elif side == BUY:
        ticks = math.floor(x)
    else:
        ticks = math.ceil(x)
    if ticks < 1:
        return 1
    return np.int64(ticks)


@njit(cache=True)
def simulate(
    w1, w2, w3, tau, z, u,
    n, t_c, t_e, delta_t, sigma, p_d, tick_size, p_f, pf_ticks,
    gene, has_gene,
    mid, trades, aia_fills, slot_bid, slot_ask,
):
    """Run ticks 1..t_e. Returns (n_trades, n_aia_fills, cash_ticks, position)."""
    alive = np.zeros(t_e + 1, dtype=np.bool_)
    price_of = np.zeros(t_e + 1, dtype=np.int64)
    bids = np.empty(t_e + 1, dtype=np.int64)
    asks = np.empty(t_e + 1, dtype=np.int64)
    nb = 0
    na = 0
    last_mid = pf_ticks
    n_trades = 0
    n_fills = 0
    cash = np.int64(0)
    pos = np.int64(0)
    n_actions = (t_e - t_c) // delta_t
    mid[0] = pf_ticks

    for t in range(1, t_e + 1):
        # expiry sweep: the only order that can reach age t_c + 1 now
        b = t - t_c - 1
        if b >= 1 and alive[b]:
            alive[b] = False
        while nb > 0 and not alive[bids[0] & ID_MASK]:
            nb = _pop(bids, nb)
        while na > 0 and not alive[asks[0] & ID_MASK]:
            na = _pop(asks, na)
        if nb > 0 and na > 0:
            last_mid = (price_of[bids[0] & ID_MASK] + price_of[asks[0] & ID_MASK] + 1) // 2

        # normal agent order
        j = (t - 1) % n + 1
        prev = mid[t - 1] * tick_size
        fundamental = math.log(p_f / prev)
        lag = t - tau[j] - 1
        momentum = 0.0
        if lag >= 0:
            momentum = math.log(prev / (mid[lag] * tick_size))
        total = w1[j] + w2[j] + w3[j]
        r = (w1[j] * fundamental + w2[j] * momentum + w3[j] * (sigma * z[t])) / total
        p_e = (last_mid * tick_size) * math.exp(r)
        p_o = p_e + p_d * (2.0 * u[t] - 1.0)
        anchor = p_f if t < t_c else p_e
        side = BUY if anchor > p_o else SELL
        price = round_ticks(p_o, side, tick_size)

        if side == BUY:
            if na > 0 and price >= price_of[asks[0] & ID_MASK]:
                maker = asks[0] & ID_MASK
                alive[maker] = False
                na = _pop(asks, na)
                trades[n_trades, T_TICK] = t
                trades[n_trades, T_SIDE] = BUY
                trades[n_trades, T_PRICE] = price_of[maker]
                trades[n_trades, T_MAKER] = (maker - 1) % n + 1
                trades[n_trades, T_TAKER] = j
                n_trades += 1
                while na > 0 and not alive[asks[0] & ID_MASK]:
                    na = _pop(asks, na)
            else:
                alive[t] = True
                price_of[t] = price
                nb = _push(bids, nb, ((PRICE_CEIL - price) << ID_BITS) | t)
        else:
            if nb > 0 and price <= price_of[bids[0] & ID_MASK]:
                maker = bids[0] & ID_MASK
                alive[maker] = False
                nb = _pop(bids, nb)
                trades[n_trades, T_TICK] = t
                trades[n_trades, T_SIDE] = SELL
                trades[n_trades, T_PRICE] = price_of[maker]
                trades[n_trades, T_MAKER] = (maker - 1) % n + 1
                trades[n_trades, T_TAKER] = j
                n_trades += 1
                while nb > 0 and not alive[bids[0] & ID_MASK]:
                    nb = _pop(bids, nb)
            else:
                alive[t] = True
                price_of[t] = price
                na = _push(asks, na, (price << ID_BITS) | t)
        if nb > 0 and na > 0:
            last_mid = (price_of[bids[0] & ID_MASK] + price_of[asks[0] & ID_MASK] + 1) // 2

        # AI agent market order at slot boundaries
        if t > t_c and (t - t_c) % delta_t == 0:
            k = (t - t_c) // delta_t - 1
            if k < n_actions:
                slot_bid[k] = price_of[bids[0] & ID_MASK] if nb > 0 else 0
                slot_ask[k] = price_of[asks[0] & ID_MASK] if na > 0 else 0
                if has_gene:
                    action = gene[k]
                    maker = -1
                    if action == BUY and na > 0:
                        maker = asks[0] & ID_MASK
                        alive[maker] = False
                        na = _pop(asks, na)
                        cash -= price_of[maker]
                        pos += 1
                        while na > 0 and not alive[asks[0] & ID_MASK]:
                            na = _pop(asks, na)
                    elif action == SELL and nb > 0:
                        maker = bids[0] & ID_MASK
                        alive[maker] = False
                        nb = _pop(bids, nb)
                        cash += price_of[maker]
                        pos -= 1
                        while nb > 0 and not alive[bids[0] & ID_MASK]:
                            nb = _pop(bids, nb)
                    if maker >= 0:
                        aia_fills[n_fills, 0] = t
                        aia_fills[n_fills, 1] = action
                        aia_fills[n_fills, 2] = price_of[maker]
                        n_fills += 1
                        trades[n_trades, T_TICK] = t
                        trades[n_trades, T_SIDE] = action
                        trades[n_trades, T_PRICE] = price_of[maker]
                        trades[n_trades, T_MAKER] = (maker - 1) % n + 1
                        trades[n_trades, T_TAKER] = 0
                        n_trades += 1
                        if nb > 0 and na > 0:
                            last_mid = (price_of[bids[0] & ID_MASK] + price_of[asks[0] & ID_MASK] + 1) // 2

        mid[t] = last_mid

    return n_trades, n_fills, cash, pos


@njit(cache=True, parallel=True)
def batch_profit(
    w1, w2, w3, tau, z, u,
    n, t_c, t_e, delta_t, sigma, p_d, tick_size, p_f, pf_ticks,
    genes,
):
    """Profit in ticks for every row of ``genes``; row order fixes output order."""
    count = genes.shape[0]
    n_actions = genes.shape[1]
    out = np.empty(count, dtype=np.int64)
    for i in prange(count):
        mid = np.empty(t_e + 1, dtype=np.int64)
        trades = np.empty((t_e + n_actions, 5), dtype=np.int64)
        fills = np.empty((n_actions, 3), dtype=np.int64)
        sb = np.empty(n_actions, dtype=np.int64)
        sa = np.empty(n_actions, dtype=np.int64)
        _, _, cash, pos = simulate(
            w1, w2, w3, tau, z, u, n, t_c, t_e, delta_t, sigma, p_d, tick_size, p_f, pf_ticks,
            genes[i], True, mid, trades, fills, sb, sa,
        )
        out[i] = cash + pos * pf_ticks
    return out
