"""Normal agents: parameter draws, expected return and price, order decisions.

Every agent owns a counter-based Philox stream keyed by ``(master_seed,
agent_id)``.  Block 0 of the stream holds the agent's parameters and block
``k`` holds the random numbers of its ``k``-th order, so what an agent draws
never depends on what anyone else (including the AI agent) did.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .config import MarketConfig
from .orderbook import Order, Side, round_price

_INV_2_53 = 1.0 / 9007199254740992.0


def _open_unit(words):
    """uint64 words -> floats strictly inside (0, 1)."""
    return ((np.asarray(words, dtype=np.uint64) >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53


@dataclass(frozen=True)
class AgentStream:
    master_seed: int
    agent_id: int

    def _bitgen(self):
        return np.random.Philox(key=[self.master_seed, self.agent_id])

    def block(self, k: int) -> np.ndarray:
        """The four raw 64-bit words of counter block ``k``."""
        bg = self._bitgen()
        if k:
            bg.advance(k)
        return bg.random_raw(4)

    def blocks(self, count: int) -> np.ndarray:
        """Blocks ``0..count-1`` as a ``(count, 4)`` array."""
        return self._bitgen().random_raw(4 * count).reshape(count, 4)

    def decision_draws(self, k: int) -> tuple[float, float]:
        """(standard normal, uniform on (0,1)) for the agent's ``k``-th order, k >= 1."""
        if k < 1:
            raise ValueError("decision blocks start at 1")
        return decision_draws_from_block(self.block(k))


def decision_draws_from_block(words):
    """Box-Muller normal from words 0-1, order-price uniform from word 2 (word 3 unused)."""
    u = _open_unit(words)
    u1, u2, u3 = u[..., 0], u[..., 1], u[..., 2]
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    if np.ndim(z) == 0:
        return float(z), float(u3)
    return z, u3


@dataclass(frozen=True)
class NAProfile:
    agent_id: int
    w1: float
    w2: float
    w3: float
    tau: int
    noise_sigma: float
    stream: AgentStream = field(repr=False, compare=False)

    def to_dict(self):
        return {"agent_id": self.agent_id, "w1": self.w1, "w2": self.w2, "w3": self.w3, "tau": self.tau}


def profile_from_block(agent_id, words, cfg: MarketConfig, master_seed) -> NAProfile:
    u = _open_unit(words)
    tau = 1 + min(int(u[3] * cfg.tau_max), cfg.tau_max - 1)
    return NAProfile(
        agent_id=agent_id,
        w1=float(u[0] * cfg.w1_max),
        w2=float(u[1] * cfg.w2_max),
        w3=float(u[2] * cfg.w3_max),
        tau=tau,
        noise_sigma=cfg.sigma_eps,
        stream=AgentStream(master_seed, agent_id),
    )


def draw_profiles(master_seed: int, n: int, cfg: MarketConfig) -> list[NAProfile]:
    if n < 1:
        raise ValueError("need at least one agent")
    return [
        profile_from_block(j, AgentStream(master_seed, j).block(0), cfg, master_seed)
        for j in range(1, n + 1)
    ]


def profiles_to_json(profiles) -> str:
    return json.dumps([p.to_dict() for p in profiles], indent=1)


@dataclass
class PriceHistory:
    """Mid prices (as floats) by tick; ``series[0]`` is the pre-open reference."""

    fundamental: float
    series: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not self.series:
            self.series.append(self.fundamental)

    def append(self, price: float):
        self.series.append(price)

    def __getitem__(self, t):
        return self.series[t]


def expected_return(profile: NAProfile, hist: PriceHistory, t: int, noise: float) -> float:
    """Weighted mix of fundamental reversion, lagged momentum and noise."""
    prev = hist[t - 1]
    fundamental = math.log(hist.fundamental / prev)
    lag = t - profile.tau - 1
    momentum = math.log(prev / hist[lag]) if lag >= 0 else 0.0
    total = profile.w1 + profile.w2 + profile.w3
    return (profile.w1 * fundamental + profile.w2 * momentum + profile.w3 * noise) / total


def expected_price(mid_now: float, r: float) -> float:
    return mid_now * math.exp(r)


def agent_for_tick(t: int, n: int) -> int:
    return (t - 1) % n + 1


def decision_index(t: int, n: int) -> int:
    """Which order of its own the acting agent is placing at tick ``t`` (1-based)."""
    return (t - 1) // n + 1


def choose_side(p_expected, p_order, t, cfg: MarketConfig) -> Side:
    """Buy when the anchor beats the order price; warm-up anchors on the fundamental."""
    anchor = cfg.p_f if t < cfg.t_c else p_expected
    return Side.BUY if anchor > p_order else Side.SELL


def decide_order(profile: NAProfile, hist: PriceHistory, t: int, mid_now: float, cfg: MarketConfig) -> Order:
    """The order agent ``profile`` places at tick ``t``.

    ``hist`` must hold mids through tick ``t-1``; ``mid_now`` is the mid at
    decision time (after the expiry sweep).
    """
    if agent_for_tick(t, cfg.n) != profile.agent_id:
        raise ValueError(f"tick {t} belongs to agent {agent_for_tick(t, cfg.n)}")
    z, u = profile.stream.decision_draws(decision_index(t, cfg.n))
    r = expected_return(profile, hist, t, profile.noise_sigma * z)
    p_e = expected_price(mid_now, r)
    p_o = p_e + cfg.p_d * (2.0 * u - 1.0)
    side = choose_side(p_e, p_o, t, cfg)
    return Order(id=t, side=side, price=round_price(p_o, side, cfg.delta_p), owner=profile.agent_id, birth_tick=t)
