import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aimarket import _engine
from aimarket.agents import NAProfile, AgentStream
from aimarket.config import MarketConfig, small_market
from aimarket.market import (
    BUY,
    NONE,
    SELL,
    GeneError,
    MarketRecord,
    aggregate_volume,
    evaluate_gene,
    evaluate_genes,
    gene_to_str,
    mid_csv,
    parse_gene,
    run_simulation,
    summary_json,
    trades_csv,
    verify_accounting,
)
from oracles import reference_simulation, reference_with_streams

# Rigged micro-market: 2 agents, fundamental-only weights, no noise, one-unit ticks.
# Uniform draws place orders 2.5 or 4.5 away from an expected price of 100.
MICRO = MarketConfig(
    n=2, w1_max=1, w2_max=1, w3_max=1, tau_max=1, sigma_eps=0.0, p_d=10.0,
    t_c=4, delta_p=1.0, p_f=100.0, delta_t=2, t_e=8,
)
MICRO_U = [0.0, 0.375, 0.625, 0.275, 0.725, 0.375, 0.625, 0.375, 0.625]


def run_micro(gene, u=MICRO_U):
    cfg = MICRO
    w1 = np.array([0.0, 1.0, 1.0])
    zero = np.zeros(3)
    tau = np.array([0, 1, 1], dtype=np.int64)
    mid = np.empty(cfg.t_e + 1, dtype=np.int64)
    trades = np.empty((cfg.t_e + 2, 5), dtype=np.int64)
    fills = np.empty((2, 3), dtype=np.int64)
    sb, sa = np.empty(2, dtype=np.int64), np.empty(2, dtype=np.int64)
    out = _engine.simulate(
        w1, zero, zero, tau, np.zeros(cfg.t_e + 1), np.array(u),
        cfg.n, cfg.t_c, cfg.t_e, cfg.delta_t, 0.0, cfg.p_d, cfg.delta_p, cfg.p_f, cfg.pf_ticks,
        np.array(gene, dtype=np.int8), True, mid, trades, fills, sb, sa,
    )
    return out, mid, fills, sb, sa


def micro_reference(gene, u=MICRO_U):
    profiles = [NAProfile(j, 1.0, 0.0, 0.0, 1, 0.0, AgentStream(0, j)) for j in (1, 2)]
    return reference_simulation(MICRO, profiles, lambda t: (0.0, u[t]), gene)


class TestMicroMarket:
    # hand trace: bids 97(t1) 95(t3) 97(t5), asks 103(t2) 105(t4) 103(t6);
    # slot 1 (t=6) buys the older 103 ask, slot 2 (t=8) sells into bid 97 of t5
    # (t1's bid expired at t=7).  cash = -103 + 97, position 0.
    def test_buy_then_sell_profit(self):
        (n_tr, n_f, cash, pos), mid, fills, sb, sa = run_micro([BUY, SELL])
        assert (cash, pos) == (-6, 0)
        assert fills[:n_f].tolist() == [[6, BUY, 103], [8, SELL, 97]]
        assert sb.tolist() == [97, 97] and sa.tolist() == [103, 103]
        assert mid[1:].tolist() == [100] * 8

    def test_reference_agrees(self):
        mids, fills, _, cash, pos = micro_reference([BUY, SELL])
        assert (cash, pos) == (-6, 0)
        assert fills == [(6, BUY, 103), (8, SELL, 97)]

    def test_no_action_on_empty_side(self):
        # every order is a sell: bids never exist
        u = [0.0] + [0.9] * 8
        (_, n_f, cash, pos), *_ = run_micro([SELL, SELL], u)
        assert (n_f, cash, pos) == (0, 0, 0)
        _, fills, _, cash, pos = micro_reference([SELL, SELL], u)
        assert (fills, cash, pos) == ([], 0, 0)


class TestKernelMatchesReference:
    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_small_market(self, seed):
        cfg = small_market()
        gene = np.random.default_rng(seed).integers(0, 3, cfg.n_actions).astype(np.int8)
        mids, fills, trades, cash, pos = reference_with_streams(cfg, seed, gene)
        rec = run_simulation(cfg, seed, gene)
        assert rec.mid_ticks.tolist() == mids
        assert rec.aia_fills.tolist() == [list(f) for f in fills]
        assert (rec.cash_ticks, rec.position) == (cash, pos)
        ref_trades = [[f.tick, int(f.taker_side), f.price, f.maker_owner, f.taker_owner] for f in trades]
        assert rec.trades.tolist() == ref_trades

    def test_paper_sized_prefix(self):
        cfg = MarketConfig(t_e=3000)
        gene = np.random.default_rng(0).integers(0, 3, cfg.n_actions).astype(np.int8)
        mids, _, _, cash, pos = reference_with_streams(cfg, 5, gene)
        rec = run_simulation(cfg, 5, gene)
        assert rec.mid_ticks.tolist() == mids
        assert (rec.cash_ticks, rec.position) == (cash, pos)


class TestRunSimulation:
    def test_all_none_matches_baseline(self, tiny_market):
        base = run_simulation(tiny_market, 3)
        rec = run_simulation(tiny_market, 3, np.zeros(tiny_market.n_actions, dtype=np.int8))
        assert np.array_equal(base.mid_ticks, rec.mid_ticks)
        assert rec.profit == 0 and len(rec.aia_fills) == 0

    def test_paper_config_action_count(self, paper_market):
        assert paper_market.n_actions == 800
        rec = run_simulation(paper_market, 1, np.full(800, BUY, dtype=np.int8))
        assert rec.slot_ticks[0] == 2010 and rec.slot_ticks[-1] == 10000
        assert len(rec.aia_fills) == 800
        assert len(rec.mid_series) == 10000

    def test_wrong_length_rejected(self, tiny_market):
        with pytest.raises(GeneError):
            run_simulation(tiny_market, 1, np.zeros(3, dtype=np.int8))

    def test_bad_alphabet_rejected(self, tiny_market):
        with pytest.raises(GeneError):
            run_simulation(tiny_market, 1, np.full(tiny_market.n_actions, 5, dtype=np.int8))

    def test_deterministic(self, tiny_market):
        gene = np.random.default_rng(1).integers(0, 3, tiny_market.n_actions)
        a, b = run_simulation(tiny_market, 9, gene), run_simulation(tiny_market, 9, gene)
        assert mid_csv(a) == mid_csv(b) and trades_csv(a) == trades_csv(b)
        assert evaluate_gene(tiny_market, 9, gene) == a.profit

    def test_single_buy_at_fundamental_is_zero(self):
        cfg = MarketConfig()
        rec = MarketRecord(
            cfg, 0, None, np.zeros(2, dtype=np.int64), np.zeros((0, 5), dtype=np.int64),
            np.array([[2010, BUY, cfg.pf_ticks]]), np.zeros(0), np.zeros(0), -cfg.pf_ticks, 1,
        )
        assert rec.profit == 0.0 and verify_accounting(rec) == 0

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32), st.integers(0, 1000))
    def test_accounting_identity(self, gene_seed, seed):
        cfg = small_market()
        gene = np.random.default_rng(gene_seed).integers(0, 3, cfg.n_actions)
        rec = run_simulation(cfg, seed, gene)
        assert verify_accounting(rec) == rec.profit_ticks
        assert abs(rec.position) <= int((gene != NONE).sum())
        assert aggregate_volume(rec)[:, 1].sum() == rec.position


class TestEvaluateGenes:
    def test_matches_single_runs(self, tiny_market):
        genes = np.random.default_rng(2).integers(0, 3, (6, tiny_market.n_actions)).astype(np.int8)
        batch = evaluate_genes(tiny_market, 4, genes)
        single = [run_simulation(tiny_market, 4, g).profit_ticks for g in genes]
        assert batch.tolist() == single

    def test_worker_count_irrelevant(self, tiny_market):
        import numba

        genes = np.random.default_rng(3).integers(0, 3, (8, tiny_market.n_actions)).astype(np.int8)
        a = evaluate_genes(tiny_market, 4, genes, workers=1)
        b = evaluate_genes(tiny_market, 4, genes, workers=numba.config.NUMBA_NUM_THREADS)
        assert np.array_equal(a, b)

    def test_shape_checked(self, tiny_market):
        with pytest.raises(GeneError):
            evaluate_genes(tiny_market, 1, np.zeros((2, 3), dtype=np.int8))


class TestAggregateVolume:
    def record(self, fills, cfg=MarketConfig()):
        fills = np.array(fills, dtype=np.int64).reshape(-1, 3)
        return MarketRecord(cfg, 0, None, np.zeros(2, dtype=np.int64), np.zeros((0, 5)), fills,
                            np.zeros(0), np.zeros(0), 0, 0)

    def test_no_fills(self):
        v = aggregate_volume(self.record([]))
        assert v.shape == (50, 2) and not v[:, 1].any()

    def test_bucket_sum(self):
        v = aggregate_volume(self.record([[2010, BUY, 1], [2050, BUY, 1], [2100, SELL, 1], [2190, BUY, 1]]))
        row = v[v[:, 0] == 2000][0]
        assert row[1] == 2
        assert v[:, 1].sum() == 2

    def test_zero_bucket_rejected(self):
        with pytest.raises(ValueError):
            aggregate_volume(self.record([]), 0)

    def test_partial_last_bucket(self):
        v = aggregate_volume(self.record([]), 300)
        assert len(v) == 34 and v[-1, 0] == 9900


class TestGeneStrings:
    def test_round_trip(self):
        g = parse_gene("BSNNB")
        assert g.tolist() == [BUY, SELL, NONE, NONE, BUY]
        assert gene_to_str(g) == "BSNNB"

    def test_first_offense_reported(self):
        with pytest.raises(GeneError, match="position 2"):
            parse_gene("BSXB")

    def test_length_checked(self):
        with pytest.raises(GeneError, match="expected 4"):
            parse_gene("BSN", 4)


def test_exports(tiny_market):
    rec = run_simulation(tiny_market, 1, np.full(tiny_market.n_actions, BUY, dtype=np.int8))
    text = mid_csv(rec, "config_hash=x")
    lines = text.splitlines()
    assert lines[0] == "# config_hash=x" and lines[1] == "tick,mid"
    assert len(lines) == tiny_market.t_e + 2
    assert trades_csv(rec).splitlines()[0] == "tick,taker_side,price,maker_owner,taker_owner"
    assert '"fill_count"' in summary_json(rec)
