import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from brokerlab.distributions import HParams, make_h, make_uniform
from brokerlab.errors import ParameterError, PreconditionError
from brokerlab.mechanism import (
    PriceOffer,
    Setting,
    TradeInstance,
    analytic_gft_at,
    analytic_profit_at,
    draw_offer,
    offer_prices,
    resolve_trade,
    trade_mask,
)
from brokerlab.montecarlo import estimate_at_prices

U = make_uniform(0, 1)


class ScriptedStream:
    def __init__(self, *values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


class TestResolveTrade:
    def test_trade(self):
        out = resolve_trade(0.9, 0.1, PriceOffer(0.6, 0.4))
        assert out.traded and out.buyer_payment == 0.6 and out.seller_receipt == 0.4
        assert abs(out.profit - 0.2) < 1e-15
        assert abs(out.gains - 0.8) < 1e-15

    def test_buyer_declines(self):
        assert not resolve_trade(0.5, 0.1, PriceOffer(0.6, 0.4)).traded

    def test_dead_offer(self):
        offer = PriceOffer(0.4, 0.6)
        assert offer.dead
        out = resolve_trade(0.9, 0.1, offer)
        assert not out.traded and out.profit == 0.0 and out.gains == 0.0

    def test_ties_trade(self):
        assert resolve_trade(0.5, 0.5, PriceOffer(0.5, 0.5)).traded

    def test_negative_inputs(self):
        with pytest.raises(ParameterError):
            resolve_trade(-0.1, 0.1, PriceOffer(0.6, 0.4))
        with pytest.raises(ParameterError):
            PriceOffer(-1.0, 0.0)

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
    def test_profit_identity_and_spread(self, v, c, p, q):
        out = resolve_trade(v, c, PriceOffer(p, q))
        assert out.profit == out.buyer_payment - out.seller_receipt
        if out.traded:
            assert p >= q
        assert bool(trade_mask(p, q, v, c)) == out.traded


class TestOffers:
    def test_symmetric_max_min(self):
        inst = TradeInstance.symmetric(U)
        assert draw_offer(inst, ScriptedStream(0.3, 0.7)) == PriceOffer(0.7, 0.3)
        assert draw_offer(inst, ScriptedStream(0.5, 0.5)) == PriceOffer(0.5, 0.5)

    def test_asymmetric_keeps_order(self):
        inst = TradeInstance(U, U, Setting.GENERAL)
        offer = draw_offer(inst, ScriptedStream(0.2, 0.8))
        assert offer == PriceOffer(0.2, 0.8) and offer.dead

    def test_symmetric_never_dead(self):
        inst = TradeInstance.symmetric(make_h(HParams(0.4, 0.05)))
        u = np.random.default_rng(0).random((10000, 2))
        p, q = offer_prices(inst, u[:, 0], u[:, 1])
        assert np.all(p >= q)


class TestInstance:
    def test_symmetric_requires_same_distribution(self):
        with pytest.raises(PreconditionError):
            TradeInstance(U, make_uniform(0, 2), Setting.SYMMETRIC)

    def test_dominance_validated(self):
        lo, hi = make_h(HParams(0.3, 0.05)), make_h(HParams(0.6, 0.05))
        TradeInstance(lo, hi, Setting.STOCHASTIC_DOMINANCE)
        with pytest.raises(PreconditionError):
            TradeInstance(hi, lo, Setting.STOCHASTIC_DOMINANCE)

    def test_dict_roundtrip(self):
        inst = TradeInstance(make_h(HParams(0.3, 0.05)), make_h(HParams(0.6, 0.05)), "stochastic_dominance", "pair")
        again = TradeInstance.from_dict(inst.to_dict())
        assert again.setting is Setting.STOCHASTIC_DOMINANCE and again.name == "pair"
        assert again.F.same_as(inst.F) and again.G.same_as(inst.G)
        sym = TradeInstance.from_dict({"setting": "symmetric", "buyer": U.spec.to_dict()})
        assert sym.G is sym.F

    def test_bad_dicts(self):
        with pytest.raises(ParameterError):
            TradeInstance.from_dict({"setting": "weird", "buyer": U.spec.to_dict()})
        with pytest.raises(ParameterError):
            TradeInstance.from_dict({"setting": "general", "buyer": U.spec.to_dict()})


class TestFixedPrices:
    def test_profit_examples(self):
        assert analytic_profit_at(U, U, 0.5, 0.5) == 0.0
        assert abs(analytic_profit_at(U, U, 0.75, 0.25) - 0.03125) < 1e-15
        assert analytic_profit_at(U, U, 0.25, 0.75) == 0.0

    def test_gft_examples(self):
        assert abs(analytic_gft_at(U, U, 0.5, 0.5) - 0.125) < 1e-12
        assert analytic_gft_at(U, U, 1.0, 0.0) == 0.0
        assert abs(analytic_gft_at(U, U, 0.75, 0.25) - 0.046875) < 1e-12
        assert analytic_gft_at(U, U, 0.25, 0.75) == 0.0

    @pytest.mark.parametrize("F, G", [(U, U), (make_h(HParams(0.3, 0.02)), make_h(HParams(0.7, 0.02)))])
    def test_monte_carlo_agreement(self, F, G):
        rng = np.random.default_rng(2024)
        for i in range(10):
            q, p = np.sort(rng.uniform(0, 1, 2))
            gft, profit = estimate_at_prices(F, G, p, q, 10 ** 6, seed=i)
            assert abs(gft.mean - analytic_gft_at(F, G, p, q)) <= 4 * gft.std_error
            assert abs(profit.mean - analytic_profit_at(F, G, p, q)) <= 4 * profit.std_error
