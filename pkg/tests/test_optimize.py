import math

import numpy as np
import pytest

from brokerlab.analytic import mhr_condition
from brokerlab.optimize import (
    REFERENCE_PROFIT_PARAMS,
    gft_ratio_objective,
    minimal_feasible_C,
    minimize_gft_ratio,
    minimize_sw_ratio,
    profit_constant,
    search_profit_constants,
    sw_ratio_objective,
)


@pytest.fixture(scope="module")
def gft_result():
    return minimize_gft_ratio()


@pytest.fixture(scope="module")
def sw_result():
    return minimize_sw_ratio()


class TestGftRatio:
    def test_value_and_argmin(self, gft_result):
        assert abs(gft_result.value - 0.1254) <= 1e-4
        f, g = gft_result.argmin
        assert abs(f - 0.3909) <= 1e-2 and abs(g - 0.6091) <= 1e-2

    def test_feasible_and_consistent(self, gft_result):
        f, g = gft_result.argmin
        assert 0 <= f <= g <= 1
        assert abs(float(gft_ratio_objective(f, g)) - gft_result.value) <= 1e-12

    def test_plug_in_dominance(self, gft_result):
        at_half = float(gft_ratio_objective(0.5, 0.5))
        # (3/16 + 2/16 + 2/16) / (12 * 1/4)
        assert abs(at_half - 7 / 48) <= 1e-15
        assert at_half >= gft_result.value

    def test_monotone_refinement(self, gft_result):
        h = gft_result.history
        assert len(h) == gft_result.refinement_rounds + 1 == 6
        assert all(b <= a for a, b in zip(h, h[1:]))

    def test_singular_boundary_excluded(self):
        assert math.isinf(gft_ratio_objective(0.0, 0.0))
        assert math.isinf(gft_ratio_objective(1.0, 1.0))
        assert math.isinf(gft_ratio_objective(0.7, 0.3))

    def test_grid_minimum_is_global_on_fine_grid(self, gft_result):
        f, g = np.meshgrid(np.linspace(0, 1, 1201), np.linspace(0, 1, 1201))
        assert np.min(gft_ratio_objective(f, g)) >= gft_result.value - 1e-12


class TestSwRatio:
    def test_value_and_argmin(self, sw_result):
        assert abs(sw_result.value - (3 - math.sqrt(2)) / 12) <= 1e-4
        f, g = sw_result.argmin
        assert abs(f - 0.70711) <= 1e-2 and abs(g - 1.0) <= 1e-2

    def test_plug_in(self, sw_result):
        assert float(sw_ratio_objective(0.0, 0.0)) == 1.0
        assert 1.0 >= sw_result.value

    def test_monotone_and_consistent(self, sw_result):
        h = sw_result.history
        assert all(b <= a for a, b in zip(h, h[1:]))
        f, g = sw_result.argmin
        assert 0 <= f <= g <= 1
        assert abs(float(sw_ratio_objective(f, g)) - sw_result.value) <= 1e-12

    def test_deterministic(self, sw_result):
        again = minimize_sw_ratio()
        assert again.argmin == sw_result.argmin and again.value == sw_result.value


class TestProfitConstants:
    @pytest.mark.parametrize("setting, bound", [("symmetric", 2 / 55), ("stoch_dom", 1 / 180)])
    def test_reference_choices(self, setting, bound):
        a, b, C = REFERENCE_PROFIT_PARAMS[setting]
        assert mhr_condition(setting, a, b, C)
        assert abs(float(profit_constant(setting, a, b, C)) - bound) <= 1e-15

    @pytest.mark.parametrize("setting, bound", [("symmetric", 2 / 55), ("stoch_dom", 1 / 180)])
    def test_search(self, setting, bound):
        res = search_profit_constants(setting)
        a, b, C = res.argmin
        assert 0 < b < a < 1 and C >= 1
        assert mhr_condition(setting, a, b, C)
        assert res.value >= bound
        assert res.meta["reference_feasible"]
        assert isinstance(res.meta["improves_on_reference"], bool)
        assert all(y >= x for x, y in zip(res.history, res.history[1:]))
        assert abs(float(profit_constant(setting, a, b, C)) - res.value) <= 1e-12

    def test_minimal_C_is_tight(self):
        for setting in ("symmetric", "stoch_dom"):
            C = float(minimal_feasible_C(setting, 0.7, 0.25))
            assert mhr_condition(setting, 0.7, 0.25, C)
            assert not mhr_condition(setting, 0.7, 0.25, C * (1 - 1e-6))

    def test_C_of_one_never_feasible(self):
        for a in np.linspace(0.05, 0.95, 10):
            for b in np.linspace(0.01, a - 0.01, 5):
                assert not mhr_condition("symmetric", a, b, 1.0)
                assert not mhr_condition("stoch_dom", a, b, 1.0)

    def test_infeasible_order(self):
        assert math.isinf(minimal_feasible_C("symmetric", 0.3, 0.6))
