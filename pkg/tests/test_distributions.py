import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brokerlab.distributions import (
    DistributionSpec,
    HParams,
    check_mhr,
    check_stochastic_dominance,
    h_delta_limit,
    h_quad,
    h_quad_deriv,
    is_doubly_mhr,
    make_h,
    make_mixture,
    make_power,
    make_tabulated,
    make_truncated_exponential,
    make_uniform,
    quantile,
    sample,
    validate_distribution,
    validation_grid,
)
from brokerlab.errors import DegenerateDensityError, ParameterError


def random_h_params(rng):
    a = rng.uniform(0.02, 0.98)
    d = HParams.MARGIN * h_delta_limit(a) * rng.uniform(0.01, 0.99)
    return HParams(a, d)


def random_family(rng):
    kind = rng.integers(5)
    if kind == 0:
        lo = rng.uniform(0, 1)
        return make_uniform(lo, lo + rng.uniform(0.05, 2))
    if kind == 1:
        return make_power(math.exp(rng.uniform(-3, 2)))
    if kind == 2:
        return make_truncated_exponential(rng.uniform(0.1, 8), rng.uniform(0.2, 5))
    if kind == 3:
        return make_h(random_h_params(rng))
    k = int(rng.integers(2, 4))
    return make_mixture([make_h(random_h_params(rng)) for _ in range(k)], rng.dirichlet(np.ones(k)))


class TestFamilies:
    def test_uniform(self):
        U = make_uniform(0, 1)
        assert U.cdf(0.5) == 0.5
        assert U.pdf(0.3) == 1.0
        assert make_uniform(0, 2).cdf(0.5) == 0.25
        assert U.cdf(-1.0) == 0.0 and U.cdf(3.0) == 1.0 and U.pdf(2.0) == 0.0

    @pytest.mark.parametrize("lo, hi", [(1, 1), (1, 0.5), (-0.1, 1)])
    def test_uniform_rejects(self, lo, hi):
        with pytest.raises(ParameterError):
            make_uniform(lo, hi)

    def test_power(self):
        assert make_power(1).cdf(0.5) == 0.5
        assert make_power(2).cdf(0.5) == 0.25
        assert abs(make_power(0.001).cdf(0.5) - 0.5 ** 0.001) < 1e-15
        assert abs(make_power(0.001).cdf(0.5) - 0.999307) < 1e-6

    @pytest.mark.parametrize("delta", [0.0, -1.0, math.inf])
    def test_power_rejects(self, delta):
        with pytest.raises(ParameterError):
            make_power(delta)

    def test_truncated_exponential(self):
        T = make_truncated_exponential(1.0, 10.0)
        x = 0.7
        assert abs(T.cdf(x) - (1 - math.exp(-x)) / (1 - math.exp(-10))) < 1e-15
        assert T.cdf(10.0) == 1.0

    def test_h_examples(self):
        H = make_h(HParams(0.5, 0.1))
        assert abs(H.cdf(0.5) - 0.5) < 1e-15
        assert abs(H.cdf(0.1) - 0.4) < 1e-15
        assert H.breakpoints == (0.1, 0.9)

    @pytest.mark.parametrize("a, d", [(0.5, 0.25), (0.5, 0.0), (0.0, 0.1), (1.0, 0.1), (0.9, 0.3)])
    def test_h_rejects(self, a, d):
        with pytest.raises(ParameterError):
            HParams(a, d)

    def test_h_margin(self):
        a = 0.4
        HParams(a, 0.998 * h_delta_limit(a))
        with pytest.raises(ParameterError):
            HParams(a, 0.9995 * h_delta_limit(a))

    def test_mixture_is_exact_weighted_sum(self):
        comps = [make_uniform(0, 1), make_power(2.5), make_h(HParams(0.3, 0.05))]
        w = [0.2, 0.5, 0.3]
        M = make_mixture(comps, w)
        x = np.linspace(0, 1, 1001)
        expected = 0.0
        for wi, c in zip(w, comps):
            expected = expected + wi * c.cdf(x)
        assert np.array_equal(M.cdf(x), expected)

    def test_mixture_rejects_bad_weights(self):
        with pytest.raises(ParameterError):
            make_mixture([make_uniform(0, 1)], [0.5])
        with pytest.raises(ParameterError):
            make_mixture([make_uniform(0, 1), make_power(2)], [1.0])

    def test_tabulated(self):
        T = make_tabulated([0, 0.5, 1], [0, 0.7, 1])
        assert abs(T.cdf(0.25) - 0.35) < 1e-15
        assert abs(T.pdf(0.75) - 0.6) < 1e-15
        assert validate_distribution(T).ok
        with pytest.raises(ParameterError):
            make_tabulated([0, 0, 1], [0, 0.5, 1])

    def test_non_monotone_table_fails_validation(self):
        rep = validate_distribution(make_tabulated([0, 0.5, 1], [0, 0.8, 0.6]))
        assert not rep.ok
        assert any("decreases" in f for f in rep.failures)


class TestSpecs:
    @pytest.mark.parametrize(
        "data",
        [
            {"family": "uniform", "params": {"lo": 0, "hi": 2}},
            {"family": "power", "params": {"delta": 0.5}},
            {"family": "truncated_exponential", "params": {"lambda": 2, "cutoff": 3}},
            {"family": "h_family", "params": {"alpha": 0.3, "delta": 0.05}},
            {"family": "tabulated", "params": {"x": [0, 1], "cdf": [0, 1]}},
            {
                "family": "mixture",
                "params": {
                    "components": [{"family": "power", "params": {"delta": 2}}, {"family": "uniform", "params": {"lo": 0, "hi": 1}}],
                    "weights": [0.25, 0.75],
                },
            },
        ],
    )
    def test_roundtrip(self, data):
        spec = DistributionSpec.from_dict(data)
        again = DistributionSpec.from_json(spec.to_json())
        assert again == spec
        assert again.build().same_as(spec.build())
        x = np.linspace(0, 1, 11)
        np.testing.assert_array_equal(again.build().cdf(x), spec.build().cdf(x))

    @pytest.mark.parametrize(
        "data",
        [
            {"family": "gamma", "params": {}},
            {"family": "uniform"},
            {"family": "uniform", "params": {"lo": 0}},
            {"family": "power", "params": {"delta": "x"}},
        ],
    )
    def test_bad_specs(self, data):
        with pytest.raises(ParameterError):
            DistributionSpec.from_dict(data).build()


class TestQuantile:
    def test_examples(self):
        assert quantile(make_uniform(0, 1), 0.5) == 0.5
        assert abs(quantile(make_power(2), 0.25) - 0.5) < 1e-15
        assert abs(quantile(make_h(HParams(0.5, 0.1)), 0.5) - 0.5) < 1e-15

    def test_endpoints_exact(self):
        T = make_truncated_exponential(2.0, 3.0)
        assert quantile(T, 0.0) == 0.0 and quantile(T, 1.0) == 3.0
        np.testing.assert_array_equal(quantile(T, np.array([0.0, 1.0])), [0.0, 3.0])

    @pytest.mark.parametrize("u", [-0.1, 1.1, math.nan])
    def test_out_of_range(self, u):
        with pytest.raises(ParameterError):
            quantile(make_uniform(0, 1), u)

    def test_inverts_cdf_for_random_families(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            d = random_family(rng)
            x = rng.uniform(d.support.lo, d.support.hi, 1000)
            u = d.cdf(x)
            inner = (u > 0) & (u < 1)
            np.testing.assert_allclose(quantile(d, u[inner]), x[inner], atol=1e-10)

    def test_scalar_and_vector_paths_agree(self):
        M = make_mixture([make_power(0.5), make_uniform(0.2, 0.9)], [0.4, 0.6])
        u = np.array([0.1, 0.37, 0.8])
        vec = quantile(M, u)
        for ui, xi in zip(u, vec):
            assert abs(quantile(M, float(ui)) - xi) <= 1e-12


class TestSample:
    class FixedStream:
        def __init__(self, value):
            self.value = value
            self.calls = 0

        def random(self):
            self.calls += 1
            return self.value

    def test_inverse_transform(self):
        s = self.FixedStream(0.42)
        assert sample(make_uniform(0, 1), s) == 0.42
        assert s.calls == 1
        assert abs(sample(make_power(2), self.FixedStream(0.25)) - 0.5) < 1e-15

    def test_uniform_mean(self):
        rng = np.random.default_rng(5)
        xs = quantile(make_uniform(0, 1), rng.random(10 ** 6))
        assert abs(xs.mean() - 0.5) <= 4 * 0.2887 / 1e3


class TestChecks:
    def test_dominance_examples(self):
        U = make_uniform(0, 1)
        assert tuple(check_stochastic_dominance(U, U)) == (True, 0.0)
        lo, hi = make_h(HParams(0.3, 0.05)), make_h(HParams(0.6, 0.05))
        assert check_stochastic_dominance(lo, hi).dominates
        res = check_stochastic_dominance(hi, lo)
        assert not res.dominates and res.worst_gap < -0.2

    def test_mhr_examples(self):
        U = make_uniform(0, 1)
        assert check_mhr(U, "buyer") and check_mhr(U, "seller")
        assert check_mhr(make_power(2), "seller")
        assert is_doubly_mhr(make_truncated_exponential(1.0, 10.0))
        # 2(sqrt(x) - x) rises then falls
        assert not check_mhr(make_power(0.5), "buyer")

    def test_degenerate_density(self):
        gap = make_mixture([make_uniform(0, 0.3), make_uniform(0.6, 1)], [0.5, 0.5])
        with pytest.raises(DegenerateDensityError):
            check_mhr(gap, "buyer")
        assert not is_doubly_mhr(gap)

    def test_bad_side(self):
        with pytest.raises(ParameterError):
            check_mhr(make_uniform(0, 1), "broker")

    def test_grid_includes_breakpoints(self):
        g = validation_grid(0.0, 1.0, (0.123456,), 11)
        assert 0.123456 in g and g.size == 12

    def test_random_families_valid(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            d = random_family(rng)
            rep = validate_distribution(d, grid_n=2001, n_pairs=3)
            assert rep.ok, (d.spec, rep.failures)


class TestHFamilyAppendix:
    """Piece matching, monotonicity, CDF validity and pairwise dominance."""

    draws = [random_h_params(np.random.default_rng(i)) for i in range(100)]

    @pytest.mark.parametrize("p", draws[:100])
    def test_pieces_match(self, p):
        a, d = p.alpha, p.delta
        lin = lambda x: a + 2 * d / (1 - 2 * d) * (x - 0.5)
        slope = 2 * d / (1 - 2 * d)
        assert abs(h_quad(a, d, d) - lin(d)) <= 1e-12
        assert abs(1 - h_quad(1 - a, d, d) - lin(1 - d)) <= 1e-12
        assert abs(h_quad_deriv(a, d, d) - slope) <= 1e-9
        assert abs(h_quad_deriv(1 - a, d, d) - slope) <= 1e-9

    def test_strictly_increasing_valid_cdf(self):
        for p in self.draws:
            H = make_h(p)
            x = validation_grid(0, 1, H.breakpoints)
            inner = x[(x > 0) & (x < 1)]
            assert np.all(H.pdf(inner) > 0)
            assert np.all(np.diff(H.cdf(x)) > 0)
            assert H.cdf(0.0) == 0.0 and abs(H.cdf(1.0) - 1.0) <= 1e-15

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.02, 0.98), st.floats(0.02, 0.98), st.floats(0.01, 0.99))
    def test_pairwise_dominance(self, a1, a2, frac):
        af, ag = min(a1, a2), max(a1, a2)
        d = HParams.MARGIN * min(h_delta_limit(af), h_delta_limit(ag)) * frac
        res = check_stochastic_dominance(make_h(HParams(af, d)), make_h(HParams(ag, d)), grid_n=2001)
        assert res.dominates
