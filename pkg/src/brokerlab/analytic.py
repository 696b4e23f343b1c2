"""Closed-form expectations for the single-sample broker mechanisms.

All integrals run over ``[0, hi]`` where ``hi`` is the larger support end,
using the clamped CDFs, so instances with different supports need no
special casing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .distributions import (
    DEFAULT_GRID_N,
    Distribution,
    check_mhr,
    check_stochastic_dominance,
    h_quad,
    h_quad_deriv,
    quantile,
    validation_grid,
)
from .errors import DegenerateDensityError, ParameterError, PreconditionError
from .mechanism import TradeInstance
from .numerics import QuadratureSpec, integrate

__all__ = [
    "Metrics",
    "Benchmarks",
    "first_best",
    "expected_profit_single_sample",
    "expected_gft_single_sample",
    "expected_sw_single_sample",
    "gft_lower_bound_stoch_dom",
    "gft_limit_formula",
    "gft_limit_ratio",
    "sw_limit_ratio",
    "err_bnd_leading_term",
    "err_bnd_integral",
    "mhr_condition",
    "quantile_mass_check",
    "power_fbw",
    "power_symmetric_sw",
    "CumulativeTable",
]


@dataclass(frozen=True)
class Metrics:
    gft: float
    sw: float
    profit: float


@dataclass(frozen=True)
class Benchmarks:
    fb: float
    fbw: float
    seller_mean: float


def _domain(*dists: Distribution):
    hi = max(d.support.hi for d in dists)
    bps = set()
    for d in dists:
        bps.update(d.breakpoints)
        bps.update((d.support.lo, d.support.hi))
    return (0.0, hi), sorted(bps)


def _integrate_over(fn, *dists, spec=None) -> float:
    iv, bps = _domain(*dists)
    return integrate(fn, iv, spec, bps)


def first_best(F: Distribution, G: Distribution, spec: QuadratureSpec | None = None) -> Benchmarks:
    """First-best gains from trade and welfare.

    ``FB = int G (1 - F)`` is the expected positive part of ``v - c``;
    the seller mean is ``int (1 - G)`` from 0.
    """
    fb = _integrate_over(lambda x: G.cdf(x) * (1.0 - F.cdf(x)), F, G, spec=spec)
    seller_mean = _integrate_over(lambda x: 1.0 - G.cdf(x), F, G, spec=spec)
    return Benchmarks(fb=fb, fbw=seller_mean + fb, seller_mean=seller_mean)


def expected_profit_single_sample(inst: TradeInstance, spec: QuadratureSpec | None = None) -> float:
    F, G = inst.F, inst.G
    if inst.symmetric_mechanism:
        # both orderings of the two samples contribute
        return 0.5 * _integrate_over(lambda x: (F.cdf(x) * (1.0 - F.cdf(x))) ** 2, F, spec=spec)
    return 0.25 * _integrate_over(lambda x: (G.cdf(x) * (1.0 - F.cdf(x))) ** 2, F, G, spec=spec)


# -- antiderivative tables ------------------------------------------------------

_GL_HI = np.polynomial.legendre.leggauss(8)
_GL_LO = np.polynomial.legendre.leggauss(5)
_CELL_TOL = 1e-15
_MAX_CELL_SPLITS = 60


def _gauss(func, a: np.ndarray, b: np.ndarray, rule) -> np.ndarray:
    nodes, weights = rule
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid[:, None] + half[:, None] * nodes[None, :]
    return half * (func(x.ravel()).reshape(x.shape) @ weights)


class CumulativeTable:
    """Running integral ``C(x) = int_lo^x f`` of a continuous ``f`` on a node grid.

    Cell integrals use 8-point Gauss-Legendre; cells where the 5-point rule
    disagrees (non-polynomial behaviour such as ``x**delta`` near 0) are
    bisected until it agrees.  Between nodes ``C`` is the cubic Hermite
    interpolant built from the node values and ``C' = f``.
    """

    def __init__(self, func, lo: float, hi: float, breakpoints=(), grid_n: int = DEFAULT_GRID_N):
        self.lo, self.hi = lo, hi
        nodes = validation_grid(lo, hi, breakpoints, grid_n)
        a, b = nodes[:-1], nodes[1:]
        done_a, done_b, done_v = [], [], []
        for _ in range(_MAX_CELL_SPLITS):
            hi_rule = _gauss(func, a, b, _GL_HI)
            lo_rule = _gauss(func, a, b, _GL_LO)
            ok = np.abs(hi_rule - lo_rule) <= _CELL_TOL
            done_a.append(a[ok])
            done_b.append(b[ok])
            done_v.append(hi_rule[ok])
            if ok.all():
                break
            m = 0.5 * (a[~ok] + b[~ok])
            a, b = np.concatenate([a[~ok], m]), np.concatenate([m, b[~ok]])
        else:
            done_a.append(a)
            done_b.append(b)
            done_v.append(hi_rule)
        a = np.concatenate(done_a)
        order = np.argsort(a, kind="stable")
        cells = np.concatenate(done_v)[order]
        self.nodes = np.concatenate([a[order], [hi]])
        self.values = np.concatenate([[0.0], np.cumsum(cells)])
        self.slopes = np.asarray(func(self.nodes), dtype=float)

    @property
    def total(self) -> float:
        return float(self.values[-1])

    def __call__(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.lo, self.hi)
        i = np.clip(np.searchsorted(self.nodes, x, side="right") - 1, 0, self.nodes.size - 2)
        x0, x1 = self.nodes[i], self.nodes[i + 1]
        h = x1 - x0
        t = (x - x0) / h
        t2, t3 = t * t, t * t * t
        return (
            (2 * t3 - 3 * t2 + 1) * self.values[i]
            + (t3 - 2 * t2 + t) * h * self.slopes[i]
            + (-2 * t3 + 3 * t2) * self.values[i + 1]
            + (t3 - t2) * h * self.slopes[i + 1]
        )


def _survival_tail(F: Distribution):
    """``q -> int_q^inf (1 - F)`` for any q >= 0."""
    table = F._cache.get("survival")
    if table is None:
        lo, hi = F.support.lo, F.support.hi
        table = CumulativeTable(lambda x: 1.0 - F.cdf(x), lo, hi, F.breakpoints)
        F._cache["survival"] = table

    def tail(q):
        q = np.asarray(q, dtype=float)
        inside = table.total - table(q)
        return np.where(q < table.lo, table.total + (table.lo - q), np.where(q > table.hi, 0.0, inside))

    return tail


def _cdf_head(G: Distribution):
    """``p -> int_0^p G`` for any p >= 0."""
    table = G._cache.get("cdf")
    if table is None:
        lo, hi = G.support.lo, G.support.hi
        table = CumulativeTable(G.cdf, lo, hi, G.breakpoints)
        G._cache["cdf"] = table

    def head(p):
        p = np.asarray(p, dtype=float)
        return np.where(p < table.lo, 0.0, np.where(p > table.hi, table.total + (p - table.hi), table(p)))

    return head


def _integrate_against(phi, D: Distribution, others=(), spec=None) -> float:
    """``int phi dD``: density-weighted when the density is bounded, otherwise
    after substituting ``x = D^{-1}(u)`` so the integrand stays finite."""
    _, bps = _domain(D, *others)
    if D.bounded_density:
        return integrate(lambda x: phi(x) * D.pdf(x), D.support, spec, bps)
    levels = [float(D.cdf(b)) for b in bps]
    return integrate(lambda u: phi(quantile(D, u)), (0.0, 1.0), spec, levels)


def expected_gft_single_sample(inst: TradeInstance, spec: QuadratureSpec | None = None) -> float:
    """Expected gains from trade of the single-sample mechanism."""
    F, G = inst.F, inst.G
    if inst.symmetric_mechanism:
        def sym(x):
            s = F.cdf(x) * (1.0 - F.cdf(x))
            return s / 3.0 - s * s / 6.0

        return _integrate_over(sym, F, spec=spec)

    profit = expected_profit_single_sample(inst, spec)
    tail_F = _survival_tail(F)
    head_G = _cdf_head(G)
    buyer_side = _integrate_against(lambda q: G.cdf(q) ** 2 * tail_F(q), F, (G,), spec)
    seller_side = _integrate_against(lambda p: (1.0 - F.cdf(p)) ** 2 * head_G(p), G, (F,), spec)
    return profit + 0.5 * buyer_side + 0.5 * seller_side


def expected_sw_single_sample(inst: TradeInstance, spec: QuadratureSpec | None = None) -> Metrics:
    gft = expected_gft_single_sample(inst, spec)
    profit = expected_profit_single_sample(inst, spec)
    seller_mean = first_best(inst.F, inst.G, spec).seller_mean
    return Metrics(gft=gft, sw=seller_mean + gft, profit=profit)


def gft_lower_bound_stoch_dom(F: Distribution, G: Distribution, spec: QuadratureSpec | None = None) -> float:
    """Lower bound on the asymmetric mechanism's GFT when F dominates G."""
    res = check_stochastic_dominance(F, G)
    if not res.dominates:
        raise PreconditionError(f"buyer distribution does not dominate the seller's (worst gap {res.worst_gap:.3g})")

    def integrand(x):
        f, g = F.cdf(x), G.cdf(x)
        return 3 * g * g * (1 - f) ** 2 + 2 * f ** 3 * (1 - f) + 2 * (1 - g) ** 3 * g

    return _integrate_over(integrand, F, G, spec=spec) / 12.0


# -- limits of the H-family instances --------------------------------------------


def _check_alpha_pair(alpha_f: float, alpha_g: float) -> None:
    if not 0.0 < alpha_f <= alpha_g < 1.0:
        raise ParameterError(f"need 0 < alpha_f <= alpha_g < 1, got ({alpha_f}, {alpha_g})")


def gft_limit_formula(alpha_f: float, alpha_g: float) -> float:
    """Limiting GFT of F = H_{alpha_f, delta}, G = H_{alpha_g, delta} as delta -> 0."""
    _check_alpha_pair(alpha_f, alpha_g)
    return alpha_g * (1 - alpha_f) * (alpha_g - 2 * alpha_f + alpha_f * alpha_g + 2) / 12.0


def gft_limit_ratio(alpha_f: float, alpha_g: float) -> float:
    """Limiting GFT / FB; the first-best tends to ``alpha_g (1 - alpha_f)``."""
    return gft_limit_formula(alpha_f, alpha_g) / (alpha_g * (1 - alpha_f))


def sw_limit_ratio(alpha_f: float, alpha_g: float) -> float:
    """Limiting SW / FBW; the seller mean tends to ``1 - alpha_g``."""
    _check_alpha_pair(alpha_f, alpha_g)
    num = 12 * (1 - alpha_g) + alpha_g * (1 - alpha_f) * (alpha_g - 2 * alpha_f + alpha_f * alpha_g + 2)
    return num / (12 * (1 - alpha_f * alpha_g))


def err_bnd_leading_term(alpha_f: float, alpha_g: float) -> float:
    return (alpha_g - alpha_f) * (alpha_g + alpha_f) * alpha_f / 3.0


def err_bnd_integral(alpha_f: float, alpha_g: float, delta: float, spec: QuadratureSpec | None = None) -> float:
    """``int_0^delta (H_G^2 - H_F^2) H_F'`` over the quadratic pieces."""
    if not 0.0 < delta < min(alpha_f / (2 * alpha_f + 1), alpha_g / (2 * alpha_g + 1)):
        raise ParameterError(f"delta={delta} outside the quadratic-piece range")

    def integrand(x):
        hg = h_quad(alpha_g, delta, x)
        hf = h_quad(alpha_f, delta, x)
        return (hg * hg - hf * hf) * h_quad_deriv(alpha_f, delta, x)

    return integrate(integrand, (0.0, delta), spec)


def power_fbw(delta: float) -> float:
    """First-best welfare of the symmetric instance F = x^delta."""
    return 2 * delta / (2 * delta + 1)


def power_symmetric_sw(delta: float) -> float:
    """Symmetric-mechanism welfare for F = x^delta."""
    return (
        1
        - (2 / 3) / (delta + 1)
        - (1 / 2) / (2 * delta + 1)
        + (1 / 3) / (3 * delta + 1)
        - (1 / 6) / (4 * delta + 1)
    )


# -- profit-bound conditions -----------------------------------------------------

# the published parameter choices make the condition hold with equality
_CONDITION_SLACK = 1e-12


def _condition_sides(setting: str, alpha: float, beta: float, C: float):
    if not 0.0 < beta < alpha < 1.0:
        raise ParameterError(f"need 0 < beta < alpha < 1, got alpha={alpha}, beta={beta}")
    if not C >= 1.0:
        raise ParameterError(f"need C >= 1, got {C}")
    sq = (alpha * alpha - beta * beta) / 2
    lhs = (C - 1) / 2 * min(sq, alpha - beta - sq)
    if setting == "symmetric":
        rhs = max(beta - beta * beta / 2, (1 - alpha * alpha) / 2)
    elif setting in ("stoch_dom", "stochastic_dominance"):
        rhs = max(beta, 1 - alpha)
    else:
        raise ParameterError(f"unknown setting {setting!r}")
    return lhs, rhs


def mhr_condition(setting: str, alpha: float, beta: float, C: float) -> bool:
    """Sufficient condition on (alpha, beta, C) behind the MHR profit bounds."""
    lhs, rhs = _condition_sides(setting, alpha, beta, C)
    return lhs >= rhs - _CONDITION_SLACK * max(1.0, abs(rhs))


class QuantileMassCheck(NamedTuple):
    holds: bool
    lhs: float
    rhs: float
    condition: bool


def quantile_mass_check(
    F: Distribution,
    alpha: float,
    beta: float,
    C: float,
    grid_n: int = DEFAULT_GRID_N,
    spec: QuadratureSpec | None = None,
) -> QuantileMassCheck:
    """Compare ``int_{F^-1(beta)}^{F^-1(alpha)} F (1 - F)`` with ``FB / C``."""
    try:
        doubly = check_mhr(F, "buyer", grid_n) and check_mhr(F, "seller", grid_n)
    except DegenerateDensityError as exc:
        raise PreconditionError(f"distribution is not doubly MHR: {exc}") from exc
    if not doubly:
        raise PreconditionError("distribution is not doubly MHR")
    condition = mhr_condition("symmetric", alpha, beta, C)
    a, b = quantile(F, beta), quantile(F, alpha)
    lhs = integrate(lambda x: F.cdf(x) * (1.0 - F.cdf(x)), (a, b), spec, F.breakpoints)
    rhs = first_best(F, F, spec).fb / C
    return QuantileMassCheck(lhs >= rhs, lhs, rhs, condition)
