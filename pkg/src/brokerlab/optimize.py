"""Nested-grid searches behind the mechanism's approximation constants.

All searches are derivative-free and deterministic: a coarse grid over the
feasible set, then rounds of 10x zoom centred on the incumbent.  The
incumbent is re-evaluated each round, so the best value is monotone.
Ties go to the lexicographically smallest point.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .analytic import mhr_condition
from .errors import ParameterError

__all__ = [
    "OptimizationResult",
    "gft_ratio_objective",
    "sw_ratio_objective",
    "minimal_feasible_C",
    "profit_constant",
    "minimize_gft_ratio",
    "minimize_sw_ratio",
    "search_profit_constants",
    "REFERENCE_PROFIT_PARAMS",
]

SINGULAR_MARGIN = 1e-9
COARSE_N = 400
ZOOM_ROUNDS = 5
ZOOM = 10.0

PROFIT_GRID_N = 200
PROFIT_RANGE = (0.005, 0.995)

# (alpha, beta, C) used for the published profit constants 2/55 and 1/180
REFERENCE_PROFIT_PARAMS = {
    "symmetric": (4 / 5, 1 / 5, 11 / 5),
    "stoch_dom": (2 / 3, 1 / 3, 5.0),
}


@dataclass
class OptimizationResult:
    argmin: tuple
    value: float
    grid_resolution: float
    refinement_rounds: int
    names: tuple = ()
    history: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "argmin": dict(zip(self.names, self.argmin)),
            "value": self.value,
            "grid_resolution": self.grid_resolution,
            "refinement_rounds": self.refinement_rounds,
            "history": list(self.history),
            **self.meta,
        }


def gft_ratio_objective(f, g):
    """Pointwise GFT lower bound over G (1 - F) at levels F = f, G = g.

    ``inf`` off the feasible set (f <= g) and on the singular boundary.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    ok = (f >= 0) & (f <= g) & (g <= 1) & (g >= SINGULAR_MARGIN) & (f <= 1 - SINGULAR_MARGIN)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (3 * g ** 2 * (1 - f) ** 2 + 2 * f ** 3 * (1 - f) + 2 * (1 - g) ** 3 * g) / (12 * g * (1 - f))
    return np.where(ok, val, np.inf)


def sw_ratio_objective(f, g):
    """Pointwise welfare lower bound over the first-best welfare integrand."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    ok = (f >= 0) & (f <= g) & (g <= 1) & (1 - f * g >= SINGULAR_MARGIN)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (12 * (1 - g) + 3 * g ** 2 * (1 - f) ** 2 + 2 * f ** 3 * (1 - f) + 2 * (1 - g) ** 3 * g) / (
            12 * (1 - f * g)
        )
    return np.where(ok, val, np.inf)


def _setting_key(setting: str) -> str:
    if setting in ("stoch_dom", "stochastic_dominance"):
        return "stoch_dom"
    if setting == "symmetric":
        return "symmetric"
    raise ParameterError(f"unknown setting {setting!r}")


def minimal_feasible_C(setting: str, alpha, beta):
    """Smallest C for which the MHR sufficient condition holds at (alpha, beta).

    The condition is linear in C, so this is exact; ``inf`` where beta >= alpha.
    """
    setting = _setting_key(setting)
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    sq = (a * a - b * b) / 2
    lhs_unit = np.minimum(sq, a - b - sq) / 2
    if setting == "symmetric":
        rhs = np.maximum(b - b * b / 2, (1 - a * a) / 2)
    else:
        rhs = np.maximum(b, 1 - a)
    ok = (0 < b) & (b < a) & (a < 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        C = 1 + rhs / lhs_unit
    return np.where(ok & (lhs_unit > 0), C, np.inf)


def profit_constant(setting: str, alpha, beta, C):
    """Guaranteed Pro / FB constant for parameters (alpha, beta, C)."""
    setting = _setting_key(setting)
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    if setting == "symmetric":
        return np.minimum(a * (1 - a), b * (1 - b)) / (2 * np.asarray(C, dtype=float))
    return b * (1 - a) / (4 * np.asarray(C, dtype=float))


def _pick(xs: np.ndarray, ys: np.ndarray, vals: np.ndarray):
    best = np.min(vals)
    idx = np.flatnonzero(vals == best)
    order = np.lexsort((ys[idx], xs[idx]))
    i = idx[order[0]]
    return float(xs[i]), float(ys[i]), float(best)


def _nested_grid(
    objective: Callable,
    bounds: tuple,
    n: int,
    rounds: int,
    seeds: tuple = (),
):
    """Minimize ``objective(x, y)`` (vectorized, ``inf`` when infeasible)."""
    (x_lo, x_hi), (y_lo, y_hi) = bounds
    wx, wy = x_hi - x_lo, y_hi - y_lo
    cx, cy = 0.5 * (x_lo + x_hi), 0.5 * (y_lo + y_hi)
    incumbent = None
    history = []
    spacing = None
    for r in range(rounds + 1):
        lo_x, hi_x = max(x_lo, cx - wx / 2), min(x_hi, cx + wx / 2)
        lo_y, hi_y = max(y_lo, cy - wy / 2), min(y_hi, cy + wy / 2)
        gx, gy = np.meshgrid(np.linspace(lo_x, hi_x, n), np.linspace(lo_y, hi_y, n), indexing="ij")
        xs, ys = gx.ravel(), gy.ravel()
        extra = [incumbent[:2]] if incumbent else list(seeds) if r == 0 else []
        if extra:
            xs = np.concatenate([xs, [e[0] for e in extra]])
            ys = np.concatenate([ys, [e[1] for e in extra]])
        vals = objective(xs, ys)
        if not np.isfinite(np.min(vals)):
            raise ParameterError("no feasible grid point")
        incumbent = _pick(xs, ys, vals)
        history.append(incumbent[2])
        spacing = max((hi_x - lo_x), (hi_y - lo_y)) / (n - 1)
        cx, cy = incumbent[0], incumbent[1]
        wx, wy = wx / ZOOM, wy / ZOOM
    return incumbent, history, spacing


def minimize_gft_ratio(n: int = COARSE_N, rounds: int = ZOOM_ROUNDS) -> OptimizationResult:
    (f, g, val), history, spacing = _nested_grid(gft_ratio_objective, ((0.0, 1.0), (0.0, 1.0)), n, rounds)
    return OptimizationResult((f, g), float(gft_ratio_objective(f, g)), spacing, rounds, ("f", "g"), history)


def minimize_sw_ratio(n: int = COARSE_N, rounds: int = ZOOM_ROUNDS) -> OptimizationResult:
    (f, g, val), history, spacing = _nested_grid(sw_ratio_objective, ((0.0, 1.0), (0.0, 1.0)), n, rounds)
    return OptimizationResult((f, g), float(sw_ratio_objective(f, g)), spacing, rounds, ("f", "g"), history)


def search_profit_constants(
    setting: str,
    n: int = PROFIT_GRID_N,
    rounds: int = ZOOM_ROUNDS,
) -> OptimizationResult:
    """Maximize the guaranteed profit constant over feasible (alpha, beta, C).

    For each (alpha, beta) the best C is the smallest feasible one, computed
    in closed form.  The published parameters seed the first round, so the
    result is never worse than them; ``meta["improves_on_reference"]`` records
    whether the search found something strictly better.
    """
    key = _setting_key(setting)

    def negated(a, b):
        C = minimal_feasible_C(key, a, b)
        val = profit_constant(key, a, b, C)
        return np.where(np.isfinite(C), -val, np.inf)

    pa, pb, pc = REFERENCE_PROFIT_PARAMS[key]
    (a, b, _), history, spacing = _nested_grid(negated, (PROFIT_RANGE, PROFIT_RANGE), n, rounds, seeds=((pa, pb),))
    C = float(minimal_feasible_C(key, a, b))
    if not mhr_condition(key, a, b, C):
        C = float(np.nextafter(C, np.inf))
    value = float(profit_constant(key, a, b, C))
    reference_value = float(profit_constant(key, pa, pb, pc))
    meta = {
        "setting": key,
        "reference_point": {"alpha": pa, "beta": pb, "C": pc},
        "reference_feasible": mhr_condition(key, pa, pb, pc),
        "reference_value": reference_value,
        "improves_on_reference": value > reference_value,
    }
    return OptimizationResult((a, b, C), value, spacing, rounds, ("alpha", "beta", "C"), [-h for h in history], meta)
