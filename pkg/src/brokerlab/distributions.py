"""Bounded, absolutely continuous valuation distributions.

A :class:`Distribution` bundles a vectorized CDF and density on a bounded
support, the breakpoints where its pieces meet (quadrature needs them), and
the :class:`DistributionSpec` it was built from so it can be serialized.
Outside the support the CDF is clamped to 0 / 1 and the density is 0.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import DegenerateDensityError, ParameterError
from .numerics import ROOT_TOL, Interval, bisect_monotone, find_root, integrate

__all__ = [
    "Distribution",
    "DistributionSpec",
    "HParams",
    "h_delta_limit",
    "h_quad",
    "h_quad_deriv",
    "make_uniform",
    "make_power",
    "make_truncated_exponential",
    "make_h",
    "make_mixture",
    "make_tabulated",
    "quantile",
    "sample",
    "check_stochastic_dominance",
    "check_mhr",
    "is_doubly_mhr",
    "validate_distribution",
    "validation_grid",
    "DEFAULT_GRID_N",
]

DEFAULT_GRID_N = 10_001
DOMINANCE_SLACK = 1e-12
MHR_SLACK = 1e-9

ArrayFunc = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DistributionSpec:
    """Serializable description of a distribution.

    JSON form is ``{"family": ..., "params": {...}}`` with keys
    ``lo, hi`` (uniform), ``delta`` (power), ``lambda, cutoff``
    (truncated_exponential), ``alpha, delta`` (h_family) and
    ``components, weights`` (mixture; components are nested specs) and
    ``x, cdf`` (tabulated; knots of a piecewise-linear CDF).
    """

    family: str
    params: dict

    FAMILIES = ("uniform", "power", "truncated_exponential", "h_family", "mixture", "tabulated")

    def to_dict(self) -> dict:
        if self.family == "mixture":
            params = {
                "components": [c.to_dict() for c in self.params["components"]],
                "weights": list(self.params["weights"]),
            }
        elif self.family == "tabulated":
            params = {k: list(v) for k, v in self.params.items()}
        else:
            params = dict(self.params)
        return {"family": self.family, "params": params}

    @classmethod
    def from_dict(cls, data: dict) -> "DistributionSpec":
        try:
            family = data["family"]
            params = data["params"]
        except (KeyError, TypeError) as exc:
            raise ParameterError(f"distribution spec needs 'family' and 'params': {data!r}") from exc
        if family not in cls.FAMILIES:
            raise ParameterError(f"unknown distribution family {family!r}")
        if family == "mixture":
            params = {
                "components": tuple(cls.from_dict(c) for c in params["components"]),
                "weights": tuple(float(w) for w in params["weights"]),
            }
        elif family == "tabulated":
            try:
                params = {k: tuple(float(v) for v in params[k]) for k in ("x", "cdf")}
            except (KeyError, TypeError, ValueError) as exc:
                raise ParameterError(f"tabulated spec needs numeric lists 'x' and 'cdf': {exc}") from exc
        else:
            try:
                params = {k: float(v) for k, v in params.items()}
            except (TypeError, ValueError) as exc:
                raise ParameterError(f"{family} parameters must be numbers: {exc}") from exc
        return cls(family, params)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DistributionSpec":
        return cls.from_dict(json.loads(text))

    def build(self) -> "Distribution":
        p = self.params
        try:
            if self.family == "uniform":
                return make_uniform(p["lo"], p["hi"])
            if self.family == "power":
                return make_power(p["delta"])
            if self.family == "truncated_exponential":
                return make_truncated_exponential(p["lambda"], p["cutoff"])
            if self.family == "h_family":
                return make_h(HParams(p["alpha"], p["delta"]))
            if self.family == "tabulated":
                return make_tabulated(p["x"], p["cdf"])
            return make_mixture([c.build() for c in p["components"]], p["weights"])
        except KeyError as exc:
            raise ParameterError(f"{self.family} spec is missing parameter {exc}") from exc


@dataclass(frozen=True, eq=False)
class Distribution:
    spec: DistributionSpec
    support: Interval
    breakpoints: tuple
    _cdf: ArrayFunc = field(repr=False)
    _pdf: ArrayFunc = field(repr=False)
    _ppf: Optional[ArrayFunc] = field(default=None, repr=False)
    # False when the density is unbounded at a support endpoint (x^delta, delta < 1)
    bounded_density: bool = True
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def name(self) -> str:
        return self.spec.to_json()

    def cdf(self, x):
        arr = np.asarray(x, dtype=float)
        inner = np.clip(arr, self.support.lo, self.support.hi)
        out = np.where(arr < self.support.lo, 0.0, np.where(arr > self.support.hi, 1.0, self._cdf(inner)))
        return float(out) if out.ndim == 0 else out

    def pdf(self, x):
        arr = np.asarray(x, dtype=float)
        inside = (arr >= self.support.lo) & (arr <= self.support.hi)
        inner = np.clip(arr, self.support.lo, self.support.hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(inside, self._pdf(inner), 0.0)
        return float(out) if out.ndim == 0 else out

    def quantile(self, u):
        return quantile(self, u)

    def same_as(self, other: "Distribution") -> bool:
        return self.spec == other.spec


def _check_unit(u: np.ndarray) -> None:
    if np.any(~np.isfinite(u)) or np.any((u < 0.0) | (u > 1.0)):
        raise ParameterError("quantile level must lie in [0, 1]")


def quantile(d: Distribution, u):
    """Inverse CDF, exact at the ends: ``quantile(0) = lo`` and ``quantile(1) = hi``.

    Families with an explicit inverse use it; everything else is bisection to
    bracket width ``1e-12``.  Accepts scalars or arrays.
    """
    arr = np.asarray(u, dtype=float)
    _check_unit(arr)
    lo, hi = d.support.lo, d.support.hi
    if arr.ndim == 0:
        v = float(arr)
        if v == 0.0:
            return lo
        if v == 1.0:
            return hi
        if d._ppf is not None:
            return float(np.clip(d._ppf(np.asarray([v]))[0], lo, hi))
        return find_root(lambda x: float(d.cdf(x)) - v, d.support, ROOT_TOL)
    if d._ppf is not None:
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.clip(d._ppf(arr), lo, hi)
    else:
        x = bisect_monotone(d.cdf, arr, d.support, ROOT_TOL)
    return np.where(arr == 0.0, lo, np.where(arr == 1.0, hi, x))


def sample(d: Distribution, rng: np.random.Generator) -> float:
    """Inverse-transform draw consuming exactly one uniform from ``rng``."""
    return quantile(d, rng.random())


# -- families ---------------------------------------------------------------


def make_uniform(lo: float, hi: float) -> Distribution:
    lo, hi = float(lo), float(hi)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo < 0 or hi <= lo:
        raise ParameterError(f"uniform needs 0 <= lo < hi, got ({lo}, {hi})")
    width = hi - lo
    return Distribution(
        spec=DistributionSpec("uniform", {"lo": lo, "hi": hi}),
        support=Interval(lo, hi),
        breakpoints=(),
        _cdf=lambda x: (x - lo) / width,
        _pdf=lambda x: np.full_like(x, 1.0 / width),
        _ppf=lambda u: lo + u * width,
    )


def make_power(delta: float) -> Distribution:
    """CDF ``x**delta`` on [0, 1]."""
    delta = float(delta)
    if not (math.isfinite(delta) and delta > 0):
        raise ParameterError(f"power family needs delta > 0, got {delta}")
    return Distribution(
        spec=DistributionSpec("power", {"delta": delta}),
        support=Interval(0.0, 1.0),
        breakpoints=(),
        _cdf=lambda x: x ** delta,
        _pdf=lambda x: delta * x ** (delta - 1.0),
        _ppf=lambda u: u ** (1.0 / delta),
        bounded_density=delta >= 1.0,
    )


def make_truncated_exponential(lam: float, cutoff: float) -> Distribution:
    """Exponential(rate ``lam``) conditioned on [0, cutoff]."""
    lam, cutoff = float(lam), float(cutoff)
    if not (math.isfinite(lam) and lam > 0 and math.isfinite(cutoff) and cutoff > 0):
        raise ParameterError(f"truncated exponential needs lambda > 0 and cutoff > 0, got ({lam}, {cutoff})")
    mass = -math.expm1(-lam * cutoff)
    tail = math.expm1(-lam * cutoff)
    return Distribution(
        spec=DistributionSpec("truncated_exponential", {"lambda": lam, "cutoff": cutoff}),
        support=Interval(0.0, cutoff),
        breakpoints=(),
        _cdf=lambda x: -np.expm1(-lam * x) / mass,
        _pdf=lambda x: lam * np.exp(-lam * x) / mass,
        _ppf=lambda u: -np.log1p(u * tail) / lam,
    )


def h_delta_limit(alpha: float) -> float:
    """Supremum of legal delta for H_{alpha, delta}."""
    return min(alpha / (2 * alpha + 1), (1 - alpha) / (3 - 2 * alpha))


@dataclass(frozen=True)
class HParams:
    alpha: float
    delta: float

    # keeps delta strictly inside the open constraint under rounding
    MARGIN = 0.999

    def __post_init__(self):
        a, d = float(self.alpha), float(self.delta)
        if not 0.0 < a < 1.0:
            raise ParameterError(f"H family needs 0 < alpha < 1, got {a}")
        limit = self.MARGIN * h_delta_limit(a)
        if not 0.0 < d < limit:
            raise ParameterError(f"H family with alpha={a} needs 0 < delta < {limit:.6g}, got {d}")


def _quad_coeffs(alpha: float, delta: float) -> tuple:
    slope = (alpha - delta) / delta
    curv = ((2 * alpha + 1) * delta - alpha) / (delta ** 2 * (1 - 2 * delta))
    return slope, curv


def h_quad(alpha: float, delta: float, x):
    """Quadratic piece on [0, delta]: value 0 at 0 and alpha - delta at delta."""
    slope, curv = _quad_coeffs(alpha, delta)
    return slope * x + curv * x * (x - delta)


def h_quad_deriv(alpha: float, delta: float, x):
    slope, curv = _quad_coeffs(alpha, delta)
    return slope + curv * (2 * x - delta)


def _h_quad_inverse(alpha: float, delta: float, u: np.ndarray) -> np.ndarray:
    slope, curv = _quad_coeffs(alpha, delta)
    lin = slope - curv * delta  # derivative at 0, positive for legal delta
    disc = np.maximum(lin * lin + 4.0 * curv * u, 0.0)
    return 2.0 * u / (lin + np.sqrt(disc))


def make_h(p: HParams) -> Distribution:
    """Three-piece quadratic / linear / quadratic CDF hovering near ``alpha``."""
    alpha, delta = float(p.alpha), float(p.delta)
    rise = 2 * delta / (1 - 2 * delta)
    top = 1.0 - delta
    beta = 1.0 - alpha

    def cdf(x):
        return np.where(
            x <= delta,
            h_quad(alpha, delta, x),
            np.where(x >= top, 1.0 - h_quad(beta, delta, 1.0 - x), alpha + rise * (x - 0.5)),
        )

    def pdf(x):
        return np.where(
            x <= delta,
            h_quad_deriv(alpha, delta, x),
            np.where(x >= top, h_quad_deriv(beta, delta, 1.0 - x), rise),
        )

    lo_level, hi_level = alpha - delta, alpha + delta

    def ppf(u):
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(
                u <= lo_level,
                _h_quad_inverse(alpha, delta, u),
                np.where(
                    u >= hi_level,
                    1.0 - _h_quad_inverse(beta, delta, 1.0 - u),
                    0.5 + (u - alpha) / rise,
                ),
            )

    return Distribution(
        spec=DistributionSpec("h_family", {"alpha": alpha, "delta": delta}),
        support=Interval(0.0, 1.0),
        breakpoints=(delta, top),
        _cdf=cdf,
        _pdf=pdf,
        _ppf=ppf,
    )


def make_mixture(components: Sequence[Distribution], weights: Sequence[float]) -> Distribution:
    comps = tuple(components)
    w = tuple(float(x) for x in weights)
    if not comps or len(comps) != len(w):
        raise ParameterError("mixture needs one weight per component")
    if any(not math.isfinite(x) or x < 0 for x in w) or abs(math.fsum(w) - 1.0) > 1e-12:
        raise ParameterError(f"mixture weights must be nonnegative and sum to 1, got {w}")
    lo = min(c.support.lo for c in comps)
    hi = max(c.support.hi for c in comps)
    bps = set()
    for c in comps:
        bps.update(c.breakpoints)
        bps.update((c.support.lo, c.support.hi))
    bps = tuple(sorted(b for b in bps if lo < b < hi))

    def cdf(x):
        total = 0.0
        for wi, ci in zip(w, comps):
            total = total + wi * ci.cdf(x)
        return total

    def pdf(x):
        total = 0.0
        for wi, ci in zip(w, comps):
            total = total + wi * ci.pdf(x)
        return total

    return Distribution(
        spec=DistributionSpec("mixture", {"components": tuple(c.spec for c in comps), "weights": w}),
        support=Interval(lo, hi),
        breakpoints=bps,
        _cdf=cdf,
        _pdf=pdf,
        bounded_density=all(c.bounded_density for c in comps),
    )


def make_tabulated(xs: Sequence[float], levels: Sequence[float]) -> Distribution:
    """Piecewise-linear CDF through the knots ``(xs[i], levels[i])``.

    Only the knot layout is checked here; monotonicity and the boundary
    values are left to :func:`validate_distribution`, so a malformed table
    can still be built and reported on.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(levels, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or x.size < 2:
        raise ParameterError("tabulated CDF needs two equal-length lists with at least two knots")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ParameterError("tabulated CDF knots must be finite")
    if x[0] < 0 or np.any(np.diff(x) <= 0):
        raise ParameterError("tabulated CDF abscissae must be nonnegative and strictly increasing")
    slopes = np.diff(y) / np.diff(x)

    def pdf(t):
        i = np.clip(np.searchsorted(x, t, side="right") - 1, 0, slopes.size - 1)
        return slopes[i]

    return Distribution(
        spec=DistributionSpec("tabulated", {"x": tuple(x.tolist()), "cdf": tuple(y.tolist())}),
        support=Interval(float(x[0]), float(x[-1])),
        breakpoints=tuple(x[1:-1].tolist()),
        _cdf=lambda t: np.interp(t, x, y),
        _pdf=pdf,
    )


# -- checkers ---------------------------------------------------------------


def validation_grid(lo: float, hi: float, extra: Sequence[float] = (), grid_n: int = DEFAULT_GRID_N) -> np.ndarray:
    pts = np.concatenate([np.linspace(lo, hi, grid_n), [b for b in extra if lo <= b <= hi]])
    return np.unique(pts)


class DominanceResult(NamedTuple):
    dominates: bool
    worst_gap: float


def check_stochastic_dominance(F: Distribution, G: Distribution, grid_n: int = DEFAULT_GRID_N) -> DominanceResult:
    """Does buyer ``F`` stochastically dominate seller ``G`` (G >= F pointwise)?"""
    lo = min(F.support.lo, G.support.lo)
    hi = max(F.support.hi, G.support.hi)
    extra = (*F.breakpoints, *G.breakpoints, F.support.lo, F.support.hi, G.support.lo, G.support.hi)
    x = validation_grid(lo, hi, extra, grid_n)
    gap = G.cdf(x) - F.cdf(x)
    worst = float(np.min(gap))
    return DominanceResult(worst >= -DOMINANCE_SLACK, worst)


def _interior_grid(d: Distribution, grid_n: int) -> np.ndarray:
    x = validation_grid(d.support.lo, d.support.hi, d.breakpoints, grid_n)
    return x[(x > d.support.lo) & (x < d.support.hi)]


def check_mhr(d: Distribution, side: str, grid_n: int = DEFAULT_GRID_N) -> bool:
    """Grid test of the monotone hazard rate property.

    ``side="buyer"``: (1 - F) / F' nonincreasing.  ``side="seller"``:
    F / F' nondecreasing.  Consecutive grid points may violate monotonicity
    by at most 1e-9.  This is numerical evidence, not a proof.
    """
    if side not in ("buyer", "seller"):
        raise ParameterError(f"side must be 'buyer' or 'seller', got {side!r}")
    x = _interior_grid(d, grid_n)
    dens = d.pdf(x)
    if np.any(dens <= 0.0):
        bad = x[dens <= 0.0][0]
        raise DegenerateDensityError(f"density vanishes at interior point {bad!r}")
    F = d.cdf(x)
    if side == "buyer":
        ratio = (1.0 - F) / dens
        return bool(np.all(np.diff(ratio) <= MHR_SLACK))
    ratio = F / dens
    return bool(np.all(np.diff(ratio) >= -MHR_SLACK))


def is_doubly_mhr(d: Distribution, grid_n: int = DEFAULT_GRID_N) -> bool:
    """Both MHR checks pass; a vanishing interior density counts as a failure."""
    try:
        return check_mhr(d, "buyer", grid_n) and check_mhr(d, "seller", grid_n)
    except DegenerateDensityError:
        return False


@dataclass
class ValidationReport:
    ok: bool
    failures: list

    def __bool__(self):
        return self.ok


def validate_distribution(
    d: Distribution,
    grid_n: int = DEFAULT_GRID_N,
    n_pairs: int = 20,
    seed: int = 0,
    tol: float = 1e-8,
) -> ValidationReport:
    """Check the CDF invariants: boundary values, monotonicity, nonnegative
    density, and that the density integrates to CDF increments."""
    failures = []
    lo, hi = d.support.lo, d.support.hi
    if abs(d.cdf(lo)) > 1e-12:
        failures.append(f"cdf(lo) = {d.cdf(lo)!r}, expected 0")
    if abs(d.cdf(hi) - 1.0) > 1e-12:
        failures.append(f"cdf(hi) = {d.cdf(hi)!r}, expected 1")
    x = validation_grid(lo, hi, d.breakpoints, grid_n)
    F = d.cdf(x)
    if np.any(np.diff(F) < -1e-15):
        failures.append("cdf decreases on the validation grid")
    dens = d.pdf(x[x > lo]) if not d.bounded_density else d.pdf(x)
    if np.any(dens < 0.0) or np.any(np.isnan(dens)):
        failures.append("density is negative or undefined on the validation grid")
    rng = np.random.default_rng(seed)
    for _ in range(n_pairs):
        a, b = np.sort(rng.uniform(lo, hi, size=2))
        mass = integrate(d.pdf, (a, b), breakpoints=d.breakpoints)
        gap = abs(d.cdf(b) - d.cdf(a) - mass)
        if gap > tol:
            failures.append(f"density integral on [{a:.6g}, {b:.6g}] misses the cdf increment by {gap:.3g}")
            break
    return ValidationReport(not failures, failures)
