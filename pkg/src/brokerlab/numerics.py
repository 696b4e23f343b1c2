"""Deterministic quadrature and root-finding kernels.

Integrands passed to :func:`integrate` must be vectorized: they receive a
1-D float array and return an array of the same shape.  Every evaluation is
checked for finiteness.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import BracketError, ConvergenceError, EvaluationError, ParameterError

__all__ = [
    "Interval",
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "ROOT_TOL",
    "integrate",
    "find_root",
    "bisect_monotone",
]

ArrayFunc = Callable[[np.ndarray], np.ndarray]

ROOT_TOL = 1e-12

# panels per breakpoint segment before adaptivity starts; guards against the
# five-point Simpson estimate missing a narrow feature entirely
_INITIAL_PANELS = 8


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ParameterError(f"interval endpoints must be finite, got [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ParameterError(f"interval has lo > hi: [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_depth: int = 60

    def __post_init__(self):
        if not self.abs_tol > 0 or not self.rel_tol > 0:
            raise ParameterError("quadrature tolerances must be positive")
        if self.max_depth < 10:
            raise ParameterError("max_depth must be at least 10")


DEFAULT_QUADRATURE = QuadratureSpec()

IntervalLike = Union[Interval, Sequence[float]]


def _as_interval(iv: IntervalLike) -> Interval:
    if isinstance(iv, Interval):
        return iv
    lo, hi = iv
    return Interval(float(lo), float(hi))


def _evaluate(f: ArrayFunc, x: np.ndarray) -> np.ndarray:
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape).astype(float)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)][0]
        raise EvaluationError(f"integrand is not finite at x = {bad!r}")
    return y


def integrate(
    f: ArrayFunc,
    iv: IntervalLike,
    spec: QuadratureSpec | None = None,
    breakpoints: Iterable[float] = (),
) -> float:
    """Integrate ``f`` over ``iv`` with globally adaptive Simpson quadrature.

    Each panel carries a Simpson estimate on the whole panel and on its two
    halves; the difference drives both the Richardson-corrected value and the
    error estimate.  Panels whose error exceeds their fair share of the global
    tolerance ``max(abs_tol, rel_tol * |I|)`` are bisected until the summed
    error estimate fits.  ``breakpoints`` inside ``iv`` are always panel
    edges, which is how piecewise integrands (kinks at distribution pieces)
    are resolved.
    """
    spec = spec or DEFAULT_QUADRATURE
    iv = _as_interval(iv)
    if iv.lo == iv.hi:
        return 0.0

    edges = sorted({iv.lo, iv.hi, *(float(b) for b in breakpoints if iv.lo < b < iv.hi)})
    seg = np.asarray(edges)
    frac = np.arange(_INITIAL_PANELS + 1) / _INITIAL_PANELS
    panel_edges = np.concatenate(
        [seg[i] + (seg[i + 1] - seg[i]) * frac[:-1] for i in range(len(seg) - 1)] + [seg[-1:]]
    )
    a = panel_edges[:-1]
    b = panel_edges[1:]
    m = 0.5 * (a + b)
    first = _evaluate(f, np.concatenate([a, m, b, 0.5 * (a + m), 0.5 * (m + b)]))
    k = a.size
    fa, fm, fb, fl, fr = (first[i * k:(i + 1) * k] for i in range(5))
    depth = np.zeros(k, dtype=int)

    while True:
        w = b - a
        coarse = w / 6.0 * (fa + 4.0 * fm + fb)
        fine = w / 12.0 * (fa + 4.0 * fl + 2.0 * fm + 4.0 * fr + fb)
        diff = fine - coarse
        est = fine + diff / 15.0
        err = np.abs(diff) / 15.0
        total = math.fsum(est)
        target = max(spec.abs_tol, spec.rel_tol * abs(total))
        if math.fsum(err) <= target:
            return total

        split = err > target / err.size
        if np.any(depth[split] >= spec.max_depth):
            raise ConvergenceError(
                f"adaptive Simpson exceeded max_depth={spec.max_depth} on [{iv.lo}, {iv.hi}]"
            )
        sa, sb, sm = a[split], b[split], m[split]
        if np.any((sm <= sa) | (sm >= sb)):
            raise ConvergenceError("panel width fell below floating-point resolution")
        sl = 0.5 * (sa + sm)
        sr = 0.5 * (sm + sb)
        n = sa.size
        new = _evaluate(f, np.concatenate([0.5 * (sa + sl), 0.5 * (sl + sm), 0.5 * (sm + sr), 0.5 * (sr + sb)]))
        q1, q2, q3, q4 = (new[i * n:(i + 1) * n] for i in range(4))
        sfa, sfl, sfm, sfr, sfb = fa[split], fl[split], fm[split], fr[split], fb[split]
        sdepth = depth[split] + 1

        keep = ~split
        a = np.concatenate([a[keep], sa, sm])
        b = np.concatenate([b[keep], sm, sb])
        m = np.concatenate([m[keep], sl, sr])
        fa = np.concatenate([fa[keep], sfa, sfm])
        fm = np.concatenate([fm[keep], sfl, sfr])
        fb = np.concatenate([fb[keep], sfm, sfb])
        fl = np.concatenate([fl[keep], q1, q3])
        fr = np.concatenate([fr[keep], q2, q4])
        depth = np.concatenate([depth[keep], sdepth, sdepth])


def find_root(f: Callable[[float], float], iv: IntervalLike, tol: float = ROOT_TOL) -> float:
    """Bisection root of a scalar function on a sign-changing bracket.

    Returns the midpoint of the final bracket, whose width is at most ``tol``
    (or one ulp when ``tol`` is finer than the float spacing there).
    """
    iv = _as_interval(iv)
    if not tol > 0:
        raise ParameterError("tol must be positive")
    lo, hi = iv.lo, iv.hi
    flo, fhi = f(lo), f(hi)
    if not (math.isfinite(flo) and math.isfinite(fhi)):
        raise EvaluationError("function is not finite at the bracket endpoints")
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"f({lo}) = {flo} and f({hi}) = {fhi} have the same sign")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bisect_monotone(
    f: ArrayFunc,
    targets: np.ndarray,
    iv: IntervalLike,
    tol: float = ROOT_TOL,
) -> np.ndarray:
    """Vectorized bisection for a nondecreasing ``f``: solves ``f(x) = t`` per target.

    The bracket invariant is ``f(lo) < t <= f(hi)``, so on flat stretches the
    result converges to the left end (the generalized inverse).
    """
    iv = _as_interval(iv)
    t = np.asarray(targets, dtype=float)
    lo = np.full(t.shape, iv.lo)
    hi = np.full(t.shape, iv.hi)
    if iv.width > 0:
        steps = max(1, math.ceil(math.log2(iv.width / tol)))
        for _ in range(steps):
            mid = 0.5 * (lo + hi)
            right = f(mid) >= t
            hi = np.where(right, mid, hi)
            lo = np.where(right, lo, mid)
    return 0.5 * (lo + hi)
