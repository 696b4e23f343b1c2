"""Seeded simulation of the single-sample mechanisms.

Stream discipline: trials are cut into fixed blocks of ``BLOCK_SIZE``.  Block
``b`` of a run with master seed ``s`` draws from
``PCG64(SeedSequence(s mod 2**64, spawn_key=(b,)))`` and consumes exactly four
uniforms per trial, in the order buyer-offer, seller-offer, buyer value,
seller value.  Workers take whole blocks, and per-block statistics are
merged in block order, so a report does not depend on the worker count.
The ``BROKERLAB_WORKERS`` environment variable overrides the default
worker count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .analytic import Metrics, expected_sw_single_sample
from .distributions import Distribution, quantile
from .errors import ParameterError
from .mechanism import TradeInstance, offer_prices, trade_mask

__all__ = [
    "BLOCK_SIZE",
    "Z_THRESHOLD",
    "MCEstimate",
    "MCReport",
    "MetricComparison",
    "block_rng",
    "estimate",
    "estimate_at_prices",
    "compare",
    "default_workers",
    "simulate_trials",
]

BLOCK_SIZE = 1 << 16
Z_THRESHOLD = 4.0
WORKERS_ENV = "BROKERLAB_WORKERS"


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    n: int
    seed: int


@dataclass(frozen=True)
class MCReport:
    gft: MCEstimate
    sw: MCEstimate
    profit: MCEstimate
    trade_rate: MCEstimate
    seller_value: MCEstimate

    def to_dict(self) -> dict:
        return {k: asdict(v) for k, v in self.__dict__.items()}


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ParameterError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc
        if n < 1:
            raise ParameterError(f"{WORKERS_ENV} must be >= 1")
        return n
    return min(8, os.cpu_count() or 1)


def block_rng(seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) % (1 << 64), spawn_key=(block,))
    return np.random.Generator(np.random.PCG64(ss))


def _blocks(n: int):
    return [(b, min(BLOCK_SIZE, n - b * BLOCK_SIZE)) for b in range(math.ceil(n / BLOCK_SIZE))]


def _moments(values: np.ndarray) -> np.ndarray:
    """(count, mean, M2) per row of a 2-D array."""
    mean = values.mean(axis=1)
    m2 = ((values - mean[:, None]) ** 2).sum(axis=1)
    return np.stack([np.full(mean.shape, values.shape[1], dtype=float), mean, m2], axis=1)


def _merge(parts) -> np.ndarray:
    """Chan et al. pairwise update, folded left in block order."""
    acc = parts[0].copy()
    for part in parts[1:]:
        na, ma, m2a = acc[:, 0], acc[:, 1], acc[:, 2]
        nb, mb, m2b = part[:, 0], part[:, 1], part[:, 2]
        n = na + nb
        d = mb - ma
        acc = np.stack([n, ma + d * nb / n, m2a + m2b + d * d * na * nb / n], axis=1)
    return acc


def simulate_trials(inst: TradeInstance, uniforms: np.ndarray):
    """Per-trial realized (gft, sw, profit, traded, c) from an (m, 4) uniform array."""
    p, q = offer_prices(inst, uniforms[:, 0], uniforms[:, 1])
    v = quantile(inst.F, uniforms[:, 2])
    c = quantile(inst.G, uniforms[:, 3])
    traded = trade_mask(p, q, v, c)
    gft = np.where(traded, v - c, 0.0)
    profit = np.where(traded, p - q, 0.0)
    return gft, c + gft, profit, traded.astype(float), c


def _run_blocks(job, n: int, workers: Optional[int]):
    blocks = _blocks(n)
    workers = workers or default_workers()
    if workers == 1 or len(blocks) == 1:
        parts = [job(b, m) for b, m in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda bm: job(*bm), blocks))
    return _merge(parts)


def _to_estimates(stats: np.ndarray, seed: int):
    out = []
    for count, mean, m2 in stats:
        n = int(count)
        se = math.sqrt(m2 / (n - 1) / n) if n > 1 else 0.0
        out.append(MCEstimate(float(mean), se, n, seed))
    return out


def estimate(inst: TradeInstance, n: int, seed: int, workers: Optional[int] = None) -> MCReport:
    """Simulate ``n`` independent runs of the instance's single-sample mechanism."""
    if n < 1:
        raise ParameterError("trial count must be at least 1")

    def job(block, size):
        u = block_rng(seed, block).random((size, 4))
        return _moments(np.stack(simulate_trials(inst, u)))

    return MCReport(*_to_estimates(_run_blocks(job, n, workers), seed))


def estimate_at_prices(
    F: Distribution,
    G: Distribution,
    p: float,
    q: float,
    n: int,
    seed: int,
    workers: Optional[int] = None,
):
    """Realized GFT and profit of the fixed offer (p, q) against fresh valuations.

    Uses two uniforms per trial (buyer value, seller value).
    """
    if n < 1:
        raise ParameterError("trial count must be at least 1")

    def job(block, size):
        u = block_rng(seed, block).random((size, 2))
        v = quantile(F, u[:, 0])
        c = quantile(G, u[:, 1])
        traded = trade_mask(p, q, v, c)
        return _moments(np.stack([np.where(traded, v - c, 0.0), np.where(traded, p - q, 0.0)]))

    gft, profit = _to_estimates(_run_blocks(job, n, workers), seed)
    return gft, profit


@dataclass(frozen=True)
class MetricComparison:
    metric: str
    analytic: float
    simulated: float
    std_error: float
    z: float
    passed: bool


def _zscore(analytic: float, est: MCEstimate) -> float:
    diff = analytic - est.mean
    if est.std_error == 0.0:
        return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    return diff / est.std_error


def compare(
    inst: TradeInstance,
    n: int,
    seed: int,
    analytic: Optional[Metrics] = None,
    threshold: float = Z_THRESHOLD,
    workers: Optional[int] = None,
    report: Optional[MCReport] = None,
):
    """Check the closed forms against simulation; a metric passes when
    ``|analytic - mean| <= threshold * std_error``."""
    analytic = analytic or expected_sw_single_sample(inst)
    report = report or estimate(inst, n, seed, workers)
    out = []
    for name in ("gft", "sw", "profit"):
        est = getattr(report, name)
        z = _zscore(getattr(analytic, name), est)
        out.append(MetricComparison(name, getattr(analytic, name), est.mean, est.std_error, z, abs(z) <= threshold))
    return out, report
