"""Posted-price trade and the two single-sample broker mechanisms."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .distributions import Distribution, DistributionSpec, check_stochastic_dominance, quantile
from .errors import ParameterError, PreconditionError
from .numerics import QuadratureSpec, integrate

__all__ = [
    "Setting",
    "PriceOffer",
    "TradeOutcome",
    "TradeInstance",
    "resolve_trade",
    "trade_mask",
    "draw_offer",
    "offer_prices",
    "analytic_profit_at",
    "analytic_gft_at",
]


class Setting(str, enum.Enum):
    SYMMETRIC = "symmetric"
    STOCHASTIC_DOMINANCE = "stochastic_dominance"
    GENERAL = "general"


@dataclass(frozen=True)
class PriceOffer:
    buyer_price: float
    seller_price: float

    def __post_init__(self):
        if self.buyer_price < 0 or self.seller_price < 0:
            raise ParameterError("posted prices must be nonnegative")

    @property
    def dead(self) -> bool:
        """A spread-negative offer can never clear."""
        return self.buyer_price < self.seller_price


@dataclass(frozen=True)
class TradeOutcome:
    traded: bool
    buyer_value: float
    seller_value: float
    buyer_payment: float
    seller_receipt: float

    @property
    def profit(self) -> float:
        return self.buyer_payment - self.seller_receipt

    @property
    def gains(self) -> float:
        return self.buyer_value - self.seller_value if self.traded else 0.0


@dataclass(frozen=True, eq=False)
class TradeInstance:
    """Buyer distribution ``F``, seller distribution ``G`` and the setting tag.

    Construction validates the tag: symmetric requires identical specs and
    stochastic dominance is checked on the validation grid.
    """

    F: Distribution
    G: Distribution
    setting: Setting = Setting.GENERAL
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "setting", Setting(self.setting))
        if self.setting is Setting.SYMMETRIC and not self.F.same_as(self.G):
            raise PreconditionError("symmetric instance needs identical buyer and seller distributions")
        if self.setting is Setting.STOCHASTIC_DOMINANCE:
            res = check_stochastic_dominance(self.F, self.G)
            if not res.dominates:
                raise PreconditionError(
                    f"buyer distribution does not dominate the seller's (worst gap {res.worst_gap:.3g})"
                )

    @classmethod
    def symmetric(cls, F: Distribution, name: str = "") -> "TradeInstance":
        return cls(F, F, Setting.SYMMETRIC, name)

    @property
    def symmetric_mechanism(self) -> bool:
        return self.setting is Setting.SYMMETRIC

    def to_dict(self) -> dict:
        out = {"setting": self.setting.value, "buyer": self.F.spec.to_dict()}
        if self.setting is not Setting.SYMMETRIC:
            out["seller"] = self.G.spec.to_dict()
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TradeInstance":
        try:
            setting = Setting(data.get("setting", "general"))
        except ValueError as exc:
            raise ParameterError(f"unknown setting {data.get('setting')!r}") from exc
        if "buyer" not in data:
            raise ParameterError("instance spec needs a 'buyer' distribution")
        F = DistributionSpec.from_dict(data["buyer"]).build()
        if setting is Setting.SYMMETRIC and "seller" not in data:
            G = F
        elif "seller" in data:
            G = DistributionSpec.from_dict(data["seller"]).build()
        else:
            raise ParameterError("non-symmetric instance spec needs a 'seller' distribution")
        return cls(F, G, setting, data.get("name", ""))


def resolve_trade(v: float, c: float, offer: PriceOffer) -> TradeOutcome:
    """Trade iff ``v >= p``, ``c <= q`` and ``p >= q``; ties clear."""
    if v < 0 or c < 0:
        raise ParameterError("valuations must be nonnegative")
    p, q = offer.buyer_price, offer.seller_price
    if v >= p and c <= q and p >= q:
        return TradeOutcome(True, v, c, p, q)
    return TradeOutcome(False, v, c, 0.0, 0.0)


def trade_mask(p, q, v, c):
    """Vectorized :func:`resolve_trade` returning the boolean trade indicator."""
    return (v >= p) & (c <= q) & (p >= q)


def offer_prices(inst: TradeInstance, u_buyer, u_seller):
    """Map two uniform streams to posted prices (buyer, seller)."""
    p = quantile(inst.F, u_buyer)
    q = quantile(inst.G, u_seller)
    if inst.symmetric_mechanism:
        return np.maximum(p, q), np.minimum(p, q)
    return p, q


def draw_offer(inst: TradeInstance, rng: np.random.Generator) -> PriceOffer:
    """Draw one single-sample offer, consuming two uniforms (buyer sample first)."""
    u_p = rng.random()
    u_q = rng.random()
    p, q = offer_prices(inst, u_p, u_q)
    return PriceOffer(float(p), float(q))


def analytic_profit_at(F: Distribution, G: Distribution, p: float, q: float) -> float:
    """Expected broker profit of the fixed offer (p, q)."""
    if p < q:
        return 0.0
    return (p - q) * (1.0 - F.cdf(p)) * G.cdf(q)


def analytic_gft_at(
    F: Distribution,
    G: Distribution,
    p: float,
    q: float,
    spec: QuadratureSpec | None = None,
) -> float:
    """Expected gains from trade of the fixed offer (p, q).

    Profit plus the buyer surplus ``G(q) * int_p^hi (1 - F)`` plus the seller
    surplus ``(1 - F(p)) * int_0^q G``.
    """
    if p < q:
        return 0.0
    buyer_surplus = 0.0
    if p < F.support.hi:
        buyer_surplus = integrate(lambda x: 1.0 - F.cdf(x), (p, F.support.hi), spec, F.breakpoints)
    seller_surplus = 0.0
    if q > G.support.lo:
        seller_surplus = integrate(G.cdf, (G.support.lo, q), spec, G.breakpoints)
    return analytic_profit_at(F, G, p, q) + G.cdf(q) * buyer_surplus + (1.0 - F.cdf(p)) * seller_surplus
