"""Closed-form prices for the constant-coefficient (two-GBM) case.

The incomplete-market put/call prices reduce to the Black-Scholes formula
written on a dividend-paying asset, with the effective yield

    delta = r - mu_tilde + s * m * sqrt(1 - rho^2) * sigma,

where ``s`` is +1 for puts and -1 for calls, and ``m`` is +alpha for the
seller and -beta for the buyer.  The four side/kind combinations therefore
share one pair of formulas and differ only through delta, which also makes
the seller-call/buyer-put (and seller-put/buyer-call) parity identities
exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConfigurationError, UnsupportedModelError
from .model import MarketSpec, Payoff, SharpeParams, Side, mu_tilde

_TINY_VOL_TIME = 1e-12


def std_normal_cdf(x):
    """Standard normal CDF via the erf-based scipy kernel (abs err << 1e-12)."""
    out = special.ndtr(x)
    return float(out) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class YieldAdjustedInputs:
    """Inputs of the dividend-yield Black-Scholes formulas."""

    S: float
    K: float
    tau: float
    r: float
    delta: float
    sigma: float

    def __post_init__(self):
        if self.S <= 0.0 or self.K <= 0.0:
            raise ConfigurationError("S and K must be positive")
        if self.tau < 0.0:
            raise ConfigurationError("tau must be >= 0")
        if self.sigma <= 0.0:
            raise ConfigurationError("sigma must be positive")

    def d1_d2(self):
        sq = self.sigma * math.sqrt(self.tau)
        d1 = (math.log(self.S / self.K) + (self.r - self.delta + 0.5 * self.sigma ** 2) * self.tau) / sq
        return d1, d1 - sq


def bs_put_yield(inputs: YieldAdjustedInputs) -> float:
    """Put price K e^{-r tau} Phi(-d2) - S e^{-delta tau} Phi(-d1).

    For sigma*sqrt(tau) below 1e-12 the value degenerates to the discounted
    intrinsic value of the forward, which is exact at tau = 0.
    """
    s, k, tau, r, delta = inputs.S, inputs.K, inputs.tau, inputs.r, inputs.delta
    if inputs.sigma * math.sqrt(tau) < _TINY_VOL_TIME:
        return max(k * math.exp(-r * tau) - s * math.exp(-delta * tau), 0.0)
    d1, d2 = inputs.d1_d2()
    return k * math.exp(-r * tau) * std_normal_cdf(-d2) - s * math.exp(-delta * tau) * std_normal_cdf(-d1)


def bs_call_yield(inputs: YieldAdjustedInputs) -> float:
    """Call price S e^{-delta tau} Phi(d1) - K e^{-r tau} Phi(d2)."""
    s, k, tau, r, delta = inputs.S, inputs.K, inputs.tau, inputs.r, inputs.delta
    if inputs.sigma * math.sqrt(tau) < _TINY_VOL_TIME:
        return max(s * math.exp(-delta * tau) - k * math.exp(-r * tau), 0.0)
    d1, d2 = inputs.d1_d2()
    return s * math.exp(-delta * tau) * std_normal_cdf(d1) - k * math.exp(-r * tau) * std_normal_cdf(d2)


def _require_constant(spec: MarketSpec) -> None:
    if not isinstance(spec, MarketSpec) or not spec.is_constant:
        raise UnsupportedModelError(
            "closed forms need a constant-coefficient MarketSpec; use the PDE or MC modules")


def effective_yield(spec: MarketSpec, sharpe: SharpeParams, side: Side, payoff_kind: str) -> float:
    """Effective dividend yield delta for the given side and option kind."""
    _require_constant(spec)
    if payoff_kind not in ("put", "call"):
        raise UnsupportedModelError("effective yield is defined for put/call only")
    sigma = spec.sigma.constant_value()
    mt = mu_tilde(spec, 1.0, 1.0)
    s_kind = 1.0 if payoff_kind == "put" else -1.0
    loading = sharpe.signed_loading(side)
    return spec.r - mt + s_kind * loading * math.sqrt(max(0.0, 1.0 - spec.rho ** 2)) * sigma


def price_closed_form(spec: MarketSpec, payoff: Payoff, sharpe: SharpeParams,
                      side: Side, s: float, tau: float) -> float:
    """Closed-form seller/buyer price of a put or call, including scale."""
    _require_constant(spec)
    if payoff.kind not in ("put", "call"):
        raise UnsupportedModelError("closed form supports put/call payoffs only; use PDE/MC")
    delta = effective_yield(spec, sharpe, side, payoff.kind)
    inputs = YieldAdjustedInputs(S=float(s), K=payoff.strike, tau=float(tau), r=spec.r,
                                 delta=delta, sigma=spec.sigma.constant_value())
    base = bs_put_yield(inputs) if payoff.kind == "put" else bs_call_yield(inputs)
    return payoff.scale * base
