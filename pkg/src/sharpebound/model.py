"""Market models, payoffs, pricing sides, and a numeric assumption validator.

Two market flavours are supported:

* ``MarketSpec`` -- a non-traded asset S hedged with a correlated traded
  asset H, both lognormal-style diffusions with state-dependent
  coefficients ``mu, sigma`` (for S) and ``a, b`` (for H), correlation
  ``rho`` and short rate ``r``.
* ``StochVolSpec`` -- a traded asset whose volatility is a diffusion
  ``sigma_t`` with drift ``a``, vol-of-vol ``b`` and stock-vol map
  ``beta_fn``.

Coefficients are restricted to three serialisable forms (constant,
tabulated with linear interpolation and clamped extrapolation, and
affine-in-log), which keeps model files exact and reproducible.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, UnsupportedModelError

DEFAULT_BOUND_THRESHOLD = 1e6


# ---------------------------------------------------------------------------
# Coefficient functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CoefficientFn:
    """A scalar coefficient evaluated as ``f(state, t)``.

    Kinds:
      * ``constant``   -- same value everywhere,
      * ``tabulated``  -- linear interpolation on a sorted grid, clamped to
        the nearest endpoint outside the hull,
      * ``affine_log`` -- ``c0 + c1 * ln(state)``.

    None of the forms is time-dependent; ``t`` is accepted for interface
    uniformity and ignored.
    """

    kind: str
    value: float | None = None
    grid: np.ndarray | None = None
    values: np.ndarray | None = None
    c0: float | None = None
    c1: float | None = None

    @classmethod
    def constant(cls, value: float) -> "CoefficientFn":
        return cls(kind="constant", value=float(value))

    @classmethod
    def tabulated(cls, grid, values) -> "CoefficientFn":
        g = np.asarray(grid, dtype=float)
        v = np.asarray(values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or g.size < 2:
            raise ConfigurationError("tabulated coefficient needs matching 1-D grid/values with >= 2 nodes")
        if np.any(np.diff(g) <= 0):
            raise ConfigurationError("tabulated grid must be strictly increasing")
        g.setflags(write=False)
        v.setflags(write=False)
        return cls(kind="tabulated", grid=g, values=v)

    @classmethod
    def affine_log(cls, c0: float, c1: float) -> "CoefficientFn":
        return cls(kind="affine_log", c0=float(c0), c1=float(c1))

    @property
    def is_constant(self) -> bool:
        if self.kind == "constant":
            return True
        if self.kind == "affine_log":
            return self.c1 == 0.0
        if self.kind == "tabulated":
            return bool(np.all(self.values == self.values[0]))
        return False

    def constant_value(self) -> float:
        if not self.is_constant:
            raise ConfigurationError("coefficient is not constant")
        if self.kind == "constant":
            return self.value
        if self.kind == "affine_log":
            return self.c0
        return float(self.values[0])

    def __call__(self, state, t: float = 0.0):
        state = np.asarray(state, dtype=float)
        if self.kind == "constant":
            out = np.full(state.shape, self.value)
        elif self.kind == "tabulated":
            out = np.interp(state, self.grid, self.values)
        elif self.kind == "affine_log":
            if np.any(state <= 0.0):
                raise DomainError("affine-in-log coefficient needs state > 0")
            out = self.c0 + self.c1 * np.log(state)
        else:
            raise ConfigurationError(f"unknown coefficient kind {self.kind!r}")
        return out if out.ndim else float(out)

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "tabulated":
            return {"kind": "tabulated", "grid": list(self.grid), "values": list(self.values)}
        return {"kind": "affine_log", "c0": self.c0, "c1": self.c1}

    @classmethod
    def from_dict(cls, d: dict) -> "CoefficientFn":
        try:
            kind = d["kind"]
        except (TypeError, KeyError):
            raise ConfigurationError("coefficient block needs a 'kind' field") from None
        if kind == "constant":
            return cls.constant(d["value"])
        if kind == "tabulated":
            return cls.tabulated(d["grid"], d["values"])
        if kind == "affine_log":
            return cls.affine_log(d["c0"], d["c1"])
        raise ConfigurationError(f"unknown coefficient kind {kind!r}")


def _eval_positive(fn: CoefficientFn, state, t: float, name: str):
    """Evaluate a volatility-type coefficient, insisting on positivity."""
    out = fn(state, t)
    if np.any(np.asarray(out) <= 0.0):
        raise DomainError(f"{name} must be strictly positive at every queried point")
    return out


# ---------------------------------------------------------------------------
# Market specifications
# ---------------------------------------------------------------------------


def _check_rho_r(rho: float, r: float) -> None:
    if not -1.0 <= rho <= 1.0:
        raise ConfigurationError(f"correlation rho={rho} outside [-1, 1]")
    if r < 0.0:
        raise ConfigurationError(f"risk-free rate r={r} must be >= 0")


def _check_positive_kind(fn: CoefficientFn, name: str) -> None:
    if fn.kind == "constant" and fn.value <= 0.0:
        raise ConfigurationError(f"{name} must be strictly positive")
    if fn.kind == "tabulated" and np.any(fn.values <= 0.0):
        raise ConfigurationError(f"{name} must be strictly positive on its grid")


@dataclass(frozen=True, eq=False)
class MarketSpec:
    """Two-asset basis-risk model: non-traded S, traded H, correlation rho."""

    mu: CoefficientFn
    sigma: CoefficientFn
    a: CoefficientFn
    b: CoefficientFn
    rho: float
    r: float

    def __post_init__(self):
        _check_rho_r(self.rho, self.r)
        _check_positive_kind(self.sigma, "sigma")
        _check_positive_kind(self.b, "b")

    @classmethod
    def from_constants(cls, mu, sigma, a, b, rho, r) -> "MarketSpec":
        return cls(mu=CoefficientFn.constant(mu), sigma=CoefficientFn.constant(sigma),
                   a=CoefficientFn.constant(a), b=CoefficientFn.constant(b),
                   rho=float(rho), r=float(r))

    @property
    def is_constant(self) -> bool:
        return all(f.is_constant for f in (self.mu, self.sigma, self.a, self.b))

    @property
    def is_h_independent(self) -> bool:
        """True when a and b do not depend on H, so the price is H-free."""
        return self.a.is_constant and self.b.is_constant

    def mu_at(self, s, t: float = 0.0):
        return self.mu(s, t)

    def sigma_at(self, s, t: float = 0.0):
        return _eval_positive(self.sigma, s, t, "sigma")

    def a_at(self, h, t: float = 0.0):
        return self.a(h, t)

    def b_at(self, h, t: float = 0.0):
        return _eval_positive(self.b, h, t, "b")

    def to_dict(self) -> dict:
        return {"type": "market",
                "mu": self.mu.to_dict(), "sigma": self.sigma.to_dict(),
                "a": self.a.to_dict(), "b": self.b.to_dict(),
                "rho": self.rho, "r": self.r}

    @classmethod
    def from_dict(cls, d: dict) -> "MarketSpec":
        for key in ("mu", "sigma", "a", "b", "rho", "r"):
            if key not in d:
                raise ConfigurationError(f"market spec missing field {key!r}")
        return cls(mu=CoefficientFn.from_dict(d["mu"]),
                   sigma=CoefficientFn.from_dict(d["sigma"]),
                   a=CoefficientFn.from_dict(d["a"]),
                   b=CoefficientFn.from_dict(d["b"]),
                   rho=float(d["rho"]), r=float(d["r"]))


@dataclass(frozen=True, eq=False)
class StochVolSpec:
    """Traded asset with stochastic volatility factor sigma_t.

    ``beta_fn`` maps the volatility factor to the stock volatility and must
    be strictly positive and non-decreasing; ``a`` and ``b`` are the drift
    and volatility of the factor itself (arithmetic dynamics).
    """

    mu: float
    beta_fn: CoefficientFn
    a: CoefficientFn
    b: CoefficientFn
    rho: float
    r: float

    def __post_init__(self):
        _check_rho_r(self.rho, self.r)
        _check_positive_kind(self.beta_fn, "beta_fn")
        _check_positive_kind(self.b, "b")
        if self.beta_fn.kind == "affine_log" and self.beta_fn.c1 < 0.0:
            raise ConfigurationError("beta_fn must be non-decreasing (c1 >= 0)")
        if self.beta_fn.kind == "tabulated" and np.any(np.diff(self.beta_fn.values) < -1e-12):
            raise ConfigurationError("beta_fn must be non-decreasing on its grid")

    @property
    def is_constant(self) -> bool:
        return all(f.is_constant for f in (self.beta_fn, self.a, self.b))

    def beta_at(self, sigma, t: float = 0.0):
        return _eval_positive(self.beta_fn, sigma, t, "beta_fn")

    def a_at(self, sigma, t: float = 0.0):
        return self.a(sigma, t)

    def b_at(self, sigma, t: float = 0.0):
        return _eval_positive(self.b, sigma, t, "b")

    def to_dict(self) -> dict:
        return {"type": "stochvol", "mu": self.mu,
                "beta": self.beta_fn.to_dict(), "a": self.a.to_dict(),
                "b": self.b.to_dict(), "rho": self.rho, "r": self.r}

    @classmethod
    def from_dict(cls, d: dict) -> "StochVolSpec":
        for key in ("mu", "beta", "a", "b", "rho", "r"):
            if key not in d:
                raise ConfigurationError(f"stochvol spec missing field {key!r}")
        return cls(mu=float(d["mu"]), beta_fn=CoefficientFn.from_dict(d["beta"]),
                   a=CoefficientFn.from_dict(d["a"]), b=CoefficientFn.from_dict(d["b"]),
                   rho=float(d["rho"]), r=float(d["r"]))


def spec_from_dict(d: dict):
    """Dispatch a model dictionary to MarketSpec or StochVolSpec."""
    kind = d.get("type")
    if kind == "market":
        return MarketSpec.from_dict(d)
    if kind == "stochvol":
        return StochVolSpec.from_dict(d)
    raise ConfigurationError("model 'type' must be 'market' or 'stochvol'")


def mu_tilde(spec: MarketSpec, s, h, t: float = 0.0):
    """Projected drift of S: mu - (a - r) * rho * sigma / b.

    This is the S-drift that remains after the hedgeable component has been
    projected onto the traded asset.
    """
    sig = spec.sigma_at(s, t)
    bb = spec.b_at(h, t)
    return spec.mu_at(s, t) - (spec.a_at(h, t) - spec.r) * spec.rho * sig / bb


def gamma_drift(spec: StochVolSpec, sigma, t: float = 0.0, alpha_signed: float = 0.0):
    """Volatility-factor drift under the pricing measure.

    gamma(sigma, t) = a - (mu - r) * rho * b / beta + alpha_signed * sqrt(1 - rho^2) * b
    """
    bb = spec.b_at(sigma, t)
    beta = spec.beta_at(sigma, t)
    root = math.sqrt(max(0.0, 1.0 - spec.rho * spec.rho))
    return spec.a_at(sigma, t) - (spec.mu - spec.r) * spec.rho * bb / beta + alpha_signed * root * bb


# ---------------------------------------------------------------------------
# Sides, Sharpe parameters and payoffs
# ---------------------------------------------------------------------------


class Side(enum.Enum):
    """Which side of the trade the price is quoted for.

    The seller loads the drift with +alpha times the local standard
    deviation; the buyer with -beta.
    """

    SELLER = "seller"
    BUYER = "buyer"

    @property
    def loading_sign(self) -> float:
        return 1.0 if self is Side.SELLER else -1.0

    @classmethod
    def parse(cls, name: str) -> "Side":
        try:
            return cls(name.lower())
        except ValueError:
            raise ConfigurationError(f"side must be 'seller' or 'buyer', got {name!r}") from None


@dataclass(frozen=True)
class SharpeParams:
    """Instantaneous Sharpe ratios demanded by each side."""

    alpha: float = 0.0
    beta_buyer: float = 0.0

    def __post_init__(self):
        if self.alpha < 0.0 or self.beta_buyer < 0.0:
            raise ConfigurationError("Sharpe ratios must be >= 0")

    def signed_loading(self, side: Side) -> float:
        """The signed coefficient multiplying the |P_S| (or |P_sigma|) term."""
        mag = self.alpha if side is Side.SELLER else self.beta_buyer
        return side.loading_sign * mag

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta_buyer}

    @classmethod
    def from_dict(cls, d: dict) -> "SharpeParams":
        return cls(alpha=float(d.get("alpha", 0.0)), beta_buyer=float(d.get("beta", 0.0)))


@dataclass(frozen=True, eq=False)
class Payoff:
    """Terminal claim g(S_T), scaled by a non-negative unit count."""

    kind: str
    strike: float | None = None
    log_grid: np.ndarray | None = None
    values: np.ndarray | None = None
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("put", "call", "custom"):
            raise ConfigurationError(f"payoff kind must be put/call/custom, got {self.kind!r}")
        if self.scale < 0.0:
            raise ConfigurationError("payoff scale must be >= 0")
        if self.kind in ("put", "call"):
            if self.strike is None or self.strike <= 0.0:
                raise ConfigurationError("put/call payoff needs strike K > 0")
        else:
            if self.log_grid is None or self.values is None:
                raise ConfigurationError("custom payoff needs log_grid and values")

    @classmethod
    def put(cls, strike: float, scale: float = 1.0) -> "Payoff":
        return cls(kind="put", strike=float(strike), scale=float(scale))

    @classmethod
    def call(cls, strike: float, scale: float = 1.0) -> "Payoff":
        return cls(kind="call", strike=float(strike), scale=float(scale))

    @classmethod
    def custom(cls, log_grid, values, scale: float = 1.0) -> "Payoff":
        g = np.asarray(log_grid, dtype=float)
        v = np.asarray(values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or g.size < 2:
            raise ConfigurationError("custom payoff needs matching 1-D log_grid/values with >= 2 nodes")
        if np.any(np.diff(g) <= 0):
            raise ConfigurationError("custom payoff log_grid must be strictly increasing")
        g.setflags(write=False)
        v.setflags(write=False)
        return cls(kind="custom", log_grid=g, values=v, scale=float(scale))

    @property
    def is_monotone(self) -> bool:
        if self.kind == "call" or self.kind == "put":
            return True
        d = np.diff(self.values)
        return bool(np.all(d >= 0.0) or np.all(d <= 0.0))

    def monotone_direction(self) -> int:
        """+1 for non-decreasing payoffs, -1 for non-increasing ones."""
        if self.kind == "call":
            return 1
        if self.kind == "put":
            return -1
        d = np.diff(self.values)
        if np.all(d >= 0.0):
            return 1
        if np.all(d <= 0.0):
            return -1
        raise UnsupportedModelError("custom payoff is not monotone")

    def to_dict(self) -> dict:
        if self.kind == "custom":
            return {"kind": "custom", "log_grid": list(self.log_grid),
                    "values": list(self.values), "scale": self.scale}
        return {"kind": self.kind, "strike": self.strike, "scale": self.scale}

    @classmethod
    def from_dict(cls, d: dict) -> "Payoff":
        kind = d.get("kind")
        scale = float(d.get("scale", 1.0))
        if kind in ("put", "call"):
            return cls(kind=kind, strike=float(d["strike"]), scale=scale)
        if kind == "custom":
            return cls.custom(d["log_grid"], d["values"], scale=scale)
        raise ConfigurationError(f"unknown payoff kind {kind!r}")


def payoff_eval(payoff: Payoff, s):
    """Evaluate scale * g(S); S must be positive.

    Put/call are exact; custom payoffs interpolate linearly in ln S and
    extrapolate by continuing the boundary slope.
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0.0):
        raise DomainError("payoff evaluation needs S > 0")
    if payoff.kind == "put":
        g = np.maximum(payoff.strike - s_arr, 0.0)
    elif payoff.kind == "call":
        g = np.maximum(s_arr - payoff.strike, 0.0)
    else:
        x = np.log(s_arr)
        xg, vg = payoff.log_grid, payoff.values
        g = np.interp(x, xg, vg)
        lo_slope = (vg[1] - vg[0]) / (xg[1] - xg[0])
        hi_slope = (vg[-1] - vg[-2]) / (xg[-1] - xg[-2])
        g = np.where(x < xg[0], vg[0] + lo_slope * (x - xg[0]), g)
        g = np.where(x > xg[-1], vg[-1] + hi_slope * (x - xg[-1]), g)
    out = payoff.scale * g
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Assumption validator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AssumptionCheck:
    """One validator entry; passes iff the estimate is finite and < threshold."""

    name: str
    estimate: float
    threshold: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "estimate": self.estimate,
                "threshold": self.threshold, "passed": self.passed,
                "detail": self.detail}


@dataclass(frozen=True)
class AssumptionReport:
    """Desk-scale numeric spot-check of the regularity assumptions.

    These are sampled estimates, not proofs; a pass means "nothing obviously
    pathological on the supplied grid".
    """

    spec_kind: str
    entries: tuple = field(default_factory=tuple)

    @property
    def all_passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def entry(self, name: str) -> AssumptionCheck:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"spec_kind": self.spec_kind, "all_passed": self.all_passed,
                "entries": [e.to_dict() for e in self.entries]}


def _check(name, estimate, threshold, detail=""):
    estimate = float(estimate)
    passed = math.isfinite(estimate) and estimate < threshold
    return AssumptionCheck(name, estimate, threshold, passed, detail)


def _max_quotient(eval_fn, lo, hi, n):
    xs = np.linspace(lo, hi, n)
    vals = np.asarray(eval_fn(xs), dtype=float)
    if vals.ndim == 0 or vals.size == 1:
        return 0.0
    return float(np.max(np.abs(np.diff(vals))) / (xs[1] - xs[0]))

def _lipschitz_estimate(eval_fn, lo, hi, n):
    """Max finite-difference quotient, with a two-scale divergence probe.

    A jump discontinuity makes the quotient grow ~4x under 4x refinement;
    such non-convergent estimates are reported as +inf.
    """
    q1 = _max_quotient(eval_fn, lo, hi, n)
    q2 = _max_quotient(eval_fn, lo, hi, 4 * n)
    if q2 > 3.0 * q1 + 1e-12:
        return math.inf
    return q2


def _growth_exponent(payoff: Payoff):
    """Fitted polynomial-in-ln(S) growth exponent of the payoff."""

    def exponent(xmag):
        xs = np.array([-xmag, xmag])
        g = np.abs(payoff_eval(payoff, np.exp(xs))) if payoff.scale > 0 else np.zeros(2)
        return float(np.max(np.log1p(g) / np.log1p(xmag)))

    p_mid, p_far = exponent(8.0), exponent(16.0)
    if p_far > 1.25 * p_mid + 0.5:
        return math.inf, p_mid
    return p_far, p_mid


def _min_ellipticity_eig(sig, bb, rho):
    """Min eigenvalue of [[s^2, rho*s*b], [rho*s*b, b^2]] over the grid."""
    s2 = np.asarray(sig, dtype=float).reshape(-1, 1) ** 2
    b2 = np.asarray(bb, dtype=float).reshape(1, -1) ** 2
    tr = s2 + b2
    det = s2 * b2 * (1.0 - rho * rho)
    disc = np.sqrt(np.maximum((tr / 2.0) ** 2 - det, 0.0))
    return float(np.min(tr / 2.0 - disc))


def _axes_from_grid(sample_grid):
    for name in ("x_min", "x_max", "n_x"):
        if not hasattr(sample_grid, name):
            raise ConfigurationError("sample grid must expose x_min/x_max/n_x")
    if sample_grid.n_x < 2:
        raise ConfigurationError("sample grid needs at least 2 nodes per axis")
    xs = np.linspace(sample_grid.x_min, sample_grid.x_max, sample_grid.n_x)
    ys = None
    if getattr(sample_grid, "n_y", None):
        if sample_grid.n_y < 2:
            raise ConfigurationError("sample grid needs at least 2 nodes per axis")
        ys = np.linspace(sample_grid.y_min, sample_grid.y_max, sample_grid.n_y)
    return xs, ys


def validate_assumptions(spec, sample_grid, payoff: Payoff | None = None,
                         bound_threshold: float = DEFAULT_BOUND_THRESHOLD,
                         alpha_signed: float = 0.0) -> AssumptionReport:
    """Numerically spot-check the regularity assumptions on a sample grid.

    For the basis-risk model the grid x-axis is log-S and the y-axis log-H
    (x reused for both when no y-axis is given).  For the stochastic
    volatility model the x-axis is log-S and the y-axis is the volatility
    factor itself, and a y-axis is required.
    """
    xs, ys = _axes_from_grid(sample_grid)
    entries = []

    if isinstance(spec, MarketSpec):
        ys_eff = xs if ys is None else ys
        s_nodes, h_nodes = np.exp(xs), np.exp(ys_eff)
        sig = np.asarray(spec.sigma(s_nodes), dtype=float)
        bb = np.asarray(spec.b(h_nodes), dtype=float)
        entries.append(_check("sigma_positive", -np.min(sig), 0.0, "-min sigma on grid"))
        entries.append(_check("b_positive", -np.min(bb), 0.0, "-min b on grid"))
        for name, fn, nodes in (("mu", spec.mu, s_nodes), ("sigma", spec.sigma, s_nodes),
                                ("a", spec.a, h_nodes), ("b", spec.b, h_nodes)):
            entries.append(_check(f"{name}_bounded", np.max(np.abs(np.asarray(fn(nodes), dtype=float))),
                                  bound_threshold, "max |value| on grid"))
        entries.append(_check("sigma_lipschitz_log",
                              _lipschitz_estimate(lambda x: spec.sigma(np.exp(x)), xs[0], xs[-1], len(xs)),
                              bound_threshold, "max |d sigma / d lnS| quotient"))
        entries.append(_check("b_lipschitz_log",
                              _lipschitz_estimate(lambda y: spec.b(np.exp(y)), ys_eff[0], ys_eff[-1], len(ys_eff)),
                              bound_threshold, "max |d b / d lnH| quotient"))
        h_mid = float(np.exp(0.5 * (ys_eff[0] + ys_eff[-1])))
        entries.append(_check("mu_tilde_lipschitz_log",
                              _lipschitz_estimate(lambda x: mu_tilde(spec, np.exp(x), h_mid), xs[0], xs[-1], len(xs)),
                              bound_threshold, "max |d mu_tilde / d lnS| quotient at mid H"))
        mt = np.abs(np.asarray(mu_tilde(spec, s_nodes[:, None], h_nodes[None, :]), dtype=float))
        weight = 1.0 + np.abs(xs)[:, None] + np.abs(ys_eff)[None, :]
        entries.append(_check("mu_tilde_growth", np.max(mt / weight), bound_threshold,
                              "max |mu_tilde| / (1 + |lnS| + |lnH|)"))
        entries.append(_check("ellipticity", -_min_ellipticity_eig(sig, bb, spec.rho), 0.0,
                              "-min eigenvalue of the diffusion quadratic form"))
        kind = "market"
    elif isinstance(spec, StochVolSpec):
        if ys is None:
            raise ConfigurationError("stochvol validation needs a 2-axis grid (lnS, sigma)")
        beta = np.asarray(spec.beta_fn(ys), dtype=float)
        bb = np.asarray(spec.b(ys), dtype=float)
        entries.append(_check("beta_positive", -np.min(beta), 0.0, "-min beta on grid"))
        entries.append(_check("b_positive", -np.min(bb), 0.0, "-min b on grid"))
        slopes = np.diff(beta) / np.diff(ys)
        entries.append(_check("beta_nondecreasing", max(0.0, -float(np.min(slopes))), 1e-10,
                              "largest negative slope of beta"))
        for name, fn in (("beta", spec.beta_fn), ("a", spec.a), ("b", spec.b)):
            entries.append(_check(f"{name}_bounded", np.max(np.abs(np.asarray(fn(ys), dtype=float))),
                                  bound_threshold, "max |value| on grid"))
        for name, fn in (("beta", spec.beta_fn), ("a", spec.a), ("b", spec.b)):
            entries.append(_check(f"{name}_lipschitz",
                                  _lipschitz_estimate(fn, ys[0], ys[-1], len(ys)),
                                  bound_threshold, f"max |d {name} / d sigma| quotient"))
        entries.append(_check("gamma_lipschitz",
                              _lipschitz_estimate(lambda sg: gamma_drift(spec, sg, 0.0, alpha_signed),
                                                  ys[0], ys[-1], len(ys)),
                              bound_threshold, "max |d gamma / d sigma| quotient"))
        entries.append(_check("ellipticity_maxvol", -float(np.min(np.maximum(beta, bb))), 0.0,
                              "-min over grid of max(beta, b)"))
        kind = "stochvol"
    else:
        raise ConfigurationError("spec must be a MarketSpec or StochVolSpec")

    if payoff is not None:
        est, fitted = _growth_exponent(payoff)
        entries.append(_check("payoff_growth", est, 64.0,
                              f"fitted ln-S growth exponent (mid-range fit {fitted:.3f})"))

    return AssumptionReport(spec_kind=kind, entries=tuple(entries))
