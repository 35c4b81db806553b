"""Finite-difference solvers for the nonlinear seller/buyer pricing PDEs.

All solvers work in x = ln S (and y = ln H for the two-asset problem; the
volatility factor keeps its own linear axis).  The absolute-value term is
handled in HJB form: per time step the sign pattern of the relevant first
derivative is frozen, the resulting linear system is solved implicitly, and
the pattern is recomputed until it is a fixed point (policy iteration).
First-order terms are upwinded by drift sign, which keeps every system an
M-matrix and the backward steps monotone.

Boundaries: zero-second-derivative (linear extrapolation in the log
coordinate) on log-price axes; on the volatility axis the diffusion term is
dropped and the convection term uses the inward one-sided difference when
that direction is upwind.

2-D problems use Douglas splitting with the mixed derivative treated
explicitly, which reduces exactly to the 1-D scheme slice-by-slice when the
coefficients do not depend on the second asset.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import solve_tridiag_batch
from .errors import ConfigurationError, DomainError, EllipticityError, SolverError
from .model import (MarketSpec, Payoff, SharpeParams, Side, StochVolSpec,
                    gamma_drift, mu_tilde, payoff_eval)

DEFAULT_MAX_POLICY_ITER = 50
DEFAULT_POLICY_TOL = 1e-10
_SIGN_DEADBAND = 1e-11


# ---------------------------------------------------------------------------
# Grids and surfaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Uniform space-time grid; x is log-price, y is log-H or sigma."""

    x_min: float
    x_max: float
    n_x: int
    n_t: int
    T: float
    y_min: float | None = None
    y_max: float | None = None
    n_y: int | None = None

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ConfigurationError("grid needs x_min < x_max")
        if self.n_x < 3:
            raise ConfigurationError("grid needs n_x >= 3")
        if self.n_t < 1:
            raise ConfigurationError("grid needs n_t >= 1")
        if self.T <= 0.0:
            raise ConfigurationError("grid needs T > 0")
        y_fields = (self.y_min, self.y_max, self.n_y)
        if any(v is not None for v in y_fields):
            if any(v is None for v in y_fields):
                raise ConfigurationError("second axis needs y_min, y_max and n_y together")
            if not self.y_min < self.y_max:
                raise ConfigurationError("grid needs y_min < y_max")
            if self.n_y < 3:
                raise ConfigurationError("grid needs n_y >= 3")

    @property
    def is_2d(self) -> bool:
        return self.n_y is not None

    @property
    def x_nodes(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_x)

    @property
    def y_nodes(self) -> np.ndarray | None:
        if not self.is_2d:
            return None
        return np.linspace(self.y_min, self.y_max, self.n_y)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n_t + 1)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_x - 1)

    @property
    def dy(self) -> float | None:
        if not self.is_2d:
            return None
        return (self.y_max - self.y_min) / (self.n_y - 1)

    @property
    def dt(self) -> float:
        return self.T / self.n_t

    @classmethod
    def around_spot(cls, s0: float, sigma_ref: float, T: float, n_x: int, n_t: int,
                    width_stds: float = 5.0, **y_kwargs) -> "GridSpec":
        """Log grid centred on ln(s0), +- width_stds * sigma * sqrt(T)."""
        if s0 <= 0.0:
            raise ConfigurationError("spot must be positive")
        half = max(width_stds * sigma_ref * math.sqrt(T), 1e-3)
        x0 = math.log(s0)
        return cls(x_min=x0 - half, x_max=x0 + half, n_x=n_x, n_t=n_t, T=T, **y_kwargs)

    def to_dict(self) -> dict:
        d = {"x_min": self.x_min, "x_max": self.x_max, "n_x": self.n_x,
             "n_t": self.n_t, "T": self.T}
        if self.is_2d:
            d.update({"y_min": self.y_min, "y_max": self.y_max, "n_y": self.n_y})
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(x_min=float(d["x_min"]), x_max=float(d["x_max"]), n_x=int(d["n_x"]),
                   n_t=int(d["n_t"]), T=float(d["T"]),
                   y_min=(float(d["y_min"]) if "y_min" in d else None),
                   y_max=(float(d["y_max"]) if "y_max" in d else None),
                   n_y=(int(d["n_y"]) if "n_y" in d else None))


_SECOND_AXIS = {"pde_2_26": None, "pde_2_14": "log_h", "pde_3_8": "sigma", "pde_3_9": "sigma"}


@dataclass(eq=False)
class PriceSurface:
    """Grid-sampled price function; values indexed (time, x[, y])."""

    grid: GridSpec
    values: np.ndarray
    side: Side
    equation_tag: str
    sharpe_used: float

    def __post_init__(self):
        if self.equation_tag not in _SECOND_AXIS:
            raise ConfigurationError(f"unknown equation tag {self.equation_tag!r}")

    @property
    def second_axis_kind(self) -> str | None:
        return _SECOND_AXIS[self.equation_tag]

    @property
    def x_nodes(self) -> np.ndarray:
        return self.grid.x_nodes

    @property
    def s_nodes(self) -> np.ndarray:
        return np.exp(self.grid.x_nodes)

    @property
    def y_nodes(self) -> np.ndarray | None:
        return self.grid.y_nodes

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def _space_interp(self, slice_vals, s, y):
        x = np.log(np.asarray(s, dtype=float))
        if self.grid.is_2d:
            if y is None:
                raise DomainError("this surface needs a second-axis coordinate")
            yq = np.asarray(y, dtype=float)
            if self.second_axis_kind == "log_h":
                yq = np.log(yq)
            return _bilinear(self.x_nodes, self.y_nodes, slice_vals, x, yq)
        return np.interp(x, self.x_nodes, slice_vals)

    def value_at(self, s, y=None, t: float = 0.0, clamp: bool = False):
        """Interpolated price at (S[, H or sigma], t); linear in each axis."""
        g = self.grid
        x = np.log(np.asarray(s, dtype=float))
        if not clamp:
            if np.any(x < g.x_min - 1e-12) or np.any(x > g.x_max + 1e-12):
                raise DomainError("query point outside the surface hull (S axis)")
            if g.is_2d:
                yq = np.asarray(y, dtype=float)
                yq = np.log(yq) if self.second_axis_kind == "log_h" else yq
                if np.any(yq < g.y_min - 1e-12) or np.any(yq > g.y_max + 1e-12):
                    raise DomainError("query point outside the surface hull (second axis)")
            if not -1e-12 <= t <= g.T + 1e-12:
                raise DomainError("query time outside [0, T]")
        tq = min(max(t, 0.0), g.T)
        pos = tq / g.dt
        k = min(int(pos), g.n_t - 1)
        w = pos - k
        lo = self._space_interp(self.values[k], s, y)
        hi = self._space_interp(self.values[k + 1], s, y)
        out = (1.0 - w) * lo + w * hi
        return float(out) if np.ndim(out) == 0 else out

    def to_csv(self, path) -> None:
        """Dump the surface as t,S[,H|sigma],value rows (deterministic text)."""
        kind = self.second_axis_kind
        header = "t,S,value" if kind is None else ("t,S,H,value" if kind == "log_h" else "t,S,sigma,value")
        times, s_nodes = self.times, self.s_nodes
        with open(path, "w") as fh:
            fh.write(header + "\n")
            if kind is None:
                for k, t in enumerate(times):
                    for i, s in enumerate(s_nodes):
                        fh.write(f"{float(t)!r},{float(s)!r},{float(self.values[k, i])!r}\n")
            else:
                yn = self.y_nodes
                y_vals = np.exp(yn) if kind == "log_h" else yn
                for k, t in enumerate(times):
                    for i, s in enumerate(s_nodes):
                        for j, yv in enumerate(y_vals):
                            fh.write(f"{float(t)!r},{float(s)!r},{float(yv)!r},"
                                     f"{float(self.values[k, i, j])!r}\n")

    def save_cache(self, path) -> None:
        """Binary cache: npz with the value array and a JSON grid header."""
        meta = {"grid": self.grid.to_dict(), "side": self.side.value,
                "equation_tag": self.equation_tag, "sharpe_used": self.sharpe_used}
        np.savez_compressed(path, values=self.values, meta=json.dumps(meta, sort_keys=True))

    @classmethod
    def load_cache(cls, path) -> "PriceSurface":
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            values = np.array(data["values"])
        return cls(grid=GridSpec.from_dict(meta["grid"]), values=values,
                   side=Side.parse(meta["side"]), equation_tag=meta["equation_tag"],
                   sharpe_used=float(meta["sharpe_used"]))


def _bilinear(xn, yn, vals, xq, yq):
    xq = np.clip(xq, xn[0], xn[-1])
    yq = np.clip(yq, yn[0], yn[-1])
    ix = np.clip(np.searchsorted(xn, xq) - 1, 0, len(xn) - 2)
    iy = np.clip(np.searchsorted(yn, yq) - 1, 0, len(yn) - 2)
    wx = (xq - xn[ix]) / (xn[ix + 1] - xn[ix])
    wy = (yq - yn[iy]) / (yn[iy + 1] - yn[iy])
    v00 = vals[ix, iy]
    v10 = vals[ix + 1, iy]
    v01 = vals[ix, iy + 1]
    v11 = vals[ix + 1, iy + 1]
    return ((1 - wx) * (1 - wy) * v00 + wx * (1 - wy) * v10
            + (1 - wx) * wy * v01 + wx * wy * v11)


@dataclass
class SolverReport:
    """Per-solve diagnostics from the policy iteration."""

    policy_iteration_counts: list = field(default_factory=list)
    max_residual: float = 0.0
    boundary_scheme: str = ""

    def to_dict(self) -> dict:
        return {"policy_iteration_counts": list(self.policy_iteration_counts),
                "max_residual": self.max_residual,
                "boundary_scheme": self.boundary_scheme}


# ---------------------------------------------------------------------------
# Low-level pieces
# ---------------------------------------------------------------------------


def _upwind_coeffs(drift, diff, dh, r_term):
    """(lower, center, upper) of diff*D2 + drift*D1(upwinded) - r_term."""
    up = np.maximum(drift, 0.0)
    dn = np.minimum(drift, 0.0)
    lower = diff / dh ** 2 - dn / dh
    center = -2.0 * diff / dh ** 2 - (up - dn) / dh - r_term
    upper = diff / dh ** 2 + up / dh
    return lower, center, upper


def _sign_with_deadband(deriv, prev, scale):
    thr = _SIGN_DEADBAND * scale
    return np.where(deriv > thr, 1.0, np.where(deriv < -thr, -1.0, prev))


def _grad_axis(v, dh, axis):
    return np.gradient(v, dh, axis=axis)


def _solve_interior_extrapolated(lower, center, upper, dt, rhs_int):
    """Implicit solve over one axis with u0, u_{n-1} linearly extrapolated.

    ``lower/center/upper`` are A-coefficients on the full axis, shaped
    (batch, n); ``rhs_int`` is (batch, n-2).  Returns the full (batch, n)
    solution including the extrapolated end values.
    """
    dl = -dt * lower[:, 1:-1]
    dd = 1.0 - dt * center[:, 1:-1]
    du = -dt * upper[:, 1:-1]
    # fold u0 = 2u1 - u2 and u_{n-1} = 2u_{n-2} - u_{n-3} into the end rows
    dd[:, 0] += 2.0 * dl[:, 0]
    du[:, 0] -= dl[:, 0]
    dl[:, 0] = 0.0
    dd[:, -1] += 2.0 * du[:, -1]
    dl[:, -1] -= du[:, -1]
    du[:, -1] = 0.0
    inner = solve_tridiag_batch(dl, dd, du, rhs_int)
    batch, n_int = inner.shape
    full = np.empty((batch, n_int + 2))
    full[:, 1:-1] = inner
    full[:, 0] = 2.0 * inner[:, 0] - inner[:, 1]
    full[:, -1] = 2.0 * inner[:, -1] - inner[:, -2]
    return full


def _apply_interior(v, lower, center, upper, axis):
    """Apply the tridiagonal operator along `axis`; zero on that axis' ends."""
    v = np.moveaxis(v, axis, -1)
    lo = np.moveaxis(lower, axis, -1)
    ce = np.moveaxis(center, axis, -1)
    up = np.moveaxis(upper, axis, -1)
    out = np.zeros_like(v)
    out[..., 1:-1] = (lo[..., 1:-1] * v[..., :-2] + ce[..., 1:-1] * v[..., 1:-1]
                      + up[..., 1:-1] * v[..., 2:])
    return np.moveaxis(out, -1, axis)


# ---------------------------------------------------------------------------
# 1-D solver (price independent of H)
# ---------------------------------------------------------------------------


def _policy_loop(initial_pattern, solve_for_pattern, pattern_of, max_iter, tol):
    """Freeze signs -> linear solve -> refresh signs, until fixed point."""
    pattern = initial_pattern
    v_prev = None
    for it in range(1, max_iter + 1):
        v_new = solve_for_pattern(pattern)
        new_pattern = pattern_of(v_new, pattern)
        if np.array_equal(new_pattern, pattern):
            resid = 0.0 if v_prev is None else float(np.max(np.abs(v_new - v_prev)))
            return v_new, new_pattern, it, resid
        if v_prev is not None:
            resid = float(np.max(np.abs(v_new - v_prev)))
            if resid <= tol:
                return v_new, new_pattern, it, resid
        v_prev = v_new
        pattern = new_pattern
    resid = float(np.max(np.abs(v_new - v_prev))) if v_prev is not None else math.inf
    raise SolverError(f"policy iteration did not converge in {max_iter} iterations "
                      f"(residual {resid:.3e})", residual=resid, iterations=max_iter)


def solve_1d(spec: MarketSpec, payoff: Payoff, sharpe: SharpeParams, side: Side,
             grid: GridSpec, scheme: str = "implicit",
             max_policy_iter: int = DEFAULT_MAX_POLICY_ITER,
             policy_tol: float = DEFAULT_POLICY_TOL):
    """Backward solve of the H-free pricing PDE on a 1-D log grid.

    ``scheme`` is "implicit" (default) or "cn" (Crank-Nicolson with two
    implicit Rannacher start-up steps to damp the payoff kink).
    """
    if not isinstance(spec, MarketSpec):
        raise ConfigurationError("solve_1d needs a MarketSpec")
    if not spec.is_h_independent:
        raise ConfigurationError("solve_1d needs a and b independent of H; use solve_2d")
    if grid.is_2d:
        raise ConfigurationError("solve_1d needs a 1-D grid")
    if grid.n_x < 5:
        raise ConfigurationError("solver needs n_x >= 5")
    if scheme not in ("implicit", "cn"):
        raise ConfigurationError("scheme must be 'implicit' or 'cn'")

    x = grid.x_nodes
    s_nodes = np.exp(x)
    dx, dt = grid.dx, grid.dt
    sig = np.broadcast_to(np.asarray(spec.sigma_at(s_nodes), dtype=float), x.shape).astype(float)
    mt = np.broadcast_to(np.asarray(mu_tilde(spec, s_nodes, 1.0), dtype=float), x.shape).astype(float)
    base_drift = mt - 0.5 * sig ** 2
    loading = sharpe.signed_loading(side)
    load_vec = loading * math.sqrt(max(0.0, 1.0 - spec.rho ** 2)) * sig
    diff = 0.5 * sig ** 2

    values = np.empty((grid.n_t + 1, grid.n_x))
    v = np.asarray(payoff_eval(payoff, s_nodes), dtype=float)
    values[grid.n_t] = v

    pattern = _sign_with_deadband(_grad_axis(v, dx, 0), np.ones_like(v),
                                  float(np.max(np.abs(v))))
    report = SolverReport(boundary_scheme="zero-second-derivative-x")
    n_implicit_startup = 2 if scheme == "cn" else 0

    for step in range(grid.n_t):
        use_cn = scheme == "cn" and step >= n_implicit_startup
        v_old = v

        def solve_for_pattern(pat):
            drift = base_drift + pat * load_vec
            lower, center, upper = _upwind_coeffs(drift, diff, dx, spec.r)
            if use_cn:
                half = 0.5 * dt
                expl = v_old + half * _apply_interior(v_old[None, :], lower[None, :],
                                                      center[None, :], upper[None, :], 1)[0]
                rhs = expl[1:-1][None, :]
                return _solve_interior_extrapolated(lower[None, :], center[None, :],
                                                    upper[None, :], half, rhs)[0]
            rhs = v_old[1:-1][None, :]
            return _solve_interior_extrapolated(lower[None, :], center[None, :],
                                                upper[None, :], dt, rhs)[0]

        def pattern_of(v_new, prev):
            return _sign_with_deadband(_grad_axis(v_new, dx, 0), prev,
                                       float(np.max(np.abs(v_new))))

        v, pattern, iters, resid = _policy_loop(pattern, solve_for_pattern, pattern_of,
                                                max_policy_iter, policy_tol)
        report.policy_iteration_counts.append(iters)
        report.max_residual = max(report.max_residual, resid)
        values[grid.n_t - 1 - step] = v

    surface = PriceSurface(grid=grid, values=values, side=side,
                           equation_tag="pde_2_26", sharpe_used=loading)
    return surface, report


# ---------------------------------------------------------------------------
# 2-D solver (full S-H problem)
# ---------------------------------------------------------------------------


def solve_2d(spec: MarketSpec, payoff: Payoff, sharpe: SharpeParams, side: Side,
             grid: GridSpec,
             max_policy_iter: int = DEFAULT_MAX_POLICY_ITER,
             policy_tol: float = DEFAULT_POLICY_TOL):
    """Douglas-split backward solve of the two-asset pricing PDE."""
    if not isinstance(spec, MarketSpec):
        raise ConfigurationError("solve_2d needs a MarketSpec")
    if not grid.is_2d:
        raise ConfigurationError("solve_2d needs a 2-D grid (x = lnS, y = lnH)")
    if grid.n_x < 5 or grid.n_y < 5:
        raise ConfigurationError("solver needs n_x >= 5 and n_y >= 5")
    if abs(spec.rho) >= 1.0:
        raise EllipticityError(
            "|rho| = 1 makes the 2-D operator degenerate; the market is complete -- "
            "use solve_1d or the closed form with (a-r)/b = (mu-r)/sigma")

    x, y = grid.x_nodes, grid.y_nodes
    s_nodes, h_nodes = np.exp(x), np.exp(y)
    dx, dy, dt = grid.dx, grid.dy, grid.dt
    nx, ny = grid.n_x, grid.n_y

    sig = np.broadcast_to(np.asarray(spec.sigma_at(s_nodes), dtype=float), x.shape).astype(float)
    bb = np.broadcast_to(np.asarray(spec.b_at(h_nodes), dtype=float), y.shape).astype(float)
    mt = np.asarray(mu_tilde(spec, s_nodes[:, None], h_nodes[None, :]), dtype=float)
    mt = np.broadcast_to(mt, (nx, ny)).astype(float)

    loading = sharpe.signed_loading(side)
    root = math.sqrt(max(0.0, 1.0 - spec.rho ** 2))
    base_drift_x = mt - 0.5 * sig[:, None] ** 2
    load_x = loading * root * sig[:, None] * np.ones((1, ny))
    diff_x = 0.5 * sig[:, None] ** 2 * np.ones((1, ny))
    drift_y = (spec.r - 0.5 * bb ** 2)[None, :] * np.ones((nx, 1))
    diff_y = (0.5 * bb ** 2)[None, :] * np.ones((nx, 1))
    cross = spec.rho * sig[:, None] * bb[None, :]

    cfl = dt * float(np.max(np.abs(cross))) / (dx * dy)
    if abs(spec.rho) > 0.95 and cfl > 8.0:
        raise ConfigurationError(
            f"explicit cross-term load {cfl:.1f} too large for |rho|={abs(spec.rho):.3f}; "
            "refine the time grid")

    ly, cy, uy = _upwind_coeffs(drift_y, diff_y, dy, 0.0)

    def cross_term(v):
        out = np.zeros_like(v)
        out[1:-1, 1:-1] = cross[1:-1, 1:-1] * (
            v[2:, 2:] - v[2:, :-2] - v[:-2, 2:] + v[:-2, :-2]) / (4.0 * dx * dy)
        return out

    values = np.empty((grid.n_t + 1, nx, ny))
    v = np.asarray(payoff_eval(payoff, s_nodes), dtype=float)[:, None] * np.ones((1, ny))
    values[grid.n_t] = v

    pattern = _sign_with_deadband(_grad_axis(v, dx, 0), np.ones_like(v),
                                  float(np.max(np.abs(v))))
    report = SolverReport(boundary_scheme="zero-second-derivative-x-y")

    for step in range(grid.n_t):
        v_old = v

        def solve_for_pattern(pat):
            drift_x = base_drift_x + pat * load_x
            lx, cx, ux = _upwind_coeffs(drift_x, diff_x, dx, spec.r)
            ax_old = _apply_interior(v_old, lx, cx, ux, 0)
            ay_old = _apply_interior(v_old, ly, cy, uy, 1)
            y0 = v_old + dt * (ax_old + ay_old + cross_term(v_old))
            # x-sweep over interior y columns
            rhs_x = (y0 - dt * ax_old)[1:-1, 1:-1]
            y1 = _solve_interior_extrapolated(lx[:, 1:-1].T, cx[:, 1:-1].T, ux[:, 1:-1].T,
                                              dt, rhs_x.T).T
            # y-sweep over interior x rows
            rhs_y = y1[1:-1, :] - dt * ay_old[1:-1, 1:-1]
            y2 = _solve_interior_extrapolated(ly[1:-1, :], cy[1:-1, :], uy[1:-1, :],
                                              dt, rhs_y)
            out = np.empty_like(v_old)
            out[1:-1, :] = y2
            out[0, :] = 2.0 * out[1, :] - out[2, :]
            out[-1, :] = 2.0 * out[-2, :] - out[-3, :]
            return out

        def pattern_of(v_new, prev):
            return _sign_with_deadband(_grad_axis(v_new, dx, 0), prev,
                                       float(np.max(np.abs(v_new))))

        v, pattern, iters, resid = _policy_loop(pattern, solve_for_pattern, pattern_of,
                                                max_policy_iter, policy_tol)
        report.policy_iteration_counts.append(iters)
        report.max_residual = max(report.max_residual, resid)
        values[grid.n_t - 1 - step] = v

    surface = PriceSurface(grid=grid, values=values, side=side,
                           equation_tag="pde_2_14", sharpe_used=loading)
    return surface, report


# ---------------------------------------------------------------------------
# Stochastic-volatility solvers
# ---------------------------------------------------------------------------


def _stochvol_setup(spec: StochVolSpec, grid: GridSpec):
    if not isinstance(spec, StochVolSpec):
        raise ConfigurationError("stochastic-volatility solver needs a StochVolSpec")
    if not grid.is_2d:
        raise ConfigurationError("stochastic-volatility solver needs a 2-D grid (x = lnS, y = sigma)")
    if grid.n_x < 5:
        raise ConfigurationError("solver needs n_x >= 5")
    x, y = grid.x_nodes, grid.y_nodes
    beta = np.broadcast_to(np.asarray(spec.beta_at(y), dtype=float), y.shape).astype(float)
    bb = np.broadcast_to(np.asarray(spec.b_at(y), dtype=float), y.shape).astype(float)
    a_vals = np.broadcast_to(np.asarray(spec.a_at(y), dtype=float), y.shape).astype(float)
    gamma_base = a_vals - (spec.mu - spec.r) * spec.rho * bb / beta
    return x, y, beta, bb, gamma_base


def _ay_coeffs_sigma(gamma_eff, diff_y, dy):
    """sigma-axis operator: upwinded interior rows plus reduced boundary rows.

    At the sigma boundaries the diffusion is dropped and the convection uses
    the inward one-sided difference when that direction is upwind (otherwise
    the convection contribution is dropped too, keeping the M-matrix).
    """
    ly, cy, uy = _upwind_coeffs(gamma_eff, diff_y, dy, 0.0)
    g_lo = gamma_eff[:, 0]
    ly[:, 0] = 0.0
    cy[:, 0] = np.where(g_lo >= 0.0, -g_lo / dy, 0.0)
    uy[:, 0] = np.where(g_lo >= 0.0, g_lo / dy, 0.0)
    g_hi = gamma_eff[:, -1]
    uy[:, -1] = 0.0
    cy[:, -1] = np.where(g_hi <= 0.0, g_hi / dy, 0.0)
    ly[:, -1] = np.where(g_hi <= 0.0, -g_hi / dy, 0.0)
    return ly, cy, uy


def _apply_sigma_axis(v, ly, cy, uy):
    """Apply the sigma operator including its reduced boundary rows."""
    out = np.empty_like(v)
    out[:, 1:-1] = ly[:, 1:-1] * v[:, :-2] + cy[:, 1:-1] * v[:, 1:-1] + uy[:, 1:-1] * v[:, 2:]
    out[:, 0] = cy[:, 0] * v[:, 0] + uy[:, 0] * v[:, 1]
    out[:, -1] = ly[:, -1] * v[:, -2] + cy[:, -1] * v[:, -1]
    return out


def _solve_sigma_sweep(ly, cy, uy, dt, rhs):
    dl = -dt * ly
    dd = 1.0 - dt * cy
    du = -dt * uy
    return solve_tridiag_batch(dl, dd, du, rhs)


def _solve_stochvol(spec: StochVolSpec, payoff: Payoff, loading_mag: float,
                    iterate_policy: bool, grid: GridSpec,
                    max_policy_iter: int, policy_tol: float, equation_tag: str, side: Side):
    """Shared stepper for the nonlinear and linear stochastic-vol PDEs.

    The linear route fixes the sign pattern at +1 and performs one solve per
    step, which makes it arithmetically identical to the nonlinear route
    whenever the latter's converged pattern is all +1 (convex payoffs).
    """
    x, y, beta, bb, gamma_base = _stochvol_setup(spec, grid)
    s_nodes = np.exp(x)
    dx, dy, dt = grid.dx, grid.dy, grid.dt
    nx, ny = grid.n_x, grid.n_y
    root = math.sqrt(max(0.0, 1.0 - spec.rho ** 2))

    drift_x = (spec.r - 0.5 * beta ** 2)[None, :] * np.ones((nx, 1))
    diff_x = (0.5 * beta ** 2)[None, :] * np.ones((nx, 1))
    lx, cx, ux = _upwind_coeffs(drift_x, diff_x, dx, spec.r)
    diff_y = (0.5 * bb ** 2)[None, :] * np.ones((nx, 1))
    load_y = (root * bb)[None, :] * np.ones((nx, 1))
    cross = spec.rho * (beta * bb)[None, :] * np.ones((nx, 1))

    def cross_term(v):
        out = np.zeros_like(v)
        out[1:-1, 1:-1] = cross[1:-1, 1:-1] * (
            v[2:, 2:] - v[2:, :-2] - v[:-2, 2:] + v[:-2, :-2]) / (4.0 * dx * dy)
        return out

    values = np.empty((grid.n_t + 1, nx, ny))
    v = np.asarray(payoff_eval(payoff, s_nodes), dtype=float)[:, None] * np.ones((1, ny))
    values[grid.n_t] = v

    pattern = _sign_with_deadband(_grad_axis(v, dy, 1), np.ones_like(v),
                                  float(np.max(np.abs(v))))
    report = SolverReport(boundary_scheme="zero-second-derivative-x; one-sided-sigma")

    for step in range(grid.n_t):
        v_old = v

        def solve_for_pattern(pat):
            gamma_eff = gamma_base[None, :] + loading_mag * pat * load_y
            ly, cy, uy = _ay_coeffs_sigma(gamma_eff, diff_y, dy)
            ax_old = _apply_interior(v_old, lx, cx, ux, 0)
            ay_old = _apply_sigma_axis(v_old, ly, cy, uy)
            y0 = v_old + dt * (ax_old + ay_old + cross_term(v_old))
            # x-sweep over every sigma row (x-boundaries are algebraic)
            rhs_x = (y0 - dt * ax_old)[1:-1, :]
            y1 = _solve_interior_extrapolated(lx.T, cx.T, ux.T, dt, rhs_x.T).T
            # sigma-sweep over interior x rows, boundary sigma rows included
            rhs_y = y1[1:-1, :] - dt * ay_old[1:-1, :]
            y2 = _solve_sigma_sweep(ly[1:-1, :], cy[1:-1, :], uy[1:-1, :], dt, rhs_y)
            out = np.empty_like(v_old)
            out[1:-1, :] = y2
            out[0, :] = 2.0 * out[1, :] - out[2, :]
            out[-1, :] = 2.0 * out[-2, :] - out[-3, :]
            return out

        if iterate_policy:
            def pattern_of(v_new, prev):
                return _sign_with_deadband(_grad_axis(v_new, dy, 1), prev,
                                           float(np.max(np.abs(v_new))))

            v, pattern, iters, resid = _policy_loop(pattern, solve_for_pattern, pattern_of,
                                                    max_policy_iter, policy_tol)
        else:
            v = solve_for_pattern(pattern)
            iters, resid = 1, 0.0
        report.policy_iteration_counts.append(iters)
        report.max_residual = max(report.max_residual, resid)
        values[grid.n_t - 1 - step] = v

    surface = PriceSurface(grid=grid, values=values, side=side,
                           equation_tag=equation_tag, sharpe_used=loading_mag)
    return surface, report


def solve_stochvol_nonlinear(spec: StochVolSpec, payoff: Payoff, sharpe: SharpeParams,
                             side: Side, grid: GridSpec,
                             max_policy_iter: int = DEFAULT_MAX_POLICY_ITER,
                             policy_tol: float = DEFAULT_POLICY_TOL):
    """Nonlinear stochastic-volatility pricing PDE via policy iteration."""
    loading = sharpe.signed_loading(side)
    return _solve_stochvol(spec, payoff, loading, True, grid, max_policy_iter,
                           policy_tol, "pde_3_8", side)


def solve_stochvol_linear(spec: StochVolSpec, payoff: Payoff, alpha_signed: float,
                          grid: GridSpec):
    """Linear stochastic-volatility PDE with fixed signed loading."""
    return _solve_stochvol(spec, payoff, float(alpha_signed), False, grid,
                           DEFAULT_MAX_POLICY_ITER, DEFAULT_POLICY_TOL,
                           "pde_3_9", Side.SELLER)


# ---------------------------------------------------------------------------
# Greeks
# ---------------------------------------------------------------------------


@dataclass
class SurfaceGreeks:
    """Finite-difference derivatives of a solved surface (interior-accurate)."""

    p_s: np.ndarray
    p_ss: np.ndarray
    p_h: np.ndarray | None = None
    p_sigma: np.ndarray | None = None


def greeks(surface: PriceSurface) -> SurfaceGreeks:
    """Chain-ruled central differences back to the original variables."""
    g = surface.grid
    if g.n_x < 3 or (g.is_2d and g.n_y < 3):
        raise ConfigurationError("greeks need at least 3 nodes per axis")
    vals = surface.values
    dx = g.dx
    x_axis = 1
    px = np.gradient(vals, dx, axis=x_axis)
    pxx = np.empty_like(vals)
    pxx_interior = (np.take(vals, range(2, g.n_x), axis=x_axis)
                    - 2.0 * np.take(vals, range(1, g.n_x - 1), axis=x_axis)
                    + np.take(vals, range(0, g.n_x - 2), axis=x_axis)) / dx ** 2
    sl = [slice(None)] * vals.ndim
    sl[x_axis] = slice(1, -1)
    pxx[tuple(sl)] = pxx_interior
    sl[x_axis] = 0
    sl_src = list(sl)
    sl_src[x_axis] = 1
    pxx[tuple(sl)] = pxx[tuple(sl_src)]
    sl[x_axis] = -1
    sl_src[x_axis] = -2
    pxx[tuple(sl)] = pxx[tuple(sl_src)]

    x = g.x_nodes
    shape = [1] * vals.ndim
    shape[x_axis] = g.n_x
    e_neg = np.exp(-x).reshape(shape)
    p_s = e_neg * px
    p_ss = e_neg ** 2 * (pxx - px)

    p_h = None
    p_sig = None
    if g.is_2d:
        py = np.gradient(vals, g.dy, axis=2)
        if surface.second_axis_kind == "log_h":
            p_h = np.exp(-g.y_nodes).reshape(1, 1, g.n_y) * py
        else:
            p_sig = py
    return SurfaceGreeks(p_s=p_s, p_ss=p_ss, p_h=p_h, p_sigma=p_sig)
