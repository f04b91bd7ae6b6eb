"""Vertical-equilibrium CO2 plume migration in a sloping aquifer.

    porosity * R * u_t + f(u)_x = 0,
    f(u) = (Q + K (1 - u)) M u / (1 + (M - 1) u),

with R = 1 - S_br - S_cr where the plume recedes (u_t < 0, residual trapping)
and R = 1 - S_br where it advances.  Units: metres and years.

Three uncertain inputs, each reached from xi_i in [-1, 1] through an inverse
CDF truncated to the [p_lo, p_hi] quantile range:

* M = lambda_c / lambda_b, ratio of two independent uniforms;
* K = kappa_scale * sin(theta) * k, k lognormal (mD);
* Q = q_scale * Q_phys, Q_phys exponential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from scipy import stats

from ..errors import InvalidArgumentError, NumericalFailureError
from ..stochastic_space import CdfTransform, StochasticDomain
from .base import ForwardModel
from .fv import fv_solve_scalar, sample_profile


class RatioOfUniforms:
    """Distribution of X / Y with X ~ U[x1, x2], Y ~ U[y1, y2], all positive."""

    def __init__(self, x1, x2, y1, y2):
        if not (0 < x1 < x2 and 0 < y1 < y2):
            raise InvalidArgumentError("ratio-of-uniforms bounds must be positive and ordered")
        self.x1, self.x2, self.y1, self.y2 = map(float, (x1, x2, y1, y2))
        self.lower = self.x1 / self.y2
        self.upper = self.x2 / self.y1

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        zs = np.maximum(z, 1e-300)
        x1, x2, y1, y2 = self.x1, self.x2, self.y1, self.y2
        ya = np.clip(x1 / zs, y1, y2)
        yb = np.clip(x2 / zs, y1, y2)
        ramp = (zs * (yb**2 - ya**2) / 2.0 - x1 * (yb - ya)) / (x2 - x1)
        out = (ramp + (y2 - yb)) / (y2 - y1)
        return np.clip(np.where(z <= 0, 0.0, out), 0.0, 1.0)

    def ppf(self, p):
        p = np.asarray(p, dtype=float)
        lo = np.full(p.shape, self.lower)
        hi = np.full(p.shape, self.upper)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < p
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)


@dataclass(frozen=True)
class CO2ModelConfig:
    length: float = 2000.0
    n_cells: int = 200
    s_br: float = 0.1
    s_cr: float = 0.1
    porosity: float = 0.15
    theta: float = 0.15
    tau: float = 20.0  # injection duration; the resulting plume is given by the u0_* fields
    t_final: float = 600.0
    x_query: float = 600.0
    # end-of-injection plume: trapezoid around the injection point
    u0_center: float = 500.0
    u0_plateau_half_width: float = 50.0
    u0_ramp_width: float = 100.0
    u0_height: float = 0.5
    lambda_c: tuple = (0.7 * 6.25e-5, 1.3 * 6.25e-5)
    lambda_b: tuple = (0.8 * 5e-4, 1.2 * 5e-4)
    k_mean: float = 200.0
    k_std: float = 50.0
    q_mean: float = 1e-9
    kappa_scale: float = 7.5e-3
    q_scale: float = 1.25e8
    p_lo: float = 1e-3
    p_hi: float = 1.0 - 1e-3
    cfl: float = 0.45

    def __post_init__(self):
        for s in (self.s_br, self.s_cr):
            if not 0.0 <= s < 1.0:
                raise InvalidArgumentError("residual saturations must lie in [0, 1)")
        if 1.0 - self.s_br - self.s_cr <= 0.0:
            raise InvalidArgumentError("1 - S_br - S_cr must be positive")

    def transforms(self) -> tuple:
        sig = np.sqrt(np.log1p((self.k_std / self.k_mean) ** 2))
        mu = np.log(self.k_mean) - 0.5 * sig**2
        m_dist = RatioOfUniforms(*self.lambda_c, *self.lambda_b)
        return (
            CdfTransform(m_dist, self.p_lo, self.p_hi, name="M"),
            CdfTransform(stats.lognorm(s=sig, scale=np.exp(mu)), self.p_lo, self.p_hi, name="k"),
            CdfTransform(stats.expon(scale=self.q_mean), self.p_lo, self.p_hi, name="Q"),
        )

    def parameters(self, xi):
        """(M, K, Q) in model units for each row of ``xi``."""
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        t_m, t_k, t_q = self.transforms()
        m = t_m.to_parameter(xi[:, 0])
        k = self.kappa_scale * np.sin(self.theta) * t_k.to_parameter(xi[:, 1])
        q = self.q_scale * t_q.to_parameter(xi[:, 2])
        return m, k, q

    def initial_profile(self, x):
        d = np.abs(np.asarray(x, dtype=float) - self.u0_center) - self.u0_plateau_half_width
        return self.u0_height * np.clip(1.0 - d / self.u0_ramp_width, 0.0, 1.0)

    def x_edges(self, n_cells=None):
        return np.linspace(0.0, self.length, (n_cells or self.n_cells) + 1)


def co2_flux(u, m, k, q):
    u = np.asarray(u, dtype=float)
    return (q + k * (1.0 - u)) * m * u / (1.0 + (m - 1.0) * u)


def co2_dflux(u, m, k, q):
    num = (q + k * (1.0 - u)) * m * u
    den = 1.0 + (m - 1.0) * u
    dnum = m * (q + k - 2.0 * k * u)
    return (dnum * den - num * (m - 1.0)) / den**2


@numba.njit(cache=True)
def _flux1(u, m, k, q):
    return (q + k * (1.0 - u)) * m * u / (1.0 + (m - 1.0) * u)


@numba.njit(cache=True)
def _dflux1(u, m, k, q):
    den = 1.0 + (m - 1.0) * u
    return (m * (q + k - 2.0 * k * u) * den - (q + k * (1.0 - u)) * m * u * (m - 1.0)) / (den * den)


@numba.njit(cache=True)
def _minmod1(a, b):
    if a * b <= 0.0:
        return 0.0
    return min(abs(a), abs(b)) * (1.0 if a > 0.0 else -1.0)


@numba.njit(cache=True)
def _rate(u, m, k, q, dx, r_dec, r_inc, face, out):
    # two outflow ghost cells per side, as in fv_solve_scalar
    n = u.shape[0]
    for j in range(n + 1):
        il = j - 1
        ir = j
        a0 = u[min(max(il - 1, 0), n - 1)]
        a1 = u[min(max(il, 0), n - 1)]
        a2 = u[min(max(il + 1, 0), n - 1)]
        a3 = u[min(max(il + 2, 0), n - 1)]
        left = a1 + 0.5 * _minmod1(a1 - a0, a2 - a1)
        right = a2 - 0.5 * _minmod1(a2 - a1, a3 - a2)
        alpha = max(abs(_dflux1(left, m, k, q)), abs(_dflux1(right, m, k, q)))
        face[j] = 0.5 * (_flux1(left, m, k, q) + _flux1(right, m, k, q)) - 0.5 * alpha * (right - left)
    for i in range(n):
        div = -(face[i + 1] - face[i]) / dx
        out[i] = div / (r_dec if div < 0.0 else r_inc)


@numba.njit(cache=True)
def _co2_solve(m, k, q, u0, dx, t_final, cfl, r_dec, r_inc):
    n_samples = m.shape[0]
    n = u0.shape[0]
    result = np.empty((n_samples, n))
    face = np.empty(n + 1)
    r1 = np.empty(n)
    r2 = np.empty(n)
    u1 = np.empty(n)
    c_min = min(r_dec, r_inc)
    for s in range(n_samples):
        u = u0.copy()
        t = 0.0
        while t < t_final * (1.0 - 1e-14):
            speed = 0.0
            for i in range(n):
                speed = max(speed, abs(_dflux1(u[i], m[s], k[s], q[s])))
            speed /= c_min
            dt = t_final - t
            if speed > 0.0:
                dt = min(cfl * dx / speed, dt)
            _rate(u, m[s], k[s], q[s], dx, r_dec, r_inc, face, r1)
            for i in range(n):
                u1[i] = u[i] + dt * r1[i]
            _rate(u1, m[s], k[s], q[s], dx, r_dec, r_inc, face, r2)
            for i in range(n):
                u[i] = 0.5 * (u[i] + u1[i] + dt * r2[i])
            t += dt
        result[s] = u
    return result


def _check_xi(xi):
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    if xi.shape[1] != 3:
        raise InvalidArgumentError("CO2 model takes 3 stochastic coordinates")
    if np.any(np.abs(xi) > 1.0 + 1e-12):
        raise InvalidArgumentError("xi outside [-1, 1]^3")
    return xi


def co2_profiles(cfg: CO2ModelConfig, xi, n_cells: int | None = None):
    """Cell centres and the plume profile at T, one row per row of ``xi``."""
    xi = _check_xi(xi)
    m, k, q = cfg.parameters(xi)
    edges = cfg.x_edges(n_cells)
    x_c = 0.5 * (edges[1:] + edges[:-1])
    u = _co2_solve(m, k, q, cfg.initial_profile(x_c), edges[1] - edges[0], cfg.t_final, cfg.cfl,
                   cfg.porosity * (1.0 - cfg.s_br - cfg.s_cr), cfg.porosity * (1.0 - cfg.s_br))
    bad = ~np.all(np.isfinite(u), axis=1)
    if bad.any():
        raise NumericalFailureError("CO2 solve produced non-finite values",
                                    {"rows": np.flatnonzero(bad)[:20].tolist()})
    return x_c, u


def co2_evaluate(cfg: CO2ModelConfig, xi, n_cells: int | None = None) -> np.ndarray:
    """Plume height u(x*, T) for each row of ``xi`` (shape (n, 3))."""
    x_c, u = co2_profiles(cfg, xi, n_cells)
    return np.array([np.interp(cfg.x_query, x_c, row) for row in u])


def co2_evaluate_generic(cfg: CO2ModelConfig, xi, n_cells: int | None = None, chunk: int = 512) -> np.ndarray:
    """Same QI through the generic batched solver; slower, kept as a cross-check."""
    xi = _check_xi(xi)
    m, k, q = cfg.parameters(xi)
    edges = cfg.x_edges(n_cells)
    x_c = 0.5 * (edges[1:] + edges[:-1])
    u0 = cfg.initial_profile(x_c)
    r_dec = cfg.porosity * (1.0 - cfg.s_br - cfg.s_cr)
    r_inc = cfg.porosity * (1.0 - cfg.s_br)

    # batch samples of similar wave speed so each chunk takes a sensible time step
    ugrid = np.linspace(0.0, 1.0, 21)[:, None]
    speed = np.max(np.abs(co2_dflux(ugrid, m, k, q)), axis=0)
    order = np.argsort(speed, kind="stable")
    out = np.empty(len(xi))
    for start in range(0, len(order), chunk):
        idx = order[start:start + chunk]
        mm, kk, qq = (v[idx, None] for v in (m, k, q))
        sol = fv_solve_scalar(
            lambda u: co2_flux(u, mm, kk, qq),
            np.broadcast_to(u0, (len(idx), len(u0))),
            edges,
            cfg.t_final,
            dflux=lambda u: co2_dflux(u, mm, kk, qq),
            accumulation=(r_dec, r_inc),
            cfl=cfg.cfl,
        )
        out[idx] = sample_profile(sol, cfg.x_query)
    return out


class CO2Model(ForwardModel):
    name = "co2"
    dim = 3
    exact = False

    def __init__(self, config: CO2ModelConfig | None = None, n_cells: int | None = None):
        self.config = config or CO2ModelConfig()
        self.n_cells = n_cells or self.config.n_cells

    @property
    def domain(self) -> StochasticDomain:
        return StochasticDomain(3, self.config.transforms())

    def evaluate_many(self, points, workers: int = 1) -> np.ndarray:
        return co2_evaluate(self.config, points, n_cells=self.n_cells)
