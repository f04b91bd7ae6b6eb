"""Exact Riemann solution of the inviscid Burgers equation with random states.

    u_L(xi_1) = a + sigma_L cos(c xi_1),   u_R(xi_2) = b + sigma_R cos(c xi_2)

For u_L > u_R the solution is a single shock travelling at the
Rankine-Hugoniot speed s = (u_L + u_R) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ..errors import InvalidArgumentError, UnsupportedConfigurationError
from .base import ForwardModel


@dataclass(frozen=True)
class BurgersRiemannConfig:
    a: float = 0.5
    b: float = -0.5
    sigma_l: float = 0.4
    sigma_r: float = 0.3
    c: float = 3.0
    x0: float = 0.0
    x_query: float = -0.1
    t_query: float = 1.0

    def left_state(self, xi1):
        return self.a + self.sigma_l * np.cos(self.c * np.asarray(xi1, dtype=float))

    def right_state(self, xi2):
        return self.b + self.sigma_r * np.cos(self.c * np.asarray(xi2, dtype=float))


def _states(cfg: BurgersRiemannConfig, xi):
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != 2:
        raise InvalidArgumentError("Burgers model takes 2 stochastic coordinates")
    ul = cfg.left_state(xi[..., 0])
    ur = cfg.right_state(xi[..., 1])
    if np.any(ul <= ur):
        raise UnsupportedConfigurationError("u_L <= u_R gives a rarefaction; only shocks are supported")
    return ul, ur


def burgers_discontinuity_indicator(cfg: BurgersRiemannConfig, xi):
    """g(xi) = x0 + T (u_L + u_R)/2 - x*; the QI jumps where g changes sign."""
    ul, ur = _states(cfg, xi)
    g = cfg.x0 + cfg.t_query * 0.5 * (ul + ur) - cfg.x_query
    return float(g) if np.ndim(g) == 0 else g


def burgers_exact(cfg: BurgersRiemannConfig, xi):
    """u(x*, T; xi).  Left state when x* <= shock position (ties go left)."""
    ul, ur = _states(cfg, xi)
    g = cfg.x0 + cfg.t_query * 0.5 * (ul + ur) - cfg.x_query
    u = np.where(g >= 0.0, ul, ur)
    return float(u) if np.ndim(u) == 0 else u


class BurgersModel(ForwardModel):
    name = "burgers"
    dim = 2
    exact = True

    def __init__(self, config: BurgersRiemannConfig | None = None):
        self.config = config or BurgersRiemannConfig()

    def evaluate_many(self, points, workers: int = 1) -> np.ndarray:
        return np.asarray(burgers_exact(self.config, np.atleast_2d(points)), dtype=float)

    def indicator(self, points) -> np.ndarray:
        return np.asarray(burgers_discontinuity_indicator(self.config, np.atleast_2d(points)))


def _cos_piece_integrals(cfg: BurgersRiemannConfig, lo: float, hi: float):
    """Integrals of u_L and u_L**2 over [lo, hi] in xi_1."""
    a, s, c = cfg.a, cfg.sigma_l, cfg.c

    def prim1(x):
        return a * x + s * np.sin(c * x) / c

    def prim2(x):
        return a * a * x + 2 * a * s * np.sin(c * x) / c + s * s * (x / 2 + np.sin(2 * c * x) / (4 * c))

    return prim1(hi) - prim1(lo), prim2(hi) - prim2(lo)


def _inner(cfg: BurgersRiemannConfig, xi2: float):
    """(int u dxi1, int u^2 dxi1) over [-1, 1] at fixed xi2."""
    ur = float(cfg.right_state(xi2))
    threshold = 2.0 * (cfg.x_query - cfg.x0) / cfg.t_query - ur
    q = (threshold - cfg.a) / cfg.sigma_l
    breaks = [-1.0, 1.0]
    if -1.0 < q < 1.0:
        base = np.arccos(q)
        kmax = int(np.ceil(abs(cfg.c) / (2 * np.pi))) + 1
        for k in range(-kmax, kmax + 1):
            for r in (base + 2 * np.pi * k, -base + 2 * np.pi * k):
                x = r / cfg.c
                if -1.0 < x < 1.0:
                    breaks.append(x)
    breaks = sorted(breaks)
    m1 = m2 = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        mid = 0.5 * (lo + hi)
        if cfg.left_state(mid) >= threshold:
            i1, i2 = _cos_piece_integrals(cfg, lo, hi)
        else:
            i1, i2 = ur * (hi - lo), ur * ur * (hi - lo)
        m1 += i1
        m2 += i2
    return m1, m2


def burgers_exact_moments(cfg: BurgersRiemannConfig | None = None, tol: float = 1e-12):
    """Mean and standard deviation of the QI under uniform xi on [-1, 1]^2.

    The inner xi_1 integral is done piecewise in closed form, the outer one by
    adaptive quadrature.
    """
    cfg = cfg or BurgersRiemannConfig()
    opts = dict(epsabs=tol, epsrel=tol, limit=500)
    m1 = integrate.quad(lambda t: _inner(cfg, t)[0], -1.0, 1.0, **opts)[0] / 4.0
    m2 = integrate.quad(lambda t: _inner(cfg, t)[1], -1.0, 1.0, **opts)[0] / 4.0
    return m1, float(np.sqrt(max(m2 - m1 * m1, 0.0)))
