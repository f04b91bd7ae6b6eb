"""Coefficient estimation from cached evaluations.

OLS uses a truncated eigen-decomposition of the scaled Gram matrix
Psi^T Psi / N_ev.  LAD follows the null-space route: with Psi = Q R (pivoted),
min ||g||_1 subject to g - u in range(Q), solved by ADMM, then
Psi c = u - g in the least-squares sense.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import linprog

from .errors import InvalidArgumentError, NumericalFailureError, UnsupportedConfigurationError


@dataclass
class RegressionReport:
    coefficients: np.ndarray
    residual: np.ndarray  # u - Psi c
    rank: int
    n_truncated: int = 0
    method: str = "ols"
    g: np.ndarray | None = None
    projection_residual: float = 0.0  # ||Psi c - (u - g)||_2 for LAD
    iterations: int = 0
    certified: bool = False  # LAD optimality certificate found
    backend: str = ""
    reassigned: tuple = field(default_factory=tuple)

    def to_json(self) -> str:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, np.ndarray):
                d[k] = v.tolist()
        d["reassigned"] = [int(i) for i in self.reassigned]
        return json.dumps(d)


def _check(psi, u):
    psi = np.asarray(psi, dtype=float)
    u = np.asarray(u, dtype=float).ravel()
    if psi.ndim != 2 or psi.shape[0] != u.shape[0] or min(psi.shape) < 1:
        raise InvalidArgumentError(f"design matrix {psi.shape} does not match data {u.shape}")
    if not (np.all(np.isfinite(psi)) and np.all(np.isfinite(u))):
        raise InvalidArgumentError("design matrix and data must be finite")
    return psi, u


def solve_ols_tsvd(psi, u, eps_svd: float = 1e-8) -> RegressionReport:
    """c = V (S^eps)^+ V^T Psi^T u / N_ev with Psi^T Psi / N_ev = V S V^T.

    Eigenvalues of the scaled Gram matrix at or below ``eps_svd`` are dropped.
    """
    psi, u = _check(psi, u)
    n = psi.shape[0]
    gram = psi.T @ psi / n
    s, v = np.linalg.eigh(0.5 * (gram + gram.T))
    keep = s > eps_svd
    if not keep.any():
        raise NumericalFailureError("every singular value was truncated", {"largest": float(s.max())})
    rhs = v.T @ (psi.T @ u / n)
    c = v[:, keep] @ (rhs[keep] / s[keep])
    return RegressionReport(c, u - psi @ c, int(keep.sum()), int((~keep).sum()), "ols")


def pivoted_qr(psi, eps_qr: float = 1e-8):
    """Economic pivoted QR; returns (Q_hat, R, pivots, rank) with rank by |R_ii| > eps |R_11|."""
    q, r, piv = scipy.linalg.qr(psi, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > eps_qr * diag[0])) if diag.size and diag[0] > 0 else 0
    return q[:, :rank], r[:rank], piv, rank


def null_space_basis(psi, eps_qr: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of the complement of range(Psi), shape (N_ev, N_ev - r).

    Forms the full Q, so only meant for small problems; the solvers use the
    implicit projector instead.
    """
    psi = np.asarray(psi, dtype=float)
    _, _, _, rank = pivoted_qr(psi, eps_qr)
    q, _, _ = scipy.linalg.qr(psi, pivoting=True)
    return q[:, rank:]


def _soft(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def _lad_certificate(psi_r, res, zero_tol):
    """Check 0 in the subdifferential of ||u - Psi c||_1 at the given residual."""
    z = np.abs(res) <= zero_tol
    if z.sum() == 0:
        return False
    sgn = np.sign(res[~z])
    rhs = -psi_r[~z].T @ sgn
    s_z, *_ = np.linalg.lstsq(psi_r[z].T, rhs, rcond=None)
    ok_eq = np.linalg.norm(psi_r[z].T @ s_z - rhs) <= 1e-8 * max(1.0, np.linalg.norm(rhs))
    return bool(ok_eq and np.max(np.abs(s_z)) <= 1.0 + 1e-8)


def _polish(psi_r, u, g, zero_tol):
    """Exact fit on the (near) zero-residual set of an approximate LAD solution."""
    z = np.abs(g) <= zero_tol
    if z.sum() < psi_r.shape[1]:
        z = np.argsort(np.abs(g))[: psi_r.shape[1]]
    y, *_ = np.linalg.lstsq(psi_r[z], u[z], rcond=None)
    return u - psi_r @ y


def solve_lad(psi, u, eps_qr: float = 1e-8, *, backend: str = "auto", abstol: float = 1e-9,
              reltol: float = 1e-9, max_iter: int = 5000, rho: float | None = None) -> RegressionReport:
    """Least absolute deviations via basis pursuit on the null space of Psi^T.

    ``backend`` is "admm", "lp" (exact dual simplex, HiGHS) or "auto", which
    runs ADMM and falls back to the LP when ADMM ends without convergence or an
    optimality certificate.  With "admm" that case raises NumericalFailureError
    carrying the best iterate.
    """
    psi, u = _check(psi, u)
    n = psi.shape[0]
    q_hat, _, piv, rank = pivoted_qr(psi, eps_qr)
    if rank == 0:
        raise NumericalFailureError("design matrix has rank zero", {})
    if n <= rank:
        raise UnsupportedConfigurationError(f"no null space: N_ev = {n} <= rank = {rank}")
    psi_r = psi[:, piv[:rank]]
    scale = float(np.max(np.abs(u))) or 1.0
    us = u / scale
    zero_tol = 1e-9

    def project(v):
        return us + q_hat @ (q_hat.T @ (v - us))

    if backend not in ("admm", "lp", "auto"):
        raise InvalidArgumentError(f"unknown LAD backend {backend!r}")
    iterations, certified, used = 0, False, backend
    if backend == "lp":
        g = _lad_lp(psi_r, us)
        certified = True
    else:
        x0 = us - q_hat @ (q_hat.T @ us)  # least-squares residual, feasible start
        rho = rho if rho is not None else 1.0 / max(float(np.mean(np.abs(x0))), 1e-12)
        z = _soft(x0, 1.0 / rho)
        w = np.zeros(n)
        best, best_obj = x0, float(np.abs(x0).sum())
        sqrt_n = np.sqrt(n)
        converged = False
        for it in range(1, max_iter + 1):
            x = project(z - w)
            z_old = z
            z = _soft(x + w, 1.0 / rho)
            w = w + x - z
            obj = float(np.abs(x).sum())
            if obj < best_obj:
                best, best_obj = x, obj
            r_pri = np.linalg.norm(x - z)
            r_dual = rho * np.linalg.norm(z - z_old)
            if (r_pri <= sqrt_n * abstol + reltol * max(np.linalg.norm(x), np.linalg.norm(z))
                    and r_dual <= sqrt_n * abstol + reltol * rho * np.linalg.norm(w)):
                converged = True
                break
            if it % 50 == 0:
                cand = _polish(psi_r, us, x, 1e-6)
                if _lad_certificate(psi_r, cand, zero_tol):
                    best, certified = cand, True
                    break
        iterations = it
        g = best
        if not certified:
            cand = _polish(psi_r, us, g, max(1e-6, 10 * abstol))
            if np.abs(cand).sum() <= np.abs(g).sum() + 1e-12 * n:
                g = cand
            certified = _lad_certificate(psi_r, g, zero_tol)
        used = "admm"
        if not (converged or certified):
            if backend == "admm":
                raise NumericalFailureError("basis pursuit did not converge",
                                            {"iterations": iterations, "best_objective": best_obj * scale,
                                             "best_g": g * scale})
            g, certified, used = _lad_lp(psi_r, us), True, "lp"

    g = g * scale
    c, *_ = np.linalg.lstsq(psi, u - g, rcond=eps_qr)
    proj = float(np.linalg.norm(psi @ c - (u - g)))
    return RegressionReport(c, u - psi @ c, rank, psi.shape[1] - rank, "lad", g, proj, iterations,
                            certified, backend=used)


def _lad_lp(psi, u):
    """Exact LAD through its dual, max u.y s.t. Psi^T y = 0, |y| <= 1 (HiGHS).

    The equality multipliers are -c; returns the primal residual u - Psi c.
    """
    res = linprog(-u, A_eq=psi.T, b_eq=np.zeros(psi.shape[1]), bounds=(-1.0, 1.0), method="highs")
    if res.status != 0:
        raise NumericalFailureError("LP solve for LAD failed", {"message": res.message})
    return u + psi @ res.eqlin.marginals


def repair_misclassified(report: RegressionReport, jump_floor: float) -> np.ndarray:
    """Indices whose absolute residual exceeds ``jump_floor``."""
    if jump_floor <= 0:
        raise InvalidArgumentError("jump_floor must be positive")
    return np.flatnonzero(np.abs(report.residual) > jump_floor)


def estimate_jump_floor(values, labels, grid_shape, statistic: str = "median", factor: float = 0.5) -> float:
    """``factor`` times a statistic of |u_i - u_j| over grid neighbours with different labels.

    ``statistic`` is "min", "median" or a quantile level in (0, 1).
    """
    u = np.asarray(values, dtype=float).reshape(grid_shape)
    lab = np.asarray(labels, dtype=bool).reshape(grid_shape)
    jumps = []
    for ax in range(u.ndim):
        sl_a = [slice(None)] * u.ndim
        sl_b = [slice(None)] * u.ndim
        sl_a[ax], sl_b[ax] = slice(None, -1), slice(1, None)
        mask = lab[tuple(sl_a)] != lab[tuple(sl_b)]
        jumps.append(np.abs(u[tuple(sl_a)] - u[tuple(sl_b)])[mask])
    jumps = np.concatenate(jumps) if jumps else np.empty(0)
    if jumps.size == 0:
        raise InvalidArgumentError("no neighbouring pairs straddle the interface")
    if statistic == "min":
        stat = jumps.min()
    elif statistic == "median":
        stat = np.median(jumps)
    else:
        stat = np.quantile(jumps, float(statistic))
    return float(factor * stat)
