"""First eigenvalues of the homogeneous Rayleigh quotients on box domains.

Both quotients are minimized by projected descent on the unit sphere of the
mixed norm. The descent direction is the residual ``H'(u) - Q(u) F_p(u)``
preconditioned by the Hessian weights of the energy, frozen at the current
iterate (a lagged-diffusivity Sobolev gradient). With ``p = 2`` and unit step
this is exactly inverse iteration. Successive directions are combined with
Polak-Ribiere+ conjugation unless ``SolveConfig(conjugate=False)``.
``SolveConfig(precondition=False)`` uses the plain residual instead, which
needs O(counts^2) iterations.

The residual is measured in the conjugate mixed norm. For exponents below 2
the flux ``|z|^(p-2) z`` is not Lipschitz at zero slope, and rounding alone
keeps the residual near 1e-5 on fine grids even when the quotient has settled
to machine precision; loosen ``tol_residual`` for such runs.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .exponents import ExponentVector, FractionalVector
from .grid import GridFunction, TensorGrid, forward_diff
from .norms import (as_exponents, bbm_weights, fractional_kernel,
                    fractional_seminorm, gradient_norm, mixed_norm, _per_axis)
from .variations import F_p, H_prime_residual, Hs_prime_residual, pairing

log = logging.getLogger(__name__)

RHO_FLOOR = 1e-2


@dataclass(frozen=True)
class SolveConfig:
    tol_residual: float = 1e-6
    max_iter: int = 500
    initial_step: float = 1.0
    backtrack_factor: float = 0.5
    restarts: int = 3
    rng_seed: int = 0
    precondition: bool = True
    armijo: float = 1e-4
    conjugate: bool = True
    threads: int = 1

    def __post_init__(self):
        if not self.tol_residual > 0:
            raise ValueError("tol_residual must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if not self.initial_step > 0:
            raise ValueError("initial_step must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


@dataclass
class SolveReport:
    """Outcome of one minimization; ``lambda_`` is the quotient at ``u``."""

    lambda_: float
    u: GridFunction
    residual: float
    iterations: int
    history: list = field(default_factory=list)
    converged: bool = False
    restart: int = 0

    def history_csv(self) -> str:
        lines = ["iter,Q,residual"]
        lines += [f"{k},{q:.16e},{r:.16e}" for k, q, r in self.history]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SweepRow:
    s: tuple
    lambda_s: float
    lambda_local: float
    lambda_local_limit: float
    ratio: float
    converged: bool


@dataclass
class SweepTable:
    """One row per fractional order; ``reports`` keeps the fractional solves."""

    p: tuple
    rows: list
    reports: list = field(default_factory=list, repr=False)

    def csv(self) -> str:
        lines = ["s,lambda_s,lambda_local,lambda_local_limit,ratio,converged"]
        for r in self.rows:
            s = " ".join(repr(float(x)) for x in r.s)
            lines.append(f"{s},{r.lambda_s:.16e},{r.lambda_local:.16e},"
                         f"{r.lambda_local_limit:.16e},{r.ratio:.16e},{str(r.converged).lower()}")
        return "\n".join(lines) + "\n"


# ------------------------------------------------------------ quotients

def rayleigh_local(u: GridFunction, p, weights=None) -> float:
    """``||grad u||_p / ||u||_p``."""
    den = mixed_norm(u, p)
    if den == 0:
        raise ValueError("Rayleigh quotient undefined at u == 0")
    return gradient_norm(u, p, weights) / den


def rayleigh_fractional(u: GridFunction, s, p, window=None, normalized: bool = True) -> float:
    den = mixed_norm(u, p)
    if den == 0:
        raise ValueError("Rayleigh quotient undefined at u == 0")
    return fractional_seminorm(u, s, p, window, normalized) / den


# ------------------------------------------------------- preconditioners

def _hessian_rho(z: np.ndarray, p: float) -> np.ndarray:
    if p == 2.0:
        return np.ones_like(z)
    a = np.abs(z)
    floor = RHO_FLOOR * a.max() if a.size and a.max() > 0 else 1.0
    return np.maximum(a, floor) ** (p - 2.0)


def _difference_matrix(grid: TensorGrid, axis: int) -> sp.csr_matrix:
    k = grid.counts[axis]
    d1 = sp.diags([np.ones(k), -np.ones(k)], [0, -1], shape=(k + 1, k)) / grid.spacings[axis]
    before = int(np.prod(grid.counts[:axis]))
    after = int(np.prod(grid.counts[axis + 1:]))
    return sp.kron(sp.identity(before), sp.kron(d1, sp.identity(after))).tocsr()


class _LocalEnergy:
    def __init__(self, grid, p, weights=None):
        self.grid, self.p = grid, as_exponents(p)
        self.weights = np.ones(grid.ndim) if weights is None else np.asarray(weights, float)
        self._d = None

    def value(self, u):
        return gradient_norm(u, self.p, self.weights)

    def residual(self, u):
        return H_prime_residual(u, self.p, self.weights)

    def preconditioner(self, u):
        if self._d is None:
            self._d = [_difference_matrix(self.grid, i) for i in range(self.grid.ndim)]
        vol = self.grid.cell_volume
        a = None
        for i, d in enumerate(self._d):
            g = forward_diff(u, i).ravel()
            n_i = (np.sum(np.abs(g) ** self.p[i]) * vol) ** (1.0 / self.p[i])
            rho = _hessian_rho(g / n_i, self.p[i])
            term = (self.weights[i] * (self.p[i] - 1.0) / n_i) * (d.T @ sp.diags(rho) @ d)
            a = term if a is None else a + term
        return a


class _FractionalEnergy:
    def __init__(self, grid, s, p, window=None, normalized=True):
        self.grid, self.p = grid, as_exponents(p)
        self.s = np.asarray(tuple(s), float).ravel()
        self.window, self.normalized = window, normalized
        windows = _per_axis(window, grid.ndim)
        self.kernels = [fractional_kernel(grid, i, self.s[i], self.p[i], windows[i], normalized)
                        for i in range(grid.ndim)]

    def value(self, u):
        return fractional_seminorm(u, self.s, self.p, self.window, self.normalized)

    def residual(self, u):
        return Hs_prime_residual(u, self.s, self.p, self.window, self.normalized)

    def preconditioner(self, u):
        grid = self.grid
        size = int(np.prod(grid.shape))
        index = np.arange(size).reshape(grid.shape)
        vol = grid.cell_volume
        rows, cols, vals = [], [], []
        for i, ker in enumerate(self.kernels):
            p_i = self.p[i]
            U = np.moveaxis(u.values, i, -1)
            idx = np.moveaxis(index, i, -1)
            pair = ker.pair_total
            diffs = [U[..., m:] - U[..., :-m] for m in range(1, U.shape[-1])]
            raw = np.sum(ker.kill_total * np.abs(U) ** p_i)
            raw += sum(pair[m - 1] * np.sum(np.abs(dm) ** p_i) for m, dm in enumerate(diffs, 1))
            n_i = (raw * vol) ** (1.0 / p_i)
            scale = (p_i - 1.0) / n_i
            zs = [U / n_i] + [dm / n_i for dm in diffs]
            big = max(float(np.abs(z).max()) for z in zs)
            floor = RHO_FLOOR * big if big > 0 else 1.0

            def rho(z):
                return np.ones_like(z) if p_i == 2.0 else np.maximum(np.abs(z), floor) ** (p_i - 2.0)

            rows.append(idx.ravel())
            cols.append(idx.ravel())
            vals.append((scale * ker.kill_total * rho(zs[0])).ravel())
            for m, z in enumerate(zs[1:], 1):
                w = (scale * pair[m - 1] * rho(z)).ravel()
                a, b = idx[..., :-m].ravel(), idx[..., m:].ravel()
                rows += [a, b, a, b]
                cols += [a, b, b, a]
                vals += [w, w, -w, -w]
        return sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(size, size)).tocsc()


# ------------------------------------------------------------ descent

def _normalize(u: GridFunction, p) -> GridFunction:
    return u.with_values(u.values / mixed_norm(u, p))


def _random_start(grid: TensorGrid, seed: int, restart: int) -> np.ndarray:
    rng = np.random.default_rng([int(seed), int(restart)])
    return 1.0 - rng.random(grid.shape)          # uniform in (0, 1]


def _descend(energy, p, u0: GridFunction, cfg: SolveConfig, restart: int = 0) -> SolveReport:
    p = as_exponents(p)
    p_conj = p / (p - 1.0)
    u = _normalize(u0, p)

    def state(w):
        i_w = mixed_norm(w, p)
        q = energy.value(w) / i_w
        r = energy.residual(w).values - q * F_p(w, p).values
        return q, r, mixed_norm(w.with_values(r), p_conj)

    q, r, res = state(u)
    history = [(0, q, res)]
    converged = res <= cfg.tol_residual
    step = cfg.initial_step
    prev = None
    it = 0
    while not converged and it < cfg.max_iter:
        it += 1
        if cfg.precondition:
            a = energy.preconditioner(u)
            z = splu(a.tocsc()).solve(r.ravel()).reshape(r.shape)
        else:
            z = r
        rz = float(np.sum(r * z))
        d = -z
        if prev is not None and cfg.conjugate:
            beta = max(0.0, float(np.sum(r * (z - prev[1]))) / prev[2])
            d = d + beta * prev[0]
        slope = pairing(u.with_values(r), u.with_values(d))
        if not slope < 0:
            d = -z
            slope = pairing(u.with_values(r), u.with_values(d))
        if not slope < 0:
            d = -r
            slope = pairing(u.with_values(r), u.with_values(d))

        t = min(cfg.initial_step, step / cfg.backtrack_factor)
        accepted = None
        while t > 1e-14 * cfg.initial_step:
            trial = u.values + t * d
            norm = mixed_norm(u.with_values(trial), p)
            if norm > 0:
                cand = u.with_values(trial / norm)
                q_c = energy.value(cand) / mixed_norm(cand, p)
                if q_c <= q + cfg.armijo * t * slope:
                    accepted = (cand, q_c)
                    break
            t *= cfg.backtrack_factor
        if accepted is None:
            log.debug("restart %d: line search stalled at iteration %d", restart, it)
            it -= 1
            break
        step = t
        prev = (d, z, rz)
        u = accepted[0]
        q, r, res = state(u)
        history.append((it, q, res))
        converged = res <= cfg.tol_residual

    return SolveReport(q, u, res, it, history, converged, restart)


def _best(reports: Sequence[SolveReport]) -> SolveReport:
    return min(reports, key=lambda rep: (not rep.converged, rep.lambda_, rep.restart))


def _multistart(energy, p, grid: TensorGrid, cfg: SolveConfig) -> SolveReport:
    def run(k):
        u0 = GridFunction(grid, _random_start(grid, cfg.rng_seed, k))
        return _descend(energy, p, u0, cfg, k)

    if cfg.threads > 1 and cfg.restarts > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            reports = list(pool.map(run, range(cfg.restarts)))
    else:
        reports = [run(k) for k in range(cfg.restarts)]
    return _best(reports)


def minimize_local(p, grid: TensorGrid, config: Optional[SolveConfig] = None,
                   weights: Optional[Sequence[float]] = None) -> SolveReport:
    """Minimize ``sum_i w_i ||u_{x_i}||_{p_i} / ||u||_p`` over the Dirichlet grid space.

    Returns the best converged restart; if none converged, the best one with
    ``converged=False``.
    """
    p = ExponentVector(tuple(p))
    if len(p) != grid.ndim:
        raise ValueError("one exponent per grid axis required")
    cfg = config or SolveConfig()
    return _multistart(_LocalEnergy(grid, p, weights), p, grid, cfg)


def minimize_fractional(s, p, grid: TensorGrid, config: Optional[SolveConfig] = None,
                        normalized: bool = True, window=None) -> SolveReport:
    p = ExponentVector(tuple(p))
    s = FractionalVector(tuple(s))
    if len(p) != grid.ndim or len(s) != grid.ndim:
        raise ValueError("one exponent and one fractional order per grid axis required")
    cfg = config or SolveConfig()
    return _multistart(_FractionalEnergy(grid, s, p, window, normalized), p, grid, cfg)


def s_sweep(p, grid: TensorGrid, s_list: Sequence, config: Optional[SolveConfig] = None,
            window=None) -> SweepTable:
    """Normalized fractional eigenvalues along ``s_list`` against the local limit.

    ``lambda_local_limit`` minimizes ``sum_i (2/p_i)^(1/p_i) ||u_{x_i}||_{p_i} / ||u||_p``,
    the s -> 1 limit of the normalized quotient.
    """
    if len(s_list) == 0:
        raise ValueError("s_list must not be empty")
    p = ExponentVector(tuple(p))
    cfg = config or SolveConfig()
    lam_local = minimize_local(p, grid, cfg).lambda_
    lam_limit = minimize_local(p, grid, cfg, weights=bbm_weights(p)).lambda_
    rows, reports = [], []
    for s in s_list:
        s = tuple(np.broadcast_to(np.asarray(s, float), (grid.ndim,)))
        rep = minimize_fractional(s, p, grid, cfg, normalized=True, window=window)
        rows.append(SweepRow(s, rep.lambda_, lam_local, lam_limit,
                             rep.lambda_ / lam_limit, rep.converged))
        reports.append(rep)
    return SweepTable(tuple(p), rows, reports)
