"""First variations of the mixed norm, the gradient norm and the fractional
seminorm, as bilinear applications and as residual grid functions.

Residuals are densities for the discrete pairing ``sum f*v*cell_volume``,
so ``pairing(H_prime_residual(u, p), v) == H_prime_apply(u, v, p)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .grid import GridFunction, forward_diff, forward_diff_adjoint
from .norms import (as_exponents, fractional_kernel, fractional_seminorm,
                    gradient_norm, mixed_norm, partials, _per_axis)

VariationField = GridFunction


def _phi(z: np.ndarray, p: float) -> np.ndarray:
    # |z|^(p-2) z, with the limit value 0 at z == 0
    return np.sign(z) * np.abs(z) ** (p - 1.0)


def _require_nonzero(u: GridFunction):
    if not np.any(u.values):
        raise ValueError("variation undefined at u == 0")


def F_p(u: GridFunction, p) -> VariationField:
    """Duality map of the mixed norm: ``prod_i I_i(u)^(p_{i+1}-p_i) |u|^(p_1-2) u``.

    ``p_{n+1} = 1``. Each partial norm ``I_i`` is broadcast over the axes it
    has already integrated out. Where ``u`` vanishes the value is 0.

    ``F_p`` is the derivative of the 1-homogeneous norm, so it is
    0-homogeneous with ``mixed_norm(F_p(u), p') == 1`` and
    ``pairing(F_p(u), u) == mixed_norm(u, p)``.
    """
    p = as_exponents(p)
    _require_nonzero(u)
    stack = partials(u, p)
    p_next = np.append(p[1:], 1.0)
    nz = u.values != 0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = _phi(u.values, p[0])
        for level, e in zip(stack.levels, p_next - p):
            out = out * np.asarray(level) ** e
    return u.with_values(np.where(nz, out, 0.0))


def pairing(f: GridFunction, v: GridFunction) -> float:
    if f.grid != v.grid:
        raise ValueError("pairing of fields on different grids")
    return float(np.sum(f.values * v.values) * f.grid.cell_volume)


# ----------------------------------------------------------------- local

def _normalized_slopes(u: GridFunction, p: np.ndarray):
    out = []
    for i in range(u.ndim):
        g = forward_diff(u, i)
        n_i = (np.sum(np.abs(g) ** p[i]) * u.grid.cell_volume) ** (1.0 / p[i])
        if n_i == 0:
            raise ValueError(f"directional norm along axis {i} vanishes; H' undefined")
        out.append(g / n_i)
    return out


def H_prime_apply(u: GridFunction, v: GridFunction, p,
                  weights: Optional[Sequence[float]] = None) -> float:
    """``<H'(u), v> = sum_i sum |g_i/N_i|^(p_i-2) (g_i/N_i) h_i * cell_volume``."""
    p = as_exponents(p)
    _require_nonzero(u)
    if u.grid != v.grid:
        raise ValueError("u and v live on different grids")
    w = np.ones(u.ndim) if weights is None else np.asarray(weights, dtype=float)
    total = 0.0
    for i, z in enumerate(_normalized_slopes(u, p)):
        total += w[i] * np.sum(_phi(z, p[i]) * forward_diff(v, i))
    return float(total * u.grid.cell_volume)


def H_prime_residual(u: GridFunction, p,
                     weights: Optional[Sequence[float]] = None) -> VariationField:
    """Negative discrete divergence of the normalized fluxes."""
    p = as_exponents(p)
    _require_nonzero(u)
    w = np.ones(u.ndim) if weights is None else np.asarray(weights, dtype=float)
    r = np.zeros(u.grid.shape)
    for i, z in enumerate(_normalized_slopes(u, p)):
        r += w[i] * forward_diff_adjoint(_phi(z, p[i]), u.grid, i)
    return u.with_values(r)


# ------------------------------------------------------------ fractional

def _frac_setup(u, s, p, window, normalized):
    p = as_exponents(p)
    s = np.asarray(tuple(s), dtype=float).ravel()
    if s.size != p.size or u.ndim != p.size:
        raise ValueError("s, p and the grid dimension must agree")
    _require_nonzero(u)
    windows = _per_axis(window, u.ndim)
    kernels = [fractional_kernel(u.grid, i, s[i], p[i], windows[i], normalized)
               for i in range(u.ndim)]
    return p, kernels


def _frac_axis_norm(lines, ker, p_i, vol):
    raw = np.sum(ker.kill_total * np.abs(lines) ** p_i)
    pair = ker.pair_total
    for m in range(1, lines.shape[-1]):
        raw += pair[m - 1] * np.sum(np.abs(lines[..., m:] - lines[..., :-m]) ** p_i)
    return (raw * vol) ** (1.0 / p_i)


def Hs_prime_apply(u: GridFunction, v: GridFunction, s, p, window=None,
                   normalized: bool = True) -> float:
    """Derivative of ``u -> sum_i [u]_{s_i,p_i,i}`` in direction ``v``.

    Uses the same pair/node decomposition as the seminorm, so
    ``Hs_prime_apply(u, u) == fractional_seminorm(u)`` up to rounding.
    """
    p, kernels = _frac_setup(u, s, p, window, normalized)
    if u.grid != v.grid:
        raise ValueError("u and v live on different grids")
    vol = u.grid.cell_volume
    total = 0.0
    for i, ker in enumerate(kernels):
        U = np.moveaxis(u.values, i, -1)
        W = np.moveaxis(v.values, i, -1)
        n_i = _frac_axis_norm(U, ker, p[i], vol)
        if n_i == 0:
            raise ValueError(f"fractional seminorm along axis {i} vanishes")
        acc = np.sum(ker.kill_total * _phi(U / n_i, p[i]) * W)
        pair = ker.pair_total
        for m in range(1, U.shape[-1]):
            du = (U[..., m:] - U[..., :-m]) / n_i
            acc += pair[m - 1] * np.sum(_phi(du, p[i]) * (W[..., m:] - W[..., :-m]))
        total += acc
    return float(total * vol)


def Hs_prime_residual(u: GridFunction, s, p, window=None,
                      normalized: bool = True) -> VariationField:
    """Residual density of ``H_s'(u)``, scattered pair by pair."""
    p, kernels = _frac_setup(u, s, p, window, normalized)
    vol = u.grid.cell_volume
    r = np.zeros(u.grid.shape)
    for i, ker in enumerate(kernels):
        U = np.moveaxis(u.values, i, -1)
        R = np.moveaxis(r, i, -1)          # view into r
        n_i = _frac_axis_norm(U, ker, p[i], vol)
        if n_i == 0:
            raise ValueError(f"fractional seminorm along axis {i} vanishes")
        R += ker.kill_total * _phi(U / n_i, p[i])
        pair = ker.pair_total
        for m in range(1, U.shape[-1]):
            flux = pair[m - 1] * _phi((U[..., m:] - U[..., :-m]) / n_i, p[i])
            R[..., m:] += flux
            R[..., :-m] -= flux
    return u.with_values(r)


# --------------------------------------------------------- Gateaux check

@dataclass
class GateauxReport:
    functional: str
    derivative: float
    steps: list
    differences: list
    relative_errors: list = field(default_factory=list)

    @property
    def min_relative_error(self) -> float:
        return float(min(self.relative_errors))


DEFAULT_STEPS = (1e-3, 1e-4, 1e-5, 1e-6)


def gateaux_check(functional: str, u: GridFunction, v: GridFunction, p, s=None,
                  steps: Sequence[float] = DEFAULT_STEPS, window=None,
                  normalized: bool = True) -> GateauxReport:
    """Central differences ``(J(u+tv) - J(u-tv)) / 2t`` against the implemented pairing.

    ``functional`` is ``"I"`` (mixed norm), ``"H"`` (gradient norm) or
    ``"Hs"`` (fractional seminorm, needs ``s``).
    """
    if functional == "I":
        J = lambda w: mixed_norm(w, p)
        exact = pairing(F_p(u, p), v)
    elif functional == "H":
        J = lambda w: gradient_norm(w, p)
        exact = H_prime_apply(u, v, p)
    elif functional == "Hs":
        if s is None:
            raise ValueError("functional 'Hs' needs fractional orders s")
        J = lambda w: fractional_seminorm(w, s, p, window, normalized)
        exact = Hs_prime_apply(u, v, s, p, window, normalized)
    else:
        raise ValueError(f"unknown functional {functional!r}")

    report = GateauxReport(functional, exact, list(steps), [])
    scale = max(abs(exact), np.finfo(float).tiny)
    for t in steps:
        fd = (J(u + t * v) - J(u - t * v)) / (2.0 * t)
        report.differences.append(fd)
        report.relative_errors.append(abs(fd - exact) / scale)
    return report
