"""Mixed Lebesgue norms, anisotropic gradient norms and directional
fractional seminorms on tensor grids.

Fractional seminorms
--------------------
Along axis ``i`` (spacing ``d``, ``K`` interior nodes, ``sigma = s p``) the
double integral over ``x in R^n`` and ``h in R`` is split in three ranges of
``|h|``:

* ``|h| < d`` (inner band): ``|u(x+h) - u(x)|`` is replaced by ``|h| |g|``
  with ``g`` the forward-difference slope, integrated analytically;
* ``d <= |h| <= M d`` (inner sum): the lattice sums
  ``S_m = sum_{k in Z} |u(k+m) - u(k)|^p`` are interpolated linearly in ``h``
  and integrated against the exact kernel ``|h|^(-1-sigma)``;
* ``|h| > M d`` (tail): ``u(x+h)`` and ``u(x)`` never overlap once
  ``M d`` exceeds the axis extent, so the remainder is analytic.

Because base points ``x`` range over the whole zero-extended lattice, the
functional on one grid line reduces to pair terms ``c_m |u_{j+m} - u_j|^p``
(``1 <= m < K``) plus node terms ``kappa_j |u_j|^p`` that collect every pair
with one endpoint outside the box.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .grid import GridFunction, TensorGrid, forward_diff

_GAUSS_T, _GAUSS_W = np.polynomial.legendre.leggauss(24)
_GAUSS_T = 0.5 * (_GAUSS_T + 1.0)
_GAUSS_W = 0.5 * _GAUSS_W


def as_exponents(p) -> np.ndarray:
    p = np.asarray(tuple(p) if not isinstance(p, np.ndarray) else p, dtype=float).ravel()
    if p.size == 0 or np.any(~(p >= 1.0)) or np.any(~np.isfinite(p)):
        raise ValueError(f"exponents must be finite and >= 1, got {p}")
    return p


def _check_dim(u: GridFunction, p: np.ndarray):
    if u.ndim != p.size:
        raise ValueError(f"{p.size} exponents given for a {u.ndim}-d grid function")


# ------------------------------------------------------------- mixed norm

@dataclass(frozen=True, eq=False)
class PartialNormStack:
    """``levels[j-1]`` holds ``I_j`` as an array over the axes ``j+1, ..., n``."""

    levels: tuple

    @property
    def norm(self) -> float:
        return float(self.levels[-1])


def partials(u: GridFunction, p) -> PartialNormStack:
    p = as_exponents(p)
    _check_dim(u, p)
    h = u.grid.spacings
    level = np.abs(u.values)
    levels = []
    for j, pj in enumerate(p):
        level = (np.sum(level ** pj, axis=0) * h[j]) ** (1.0 / pj)
        levels.append(level)
    return PartialNormStack(tuple(levels))


def mixed_norm(u: GridFunction, p) -> float:
    """Iterated norm: ``x_1`` is integrated first with ``p_1``, ``x_n`` last."""
    return partials(u, p).norm


# --------------------------------------------------------- gradient norms

def directional_norm(g: np.ndarray, p_i: float, grid: TensorGrid) -> float:
    """``(sum |g|^p_i * cell volume)^(1/p_i)`` over a staggered array."""
    return float((np.sum(np.abs(g) ** p_i) * grid.cell_volume) ** (1.0 / p_i))


def directional_norms(u: GridFunction, p) -> np.ndarray:
    p = as_exponents(p)
    _check_dim(u, p)
    return np.array([directional_norm(forward_diff(u, i), p[i], u.grid)
                     for i in range(u.ndim)])


def gradient_norm(u: GridFunction, p, weights: Optional[Sequence[float]] = None) -> float:
    """``sum_i w_i ||u_{x_i}||_{p_i}`` with forward differences (``w_i = 1`` by default)."""
    norms = directional_norms(u, p)
    if weights is not None:
        norms = norms * np.asarray(weights, dtype=float)
    return float(np.sum(norms))


def bbm_weights(p) -> np.ndarray:
    """Per-axis factors ``(2/p_i)^(1/p_i)`` of the s -> 1 limit of the normalized seminorm."""
    p = as_exponents(p)
    return (2.0 / p) ** (1.0 / p)


# ------------------------------------------------------ fractional kernel

def _kernel_integral(a: np.ndarray, b: np.ndarray, sigma: float) -> np.ndarray:
    """``int_a^b t^(-1-sigma) dt`` for ``0 < a < b``, without cancellation."""
    return a ** (-sigma) * -np.expm1(-sigma * np.log(b / a)) / sigma


def min_window(grid: TensorGrid, axis: int) -> int:
    """Smallest window ``M`` with ``M * spacing >= 2 * axis extent``."""
    return 2 * (grid.counts[axis] + 1)


@dataclass(frozen=True, eq=False)
class FractionalKernel:
    """Per-line coefficients of one directional fractional seminorm.

    ``pair_*[m-1]`` multiplies ``|u_{j+m} - u_j|^p`` for ``1 <= m < K``;
    ``kill_*[j]`` multiplies ``|u_j|^p``. Coefficients exclude the cell volume.
    """

    axis: int
    s: float
    p: float
    window: int
    normalized: bool
    pair_band: float
    pair_inner: np.ndarray
    kill_band: np.ndarray
    kill_inner: np.ndarray
    kill_tail: float

    @property
    def pair_total(self) -> np.ndarray:
        c = self.pair_inner.copy()
        if c.size:
            c[0] += self.pair_band
        return c

    @property
    def kill_total(self) -> np.ndarray:
        return self.kill_band + self.kill_inner + self.kill_tail


@lru_cache(maxsize=64)
def fractional_kernel(grid: TensorGrid, axis: int, s: float, p: float,
                      window: Optional[int] = None, normalized: bool = True) -> FractionalKernel:
    s, p = float(s), float(p)
    if not 0.0 < s < 1.0:
        raise ValueError(f"fractional order {s} outside (0, 1)")
    if not p > 1.0:
        raise ValueError(f"exponent {p} must exceed 1")
    sigma = s * p
    if sigma < 1e-12:
        raise ValueError("s*p is numerically zero; the tail integral diverges")
    k = grid.counts[axis]
    d = grid.spacings[axis]
    m_min = min_window(grid, axis)
    window = m_min if window is None else int(window)
    if window < m_min:
        raise ValueError(f"window {window} too small for an exact tail; need >= {m_min}")

    # hat-function weights of the linear interpolation of S(h) on [1, M] (units of d)
    m = np.arange(1, window + 1, dtype=float)
    left = np.zeros(window)
    c = m[1:] - 1.0
    left[1:] = (_GAUSS_T[None, :] * (c[:, None] + _GAUSS_T[None, :]) ** (-1.0 - sigma)) @ _GAUSS_W
    right = np.zeros(window)
    right[:-1] = _kernel_integral(m[:-1], m[:-1] + 1.0, sigma) - left[1:]
    omega = left + right

    scale = 2.0 * d ** (-sigma)
    band = scale / (p * (1.0 - s))
    inner = scale * omega
    tail = 4.0 * (window * d) ** (-sigma) / sigma
    if normalized:
        band, inner, tail = (1.0 - s) * band, (1.0 - s) * inner, (1.0 - s) * tail

    # node terms: a pair at shift m leaves the box on the right iff m >= K-j+1
    # (1-based j), on the left iff m >= j
    tail_sums = np.cumsum(inner[::-1])[::-1]          # sum_{m >= q} inner_m at index q-1
    j = np.arange(1, k + 1)
    kill_inner = tail_sums[k - j] + tail_sums[j - 1]
    kill_band = band * ((j == 1).astype(float) + (j == k).astype(float))

    return FractionalKernel(axis, s, p, window, bool(normalized), float(band),
                            inner[:k - 1].copy(), kill_band, kill_inner, float(tail))


def _lines(u: GridFunction, axis: int) -> np.ndarray:
    return np.moveaxis(u.values, axis, -1)


@dataclass(frozen=True)
class FractionalTerms:
    axis: int
    inner_sum: float
    inner_band_correction: float
    tail_correction: float
    raw_power: float
    p: float
    normalized: bool

    @property
    def seminorm(self) -> float:
        return self.raw_power ** (1.0 / self.p)


def fractional_directional(u: GridFunction, s_i: float, p_i: float, axis: int,
                           window: Optional[int] = None,
                           normalized: bool = True) -> FractionalTerms:
    """Discrete ``[u]_{s_i,p_i,axis}^{p_i}`` split into inner sum, band and tail.

    With ``normalized`` every component carries the factor ``(1 - s_i)``.
    """
    if not 0 <= axis < u.ndim:
        raise ValueError(f"axis {axis} out of range")
    ker = fractional_kernel(u.grid, axis, s_i, p_i, window, normalized)
    lines = _lines(u, axis)
    absu_p = np.abs(lines) ** p_i
    vol = u.grid.cell_volume

    inner = 0.0
    for m in range(1, lines.shape[-1]):
        diff = lines[..., m:] - lines[..., :-m]
        inner += ker.pair_inner[m - 1] * np.sum(np.abs(diff) ** p_i)
    inner += np.sum(absu_p * ker.kill_inner)

    band = 0.0
    if lines.shape[-1] > 1:
        band = ker.pair_band * np.sum(np.abs(lines[..., 1:] - lines[..., :-1]) ** p_i)
    band += np.sum(absu_p * ker.kill_band)
    tail = ker.kill_tail * np.sum(absu_p)

    inner, band, tail = inner * vol, band * vol, tail * vol
    return FractionalTerms(axis, float(inner), float(band), float(tail),
                           float(inner + band + tail), float(p_i), bool(normalized))


def fractional_terms(u: GridFunction, s, p, window=None, normalized=True) -> list:
    s = np.asarray(tuple(s), dtype=float).ravel()
    p = as_exponents(p)
    _check_dim(u, p)
    if s.size != p.size:
        raise ValueError("s and p must have the same length")
    windows = _per_axis(window, u.ndim)
    return [fractional_directional(u, s[i], p[i], i, windows[i], normalized)
            for i in range(u.ndim)]


def fractional_seminorm(u: GridFunction, s, p, window=None, normalized: bool = True) -> float:
    """``sum_i [u]_{s_i,p_i,i}``; ``window`` may be an int or one int per axis."""
    return float(sum(t.seminorm for t in fractional_terms(u, s, p, window, normalized)))


def _per_axis(window, n):
    if window is None or np.isscalar(window):
        return [window] * n
    window = list(window)
    if len(window) != n:
        raise ValueError("need one window per axis")
    return window
