"""Exponent vectors, harmonic means and the critical-exponent conditions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


class ConditionError(ValueError):
    """Raised when an exponent condition needed by a formula is violated."""


def _as_float_tuple(values) -> tuple:
    return tuple(float(v) for v in np.asarray(tuple(values), dtype=float).ravel())


@dataclass(frozen=True)
class ExponentVector:
    """Integrability exponents ``p = (p_1, ..., p_n)``.

    Every entry must lie in ``(1, inf)`` and the entries must be
    non-decreasing. Unsorted input is rejected, never reordered: the axis
    order fixes the order of the mixed-norm recursion.
    """

    p: tuple

    def __post_init__(self):
        p = _as_float_tuple(self.p)
        if len(p) == 0:
            raise ValueError("ExponentVector needs at least one exponent")
        for pi in p:
            if not (1.0 < pi < np.inf):
                raise ValueError(f"exponent {pi} outside (1, inf)")
        if any(a > b for a, b in zip(p, p[1:])):
            raise ValueError(f"exponents must be non-decreasing, got {p}")
        object.__setattr__(self, "p", p)

    def __len__(self):
        return len(self.p)

    def __iter__(self):
        return iter(self.p)

    def __getitem__(self, i):
        return self.p[i]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.p, dtype=dtype)

    @property
    def conjugate(self) -> np.ndarray:
        """Conjugate exponents ``p_i / (p_i - 1)`` (non-increasing)."""
        p = np.asarray(self.p)
        return p / (p - 1.0)


@dataclass(frozen=True)
class FractionalVector:
    """Fractional orders ``s = (s_1, ..., s_n)``, each in ``(0, 1)``."""

    s: tuple

    def __post_init__(self):
        s = _as_float_tuple(self.s)
        if len(s) == 0:
            raise ValueError("FractionalVector needs at least one order")
        for si in s:
            if not (0.0 < si < 1.0):
                raise ValueError(f"fractional order {si} outside (0, 1)")
        object.__setattr__(self, "s", s)

    def __len__(self):
        return len(self.s)

    def __iter__(self):
        return iter(self.s)

    def __getitem__(self, i):
        return self.s[i]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.s, dtype=dtype)


@dataclass(frozen=True)
class ValidityReport:
    condicion_ok: bool
    condicion1_ok: bool
    condicion2_ok: bool
    condicion3_ok: bool
    pstar: Optional[float] = None
    pstar_s: Optional[float] = None

    def required_ok(self, mode: str = "local") -> bool:
        """Conditions that must hold before a solve in ``mode``."""
        if mode == "local":
            return self.condicion_ok and self.condicion1_ok
        if mode == "fractional":
            return self.condicion_ok and self.condicion2_ok and self.condicion3_ok
        raise ValueError(f"unknown mode {mode!r}")


def conjugate(p: float) -> float:
    return p / (p - 1.0)


def harmonic_mean(q: Sequence[float]) -> float:
    """Harmonic mean ``(n^-1 sum 1/q_i)^-1`` of a positive vector."""
    q = np.asarray(tuple(q), dtype=float)
    if q.size == 0:
        raise ValueError("harmonic_mean of an empty vector")
    if np.any(~np.isfinite(q)) or np.any(q <= 0):
        raise ValueError("harmonic_mean requires finite, strictly positive entries")
    return float(q.size / np.sum(1.0 / q))


def vec_product(q: Sequence[float], r: Sequence[float]) -> np.ndarray:
    """Coordinatewise product ``(q_1 r_1, ..., q_n r_n)``."""
    q = np.asarray(tuple(q), dtype=float)
    r = np.asarray(tuple(r), dtype=float)
    if q.shape != r.shape:
        raise ValueError(f"length mismatch: {q.size} vs {r.size}")
    return q * r


def critical_exponent(p: Sequence[float], n: int) -> float:
    """``n pbar / (n - pbar)`` with ``pbar`` the harmonic mean of ``p``."""
    pbar = harmonic_mean(p)
    if pbar >= n:
        raise ConditionError(f"harmonic mean {pbar} of p is not below n={n}")
    return n * pbar / (n - pbar)


def fractional_critical_exponent(s: Sequence[float], p: Sequence[float], n: int) -> float:
    sp_bar = harmonic_mean(vec_product(s, p))
    if sp_bar >= n:
        raise ConditionError(f"harmonic mean {sp_bar} of s*p is not below n={n}")
    s_bar = harmonic_mean(s)
    return n * (sp_bar / s_bar) / (n - sp_bar)


def validate(p: Sequence[float], s: Optional[Sequence[float]] = None,
             n: Optional[int] = None) -> ValidityReport:
    """Evaluate the ordering/range condition and the three embedding conditions.

    Never raises on bad exponents; failures are carried in the report. When
    ``s`` is omitted the fractional conditions are reported as false.
    """
    p = np.asarray(tuple(p), dtype=float).ravel()
    if n is None:
        n = p.size
    in_range = p.size > 0 and bool(np.all((p > 1.0) & np.isfinite(p)))
    cond0 = in_range and p.size == n and bool(np.all(np.diff(p) >= 0))

    pstar = None
    cond1 = False
    if in_range and harmonic_mean(p) < n:
        cond1 = True
        pstar = critical_exponent(p, n)

    pstar_s = None
    cond2 = cond3 = False
    if s is not None and in_range:
        s_arr = np.asarray(tuple(s), dtype=float).ravel()
        s_ok = s_arr.shape == p.shape and bool(np.all((s_arr > 0) & (s_arr < 1)))
        if s_ok and harmonic_mean(s_arr * p) < n:
            cond2 = True
            pstar_s = fractional_critical_exponent(s_arr, p, n)
            cond3 = bool(p[-1] < pstar_s)

    return ValidityReport(cond0, cond1, cond2, cond3, pstar, pstar_s)
