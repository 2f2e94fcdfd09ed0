"""Sparseness penalties, their sum, and the normalized l1/l2 sparsity."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MEASURE_KINDS",
    "MeasureSpec",
    "sign",
    "penalty",
    "penalty_sum",
    "hoyer_sparsity",
]

# M1..M6 are the elementwise penalties; HOYER is the whole-vector sparsity.
MEASURE_KINDS = ("M1", "M2", "M3", "M4", "M5", "M6", "HOYER")


@dataclass(frozen=True)
class MeasureSpec:
    """Which sparseness functional to evaluate, with its parameters.

    Parameters
    ----------
    kind : str
        One of ``M1`` ... ``M6`` (elementwise penalties) or ``HOYER``.
    sigma : float
        Shape parameter; must be positive for M2..M6.
    p : float
        Exponent for M2, in ``[0, 1)``.
    """

    kind: str = "M1"
    sigma: float = 1.0
    p: float = 0.5

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        if kind not in MEASURE_KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}; expected one of {MEASURE_KINDS}")
        if kind in ("M2", "M3", "M4", "M5", "M6") and not self.sigma > 0:
            raise ValueError(f"{kind} requires sigma > 0, got {self.sigma}")
        if kind == "M2" and not 0.0 <= self.p < 1.0:
            raise ValueError(f"M2 requires 0 <= p < 1, got {self.p}")

    @property
    def code(self) -> int:
        """Integer tag used by the compiled kernel (1..6, 7 for HOYER)."""
        return MEASURE_KINDS.index(self.kind) + 1


def sign(x):
    """Componentwise sign with ``sign(0) == 0``; works on scalars and arrays."""
    if np.ndim(x) == 0:
        x = float(x)
        return 1.0 if x > 0 else (-1.0 if x < 0 else 0.0)
    return np.sign(np.asarray(x, dtype=float))


def _g(kind: str, a: np.ndarray, sigma: float, p: float) -> np.ndarray:
    # a = |t|; every formula is evaluated on the magnitude
    if kind == "M1":
        return a
    if kind == "M2":
        return a / (a + sigma) ** (1.0 - p)
    if kind == "M3":
        return -np.expm1(-sigma * a)
    if kind == "M4":
        return np.log1p(sigma * a)
    if kind == "M5":
        return np.arctan(sigma * a)
    if kind == "M6":
        sa = sigma * a
        return np.where(a <= 1.0 / sigma, 2.0 * sa - sa * sa, 1.0)
    raise ValueError(f"{kind} is not an elementwise penalty")


def penalty(spec: MeasureSpec, t):
    """Evaluate the elementwise penalty ``G(t)`` selected by ``spec``.

    ``G`` is even and vanishes at zero for every kind. Accepts a scalar or
    an array; returns the same shape.
    """
    if spec.kind == "HOYER":
        raise ValueError("HOYER is a vector measure; use hoyer_sparsity")
    a = np.abs(np.asarray(t, dtype=float))
    out = _g(spec.kind, a, spec.sigma, spec.p)
    return float(out) if out.ndim == 0 else out


def penalty_sum(spec: MeasureSpec, w) -> float:
    """Sum of ``penalty(spec, w_i)`` over all taps."""
    w = np.asarray(w, dtype=float)
    if w.size == 0:
        raise ValueError("penalty_sum needs a non-empty vector")
    if spec.kind == "HOYER":
        return hoyer_sparsity(w)
    return float(np.sum(_g(spec.kind, np.abs(w), spec.sigma, spec.p)))


def hoyer_sparsity(w) -> float:
    """Normalized sparsity in ``[0, 1]``: 1 for one active tap, 0 for flat.

    The all-zero vector is assigned 0.
    """
    w = np.asarray(w, dtype=float)
    L = w.size
    if L <= 1:
        raise ValueError(f"sparsity needs a vector longer than 1, got length {L}")
    a = np.abs(w)
    peak = float(a.max())
    if peak == 0.0:
        return 0.0
    # normalize first: squaring tiny taps would underflow
    a = a / peak
    l2 = float(np.sqrt(np.dot(a, a)))
    l1 = float(np.sum(a))
    sqrt_l = math.sqrt(L)
    eps = L / (L - sqrt_l) * (1.0 - l1 / (sqrt_l * l2))
    return min(max(eps, 0.0), 1.0)
