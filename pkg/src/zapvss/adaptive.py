"""Per-sample LMS kernels with optional l0 / l1 zero attractors.

The functions here are state-in / state-out: a :class:`FilterState` is never
mutated, each update returns a fresh one. They are the readable reference
path; the compiled core in :mod:`zapvss.kernel` fuses the same arithmetic
into one loop.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ATTRACTORS",
    "FilterState",
    "AdaptParams",
    "push_sample",
    "filter_error",
    "lms_update",
    "zap_l0_update",
    "zap_l1_update",
    "attractor_term",
    "update",
]

ATTRACTORS = ("NONE", "L0", "L1")


@dataclass(frozen=True)
class FilterState:
    """Adaptive weights ``w`` and regressor window (most recent sample first)."""

    w: np.ndarray
    x_window: np.ndarray

    @classmethod
    def zeros(cls, L: int) -> "FilterState":
        if L < 1:
            raise ValueError(f"filter length must be positive, got {L}")
        return cls(np.zeros(L), np.zeros(L))

    @property
    def L(self) -> int:
        return self.w.size


@dataclass(frozen=True)
class AdaptParams:
    mu: float
    kappa: float = 0.0
    beta: float = 5.0
    attractor: str = "NONE"

    def __post_init__(self):
        object.__setattr__(self, "attractor", self.attractor.upper())
        if self.attractor not in ATTRACTORS:
            raise ValueError(f"attractor must be one of {ATTRACTORS}, got {self.attractor!r}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.kappa >= 0:
            raise ValueError(f"kappa must be nonnegative, got {self.kappa}")
        if self.attractor == "L0" and not self.beta > 0:
            raise ValueError(f"beta must be positive for the l0 attractor, got {self.beta}")


def push_sample(state: FilterState, x_new: float) -> FilterState:
    """Shift the regressor by one, inserting ``x_new`` at position 0."""
    if not math.isfinite(x_new):
        raise ValueError(f"input sample must be finite, got {x_new}")
    window = np.empty_like(state.x_window)
    window[0] = x_new
    window[1:] = state.x_window[:-1]
    return FilterState(state.w, window)


def filter_error(state: FilterState, d: float) -> float:
    """A-priori error ``d - x_n . w``."""
    return float(d - np.dot(state.x_window, state.w))


def _gradient_step(state: FilterState, e: float, mu: float) -> np.ndarray:
    return state.w + (mu * e) * state.x_window


def lms_update(state: FilterState, e: float, params: AdaptParams) -> FilterState:
    """``w <- w + mu e x_n``."""
    return FilterState(_gradient_step(state, e, params.mu), state.x_window)


def attractor_term(w: np.ndarray, params: AdaptParams) -> np.ndarray:
    """The amount subtracted from ``w`` by the zero attractor.

    l1: ``kappa sgn(w)``; l0: ``kappa beta sgn(w) exp(-beta |w|)``.
    """
    if params.attractor == "L1":
        return params.kappa * np.sign(w)
    if params.attractor == "L0":
        return (params.kappa * params.beta) * np.sign(w) * np.exp(-params.beta * np.abs(w))
    return np.zeros_like(w)


def zap_l0_update(state: FilterState, e: float, params: AdaptParams) -> FilterState:
    """LMS step plus the exponential (l0 surrogate) zero attractor.

    The attractor is evaluated on the weights before the gradient step. No
    clipping is applied, so a tap may cross zero in one step.
    """
    w = _gradient_step(state, e, params.mu) - attractor_term(state.w, params)
    return FilterState(w, state.x_window)


def zap_l1_update(state: FilterState, e: float, params: AdaptParams) -> FilterState:
    """LMS step minus ``kappa sgn(w_prev)``; may overshoot zero."""
    w = _gradient_step(state, e, params.mu) - params.kappa * np.sign(state.w)
    return FilterState(w, state.x_window)


def update(state: FilterState, e: float, params: AdaptParams) -> FilterState:
    """Dispatch on ``params.attractor``."""
    if params.attractor == "L0":
        return zap_l0_update(state, e, params)
    if params.attractor == "L1":
        return zap_l1_update(state, e, params)
    return lms_update(state, e, params)
