"""Controllers that produce the zero-attractor step size ``kappa(n)``.

Three families:

* ``FIXED``    -- constant ``kappa0``.
* ``YOU``      -- starts large and shrinks by ``eta`` whenever a windowed
  error detector reports convergence, until it drops below ``kappa_min``.
* ``PROPOSED`` -- tracks the deviation of the filter's instantaneous
  sparseness from its exponentially averaged value and smooths its
  magnitude into ``kappa``. ``VSS1`` uses an elementwise penalty sum,
  ``VSS2`` the normalized l1/l2 sparsity.

All states are immutable; every step returns a new state.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .sparsity import MeasureSpec, penalty_sum

__all__ = [
    "CONTROLLERS",
    "VssParams",
    "StepSizeState",
    "fixed_state",
    "you_state",
    "proposed_state",
    "fixed_step",
    "you_step",
    "proposed_phi_update",
    "proposed_delta",
    "proposed_kappa_update",
    "proposed_step",
    "controller_step",
]

CONTROLLERS = ("FIXED", "YOU", "PROPOSED")


@dataclass(frozen=True)
class VssParams:
    """Controller parameters.

    ``lam``, ``alpha`` and ``gamma`` drive the proposed recursion; ``eta``,
    ``kappa_min`` and the ``conv_*`` fields drive the decay heuristic.
    """

    lam: float = 0.01
    alpha: float = 0.01
    gamma: float = 1.0
    kappa0: float = 0.0
    eta: float = 0.5
    kappa_min: float = 1e-6
    conv_short: int = 64
    conv_long: int = 1024
    conv_ratio: float = 0.98

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lam must lie in (0, 1), got {self.lam}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.kappa0 >= 0:
            raise ValueError(f"kappa0 must be nonnegative, got {self.kappa0}")
        if not 0.0 < self.eta < 1.0:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")
        if not self.kappa_min > 0:
            raise ValueError(f"kappa_min must be positive, got {self.kappa_min}")
        if not 1 <= self.conv_short <= self.conv_long:
            raise ValueError("need 1 <= conv_short <= conv_long")
        if not self.conv_ratio > 0:
            raise ValueError(f"conv_ratio must be positive, got {self.conv_ratio}")


@dataclass(frozen=True)
class StepSizeState:
    kind: str
    kappa: float
    phi: float = 0.0
    measure: MeasureSpec | None = None
    # YOU only: ring buffer of squared errors, samples seen, decay events
    e2: np.ndarray | None = None
    count: int = 0
    events: int = 0

    @property
    def variant(self) -> str | None:
        if self.kind != "PROPOSED":
            return None
        return "VSS2" if self.measure.kind == "HOYER" else "VSS1"


def fixed_state(kappa0: float) -> StepSizeState:
    if not kappa0 >= 0:
        raise ValueError(f"kappa0 must be nonnegative, got {kappa0}")
    return StepSizeState("FIXED", float(kappa0))


def you_state(params: VssParams) -> StepSizeState:
    return StepSizeState("YOU", params.kappa0, e2=np.zeros(params.conv_long))


def proposed_state(measure: MeasureSpec, params: VssParams, w0: np.ndarray) -> StepSizeState:
    """Initial state with ``phi(0) = J(w0)`` so the first deviation is zero."""
    return StepSizeState("PROPOSED", params.kappa0, phi=penalty_sum(measure, w0), measure=measure)


def fixed_step(state: StepSizeState) -> float:
    return state.kappa


def you_step(state: StepSizeState, e: float, params: VssParams) -> tuple[StepSizeState, float]:
    """Record ``e**2``; every ``conv_long`` samples run the convergence check.

    The check compares the mean squared error of the most recent
    ``conv_short`` samples with that of the last ``conv_long`` samples.
    A ratio at or below ``conv_ratio`` counts as a convergence event and
    multiplies ``kappa`` by ``eta``, unless ``kappa`` is already below
    ``kappa_min``.
    """
    n_long = params.conv_long
    e2 = state.e2.copy()
    e2[state.count % n_long] = e * e
    count = state.count + 1
    kappa, events = state.kappa, state.events
    if count % n_long == 0:
        # buffer is full and chronologically ordered: slot n_long-1 is newest
        long_mean = float(np.mean(e2))
        short_mean = float(np.mean(e2[n_long - params.conv_short:]))
        if long_mean > 0 and short_mean / long_mean <= params.conv_ratio and kappa >= params.kappa_min:
            kappa *= params.eta
            events += 1
    return replace(state, kappa=kappa, e2=e2, count=count, events=events), kappa


def proposed_phi_update(state: StepSizeState, j_now: float, params: VssParams) -> StepSizeState:
    """Exponential average of the sparseness measure."""
    return replace(state, phi=(1.0 - params.lam) * state.phi + params.lam * j_now)


def proposed_delta(state: StepSizeState, j_now: float) -> float:
    """Deviation of the current measure from the previous average (signed)."""
    return j_now - state.phi


def proposed_kappa_update(state: StepSizeState, delta: float, params: VssParams) -> tuple[StepSizeState, float]:
    kappa = (1.0 - params.alpha) * state.kappa + params.alpha * params.gamma * abs(delta)
    return replace(state, kappa=kappa), kappa


def proposed_step(state: StepSizeState, w: np.ndarray, params: VssParams) -> tuple[StepSizeState, float]:
    """One controller step on weights ``w``.

    The deviation is taken against the average from the previous sample,
    and only then is the average refreshed.
    """
    j_now = penalty_sum(state.measure, w)
    delta = proposed_delta(state, j_now)
    state = proposed_phi_update(state, j_now, params)
    return proposed_kappa_update(state, delta, params)


def controller_step(state: StepSizeState, w: np.ndarray, e: float, params: VssParams) -> tuple[StepSizeState, float]:
    """Dispatch to the controller named by ``state.kind``."""
    if state.kind == "FIXED":
        return state, fixed_step(state)
    if state.kind == "YOU":
        return you_step(state, e, params)
    if state.kind == "PROPOSED":
        return proposed_step(state, w, params)
    raise ValueError(f"unknown controller kind {state.kind!r}")
