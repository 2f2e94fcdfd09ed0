"""Backend selection for the per-sample filter loop.

The compiled extension ``zapvss._ckernel`` is used when it imports; otherwise
the pure-Python loop in ``zapvss._pykernel`` takes over. Set
``ZAPVSS_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import _pykernel
from .adaptive import ATTRACTORS
from .sparsity import MeasureSpec
from .stepsize import CONTROLLERS, VssParams, fixed_state, proposed_state, you_state

__all__ = ["BACKEND", "FilterSpec", "run_filter", "run_filter_python", "compiled_available"]

try:
    from ._ckernel import run_filter as _compiled_run_filter
except ImportError:  # extension not built
    _compiled_run_filter = None


def compiled_available() -> bool:
    return _compiled_run_filter is not None


if _compiled_run_filter is not None and os.environ.get("ZAPVSS_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "compiled"
    _run = _compiled_run_filter
else:
    BACKEND = "python"
    _run = _pykernel.run_filter


@dataclass(frozen=True)
class FilterSpec:
    """Everything one filter instance needs: update rule plus controller."""

    mu: float
    attractor: str = "NONE"
    beta: float = 5.0
    controller: str = "FIXED"
    measure: MeasureSpec = field(default_factory=MeasureSpec)
    vss: VssParams = field(default_factory=VssParams)

    def __post_init__(self):
        object.__setattr__(self, "attractor", self.attractor.upper())
        object.__setattr__(self, "controller", self.controller.upper())
        if self.attractor not in ATTRACTORS:
            raise ValueError(f"unknown attractor {self.attractor!r}")
        if self.controller not in CONTROLLERS:
            raise ValueError(f"unknown controller {self.controller!r}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.attractor == "L0" and not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    @property
    def attractor_code(self) -> int:
        return ATTRACTORS.index(self.attractor)

    @property
    def controller_code(self) -> int:
        return CONTROLLERS.index(self.controller)

    def initial_controller(self, w0: np.ndarray):
        if self.controller == "FIXED":
            return fixed_state(self.vss.kappa0)
        if self.controller == "YOU":
            return you_state(self.vss)
        return proposed_state(self.measure, self.vss, w0)


def run_filter(x, d, h_pre, h_post, switch_at: int, spec: FilterSpec):
    """Adapt one filter over a whole record.

    Returns ``(ratio, kappa, diverged_at)``. ``ratio[n]`` is
    ``||h - w||^2 / ||h||^2`` after the update at sample ``n``, against
    ``h_pre`` before ``switch_at`` and ``h_post`` from then on. ``kappa[n]``
    is the attractor step size used at sample ``n``. ``diverged_at`` is the
    first sample where the ratio became non-finite or exceeded 1e12, else
    -1; entries from that sample on are NaN.
    """
    return _run(x, d, h_pre, h_post, int(switch_at), spec)


def run_filter_python(x, d, h_pre, h_post, switch_at: int, spec: FilterSpec):
    """Always use the pure-Python loop."""
    return _pykernel.run_filter(x, d, h_pre, h_post, int(switch_at), spec)
