"""Threshold-detector click statistics of zero-mean Gaussian states.

The four outcome probabilities of two threshold detectors are obtained by
inclusion-exclusion over vacuum overlaps of reduced states, which is exact
for zero-mean Gaussian inputs and needs no Fock truncation:

    p00 = Pr(vacuum on both arms)
    p01 = Pr(vacuum on arm H) - p00      (click on V only)
    p10 = Pr(vacuum on arm V) - p00      (click on H only)
    p11 = 1 - p00 - p01 - p10
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import (
    GaussianState,
    InterferometerConfig,
    InvalidStateError,
    build_interferometer,
)

__all__ = [
    "ClickDistribution",
    "ArmAssignment",
    "vacuum_probability",
    "click_distribution",
    "interferometer_arms",
    "interferometer_clicks",
    "fringe",
    "fringe_visibility",
    "overlap_for_visibility",
]

# Floating-point noise this far outside [0, 1] is clamped; anything larger
# indicates a model bug and raises.
_CLAMP_TOL = 1e-12
_SUM_TOL = 1e-10


@dataclass(frozen=True)
class ClickDistribution:
    """Probabilities of the four threshold-detector outcomes."""

    p00: float
    p01: float
    p10: float
    p11: float

    def __post_init__(self):
        for name in ("p00", "p01", "p10", "p11"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidStateError(f"{name} is not finite: {v}")
            if v < -_CLAMP_TOL or v > 1.0 + _CLAMP_TOL:
                raise InvalidStateError(f"{name} = {v} outside [0, 1] beyond tolerance")
            object.__setattr__(self, name, min(1.0, max(0.0, v)))
        total = self.p00 + self.p01 + self.p10 + self.p11
        if abs(total - 1.0) > _SUM_TOL:
            raise InvalidStateError(f"outcome probabilities sum to {total}, not 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.p00, self.p01, self.p10, self.p11])


@dataclass(frozen=True)
class ArmAssignment:
    """Which state modes feed the H and V threshold detectors."""

    arm_h: tuple[int, ...]
    arm_v: tuple[int, ...]

    def __post_init__(self):
        h, v = tuple(self.arm_h), tuple(self.arm_v)
        if not h or not v:
            raise ValueError("both arms must be nonempty")
        if set(h) & set(v):
            raise ValueError("arms must be disjoint")
        object.__setattr__(self, "arm_h", h)
        object.__setattr__(self, "arm_v", v)


def interferometer_arms() -> ArmAssignment:
    """Detector assignment for build_interferometer states: each detector sees
    both the matched and the mismatched component of its arm."""
    return ArmAssignment(arm_h=(0, 2), arm_v=(1, 3))


def vacuum_probability(state: GaussianState, modes) -> float:
    """Tr[rho_sub |0><0|] = 1/sqrt(det(sigma_sub + I/2)) for the reduced state."""
    sub = state.reduced(modes)
    if not np.all(np.isfinite(sub)):
        raise InvalidStateError("reduced covariance contains non-finite entries")
    m = sub + np.eye(sub.shape[0]) / 2.0
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise InvalidStateError("reduced covariance + I/2 is not positive definite") from exc
    p = float(1.0 / np.prod(np.diagonal(chol)))
    if not 0.0 <= p <= 1.0 + _CLAMP_TOL:
        raise InvalidStateError(f"vacuum probability {p} outside [0, 1]")
    return min(p, 1.0)


def click_distribution(
    state: GaussianState,
    arms: ArmAssignment,
    dark_h: float = 0.0,
    dark_v: float = 0.0,
) -> ClickDistribution:
    """Four-outcome distribution via inclusion-exclusion over vacuum overlaps.

    Optional per-detector dark-count probabilities are folded in as an
    independent Bernoulli OR on each click (off by default).
    """
    p00 = vacuum_probability(state, arms.arm_h + arms.arm_v)
    ph = vacuum_probability(state, arms.arm_h)
    pv = vacuum_probability(state, arms.arm_v)
    p01 = ph - p00
    p10 = pv - p00
    p11 = 1.0 - p00 - p01 - p10
    if dark_h or dark_v:
        if not (0.0 <= dark_h <= 1.0 and 0.0 <= dark_v <= 1.0):
            raise ValueError("dark-count probabilities must be in [0, 1]")
        q00 = p00 * (1 - dark_h) * (1 - dark_v)
        q01 = (1 - dark_h) * (p01 + p00 * dark_v)
        q10 = (1 - dark_v) * (p10 + p00 * dark_h)
        p00, p01, p10 = q00, q01, q10
        p11 = 1.0 - p00 - p01 - p10
    return ClickDistribution(p00=p00, p01=p01, p10=p10, p11=p11)


def interferometer_clicks(cfg: InterferometerConfig, phi: float) -> ClickDistribution:
    """Click distribution of the full pipeline at probe phase ``phi``."""
    return click_distribution(build_interferometer(cfg, phi), interferometer_arms())


def fringe(cfg: InterferometerConfig, phi_grid) -> np.ndarray:
    """Tabulate the four outcome probabilities over a phase grid, shape (N, 4)."""
    arms = interferometer_arms()
    return np.array(
        [click_distribution(build_interferometer(cfg, p), arms).as_array() for p in phi_grid]
    )


def fringe_visibility(cfg: InterferometerConfig, num_points: int = 721) -> float:
    """(max - min)/(max + min) of the coincidence fringe p11 over one period."""
    p11 = fringe(cfg, np.linspace(0.0, math.pi, num_points))[:, 3]
    hi, lo = float(p11.max()), float(p11.min())
    return (hi - lo) / (hi + lo)


def overlap_for_visibility(
    cfg: InterferometerConfig,
    target: float,
    lo: float = 0.5,
    tol: float = 1e-6,
    num_points: int = 721,
) -> float:
    """Mode-overlap amplitude reproducing a target p11 fringe visibility.

    Visibility is 1 at overlap 1 and decreases as the overlap shrinks, so a
    bisection on [lo, 1] recovers the overlap for any reachable target.
    """
    if not 0.0 < target <= 1.0:
        raise ValueError("target visibility must be in (0, 1]")
    hi = 1.0
    if fringe_visibility(cfg.with_updates(overlap=lo), num_points) > target:
        raise ValueError(f"target visibility {target} not reachable above overlap {lo}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if fringe_visibility(cfg.with_updates(overlap=mid), num_points) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
