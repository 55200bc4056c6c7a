"""Fisher information of the four-outcome measurement and loss thresholds.

The per-trial Fisher information is F(phi) = sum_ij (d p_ij/d phi)^2 / p_ij,
estimated by central differences with a guard for outcomes whose probability
(and, at fringe extrema, derivative) vanishes. Per-photon quantities divide by
the mean photon number that passes through the sample, 2 sinh^2(r1) per trial
under the default single-pass accounting.

Closed forms for the ideal scheme and for the NOON-state baselines live here
alongside their numeric rediscovery (threshold_tm_numeric), which bisects the
full lossy pipeline against the shot-noise baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .detection import ClickDistribution, interferometer_clicks
from .gaussian import InterferometerConfig

__all__ = [
    "FisherReport",
    "NoonBaseline",
    "BracketError",
    "ACCOUNTINGS",
    "fisher_per_trial",
    "fisher_max_ideal",
    "heisenberg_sensitivity",
    "threshold_tm",
    "threshold_tm_numeric",
    "threshold_noon",
    "noon_fisher_per_photon",
    "photons_through_sample",
    "interferometer_model",
    "max_fisher",
    "fisher_sweep",
]

ACCOUNTINGS = ("single-pass", "double-pass")

# Outcomes below this probability contribute through the guarded limit
# (dp)^2 / max(p, guard); at fringe extrema dp vanishes too, so the limit is 0.
_P_GUARD = 1e-12

Model = Callable[[float], ClickDistribution]


class BracketError(RuntimeError):
    """A root search found no sign change over the allowed bracket."""


@dataclass(frozen=True)
class FisherReport:
    """Per-phase Fisher information with the per-photon normalization."""

    phi: float
    fisher_per_trial: float
    mean_photons_through_sample: float
    fisher_per_photon: float
    snl_per_photon: float
    enhancement_db: float


@dataclass(frozen=True)
class NoonBaseline:
    """Ideal N-photon NOON-state benchmark under the N/2 photon accounting."""

    n_photons: int
    eta: float
    fisher_per_photon: float
    threshold: float

    @classmethod
    def build(cls, n_photons: int, eta: float) -> "NoonBaseline":
        return cls(
            n_photons=n_photons,
            eta=eta,
            fisher_per_photon=noon_fisher_per_photon(n_photons, eta),
            threshold=threshold_noon(n_photons),
        )


def fisher_per_trial(model: Model, phi: float, h: float = 1e-4) -> float:
    """Central-difference estimate of the four-outcome Fisher information."""
    if not 0.0 < h <= 0.01:
        raise ValueError(f"step size must be in (0, 0.01], got {h}")
    p0 = model(phi).as_array()
    dp = (model(phi + h).as_array() - model(phi - h).as_array()) / (2.0 * h)
    if not (np.all(np.isfinite(p0)) and np.all(np.isfinite(dp))):
        raise ValueError("model returned non-finite probabilities")
    total = float(np.sum(dp * dp / np.maximum(p0, _P_GUARD)))
    return max(total, 0.0)


def fisher_max_ideal(r: float) -> float:
    """Optimal per-trial Fisher information of the lossless scheme: 4 sinh^2(2r)."""
    if r < 0:
        raise ValueError(f"squeezing parameter must be >= 0, got {r}")
    return 4.0 * math.sinh(2.0 * r) ** 2


def heisenberg_sensitivity(n_bar: float) -> float:
    """Optimal phase uncertainty per trial, 1/(2 sqrt(nbar(nbar+2)))."""
    if n_bar <= 0:
        raise ValueError(f"mean photon number must be > 0, got {n_bar}")
    return 1.0 / (2.0 * math.sqrt(n_bar * (n_bar + 2.0)))


def threshold_tm(n_bar: float) -> float:
    """Detection efficiency above which the scheme beats the shot-noise limit."""
    if n_bar < 0:
        raise ValueError(f"mean photon number must be >= 0, got {n_bar}")
    return 1.0 - math.sqrt(1.0 - 1.0 / (2.0 * (n_bar + 2.0)))


def threshold_noon(n_photons: int) -> float:
    """NOON-state efficiency threshold (1/N)^(1/N); tends to 1 as N grows."""
    if n_photons < 1:
        raise ValueError(f"photon number must be >= 1, got {n_photons}")
    return (1.0 / n_photons) ** (1.0 / n_photons)


def noon_fisher_per_photon(n_photons: int, eta: float) -> float:
    """2N eta^N: ideal NOON fringe F = N^2 eta^N per state over N/2 photons."""
    if n_photons < 1:
        raise ValueError(f"photon number must be >= 1, got {n_photons}")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"efficiency must be in [0, 1], got {eta}")
    return 2.0 * n_photons * eta**n_photons


def photons_through_sample(cfg: InterferometerConfig, accounting: str = "single-pass") -> float:
    """Mean photons crossing the sample per trial: the first-pass squeezed
    state carries 2 sinh^2(r1); double-pass accounting counts it twice."""
    if accounting not in ACCOUNTINGS:
        raise ValueError(f"accounting must be one of {ACCOUNTINGS}, got {accounting!r}")
    n_bar = 2.0 * math.sinh(cfg.r1) ** 2
    return 2.0 * n_bar if accounting == "double-pass" else n_bar


def interferometer_model(cfg: InterferometerConfig) -> Model:
    """phi -> ClickDistribution for the configured pipeline."""
    return lambda phi: interferometer_clicks(cfg, phi)


def _golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float]:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    best_x, best_f = (c, fc) if fc >= fd else (d, fd)
    while b - a > tol:
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        else:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        if fc > best_f:
            best_x, best_f = c, fc
        if fd > best_f:
            best_x, best_f = d, fd
    return best_x, best_f


def max_fisher(
    model: Model,
    lo: float = 0.0,
    hi: float = math.pi,
    h: float = 1e-4,
    coarse: int = 721,
    tol: float = 1e-6,
) -> tuple[float, float]:
    """(phi*, F*) maximizing the per-trial Fisher information on [lo, hi].

    Coarse grid then golden-section refinement; returns the best point seen,
    which is robust to the removable dip the estimator has exactly at a
    fringe zero (where all derivatives vanish symmetrically).
    """
    grid = np.linspace(lo, hi, coarse)
    vals = [fisher_per_trial(model, p, h) for p in grid]
    i = int(np.argmax(vals))
    a = grid[max(0, i - 1)]
    b = grid[min(coarse - 1, i + 1)]
    x, fx = _golden_max(lambda p: fisher_per_trial(model, p, h), a, b, tol)
    if vals[i] >= fx:
        return float(grid[i]), float(vals[i])
    return float(x), float(fx)


def threshold_tm_numeric(
    cfg: InterferometerConfig,
    n_bar: float,
    tol: float = 1e-4,
    h: float = 1e-4,
    coarse: int = 721,
) -> float:
    """Rediscover the loss threshold by bisecting the full pipeline.

    Builds the symmetric lossless config at the squeezing giving ``n_bar``,
    then finds the arm efficiency where max_phi Fisher-per-photon crosses the
    shot-noise baseline carried by ``cfg``.
    """
    if n_bar < 0:
        raise ValueError(f"mean photon number must be >= 0, got {n_bar}")
    snl = cfg.snl_per_photon
    if snl <= 0.0:
        return 0.0
    r = math.asinh(math.sqrt(n_bar / 2.0))
    base = cfg.with_updates(r1=r, r2=r, eta_internal=1.0, overlap=1.0)

    def excess(eta: float) -> float:
        model = interferometer_model(base.with_updates(eta_h=eta, eta_v=eta))
        _, fmax = max_fisher(model, h=h, coarse=coarse, tol=max(tol, 1e-6))
        return fmax / n_bar - snl

    lo, hi = 1e-6, 1.0 - 1e-9
    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo > 0 or f_hi < 0:
        raise BracketError(
            f"no threshold bracket in (0, 1): excess({lo})={f_lo:.3g}, excess(1)={f_hi:.3g}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def fisher_sweep(
    cfg: InterferometerConfig,
    phi_grid: Iterable[float],
    h: float = 1e-4,
    accounting: str = "single-pass",
) -> list[FisherReport]:
    """Per-phase Fisher reports over a grid in [0, pi]."""
    phis = [float(p) for p in phi_grid]
    if any(p < 0.0 or p > math.pi + 1e-12 for p in phis):
        raise ValueError("phase grid must lie within [0, pi]")
    n_through = photons_through_sample(cfg, accounting)
    model = interferometer_model(cfg)
    reports = []
    for p in phis:
        f_trial = fisher_per_trial(model, p, h)
        f_photon = f_trial / n_through
        if f_photon > 0.0:
            db = 10.0 * math.log10(f_photon / cfg.snl_per_photon)
        else:
            db = -math.inf
        reports.append(
            FisherReport(
                phi=p,
                fisher_per_trial=f_trial,
                mean_photons_through_sample=n_through,
                fisher_per_photon=f_photon,
                snl_per_photon=cfg.snl_per_photon,
                enhancement_db=db,
            )
        )
    return reports
