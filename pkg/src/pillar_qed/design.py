"""Conditional phase spectra and outcoupling-rate design sweeps.

The conditional phase compares the reflection with the dot resonantly
coupled against the empty cavity. A spin-photon interface wants this
difference to exceed pi/2; raising the top-mirror rate past the parasitic
loss flips the sign of the empty-cavity on-resonance amplitude and buys a
pi conditional phase at resonance, at the price of reflectivity.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .interferometer import BackgroundModel, apply_background
from .scattering import (
    QdState,
    Spectrum,
    SystemParams,
    principal_angle,
    reflection_amplitude,
)

__all__ = [
    "DesignPoint",
    "conditional_phase_spectrum",
    "relative_phase",
    "max_conditional_phase",
    "sweep_kappa",
    "interface_feasible",
]

logger = logging.getLogger(__name__)

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DesignPoint:
    """Figure of merit of one parameter set at zero dot-cavity detuning."""

    params: SystemParams
    max_conditional_phase: float
    argmax_omega: float
    on_resonance_reflectivity: float
    feasible: bool

    def __post_init__(self):
        if not (0.0 <= self.max_conditional_phase <= np.pi + 1e-12):
            raise ValueError("max conditional phase must lie in [0, pi]")
        if not (0.0 <= self.on_resonance_reflectivity <= 1.0 + 1e-12):
            raise ValueError("reflectivity must lie in [0, 1]")


def _amplitude_pair(p: SystemParams, omega_qd: float, omega, bg: BackgroundModel | None):
    r_d = reflection_amplitude(p, QdState(omega_qd, coupled=True), omega)
    r_c = reflection_amplitude(p, QdState(omega_qd, coupled=False), omega)
    if bg is not None:
        r_d = apply_background(r_d, bg)
        r_c = apply_background(r_c, bg)
    return r_d, r_c


def conditional_phase_spectrum(
    p: SystemParams, omega_qd: float, grid, bg: BackgroundModel | None = None
) -> Spectrum:
    """Unwrapped coupled phase minus unwrapped empty-cavity phase per point.

    With an overcoupled top mirror the empty-cavity phase winds by 2*pi
    across resonance while the coupled one does not, so the unwrapped
    difference approaches 2*pi at the upper grid edge instead of closing
    to zero; :func:`relative_phase` gives the principal-valued pointwise
    difference instead.
    """
    grid = np.asarray(grid, dtype=float)
    r_d, r_c = _amplitude_pair(p, omega_qd, grid, bg)
    values = np.unwrap(np.angle(r_d)) - np.unwrap(np.angle(r_c))
    return Spectrum(grid, values)


def relative_phase(p: SystemParams, omega_qd: float, omega, bg: BackgroundModel | None = None):
    """Principal-valued phase of the coupled amplitude relative to the empty one.

    ``angle(r_coupled * conj(r_empty))`` in (-pi, pi], per point.
    """
    r_d, r_c = _amplitude_pair(p, omega_qd, omega, bg)
    return principal_angle(r_d * np.conj(r_c))


def max_conditional_phase(
    p: SystemParams,
    omega_qd: float | None = None,
    bg: BackgroundModel | None = None,
    grid_points: int = 20001,
    span_factor: float = 5.0,
):
    """Largest conditional phase magnitude and where it occurs.

    Scans ``omega_c +- span_factor * (kappa_top + kappa_side)`` on a dense
    grid and refines the best point by golden-section search. The returned
    magnitude lies in [0, pi]. ``omega_qd`` defaults to zero detuning.
    """
    if omega_qd is None:
        omega_qd = p.omega_c
    span = span_factor * p.kappa_total
    grid = np.linspace(p.omega_c - span, p.omega_c + span, grid_points)

    def f(omega):
        return abs(relative_phase(p, omega_qd, omega, bg))

    magnitudes = np.abs(relative_phase(p, omega_qd, grid, bg))
    i = int(np.argmax(magnitudes))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid_points - 1)]

    # golden-section maximization on the bracket
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    tol = max(1e-9, 8.0 * np.finfo(float).eps * max(abs(a), abs(b)))
    for _ in range(200):
        if b - a < tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    best = 0.5 * (a + b)
    return float(f(best)), float(best)


def sweep_kappa(base: SystemParams, kappa_values) -> list:
    """One :class:`DesignPoint` per top-mirror rate, at zero detuning.

    g, kappa_side, gamma and omega_c are held fixed; output is sorted by
    kappa. Points where kappa is within 10% of 4*g are logged as matching
    the kappa/4 ~ g guideline.
    """
    points = []
    for kappa in sorted(float(k) for k in np.asarray(kappa_values, dtype=float)):
        p = replace(base, kappa_top=kappa)
        magnitude, argmax = max_conditional_phase(p)
        refl = float(
            np.abs(reflection_amplitude(p, QdState(p.omega_c, coupled=True), p.omega_c)) ** 2
        )
        point = DesignPoint(
            params=p,
            max_conditional_phase=magnitude,
            argmax_omega=argmax,
            on_resonance_reflectivity=refl,
            feasible=magnitude > 0.5 * np.pi,
        )
        if abs(kappa - 4.0 * base.g) <= 0.1 * 4.0 * base.g:
            logger.info("kappa=%.4g matches the kappa/4 ~ g guideline", kappa)
        points.append(point)
    return points


def interface_feasible(point: DesignPoint) -> bool:
    """True iff the maximal conditional phase exceeds pi/2."""
    return point.max_conditional_phase > 0.5 * np.pi
