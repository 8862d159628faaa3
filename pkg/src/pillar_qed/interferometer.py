"""Two-beam polarization interferometer and mode-matching background model.

One arm carries the cavity reflection (H), the other a reference
reflection from the unetched planar region (V). A variable retarder sets
the static phase offset between the arms; a 50:50 analysis mixes them into
D and A channels whose difference reads out the reflection phase.
Un-modematched light adds a coherent, spectrally flat field that dilutes
the measured dip depth and phase.
"""

from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass

import numpy as np

from .scattering import QdState, Spectrum, SystemParams, reflection_amplitude

__all__ = [
    "BackgroundInversionError",
    "NoSolutionError",
    "ChannelRecord",
    "ReferenceArm",
    "BackgroundModel",
    "quadrature_offset",
    "simulate_channels",
    "extract_phase",
    "fringe_phase",
    "conditional_fringe_phase",
    "calibrate_bias",
    "apply_background",
    "invert_background",
    "measured_intensity",
    "dip_visibility",
    "infer_background_fraction",
]

_CLAMP_TOL = 1e-9


class BackgroundInversionError(ValueError):
    """Background fraction too close to 1 to invert stably."""


class NoSolutionError(ValueError):
    """No background fraction reproduces the requested visibility."""


@dataclass(frozen=True)
class ReferenceArm:
    """Reference reflection amplitude and retarder offset (radians).

    ``sb_offset`` is the static phase the retarder adds to the signal arm.
    The quadrature point ``quadrature_offset(beta)`` zeroes the fringe for
    a far-detuned (unity, zero-phase) signal reflection.
    """

    beta: complex
    sb_offset: float = 0.0

    def __post_init__(self):
        beta = complex(self.beta)
        mag = abs(beta)
        if not (0.0 < mag <= 1.0):
            raise ValueError(f"|beta| must be in (0, 1], got {mag}")
        if not np.isfinite(self.sb_offset):
            raise ValueError("sb_offset must be finite")
        object.__setattr__(self, "beta", beta)

    @property
    def bias(self) -> float:
        """Residual phase offset from the quadrature point."""
        return self.sb_offset - cmath.phase(self.beta) + 0.5 * np.pi


@dataclass(frozen=True)
class BackgroundModel:
    """Coherent un-modematched admixture: intensity fraction and phase."""

    fraction: float
    phase: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.fraction < 1.0):
            raise ValueError(f"background fraction must be in [0, 1), got {self.fraction}")
        if not np.isfinite(self.phase):
            raise ValueError("background phase must be finite")

    @property
    def field(self) -> complex:
        return np.sqrt(self.fraction) * np.exp(1j * self.phase)


@dataclass(frozen=True)
class ChannelRecord:
    """Detector intensities at one probe energy (or arrays over a grid).

    Normalization: a far-detuned unit signal gives h = 1 when the
    background is absent.
    """

    omega: float
    h: float
    v: float
    d: float
    a: float

    def __post_init__(self):
        for name in ("h", "v", "d", "a"):
            if np.any(np.asarray(getattr(self, name)) < 0):
                raise ValueError(f"channel {name} must be non-negative")


def quadrature_offset(beta) -> float:
    """Retarder setting that zeroes the fringe for a far-detuned signal.

    This is the software analogue of nulling the difference channel before
    a scan: with this offset the calibrated fringe reads sin(phase).
    """
    return cmath.phase(complex(beta)) - 0.5 * np.pi


def simulate_channels(r, ref: ReferenceArm, omega=0.0) -> ChannelRecord:
    """Detector intensities produced by signal amplitude ``r``.

    With E_H = r * exp(i*sb_offset) and E_V = beta:

        h = |E_H|^2, v = |E_V|^2,
        d = |E_H + E_V|^2 / 2, a = |E_H - E_V|^2 / 2,

    so d + a = h + v and d - a = 2*|r||beta|*sin(phi + bias) once the
    offset sits at the quadrature point (bias = 0).

    ``r`` may be a scalar or an ndarray matching ``omega``.
    """
    e_h = np.asarray(r, dtype=complex) * np.exp(1j * ref.sb_offset)
    e_v = ref.beta
    h = np.abs(e_h) ** 2
    v = np.abs(e_v) ** 2 * np.ones_like(h)
    d = 0.5 * np.abs(e_h + e_v) ** 2
    a = 0.5 * np.abs(e_h - e_v) ** 2
    if np.ndim(r) == 0:
        omega, h, v, d, a = (float(x) for x in (omega, h, v, d, a))
    return ChannelRecord(omega=omega, h=h, v=v, d=d, a=a)


def _normalized_fringe(rec: ChannelRecord, denom):
    s = (rec.d - rec.a) / denom
    over = np.max(np.abs(s)) - 1.0
    if over > _CLAMP_TOL:
        warnings.warn(
            f"inconsistent channel record: normalized fringe exceeds 1 by {over:.3e}, clamping"
        )
    return np.clip(s, -1.0, 1.0)


def extract_phase(rec: ChannelRecord, ref: ReferenceArm):
    """Recover the signal reflection phase from one channel record.

    Returns ``asin((d - a) / (2*sqrt(h*v))) - bias`` where the bias is the
    reference arm's deviation from the quadrature point. Valid branch for
    true phases in (-pi/2, pi/2); inconsistent records (normalized fringe
    beyond 1 + 1e-9) are clamped with a warning.
    """
    if np.any(np.asarray(rec.h) <= 0) or np.any(np.asarray(rec.v) <= 0):
        raise ValueError("phase extraction requires h > 0 and v > 0")
    s = _normalized_fringe(rec, 2.0 * np.sqrt(rec.h * rec.v))
    return np.arcsin(s) - ref.bias


def fringe_phase(rec: ChannelRecord):
    """Fringe phase normalized by the monitor channels alone.

    Returns ``asin((d - a) / sqrt(h*v))``, the convention in which the
    difference channel is read as sqrt(h*v)*sin(phi). Because the physical
    fringe amplitude of the ideal 50:50 analysis is 2*sqrt(h*v), this
    equals asin(2*sin(phi_true)) for a quadrature-calibrated reference,
    about twice the true reflection phase for small angles. Conditional
    phase shifts quoted from fringe readouts use this convention.
    """
    if np.any(np.asarray(rec.h) <= 0) or np.any(np.asarray(rec.v) <= 0):
        raise ValueError("phase extraction requires h > 0 and v > 0")
    s = _normalized_fringe(rec, np.sqrt(rec.h * rec.v))
    return np.arcsin(s)


def conditional_fringe_phase(r_coupled, r_empty, ref: ReferenceArm):
    """Fringe-convention phase difference between two signal amplitudes.

    Simulates both amplitudes through the same reference arm and subtracts
    the fringe phases; this is the readout-level analogue of the
    conditional phase shift.
    """
    rec_c = simulate_channels(r_coupled, ref)
    rec_e = simulate_channels(r_empty, ref)
    return fringe_phase(rec_c) - fringe_phase(rec_e)


def calibrate_bias(rec: ChannelRecord) -> float:
    """Estimate the residual bias from the far-detuned edges of a scan.

    Takes the median of the extracted raw phase over the outer decile of
    grid points on each side, where the signal phase is near zero. The
    estimate carries the residual reflection phase at the window edges.
    """
    h = np.asarray(rec.h, dtype=float)
    if h.ndim != 1 or h.size < 5:
        raise ValueError("edge calibration needs a gridded record with >= 5 points")
    s = _normalized_fringe(rec, 2.0 * np.sqrt(rec.h * rec.v))
    k = max(1, h.size // 10)
    edges = np.concatenate([s[:k], s[-k:]])
    return float(np.median(np.arcsin(edges)))


def apply_background(r, bg: BackgroundModel):
    """Mix a coherent, frequency-flat background field into ``r``.

    Returns ``sqrt(b)*exp(i*phase) + sqrt(1-b)*r`` with b the intensity
    fraction of un-modematched light in the collected signal.
    """
    return bg.field + np.sqrt(1.0 - bg.fraction) * np.asarray(r, dtype=complex)


def invert_background(m, bg: BackgroundModel):
    """Exact algebraic inverse of :func:`apply_background`."""
    scale = 1.0 / np.sqrt(1.0 - bg.fraction)
    if scale > 1e6:
        raise BackgroundInversionError(
            f"background fraction {bg.fraction} amplifies noise by {scale:.2e}"
        )
    return (np.asarray(m, dtype=complex) - bg.field) * scale


def measured_intensity(p: SystemParams, qd: QdState, omega, bg: BackgroundModel | None = None):
    """Recorded intensity |sqrt(b)*e^{i*phase} + sqrt(1-b)*r(omega)|^2."""
    r = reflection_amplitude(p, qd, omega)
    if bg is not None:
        r = apply_background(r, bg)
    return np.abs(r) ** 2


def _edge_baseline(values: np.ndarray) -> float:
    k = max(1, values.size // 10)
    return float(np.median(np.concatenate([values[:k], values[-k:]])))


def dip_visibility(s: Spectrum) -> float:
    """Fractional depth of the deepest dip relative to the edge baseline.

    The baseline is the median intensity over the outer decile of grid
    points on each side of the scan window.
    """
    if len(s) < 5:
        raise ValueError("visibility needs at least 5 points")
    values = np.asarray(s.values, dtype=float)
    baseline = _edge_baseline(values)
    if baseline <= 0:
        raise ValueError(f"non-positive baseline {baseline}")
    return 1.0 - float(np.min(values)) / baseline


def infer_background_fraction(
    observed_visibility: float,
    p: SystemParams,
    qd: QdState,
    grid=None,
    background_phase: float = 0.0,
    tol: float = 1e-6,
) -> float:
    """Background fraction whose synthesized dip matches a visibility.

    Bisection on b in [0, 1): a coherent zero-phase background dilutes the
    dip monotonically, so the observed visibility pins b. Raises
    :class:`NoSolutionError` when even the intrinsic spectrum (b = 0) is
    shallower than the observation.
    """
    if not (0.0 < observed_visibility < 1.0):
        raise ValueError("observed visibility must be in (0, 1)")
    if grid is None:
        grid = np.linspace(p.omega_c - 100.0, p.omega_c + 100.0, 2001)
    grid = np.asarray(grid, dtype=float)

    def vis(b: float) -> float:
        bg = BackgroundModel(b, background_phase)
        return dip_visibility(Spectrum(grid, measured_intensity(p, qd, grid, bg)))

    lo, hi = 0.0, 1.0 - 1e-9
    if vis(lo) < observed_visibility:
        raise NoSolutionError(
            f"intrinsic visibility {vis(lo):.4f} below observed {observed_visibility:.4f}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if vis(mid) > observed_visibility:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
