"""Coupled quantum-dot / pillar-microcavity reflection model.

All energies and rates are in ueV with hbar = 1, so energies and angular
frequencies are interchangeable. The probe drives the cavity through the
top mirror only; sidewall scattering, absorption and transmission through
the bottom mirror are lumped into a single extra loss rate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DegenerateModelError",
    "SystemParams",
    "QdState",
    "Spectrum",
    "reflection_amplitude",
    "reflectivity",
    "phase",
    "unwrapped_phase",
    "polariton_eigenvalues",
    "rabi_splitting",
    "coupling_regime",
    "q_factor",
]

_DENOMINATOR_FLOOR = 1e-300


class DegenerateModelError(ValueError):
    """Raised when the response denominator underflows to zero."""


def _check_finite(name, value):
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class SystemParams:
    """Rate and energy constants of the coupled dot-cavity system (ueV).

    Attributes
    ----------
    g : float
        Dot-cavity field coupling rate.
    kappa_top : float
        Photon decay rate through the top mirror (the outcoupling port).
    kappa_side : float
        All other photon loss (sidewalls, absorption, bottom mirror).
    gamma : float
        Linewidth of the quantum dot transition.
    omega_c : float
        Cavity resonance energy.
    """

    g: float
    kappa_top: float
    kappa_side: float
    gamma: float
    omega_c: float

    def __post_init__(self):
        for name in ("g", "kappa_top", "kappa_side", "gamma", "omega_c"):
            _check_finite(name, getattr(self, name))
        if self.g < 0:
            raise ValueError(f"g must be >= 0, got {self.g}")
        if self.kappa_top <= 0:
            raise ValueError(f"kappa_top must be > 0, got {self.kappa_top}")
        if self.kappa_side < 0:
            raise ValueError(f"kappa_side must be >= 0, got {self.kappa_side}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.omega_c <= 0:
            raise ValueError(f"omega_c must be > 0, got {self.omega_c}")

    @property
    def kappa_total(self) -> float:
        return self.kappa_top + self.kappa_side


@dataclass(frozen=True)
class QdState:
    """Quantum dot transition energy and whether it is coupled to the mode.

    ``coupled=False`` models the empty cavity (equivalent to g = 0).
    """

    omega_qd: float
    coupled: bool = True

    def __post_init__(self):
        _check_finite("omega_qd", self.omega_qd)
        if self.coupled and self.omega_qd <= 0:
            raise ValueError(f"omega_qd must be > 0 when coupled, got {self.omega_qd}")


@dataclass(frozen=True)
class Spectrum:
    """Ordered frequency grid with one real or complex value per point."""

    omega: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        values = np.asarray(self.values)
        if omega.ndim != 1 or values.ndim != 1:
            raise ValueError("omega and values must be one-dimensional")
        if omega.size != values.size:
            raise ValueError(
                f"length mismatch: {omega.size} omega vs {values.size} values"
            )
        if omega.size < 2:
            raise ValueError("a spectrum needs at least 2 points")
        if not np.all(np.isfinite(omega)):
            raise ValueError("omega grid must be finite")
        if not np.all(np.diff(omega) > 0):
            raise ValueError("omega grid must be strictly increasing")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.omega.size


def _amplitude(g, kappa_top, kappa_side, gamma, omega_c, omega_qd, omega):
    """Raw reflection amplitude without parameter validation.

    Accepts scalar or ndarray ``omega`` (and broadcastable parameters);
    used directly by the fitting code where finite-difference probes may
    step slightly outside the physical domain.
    """
    d_c = 1j * (omega_c - omega) + 0.5 * (kappa_top + kappa_side)
    if np.all(g == 0):
        # QD factor cancels algebraically; evaluating the cancelled form
        # keeps the empty-cavity and g=0 paths bit-identical.
        if np.any(np.abs(d_c) < _DENOMINATOR_FLOOR):
            raise DegenerateModelError("cavity response denominator underflow")
        return 1.0 - kappa_top / d_c
    d_qd = 1j * (omega_qd - omega) + 0.5 * gamma
    den = d_qd * d_c + g * g
    if np.any(np.abs(den) < _DENOMINATOR_FLOOR):
        raise DegenerateModelError("coupled response denominator underflow")
    return 1.0 - kappa_top * d_qd / den


def principal_angle(z):
    """Argument in (-pi, pi]: the -pi branch edge maps to +pi."""
    ang = np.angle(z)
    ang = np.where(ang == -np.pi, np.pi, ang)
    return float(ang) if np.ndim(z) == 0 else ang


def reflection_amplitude(p: SystemParams, qd: QdState, omega):
    """Complex reflection amplitude r(omega) of the driven system.

    The single-sided input-output relation for a two-level emitter coupled
    to a lossy cavity mode, probed through the top mirror:

        r = 1 - kappa_top * (i*(omega_qd - omega) + gamma/2) / D
        D = (i*(omega_qd - omega) + gamma/2)
            * (i*(omega_c - omega) + (kappa_top + kappa_side)/2) + g**2

    Parameters
    ----------
    p : SystemParams
    qd : QdState
        With ``coupled=False`` the amplitude reduces to the empty cavity.
    omega : float or ndarray
        Probe energy (ueV).

    Returns
    -------
    complex or ndarray of complex
    """
    g = p.g if qd.coupled else 0.0
    return _amplitude(
        g, p.kappa_top, p.kappa_side, p.gamma, p.omega_c, qd.omega_qd, omega
    )


def reflectivity(p: SystemParams, qd: QdState, omega):
    """|r(omega)|^2, a fraction in [0, 1] for any passive parameter set."""
    r = reflection_amplitude(p, qd, omega)
    return np.abs(r) ** 2


def phase(p: SystemParams, qd: QdState, omega):
    """Principal-value reflection phase in (-pi, pi].

    The argument of an exactly zero amplitude is reported as 0 with a
    warning (the critically coupled dark point).
    """
    r = reflection_amplitude(p, qd, omega)
    if np.any(r == 0):
        warnings.warn("zero reflection amplitude, phase reported as 0")
    return principal_angle(r)


def unwrapped_phase(p: SystemParams, qd: QdState, omega):
    """Reflection phase along a grid with 2*pi jumps removed.

    ``omega`` must be an ordered grid; branch selection is by nearest-value
    continuation from the first point.
    """
    r = reflection_amplitude(p, qd, np.asarray(omega, dtype=float))
    return np.unwrap(np.angle(r))


def polariton_eigenvalues(p: SystemParams, qd: QdState):
    """Complex energies of the two dressed states.

    Eigenvalues of ``[[omega_qd - i*gamma/2, g], [g, omega_c - i*K/2]]``
    with K the total cavity loss, ordered by ascending real part (ties by
    ascending imaginary part).
    """
    if not qd.coupled:
        raise ValueError("polariton eigenvalues require a coupled dot")
    a = qd.omega_qd - 0.5j * p.gamma
    b = p.omega_c - 0.5j * p.kappa_total
    mean = 0.5 * (a + b)
    half = 0.5 * (a - b)
    s = np.sqrt(complex(half * half + p.g * p.g))
    lo, hi = mean - s, mean + s
    if (lo.real, lo.imag) > (hi.real, hi.imag):
        lo, hi = hi, lo
    return lo, hi


def rabi_splitting(p: SystemParams) -> float:
    """Real-part separation of the dressed states at zero detuning.

    Returns 0 when the discriminant is non-positive (weak coupling, the
    dressed energies collapse onto the common resonance).
    """
    disc = p.g * p.g - (p.kappa_total - p.gamma) ** 2 / 16.0
    if disc <= 0:
        return 0.0
    return 2.0 * np.sqrt(disc)


def coupling_regime(p: SystemParams) -> str:
    """Classify as ``"strong"`` iff g > (kappa_top + kappa_side + gamma)/4."""
    return "strong" if p.g > (p.kappa_total + p.gamma) / 4.0 else "weak"


def q_factor(p: SystemParams) -> float:
    """Quality factor omega_c / (kappa_top + kappa_side)."""
    return p.omega_c / p.kappa_total
