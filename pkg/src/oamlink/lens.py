"""Ring-shaped circular-Airy phase lens.

The lens imposes the binary phase of a circular Airy envelope
``Ai[beta (r0 - r)] exp[alpha beta (r0 - r)]`` plus a term that flattens the
spherical wavefront arriving from the array ``d0`` upstream.  The wrapped
phase is realised as a stepped dielectric whose thickness follows from the
refractive index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _grid
from .errors import DomainError, UndersamplingError
from .specfun import airy_ai

__all__ = [
    "AiryLensSpec",
    "PhaseProfile",
    "ThicknessMap",
    "circular_airy_envelope",
    "airy_phase",
    "compensation_phase",
    "total_phase_profile",
    "thickness_map",
    "thickness_to_phase",
    "predict_focal_length",
    "predict_deflection",
]

TWO_PI = 2.0 * math.pi


def _wrap(phase):
    """Wrap to [0, 2 pi); mod of a tiny negative value would round to 2 pi."""
    a = np.mod(phase, TWO_PI)
    return np.where(a >= TWO_PI, 0.0, a)


@dataclass(frozen=True)
class AiryLensSpec:
    """Lens design parameters.

    Attributes
    ----------
    r0 : float
        Initial ring radius parameter in meters.
    beta : float
        Transverse scale in 1/m.
    alpha : float
        Exponential decay factor, 0 < alpha < 1.
    d0 : float
        Array-to-lens distance in meters.
    aperture_diameter : float
        Lens diameter in meters.
    phi0 : float
        Constant phase offset used only for fabrication thickness.
    epsilon_r, mu_r : float
        Relative permittivity and permeability of the dielectric (HDPE).
    """

    r0: float = 0.04
    beta: float = 29.0
    alpha: float = 0.1
    d0: float = 0.9
    aperture_diameter: float = 0.6
    phi0: float = 0.0
    epsilon_r: float = 2.9
    mu_r: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")
        if self.beta <= 0:
            raise DomainError("beta must be positive")
        if self.r0 < 0:
            raise DomainError("r0 must be non-negative")
        if self.d0 <= 0:
            raise DomainError("d0 must be positive")
        if self.refractive_index <= 1.0:
            raise DomainError("refractive index must exceed 1")
        if self.main_ring_radius >= self.aperture_diameter / 2:
            raise DomainError("brightest ring r0 + 1/beta must sit inside the aperture")

    @property
    def refractive_index(self) -> float:
        return math.sqrt(self.epsilon_r * self.mu_r)

    @property
    def aperture_radius(self) -> float:
        return self.aperture_diameter / 2

    @property
    def main_ring_radius(self) -> float:
        return self.r0 + 1.0 / self.beta


@dataclass(frozen=True, eq=False)
class PhaseProfile:
    """Sampled lens phase on the simulation grid.

    ``samples`` are wrapped to [0, 2 pi) and zero outside the aperture.  With
    ``absorbing_stop`` the region outside the aperture blocks the field
    instead of passing it.
    """

    samples: np.ndarray
    pitch: float
    aperture_radius: float
    absorbing_stop: bool = False

    @property
    def shape(self) -> tuple[int, int]:
        return self.samples.shape

    @property
    def extent(self) -> tuple[float, float]:
        ny, nx = self.samples.shape
        return nx * self.pitch, ny * self.pitch

    @property
    def center_index(self) -> tuple[int, int]:
        ny, nx = self.samples.shape
        return ny // 2, nx // 2

    def transmission(self) -> np.ndarray:
        t = np.exp(1j * self.samples)
        if self.absorbing_stop:
            t[_grid.radius(self.shape, self.pitch) > self.aperture_radius] = 0.0
        return t


@dataclass(frozen=True, eq=False)
class ThicknessMap:
    """Dielectric step heights realising a phase profile."""

    samples: np.ndarray
    pitch: float
    refractive_index: float
    wavelength: float
    phi0: float = 0.0
    base_offset: float = 0.0

    @property
    def full_wrap(self) -> float:
        """Height that delays the wave by one full cycle."""
        return self.wavelength / (self.refractive_index - 1.0)


def circular_airy_envelope(r, spec: AiryLensSpec):
    """Circular Airy amplitude ``Ai[beta (r0 - r)] exp[alpha beta (r0 - r)]``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be non-negative")
    s = spec.beta * (spec.r0 - r)
    return airy_ai(s) * np.exp(spec.alpha * s)


def airy_phase(r, spec: AiryLensSpec):
    """Binary phase of the envelope: 0 where it is non-negative, pi elsewhere."""
    env = circular_airy_envelope(r, spec)
    return np.where(env >= 0, 0.0, math.pi)


def compensation_phase(x, y, d0: float, k: float):
    """Spherical-wave compensation ``k (sqrt(d0^2 + x^2 + y^2) - d0)``."""
    if d0 <= 0:
        raise DomainError("d0 must be positive")
    r2 = np.asarray(x, dtype=float) ** 2 + np.asarray(y, dtype=float) ** 2
    # rationalised form keeps full relative precision near the axis
    return k * r2 / (np.sqrt(d0 * d0 + r2) + d0)


def total_phase_profile(
    spec: AiryLensSpec,
    k: float,
    pitch: float,
    shape: int | tuple[int, int] = 1024,
    airy_term: bool = True,
    absorbing_stop: bool = False,
) -> PhaseProfile:
    """Sample ``(phi_Airy + compensation) mod 2 pi`` over the aperture.

    Parameters
    ----------
    spec : AiryLensSpec
    k : float
        Wavenumber in rad/m.
    pitch : float
        Grid pitch; must not exceed a quarter wavelength.
    shape : int or (ny, nx)
        Grid size.
    airy_term : bool
        Set False to keep only the compensation phase.
    absorbing_stop : bool
        Block the field outside the aperture.
    """
    lam = TWO_PI / k
    if pitch > lam / 4 * (1 + 1e-12):
        raise UndersamplingError(f"pitch {pitch:g} m exceeds lambda/4 = {lam / 4:g} m")
    if isinstance(shape, int):
        shape = (shape, shape)
    x, y = _grid.mesh(shape, pitch)
    r = np.hypot(x, y)
    inside = r <= spec.aperture_radius
    phase = np.zeros(shape)
    phase[inside] = compensation_phase(x[inside], y[inside], spec.d0, k)
    if airy_term:
        phase[inside] += airy_phase(r[inside], spec)
    return PhaseProfile(_wrap(phase) * inside, pitch, spec.aperture_radius, absorbing_stop)


def thickness_map(profile: PhaseProfile, wavelength: float, eta: float, phi0: float = 0.0,
                  base_offset: float = 0.0) -> ThicknessMap:
    """Step heights ``((phi + phi0) mod 2 pi) / 2 pi * lambda / (eta - 1)``.

    ``base_offset`` adds a uniform backing layer.
    """
    if eta <= 1.0:
        raise DomainError("material with eta <= 1 cannot delay the wave")
    wrapped = _wrap(profile.samples + phi0)
    h = wrapped / TWO_PI * wavelength / (eta - 1.0) + base_offset
    return ThicknessMap(h, profile.pitch, eta, wavelength, phi0, base_offset)


def thickness_to_phase(thickness: ThicknessMap) -> np.ndarray:
    """Invert a thickness map back to phase, wrapped to [0, 2 pi)."""
    h = thickness.samples - thickness.base_offset
    phase = TWO_PI * (thickness.refractive_index - 1.0) * h / thickness.wavelength - thickness.phi0
    return _wrap(phase)


def predict_focal_length(spec: AiryLensSpec, k: float) -> float:
    """Auto-focus distance ``sqrt(4 k^2 (r0 + 1/beta) / beta^3)`` behind the lens."""
    if spec.beta <= 0:
        raise DomainError("beta must be positive")
    return math.sqrt(4.0 * k * k * spec.main_ring_radius / spec.beta**3)


def predict_deflection(beta: float, focal: float, k: float) -> float:
    """Main-lobe deflection ``beta^3 f^2 / (4 k^2)`` after distance ``focal``."""
    return beta**3 * focal * focal / (4.0 * k * k)
