"""Scalar diffraction from the array through the lens to the receive region.

The array is radiated onto the lens plane by direct spherical-wave summation,
the lens acts as a thin phase screen, and the field beyond it is carried by a
band-limited angular-spectrum propagator.  Time dependence is ``e^{+j w t}``
so forward propagation multiplies each plane wave by ``e^{-j k_z dz}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from typing import Mapping, Sequence

import numpy as np
import scipy.fft as sfft

from . import _grid
from .array import ConcentricArray
from .errors import DomainError, GeometryError, PropagationError, UndefinedChargeError
from .lens import PhaseProfile

__all__ = [
    "FieldGrid",
    "LongitudinalScan",
    "Focus",
    "radiate_to_plane",
    "apodize",
    "apply_phase_screen",
    "band_limit",
    "angular_spectrum_propagate",
    "AngularSpectrum",
    "disc_power",
    "longitudinal_scan",
    "find_focus",
    "vortex_charge",
    "SCAN_COLUMNS",
]

TWO_PI = 2.0 * math.pi
# fraction of propagating spectral energy the band limit may drop before we refuse
DEFAULT_MAX_DISCARD = 1e-2


@dataclass(frozen=True, eq=False)
class FieldGrid:
    """Complex scalar field on a transverse plane.

    Attributes
    ----------
    samples : ndarray
        Complex array indexed ``[iy, ix]``; both sizes powers of two.
    pitch : float
        Sample spacing in meters.
    z : float
        Plane position along the axis, measured from the array center.
    wavelength : float
    """

    samples: np.ndarray
    pitch: float
    z: float
    wavelength: float

    def __post_init__(self):
        if self.samples.ndim != 2:
            raise GeometryError("field samples must be two dimensional")
        ny, nx = self.samples.shape
        if not (_grid.is_power_of_two(nx) and _grid.is_power_of_two(ny)):
            raise GeometryError(f"grid {nx}x{ny} is not a power of two in both axes")
        if self.pitch <= 0:
            raise GeometryError("pitch must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return self.samples.shape

    @property
    def wavenumber(self) -> float:
        return TWO_PI / self.wavelength

    @property
    def window(self) -> tuple[float, float]:
        ny, nx = self.shape
        return nx * self.pitch, ny * self.pitch

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return _grid.mesh(self.shape, self.pitch)

    def power(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.pitch**2)

    def on_axis(self) -> complex:
        ny, nx = self.shape
        return complex(self.samples[ny // 2, nx // 2])

    def sample(self, x, y):
        return _grid.bilinear(self.samples, self.pitch, x, y)

    def with_samples(self, samples: np.ndarray, z: float | None = None) -> "FieldGrid":
        return replace(self, samples=samples, z=self.z if z is None else z)

    def __add__(self, other: "FieldGrid") -> "FieldGrid":
        _check_same_grid(self, other)
        return self.with_samples(self.samples + other.samples)


def _check_same_grid(a: FieldGrid, b: FieldGrid):
    if a.shape != b.shape or a.pitch != b.pitch or a.z != b.z or a.wavelength != b.wavelength:
        raise GeometryError("fields live on different grids")


def radiate_to_plane(
    array: ConcentricArray,
    z: float,
    shape: int | tuple[int, int] = 1024,
    pitch: float = 0.004,
    weights: Mapping[int, complex] | None = None,
    q: float = 0.0,
) -> FieldGrid:
    """Field of the active rings on the plane at distance ``z``.

    Every element contributes ``A e^{-jkd}/d`` with the exact element-to-sample
    distance ``d``; ``weights`` scales each mode (absent modes are off, the
    default drives all rings with weight 1).  ``q`` applies a ``cos^q``
    element factor.
    """
    lam = array.wavelength
    if z < 10 * lam:
        raise DomainError(f"plane at {z:g} m is closer than 10 wavelengths to the array")
    if isinstance(shape, int):
        shape = (shape, shape)
    k = array.wavenumber
    weights = {m: 1.0 for m in array.modes} if weights is None else weights
    x, y = _grid.mesh(shape, pitch)
    u = np.zeros(shape, dtype=complex)
    z2 = z * z
    for ring in array.rings:
        w = weights.get(ring.mode, 0.0)
        if w == 0:
            continue
        for (ex, ey), a in zip(ring.positions, ring.excitations):
            d = np.sqrt((x - ex) ** 2 + (y - ey) ** 2 + z2)
            contrib = np.exp(-1j * k * d) / d
            if q:
                contrib *= (z / d) ** q
            u += (w * a) * contrib
    return FieldGrid(u, pitch, z, lam)


def apodize(field: FieldGrid, inner_radius: float, outer_radius: float) -> FieldGrid:
    """Radial cos^2 taper from 1 at ``inner_radius`` to 0 at ``outer_radius``.

    Used as a guard band so the part of the incident spherical wave that
    would leave the periodic FFT window is removed before propagation.
    """
    if not 0 <= inner_radius < outer_radius:
        raise GeometryError("taper needs 0 <= inner < outer")
    r = _grid.radius(field.shape, field.pitch)
    t = np.clip((r - inner_radius) / (outer_radius - inner_radius), 0.0, 1.0)
    return field.with_samples(field.samples * np.cos(0.5 * math.pi * t) ** 2)


def apply_phase_screen(field: FieldGrid, profile: PhaseProfile) -> FieldGrid:
    """Multiply the field by the lens transmission ``e^{j phi}``."""
    if profile.shape != field.shape or not math.isclose(profile.pitch, field.pitch, rel_tol=1e-12):
        raise GeometryError(
            f"phase profile {profile.shape} @ {profile.pitch:g} m does not match "
            f"field {field.shape} @ {field.pitch:g} m"
        )
    return field.with_samples(field.samples * profile.transmission())


def band_limit(wavelength: float, delta_z: float, window: float) -> float:
    """Spatial-frequency limit (cycles/m) that keeps the ASM kernel alias free."""
    return 1.0 / (wavelength * math.sqrt((2.0 * delta_z / window) ** 2 + 1.0))


class AngularSpectrum:
    """Reusable spectrum of one input plane.

    Computing the FFT once lets a scan evaluate many distances cheaply.
    """

    def __init__(self, field: FieldGrid, max_discard: float = DEFAULT_MAX_DISCARD):
        self.field = field
        self.max_discard = max_discard
        ny, nx = field.shape
        self.fx = sfft.fftfreq(nx, field.pitch)
        self.fy = sfft.fftfreq(ny, field.pitch)
        self.spectrum = sfft.fft2(field.samples, workers=-1)
        inv_lam2 = 1.0 / field.wavelength**2
        f2 = self.fx[None, :] ** 2 + self.fy[:, None] ** 2
        self.propagating = f2 < inv_lam2
        self.kz = TWO_PI * np.sqrt(np.where(self.propagating, inv_lam2 - f2, 0.0))
        self._energy = np.abs(self.spectrum) ** 2
        self._prop_energy = float(np.sum(self._energy[self.propagating]))

    def mask(self, delta_z: float) -> np.ndarray:
        lx, ly = self.field.window
        lam = self.field.wavelength
        fxl = band_limit(lam, delta_z, lx)
        fyl = band_limit(lam, delta_z, ly)
        return self.propagating & (np.abs(self.fx)[None, :] <= fxl) & (np.abs(self.fy)[:, None] <= fyl)

    def discarded_fraction(self, delta_z: float) -> float:
        """Share of propagating energy the band limit removes at ``delta_z``."""
        if self._prop_energy == 0:
            return 0.0
        lost = self._prop_energy - float(np.sum(self._energy[self.mask(delta_z)]))
        return max(lost, 0.0) / self._prop_energy

    def propagate(self, delta_z: float) -> np.ndarray:
        if delta_z < 0:
            raise DomainError("only forward propagation (delta_z >= 0) is supported")
        if delta_z == 0:
            return self.field.samples.copy()
        lost = self.discarded_fraction(delta_z)
        if lost > self.max_discard:
            lam = self.field.wavelength
            raise PropagationError(
                f"band limit at dz = {delta_z:g} m ({band_limit(lam, delta_z, self.field.window[0]):.4g} "
                f"cycles/m) would drop {lost:.3g} of the propagating energy "
                f"(allowed {self.max_discard:g}); enlarge the window or taper the input"
            )
        h = np.where(self.mask(delta_z), np.exp(-1j * delta_z * self.kz), 0.0)
        return sfft.ifft2(self.spectrum * h, workers=-1)

    def field_at(self, delta_z: float) -> FieldGrid:
        return self.field.with_samples(self.propagate(delta_z), z=self.field.z + delta_z)


def angular_spectrum_propagate(field: FieldGrid, delta_z: float,
                               max_discard: float = DEFAULT_MAX_DISCARD) -> FieldGrid:
    """Propagate ``field`` forward by ``delta_z`` with the band-limited ASM.

    Raises
    ------
    PropagationError
        If the band limit for this window and distance would drop more than
        ``max_discard`` of the propagating spectral energy.
    """
    return AngularSpectrum(field, max_discard).field_at(delta_z)


def disc_power(samples: np.ndarray, pitch: float, radius: float) -> float:
    mask = _grid.radius(samples.shape, pitch) <= radius
    return float(np.sum(np.abs(samples[mask]) ** 2) * pitch**2)


SCAN_COLUMNS = ("z_m", "captured_power_w", "on_axis_intensity")


@dataclass(frozen=True, eq=False)
class LongitudinalScan:
    """Captured power and on-axis intensity against distance beyond the input plane."""

    z_values: np.ndarray
    captured_power: np.ndarray
    on_axis_intensity: np.ndarray
    capture_radius: float
    planes: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        n = len(self.z_values)
        if len(self.captured_power) != n or len(self.on_axis_intensity) != n:
            raise GeometryError("scan columns differ in length")
        if n > 1 and np.any(np.diff(self.z_values) <= 0):
            raise GeometryError("scan distances must increase strictly")

    def rows(self):
        return list(zip(self.z_values.tolist(), self.captured_power.tolist(), self.on_axis_intensity.tolist()))


@dataclass(frozen=True)
class Focus:
    """Result of :func:`find_focus`; ``at_boundary`` flags a peak on a scan end."""

    z: float
    index: int
    at_boundary: bool


def longitudinal_scan(
    field_at_lens_exit: FieldGrid,
    z_start: float,
    z_end: float,
    steps: int,
    capture_radius: float,
    keep: Sequence[float] = (),
    max_discard: float = DEFAULT_MAX_DISCARD,
) -> LongitudinalScan:
    """Propagate to ``steps`` evenly spaced planes and record the captured power.

    ``keep`` lists extra distances whose full planes are returned in
    ``scan.planes`` (keyed by distance).
    """
    if not z_start < z_end:
        raise DomainError("z_start must be below z_end")
    if steps < 2:
        raise DomainError("a scan needs at least two planes")
    half = min(field_at_lens_exit.window) / 2
    if capture_radius <= 0 or capture_radius >= half:
        raise GeometryError(f"capture radius {capture_radius:g} m does not fit the {2 * half:g} m window")
    asm = AngularSpectrum(field_at_lens_exit, max_discard)
    pitch = field_at_lens_exit.pitch
    mask = _grid.radius(field_at_lens_exit.shape, pitch) <= capture_radius
    ny, nx = field_at_lens_exit.shape
    zs = np.linspace(z_start, z_end, steps)
    captured = np.empty(steps)
    axis_i = np.empty(steps)
    for i, dz in enumerate(zs):
        u = asm.propagate(dz)
        captured[i] = np.sum(np.abs(u[mask]) ** 2) * pitch**2
        axis_i[i] = abs(u[ny // 2, nx // 2]) ** 2
    planes = {float(dz): asm.field_at(dz) for dz in keep}
    return LongitudinalScan(zs, captured, axis_i, capture_radius, planes)


def find_focus(scan: LongitudinalScan) -> Focus:
    """Distance of maximum captured power (first one on ties)."""
    if len(scan.z_values) == 0:
        raise DomainError("empty scan")
    i = int(np.argmax(scan.captured_power))
    return Focus(float(scan.z_values[i]), i, i in (0, len(scan.z_values) - 1))


def vortex_charge(field: FieldGrid, radius: float, center: tuple[float, float] = (0.0, 0.0),
                  samples: int | None = None, floor: float = 1e-6) -> int:
    """Winding number of the phase along a circle.

    The circle is sampled densely enough (at least eight points per pitch of
    arc) that consecutive phase steps stay well below pi.

    Raises
    ------
    UndefinedChargeError
        If at least 5% of the loop samples fall below ``floor`` times the
        largest field magnitude.
    """
    if samples is None:
        samples = max(256, int(math.ceil(8 * TWO_PI * radius / field.pitch)))
    t = TWO_PI * np.arange(samples) / samples
    vals = field.sample(center[0] + radius * np.cos(t), center[1] + radius * np.sin(t))
    level = floor * np.max(np.abs(field.samples))
    if np.mean(np.abs(vals) < level) >= 0.05:
        raise UndefinedChargeError("field too weak on the loop to define a charge")
    steps = np.angle(np.roll(vals, -1) * np.conj(vals))
    return int(round(float(np.sum(steps)) / TWO_PI))
