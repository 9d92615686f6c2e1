"""Concentric uniform-circular-array transmitter.

Each nonzero OAM mode ``l`` gets its own ring whose radius puts the main lobe
at a common elevation angle, R_l = chi_l / (k sin theta), with chi_l the first
maximum of J_l.  Mode 0 is a single element on the axis.  The module also
holds the DFT beamforming used to feed several modes from one element set and
the analytic far-field patterns (discrete sum and Bessel limit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .errors import (
    AliasingError,
    DegenerateRingError,
    DomainError,
    NoRealPeakError,
    NumericalError,
)
from .specfun import bessel_first_max, bessel_j

__all__ = [
    "SPEED_OF_LIGHT",
    "UcaRing",
    "ConcentricArray",
    "BeamformingPlan",
    "wavelength_of",
    "wavenumber_of",
    "design_ring_radius",
    "excitation_phases",
    "default_element_count",
    "dft_weights",
    "dft_matrix",
    "mode_column",
    "make_plan",
    "beamform",
    "make_ring",
    "design_concentric_array",
    "array_factor",
    "bessel_pattern",
    "divergence_angle",
    "geometry_rows",
    "GEOMETRY_COLUMNS",
]

TWO_PI = 2.0 * math.pi


def wavelength_of(frequency: float) -> float:
    return SPEED_OF_LIGHT / frequency


def wavenumber_of(frequency: float) -> float:
    return TWO_PI * frequency / SPEED_OF_LIGHT


@dataclass(frozen=True, eq=False)
class UcaRing:
    """One ring of the concentric array.

    Attributes
    ----------
    mode : int
        OAM mode ``l`` fed to this ring.
    radius : float
        Ring radius in meters (0 for the mode-0 center element).
    element_count : int
        Number of elements ``N``.
    element_azimuths : ndarray
        Element angles ``2 pi n / N``.
    excitation_amplitudes : ndarray
        Real amplitudes ``I_{l,n}``.
    excitation_phases : ndarray
        Phases ``alpha_{l,n}`` in [0, 2 pi).
    phase_offset : float
        Ring rotation ``phi_l``.
    """

    mode: int
    radius: float
    element_count: int
    element_azimuths: np.ndarray
    excitation_amplitudes: np.ndarray
    excitation_phases: np.ndarray
    phase_offset: float = 0.0

    def __post_init__(self):
        n = self.element_count
        if not (math.floor(-n / 2) <= self.mode < n / 2):
            raise AliasingError(f"mode {self.mode} is not supported by {n} elements")
        if self.mode != 0 and self.radius <= 0:
            raise DomainError("nonzero modes need a positive ring radius")

    @property
    def is_center(self) -> bool:
        return self.element_count == 1 and self.radius == 0.0

    @property
    def positions(self) -> np.ndarray:
        """Element (x, y) coordinates, shape ``(N, 2)``."""
        return self.radius * np.column_stack(
            [np.cos(self.element_azimuths), np.sin(self.element_azimuths)]
        )

    @property
    def excitations(self) -> np.ndarray:
        """Complex feeds ``A = I exp(j alpha)``."""
        return self.excitation_amplitudes * np.exp(1j * self.excitation_phases)

    @property
    def power(self) -> float:
        return float(np.sum(self.excitation_amplitudes**2))


@dataclass(frozen=True, eq=False)
class ConcentricArray:
    """Set of co-centred rings sharing one carrier."""

    rings: tuple[UcaRing, ...]
    carrier_frequency: float
    target_divergence: float

    def __post_init__(self):
        modes = [r.mode for r in self.rings]
        if len(set(modes)) != len(modes):
            raise DomainError("ring modes must be distinct")

    @property
    def wavelength(self) -> float:
        return wavelength_of(self.carrier_frequency)

    @property
    def wavenumber(self) -> float:
        return TWO_PI / self.wavelength

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(r.mode for r in self.rings)

    def ring(self, mode: int) -> UcaRing:
        for r in self.rings:
            if r.mode == mode:
                return r
        raise KeyError(mode)


@dataclass(frozen=True, eq=False)
class BeamformingPlan:
    """DFT beamforming ``s = W_N P x``.

    Attributes
    ----------
    dft_matrix : ndarray
        ``N x N`` unitary DFT matrix ``W_N``.
    power_allocation : ndarray
        Diagonal entries of ``P``, one per mode in ``modes`` order.
    mode_to_column : dict
        OAM mode -> 1-based DFT column.
    """

    dft_matrix: np.ndarray
    power_allocation: np.ndarray
    mode_to_column: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.power_allocation) != len(self.mode_to_column):
            raise NumericalError("one power entry per mode is required")
        if np.any(np.asarray(self.power_allocation) <= 0):
            raise DomainError("power allocation entries must be positive")

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(self.mode_to_column)

    @property
    def P(self) -> np.ndarray:
        return np.diag(self.power_allocation)


def design_ring_radius(mode: int, divergence: float, wavenumber: float) -> float:
    """Ring radius that places the mode's main lobe at ``divergence``.

    Raises
    ------
    DegenerateRingError
        For mode 0, which is a center element rather than a ring.
    DomainError
        If ``divergence`` is outside (0, pi/2).
    """
    if mode == 0:
        raise DegenerateRingError("mode 0 uses a single center element")
    if not 0.0 < divergence < math.pi / 2:
        raise DomainError("divergence must lie strictly between 0 and pi/2")
    chi = bessel_first_max(abs(mode)).abscissa
    return chi / (wavenumber * math.sin(divergence))


def divergence_angle(mode: int, radius: float, wavenumber: float) -> float:
    """Main-lobe elevation of a ring of given radius (inverse of the design rule)."""
    if mode == 0:
        raise DegenerateRingError("mode 0 has no off-axis main lobe")
    chi = bessel_first_max(abs(mode)).abscissa
    s = chi / (wavenumber * radius)
    if not 0.0 < s <= 1.0:
        raise NoRealPeakError(f"k R = {wavenumber * radius:.4g} is below chi_{abs(mode)} = {chi:.6g}")
    return math.asin(s)


def excitation_phases(mode: int, element_count: int, phase_offset: float = 0.0) -> np.ndarray:
    """Feed phases ``l (2 pi n / N + phi_l)`` wrapped to [0, 2 pi)."""
    if element_count < 2 * abs(mode) + 1:
        raise AliasingError(
            f"mode {mode} needs at least {2 * abs(mode) + 1} elements, got {element_count}"
        )
    n = np.arange(element_count)
    a = np.mod(mode * (TWO_PI * n / element_count + phase_offset), TWO_PI)
    # mod of a tiny negative value rounds up to exactly 2 pi
    return np.where(a >= TWO_PI, 0.0, a)


def default_element_count(mode: int) -> int:
    """Four elements per unit of |l| (4 for |l| = 1, 8 for |l| = 2), one for mode 0."""
    return 1 if mode == 0 else 4 * abs(mode)


def dft_weights(element_count: int, column: int) -> np.ndarray:
    """Column ``column`` (1-based) of the unitary DFT matrix."""
    if not 1 <= column <= element_count:
        raise IndexError(f"column {column} outside 1..{element_count}")
    m = np.arange(element_count)
    return np.exp(-1j * TWO_PI * (column - 1) * m / element_count) / math.sqrt(element_count)


def dft_matrix(element_count: int) -> np.ndarray:
    m = np.arange(element_count)
    return np.exp(-1j * TWO_PI * np.outer(m, m) / element_count) / math.sqrt(element_count)


def mode_column(mode: int, element_count: int) -> int:
    """DFT column whose phase progression is ``+l 2 pi n / N``."""
    return (-mode) % element_count + 1


def make_plan(modes: Sequence[int], element_count: int, powers: Sequence[float] | None = None) -> BeamformingPlan:
    cols = {m: mode_column(m, element_count) for m in modes}
    if len(set(cols.values())) != len(cols):
        raise AliasingError("two modes map to the same DFT column")
    p = np.ones(len(cols)) if powers is None else np.asarray(powers, dtype=float)
    return BeamformingPlan(dft_matrix(element_count), p, cols)


def beamform(plan: BeamformingPlan, symbols) -> np.ndarray:
    """Element excitations ``s = W_N P x``.

    ``symbols`` has one row per plan mode; extra trailing axes (e.g. time)
    are carried through.
    """
    x = np.asarray(symbols, dtype=complex)
    if x.shape[0] != len(plan.mode_to_column):
        raise NumericalError(f"expected {len(plan.mode_to_column)} symbol rows, got {x.shape[0]}")
    cols = [c - 1 for c in plan.mode_to_column.values()]
    w = plan.dft_matrix[:, cols]
    p = np.asarray(plan.power_allocation).reshape((-1,) + (1,) * (x.ndim - 1))
    return np.tensordot(w, p * x, axes=(1, 0))


def make_ring(
    mode: int,
    wavenumber: float,
    divergence: float,
    element_count: int | None = None,
    amplitude: float | None = None,
    phase_offset: float = 0.0,
) -> UcaRing:
    """Build the ring for one mode.

    ``amplitude`` defaults to ``1/sqrt(N)`` so every ring radiates unit total
    power.
    """
    if mode == 0:
        amp = 1.0 if amplitude is None else amplitude
        return UcaRing(0, 0.0, 1, np.zeros(1), np.full(1, amp), np.zeros(1), phase_offset)
    n = default_element_count(mode) if element_count is None else element_count
    amp = 1.0 / math.sqrt(n) if amplitude is None else amplitude
    return UcaRing(
        mode=mode,
        radius=design_ring_radius(mode, divergence, wavenumber),
        element_count=n,
        element_azimuths=TWO_PI * np.arange(n) / n,
        excitation_amplitudes=np.full(n, amp),
        excitation_phases=excitation_phases(mode, n, phase_offset),
        phase_offset=phase_offset,
    )


def design_concentric_array(
    modes: Iterable[int],
    carrier_frequency: float,
    divergence: float,
    element_counts: Mapping[int, int] | None = None,
    equal_power: bool = True,
    phase_offsets: Mapping[int, float] | None = None,
) -> ConcentricArray:
    """Design all rings for ``modes`` at a shared divergence angle.

    With ``equal_power`` each ring radiates unit total power; otherwise every
    element is driven at unit amplitude.
    """
    k = wavenumber_of(carrier_frequency)
    element_counts = element_counts or {}
    phase_offsets = phase_offsets or {}
    rings = []
    for m in modes:
        n = element_counts.get(m)
        rings.append(
            make_ring(
                m,
                k,
                divergence,
                element_count=n,
                amplitude=None if equal_power else 1.0,
                phase_offset=phase_offsets.get(m, 0.0),
            )
        )
    return ConcentricArray(tuple(rings), carrier_frequency, divergence)


def array_factor(array: ConcentricArray, ring: UcaRing, distance, theta, phi, q: float = 0.0):
    """Discrete far-field sum of one ring.

    ``(e^{-jkd}/d) sum_n A_n exp(j k R sin(theta) cos(phi_n - phi))``, times an
    optional ``cos(theta)**q`` element factor.  ``theta`` and ``phi`` broadcast.
    """
    k = array.wavenumber
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 10 * array.wavelength):
        raise DomainError("far-field sum needs distance > 10 wavelengths")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    u = k * ring.radius * np.sin(theta)[..., None]
    arg = u * np.cos(ring.element_azimuths - phi[..., None])
    s = np.sum(ring.excitations * np.exp(1j * arg), axis=-1)
    out = np.exp(-1j * k * d) / d * s
    if q:
        out = out * np.cos(theta) ** q
    return out


def bessel_pattern(mode: int, radius: float, wavenumber: float, theta, phi,
                   element_count: int = 1, distance: float = 1.0):
    """Continuous-ring limit ``N j^l J_l(kR sin theta) e^{jl phi} e^{-jkd}/d``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    x = wavenumber * radius * np.sin(theta)
    j = bessel_j(mode, np.abs(x)) * np.where(x < 0, (-1.0) ** mode, 1.0)
    pref = element_count * (1j**mode) * np.exp(-1j * wavenumber * distance) / distance
    return pref * j * np.exp(1j * mode * phi)


GEOMETRY_COLUMNS = ("mode", "element_index", "x_m", "y_m", "amplitude", "phase_rad")


def geometry_rows(array: ConcentricArray) -> list[tuple]:
    """Rows of the element table, one per element across all rings."""
    rows = []
    for ring in array.rings:
        xy = ring.positions
        for n in range(ring.element_count):
            rows.append(
                (
                    ring.mode,
                    n,
                    float(xy[n, 0]),
                    float(xy[n, 1]),
                    float(ring.excitation_amplitudes[n]),
                    float(ring.excitation_phases[n]),
                )
            )
    return rows
