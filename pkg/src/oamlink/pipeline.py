"""End-to-end stages: design, propagate, isolation and BER.

:class:`Simulation` owns the numerical state of one scenario and caches the
expensive pieces (incident fields, spectra), so the ``all`` command reuses a
single set of propagations across stages.  Each ``run_*`` function writes its
artifacts atomically and returns an in-memory result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import io
from .array import GEOMETRY_COLUMNS, ConcentricArray, design_concentric_array, geometry_rows
from .field import (
    SCAN_COLUMNS,
    AngularSpectrum,
    FieldGrid,
    LongitudinalScan,
    apodize,
    apply_phase_screen,
    disc_power,
    find_focus,
    longitudinal_scan,
    radiate_to_plane,
    vortex_charge,
)
from .errors import NumericalError
from .lens import PhaseProfile, ThicknessMap, predict_focal_length, thickness_map, total_phase_profile
from .rxlink import (
    BER_COLUMNS,
    FEC_LIMIT,
    BerReport,
    CouplingMatrix,
    ProbeConfig,
    auto_place_probes,
    coupling_matrix,
    isolation_db,
    power_allocation,
    simulate_ber,
    measured_coupling,
    _ports_for,
)
from .scenario import Scenario

__all__ = [
    "Simulation",
    "DesignResult",
    "PropagateResult",
    "IsolationResult",
    "BerResult",
    "run_design",
    "run_propagate",
    "run_isolation",
    "run_ber",
    "run_all",
]


class Simulation:
    """Cached field computations for one scenario."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self._spectra: dict[tuple[int, bool], AngularSpectrum] = {}
        self._incident: dict[int, FieldGrid] = {}

    @cached_property
    def array(self) -> ConcentricArray:
        s = self.scenario
        return design_concentric_array(
            s.modes, s.carrier, s.divergence, dict(s.element_counts), s.equal_power
        )

    @cached_property
    def profile(self) -> PhaseProfile:
        s = self.scenario
        return total_phase_profile(
            s.lens_spec(), s.wavenumber, s.pitch, s.samples, s.airy_term, s.absorbing_stop
        )

    @cached_property
    def thickness(self) -> ThicknessMap:
        s = self.scenario
        return thickness_map(self.profile, s.wavelength, s.lens_spec().refractive_index, s.phi0, s.base_offset)

    @cached_property
    def focal_length(self) -> float:
        return predict_focal_length(self.scenario.lens_spec(), self.scenario.wavenumber)

    @property
    def rx_distance(self) -> float:
        """Receive plane distance behind the lens."""
        s = self.scenario
        return self.focal_length if s.rx_distance is None else s.rx_distance

    def incident(self, mode: int) -> FieldGrid:
        """Apodized field of one mode arriving at the lens plane."""
        if mode not in self._incident:
            s = self.scenario
            u = radiate_to_plane(self.array, s.d0, s.samples, s.pitch, {mode: 1.0}, s.element_q)
            self._incident[mode] = apodize(u, s.taper_inner, s.taper_outer)
        return self._incident[mode]

    def spectrum(self, mode: int, lens: bool) -> AngularSpectrum:
        key = (mode, lens)
        if key not in self._spectra:
            u = self.incident(mode)
            if lens:
                u = apply_phase_screen(u, self.profile)
            self._spectra[key] = AngularSpectrum(u, self.scenario.max_discard)
        return self._spectra[key]

    def focal_field(self, mode: int, lens: bool) -> FieldGrid:
        return self.spectrum(mode, lens).field_at(self.rx_distance)

    def scan(self, mode: int, lens: bool) -> LongitudinalScan:
        s = self.scenario
        asm = self.spectrum(mode, lens)
        return longitudinal_scan(asm.field, s.scan_start, s.scan_end, s.scan_steps,
                                 s.capture_radius, max_discard=s.max_discard)


# ---------------------------------------------------------------- design
@dataclass
class DesignResult:
    array: ConcentricArray
    profile: PhaseProfile
    thickness: ThicknessMap
    focal_length: float
    artifacts: list[Path] = field(default_factory=list)


def run_design(scenario: Scenario, out_dir=None, sim: Simulation | None = None) -> DesignResult:
    sim = sim or Simulation(scenario)
    out = Path(out_dir or scenario.output_dir)
    arr = sim.array
    paths = [
        io.write_csv(out / "array_geometry.csv", GEOMETRY_COLUMNS, geometry_rows(arr)),
        io.write_csv(
            out / "ring_radii.csv",
            ("mode", "radius_m", "element_count", "divergence_deg"),
            [(r.mode, r.radius, r.element_count, scenario.divergence_deg if r.mode else 0.0) for r in arr.rings],
        ),
        io.write_lens_dump(out / "lens_phase.oamlens", sim.profile.samples, scenario.pitch, "phase_rad"),
        io.write_lens_dump(out / "lens_thickness.oamlens", sim.thickness.samples, scenario.pitch, "thickness_m"),
    ]
    return DesignResult(arr, sim.profile, sim.thickness, sim.focal_length, paths)


# ------------------------------------------------------------- propagate
@dataclass
class ModeFocus:
    mode: int
    focus_z: float
    at_boundary: bool
    captured_power: float
    baseline_power: float | None
    vortex_charge: int | None

    @property
    def lens_gain_db(self) -> float | None:
        if self.baseline_power is None:
            return None
        return 10 * math.log10(self.captured_power / self.baseline_power)


@dataclass
class PropagateResult:
    with_lens: bool
    scans: dict[int, LongitudinalScan]
    foci: dict[int, ModeFocus]
    artifacts: list[Path] = field(default_factory=list)


FOCUS_COLUMNS = ("mode", "focus_z_m", "at_boundary", "captured_power_w",
                 "baseline_captured_power_w", "lens_gain_db", "vortex_charge")


def _charge_radius(f: FieldGrid, limit: float) -> float:
    """Radius of the brightest sample along +x inside ``limit`` (at least two pitches)."""
    ny, nx = f.shape
    n = max(2, int(limit / f.pitch))
    row = np.abs(f.samples[ny // 2, nx // 2 + 2: nx // 2 + n + 1])
    return (int(np.argmax(row)) + 2) * f.pitch


def run_propagate(scenario: Scenario, out_dir=None, with_lens: bool = True,
                  sim: Simulation | None = None) -> PropagateResult:
    sim = sim or Simulation(scenario)
    out = Path(out_dir or scenario.output_dir)
    tag = "lens" if with_lens else "nolens"
    scans, foci, paths = {}, {}, []
    for m in scenario.modes:
        scan = sim.scan(m, with_lens)
        scans[m] = scan
        focus = find_focus(scan)
        captured = float(scan.captured_power[focus.index])
        baseline = None
        if with_lens:
            base = sim.spectrum(m, False).field_at(focus.z)
            baseline = disc_power(base.samples, base.pitch, scenario.capture_radius)
        focal = sim.focal_field(m, with_lens)
        try:
            charge = vortex_charge(focal, _charge_radius(focal, scenario.capture_radius))
        except NumericalError:
            charge = None
        foci[m] = ModeFocus(m, focus.z, focus.at_boundary, captured, baseline, charge)
        paths.append(io.write_csv(out / f"scan_{tag}_mode{m}.csv", SCAN_COLUMNS, scan.rows()))
        paths.append(io.write_field_dump(out / f"focal_{tag}_mode{m}.oamfield", focal.samples,
                                         focal.pitch, focal.z, focal.wavelength))
    rows = []
    for f in foci.values():
        rows.append((f.mode, f.focus_z, f.at_boundary, f.captured_power,
                     "" if f.baseline_power is None else f.baseline_power,
                     "" if f.lens_gain_db is None else f.lens_gain_db,
                     "" if f.vortex_charge is None else f.vortex_charge))
    paths.append(io.write_csv(out / f"focus_{tag}.csv", FOCUS_COLUMNS, rows))
    return PropagateResult(with_lens, scans, foci, paths)


# ------------------------------------------------------------- isolation
@dataclass
class IsolationResult:
    probes: ProbeConfig
    coupling: CouplingMatrix
    baseline: CouplingMatrix
    isolation_db: np.ndarray
    lens_gain_db: np.ndarray
    artifacts: list[Path] = field(default_factory=list)

    @property
    def worst_isolation_db(self) -> float:
        return float(np.nanmin(self.isolation_db))


ISOLATION_COLUMNS = ("rx_port", "tx_mode", "power_rel_db", "isolation_db", "lens_gain_db")
COUPLING_COLUMNS = ("rx_port", "tx_mode", "lens", "re", "im")


def choose_probes(scenario: Scenario, sim: Simulation, fields: dict[int, FieldGrid]) -> ProbeConfig:
    if scenario.probe_spacing is not None:
        return ProbeConfig.symmetric(scenario.probe_spacing / 2, fields[scenario.modes[0]].z,
                                     aperture_radius=scenario.probe_aperture)
    placed = auto_place_probes(fields, scenario.search_radius, scenario.power_floor_db)
    p = placed.probes
    return ProbeConfig(p.horn_a, p.horn_b, p.center_probe, scenario.probe_aperture)


def compute_isolation(scenario: Scenario, sim: Simulation | None = None) -> IsolationResult:
    """Probe placement, coupling matrices and isolation, without writing anything."""
    sim = sim or Simulation(scenario)
    with_lens = {m: sim.focal_field(m, True) for m in scenario.modes}
    without = {m: sim.focal_field(m, False) for m in scenario.modes}
    probes = choose_probes(scenario, sim, with_lens)
    h = coupling_matrix(with_lens, probes)
    h0 = coupling_matrix(without, probes)
    iso = isolation_db(h)
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = 20 * np.log10(np.abs(h.entries) / np.abs(h0.entries))
    return IsolationResult(probes, h, h0, iso, gain)


def run_isolation(scenario: Scenario, out_dir=None, sim: Simulation | None = None) -> IsolationResult:
    out = Path(out_dir or scenario.output_dir)
    res = compute_isolation(scenario, sim)
    h, h0, iso, gain, probes = res.coupling, res.baseline, res.isolation_db, res.lens_gain_db, res.probes
    rel = h.power_rel_db()
    rows, crow = [], []
    for i, port in enumerate(h.rx_ports):
        for j, m in enumerate(h.tx_modes):
            rows.append((port, m, rel[i, j], "" if i == j else iso[i, j], gain[i, j]))
            crow.append((port, m, "true", h.entries[i, j].real, h.entries[i, j].imag))
            crow.append((port, m, "false", h0.entries[i, j].real, h0.entries[i, j].imag))
    paths = [
        io.write_csv(out / "isolation.csv", ISOLATION_COLUMNS, rows),
        io.write_csv(out / "coupling.csv", COUPLING_COLUMNS, crow),
        io.write_csv(
            out / "probes.csv",
            ("probe", "x_m", "y_m", "z_m"),
            [("horn_a",) + tuple(probes.horn_a), ("horn_b",) + tuple(probes.horn_b),
             ("center",) + tuple(probes.center_probe)],
        ),
    ]
    res.artifacts = paths
    return res


# ------------------------------------------------------------------- BER
@dataclass
class BerResult:
    report: BerReport
    coupling: CouplingMatrix
    allocation: np.ndarray
    artifacts: list[Path] = field(default_factory=list)


def link_channel(scenario: Scenario, sim: Simulation | None = None,
                 isolation: IsolationResult | None = None) -> CouplingMatrix:
    """Channel used by the BER stage according to ``scenario.coupling``."""
    if scenario.coupling == "diagonal":
        modes = tuple(scenario.modes)
        return CouplingMatrix(np.eye(len(modes), dtype=complex), _ports_for(modes), modes)
    if scenario.coupling == "measured":
        return measured_coupling(scenario.measured_phase_seed)
    if isolation is None:
        isolation = compute_isolation(scenario, sim)
    return isolation.coupling


def run_ber(scenario: Scenario, out_dir=None, sim: Simulation | None = None,
            isolation: IsolationResult | None = None) -> BerResult:
    out = Path(out_dir or scenario.output_dir)
    h = link_channel(scenario, sim, isolation)
    p = power_allocation(h)
    report = simulate_ber(h, p, scenario.link_budget(), scenario.snr_grid, scenario.frames,
                          seed=scenario.seed, symbols_per_frame=scenario.symbols_per_frame,
                          workers=scenario.workers)
    rows = [r + (FEC_LIMIT,) for r in report.rows()]
    paths = [io.write_csv(out / "ber.csv", BER_COLUMNS + ("fec_limit",), rows)]
    return BerResult(report, h, p, paths)


def run_all(scenario: Scenario, out_dir=None, with_lens: bool = True):
    sim = Simulation(scenario)
    d = run_design(scenario, out_dir, sim)
    pr = run_propagate(scenario, out_dir, with_lens, sim)
    iso = run_isolation(scenario, out_dir, sim)
    ber = run_ber(scenario, out_dir, sim, iso)
    return d, pr, iso, ber
