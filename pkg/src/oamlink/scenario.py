"""Scenario configuration.

A scenario is an INI file with sections ``[carrier]``, ``[array]``,
``[lens]``, ``[grid]``, ``[probes]``, ``[link]`` and ``[run]``.  Every key is
optional; missing keys take the defaults below, which follow the reference
experiment (16.1 GHz, modes 0/+1/+2, lens 0.9 m from the array, 0.6 m HDPE
lens, 1 MHz bandwidth, 6.5 dB noise figure).
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, replace
from pathlib import Path

from .array import wavelength_of
from .errors import ConfigError
from .lens import AiryLensSpec
from .rxlink import LinkBudget

__all__ = ["Scenario", "load_scenario", "parse_scenario", "parse_snr_grid", "AUTO"]

AUTO = "auto"


@dataclass(frozen=True)
class Scenario:
    """Validated run configuration.

    ``probe_spacing`` and ``rx_distance`` may be ``None`` meaning automatic:
    the horns are placed by :func:`oamlink.rxlink.auto_place_probes` and the
    receive plane sits at the predicted focal length behind the lens.
    """

    # [carrier]
    carrier: float = 16.1e9
    # [array]
    modes: tuple[int, ...] = (0, 1, 2)
    divergence_deg: float = 20.0
    element_counts: tuple[tuple[int, int], ...] = ()
    equal_power: bool = True
    element_q: float = 0.0
    # [lens]
    r0: float = 0.04
    beta: float = 29.0
    alpha: float = 0.1
    d0: float = 0.9
    aperture_diameter: float = 0.6
    phi0: float = 0.0
    epsilon_r: float = 2.9
    mu_r: float = 1.0
    airy_term: bool = True
    absorbing_stop: bool = False
    base_offset: float = 0.0
    # [grid]
    samples: int = 1024
    pitch: float = 0.004
    taper_inner: float = 0.5
    taper_outer: float = 0.9
    scan_start: float = 0.2
    scan_end: float = 2.0
    scan_steps: int = 91
    capture_radius: float = 0.10
    max_discard: float = 1e-2
    # [probes]
    probe_spacing: float | None = None
    rx_distance: float | None = None
    probe_aperture: float = 0.0
    search_radius: float = 0.15
    power_floor_db: float = 15.0
    # [link]
    noise_figure: float = 6.5
    bandwidth: float = 1.0e6
    amplifier_gain: float = 26.1
    if_frequency: float = 430.0e6
    coupling: str = "simulated"
    measured_phase_seed: int = 0
    frames: int = 4
    symbols_per_frame: int = 62_500
    snr_grid: tuple[float, ...] = tuple(float(s) for s in range(0, 41, 2))
    # [run]
    seed: int = 20240521
    output_dir: str = "out"
    workers: int = 1

    # ---- derived objects -------------------------------------------------
    @property
    def wavelength(self) -> float:
        return wavelength_of(self.carrier)

    @property
    def wavenumber(self) -> float:
        return 2 * math.pi / self.wavelength

    @property
    def divergence(self) -> float:
        return math.radians(self.divergence_deg)

    @property
    def window(self) -> float:
        return self.samples * self.pitch

    def lens_spec(self) -> AiryLensSpec:
        return AiryLensSpec(self.r0, self.beta, self.alpha, self.d0, self.aperture_diameter,
                            self.phi0, self.epsilon_r, self.mu_r)

    def link_budget(self) -> LinkBudget:
        return LinkBudget(self.noise_figure, self.bandwidth, self.amplifier_gain,
                          self.carrier, self.if_frequency)

    # ---- serialisation ---------------------------------------------------
    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        for section, keys in _LAYOUT.items():
            cp[section] = {}
            for key, attr, kind in keys:
                cp[section][key] = _format(getattr(self, attr), kind)
        lines = []
        for section in cp.sections():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {v}" for k, v in cp[section].items())
            lines.append("")
        return "\n".join(lines)

    def hash(self) -> str:
        """SHA-256 of the canonical serialisation, ignoring ``output_dir`` and ``workers``."""
        canon = replace(self, output_dir="", workers=1).to_ini()
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


# (ini key, attribute, kind)
_LAYOUT = {
    "carrier": [("frequency_hz", "carrier", "float")],
    "array": [
        ("modes", "modes", "intlist"),
        ("divergence_deg", "divergence_deg", "float"),
        ("element_counts", "element_counts", "counts"),
        ("equal_power", "equal_power", "bool"),
        ("element_q", "element_q", "float"),
    ],
    "lens": [
        ("r0_m", "r0", "float"),
        ("beta_per_m", "beta", "float"),
        ("alpha", "alpha", "float"),
        ("d0_m", "d0", "float"),
        ("aperture_m", "aperture_diameter", "float"),
        ("phi0_rad", "phi0", "float"),
        ("epsilon_r", "epsilon_r", "float"),
        ("mu_r", "mu_r", "float"),
        ("airy_term", "airy_term", "bool"),
        ("absorbing_stop", "absorbing_stop", "bool"),
        ("base_offset_m", "base_offset", "float"),
    ],
    "grid": [
        ("samples", "samples", "int"),
        ("pitch_m", "pitch", "float"),
        ("taper_inner_m", "taper_inner", "float"),
        ("taper_outer_m", "taper_outer", "float"),
        ("scan_start_m", "scan_start", "float"),
        ("scan_end_m", "scan_end", "float"),
        ("scan_steps", "scan_steps", "int"),
        ("capture_radius_m", "capture_radius", "float"),
        ("max_discard", "max_discard", "float"),
    ],
    "probes": [
        ("spacing_m", "probe_spacing", "optfloat"),
        ("rx_distance_m", "rx_distance", "optfloat"),
        ("aperture_radius_m", "probe_aperture", "float"),
        ("search_radius_m", "search_radius", "float"),
        ("power_floor_db", "power_floor_db", "float"),
    ],
    "link": [
        ("noise_figure_db", "noise_figure", "float"),
        ("bandwidth_hz", "bandwidth", "float"),
        ("amplifier_gain_db", "amplifier_gain", "float"),
        ("if_frequency_hz", "if_frequency", "float"),
        ("coupling", "coupling", "str"),
        ("measured_phase_seed", "measured_phase_seed", "int"),
        ("frames", "frames", "int"),
        ("symbols_per_frame", "symbols_per_frame", "int"),
        ("snr_grid_db", "snr_grid", "grid"),
    ],
    "run": [
        ("seed", "seed", "int"),
        ("output_dir", "output_dir", "str"),
        ("workers", "workers", "int"),
    ],
}

_COUPLINGS = ("simulated", "diagonal", "measured")


def _format(value, kind: str) -> str:
    if kind == "float":
        return repr(float(value))
    if kind == "optfloat":
        return AUTO if value is None else repr(float(value))
    if kind == "bool":
        return "true" if value else "false"
    if kind == "intlist":
        return ", ".join(str(v) for v in value)
    if kind == "counts":
        return ", ".join(f"{m}:{n}" for m, n in value) if value else AUTO
    if kind == "grid":
        return ", ".join(repr(float(v)) for v in value)
    return str(value)


def parse_snr_grid(text: str) -> tuple[float, ...]:
    """Parse ``"a:b:step"`` (inclusive) or a comma separated list."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise ValueError("expected a:b:step with step > 0 and b >= a")
        a, b, step = parts
        n = int(math.floor((b - a) / step + 1e-9)) + 1
        return tuple(round(a + i * step, 12) for i in range(n))
    return tuple(float(p) for p in text.split(",") if p.strip())


def _parse(raw: str, kind: str):
    raw = raw.strip()
    if kind == "float":
        return float(raw)
    if kind == "optfloat":
        return None if raw.lower() == AUTO else float(raw)
    if kind == "int":
        return int(raw)
    if kind == "bool":
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind == "intlist":
        return tuple(int(p) for p in raw.split(",") if p.strip())
    if kind == "counts":
        if raw.lower() == AUTO or not raw:
            return ()
        out = []
        for part in raw.split(","):
            m, n = part.split(":")
            out.append((int(m), int(n)))
        return tuple(out)
    if kind == "grid":
        return parse_snr_grid(raw)
    return raw


def parse_scenario(text: str, **overrides) -> Scenario:
    """Parse INI text into a validated :class:`Scenario`.

    Keyword ``overrides`` replace attributes after parsing (used by CLI flags).
    """
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("file", str(exc)) from exc
    known = {sec: {k: (a, kind) for k, a, kind in keys} for sec, keys in _LAYOUT.items()}
    values = {}
    for section in cp.sections():
        if section not in known:
            raise ConfigError(section, "unknown section")
        for key, raw in cp[section].items():
            if key not in known[section]:
                raise ConfigError(f"{section}.{key}", "unknown key")
            attr, kind = known[section][key]
            try:
                values[attr] = _parse(raw, kind)
            except ValueError as exc:
                raise ConfigError(f"{section}.{key}", str(exc)) from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    return validate(Scenario(**values))


def load_scenario(path=None, **overrides) -> Scenario:
    text = "" if path is None else Path(path).read_text()
    return parse_scenario(text, **overrides)


def _key_of(attr: str) -> str:
    for section, keys in _LAYOUT.items():
        for key, a, _ in keys:
            if a == attr:
                return f"{section}.{key}"
    return attr


def validate(s: Scenario) -> Scenario:
    def need(cond, attr, msg):
        if not cond:
            raise ConfigError(_key_of(attr), msg)

    positive = ["carrier", "divergence_deg", "beta", "d0", "aperture_diameter", "pitch",
                "taper_outer", "scan_end", "capture_radius", "bandwidth", "search_radius",
                "max_discard", "epsilon_r", "mu_r"]
    for attr in positive:
        need(getattr(s, attr) > 0, attr, "must be positive")
    need(len(s.modes) > 0, "modes", "at least one mode is required")
    need(len(set(s.modes)) == len(s.modes), "modes", "modes must be distinct")
    need(s.divergence_deg < 90, "divergence_deg", "must be below 90 degrees")
    need(0 < s.alpha < 1, "alpha", "must lie in (0, 1)")
    need(s.r0 >= 0, "r0", "must be non-negative")
    need(math.sqrt(s.epsilon_r * s.mu_r) > 1, "epsilon_r", "refractive index must exceed 1")
    need(s.r0 + 1 / s.beta < s.aperture_diameter / 2, "r0", "brightest ring r0 + 1/beta must lie inside the aperture")
    need(s.pitch <= s.wavelength / 4 * (1 + 1e-12), "pitch",
         f"undersampled: pitch must not exceed lambda/4 = {s.wavelength / 4:.6g} m")
    need(s.samples > 0 and s.samples & (s.samples - 1) == 0, "samples", "must be a power of two")
    need(0 <= s.taper_inner < s.taper_outer, "taper_inner", "taper needs 0 <= inner < outer")
    need(s.taper_outer < s.window / 2, "taper_outer", "taper must fit inside the window")
    need(s.aperture_diameter / 2 < s.window / 2, "aperture_diameter", "aperture larger than the window")
    need(0 <= s.scan_start < s.scan_end, "scan_start", "need 0 <= scan_start < scan_end")
    need(s.scan_steps >= 2, "scan_steps", "need at least two planes")
    need(s.capture_radius < s.window / 2, "capture_radius", "capture disc exceeds the window")
    need(s.probe_spacing is None or s.probe_spacing > 0, "probe_spacing", "must be positive or auto")
    need(s.rx_distance is None or s.rx_distance > 0, "rx_distance", "must be positive or auto")
    need(s.probe_aperture >= 0, "probe_aperture", "must be non-negative")
    need(s.coupling in _COUPLINGS, "coupling", f"must be one of {', '.join(_COUPLINGS)}")
    need(s.frames >= 1 and s.symbols_per_frame >= 1, "frames", "must be positive")
    need(s.frames * s.symbols_per_frame * 4 >= 100_000, "symbols_per_frame", "need at least 1e5 bits per SNR point")
    need(len(s.snr_grid) > 0, "snr_grid", "empty SNR grid")
    need(0 <= s.seed < 2**64, "seed", "must be a 64-bit unsigned integer")
    need(s.workers >= 1, "workers", "must be at least 1")
    counts = dict(s.element_counts)
    for m, n in counts.items():
        need(m in s.modes, "element_counts", f"mode {m} is not in the mode list")
        need(n >= 2 * abs(m) + 1 if m else n == 1, "element_counts", f"mode {m} cannot use {n} elements")
    if s.coupling == "measured":
        need(tuple(sorted(s.modes)) == (0, 1, 2), "coupling", "measured coupling needs modes 0, 1, 2")
    return s

