"""Receiver, coupling matrix and multiplexed 16-QAM link.

Two horns on a diameter of the focal ring feed a 180 degree hybrid: odd OAM
modes arrive in anti-phase and leave through the difference port, even
nonzero modes arrive in phase and leave through the sum port.  A third probe
on the axis picks up mode 0.  Sampling the per-mode focal fields at these
probes gives a static complex channel ``H[port][mode]`` that drives the
Monte-Carlo BER simulation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import erfc

from .errors import DegenerateLinkError, DomainError, GeometryError, NumericalError
from .field import FieldGrid

__all__ = [
    "PORT_CENTER",
    "PORT_SUM",
    "PORT_DIFF",
    "port_for_mode",
    "ProbeConfig",
    "CouplingMatrix",
    "LinkBudget",
    "BerReport",
    "Placement",
    "sample_field",
    "hybrid_combine",
    "coupling_matrix",
    "auto_place_probes",
    "isolation_db",
    "lens_gain_db",
    "power_allocation",
    "noise_power_dbm",
    "sinr",
    "qam16_map",
    "qam16_demap",
    "qfunc",
    "ber_qam16_awgn",
    "sinr_ber_approx",
    "simulate_ber",
    "FEC_LIMIT",
    "MEASURED_MODES",
    "MEASURED_WITH_LENS_DBM",
    "MEASURED_WITHOUT_LENS_DBM",
    "measured_isolation_db",
    "measured_coupling",
    "BER_COLUMNS",
]

PORT_CENTER = "center"
PORT_SUM = "sum"
PORT_DIFF = "difference"

FEC_LIMIT = 3.8e-3
BER_COLUMNS = ("mode", "snr_db", "ber", "bits", "ci_halfwidth")


def port_for_mode(mode: int) -> str:
    """Receive port a mode is separated into."""
    if mode == 0:
        return PORT_CENTER
    return PORT_DIFF if mode % 2 else PORT_SUM


@dataclass(frozen=True)
class ProbeConfig:
    """Positions of the two hybrid-fed horns and the axial probe, in meters.

    ``aperture_radius`` > 0 replaces point sampling by an average over a disc.
    """

    horn_a: tuple[float, float, float]
    horn_b: tuple[float, float, float]
    center_probe: tuple[float, float, float]
    aperture_radius: float = 0.0

    def __post_init__(self):
        a, b = np.asarray(self.horn_a), np.asarray(self.horn_b)
        if not np.allclose(a[:2], -b[:2], rtol=0, atol=1e-12) or a[2] != b[2]:
            raise GeometryError("horns must be placed symmetrically about the axis")

    @classmethod
    def symmetric(cls, half_spacing: float, z: float, azimuth: float = 0.0, aperture_radius: float = 0.0):
        x = half_spacing * math.cos(azimuth)
        y = half_spacing * math.sin(azimuth)
        return cls((x, y, z), (-x, -y, z), (0.0, 0.0, z), aperture_radius)

    @property
    def spacing(self) -> float:
        return float(np.linalg.norm(np.subtract(self.horn_a, self.horn_b)))

    @property
    def z(self) -> float:
        return self.horn_a[2]


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Complex channel ``entries[i, j]`` from tx mode ``tx_modes[j]`` to port ``rx_ports[i]``.

    Ports are ordered so that port ``i`` is the intended receiver of mode
    ``tx_modes[i]``; the diagonal therefore carries the wanted signals.
    """

    entries: np.ndarray
    rx_ports: tuple[str, ...]
    tx_modes: tuple[int, ...]

    def __post_init__(self):
        n = len(self.tx_modes)
        if self.entries.shape != (n, n) or len(self.rx_ports) != n:
            raise NumericalError("coupling matrix must be square with one port per mode")

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.entries) ** 2

    def power_rel_db(self) -> np.ndarray:
        """Entry powers in dB relative to the strongest entry."""
        p = self.power
        with np.errstate(divide="ignore"):
            return 10 * np.log10(p / p.max())


@dataclass(frozen=True)
class LinkBudget:
    """RF chain constants (defaults from the experimental setup)."""

    noise_figure: float = 6.5
    bandwidth: float = 1.0e6
    amplifier_gain: float = 26.1
    carrier: float = 16.1e9
    if_frequency: float = 430.0e6

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise DomainError("bandwidth must be positive")

    @property
    def noise_power_w(self) -> float:
        return 10 ** ((noise_power_dbm(self) - 30.0) / 10.0)


@dataclass(frozen=True, eq=False)
class BerReport:
    """Monte-Carlo BER per mode and SNR point.

    ``ber`` and ``ci_halfwidth`` have shape ``(len(modes), len(snr_db))``;
    the half width is the 95% normal-approximation interval.
    """

    modes: tuple[int, ...]
    snr_db: np.ndarray
    ber: np.ndarray
    bits: int
    ci_halfwidth: np.ndarray

    def __post_init__(self):
        if np.any((self.ber < 0) | (self.ber > 1)):
            raise NumericalError("BER outside [0, 1]")

    def curve(self, mode: int) -> np.ndarray:
        return self.ber[self.modes.index(mode)]

    def rows(self):
        out = []
        for i, m in enumerate(self.modes):
            for j, s in enumerate(self.snr_db):
                out.append((m, float(s), float(self.ber[i, j]), self.bits, float(self.ci_halfwidth[i, j])))
        return out


def sample_field(field: FieldGrid, position: tuple[float, float], aperture_radius: float = 0.0) -> complex:
    """Bilinear sample of ``field`` at ``position``; optional disc average.

    The disc average uses a polar rule with about one point per half pitch.
    """
    x0, y0 = position[0], position[1]
    if aperture_radius <= 0:
        return complex(field.sample(x0, y0))
    nr = max(2, int(math.ceil(2 * aperture_radius / field.pitch)))
    r_edges = np.linspace(0.0, aperture_radius, nr + 1)
    xs, ys, ws = [x0], [y0], [0.0]
    for r_in, r_out in zip(r_edges[:-1], r_edges[1:]):
        r = 0.5 * (r_in + r_out)
        na = max(8, int(math.ceil(2 * math.pi * r / (0.5 * field.pitch))))
        t = 2 * math.pi * np.arange(na) / na
        xs.extend(x0 + r * np.cos(t))
        ys.extend(y0 + r * np.sin(t))
        ws.extend([(r_out**2 - r_in**2) / na] * na)
    vals = field.sample(np.array(xs), np.array(ys))
    w = np.array(ws)
    return complex(np.sum(vals * w) / np.sum(w))


def hybrid_combine(a, b):
    """180 degree hybrid: ``((a + b)/sqrt 2, (a - b)/sqrt 2)``."""
    s = 1.0 / math.sqrt(2.0)
    return (a + b) * s, (a - b) * s


def _port_samples(field: FieldGrid, probes: ProbeConfig) -> dict[str, complex]:
    a = sample_field(field, probes.horn_a, probes.aperture_radius)
    b = sample_field(field, probes.horn_b, probes.aperture_radius)
    s, d = hybrid_combine(a, b)
    c = sample_field(field, probes.center_probe, probes.aperture_radius)
    return {PORT_CENTER: c, PORT_SUM: s, PORT_DIFF: d}


def _ports_for(modes: Sequence[int]) -> tuple[str, ...]:
    ports = tuple(port_for_mode(m) for m in modes)
    if len(set(ports)) != len(ports):
        raise NumericalError(f"modes {tuple(modes)} compete for the same receive port")
    return ports


def coupling_matrix(fields: Mapping[int, FieldGrid], probes: ProbeConfig) -> CouplingMatrix:
    """Sample each mode's focal field at the probes and combine in the hybrid.

    ``fields`` maps tx mode to its focal-plane field, all radiated with equal
    transmit power.
    """
    modes = tuple(fields)
    ports = _ports_for(modes)
    h = np.zeros((len(modes), len(modes)), dtype=complex)
    for j, m in enumerate(modes):
        f = fields[m]
        if not math.isclose(f.z, probes.z, abs_tol=1e-6):
            raise GeometryError(f"field of mode {m} is at z = {f.z:g} m, probes at {probes.z:g} m")
        vals = _port_samples(f, probes)
        for i, p in enumerate(ports):
            h[i, j] = vals[p]
    return CouplingMatrix(h, ports, modes)


@dataclass(frozen=True)
class Placement:
    """Outcome of :func:`auto_place_probes`."""

    probes: ProbeConfig
    half_spacing: float
    worst_isolation_db: float
    candidates: np.ndarray
    candidate_isolation_db: np.ndarray


def auto_place_probes(
    fields: Mapping[int, FieldGrid],
    search_radius: float = 0.15,
    power_floor_db: float = 15.0,
    azimuth: float = 0.0,
) -> Placement:
    """Choose the horn radius on the focal plane.

    Candidate radii are the grid nodes along the ``azimuth`` direction up to
    ``search_radius``.  A radius is admissible when every nonzero mode's
    intended-port power is within ``power_floor_db`` of its best value over
    all candidates (the horns sit on the bright part of the focal pattern).
    Among admissible radii the one with the largest worst-case cross-mode
    isolation wins; ties go to the smaller radius.
    """
    modes = tuple(fields)
    ports = _ports_for(modes)
    ref = next(iter(fields.values()))
    z = ref.z
    pitch = ref.pitch
    radii = pitch * np.arange(1, int(math.floor(search_radius / pitch + 1e-9)) + 1)
    if radii.size == 0:
        raise GeometryError("search radius is smaller than one grid pitch")
    ca, sa = math.cos(azimuth), math.sin(azimuth)
    n = len(modes)
    h = np.zeros((radii.size, n, n), dtype=complex)
    for j, m in enumerate(modes):
        f = fields[m]
        a = f.sample(radii * ca, radii * sa)
        b = f.sample(-radii * ca, -radii * sa)
        s, d = hybrid_combine(a, b)
        c = f.sample(0.0, 0.0)
        for i, p in enumerate(ports):
            h[:, i, j] = {PORT_CENTER: c, PORT_SUM: s, PORT_DIFF: d}[p]
    p = np.abs(h) ** 2
    diag = np.stack([p[:, i, i] for i in range(n)], axis=1)
    ok = np.ones(radii.size, dtype=bool)
    for i, m in enumerate(modes):
        if m != 0 and diag[:, i].max() > 0:
            ok &= diag[:, i] >= diag[:, i].max() * 10 ** (-power_floor_db / 10)
    worst = np.full(radii.size, np.inf)
    with np.errstate(divide="ignore"):
        for i in range(n):
            for j in range(n):
                if i != j:
                    worst = np.minimum(worst, 10 * np.log10(diag[:, i] / p[:, i, j]))
    score = np.where(ok, worst, -np.inf)
    best = int(np.argmax(score))
    r = float(radii[best])
    return Placement(ProbeConfig.symmetric(r, z, azimuth), r, float(worst[best]), radii, worst)


def isolation_db(h: CouplingMatrix) -> np.ndarray:
    """``20 log10(|H[p][p]| / |H[p][m]|)`` per port and interfering mode.

    Diagonal entries are NaN; a zero interferer gives ``+inf`` (unbounded
    isolation).
    """
    mag = np.abs(h.entries)
    d = np.diag(mag)
    if np.any(d == 0):
        raise DegenerateLinkError("an intended-path coupling is zero")
    with np.errstate(divide="ignore"):
        iso = 20 * np.log10(d[:, None] / mag)
    np.fill_diagonal(iso, np.nan)
    return iso


def lens_gain_db(power_with_lens: float, power_without: float) -> float:
    if power_with_lens <= 0 or power_without <= 0:
        raise DomainError("powers must be positive")
    return 10 * math.log10(power_with_lens / power_without)


def power_allocation(h: CouplingMatrix) -> np.ndarray:
    """Diagonal ``P`` with ``p_m`` proportional to ``1/|H[port(m)][m]|``, max 1."""
    d = np.abs(np.diag(h.entries))
    if np.any(d == 0):
        raise DegenerateLinkError("an intended-path coupling is zero")
    p = 1.0 / d
    return np.diag(p / p.max())


def noise_power_dbm(budget: LinkBudget) -> float:
    """Thermal floor plus noise figure over the bandwidth, in dBm."""
    if budget.bandwidth <= 0:
        raise DomainError("bandwidth must be positive")
    return -174.0 + budget.noise_figure + 10 * math.log10(budget.bandwidth)


def sinr(signal, noise, interference=0.0):
    if np.any(np.asarray(noise) <= 0) or np.any(np.asarray(interference) < 0):
        raise DomainError("noise must be positive and interference non-negative")
    return signal / (noise + interference)


# Gray code per axis: bit pair -> level index 0..3 for levels -3, -1, +1, +3
_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0]) / math.sqrt(10.0)
_PAIR_TO_INDEX = np.array([0, 1, 3, 2])  # pair value b0 b1 -> level index
_INDEX_TO_PAIR = np.array([0, 1, 3, 2])


def qam16_map(bits) -> np.ndarray:
    """Map bits (length multiple of 4 along the last axis) to unit-energy 16-QAM.

    Within each group of four the first two bits pick the in-phase level and
    the last two the quadrature level, both Gray coded.
    """
    b = np.asarray(bits, dtype=np.int64)
    if b.shape[-1] % 4:
        raise NumericalError("bit count must be a multiple of 4")
    g = b.reshape(b.shape[:-1] + (-1, 4))
    i_idx = _PAIR_TO_INDEX[2 * g[..., 0] + g[..., 1]]
    q_idx = _PAIR_TO_INDEX[2 * g[..., 2] + g[..., 3]]
    return _LEVELS[i_idx] + 1j * _LEVELS[q_idx]


def _axis_index(v: np.ndarray) -> np.ndarray:
    return np.clip(np.rint((v * math.sqrt(10.0) + 3.0) / 2.0), 0, 3).astype(np.int64)


def qam16_demap(symbols) -> np.ndarray:
    """Minimum-distance decision back to bits (inverse of :func:`qam16_map`)."""
    y = np.asarray(symbols)
    pi = _INDEX_TO_PAIR[_axis_index(y.real)]
    pq = _INDEX_TO_PAIR[_axis_index(y.imag)]
    out = np.stack([pi >> 1, pi & 1, pq >> 1, pq & 1], axis=-1)
    return out.reshape(y.shape[:-1] + (-1,)).astype(np.uint8) if y.ndim else out.astype(np.uint8)


def qfunc(x):
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def ber_qam16_awgn(es_n0):
    """Exact bit error rate of Gray 16-QAM in AWGN at linear ``Es/N0``."""
    a = np.sqrt(np.asarray(es_n0, dtype=float) / 5.0)
    return 0.75 * qfunc(a) + 0.5 * qfunc(3 * a) - 0.25 * qfunc(5 * a)


def _effective(h, p) -> np.ndarray:
    hm = h.entries if isinstance(h, CouplingMatrix) else np.asarray(h, dtype=complex)
    pm = np.asarray(p, dtype=float)
    pv = np.diag(pm) if pm.ndim == 2 else pm
    return hm * pv[None, :]


def sinr_ber_approx(h, p, snr_db=np.inf) -> np.ndarray:
    """Gaussian-interference estimate of each port's BER.

    Interference from the other streams is treated as extra white noise, so
    the BER is the AWGN value at the port's SINR.  ``snr_db`` follows the
    convention of :func:`simulate_ber`.
    """
    g = _effective(h, p)
    pw = np.abs(g) ** 2
    sig = np.diag(pw)
    interf = pw.sum(axis=1) - sig
    noise = sig.max() * 10 ** (-np.asarray(snr_db, dtype=float) / 10)
    return ber_qam16_awgn(sig / (noise + interf))


def _frame_errors(g, s_amp, tx_scale, noise_sigma, seed, snr_idx, frame_idx, nsym):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(snr_idx, frame_idx)))
    m = g.shape[0]
    bits = rng.integers(0, 2, size=(m, 4 * nsym), dtype=np.uint8)
    x = qam16_map(bits)
    noise = rng.standard_normal((m, nsym, 2))
    y = (s_amp * tx_scale) * (g @ x) + noise_sigma * (noise[..., 0] + 1j * noise[..., 1])
    ref = s_amp * np.diag(g)
    est = y / ref[:, None]
    return np.count_nonzero(qam16_demap(est) != bits, axis=1)


def simulate_ber(
    h,
    p,
    budget: LinkBudget,
    snr_grid: Sequence[float],
    frames: int,
    seed: int = 0,
    symbols_per_frame: int = 25_000,
    tx_scale: float = 1.0,
    workers: int = 1,
) -> BerReport:
    """Monte-Carlo BER with all streams transmitted at once.

    Port ``i`` receives ``sum_m H[i][m] p_m x_m`` plus circular Gaussian noise
    of the budget's noise power.  ``snr_db`` sets the transmit level so the
    strongest intended received stream has ``Es/N0 = snr``; with inverse-gain
    allocation all streams then share that SNR.  ``tx_scale`` scales the
    transmitters without touching the receiver reference (0 switches them
    off).  Frame ``f`` of SNR point ``i`` draws from
    ``SeedSequence(seed, spawn_key=(i, f))``, so results do not depend on
    ``workers``.
    """
    g = _effective(h, p)
    modes = h.tx_modes if isinstance(h, CouplingMatrix) else tuple(range(g.shape[0]))
    if np.any(np.diag(g) == 0):
        raise DegenerateLinkError("an intended-path coupling is zero")
    bits_per_point = frames * symbols_per_frame * 4
    if bits_per_point < 100_000:
        raise DomainError(f"{bits_per_point} bits per point is below the 1e5 minimum")
    n_w = budget.noise_power_w
    ref_gain = np.max(np.abs(np.diag(g)) ** 2)
    snr = np.asarray(list(snr_grid), dtype=float)
    errors = np.zeros((g.shape[0], snr.size), dtype=np.int64)
    sigma = math.sqrt(n_w / 2)
    jobs = [
        (i, f, math.sqrt(n_w * 10 ** (s / 10) / ref_gain))
        for i, s in enumerate(snr)
        for f in range(frames)
    ]

    def run(job):
        i, f, amp = job
        return i, _frame_errors(g, amp, tx_scale, sigma, seed, i, f, symbols_per_frame)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    for i, e in results:
        errors[:, i] += e
    ber = errors / bits_per_point
    ci = 1.96 * np.sqrt(ber * (1 - ber) / bits_per_point)
    return BerReport(tuple(modes), snr, ber, bits_per_point, ci)


# Measured received powers (dBm), rows = receive port of modes 0, +1, +2,
# columns = transmitted mode 0, +1, +2.
MEASURED_MODES = (0, 1, 2)
MEASURED_WITH_LENS_DBM = np.array(
    [[-22.3, -37.9, -37.4],
     [-39.2, -24.8, -36.7],
     [-37.6, -35.8, -24.5]]
)
MEASURED_WITHOUT_LENS_DBM = np.array(
    [[-35.8, -53.2, -52.7],
     [-51.6, -38.6, -46.6],
     [-50.2, -45.3, -37.4]]
)


def measured_isolation_db() -> np.ndarray:
    """Measured isolations ``P[p][p] - P[p][m]`` in dB (NaN on the diagonal)."""
    t = MEASURED_WITH_LENS_DBM
    iso = np.diag(t)[:, None] - t
    np.fill_diagonal(iso, np.nan)
    return iso


def measured_coupling(phase_seed: int = 0) -> CouplingMatrix:
    """Unit-diagonal channel carrying the measured isolations.

    Only magnitudes were measured, so each cross term gets a phase drawn
    uniformly from ``phase_seed``.
    """
    iso = measured_isolation_db()
    mag = 10 ** (-np.nan_to_num(iso, nan=0.0) / 20)
    rng = np.random.default_rng(phase_seed)
    ph = rng.uniform(0, 2 * math.pi, size=mag.shape)
    np.fill_diagonal(ph, 0.0)
    h = mag * np.exp(1j * ph)
    return CouplingMatrix(h, _ports_for(MEASURED_MODES), MEASURED_MODES)
