"""Phase shifts, allocations, noise, SINR with imperfect CSI, pseudo SINRs and rates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .channel import CeeNorm, cee_cascaded_variance
from .errors import InfeasibleAllocationError

TWO_PI = 2 * np.pi


def dbm_to_watts(dbm):
    return 10 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(w):
    return 10.0 * np.log10(np.asarray(w, dtype=float)) + 30.0


def db_to_linear(db):
    return 10 ** (np.asarray(db, dtype=float) / 10.0)


@dataclass(frozen=True)
class PhaseShiftConfig:
    """Diagonal of an IRS reflection matrix: amplitude and phase per element."""

    amplitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.amplitudes, dtype=float))
        p = np.atleast_1d(np.asarray(self.phases, dtype=float))
        if a.shape != p.shape:
            a = np.broadcast_to(a, p.shape).copy()
        if np.any(a <= 0) or np.any(a > 1):
            raise ValueError("amplitudes must lie in (0, 1]")
        if np.any(p < 0) or np.any(p >= TWO_PI):
            raise ValueError("phases must lie in [0, 2pi)")
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "phases", p)

    @property
    def num_elements(self) -> int:
        return self.phases.size

    @property
    def coefficients(self) -> np.ndarray:
        return self.amplitudes * np.exp(1j * self.phases)

    @classmethod
    def random(cls, m: int, rng: np.random.Generator, amplitude=1.0):
        return cls(np.full(m, amplitude), rng.uniform(0.0, TWO_PI, m))


def wrap_phase(theta):
    t = np.mod(theta, TWO_PI)
    # mod can round up to exactly 2pi for tiny negative inputs
    return np.where(t >= TWO_PI, 0.0, t)


def ideal_phases(d1, d2, wavelength: float) -> np.ndarray:
    """(2 pi / lambda)(d1 + d2) mod 2 pi, element-wise."""
    return wrap_phase(TWO_PI / wavelength * (np.asarray(d1) + np.asarray(d2)))


def ideal_phase_shifts(k: int, n: int, l: int, scenario, amplitude=None) -> PhaseShiftConfig:
    """Coherent-combining configuration of panel ``n`` for the Tx ``k`` -> Rx ``l`` link."""
    ch = scenario.channels
    theta = ideal_phases(ch.tx_dist[n][k], ch.rx_dist[n][l], scenario.radio.wavelength)
    a = scenario.amplitude if amplitude is None else amplitude
    return PhaseShiftConfig(np.full(theta.shape, a), theta)


@dataclass(frozen=True)
class NoiseModel:
    n0_dbm_per_hz: float = -174.0
    bandwidth_hz: float = 10e9
    noise_figure_db: float = 10.0

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth must be positive")

    @property
    def power_dbm(self) -> float:
        return noise_power(self.n0_dbm_per_hz, self.bandwidth_hz, self.noise_figure_db)

    @property
    def power_w(self) -> float:
        return float(dbm_to_watts(self.power_dbm))


def noise_power(n0_dbm_per_hz: float, bandwidth_hz: float, noise_figure_db: float) -> float:
    """Receiver noise floor in dBm."""
    if not bandwidth_hz > 0:
        raise ValueError("bandwidth must be positive")
    return n0_dbm_per_hz + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


@dataclass(frozen=True)
class Allocation:
    """One-to-one Tx-IRS-Rx triples, kept sorted by transmitter index."""

    triples: tuple

    def __post_init__(self):
        t = tuple(sorted((int(k), int(n), int(l)) for k, n, l in self.triples))
        for axis, name in enumerate(("transmitter", "IRS", "receiver")):
            used = [tr[axis] for tr in t]
            if len(set(used)) != len(used):
                raise InfeasibleAllocationError(f"{name} used by more than one triple")
            if any(u < 0 for u in used):
                raise InfeasibleAllocationError(f"negative {name} index")
        object.__setattr__(self, "triples", t)

    def __len__(self):
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)

    @property
    def tx(self):
        return tuple(t[0] for t in self.triples)

    @property
    def irs(self):
        return tuple(t[1] for t in self.triples)

    @property
    def rx(self):
        return tuple(t[2] for t in self.triples)

    def check(self, K: int, N: int, L: int):
        for k, n, l in self.triples:
            if k >= K or n >= N or l >= L:
                raise InfeasibleAllocationError(f"triple {(k, n, l)} outside a {K}x{N}x{L} network")
        return self

    def serving(self, l: int):
        for t in self.triples:
            if t[2] == l:
                return t
        return None

    def to_tensor(self, K: int, N: int, L: int) -> np.ndarray:
        self.check(K, N, L)
        omega = np.zeros((K, N, L), dtype=np.int8)
        for k, n, l in self.triples:
            omega[k, n, l] = 1
        return omega

    @classmethod
    def from_tensor(cls, omega) -> "Allocation":
        omega = np.asarray(omega)
        if omega.ndim != 3:
            raise InfeasibleAllocationError("allocation tensor must be 3-dimensional")
        if not np.all((omega == 0) | (omega == 1)):
            raise InfeasibleAllocationError("allocation tensor must be binary")
        for axes in ((1, 2), (0, 2), (0, 1)):
            if np.any(omega.sum(axis=axes) > 1):
                raise InfeasibleAllocationError("allocation tensor is not one-to-one")
        return cls(tuple(map(tuple, np.argwhere(omega == 1))))


def rate(sinr_value):
    s = np.asarray(sinr_value, dtype=float)
    if np.any(s < 0):
        raise ValueError("sinr must be nonnegative")
    r = np.log2(1.0 + s)
    return float(r) if r.ndim == 0 else r


pseudo_rate = rate


def _transpose_gain(v, norm: CeeNorm) -> float:
    if CeeNorm(norm) is CeeNorm.HERMITIAN:
        return float(np.sum(np.abs(v) ** 2))
    return float(abs(np.sum(v * v)))


def sinr(l: int, allocation: Allocation, phase_configs: Mapping[int, PhaseShiftConfig],
         channels, powers, noise_w: float, norm: CeeNorm = CeeNorm.TRANSPOSE) -> float:
    """SINR at receiver ``l`` evaluated directly from the channel vectors.

    Only transmitters and panels present in ``allocation`` radiate; every
    allocated panel ``i`` reflects with ``phase_configs[i]``.
    """
    serve = allocation.serving(l)
    if serve is None:
        raise InfeasibleAllocationError(f"receiver {l} has no serving pair")
    k, n, _ = serve
    p = np.asarray(powers, dtype=float)
    theta = {i: phase_configs[i].coefficients for i in allocation.irs}
    h, g = channels.tx_irs, channels.irs_rx
    num = p[k] * abs(np.sum(h[n][k] * theta[n] * g[n][l])) ** 2
    interference = 0.0
    cee = 0.0
    for j in allocation.tx:
        for i in allocation.irs:
            if j != k:
                interference += p[j] * abs(np.sum(h[i][j] * theta[i] * g[i][l])) ** 2
            a = np.abs(phase_configs[i].amplitudes)
            cee += p[j] * cee_cascaded_variance(h[i][j], g[i][l], channels.var_h[j, i],
                                                channels.var_g[i, l], norm, a)
    return float(num / (interference + cee + noise_w))


def pseudo_sinr_tx_irs(k: int, n: int, scenario) -> float:
    return float(scenario.pseudo_tx_irs_matrix()[k, n])


def pseudo_sinr_cascaded(k: int, n: int, l: int, scenario, phase1_pairs: Iterable) -> float:
    """Cascaded ranking SINR of receiver ``l`` through the phase-1 pair (k, n)."""
    pairs = tuple(phase1_pairs)
    if (k, n) not in pairs:
        raise InfeasibleAllocationError(f"({k}, {n}) is not a phase-1 pair")
    return float(scenario.pseudo_cascaded_matrix(pairs)[l, pairs.index((k, n))])


def sinr_ideal(k: int, n: int, l: int, scenario) -> float:
    """SINR of a lone Tx ``k`` -> IRS ``n`` -> Rx ``l`` link at the ideal phase shifts."""
    return float(scenario.sinr_values(Allocation(((k, n, l),)))[0])


def sum_rate(allocation: Allocation, scenario) -> float:
    return scenario.sum_rate(allocation)
