"""Pathloss, IRS element gains, per-element channel vectors and the imperfect-CSI model."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .geometry import IrsPanel, Point3, Topology, link_geometry

SPEED_OF_LIGHT = 3e8  # gives lambda = 1 mm at 300 GHz, as in the reference tables


class Direction(enum.Enum):
    TX_TO_IRS = "tx_to_irs"
    IRS_TO_RX = "irs_to_rx"


class GainModel(str, enum.Enum):
    TRIGONOMETRIC = "trigonometric"
    COSQ = "cosq"


class CeeNorm(str, enum.Enum):
    """How the cascaded CSI-error variance contracts the estimated vectors.

    ``TRANSPOSE`` keeps the |h^T h| form used throughout the model;
    ``HERMITIAN`` is the exact variance of the error part for uncorrelated
    Gaussian errors (||h||^2 and an M-fold error-error term).
    """

    TRANSPOSE = "transpose"
    HERMITIAN = "hermitian"


@dataclass(frozen=True)
class RadioParams:
    carrier_frequency: float = 300e9
    absorption: float = 0.0033
    tx_gain: float = 1.0
    rx_gain: float = 1.0
    element_side: float = 0.4e-3
    element_efficiency: float = 1.0
    directivity_exponent: float = 2.0
    gain_model: GainModel = GainModel.TRIGONOMETRIC

    def __post_init__(self):
        if self.carrier_frequency <= 0:
            raise ValueError("carrier_frequency must be positive")
        if self.absorption < 0:
            raise ValueError("absorption must be nonnegative")
        if self.tx_gain <= 0 or self.rx_gain <= 0:
            raise ValueError("antenna gains must be positive")
        if not 0 < self.element_efficiency <= 1:
            raise ValueError("element_efficiency must lie in (0, 1]")
        if self.directivity_exponent < 0:
            raise ValueError("directivity_exponent must be nonnegative")
        object.__setattr__(self, "gain_model", GainModel(self.gain_model))

    @classmethod
    def at_frequency(cls, carrier_frequency: float, side_wavelengths: float = 0.4, **kw):
        wavelength = SPEED_OF_LIGHT / carrier_frequency
        return cls(carrier_frequency=carrier_frequency,
                   element_side=side_wavelengths * wavelength, **kw)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def element_area(self) -> float:
        return self.element_side**2

    @property
    def aperture_gain(self) -> float:
        """Broadside gain 4*pi*A/lambda^2 of one element."""
        return 4 * math.pi * self.element_area / self.wavelength**2


def element_gain_cosq(psi, radio: RadioParams):
    """Cos-q element gain, zero over the rear hemisphere."""
    psi = np.asarray(psi, dtype=float)
    q = radio.directivity_exponent
    front = psi < np.pi / 2
    cos = np.where(front, np.cos(np.where(front, psi, 0.0)), 0.0)
    g = np.where(front, 2 * radio.element_efficiency * (q + 1) * cos**q, 0.0)
    return g if g.ndim else float(g)


def _incident_factor(psi_inc):
    return np.cos(psi_inc) ** 2


def _reflect_factor(phi_rfl, psi_rfl):
    return np.cos(phi_rfl) ** 2 * np.cos(psi_rfl) ** 2 + np.sin(phi_rfl) ** 2


def cascaded_gain_trig(psi_inc, phi_rfl, psi_rfl, radio: RadioParams):
    """Angle-based trigonometric cascaded gain (4*pi*A/lambda^2 * eta)^2."""
    eta_sq = _incident_factor(psi_inc) * _reflect_factor(phi_rfl, psi_rfl)
    g = radio.aperture_gain**2 * eta_sq
    return float(g) if np.ndim(g) == 0 else g


def link_element_gain(psi, phi, direction: Direction, radio: RadioParams):
    """One-hop share of the element gain.

    For the trigonometric model the cascaded gain factors exactly into an
    incident part (4 pi A / lambda^2) cos^2 psi_inc and a reflected part
    (4 pi A / lambda^2)(cos^2 phi cos^2 psi + sin^2 phi), so the product of
    both hops reproduces :func:`cascaded_gain_trig`.
    """
    if radio.gain_model is GainModel.COSQ:
        return element_gain_cosq(psi, radio)
    if direction is Direction.TX_TO_IRS:
        return radio.aperture_gain * _incident_factor(psi)
    return radio.aperture_gain * _reflect_factor(phi, psi)


def pathloss_link(d, element_gain, endpoint_gain, radio: RadioParams):
    """Single-hop pathloss G_end * G_elem * A^2 exp(-k d) / (4 pi d)^2."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    xi = (endpoint_gain * np.asarray(element_gain) * radio.element_area**2
          * np.exp(-radio.absorption * d) / (4 * np.pi * d) ** 2)
    return float(xi) if xi.ndim == 0 else xi


def pathloss_cascaded(d1, d2, gain_inc, gain_rfl, radio: RadioParams):
    """Tx -> element -> Rx pathloss with lambda^4 / ((4 pi)^4 (d1 d2)^2) spreading."""
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    if np.any(d1 <= 0) or np.any(d2 <= 0):
        raise ValueError("distances must be positive")
    lam = radio.wavelength
    xi = (radio.tx_gain * np.asarray(gain_inc) * np.asarray(gain_rfl) * radio.rx_gain
          * lam**4 * np.exp(-radio.absorption * (d1 + d2))
          / ((4 * np.pi) ** 4 * (d1 * d2) ** 2))
    return float(xi) if xi.ndim == 0 else xi


def hop_scale(radio: RadioParams) -> float:
    """(lambda / A)^2: turns the A^2 aperture term of a hop into Friis lambda^2.

    With this scale the element-wise product of the Tx->IRS and IRS->Rx
    pathlosses equals :func:`pathloss_cascaded` exactly.
    """
    return (radio.wavelength / radio.element_area) ** 2


def channel_vector_with_distances(node: Point3, panel: IrsPanel, direction: Direction,
                                  radio: RadioParams, elements=None, far_field=False):
    """Per-element channel and the distances used for its phases.

    ``far_field`` replaces every element distance and angle by the panel-centre
    values, which collapses the vector to M identical entries.
    """
    if elements is None:
        from .geometry import element_grid
        elements = element_grid(panel)
    if far_field:
        d, psi, phi = link_geometry(node, panel.center.as_array())
        m = len(elements)
        d, psi, phi = (np.repeat(a, m) for a in (d, psi, phi))
    else:
        d, psi, phi = link_geometry(node, elements)
    endpoint = radio.tx_gain if direction is Direction.TX_TO_IRS else radio.rx_gain
    g_elem = link_element_gain(psi, phi, direction, radio) * hop_scale(radio)
    xi = pathloss_link(d, g_elem, endpoint, radio)
    phase = (2 * np.pi / radio.wavelength) * d
    return np.sqrt(xi) * np.exp(-1j * phase), d


def channel_vector(node: Point3, panel: IrsPanel, direction: Direction, radio: RadioParams,
                   elements=None, far_field=False) -> np.ndarray:
    return channel_vector_with_distances(node, panel, direction, radio, elements, far_field)[0]


def csi_variance(estimate: np.ndarray, relative_error: float) -> float:
    """Error variance eps^2 * mean |h_m|^2 for one link."""
    if relative_error < 0:
        raise ValueError("relative_error must be nonnegative")
    return float(relative_error**2 * np.mean(np.abs(estimate) ** 2))


def sample_csi_error(variance: float, size, rng: np.random.Generator) -> np.ndarray:
    """IID circularly symmetric complex Gaussian entries with the given variance."""
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    if variance == 0:
        return np.zeros(size, dtype=complex)
    std = math.sqrt(variance / 2)
    return rng.normal(0.0, std, size) + 1j * rng.normal(0.0, std, size)


def cascaded_channel(h_hat, h_err, theta, g_hat, g_err):
    """Estimated and error parts of (h_hat + h_err)^T diag(theta) (g_hat + g_err).

    ``theta`` is either the diagonal coefficient vector or an object exposing
    ``coefficients``.
    """
    theta = np.asarray(getattr(theta, "coefficients", theta))
    arrays = [np.asarray(a) for a in (h_hat, h_err, g_hat, g_err)]
    if any(a.shape != theta.shape for a in arrays):
        raise ValueError("all vectors must have the same length as the phase configuration")
    h_hat, h_err, g_hat, g_err = arrays
    est = np.sum(h_hat * theta * g_hat)
    err = np.sum(h_err * theta * g_hat) + np.sum(h_hat * theta * g_err) + np.sum(h_err * theta * g_err)
    return complex(est), complex(err)


def cee_cascaded_variance(h_hat, g_hat, var_h: float, var_g: float,
                          norm: CeeNorm = CeeNorm.TRANSPOSE, amplitude=1.0) -> float:
    """Variance of the cascaded CSI-error term.

    ``amplitude`` is the IRS reflection amplitude (scalar or per element).
    """
    if var_h < 0 or var_g < 0:
        raise ValueError("variances must be nonnegative")
    h_hat = np.asarray(h_hat)
    g_hat = np.asarray(g_hat)
    a2 = np.broadcast_to(np.abs(np.asarray(amplitude, dtype=complex)) ** 2, h_hat.shape)
    if CeeNorm(norm) is CeeNorm.HERMITIAN:
        return float(var_g * np.sum(a2 * np.abs(h_hat) ** 2)
                     + var_h * np.sum(a2 * np.abs(g_hat) ** 2)
                     + var_h * var_g * np.sum(a2))
    scale = float(np.mean(a2))
    return scale * float(var_g * abs(np.sum(h_hat * h_hat))
                         + var_h * abs(np.sum(g_hat * g_hat)) + var_h * var_g)


@dataclass(frozen=True)
class ChannelSet:
    """Estimated channels, sampled errors and error variances for a topology.

    Per-panel lists: ``tx_irs[n]`` has shape (K, M_n), ``irs_rx[n]`` (L, M_n);
    ``tx_dist``/``rx_dist`` hold the matching element distances.
    ``var_h`` is (K, N), ``var_g`` is (N, L).
    """

    tx_irs: tuple
    tx_irs_err: tuple
    irs_rx: tuple
    irs_rx_err: tuple
    tx_dist: tuple
    rx_dist: tuple
    var_h: np.ndarray
    var_g: np.ndarray

    def actual_tx_irs(self, n: int) -> np.ndarray:
        return self.tx_irs[n] + self.tx_irs_err[n]

    def actual_irs_rx(self, n: int) -> np.ndarray:
        return self.irs_rx[n] + self.irs_rx_err[n]


def build_channel_set(topology: Topology, radio: RadioParams, relative_error: float,
                      rng: np.random.Generator, far_field: bool = False) -> ChannelSet:
    K, N, L = topology.num_tx, topology.num_irs, topology.num_rx
    var_h = np.zeros((K, N))
    var_g = np.zeros((N, L))
    tx_irs, tx_err, irs_rx, rx_err, tx_dist, rx_dist = ([] for _ in range(6))
    for n, panel in enumerate(topology.irs_panels):
        grid = topology.grid(n)
        m = len(grid)
        h = np.empty((K, m), complex)
        dh = np.empty((K, m))
        for k, tx in enumerate(topology.transmitters):
            h[k], dh[k] = channel_vector_with_distances(tx, panel, Direction.TX_TO_IRS, radio,
                                                        grid, far_field)
            var_h[k, n] = csi_variance(h[k], relative_error)
        g = np.empty((L, m), complex)
        dg = np.empty((L, m))
        for l, rx in enumerate(topology.receivers):
            g[l], dg[l] = channel_vector_with_distances(rx, panel, Direction.IRS_TO_RX, radio,
                                                        grid, far_field)
            var_g[n, l] = csi_variance(g[l], relative_error)
        tx_irs.append(h)
        irs_rx.append(g)
        tx_dist.append(dh)
        rx_dist.append(dg)
    # Errors drawn after all estimates so the geometry stream is unaffected by eps.
    for n in range(N):
        m = tx_irs[n].shape[1]
        tx_err.append(np.stack([sample_csi_error(var_h[k, n], m, rng) for k in range(K)]))
        rx_err.append(np.stack([sample_csi_error(var_g[n, l], m, rng) for l in range(L)]))
    return ChannelSet(tuple(tx_irs), tuple(tx_err), tuple(irs_rx), tuple(rx_err),
                      tuple(tx_dist), tuple(rx_dist), var_h, var_g)
