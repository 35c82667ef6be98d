"""A fully built network instance with cached coupling tensors for fast SINR queries."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .channel import ChannelSet, CeeNorm, RadioParams, cee_cascaded_variance
from .errors import InfeasibleAllocationError
from .geometry import Topology
from .sinr import Allocation, ideal_phases, rate


@dataclass(eq=False)
class Scenario:
    """Topology, channels, powers and noise of one Monte-Carlo instance.

    ``coupling[i, k', l', j, l]`` is the estimated cascaded channel from Tx j
    through panel i to Rx l while panel i is steered for the (k', l') link.
    """

    topology: Topology
    radio: RadioParams
    channels: ChannelSet
    tx_power_w: np.ndarray
    noise_w: float
    amplitude: float = 1.0
    cee_norm: CeeNorm = CeeNorm.TRANSPOSE
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        K = self.topology.num_tx
        p = np.broadcast_to(np.asarray(self.tx_power_w, dtype=float), (K,)).copy()
        if np.any(p < 0):
            raise ValueError("transmit powers must be nonnegative")
        if not self.noise_w > 0:
            raise ValueError("noise power must be positive")
        if not 0 < self.amplitude <= 1:
            raise ValueError("reflection amplitude must lie in (0, 1]")
        self.tx_power_w = p
        self.cee_norm = CeeNorm(self.cee_norm)

    @property
    def K(self):
        return self.topology.num_tx

    @property
    def N(self):
        return self.topology.num_irs

    @property
    def L(self):
        return self.topology.num_rx

    @cached_property
    def coupling(self) -> np.ndarray:
        K, N, L = self.K, self.N, self.L
        ch = self.channels
        lam = self.radio.wavelength
        out = np.empty((N, K, L, K, L), dtype=complex)
        for i in range(N):
            theta = ideal_phases(ch.tx_dist[i][:, None, :], ch.rx_dist[i][None, :, :], lam)
            steer = self.amplitude * np.exp(1j * theta).reshape(K * L, -1)
            prod = (ch.tx_irs[i][:, None, :] * ch.irs_rx[i][None, :, :]).reshape(K * L, -1)
            out[i] = (steer @ prod.T).reshape(K, L, K, L)
        return out

    @cached_property
    def power(self) -> np.ndarray:
        return np.abs(self.coupling) ** 2

    @cached_property
    def cee_var(self) -> np.ndarray:
        """Per (panel, tx, rx) CSI-error variance of the cascaded channel."""
        K, N, L = self.K, self.N, self.L
        ch = self.channels
        v = np.zeros((N, K, L))
        for i in range(N):
            for j in range(K):
                for l in range(L):
                    v[i, j, l] = cee_cascaded_variance(ch.tx_irs[i][j], ch.irs_rx[i][l],
                                                       ch.var_h[j, i], ch.var_g[i, l],
                                                       self.cee_norm, self.amplitude)
        return v

    @cached_property
    def self_gain(self) -> np.ndarray:
        """(N, K) one-hop gains |h^T h| (or ||h||^2 in Hermitian mode)."""
        out = np.empty((self.N, self.K))
        for i, h in enumerate(self.channels.tx_irs):
            if self.cee_norm is CeeNorm.HERMITIAN:
                out[i] = np.sum(np.abs(h) ** 2, axis=1)
            else:
                out[i] = np.abs(np.sum(h * h, axis=1))
        return out

    def _indices(self, allocation: Allocation):
        allocation.check(self.K, self.N, self.L)
        t = np.array(allocation.triples, dtype=int).reshape(-1, 3)
        return t[:, 0], t[:, 1], t[:, 2]

    def sinr_values(self, allocation: Allocation) -> np.ndarray:
        """SINR of every triple, each active panel at its own ideal phase shift."""
        if not isinstance(allocation, Allocation):
            allocation = Allocation(tuple(allocation))
        ks, ns, ls = self._indices(allocation)
        if ks.size == 0:
            return np.zeros(0)
        p = self.tx_power_w[ks]
        P = self.power
        sig = p * P[ns, ks, ls, ks, ls]
        # q[b, j, a]: Tx ks[j] via panel ns[b] (steered for pair b) at Rx ls[a]
        q = P[ns[:, None, None], ks[:, None, None], ls[:, None, None],
              ks[None, :, None], ls[None, None, :]]
        q = (p[None, :, None] * q).sum(axis=0)
        interference = q.sum(axis=0) - np.diag(q)
        csi = (p[None, :, None] * self.cee_var[ns[:, None, None], ks[None, :, None],
                                               ls[None, None, :]]).sum(axis=(0, 1))
        return sig / (interference + csi + self.noise_w)

    def sum_rate(self, allocation) -> float:
        if not isinstance(allocation, Allocation):
            allocation = Allocation(tuple(allocation))
        if len(allocation) == 0:
            allocation.check(self.K, self.N, self.L)
            return 0.0
        return float(np.sum(rate(self.sinr_values(allocation))))

    def pseudo_tx_irs_matrix(self) -> np.ndarray:
        """(K, N) one-hop ranking SINRs toward each panel."""
        S = self.self_gain.T * self.tx_power_w[:, None]
        interference = S.sum(axis=0, keepdims=True) - S
        err = (self.channels.var_h * self.tx_power_w[:, None]).sum(axis=0, keepdims=True)
        return S / (interference + err + self.noise_w)

    def pseudo_cascaded_matrix(self, phase1_pairs) -> np.ndarray:
        """(L, A) ranking SINRs of each receiver through each of the A phase-1 pairs.

        While ranking, every other active panel is steered from its own phase-1
        transmitter toward the candidate receiver.
        """
        pairs = tuple(phase1_pairs)
        if not pairs:
            return np.zeros((self.L, 0))
        ks = np.array([k for k, _ in pairs])
        ns = np.array([n for _, n in pairs])
        if len(set(ks.tolist())) != len(ks) or len(set(ns.tolist())) != len(ns):
            raise InfeasibleAllocationError("phase-1 pairs must be one-to-one")
        P = self.power
        p = self.tx_power_w[ks]
        ls = np.arange(self.L)
        # Q[l, b, j] = power of Tx ks[j] via panel ns[b] steered for (ks[b], l), at Rx l
        Q = P[ns[None, :, None], ks[None, :, None], ls[:, None, None],
              ks[None, None, :], ls[:, None, None]] * p[None, None, :]
        sig = np.einsum("lbb->lb", Q)
        interference = Q.sum(axis=(1, 2))[:, None] - Q.sum(axis=1)
        csi = (self.cee_var[ns[:, None, None], ks[None, :, None], ls[None, None, :]]
               * p[None, :, None]).sum(axis=(0, 1))
        return sig / (interference + csi[:, None] + self.noise_w)
