"""Embedded case-study priority tables and their expected round-by-round traces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import rayleigh_distance
from .matching import MatchResult, build_priorities, deferred_acceptance
from .sinr import noise_power

# Tx-side pseudo rates toward I1..I4, one row per transmitter.
TX_IRS_TX_SIDE = np.array([
    [0.623, 0.134, 0.026, 0.012],
    [0.505, 0.448, 0.044, 0.022],
    [0.025, 0.203, 0.160, 0.157],
])
# IRS-side values toward T1..T3; the (I1, T2) entry is printed as 0.504 here.
TX_IRS_IRS_SIDE = np.array([
    [0.623, 0.504, 0.025],
    [0.134, 0.448, 0.203],
    [0.026, 0.044, 0.160],
    [0.012, 0.022, 0.157],
])
TX_IRS_TRACE = (0.826, 1.071, 1.231)
TX_IRS_MATCH = ((0, 0), (1, 1), (2, 2))  # (T1,I1), (T2,I2), (T3,I3); I4 inactive

# Rx-side pseudo rates toward the active I1..I3, one row per receiver.
RX_IRS_RX_SIDE = np.array([
    [0.021, 0.033, 0.010],
    [0.040, 0.038, 0.003],
    [0.058, 0.012, 0.020],
])
RX_IRS_IRS_SIDE = np.array([
    [0.020, 0.040, 0.058],
    [0.033, 0.038, 0.012],
    [0.010, 0.003, 0.020],
])
RX_IRS_TRACE = (0.091, 0.096, 0.096, 0.106)
# receiver -> IRS: R1->I3, R2->I2, R3->I1
RX_IRS_MATCH = ((0, 2), (1, 1), (2, 0))

# (aperture D in m, expected Rayleigh distance in m) at lambda = 1 mm
RAYLEIGH_ROWS = ((0.012, 0.288), (0.02, 0.8), (0.04, 3.2))
NOISE_EXPECTED_DBM = -64.0


def run_tx_irs(responder_prefers=None) -> MatchResult:
    return deferred_acceptance(build_priorities(TX_IRS_TX_SIDE),
                               build_priorities(TX_IRS_IRS_SIDE), responder_prefers)


def run_rx_irs(responder_prefers=None) -> MatchResult:
    return deferred_acceptance(build_priorities(RX_IRS_RX_SIDE),
                               build_priorities(RX_IRS_IRS_SIDE), responder_prefers)


@dataclass(frozen=True)
class FixtureCheck:
    name: str
    passed: bool
    diff: tuple = ()


def _compare_match(name, result: MatchResult, trace, pairs, tol):
    diff = []
    got = result.trace
    if len(got) != len(trace):
        diff.append(f"round count: expected {len(trace)}, got {len(got)}")
    for i, (e, g) in enumerate(zip(trace, got), start=1):
        if abs(e - g) > tol:
            diff.append(f"round {i}: expected sum {e:.3f}, got {g:.3f}")
    if tuple(result.pairs) != tuple(pairs):
        diff.append(f"final matching: expected {pairs}, got {result.pairs}")
    return FixtureCheck(name, not diff, tuple(diff))


def run_fixtures(tol: float = 1e-3, responder_prefers=None):
    checks = [
        _compare_match("tx-irs case study", run_tx_irs(responder_prefers), TX_IRS_TRACE,
                       TX_IRS_MATCH, tol),
        _compare_match("rx-irs case study", run_rx_irs(responder_prefers), RX_IRS_TRACE,
                       RX_IRS_MATCH, tol),
    ]
    diff = []
    for d, expected in RAYLEIGH_ROWS:
        got = rayleigh_distance(d, 1e-3)
        if abs(got - expected) > 1e-12:
            diff.append(f"D={d}: expected {expected} m, got {got!r} m")
    checks.append(FixtureCheck("rayleigh distances", not diff, tuple(diff)))
    got = noise_power(-174.0, 10e9, 10.0)
    ok = abs(got - NOISE_EXPECTED_DBM) <= 1e-9
    checks.append(FixtureCheck("noise floor", ok,
                               () if ok else (f"expected -64 dBm, got {got!r}",)))
    return checks
