"""Priority matrices and deferred-acceptance association with round logs and audits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import UnsupportedConfigurationError
from .sinr import Allocation, pseudo_rate

VACANT = -1


@dataclass(frozen=True)
class PriorityMatrix:
    """Utility per (row agent, column agent) and the descending ranking per row.

    Ties are ranked by ascending column index.
    """

    values: np.ndarray
    order: np.ndarray
    rank: np.ndarray

    @property
    def shape(self):
        return self.values.shape

    def prefers(self, row: int, a: int, b: int) -> bool:
        """True if ``row`` strictly ranks column ``a`` above column ``b``."""
        return bool(self.rank[row, a] < self.rank[row, b])


def build_priorities(values) -> PriorityMatrix:
    v = np.array(values, dtype=float, ndmin=2)
    if v.size == 0 or v.shape[1] == 0:
        raise ValueError("empty preference lists")
    if not np.all(np.isfinite(v)):
        raise ValueError("utilities must be finite")
    order = np.argsort(-v, axis=1, kind="stable")
    rank = np.empty_like(order)
    rows = np.arange(v.shape[0])[:, None]
    rank[rows, order] = np.arange(v.shape[1])[None, :]
    v.setflags(write=False)
    return PriorityMatrix(v, order, rank)


# Hook signature: (responders, responder, challenger, holder) -> keep challenger?
Preference = Callable[[PriorityMatrix, int, int, int], bool]


def rank_preference(responders: PriorityMatrix, r: int, new: int, held: int) -> bool:
    return responders.prefers(r, new, held)


@dataclass(frozen=True)
class Event:
    proposer: int
    responder: int
    outcome: str  # "accepted", "replaced", "rejected"
    released: int = VACANT


@dataclass(frozen=True)
class RoundRecord:
    index: int
    events: tuple
    holders: tuple  # responder -> proposer or VACANT, after the round
    proposer_sum: float
    responder_utilities: tuple  # responder-side value of the held proposer, nan if vacant
    unmatched: tuple


@dataclass(frozen=True)
class MatchResult:
    proposers: PriorityMatrix
    responders: PriorityMatrix
    partner: tuple  # proposer -> responder or VACANT
    holders: tuple  # responder -> proposer or VACANT
    rounds: tuple

    @property
    def pairs(self):
        return tuple((p, r) for p, r in enumerate(self.partner) if r != VACANT)

    @property
    def proposals(self) -> int:
        return sum(len(rd.events) for rd in self.rounds)

    @property
    def trace(self):
        return tuple(rd.proposer_sum for rd in self.rounds)

    @property
    def utility(self) -> float:
        return self.rounds[-1].proposer_sum if self.rounds else 0.0


def deferred_acceptance(proposers: PriorityMatrix, responders: PriorityMatrix,
                        responder_prefers: Optional[Preference] = None) -> MatchResult:
    """Synchronous rounds: every free proposer (ascending index) proposes to its next
    choice, then each responder considers its proposals in that order.
    """
    P, R = proposers.shape
    if responders.shape != (R, P):
        raise ValueError(f"responder matrix must be {R}x{P}, got {responders.shape}")
    keep = responder_prefers or rank_preference
    cursor = [0] * P
    partner = [VACANT] * P
    holder = [VACANT] * R
    tried = [set() for _ in range(P)]
    rounds = []
    free = [p for p in range(P)]
    while True:
        active = [p for p in free if cursor[p] < R]
        if not active:
            break
        events = []
        for p in active:
            r = int(proposers.order[p, cursor[p]])
            cursor[p] += 1
            if r in tried[p]:
                raise AssertionError("proposer repeated a proposal")
            tried[p].add(r)
            cur = holder[r]
            if cur == VACANT:
                holder[r], partner[p] = p, r
                events.append(Event(p, r, "accepted"))
            elif keep(responders, r, p, cur):
                holder[r], partner[p], partner[cur] = p, r, VACANT
                events.append(Event(p, r, "replaced", cur))
            else:
                events.append(Event(p, r, "rejected"))
        free = [p for p in range(P) if partner[p] == VACANT]
        psum = float(sum(proposers.values[p, r] for p, r in enumerate(partner) if r != VACANT))
        rutil = tuple(float(responders.values[r, q]) if q != VACANT else float("nan")
                      for r, q in enumerate(holder))
        rounds.append(RoundRecord(len(rounds) + 1, tuple(events), tuple(holder), psum, rutil,
                                  tuple(free)))
    return MatchResult(proposers, responders, tuple(partner), tuple(holder), tuple(rounds))


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    blocking_pairs: tuple


def is_stable(partner, proposers: PriorityMatrix, responders: PriorityMatrix) -> StabilityReport:
    """Blocking-pair audit. ``partner`` maps proposer -> responder (VACANT allowed);
    a dict or sequence is accepted. Vacancy ranks below every partner."""
    P, R = proposers.shape
    if isinstance(partner, dict):
        partner = [partner.get(p, VACANT) for p in range(P)]
    partner = list(partner)
    holder = [VACANT] * R
    for p, r in enumerate(partner):
        if r != VACANT:
            holder[r] = p
    blocking = []
    for p in range(P):
        for r in range(R):
            if partner[p] == r:
                continue
            p_wants = partner[p] == VACANT or proposers.prefers(p, r, partner[p])
            r_wants = holder[r] == VACANT or responders.prefers(r, p, holder[r])
            if p_wants and r_wants:
                blocking.append((p, r))
    return StabilityReport(not blocking, tuple(blocking))


@dataclass(frozen=True)
class AuditReport:
    proposals: int
    bound: int
    within_bound: bool
    responder_monotone: bool
    no_repeats: bool

    @property
    def ok(self):
        return self.within_bound and self.responder_monotone and self.no_repeats


def iteration_audit(result: MatchResult) -> AuditReport:
    P, R = result.proposers.shape
    seen = set()
    repeats = False
    for rd in result.rounds:
        for ev in rd.events:
            key = (ev.proposer, ev.responder)
            repeats |= key in seen
            seen.add(key)
    monotone = True
    prev = [float("-inf")] * R
    for rd in result.rounds:
        for r, u in enumerate(rd.responder_utilities):
            if np.isnan(u):
                if prev[r] != float("-inf"):
                    monotone = False  # a held responder never becomes vacant
                continue
            if u < prev[r]:
                monotone = False
            prev[r] = u
    n = result.proposals
    return AuditReport(n, P * R, n <= P * R, monotone, not repeats)


@dataclass(frozen=True)
class Phase1Result:
    match: MatchResult
    pairs: tuple  # (tx, irs) sorted by tx
    active: tuple  # matched IRS indices, ascending
    utilities: np.ndarray  # (K, N) pseudo rates


@dataclass(frozen=True)
class Phase2Result:
    match: MatchResult
    allocation: Allocation
    utilities: np.ndarray  # (L, A) pseudo rates over phase-1 pairs


def _oriented(values: np.ndarray, proposer_side: bool, responder_prefers):
    if proposer_side:
        return deferred_acceptance(build_priorities(values), build_priorities(values.T),
                                   responder_prefers)
    return deferred_acceptance(build_priorities(values.T), build_priorities(values),
                               responder_prefers)


def _pairs_from(match: MatchResult, proposer_side: bool):
    if proposer_side:
        return match.pairs
    return tuple((r, p) for p, r in match.pairs)


def phase1_tx_irs(scenario, proposer: str = "tx", responder_prefers=None) -> Phase1Result:
    """Tx-IRS matching on one-hop pseudo rates; unmatched panels become inactive.

    ``proposer="irs"`` inverts the proposing side.
    """
    if scenario.N < scenario.K:
        raise UnsupportedConfigurationError(
            f"need at least as many IRSs as transmitters (N={scenario.N}, K={scenario.K})")
    if proposer not in ("tx", "irs"):
        raise ValueError("proposer must be 'tx' or 'irs'")
    util = pseudo_rate(scenario.pseudo_tx_irs_matrix())
    tx_side = proposer == "tx"
    match = _oriented(util, tx_side, responder_prefers)
    pairs = tuple(sorted(_pairs_from(match, tx_side)))
    return Phase1Result(match, pairs, tuple(sorted(n for _, n in pairs)), util)


def phase2_rx_irs(scenario, phase1: Phase1Result, proposer: str = "rx",
                  responder_prefers=None) -> Phase2Result:
    """Rx-IRS matching over the phase-1 active panels on cascaded pseudo rates."""
    if scenario.L != scenario.K:
        raise UnsupportedConfigurationError(
            f"receivers must equal transmitters (L={scenario.L}, K={scenario.K})")
    if proposer not in ("rx", "irs"):
        raise ValueError("proposer must be 'rx' or 'irs'")
    pairs = phase1.pairs
    util = pseudo_rate(scenario.pseudo_cascaded_matrix(pairs))
    rx_side = proposer == "rx"
    match = _oriented(util, rx_side, responder_prefers)
    triples = tuple((pairs[a][0], pairs[a][1], l) for l, a in _pairs_from(match, rx_side))
    return Phase2Result(match, Allocation(triples), util)
