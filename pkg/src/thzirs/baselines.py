"""Association schemes: the two-phase matching, exhaustive search and the comparison heuristics."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceededError, UnsupportedConfigurationError
from .geometry import distance
from .matching import phase1_tx_irs, phase2_rx_irs
from .sinr import Allocation, pseudo_rate

DEFAULT_BUDGET = 10**7


class SchemeId(str, enum.Enum):
    PROPOSED = "proposed"
    ES = "es"
    PES = "pes"
    GS = "gs"
    NA = "na"
    RA = "ra"
    PRA = "pra"

    @property
    def randomized(self) -> bool:
        return self in (SchemeId.GS, SchemeId.RA, SchemeId.PRA)


@dataclass
class SchemeOutcome:
    scheme: SchemeId
    allocation: Allocation
    candidate_evaluations: int = 0
    proposals: int = 0
    phase1_trace: tuple = ()
    phase2_trace: tuple = ()
    extra: dict = field(default_factory=dict)

    @property
    def phase1_rounds(self):
        return len(self.phase1_trace)

    @property
    def phase2_rounds(self):
        return len(self.phase2_trace)


def _require_square(scenario):
    if scenario.N < scenario.K:
        raise UnsupportedConfigurationError(
            f"need N >= K (N={scenario.N}, K={scenario.K})")
    if scenario.L != scenario.K:
        raise UnsupportedConfigurationError(
            f"need L = K (L={scenario.L}, K={scenario.K})")


def es_candidate_count(K: int, N: int, L: int) -> int:
    return math.perm(N, K) * math.factorial(L)


def pes_candidate_count(K: int, N: int, L: int) -> int:
    return math.perm(N, K) + math.factorial(L)


def _check_budget(count: int, budget):
    if budget is not None and count > budget:
        raise BudgetExceededError(f"{count} candidate evaluations exceed the budget of {budget}")


def proposed(scenario, tx_proposes=True, rx_proposes=True) -> SchemeOutcome:
    p1 = phase1_tx_irs(scenario, "tx" if tx_proposes else "irs")
    p2 = phase2_rx_irs(scenario, p1, "rx" if rx_proposes else "irs")
    return SchemeOutcome(SchemeId.PROPOSED, p2.allocation,
                         proposals=p1.match.proposals + p2.match.proposals,
                         phase1_trace=p1.match.trace, phase2_trace=p2.match.trace,
                         extra={"phase1": p1, "phase2": p2})


def exhaustive_search(scenario, budget=DEFAULT_BUDGET) -> SchemeOutcome:
    """Argmax of the true sum rate over every Tx->IRS injection and IRS->Rx permutation.

    Ties keep the first candidate in enumeration order.
    """
    _require_square(scenario)
    K, N, L = scenario.K, scenario.N, scenario.L
    _check_budget(es_candidate_count(K, N, L), budget)
    best, best_val, count = None, -np.inf, 0
    perms = list(itertools.permutations(range(L)))
    for inj in itertools.permutations(range(N), K):
        for perm in perms:
            alloc = Allocation(tuple(zip(range(K), inj, perm)))
            val = scenario.sum_rate(alloc)
            count += 1
            if val > best_val:
                best, best_val = alloc, val
    return SchemeOutcome(SchemeId.ES, best, candidate_evaluations=count,
                         extra={"sum_rate": best_val})


def partial_exhaustive_search(scenario, budget=DEFAULT_BUDGET) -> SchemeOutcome:
    """Stage-wise enumeration on the ranking utilities instead of the true sum rate."""
    _require_square(scenario)
    K, N, L = scenario.K, scenario.N, scenario.L
    _check_budget(pes_candidate_count(K, N, L), budget)
    u1 = pseudo_rate(scenario.pseudo_tx_irs_matrix())
    count = 0
    best_inj, best1 = None, -np.inf
    ks = np.arange(K)
    for inj in itertools.permutations(range(N), K):
        count += 1
        v = float(u1[ks, list(inj)].sum())
        if v > best1:
            best_inj, best1 = inj, v
    pairs = tuple(zip(range(K), best_inj))
    u2 = pseudo_rate(scenario.pseudo_cascaded_matrix(pairs))
    best_perm, best2 = None, -np.inf
    for perm in itertools.permutations(range(L)):
        count += 1
        v = float(u2[list(perm), ks].sum())
        if v > best2:
            best_perm, best2 = perm, v
    alloc = Allocation(tuple((k, n, best_perm[k]) for k, n in pairs))
    return SchemeOutcome(SchemeId.PES, alloc, candidate_evaluations=count,
                         extra={"stage1": best1, "stage2": best2})


def greedy_assign(utilities: np.ndarray, rng: np.random.Generator):
    """Every free row claims its best remaining column; a contested column goes to a
    uniformly random claimant and the others retry. Returns (row -> column, claims).
    """
    rows, cols = utilities.shape
    order = np.argsort(-utilities, axis=1, kind="stable")
    assign = {}
    taken = set()
    claims = 0
    free = list(range(rows))
    while free and len(taken) < cols:
        want = {}
        for r in free:
            c = next(int(c) for c in order[r] if int(c) not in taken)
            want.setdefault(c, []).append(r)
            claims += 1
        for c in sorted(want):
            group = want[c]
            winner = group[int(rng.integers(len(group)))] if len(group) > 1 else group[0]
            assign[winner] = c
            taken.add(c)
        free = [r for r in free if r not in assign]
    return assign, claims


def greedy_search(scenario, rng: np.random.Generator) -> SchemeOutcome:
    _require_square(scenario)
    u1 = pseudo_rate(scenario.pseudo_tx_irs_matrix())
    a1, c1 = greedy_assign(u1, rng)
    pairs = tuple(sorted(a1.items()))
    u2 = pseudo_rate(scenario.pseudo_cascaded_matrix(pairs))
    a2, c2 = greedy_assign(u2, rng)
    alloc = Allocation(tuple((pairs[a][0], pairs[a][1], l) for l, a in a2.items()))
    return SchemeOutcome(SchemeId.GS, alloc, proposals=c1 + c2)


def nearest_assign(dist: np.ndarray):
    """Each free row claims its nearest free column; the closest claimant keeps it
    (lower index on exact ties) and the others retry on what remains."""
    rows, cols = dist.shape
    order = np.argsort(dist, axis=1, kind="stable")
    assign, taken = {}, set()
    free = list(range(rows))
    while free and len(taken) < cols:
        want = {}
        for r in free:
            c = next(int(c) for c in order[r] if int(c) not in taken)
            want.setdefault(c, []).append(r)
        for c, group in want.items():
            winner = min(group, key=lambda r: (dist[r, c], r))
            assign[winner] = c
            taken.add(c)
        free = [r for r in free if r not in assign]
    return assign


def nearest_association(scenario) -> SchemeOutcome:
    _require_square(scenario)
    topo = scenario.topology
    centers = [p.center for p in topo.irs_panels]
    d1 = np.array([[distance(t, c) for c in centers] for t in topo.transmitters])
    a1 = nearest_assign(d1)
    pairs = tuple(sorted(a1.items()))
    d2 = np.array([[distance(r, centers[n]) for _, n in pairs] for r in topo.receivers])
    a2 = nearest_assign(d2)
    alloc = Allocation(tuple((pairs[a][0], pairs[a][1], l) for l, a in a2.items()))
    return SchemeOutcome(SchemeId.NA, alloc)


def unrank_injection(index: int, n: int, k: int) -> tuple:
    """The ``index``-th k-permutation of range(n) in lexicographic order."""
    if not 0 <= index < math.perm(n, k):
        raise ValueError("index out of range")
    pool = list(range(n))
    out = []
    for pos in range(k):
        block = math.perm(n - pos - 1, k - pos - 1)
        q, index = divmod(index, block)
        out.append(pool.pop(q))
    return tuple(out)


def random_allocation(scenario, rng: np.random.Generator) -> SchemeOutcome:
    """One uniform draw over all feasible triple matchings."""
    _require_square(scenario)
    K, N, L = scenario.K, scenario.N, scenario.L
    u = int(rng.integers(es_candidate_count(K, N, L)))
    i_inj, i_perm = divmod(u, math.factorial(L))
    inj = unrank_injection(i_inj, N, K)
    perm = unrank_injection(i_perm, L, L)
    return SchemeOutcome(SchemeId.RA, Allocation(tuple(zip(range(K), inj, perm))))


def partial_random_allocation(scenario, rng: np.random.Generator) -> SchemeOutcome:
    """Uniform Tx->IRS injection, then an independent uniform IRS->Rx permutation."""
    _require_square(scenario)
    K, N, L = scenario.K, scenario.N, scenario.L
    inj = rng.permutation(N)[:K]
    perm = rng.permutation(L)
    return SchemeOutcome(SchemeId.PRA, Allocation(tuple(zip(range(K), inj, perm))))


def run_scheme(scheme, scenario, rng=None, budget=DEFAULT_BUDGET) -> SchemeOutcome:
    scheme = SchemeId(scheme)
    if scheme.randomized and rng is None:
        raise ValueError(f"{scheme.value} needs an rng")
    if scheme is SchemeId.PROPOSED:
        return proposed(scenario)
    if scheme is SchemeId.ES:
        return exhaustive_search(scenario, budget)
    if scheme is SchemeId.PES:
        return partial_exhaustive_search(scenario, budget)
    if scheme is SchemeId.GS:
        return greedy_search(scenario, rng)
    if scheme is SchemeId.NA:
        return nearest_association(scenario)
    if scheme is SchemeId.RA:
        return random_allocation(scenario, rng)
    return partial_random_allocation(scenario, rng)
