import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_scenario
from thzirs import fixtures
from thzirs.errors import UnsupportedConfigurationError
from thzirs.matching import (VACANT, build_priorities, deferred_acceptance, is_stable,
                             iteration_audit, phase1_tx_irs, phase2_rx_irs)


def test_priority_order_table_iii():
    pm = build_priorities(fixtures.TX_IRS_TX_SIDE)
    assert pm.order[0].tolist() == [0, 1, 2, 3]
    assert pm.order[2].tolist() == [1, 2, 3, 0]


def test_priority_ties_by_index():
    pm = build_priorities(np.full((2, 4), 0.5))
    assert pm.order.tolist() == [[0, 1, 2, 3]] * 2
    assert not pm.prefers(0, 3, 0) and pm.prefers(0, 0, 3)


def test_priority_trivial_and_errors():
    assert build_priorities([[0.7]]).order.tolist() == [[0]]
    with pytest.raises(ValueError):
        build_priorities(np.zeros((2, 0)))
    with pytest.raises(ValueError):
        build_priorities([[np.nan]])


def test_table_iii_rounds():
    res = fixtures.run_tx_irs()
    assert res.pairs == ((0, 0), (1, 1), (2, 2))
    assert res.holders[3] == VACANT
    assert np.allclose(res.trace, (0.826, 1.071, 1.231), atol=1e-3)
    r1, r2, r3 = res.rounds
    assert [(e.proposer, e.responder, e.outcome) for e in r1.events] == [
        (0, 0, "accepted"), (1, 0, "rejected"), (2, 1, "accepted")]
    assert r1.unmatched == (1,)
    assert [(e.proposer, e.responder, e.outcome, e.released) for e in r2.events] == [
        (1, 1, "replaced", 2)]
    assert r2.unmatched == (2,)
    assert r3.unmatched == ()


def test_table_iv_rounds():
    res = fixtures.run_rx_irs()
    assert res.pairs == ((0, 2), (1, 1), (2, 0))
    assert np.allclose(res.trace, (0.091, 0.096, 0.096, 0.106), atol=1e-3)
    # I2 swaps R1 for R2 in round 2
    assert res.rounds[1].events[0].released == 0


def _all_matchings(p, r):
    for cols in itertools.permutations(range(r), p):
        yield list(cols)


def test_identical_proposer_lists_give_the_unique_stable_matching(rng):
    for _ in range(20):
        row = rng.permutation(3).astype(float)
        pv = np.tile(row, (3, 1))
        rv = rng.uniform(size=(3, 3))
        pp, rp = build_priorities(pv), build_priorities(rv)
        stable = [m for m in _all_matchings(3, 3) if is_stable(m, pp, rp).stable]
        assert len(stable) == 1
        assert list(deferred_acceptance(pp, rp).partner) == stable[0]


def test_stable_against_brute_force(rng):
    for _ in range(30):
        p, r = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        pp = build_priorities(rng.uniform(size=(p, r)))
        rp = build_priorities(rng.uniform(size=(r, p)))
        res = deferred_acceptance(pp, rp)
        assert is_stable(res.partner, pp, rp).stable
        if p <= r:
            # proposer-optimal: no stable matching gives any proposer a better partner
            for m in _all_matchings(p, r):
                if is_stable(m, pp, rp).stable:
                    assert all(pp.rank[i, res.partner[i]] <= pp.rank[i, m[i]] for i in range(p))


def test_is_stable_examples():
    pp = build_priorities(fixtures.TX_IRS_TX_SIDE)
    rp = build_priorities(fixtures.TX_IRS_IRS_SIDE)
    assert is_stable([0, 1, 2], pp, rp).stable
    rep = is_stable([1, 0, 2], pp, rp)
    assert not rep.stable and rep.blocking_pairs
    assert is_stable({0: 0}, build_priorities([[1.0]]), build_priorities([[1.0]])).stable
    # vacancy loses to any partner
    assert not is_stable([VACANT, 1, 2], pp, rp).stable


def test_audit_table_iii():
    aud = iteration_audit(fixtures.run_tx_irs())
    # five proposals: T1, T2, T3 in round 1, then T2 and T3 once each
    assert aud.proposals == 5
    assert aud.proposals <= 3 * 4 and aud.ok


def test_audit_table_iv_monotone_partner_utility():
    res = fixtures.run_rx_irs()
    i2 = [rd.responder_utilities[1] for rd in res.rounds]
    assert i2[0] == pytest.approx(0.033) and i2[1] == pytest.approx(0.038)
    assert all(b >= a for a, b in zip(i2, i2[1:]))
    assert iteration_audit(res).ok


def test_adversarial_rejection_chain():
    # every proposer wants the same order; every responder favours the highest index
    n = 4
    pv = np.tile(np.arange(n, 0, -1, dtype=float), (n, 1))
    rv = np.tile(np.arange(n, dtype=float), (n, 1))
    res = deferred_acceptance(build_priorities(pv), build_priorities(rv))
    aud = iteration_audit(res)
    assert aud.proposals == 10 and aud.proposals <= n * n
    assert res.partner == (3, 2, 1, 0)


def test_unbalanced_more_proposers_than_responders():
    pp = build_priorities(np.array([[1.0, 0.5], [0.9, 0.8], [0.2, 0.1]]))
    rp = build_priorities(np.array([[0.3, 0.2, 0.9], [0.1, 0.5, 0.4]]))
    res = deferred_acceptance(pp, rp)
    assert sum(r != VACANT for r in res.partner) == 2
    assert is_stable(res.partner, pp, rp).stable
    assert iteration_audit(res).ok


def test_shape_mismatch():
    with pytest.raises(ValueError):
        deferred_acceptance(build_priorities(np.ones((2, 3))), build_priorities(np.ones((2, 3))))


matrices = st.integers(1, 6).flatmap(lambda p: st.integers(1, 8).flatmap(
    lambda r: st.tuples(
        st.lists(st.lists(st.integers(0, 4), min_size=r, max_size=r), min_size=p, max_size=p),
        st.lists(st.lists(st.integers(0, 4), min_size=p, max_size=p), min_size=r, max_size=r))))


@settings(max_examples=200, deadline=None)
@given(matrices)
def test_random_instances_stable_and_bounded(mats):
    pv, rv = (np.array(m, float) / 4 for m in mats)
    pp, rp = build_priorities(pv), build_priorities(rv)
    res = deferred_acceptance(pp, rp)
    assert is_stable(res.partner, pp, rp).stable
    aud = iteration_audit(res)
    assert aud.ok and aud.proposals <= pv.size
    again = deferred_acceptance(pp, rp)
    assert again.partner == res.partner
    assert [(r.events, r.holders, r.proposer_sum) for r in again.rounds] == \
        [(r.events, r.holders, r.proposer_sum) for r in res.rounds]
    # either side may propose; both results are stable
    inv = deferred_acceptance(rp, pp)
    assert is_stable(inv.partner, rp, pp).stable


def test_phase1_forced_and_errors():
    sc = make_scenario(1, 1, m=2)
    p1 = phase1_tx_irs(sc)
    assert p1.pairs == ((0, 0),) and p1.active == (0,)
    sc3 = make_scenario(3, 3, m=2)
    with pytest.raises(UnsupportedConfigurationError):
        phase1_tx_irs(type(sc3)(*_shrink_irs(sc3)))
    with pytest.raises(ValueError):
        phase1_tx_irs(sc, proposer="rx")


def _shrink_irs(sc):
    from thzirs.geometry import Topology
    from thzirs.channel import ChannelSet
    t = sc.topology
    topo = Topology(t.transmitters, t.receivers, t.irs_panels[:2])
    ch = sc.channels
    cs = ChannelSet(ch.tx_irs[:2], ch.tx_irs_err[:2], ch.irs_rx[:2], ch.irs_rx_err[:2],
                    ch.tx_dist[:2], ch.rx_dist[:2], ch.var_h[:, :2], ch.var_g[:2])
    return topo, sc.radio, cs, sc.tx_power_w, sc.noise_w


@pytest.mark.parametrize("seed", range(10))
def test_phase1_stable_on_random_scenarios(seed):
    sc = make_scenario(3, 5, m=3, seed=seed)
    for side in ("tx", "irs"):
        p1 = phase1_tx_irs(sc, proposer=side)
        m = p1.match
        assert is_stable(m.partner, m.proposers, m.responders).stable
        assert len(p1.pairs) == 3 and len(p1.active) == 3
        assert m.proposals <= 3 * 5


@pytest.mark.parametrize("seed", range(10))
def test_phase2_feasible_on_random_scenarios(seed):
    sc = make_scenario(3, 5, m=3, seed=seed)
    p1 = phase1_tx_irs(sc)
    for side in ("rx", "irs"):
        p2 = phase2_rx_irs(sc, p1, proposer=side)
        omega = p2.allocation.to_tensor(3, 5, 3)
        assert omega.sum() == 3
        assert omega.sum(axis=(1, 2)).max() == 1
        assert omega.sum(axis=(0, 2)).max() == 1
        assert omega.sum(axis=(0, 1)).max() == 1
        assert set(p2.allocation.irs) == set(p1.active)
        m = p2.match
        assert is_stable(m.partner, m.proposers, m.responders).stable
        assert m.proposals <= 9


def test_phase2_single_pair_and_errors():
    sc = make_scenario(1, 2, m=2)
    p2 = phase2_rx_irs(sc, phase1_tx_irs(sc))
    assert len(p2.allocation) == 1
    full = make_scenario(2, 3, m=2)
    ch = full.channels
    cs = type(ch)(ch.tx_irs, ch.tx_irs_err, tuple(g[:1] for g in ch.irs_rx),
                  tuple(g[:1] for g in ch.irs_rx_err), ch.tx_dist,
                  tuple(d[:1] for d in ch.rx_dist), ch.var_h, ch.var_g[:, :1])
    t = full.topology
    topo = type(t)(t.transmitters, t.receivers[:1], t.irs_panels)
    sc = type(full)(topo, full.radio, cs, full.tx_power_w, full.noise_w)
    with pytest.raises(UnsupportedConfigurationError):
        phase2_rx_irs(sc, phase1_tx_irs(sc))
