"""Randomized invariant checks with replayable counterexamples."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .baselines import SchemeId, exhaustive_search, run_scheme
from .channel import RadioParams
from .matching import (build_priorities, deferred_acceptance, is_stable, iteration_audit,
                       phase1_tx_irs, phase2_rx_irs)
from .sim import ScenarioConfig, generate_scenario, trial_rng
from .sinr import PhaseShiftConfig, ideal_phases

FAMILIES = ("stability", "es_dominance", "coherent_combining")


def reversed_tie_preference(responders, r, new, held):
    """Deliberately faulty rule: ties go to the higher index instead of the lower."""
    a, b = responders.values[r, new], responders.values[r, held]
    if a == b:
        return new > held
    return a > b


FAULTS = {"reversed-tie": reversed_tie_preference}


@dataclass
class ValidationReport:
    counts: dict = field(default_factory=lambda: {f: 0 for f in FAMILIES})
    counterexamples: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.counterexamples

    @property
    def total(self):
        return sum(self.counts.values())


def check_stability(proposer_values, responder_values, fault=None):
    """Failure messages for one deferred-acceptance instance (empty when clean)."""
    pp = build_priorities(proposer_values)
    rp = build_priorities(responder_values)
    res = deferred_acceptance(pp, rp, FAULTS[fault] if fault else None)
    msgs = []
    rep = is_stable(res.partner, pp, rp)
    if not rep.stable:
        msgs.append(f"blocking pairs {list(rep.blocking_pairs)}")
    aud = iteration_audit(res)
    if not aud.ok:
        msgs.append(f"audit failed: {aud}")
    return msgs


def _small_config(rng, base: ScenarioConfig | None, seed: int):
    k = int(rng.integers(1, 4))
    n = int(rng.integers(k, 6))
    cfg = base or ScenarioConfig(mx=4, my=4)
    return cfg.replace(num_tx=k, num_rx=k, num_irs=n, seed=seed, trials=1,
                       csi_error=float(rng.choice([0.0, 0.1])))


def config_to_doc(cfg: ScenarioConfig) -> dict:
    r, nz = cfg.radio, cfg.noise
    return {
        "topology": {"num_tx": cfg.num_tx, "num_rx": cfg.num_rx, "num_irs": cfg.num_irs,
                     "irs_mx": cfg.mx, "irs_my": cfg.my, "area_m": cfg.area_m,
                     "irs_height_range_m": list(cfg.irs_height_range_m),
                     "tx_height_m": cfg.tx_height_m, "rx_height_m": cfg.rx_height_m,
                     "far_field": cfg.far_field},
        "radio": {"carrier_frequency_hz": r.carrier_frequency, "absorption_per_m": r.absorption,
                  "tx_gain_dbi": float(10 * np.log10(r.tx_gain)),
                  "rx_gain_dbi": float(10 * np.log10(r.rx_gain)),
                  "element_side_m": r.element_side, "element_efficiency": r.element_efficiency,
                  "directivity_exponent": r.directivity_exponent,
                  "gain_model": r.gain_model.value,
                  "tx_power_dbm": np.asarray(cfg.tx_power_dbm, float).tolist(),
                  "reflecting_efficiency": cfg.reflecting_efficiency},
        "noise": {"n0_dbm_per_hz": nz.n0_dbm_per_hz, "bandwidth_hz": nz.bandwidth_hz,
                  "noise_figure_db": nz.noise_figure_db},
        "csi": {"relative_error": cfg.csi_error, "variance_norm": cfg.cee_norm.value},
        "schemes": [s.value for s in cfg.schemes],
        "seed": cfg.seed,
        "trials": cfg.trials,
    }


def check_es_dominance(cfg: ScenarioConfig, trial: int = 0):
    sc = generate_scenario(cfg, trial)
    es = exhaustive_search(sc, cfg.budget)
    best = sc.sum_rate(es.allocation)
    msgs = []
    for s in SchemeId:
        if s is SchemeId.ES:
            continue
        out = run_scheme(s, sc, trial_rng(cfg.seed, trial, 2, list(SchemeId).index(s)))
        v = sc.sum_rate(out.allocation)
        if v > best:
            msgs.append(f"{s.value} sum rate {v!r} exceeds ES {best!r}")
    p1 = phase1_tx_irs(sc)
    p2 = phase2_rx_irs(sc, p1)
    for name, m, bound in (("phase 1", p1.match, sc.K * sc.N), ("phase 2", p2.match, sc.L ** 2)):
        if not is_stable(m.partner, m.proposers, m.responders).stable:
            msgs.append(f"{name} matching has blocking pairs")
        aud = iteration_audit(m)
        if not aud.ok or m.proposals > bound:
            msgs.append(f"{name} audit failed: {aud}")
    return msgs


def coherent_instance(seed: int, m: int = 16):
    """Random single-link element channels built from random distances."""
    rng = np.random.default_rng(seed)
    lam = RadioParams().wavelength
    d1 = rng.uniform(1.0, 20.0, m)
    d2 = rng.uniform(1.0, 20.0, m)
    amp_h = rng.uniform(0.5, 1.5, m)
    amp_g = rng.uniform(0.5, 1.5, m)
    h = amp_h * np.exp(-2j * np.pi * d1 / lam)
    g = amp_g * np.exp(-2j * np.pi * d2 / lam)
    return h, g, d1, d2, lam, rng


def check_coherent(seed: int, draws: int = 200, m: int = 16):
    h, g, d1, d2, lam, rng = coherent_instance(seed, m)
    ideal = abs(np.sum(h * PhaseShiftConfig(np.ones(m), ideal_phases(d1, d2, lam)).coefficients * g))
    for _ in range(draws):
        rnd = abs(np.sum(h * PhaseShiftConfig.random(m, rng).coefficients * g))
        if rnd > ideal * (1 + 1e-12):
            return [f"random phases reach {rnd!r} above ideal {ideal!r}"]
    return []


def run_validation(budget: int = 20, seed: int = 0, base: ScenarioConfig = None,
                   fault: str = None) -> ValidationReport:
    """``budget`` random instances per check family; stops a family at its first failure."""
    rep = ValidationReport()
    rng = np.random.default_rng(seed)
    for _ in range(budget):
        p, r = int(rng.integers(1, 7)), int(rng.integers(1, 9))
        # coarse quantization so ties are common
        pv = rng.integers(0, 3, (p, r)) / 2.0
        rv = rng.integers(0, 3, (r, p)) / 2.0
        rep.counts["stability"] += 1
        msgs = check_stability(pv, rv, fault)
        if msgs:
            rep.counterexamples.append({"check": "stability", "fault": fault,
                                        "proposer_values": pv.tolist(),
                                        "responder_values": rv.tolist(), "messages": msgs})
            break
    for i in range(budget):
        cfg = _small_config(rng, base, seed + i)
        rep.counts["es_dominance"] += 1
        msgs = check_es_dominance(cfg)
        if msgs:
            rep.counterexamples.append({"check": "es_dominance", "config": config_to_doc(cfg),
                                        "trial": 0, "messages": msgs})
            break
    for i in range(budget):
        rep.counts["coherent_combining"] += 1
        msgs = check_coherent(seed * 100003 + i)
        if msgs:
            rep.counterexamples.append({"check": "coherent_combining", "seed": seed * 100003 + i,
                                        "messages": msgs})
            break
    return rep


def replay(counterexample: dict):
    """Re-run a serialized counterexample; returns its failure messages."""
    kind = counterexample["check"]
    if kind == "stability":
        return check_stability(np.array(counterexample["proposer_values"]),
                               np.array(counterexample["responder_values"]),
                               counterexample.get("fault"))
    if kind == "es_dominance":
        from .config import scenario_config
        return check_es_dominance(scenario_config(counterexample["config"]),
                                  counterexample.get("trial", 0))
    if kind == "coherent_combining":
        return check_coherent(counterexample["seed"])
    raise ValueError(f"unknown check {kind!r}")
