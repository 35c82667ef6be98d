"""Scenario generation, Monte-Carlo trials, parameter sweeps and convergence traces."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .baselines import DEFAULT_BUDGET, SchemeId, SchemeOutcome, run_scheme
from .channel import CeeNorm, RadioParams, SPEED_OF_LIGHT, build_channel_set
from .errors import ConfigError
from .geometry import IrsPanel, Point3, Topology
from .matching import phase1_tx_irs, phase2_rx_irs
from .scenario import Scenario
from .sinr import NoiseModel, dbm_to_watts

# spawn-key purposes for the per-trial RNG streams
_GEOMETRY, _CSI, _SCHEME = 0, 1, 2

SWEEP_VARIABLES = ("tx_power", "M", "reflecting_efficiency", "area", "num_pairs", "frequency")


@dataclass(frozen=True)
class ScenarioConfig:
    num_tx: int = 3
    num_rx: int = 3
    num_irs: int = 5
    mx: int = 100
    my: int = 100
    area_m: float = 20.0
    irs_height_range_m: tuple = (0.0, 5.0)
    tx_height_m: float = 1.0
    rx_height_m: float = 1.0
    radio: RadioParams = field(default_factory=RadioParams)
    noise: NoiseModel = field(default_factory=NoiseModel)
    tx_power_dbm: object = 25.0  # scalar or one value per transmitter
    csi_error: float = 0.1
    cee_norm: CeeNorm = CeeNorm.TRANSPOSE
    reflecting_efficiency: float = 1.0
    far_field: bool = False
    schemes: tuple = (SchemeId.PROPOSED,)
    seed: int = 0
    trials: int = 1
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if not self.num_irs >= self.num_tx == self.num_rx >= 1:
            raise ConfigError(f"need N >= K = L >= 1, got K={self.num_tx}, L={self.num_rx}, "
                              f"N={self.num_irs}", "topology")
        if self.mx < 1 or self.my < 1:
            raise ConfigError("panel needs at least one element per axis", "topology")
        if not self.area_m > 0:
            raise ConfigError("area must be positive", "topology.area_m")
        lo, hi = self.irs_height_range_m
        if hi < lo:
            raise ConfigError("height range must be ordered", "topology.irs_height_range_m")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1", "trials")
        if self.csi_error < 0:
            raise ConfigError("relative CSI error must be nonnegative", "csi.relative_error")
        if not 0 < self.reflecting_efficiency <= 1:
            raise ConfigError("reflecting efficiency must lie in (0, 1]",
                              "radio.reflecting_efficiency")
        p = np.atleast_1d(np.asarray(self.tx_power_dbm, dtype=float))
        if p.size not in (1, self.num_tx):
            raise ConfigError("tx_power_dbm must be a scalar or one value per transmitter",
                              "radio.tx_power_dbm")
        object.__setattr__(self, "irs_height_range_m", (float(lo), float(hi)))
        object.__setattr__(self, "cee_norm", CeeNorm(self.cee_norm))
        object.__setattr__(self, "schemes", tuple(SchemeId(s) for s in self.schemes))
        if not self.schemes:
            raise ConfigError("at least one scheme is required", "schemes")

    @property
    def num_elements(self):
        return self.mx * self.my

    @property
    def tx_power_w(self) -> np.ndarray:
        p = np.broadcast_to(np.atleast_1d(np.asarray(self.tx_power_dbm, dtype=float)),
                            (self.num_tx,))
        return dbm_to_watts(p)

    def replace(self, **kw) -> "ScenarioConfig":
        return dataclasses.replace(self, **kw)


def trial_rng(seed: int, trial: int, *purpose) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial, *purpose)))


def generate_topology(config: ScenarioConfig, trial: int) -> Topology:
    rng = trial_rng(config.seed, trial, _GEOMETRY)
    side = config.area_m
    K, L, N = config.num_tx, config.num_rx, config.num_irs
    tx = rng.uniform(0.0, side, (K, 2))
    rx = rng.uniform(0.0, side, (L, 2))
    irs_xy = rng.uniform(0.0, side, (N, 2))
    irs_z = rng.uniform(*config.irs_height_range_m, N)
    s = config.radio.element_side
    return Topology(
        [Point3(x, y, config.tx_height_m) for x, y in tx],
        [Point3(x, y, config.rx_height_m) for x, y in rx],
        [IrsPanel(Point3(x, y, z), config.mx, config.my, s) for (x, y), z in zip(irs_xy, irs_z)],
    )


def generate_scenario(config: ScenarioConfig, trial: int) -> Scenario:
    topo = generate_topology(config, trial)
    channels = build_channel_set(topo, config.radio, config.csi_error,
                                 trial_rng(config.seed, trial, _CSI), config.far_field)
    return Scenario(topo, config.radio, channels, config.tx_power_w, config.noise.power_w,
                    config.reflecting_efficiency, config.cee_norm,
                    meta={"seed": config.seed, "trial": trial})


@dataclass
class TrialResult:
    trial: int
    outcomes: dict  # SchemeId -> SchemeOutcome
    sum_rates: dict  # SchemeId -> bit/s/Hz

    def rows(self):
        for s, out in self.outcomes.items():
            yield {
                "trial": self.trial,
                "scheme": s.value,
                "sum_rate_bps_per_hz": self.sum_rates[s],
                "candidate_evaluations": out.candidate_evaluations,
                "proposals": out.proposals,
                "phase1_rounds": out.phase1_rounds,
                "phase2_rounds": out.phase2_rounds,
            }


def run_trial(scenario: Scenario, schemes, seed: int = None, trial: int = None,
              budget=DEFAULT_BUDGET) -> TrialResult:
    """Allocate with every scheme and score each one on the full interference model."""
    schemes = tuple(SchemeId(s) for s in schemes)
    if not schemes:
        raise ValueError("schemes must be nonempty")
    seed = scenario.meta.get("seed", 0) if seed is None else seed
    trial = scenario.meta.get("trial", 0) if trial is None else trial
    outcomes, rates = {}, {}
    for s in schemes:
        rng = trial_rng(seed, trial, _SCHEME, list(SchemeId).index(s))
        out = run_scheme(s, scenario, rng, budget)
        outcomes[s] = out
        rates[s] = scenario.sum_rate(out.allocation)
    return TrialResult(trial, outcomes, rates)


def run_trials(config: ScenarioConfig):
    for t in range(config.trials):
        yield run_trial(generate_scenario(config, t), config.schemes, config.seed, t,
                        config.budget)


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple
    base: ScenarioConfig
    bandwidths_hz: tuple = None  # frequency sweeps only, parallel to values

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError(f"unknown sweep variable {self.variable!r}; supported: "
                              f"{', '.join(SWEEP_VARIABLES)}", "sweep.variable")
        if len(self.values) == 0:
            raise ConfigError("sweep needs at least one value", "sweep.values")
        if self.bandwidths_hz is not None and len(self.bandwidths_hz) != len(self.values):
            raise ConfigError("bandwidth list must match the value list", "sweep.bandwidth_hz")
        object.__setattr__(self, "values", tuple(self.values))


def apply_sweep(config: ScenarioConfig, variable: str, value, bandwidth_hz=None):
    if variable == "tx_power":
        return config.replace(tx_power_dbm=float(value))
    if variable == "M":
        side = math.isqrt(int(value))
        if side * side != int(value) or int(value) != value:
            raise ConfigError(f"M={value} is not a perfect square", "sweep.values")
        return config.replace(mx=side, my=side)
    if variable == "reflecting_efficiency":
        return config.replace(reflecting_efficiency=float(value))
    if variable == "area":
        return config.replace(area_m=float(value))
    if variable == "num_pairs":
        k = int(value)
        return config.replace(num_tx=k, num_rx=k)
    if variable == "frequency":
        r = config.radio
        side_wl = r.element_side / r.wavelength
        radio = dataclasses.replace(r, carrier_frequency=float(value),
                                    element_side=side_wl * SPEED_OF_LIGHT / float(value))
        noise = config.noise
        if bandwidth_hz is not None:
            noise = dataclasses.replace(noise, bandwidth_hz=float(bandwidth_hz))
        return config.replace(radio=radio, noise=noise)
    raise ConfigError(f"unknown sweep variable {variable!r}; supported: "
                      f"{', '.join(SWEEP_VARIABLES)}", "sweep.variable")


@dataclass(frozen=True)
class SweepRow:
    sweep_variable: str
    sweep_value: float
    scheme: str
    mean_sum_rate_bps_per_hz: float
    stderr: float
    trials: int
    mean_candidate_evaluations: float
    mean_proposals: float


def _stderr(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0


def run_sweep(spec: SweepSpec, trial_sink=None):
    """Mean and standard error per (value, scheme). Trial seeds are shared across
    schemes and values, so comparisons are paired."""
    rows = []
    for idx, value in enumerate(spec.values):
        bw = spec.bandwidths_hz[idx] if spec.bandwidths_hz is not None else None
        cfg = apply_sweep(spec.base, spec.variable, value, bw)
        results = list(run_trials(cfg))
        if trial_sink is not None:
            trial_sink(value, results)
        for s in cfg.schemes:
            r = np.array([t.sum_rates[s] for t in results])
            ev = np.array([t.outcomes[s].candidate_evaluations for t in results], float)
            pr = np.array([t.outcomes[s].proposals for t in results], float)
            rows.append(SweepRow(spec.variable, float(value), s.value, float(r.mean()),
                                 _stderr(r), r.size, float(ev.mean()), float(pr.mean())))
    return rows


@dataclass(frozen=True)
class ConvergenceTrace:
    phase1: tuple
    phase2: tuple


def convergence_trace(scenario: Scenario) -> ConvergenceTrace:
    """Cumulative pseudo sum rate after each matching round, per phase."""
    p1 = phase1_tx_irs(scenario)
    p2 = phase2_rx_irs(scenario, p1)
    return ConvergenceTrace(p1.match.trace, p2.match.trace)
