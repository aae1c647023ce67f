"""Particle-swarm search for base-station placements.

The swarm core is generic: it minimizes any vector objective over a box.
On top of it, the placement pipeline turns a candidate set of base-station
positions into an objective value by regenerating shadowing and data for
that placement, training a verifier network, and reporting either its
final training cross-entropy (cheap proxy) or its test-set AUC.

Seeds for fields, data, and network init stay constant for the whole run,
so every particle in every iteration faces the same noise realization and
objective differences reflect placement alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams, generate_fields
from .dataset import generate_dataset, normalize, split
from .evaluation import auc, empirical_roc
from .mlp import TrainConfig, default_layer_sizes, forward, init_mlp, train

OBJECTIVE_CE = "ce"
OBJECTIVE_AUC = "auc"
OBJECTIVES = (OBJECTIVE_CE, OBJECTIVE_AUC)


@dataclass
class Particle:
    x: np.ndarray
    v: np.ndarray
    best_x: np.ndarray
    best_value: float


@dataclass(frozen=True)
class PsoConfig:
    n_particles: int = 6
    inertia: float = 0.7298
    c1: float = 1.4961
    c2: float = 1.4961
    max_iterations: int = 50
    stall_iterations: int = 5
    stall_tolerance: float = 1e-4
    objective: str = OBJECTIVE_CE

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        # zero inertia/acceleration freezes the swarm, still a valid run
        if self.inertia < 0 or self.c1 < 0 or self.c2 < 0:
            raise ValueError("inertia and accelerations must be non-negative")
        if self.max_iterations < 0 or self.stall_iterations < 1:
            raise ValueError("invalid iteration limits")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")


@dataclass
class SwarmState:
    particles: list[Particle]
    best_x: np.ndarray
    best_value: float
    iteration: int = 0
    history: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class PsoResult:
    best_x: np.ndarray
    best_value: float
    history: list[float]
    best_x_history: list[np.ndarray]
    particle_values: list[list[float]]
    n_iterations: int
    converged: bool


def _as_bounds(bounds, dim: int) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = bounds
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (dim,)).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (dim,)).copy()
    if np.any(lo >= hi):
        raise ValueError("lower bounds must stay below upper bounds")
    return lo, hi


def init_swarm(objective_fn, bounds, config: PsoConfig, dim: int,
               rng: np.random.Generator, initial_positions=None) -> SwarmState:
    """P particles uniform over the box (or at given seeds), evaluated once.

    Initial velocities are uniform within one tenth of the box extent per
    axis; the global best is the minimum of the initial evaluations.
    """
    lo, hi = _as_bounds(bounds, dim)
    span = hi - lo
    particles = []
    for p in range(config.n_particles):
        if initial_positions is not None:
            x = np.clip(np.asarray(initial_positions[p], dtype=float), lo, hi)
        else:
            x = rng.uniform(lo, hi)
        v = rng.uniform(-span / 10.0, span / 10.0)
        value = float(objective_fn(x))
        particles.append(Particle(x=x, v=v, best_x=x.copy(), best_value=value))
    best = min(particles, key=lambda q: q.best_value)
    state = SwarmState(
        particles=particles, best_x=best.best_x.copy(), best_value=best.best_value
    )
    state.history.append(state.best_value)
    return state


def step_particle(particle: Particle, global_best_x: np.ndarray, bounds,
                  config: PsoConfig, rng: np.random.Generator) -> Particle:
    """One velocity/position update with per-coordinate acceleration draws."""
    lo, hi = _as_bounds(bounds, len(particle.x))
    phi1 = rng.uniform(0.0, config.c1, size=particle.x.shape)
    phi2 = rng.uniform(0.0, config.c2, size=particle.x.shape)
    particle.v = (
        config.inertia * particle.v
        + phi1 * (particle.best_x - particle.x)
        + phi2 * (global_best_x - particle.x)
    )
    particle.x = np.clip(particle.x + particle.v, lo, hi)
    return particle


def run_pso(objective_fn, bounds, dim: int, config: PsoConfig,
            rng: np.random.Generator, initial_positions=None) -> PsoResult:
    """Minimize objective_fn over the box until the global best stalls.

    Particles move and are re-evaluated each iteration; personal bests
    update immediately, the global best as a reduction after the sweep.
    Stops after stall_iterations without improvement beyond
    stall_tolerance, or at max_iterations.
    """
    state = init_swarm(objective_fn, bounds, config, dim, rng, initial_positions)
    particle_values = [[p.best_value for p in state.particles]]
    best_x_history = [state.best_x.copy()]
    stall = 0
    converged = False
    while state.iteration < config.max_iterations:
        state.iteration += 1
        values = []
        for particle in state.particles:
            step_particle(particle, state.best_x, bounds, config, rng)
            value = float(objective_fn(particle.x))
            values.append(value)
            if value < particle.best_value:
                particle.best_value = value
                particle.best_x = particle.x.copy()
        particle_values.append(values)
        candidate = min(state.particles, key=lambda q: q.best_value)
        improvement = state.best_value - candidate.best_value
        if candidate.best_value < state.best_value:
            state.best_value = candidate.best_value
            state.best_x = candidate.best_x.copy()
        state.history.append(state.best_value)
        best_x_history.append(state.best_x.copy())
        stall = stall + 1 if improvement <= config.stall_tolerance else 0
        if stall >= config.stall_iterations:
            converged = True
            break
    return PsoResult(
        best_x=state.best_x,
        best_value=state.best_value,
        history=state.history,
        best_x_history=best_x_history,
        particle_values=particle_values,
        n_iterations=state.iteration,
        converged=converged,
    )


@dataclass(frozen=True)
class PlacementEvalConfig:
    """Everything one placement evaluation needs besides the positions."""

    channel: ChannelParams = ChannelParams()
    s_total: int = 20_000
    p0: float = 0.5
    train_frac: float = 0.7
    n_hidden: int = 8
    n_layers: int = 3
    train: TrainConfig = TrainConfig()
    field_seed: int = 0
    dataset_seed: int = 1
    init_seed: int = 2


@dataclass(frozen=True)
class PlacementScore:
    ce_bits: float
    auc_value: float


def evaluate_placement(scenario, positions, cfg: PlacementEvalConfig) -> PlacementScore:
    """Train-and-score one candidate placement; deterministic per seeds."""
    xy = np.asarray(positions, dtype=float).reshape(-1, 2)
    candidate = scenario.with_bs_positions(xy)
    fields = generate_fields(candidate, cfg.channel, cfg.field_seed)
    ds = generate_dataset(
        candidate, fields, cfg.channel, cfg.s_total, cfg.p0,
        np.random.default_rng(cfg.dataset_seed),
    )
    train_set, test_set = split(ds, cfg.train_frac)
    train_n = normalize(train_set)
    test_n = normalize(test_set, train_n.stats)
    sizes = default_layer_sizes(candidate.n_bs, cfg.n_hidden, cfg.n_layers)
    mlp = init_mlp(sizes, cfg.init_seed)
    mlp, ce = train(mlp, train_n, cfg.train)
    roc = empirical_roc(forward(mlp, test_n.features), test_n.labels)
    return PlacementScore(ce_bits=ce, auc_value=auc(roc))


def evaluate_objective(positions, objective: str, scenario, cfg: PlacementEvalConfig) -> float:
    """Scalar PSO objective: training CE in bits, or test AUC."""
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}")
    score = evaluate_placement(scenario, positions, cfg)
    return score.ce_bits if objective == OBJECTIVE_CE else score.auc_value


def plan_placement(scenario, cfg: PlacementEvalConfig, pso: PsoConfig,
                   rng: np.random.Generator, initial_positions=None) -> PsoResult:
    """PSO over n_bs base-station positions on the scenario map."""
    dim = 2 * scenario.n_bs
    xmin, ymin, xmax, ymax = scenario.bounds
    bounds = (np.tile([xmin, ymin], scenario.n_bs), np.tile([xmax, ymax], scenario.n_bs))

    def objective_fn(x):
        return evaluate_objective(x, pso.objective, scenario, cfg)

    return run_pso(objective_fn, bounds, dim, pso, rng, initial_positions)


@dataclass(frozen=True)
class TwoStageResult:
    stage1: PsoResult
    stage2: PsoResult | None
    best_x: np.ndarray
    best_value: float

    @property
    def history(self) -> list[float]:
        if self.stage2 is None:
            return list(self.stage1.history)
        return list(self.stage1.history) + list(self.stage2.history)


def plan_two_stage(scenario, cfg: PlacementEvalConfig, stage1: PsoConfig,
                   stage2: PsoConfig | None, rng: np.random.Generator) -> TwoStageResult:
    """CE-objective search, optionally refined by an AUC-objective stage.

    Stage two starts with one particle at the stage-one best placement and
    the rest jittered around it (sigma = map extent / 20, clamped).
    """
    result1 = plan_placement(scenario, cfg, stage1, rng)
    if stage2 is None:
        return TwoStageResult(result1, None, result1.best_x, result1.best_value)
    xmin, ymin, xmax, ymax = scenario.bounds
    sigma = max(xmax - xmin, ymax - ymin) / 20.0
    seeds = np.tile(result1.best_x, (stage2.n_particles, 1))
    seeds[1:] += rng.normal(0.0, sigma, size=seeds[1:].shape)
    result2 = plan_placement(scenario, cfg, stage2, rng, initial_positions=seeds)
    return TwoStageResult(result1, result2, result2.best_x, result2.best_value)
