"""Iterative optimizers over (parameter, particle cloud) pairs.

Five particle-based schemes for maximizing the marginal likelihood of a
latent-variable model, all driving the particles toward the posterior while
the parameter climbs the averaged parameter gradient:

* ``svgd_em``          -- learning-rate gradient step on theta, kernelized
                          transport step on the particles.
* ``coin_em``          -- learning-rate-free variant; both theta and each
                          particle follow a Krichevsky-Trofimov betting
                          recursion on their gradient streams.
* ``adaptive_coin_em`` -- coin betting with per-coordinate gradient-scale
                          normalization (works for unbounded gradients).
* ``marginal_*``       -- variants that replace the theta recursion with the
                          model's exact closed-form M-step.
* ``pgd``              -- Euler-Maruyama discretization of coupled parameter
                          drift and latent Langevin dynamics (the
                          learning-rate-dependent baseline).

Steps are pure state transitions: they never mutate their input state, and
(for ``pgd``) the random generator is part of the input. Any non-finite value
in an updated state aborts with :class:`DivergedError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .exceptions import ConfigError, DivergedError
from .kernels import median_heuristic, resolve_bandwidth, stein_direction
from .models.base import Model

GAMMA_ALGORITHMS = frozenset({"svgd_em", "marginal_svgd_em", "pgd"})
COIN_ALGORITHMS = frozenset({"coin_em", "adaptive_coin_em", "marginal_coin_em"})
ALL_ALGORITHMS = GAMMA_ALGORITHMS | COIN_ALGORITHMS


# ---------------------------------------------------------------------------
# optimizer states


@dataclass
class SvgdEmState:
    """State of the learning-rate algorithms: current iterate plus step size."""

    theta: np.ndarray  # (d_theta,)
    particles: np.ndarray  # (N, d_z)
    gamma: float


@dataclass
class BettingState:
    """Betting-recursion state: anchors, current iterate, and streamed sums.

    ``sum_grad_theta`` and ``reward_theta`` accumulate the parameter-gradient
    stream and its inner products with (theta_s - theta0); ``sum_grad_z`` and
    ``reward_z`` do the same per particle for the kernelized directions.
    ``t`` counts completed steps, so all accumulators are zero at t = 0.
    """

    theta0: np.ndarray
    z0: np.ndarray
    theta: np.ndarray
    particles: np.ndarray
    sum_grad_theta: np.ndarray  # (d_theta,)
    reward_theta: float
    sum_grad_z: np.ndarray  # (N, d_z)
    reward_z: np.ndarray  # (N,)
    t: int = 0

    @classmethod
    def initial(cls, theta0, z0) -> "BettingState":
        theta0 = np.asarray(theta0, dtype=np.float64)
        z0 = np.asarray(z0, dtype=np.float64)
        return cls(
            theta0=theta0.copy(),
            z0=z0.copy(),
            theta=theta0.copy(),
            particles=z0.copy(),
            sum_grad_theta=np.zeros_like(theta0),
            reward_theta=0.0,
            sum_grad_z=np.zeros_like(z0),
            reward_z=np.zeros(z0.shape[0]),
            t=0,
        )


@dataclass
class AdaptiveBettingState:
    """Per-coordinate betting state with running gradient-scale estimates.

    For every coordinate (of theta, and of each particle) the state tracks the
    largest observed gradient magnitude L, the sum of absolute gradients G,
    and the clipped reward R; L and G are non-decreasing and R stays >= 0.
    """

    theta0: np.ndarray
    z0: np.ndarray
    theta: np.ndarray
    particles: np.ndarray
    sum_grad_theta: np.ndarray  # (d_theta,)
    sum_grad_z: np.ndarray  # (N, d_z)
    L_theta: np.ndarray  # (d_theta,)
    G_theta: np.ndarray
    R_theta: np.ndarray
    L_z: np.ndarray  # (N, d_z)
    G_z: np.ndarray
    R_z: np.ndarray
    t: int = 0

    @classmethod
    def initial(cls, theta0, z0) -> "AdaptiveBettingState":
        theta0 = np.asarray(theta0, dtype=np.float64)
        z0 = np.asarray(z0, dtype=np.float64)
        return cls(
            theta0=theta0.copy(),
            z0=z0.copy(),
            theta=theta0.copy(),
            particles=z0.copy(),
            sum_grad_theta=np.zeros_like(theta0),
            sum_grad_z=np.zeros_like(z0),
            L_theta=np.zeros_like(theta0),
            G_theta=np.zeros_like(theta0),
            R_theta=np.zeros_like(theta0),
            L_z=np.zeros_like(z0),
            G_z=np.zeros_like(z0),
            R_z=np.zeros_like(z0),
            t=0,
        )


def _require_finite(what: str, *arrays: np.ndarray) -> None:
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise DivergedError(f"non-finite values in {what}")


def _step_bandwidth(particles: np.ndarray, h: float | None) -> float:
    # squared distances of an exploding cloud can overflow the heuristic
    bandwidth = median_heuristic(particles) if h is None else resolve_bandwidth(particles, h)
    if not np.isfinite(bandwidth):
        raise DivergedError("median-heuristic bandwidth overflowed on a diverging cloud")
    return bandwidth


# ---------------------------------------------------------------------------
# single-step updates


def svgd_em_step(state: SvgdEmState, model: Model, h: float | None = None) -> SvgdEmState:
    """One gradient step on theta, then one kernelized transport step.

    The particle update evaluates latent gradients at the already-updated
    theta. ``h`` fixes the kernel bandwidth; None recomputes the median
    heuristic from the current cloud.
    """
    theta, z, gamma = state.theta, state.particles, state.gamma
    with np.errstate(over="ignore", invalid="ignore"):
        theta_new = theta + gamma * model.mean_grad_theta(theta, z)
        _require_finite("theta update", theta_new)
        bandwidth = _step_bandwidth(z, h)
        phi = stein_direction(z, model.grad_z(theta_new, z), bandwidth)
        z_new = z + gamma * phi
    _require_finite("particle update", z_new)
    return SvgdEmState(theta=theta_new, particles=z_new, gamma=gamma)


def coin_em_step(
    state: BettingState,
    model: Model,
    h: float | None = None,
    particle_grads_use_new_theta: bool = True,
) -> BettingState:
    """One round of the two interacting betting games (no learning rate).

    After k completed steps the iterate is
    ``x = x0 + sum(c_1..c_k) / (k + 1) * (1 + sum_s <c_s, x_s - x0>)``,
    applied to theta with the averaged parameter gradient and to each particle
    with its kernelized direction. By default particle gradients are taken at
    the just-updated theta; set ``particle_grads_use_new_theta=False`` for the
    pre-update theta.
    """
    theta, z = state.theta, state.particles
    with np.errstate(over="ignore", invalid="ignore"):
        g_bar = model.mean_grad_theta(theta, z)
        sum_g = state.sum_grad_theta + g_bar
        reward = state.reward_theta + float(g_bar @ (theta - state.theta0))
        t_new = state.t + 1
        theta_new = state.theta0 + sum_g / (t_new + 1) * (1.0 + reward)
        _require_finite("theta update", theta_new)

        grad_theta_arg = theta_new if particle_grads_use_new_theta else theta
        bandwidth = _step_bandwidth(z, h)
        phi = stein_direction(z, model.grad_z(grad_theta_arg, z), bandwidth)
        sum_z = state.sum_grad_z + phi
        reward_z = state.reward_z + np.einsum("ij,ij->i", phi, z - state.z0)
        z_new = state.z0 + sum_z / (t_new + 1) * (1.0 + reward_z)[:, None]
    _require_finite("particle update", z_new)
    return BettingState(
        theta0=state.theta0,
        z0=state.z0,
        theta=theta_new,
        particles=z_new,
        sum_grad_theta=sum_g,
        reward_theta=reward,
        sum_grad_z=sum_z,
        reward_z=reward_z,
        t=t_new,
    )


def _adaptive_update(x0, x, csum_prev, c, L_prev, G_prev, R_prev, denominator):
    """Shared per-coordinate scale-normalized betting update.

    Returns (x_new, csum, L, G, R). Coordinates that have never seen a
    non-zero gradient (L = 0) stay at their initial value.
    """
    abs_c = np.abs(c)
    L = np.maximum(L_prev, abs_c)
    G = G_prev + abs_c
    R = np.maximum(R_prev + c * (x - x0), 0.0)
    csum = csum_prev + c
    denom = G + L
    if denominator == "bnn":
        denom = np.maximum(denom, 100.0 * L)
    with np.errstate(divide="ignore", invalid="ignore"):
        candidate = x0 + csum / denom * (1.0 + R / L)
    return np.where(L > 0.0, candidate, x0), csum, L, G, R


def adaptive_coin_em_step(
    state: AdaptiveBettingState,
    model: Model,
    h: float | None = None,
    denominator: str = "standard",
    particle_grads_use_new_theta: bool = True,
) -> AdaptiveBettingState:
    """Coin betting with per-coordinate scale normalization.

    Each coordinate bets ``x0 + csum / D * (1 + R / L)`` where D = G + L for
    the standard denominator, or max(G + L, 100 L) for the ``bnn`` variant.
    """
    if denominator not in ("standard", "bnn"):
        raise ValueError(f"denominator must be 'standard' or 'bnn', got {denominator!r}")
    theta, z = state.theta, state.particles
    with np.errstate(over="ignore", invalid="ignore"):
        c_theta = model.mean_grad_theta(theta, z)
        theta_new, sum_g, L_t, G_t, R_t = _adaptive_update(
            state.theta0, theta, state.sum_grad_theta, c_theta,
            state.L_theta, state.G_theta, state.R_theta, denominator,
        )
        _require_finite("theta update", theta_new)

        grad_theta_arg = theta_new if particle_grads_use_new_theta else theta
        bandwidth = _step_bandwidth(z, h)
        phi = stein_direction(z, model.grad_z(grad_theta_arg, z), bandwidth)
        z_new, sum_z, L_z, G_z, R_z = _adaptive_update(
            state.z0, z, state.sum_grad_z, phi,
            state.L_z, state.G_z, state.R_z, denominator,
        )
    _require_finite("particle update", z_new)
    return AdaptiveBettingState(
        theta0=state.theta0,
        z0=state.z0,
        theta=theta_new,
        particles=z_new,
        sum_grad_theta=sum_g,
        sum_grad_z=sum_z,
        L_theta=L_t,
        G_theta=G_t,
        R_theta=R_t,
        L_z=L_z,
        G_z=G_z,
        R_z=R_z,
        t=state.t + 1,
    )


def marginal_svgd_em_step(state: SvgdEmState, model: Model, h: float | None = None) -> SvgdEmState:
    """Kernelized particle step with theta pinned to the exact M-step.

    Latent gradients are evaluated at the M-step of the pre-update cloud; the
    returned state carries the M-step of the post-update cloud, so
    ``state.theta == model.marginal_mstep(state.particles)`` always holds.
    """
    z, gamma = state.particles, state.gamma
    theta_used = model.marginal_mstep(z)
    with np.errstate(over="ignore", invalid="ignore"):
        bandwidth = _step_bandwidth(z, h)
        phi = stein_direction(z, model.grad_z(theta_used, z), bandwidth)
        z_new = z + gamma * phi
    _require_finite("particle update", z_new)
    return SvgdEmState(theta=model.marginal_mstep(z_new), particles=z_new, gamma=gamma)


def marginal_coin_em_step(state: BettingState, model: Model, h: float | None = None) -> BettingState:
    """Betting-recursion particle step with theta pinned to the exact M-step.

    The particle accumulators store each round's kernelized direction as
    computed at that round's M-step parameter; the theta-side accumulators of
    the state stay zero.
    """
    z = state.particles
    theta_used = model.marginal_mstep(z)
    with np.errstate(over="ignore", invalid="ignore"):
        bandwidth = _step_bandwidth(z, h)
        phi = stein_direction(z, model.grad_z(theta_used, z), bandwidth)
        t_new = state.t + 1
        sum_z = state.sum_grad_z + phi
        reward_z = state.reward_z + np.einsum("ij,ij->i", phi, z - state.z0)
        z_new = state.z0 + sum_z / (t_new + 1) * (1.0 + reward_z)[:, None]
    _require_finite("particle update", z_new)
    return replace(
        state,
        theta=model.marginal_mstep(z_new),
        particles=z_new,
        sum_grad_z=sum_z,
        reward_z=reward_z,
        t=t_new,
    )


def pgd_step(state: SvgdEmState, model: Model, rng: np.random.Generator) -> SvgdEmState:
    """Euler-Maruyama step: parameter drift plus noisy latent Langevin step.

    Both gradient evaluations use the pre-update theta; each particle receives
    independent N(0, 2*gamma) noise per coordinate drawn from ``rng``.
    """
    theta, z, gamma = state.theta, state.particles, state.gamma
    with np.errstate(over="ignore", invalid="ignore"):
        theta_new = theta + gamma * model.mean_grad_theta(theta, z)
        _require_finite("theta update", theta_new)
        noise = rng.standard_normal(z.shape)
        z_new = z + gamma * model.grad_z(theta, z) + np.sqrt(2.0 * gamma) * noise
    _require_finite("particle update", z_new)
    return SvgdEmState(theta=theta_new, particles=z_new, gamma=gamma)


# ---------------------------------------------------------------------------
# run loop


@dataclass
class TraceRecord:
    iteration: int
    theta: np.ndarray
    particle_mean: np.ndarray
    metrics: dict[str, float]


@dataclass
class Trace:
    """Time-indexed record of a run; iterations are strictly increasing."""

    records: list[TraceRecord] = field(default_factory=list)
    initial_particles: np.ndarray | None = None
    final_particles: np.ndarray | None = None

    def iterations(self) -> np.ndarray:
        return np.array([r.iteration for r in self.records], dtype=int)

    def metric_values(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        """(iterations, values) for one metric across all records."""
        pairs = [(r.iteration, r.metrics[name]) for r in self.records if name in r.metrics]
        if not pairs:
            raise KeyError(f"metric {name!r} was never recorded")
        its, vals = zip(*pairs)
        return np.array(its, dtype=int), np.array(vals, dtype=np.float64)

    def final(self) -> TraceRecord:
        return self.records[-1]


@dataclass
class RunConfig:
    """Settings for a single optimization run.

    ``gamma`` is required for the learning-rate algorithms and must be absent
    for the coin variants. ``init`` optionally overrides the model's default
    (theta0, particles0). ``metric_hooks`` maps metric names to callables
    ``f(theta, particles) -> float`` evaluated at every recorded iteration.
    ``bandwidth`` fixes the kernel bandwidth; ``freeze_bandwidth`` computes it
    once from the initial cloud instead of at every iteration.
    """

    n_particles: int = 10
    n_iters: int = 500
    gamma: float | None = None
    seed: int = 0
    record_every: int = 1
    init: tuple[np.ndarray, np.ndarray] | None = None
    metric_hooks: dict[str, Callable[[np.ndarray, np.ndarray], float]] = field(default_factory=dict)
    bandwidth: float | None = None
    freeze_bandwidth: bool = False
    adaptive_denominator: str = "standard"
    particle_grads_use_new_theta: bool = True


def _validate_run(algorithm: str, config: RunConfig) -> list[str]:
    problems = []
    if algorithm not in ALL_ALGORITHMS:
        problems.append(f"unknown algorithm {algorithm!r}; choose from {sorted(ALL_ALGORITHMS)}")
    if config.n_particles < 1:
        problems.append(f"n_particles must be >= 1, got {config.n_particles}")
    if config.n_iters < 0:
        problems.append(f"n_iters must be >= 0, got {config.n_iters}")
    if config.record_every < 1:
        problems.append(f"record_every must be >= 1, got {config.record_every}")
    if algorithm in GAMMA_ALGORITHMS:
        if config.gamma is None:
            problems.append(f"gamma is required for algorithm {algorithm!r}")
        elif not np.isfinite(config.gamma) or config.gamma <= 0:
            problems.append(f"gamma must be a finite positive number, got {config.gamma}")
    elif algorithm in COIN_ALGORITHMS and config.gamma is not None:
        problems.append(f"gamma is forbidden for coin algorithm {algorithm!r}")
    if config.adaptive_denominator not in ("standard", "bnn"):
        problems.append(f"adaptive_denominator must be 'standard' or 'bnn', got {config.adaptive_denominator!r}")
    if config.bandwidth is not None and not (np.isfinite(config.bandwidth) and config.bandwidth > 0):
        problems.append(f"bandwidth must be a finite positive number, got {config.bandwidth}")
    return problems


def run(algorithm: str, model: Model, config: RunConfig) -> Trace:
    """Execute T optimizer steps and return the recorded trace.

    Iteration 0 (the initialization) is always recorded, then every
    ``record_every`` iterations plus the final one. Identical (algorithm,
    model, config, seed) produce bit-identical traces. On divergence a
    :class:`DivergedError` is raised with the partial trace attached.
    """
    problems = _validate_run(algorithm, config)
    if problems:
        raise ConfigError(problems)

    rng = np.random.default_rng(config.seed)
    if config.init is not None:
        theta0 = np.asarray(config.init[0], dtype=np.float64).ravel().copy()
        z0 = np.asarray(config.init[1], dtype=np.float64).copy()
        if z0.ndim != 2:
            raise ConfigError([f"init particles must be (N, d_z), got shape {z0.shape}"])
    else:
        theta0, z0 = model.default_init(config.n_particles, rng)
    if z0.shape[0] != config.n_particles:
        raise ConfigError(
            [f"init provides {z0.shape[0]} particles but n_particles = {config.n_particles}"]
        )

    h = config.bandwidth
    if config.freeze_bandwidth and h is None:
        h = median_heuristic(z0)

    if algorithm in ("marginal_svgd_em", "marginal_coin_em"):
        theta0 = np.asarray(model.marginal_mstep(z0), dtype=np.float64).ravel()

    if algorithm in ("svgd_em", "marginal_svgd_em", "pgd"):
        state = SvgdEmState(theta=theta0, particles=z0, gamma=float(config.gamma))
    elif algorithm == "adaptive_coin_em":
        state = AdaptiveBettingState.initial(theta0, z0)
    else:
        state = BettingState.initial(theta0, z0)

    steppers = {
        "svgd_em": lambda s: svgd_em_step(s, model, h),
        "coin_em": lambda s: coin_em_step(
            s, model, h, particle_grads_use_new_theta=config.particle_grads_use_new_theta
        ),
        "adaptive_coin_em": lambda s: adaptive_coin_em_step(
            s, model, h,
            denominator=config.adaptive_denominator,
            particle_grads_use_new_theta=config.particle_grads_use_new_theta,
        ),
        "marginal_svgd_em": lambda s: marginal_svgd_em_step(s, model, h),
        "marginal_coin_em": lambda s: marginal_coin_em_step(s, model, h),
        "pgd": lambda s: pgd_step(s, model, rng),
    }
    step = steppers[algorithm]

    trace = Trace(initial_particles=z0.copy())

    def record(iteration: int, theta: np.ndarray, particles: np.ndarray) -> None:
        # hooks may overflow to inf on states that are en route to divergence
        with np.errstate(over="ignore", invalid="ignore"):
            metrics = {name: float(hook(theta, particles)) for name, hook in config.metric_hooks.items()}
        trace.records.append(
            TraceRecord(
                iteration=iteration,
                theta=theta.copy(),
                particle_mean=particles.mean(axis=0),
                metrics=metrics,
            )
        )

    record(0, state.theta, state.particles)
    for t in range(1, config.n_iters + 1):
        try:
            state = step(state)
        except DivergedError as err:
            trace.final_particles = state.particles.copy()
            raise DivergedError(str(err), iteration=t, trace=trace) from None
        if t % config.record_every == 0 or t == config.n_iters:
            record(t, state.theta, state.particles)
    trace.final_particles = state.particles.copy()
    return trace
