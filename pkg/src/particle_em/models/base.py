"""Latent-variable model interface used by all optimizers.

A model is the unnormalized joint density pi_theta(z) of latents z and fixed
observations, exposed through its log density and analytic gradients. Gradient
methods are batched over particles: ``particles`` is always (N, d_z) and theta
is a flat (d_theta,) vector. Models are immutable after construction and all
evaluations are pure.
"""

from __future__ import annotations

import abc

import numpy as np

from ..exceptions import MissingMStepError


def as_theta(theta, d_theta: int) -> np.ndarray:
    """Coerce a scalar or array parameter to a float64 vector of length d_theta."""
    arr = np.atleast_1d(np.asarray(theta, dtype=np.float64)).ravel()
    if arr.shape != (d_theta,):
        raise ValueError(f"theta must have {d_theta} component(s), got shape {arr.shape}")
    return arr


def as_particles(particles, d_z: int) -> np.ndarray:
    """Coerce input to a float64 (N, d_z) particle array."""
    arr = np.asarray(particles, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != d_z:
        raise ValueError(f"particles must be (N, {d_z}), got shape {arr.shape}")
    return arr


class Model(abc.ABC):
    """Interface: log_joint plus batched gradients in theta and z."""

    d_theta: int
    d_z: int

    @abc.abstractmethod
    def log_joint(self, theta, z) -> float:
        """Log joint density at a single latent vector z of shape (d_z,)."""

    @abc.abstractmethod
    def grad_theta(self, theta, particles) -> np.ndarray:
        """Parameter gradient of log_joint per particle, shape (N, d_theta)."""

    @abc.abstractmethod
    def grad_z(self, theta, particles) -> np.ndarray:
        """Latent gradient of log_joint per particle, shape (N, d_z)."""

    def marginal_mstep(self, particles) -> np.ndarray:
        """Exact maximizer of the average log joint over theta, if available."""
        raise MissingMStepError(f"{type(self).__name__} has no closed-form M-step")

    @abc.abstractmethod
    def default_init(self, n_particles: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Default (theta0, particles0) initialization for optimization runs."""

    def mean_grad_theta(self, theta, particles) -> np.ndarray:
        """Particle average of grad_theta, shape (d_theta,)."""
        return self.grad_theta(theta, particles).mean(axis=0)
