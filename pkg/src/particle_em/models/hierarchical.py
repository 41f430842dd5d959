"""Gaussian hierarchical model: z_i ~ N(theta, 1), x_i ~ N(z_i, 1).

The model keeps the observation vector x fixed. The marginal likelihood has
the unique maximizer theta* = mean(x), and the posterior at any theta is an
independent Gaussian per coordinate with mean (theta + x_i)/2 and variance 1/2,
which makes this model a ground-truth benchmark.
"""

from __future__ import annotations

import numpy as np

from .base import Model, as_particles, as_theta

_LOG_2PI = np.log(2.0 * np.pi)


class GaussianHierarchicalModel(Model):
    d_theta = 1

    def __init__(self, x):
        x = np.asarray(x, dtype=np.float64).ravel()
        if x.size < 1 or not np.all(np.isfinite(x)):
            raise ValueError("x must be a non-empty finite vector")
        self.x = x
        self.d_z = x.size

    def log_joint(self, theta, z) -> float:
        t = as_theta(theta, 1)[0]
        z = np.asarray(z, dtype=np.float64).ravel()
        return float(
            -0.5 * np.sum((z - t) ** 2) - 0.5 * np.sum((self.x - z) ** 2) - self.d_z * _LOG_2PI
        )

    def grad_theta(self, theta, particles) -> np.ndarray:
        t = as_theta(theta, 1)[0]
        z = as_particles(particles, self.d_z)
        return (z - t).sum(axis=1, keepdims=True)

    def grad_z(self, theta, particles) -> np.ndarray:
        t = as_theta(theta, 1)[0]
        z = as_particles(particles, self.d_z)
        return (t - z) + (self.x[None, :] - z)

    def theta_star(self) -> float:
        """Exact marginal maximum-likelihood parameter: the mean of x."""
        return float(self.x.mean())

    def posterior_moments(self, theta) -> tuple[np.ndarray, float]:
        """Exact posterior mean vector (theta + x)/2 and per-coordinate variance 0.5."""
        t = as_theta(theta, 1)[0]
        return (t + self.x) / 2.0, 0.5

    def marginal_mstep(self, particles) -> np.ndarray:
        z = as_particles(particles, self.d_z)
        return np.array([z.mean()])

    def default_init(self, n_particles, rng):
        theta0 = rng.normal(0.0, 0.1, size=1)
        particles0 = rng.standard_normal((n_particles, self.d_z))
        return theta0, particles0
