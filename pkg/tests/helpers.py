"""Shared test utilities: finite-difference oracles, naive references, stubs."""

from __future__ import annotations

import numpy as np

from particle_em.models.base import Model


def fd_grad_theta(model, theta, z):
    """Central-difference parameter gradient of log_joint at one latent point."""
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    out = np.empty_like(theta)
    for k in range(theta.size):
        h = 1e-5 * (1.0 + abs(theta[k]))
        e = np.zeros_like(theta)
        e[k] = h
        out[k] = (model.log_joint(theta + e, z) - model.log_joint(theta - e, z)) / (2 * h)
    return out


def fd_grad_z(model, theta, z):
    """Central-difference latent gradient of log_joint at one latent point."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    for k in range(z.size):
        h = 1e-5 * (1.0 + abs(z[k]))
        e = np.zeros_like(z)
        e[k] = h
        out[k] = (model.log_joint(theta, z + e) - model.log_joint(theta, z - e)) / (2 * h)
    return out


def max_rel_err(a, b):
    """Worst relative error with an absolute floor of 1 (for near-zero entries)."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))))


def assert_gradients_match_fd(model, theta, z, tol=1e-5):
    analytic_t = model.grad_theta(theta, np.asarray(z)[None, :])[0]
    analytic_z = model.grad_z(theta, np.asarray(z)[None, :])[0]
    assert max_rel_err(analytic_t, fd_grad_theta(model, theta, z)) <= tol
    assert max_rel_err(analytic_z, fd_grad_z(model, theta, z)) <= tol


def stein_naive(particles, grads, h):
    """Double-loop reference for the kernelized update direction."""
    z = np.asarray(particles, dtype=np.float64)
    g = np.asarray(grads, dtype=np.float64)
    n = z.shape[0]
    out = np.zeros_like(z)
    for i in range(n):
        for j in range(n):
            kji = np.exp(-np.sum((z[j] - z[i]) ** 2) / h)
            out[i] += kji * g[j] + (2.0 / h) * (z[i] - z[j]) * kji
    return out / n


class ConstantGradientModel(Model):
    """Stub whose parameter gradient is a constant and latent gradient zero."""

    def __init__(self, c=1.0, d_z=1):
        self.c = float(c)
        self.d_theta = 1
        self.d_z = d_z

    def log_joint(self, theta, z):
        return float(self.c * np.atleast_1d(theta)[0])

    def grad_theta(self, theta, particles):
        return np.full((np.asarray(particles).shape[0], 1), self.c)

    def grad_z(self, theta, particles):
        return np.zeros_like(np.asarray(particles, dtype=np.float64))

    def default_init(self, n_particles, rng):
        return np.zeros(1), np.zeros((n_particles, self.d_z))


class ZeroGradientModel(ConstantGradientModel):
    def __init__(self, d_z=1):
        super().__init__(c=0.0, d_z=d_z)


def planted_two_community_network(seed, n=10, p_within=0.9, p_across=0.1):
    """Random adjacency with two equal planted communities; returns (Y, labels)."""
    rng = np.random.default_rng(seed)
    community = np.array([0] * (n // 2) + [1] * (n - n // 2))
    Y = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            p = p_within if community[i] == community[j] else p_across
            if rng.random() < p:
                Y[i, j] = Y[j, i] = 1.0
    return Y, community
