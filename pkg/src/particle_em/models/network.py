"""Latent space network model for binary undirected graphs.

Each node i carries a latent position z_(i) in R^embed_dim; an edge between
i and j is Bernoulli with logit theta + link_sign * ||z_(i) - z_(j)||. The
default link_sign = -1 makes nearby nodes more likely to connect (the standard
distance model); link_sign = +1 is available as a flag. Latents carry an
isotropic Gaussian prior with variance prior_var_z (set to inf to disable).

The flat latent vector has length d_z = n * embed_dim and reshapes row-major
to (n, embed_dim).
"""

from __future__ import annotations

import numpy as np

from .base import Model, as_particles, as_theta
from .logistic import sigmoid, softplus

_LOG_2PI = np.log(2.0 * np.pi)

#: distances below this are treated as coincident; the distance gradient is 0 there
_COINCIDENT_TOL = 1e-12


class LatentSpaceNetworkModel(Model):
    d_theta = 1

    def __init__(self, Y, embed_dim: int = 2, prior_var_z: float = 1.0, link_sign: float = -1.0):
        Y = np.asarray(Y, dtype=np.float64)
        if Y.ndim != 2 or Y.shape[0] != Y.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {Y.shape}")
        if not np.array_equal(Y, Y.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(Y) != 0):
            raise ValueError("adjacency must have an empty diagonal")
        if not np.all(np.isin(Y, (0.0, 1.0))):
            raise ValueError("adjacency entries must be 0 or 1")
        if embed_dim < 1:
            raise ValueError(f"embed_dim must be >= 1, got {embed_dim}")
        if prior_var_z <= 0:
            raise ValueError(f"prior_var_z must be positive (or inf), got {prior_var_z}")
        if link_sign not in (-1.0, 1.0):
            raise ValueError(f"link_sign must be -1 or +1, got {link_sign}")
        self.Y = Y
        self.n_nodes = Y.shape[0]
        self.embed_dim = int(embed_dim)
        self.prior_var_z = float(prior_var_z)
        self.link_sign = float(link_sign)
        self.d_z = self.n_nodes * self.embed_dim
        self._pair_mask = np.triu(np.ones((self.n_nodes, self.n_nodes), dtype=bool), k=1)

    def _positions(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64).ravel()
        if z.size != self.d_z:
            raise ValueError(f"latent vector must have length {self.d_z}, got {z.size}")
        return z.reshape(self.n_nodes, self.embed_dim)

    def _distances(self, pos: np.ndarray) -> np.ndarray:
        diff = pos[:, None, :] - pos[None, :, :]
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    def log_joint(self, theta, z) -> float:
        t = as_theta(theta, 1)[0]
        pos = self._positions(z)
        eta = t + self.link_sign * self._distances(pos)
        pair_terms = self.Y * eta - softplus(eta)
        total = float(pair_terms[self._pair_mask].sum())
        if np.isfinite(self.prior_var_z):
            total -= 0.5 * np.sum(pos * pos) / self.prior_var_z
            total -= 0.5 * self.d_z * (_LOG_2PI + np.log(self.prior_var_z))
        return total

    def grad_theta(self, theta, particles) -> np.ndarray:
        t = as_theta(theta, 1)[0]
        z = as_particles(particles, self.d_z)
        out = np.empty((z.shape[0], 1))
        for k in range(z.shape[0]):
            pos = self._positions(z[k])
            p = sigmoid(t + self.link_sign * self._distances(pos))
            out[k, 0] = (self.Y - p)[self._pair_mask].sum()
        return out

    def grad_z(self, theta, particles) -> np.ndarray:
        t = as_theta(theta, 1)[0]
        z = as_particles(particles, self.d_z)
        out = np.empty_like(z)
        for k in range(z.shape[0]):
            pos = self._positions(z[k])
            diff = pos[:, None, :] - pos[None, :, :]  # (n, n, e)
            dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
            p = sigmoid(t + self.link_sign * dist)
            weight = (self.Y - p) * self.link_sign
            np.fill_diagonal(weight, 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                unit = np.where(dist[:, :, None] > _COINCIDENT_TOL, diff / dist[:, :, None], 0.0)
            grad_pos = np.einsum("ij,ijk->ik", weight, unit)
            if np.isfinite(self.prior_var_z):
                grad_pos -= pos / self.prior_var_z
            out[k] = grad_pos.ravel()
        return out

    def default_init(self, n_particles, rng):
        """Deterministic point-estimate fit, then particles jittered around it.

        Runs 2000 fixed-step (1e-2) gradient ascent iterations on log_joint
        from theta = 0, z ~ N(0, 1), then draws each initial particle from a
        N(z_hat, 0.1) (variance 0.1) around the fitted positions.
        """
        theta_hat, z_hat = self.point_estimate(rng.standard_normal(self.d_z))
        particles0 = z_hat[None, :] + np.sqrt(0.1) * rng.standard_normal((n_particles, self.d_z))
        return theta_hat.copy(), particles0

    def point_estimate(self, z_init, n_iters: int = 2000, step: float = 1e-2):
        """Joint gradient ascent on log_joint; returns (theta_hat, z_hat)."""
        theta = np.zeros(1)
        z = np.asarray(z_init, dtype=np.float64).ravel()[None, :].copy()
        for _ in range(n_iters):
            theta = theta + step * self.grad_theta(theta, z)[0]
            z = z + step * self.grad_z(theta, z)
        return theta, z[0]
