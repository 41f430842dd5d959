"""Bayesian logistic regression with latent weights z and prior N(theta*1, v*I).

The scalar parameter theta is the shared prior mean of the regression weights;
the prior variance v defaults to 5. Labels are Bernoulli with success
probability sigmoid(x_i^T z). All sigmoid/softplus evaluations go through
log-sum-exp forms, so gradients stay finite for |x_i^T z| up to at least 1e3.
"""

from __future__ import annotations

import numpy as np

from .base import Model, as_particles, as_theta

_LOG_2PI = np.log(2.0 * np.pi)


def sigmoid(u: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function exp(-softplus(-u))."""
    return np.exp(-np.logaddexp(0.0, -np.asarray(u, dtype=np.float64)))


def softplus(u: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, np.asarray(u, dtype=np.float64))


class BayesianLogisticRegression(Model):
    d_theta = 1

    def __init__(self, X, y, prior_var: float = 5.0):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 2:
            raise ValueError(f"X must be (n, d), got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError(f"y must have length {X.shape[0]}, got shape {y.shape}")
        if y.size and not np.all(np.isin(y, (0, 1))):
            raise ValueError("labels must be 0 or 1")
        if prior_var <= 0:
            raise ValueError(f"prior_var must be positive, got {prior_var}")
        self.X = X
        self.y = y.astype(np.float64)
        self.prior_var = float(prior_var)
        self.d_z = X.shape[1]

    def log_joint(self, theta, z) -> float:
        t = as_theta(theta, 1)[0]
        z = np.asarray(z, dtype=np.float64).ravel()
        logits = self.X @ z
        loglik = float(np.sum(self.y * logits - softplus(logits)))
        prior = -0.5 * np.sum((z - t) ** 2) / self.prior_var
        prior -= 0.5 * self.d_z * (_LOG_2PI + np.log(self.prior_var))
        return loglik + prior

    def grad_theta(self, theta, particles) -> np.ndarray:
        t = as_theta(theta, 1)[0]
        z = as_particles(particles, self.d_z)
        return (z - t).sum(axis=1, keepdims=True) / self.prior_var

    def grad_z(self, theta, particles) -> np.ndarray:
        t = as_theta(theta, 1)[0]
        z = as_particles(particles, self.d_z)
        prior = (t - z) / self.prior_var
        if self.X.shape[0] == 0:
            return prior
        probs = sigmoid(z @ self.X.T)  # (N, n)
        return prior + (self.y[None, :] - probs) @ self.X

    def predict_proba(self, particles, X_test) -> np.ndarray:
        """Particle-averaged success probability per test row."""
        z = as_particles(particles, self.d_z)
        X_test = np.asarray(X_test, dtype=np.float64)
        if X_test.ndim != 2 or X_test.shape[1] != self.d_z:
            raise ValueError(f"X_test must be (m, {self.d_z}), got shape {X_test.shape}")
        return sigmoid(X_test @ z.T).mean(axis=1)

    def predict(self, particles, X_test) -> np.ndarray:
        """Predicted labels: 1 where the averaged probability is >= 0.5."""
        return (self.predict_proba(particles, X_test) >= 0.5).astype(int)

    def default_init(self, n_particles, rng):
        theta0 = np.zeros(1)
        particles0 = rng.standard_normal((n_particles, self.d_z))
        return theta0, particles0
