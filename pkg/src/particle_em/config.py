"""Experiment configuration: key-value config files plus command-line overrides.

Config files hold one ``key = value`` pair per line; blank lines and lines
starting with '#' are ignored. Command-line flags override file values.
Unknown keys are rejected so typos fail loudly, and validation reports every
violation at once.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields
from typing import Mapping

from .exceptions import ConfigError

logger = logging.getLogger(__name__)

MODELS = ("toy", "logreg", "network")
ALGORITHMS = ("svgd_em", "coin_em", "adaptive_coin_em", "marginal_svgd_em", "marginal_coin_em", "pgd")
GAMMA_ALGORITHMS = ("svgd_em", "marginal_svgd_em", "pgd")
SWEEP_PARAMS = ("gamma", "particles")

#: keys whose absence triggers a logged notice about the default being used
NOTICED_DEFAULTS = {"particles": 10, "iters": 500, "seed": 0}


@dataclass
class ExperimentConfig:
    """Fully resolved settings for one experiment invocation."""

    model: str = ""
    algorithm: str = ""
    particles: int = 10
    iters: int = 500
    gamma: float | None = None
    seed: int = 0
    run_index: int = 0
    record_every: int = 1
    output_dir: str = "runs"
    name: str = ""  # defaults to "<model>_<algorithm>"

    # optimizer knobs
    bandwidth: float | None = None
    freeze_bandwidth: bool = False
    adaptive_denominator: str = "standard"
    particle_grads_use_new_theta: bool = True

    # sweep settings
    sweep_param: str | None = None
    sweep_values: list[float] = field(default_factory=list)
    sweep_metric: str | None = None

    # toy model
    toy_dim: int = 100
    theta_true: float = 1.0

    # logistic regression model
    data_path: str | None = None
    label_column: str = "label"
    positive_label: str = "1"
    test_fraction: float = 0.2
    prior_var: float = 5.0

    # network model
    edgelist_path: str | None = None
    labels_path: str | None = None
    embed_dim: int = 2
    prior_var_z: float = 1.0
    link_sign: str = "minus"  # 'minus': logit = theta - distance; 'plus': theta + distance

    def resolved_name(self) -> str:
        return self.name or f"{self.model}_{self.algorithm}"


_INT_KEYS = {"particles", "iters", "seed", "run_index", "record_every", "toy_dim", "embed_dim"}
_FLOAT_KEYS = {"gamma", "bandwidth", "theta_true", "test_fraction", "prior_var", "prior_var_z"}
_BOOL_KEYS = {"freeze_bandwidth", "particle_grads_use_new_theta"}
_LIST_KEYS = {"sweep_values"}
_KNOWN_KEYS = {f.name for f in fields(ExperimentConfig)}


def _convert(key: str, raw: str):
    text = raw.strip()
    if key in _INT_KEYS:
        return int(text)
    if key in _FLOAT_KEYS:
        return float(text)
    if key in _BOOL_KEYS:
        lowered = text.lower()
        if lowered in ("true", "yes", "1"):
            return True
        if lowered in ("false", "no", "0"):
            return False
        raise ValueError(f"expected a boolean, got {text!r}")
    if key in _LIST_KEYS:
        return [float(v) for v in text.split(",") if v.strip()]
    return text


def read_config_file(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines into a raw string mapping."""
    raw: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ConfigError([f"{path}: line {line_no}: expected 'key = value', got {text!r}"])
            key, _, value = text.partition("=")
            raw[key.strip()] = value.strip()
    return raw


def parse_config(path: str | None = None, overrides: Mapping[str, object] | None = None) -> ExperimentConfig:
    """Build and validate a config from an optional file plus overrides.

    ``overrides`` values may be already-typed Python values or raw strings;
    they win over file entries. Raises :class:`ConfigError` listing every
    violation found.
    """
    violations: list[str] = []
    raw: dict[str, object] = {}
    if path is not None:
        raw.update(read_config_file(path))
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})

    values: dict[str, object] = {}
    for key, value in raw.items():
        if key not in _KNOWN_KEYS:
            violations.append(f"unknown config key {key!r}")
            continue
        try:
            values[key] = _convert(key, value) if isinstance(value, str) else value
        except ValueError as err:
            violations.append(f"bad value for {key!r}: {err}")

    for key, default in NOTICED_DEFAULTS.items():
        if key not in values:
            logger.info("config key %r not given, using default %r", key, default)

    config = ExperimentConfig(**values) if not violations else None
    if config is not None:
        violations.extend(validate(config))
    if violations:
        raise ConfigError(violations)
    return config


def validate(config: ExperimentConfig) -> list[str]:
    """Return all constraint violations of a resolved config."""
    problems: list[str] = []
    if config.model not in MODELS:
        problems.append(f"model must be one of {MODELS}, got {config.model!r}")
    if config.algorithm not in ALGORITHMS:
        problems.append(f"algorithm must be one of {ALGORITHMS}, got {config.algorithm!r}")
    else:
        needs_gamma = config.algorithm in GAMMA_ALGORITHMS
        sweeps_gamma = config.sweep_param == "gamma"
        if needs_gamma and config.gamma is None and not sweeps_gamma:
            problems.append(f"gamma is required for algorithm {config.algorithm!r}")
        if not needs_gamma and (config.gamma is not None or sweeps_gamma):
            problems.append(f"gamma forbidden for coin algorithm {config.algorithm!r}")
    if config.gamma is not None and config.gamma <= 0:
        problems.append(f"gamma must be positive, got {config.gamma}")
    if config.particles < 1:
        problems.append(f"particles must be >= 1, got {config.particles}")
    if config.iters < 0:
        problems.append(f"iters must be >= 0, got {config.iters}")
    if config.record_every < 1:
        problems.append(f"record_every must be >= 1, got {config.record_every}")
    if config.run_index < 0:
        problems.append(f"run_index must be >= 0, got {config.run_index}")
    if not 0.0 < config.test_fraction < 1.0:
        problems.append(f"test_fraction must be in (0, 1), got {config.test_fraction}")
    if config.bandwidth is not None and config.bandwidth <= 0:
        problems.append(f"bandwidth must be positive, got {config.bandwidth}")
    if config.adaptive_denominator not in ("standard", "bnn"):
        problems.append(
            f"adaptive_denominator must be 'standard' or 'bnn', got {config.adaptive_denominator!r}"
        )
    if config.link_sign not in ("minus", "plus"):
        problems.append(f"link_sign must be 'minus' or 'plus', got {config.link_sign!r}")
    if config.sweep_param is not None:
        if config.sweep_param not in SWEEP_PARAMS:
            problems.append(f"sweep_param must be one of {SWEEP_PARAMS}, got {config.sweep_param!r}")
        if not config.sweep_values:
            problems.append("sweep_values must be a non-empty list when sweep_param is set")
        elif any(v <= 0 for v in config.sweep_values):
            problems.append("sweep_values must all be positive")
        if config.sweep_param == "particles" and any(v != int(v) for v in config.sweep_values):
            problems.append("sweep over particles requires integer values")
    if config.model == "toy" and config.toy_dim < 1:
        problems.append(f"toy_dim must be >= 1, got {config.toy_dim}")
    if config.model == "logreg" and not config.data_path:
        problems.append("logreg model requires data_path")
    if config.model == "network":
        if not config.edgelist_path:
            problems.append("network model requires edgelist_path")
        if config.embed_dim < 1:
            problems.append(f"embed_dim must be >= 1, got {config.embed_dim}")
        if config.prior_var_z <= 0:
            problems.append(f"prior_var_z must be positive (or inf), got {config.prior_var_z}")
    return problems
