"""Adaptive pseudo augmentation for GANs on 2D toy data."""

import json

from . import _core
from ._core import (
    ConfigError,
    NonFiniteError,
    compute_lambda,
    draw_mask,
    frechet_2d,
    histogram_jsd,
    jsd,
    kld,
    modes_hit,
    optimal_discriminator,
    preset_names,
    report,
    sample_ring,
    step_size,
    virtual_criterion,
)


def gradcheck(seed):
    return _core.gradcheck(seed)


def verify_theory(trials=1000, support=8, alphas=(0.0, 0.25, 0.5, 0.9), seed=1):
    return json.loads(_core.verify_theory(trials, support, list(alphas), seed))


def preset(name):
    return json.loads(_core.preset(name))


def resolve_config(config):
    return json.loads(_core.resolve_config(json.dumps(config)))


def train(config, parallel=1):
    """Train every seed of `config` (a dict); returns the run summaries."""
    return [json.loads(s) for s in _core.train(json.dumps(config), parallel)]
