"""Task-based penalized-least-squares TV denoising.

Images are 2-D float64 numpy arrays of shape (height, width).
"""

import json as _json

from ._core import (  # noqa: F401
    DegenerateVariance,
    DivergenceError,
    Error,
    IllConditionedCovariance,
    InsufficientData,
    IntegrityError,
    InvalidParameter,
    IoError,
    ShapeError,
    add_noise,
    denoise,
    gen_binary_texture,
    gen_mvn_lumpy,
    hotelling_template,
    objective,
    objective_gradient,
    render_signal,
    roc,
    test_statistic,
    tv_seminorm,
)
from ._core import default_config as _default_config
from ._core import run_pipeline as _run_pipeline


def default_config(task="mvn_lumpy"):
    """Default experiment config for ``task`` as a dict."""
    return _json.loads(_default_config(task))


def run_pipeline(config, jobs=1):
    """Run generate, template, sweep and render for a config dict."""
    _run_pipeline(_json.dumps(config), jobs)


__all__ = [name for name in dir() if not name.startswith("_")]
