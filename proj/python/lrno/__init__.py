"""Noisy low-rank matrix optimization toolkit."""

from lrno._lrno import (
    DomainError,
    Error,
    Instance,
    IoError,
    ShapeError,
    bounds,
    classify_point,
    cli,
    dist_factor,
    dual_certificate,
    generate_instance,
    gradient_descent,
    load_instance,
    noise_tail_epsilon,
    project_psd_rank_r,
    random_init,
)

__all__ = [
    "DomainError",
    "Error",
    "Instance",
    "IoError",
    "ShapeError",
    "bounds",
    "classify_point",
    "cli",
    "dist_factor",
    "dual_certificate",
    "generate_instance",
    "gradient_descent",
    "load_instance",
    "noise_tail_epsilon",
    "project_psd_rank_r",
    "random_init",
]
