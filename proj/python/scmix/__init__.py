"""Compound-target mixing benchmark: synthetic domains, mixers and distances."""

from ._core import (
    IGNORE_LABEL,
    ScmixError,
    config_hash,
    confidence_weight,
    image_descriptor,
    make_benchmark,
    mix,
    proxy_distance,
    pseudo_label,
    run_cli,
)

__all__ = [
    "IGNORE_LABEL",
    "ScmixError",
    "config_hash",
    "confidence_weight",
    "image_descriptor",
    "make_benchmark",
    "mix",
    "proxy_distance",
    "pseudo_label",
    "run_cli",
]
