"""Bistable energy harvester simulation and polynomial chaos uncertainty analysis."""

from ._core import (
    BistableError,
    Config,
    HarvesterParams,
    RandomInputSpec,
    Surrogate,
    classify,
    confidence_band,
    entropy,
    equilibria,
    fit,
    integrate,
    interval_from_nominal,
    kde,
    mean_power,
    modality,
    normalize,
    rhs,
    sample,
    silverman_bandwidth,
    wilson_interval,
    zero_one_test,
)

__all__ = [
    "BistableError",
    "Config",
    "HarvesterParams",
    "RandomInputSpec",
    "Surrogate",
    "classify",
    "confidence_band",
    "entropy",
    "equilibria",
    "fit",
    "integrate",
    "interval_from_nominal",
    "kde",
    "mean_power",
    "modality",
    "normalize",
    "rhs",
    "sample",
    "silverman_bandwidth",
    "wilson_interval",
    "zero_one_test",
]
