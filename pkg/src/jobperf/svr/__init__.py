"""Epsilon-support-vector regression."""

from .kernels import Kernel, kernel_eval
from .model import (
    SvrModel,
    SvrParams,
    dual_objective,
    extract_weights,
    fit_svr,
    fit_svr_arrays,
    kkt_violations,
    predict_svr,
)

__all__ = [
    "Kernel",
    "SvrModel",
    "SvrParams",
    "dual_objective",
    "extract_weights",
    "fit_svr",
    "fit_svr_arrays",
    "kernel_eval",
    "kkt_violations",
    "predict_svr",
]
