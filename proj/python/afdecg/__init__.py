"""Adaptive Fourier decomposition ECG toolkit.

Thin wrapper over the native core: analytic-signal construction, greedy
pole-search decomposition, instantaneous-frequency features, and the
evaluation metrics used by the heartbeat classifier.
"""

from ._core import (
    Decomposition,
    R_INDEX,
    SEGMENT_LENGTH,
    __version__,
    analytic_signal,
    confusion_metrics,
    decompose,
    map_aami,
    mean_coefficient,
    qrs_duration,
    rbf_kernel,
)

__all__ = [
    "Decomposition",
    "R_INDEX",
    "SEGMENT_LENGTH",
    "__version__",
    "analytic_signal",
    "confusion_metrics",
    "decompose",
    "map_aami",
    "mean_coefficient",
    "qrs_duration",
    "rbf_kernel",
]
