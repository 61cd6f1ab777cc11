"""Pre-FEC performance metrics for coherent transmission experiments.

Compute symbol and bit error rates, achievable information rates, and
L-value based shaped-system metrics from transmitted/received symbol
traces, with built-in additive-Gaussian and rotated-Gaussian channel
simulators and matched/mismatched decoding metrics.
"""

from ._backend import active_backend
from .channels import (
    ChannelSpec,
    Trace,
    apply_awgn,
    apply_pn_awgn,
    draw_indices,
    simulate,
)
from .constellation import (
    Constellation,
    ShapingSpec,
    build_pam,
    build_square_qam,
    entropy,
    maxwell_boltzmann_probs,
    scale_snr,
    shape_maxwell_boltzmann,
    snr_db_from_sigma2,
    solve_maxwell_boltzmann,
)
from .errors import (
    ConfigurationError,
    DegenerateLabelingError,
    DimensionMismatchError,
    InfeasibleShapingError,
    OutOfDomainError,
    PrefecError,
    TraceFormatError,
    UnsupportedConstellationError,
    UnsupportedInputError,
)
from .metrics import (
    LValueSet,
    MetricFunction,
    compute_lvalues,
    custom_q,
    estimate_sigma2,
    gaussian_q,
    pn_matched_q,
)
from .recipes import (
    HistogramSpec,
    LHistogram,
    MetricReport,
    air_b,
    air_b_hd,
    air_b_ps,
    air_pair,
    air_s,
    asi,
    ber,
    binary_entropy,
    build_lvalue_histogram,
    erfc_inv,
    hard_decide,
    j_function,
    j_inverse,
    net_rate_ps,
    optimize_sigma_scale,
    preber_ps,
    q_hard,
    q_soft,
    ser,
)
from .trace_io import read_trace, write_report, write_trace

__version__ = "0.1.0"

__all__ = [
    "ChannelSpec",
    "ConfigurationError",
    "Constellation",
    "DegenerateLabelingError",
    "DimensionMismatchError",
    "HistogramSpec",
    "InfeasibleShapingError",
    "LHistogram",
    "LValueSet",
    "MetricFunction",
    "MetricReport",
    "OutOfDomainError",
    "PrefecError",
    "ShapingSpec",
    "Trace",
    "TraceFormatError",
    "UnsupportedConstellationError",
    "UnsupportedInputError",
    "active_backend",
    "air_b",
    "air_b_hd",
    "air_b_ps",
    "air_pair",
    "air_s",
    "apply_awgn",
    "apply_pn_awgn",
    "asi",
    "ber",
    "binary_entropy",
    "build_lvalue_histogram",
    "build_pam",
    "build_square_qam",
    "compute_lvalues",
    "custom_q",
    "draw_indices",
    "entropy",
    "erfc_inv",
    "estimate_sigma2",
    "gaussian_q",
    "hard_decide",
    "j_function",
    "j_inverse",
    "maxwell_boltzmann_probs",
    "net_rate_ps",
    "optimize_sigma_scale",
    "pn_matched_q",
    "preber_ps",
    "q_hard",
    "q_soft",
    "read_trace",
    "scale_snr",
    "ser",
    "shape_maxwell_boltzmann",
    "simulate",
    "snr_db_from_sigma2",
    "solve_maxwell_boltzmann",
    "write_report",
    "write_trace",
]
