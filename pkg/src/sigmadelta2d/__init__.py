"""Weighted Sigma-Delta quantization of 2D signals and digital halftoning."""

__version__ = "0.1.0"

from .filters import (
    FeedbackFilter,
    InvalidFilterError,
    detect_order,
    filter_constant,
    finite_difference_filter,
    first_order_filter,
    make_filter,
    make_sparse_second_order,
    validate_moments,
)
from .schemes import (
    Direction,
    SchemeError,
    SchemeSpec,
    builtin_schemes,
    extended_weight_matrix,
    get_scheme,
    load_schemes,
    dump_schemes,
    make_scheme,
    stability_margin,
    validate_scheme,
    weight_constant,
)
from .optimize import OptimizerConfig, optimize_first_order, optimize_weights
from .quantizer import InitPolicy, QuantizationResult, quantize_grid
from .bandlimited import LatticeSpec, SincKernel, decay_experiment, reconstruct, sample_function, sup_error
from .halftone import HalftoneConfig, halftone_image, read_image, to_signal, write_image
from .metrics import FsimConfig, QualityReport, fsim, fsimc, phase_congruency
