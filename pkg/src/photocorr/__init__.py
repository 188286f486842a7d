"""photocorr: photon statistics of collective emission from emitter arrays.

A numpy/scipy library for zero-delay second-order correlation functions of
two-level emitter arrays in free space: exact Lindblad dynamics for small
registers, closed-form inverted-array references, and pairwise / m-wise
Monte-Carlo subset estimators with offset corrections for large arrays.
Lengths are in units of the transition wavelength, rates in units of the
single-emitter decay rate.
"""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    DegenerateSteadyStateError,
    IntegrationError,
    PhotocorrError,
    SampleFailureError,
    SingularityError,
    ValidationError,
    ZeroIntensityError,
)
from .geometry import (
    DetectorConfig,
    DriveParams,
    EmitterArray,
    GeometrySpec,
    SamplingSettings,
    ScenarioConfig,
    build_chain,
    build_coincident,
    build_square_lattice,
    validate,
)
from .greens import (
    CoeffMatrix,
    CouplingMatrices,
    coeff_matrix,
    coeff_matrix_pair,
    coupling_matrices,
    far_field_greens,
    greens_free_space,
)
from .quantum import (
    DensityState,
    Liouvillian,
    build_liouvillian,
    embed_ladder,
    evolve,
    expectation,
    ground_state,
    inverted_state,
    product_state,
    steady_state,
    trace_distance,
)
from .correlations import (
    CorrelationResult,
    a2_zero_delay,
    dicke_value,
    emission_rate,
    far_field_inverted_g2,
    independent_value,
    intensity_matrix,
    inverted_array_closed_form,
    slope_relation_check,
)
from .sampling import (
    SamplingConfig,
    SamplingEstimate,
    apply_offset,
    draw_sample,
    mean_percentage_error,
    mwise_estimate,
    optimal_method,
    pairwise_estimate,
    sample_distribution,
)
from .harness import run_emission_trace, run_error_scan, run_sweep
