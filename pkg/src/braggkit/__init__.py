"""braggkit: diffraction of weighted point sets in low-dimensional Euclidean
space, with Meyer-set and positive-definiteness diagnostics."""

from .geometry import (
    Box,
    PointSet,
    VanHoveFamily,
    MeyerReport,
    generate_lattice,
    generate_model_set,
    fibonacci_model_set,
    compose,
    realize,
    min_gap,
    covering_radius,
    weak_ud_count,
    difference_set,
    meyer_check,
    van_hove_ratio,
)
from .measure import (
    AtomicMeasure,
    SampledMeasure,
    SubgroupSpec,
    dirac_comb,
    support_value,
    total_variation,
    pure_point_part,
    reflect,
    convolve,
    weight_by,
    translation_bound,
    restrict,
    add,
)
from .posdef import (
    GramReport,
    KreinReport,
    SparsenessReport,
    RigidityReport,
    gram_psd_check,
    krein_check,
    sparse_threshold_b,
    high_intensity_set,
    sparseness_verify,
    rigidity_check,
)
from .diffraction import (
    AutocorrelationTrace,
    BraggPeak,
    DiffractionEstimate,
    BraggMeyerReport,
    autocorrelation,
    autocorrelation_trace,
    exp_sum,
    exp_sums,
    bragg_intensity,
    autocorr_ft_identity_check,
    candidate_frequencies,
    visible_bragg_set,
    estimate_diffraction,
    bragg_meyer_check,
)
from .dualsets import (
    GridRegion,
    DualWitnessReport,
    eps_dual,
    eps_dual_back,
    double_dual,
    dual_witness_check,
)

__version__ = "0.1.0"
