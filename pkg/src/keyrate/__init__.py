"""Secret-key laboratory for Werner / symmetric tripartite distributions."""

from .ad import (
    ADReport,
    SimulationOutcome,
    SixClassRates,
    ad_report,
    bob_error,
    condition_rhs,
    eve_error_lower_bound_activated,
    eve_error_lower_bound_werner,
    simulate_ad,
    six_class_rates,
    threshold,
)
from .intrinsic import (
    IntrinsicResult,
    analytic_werner_intrinsic,
    conjectured_werner_channel,
    intrinsic_upper_bound,
    minimize_intrinsic,
)
from .paper_dists import (
    DerivedConstants,
    SymmetricParams,
    WernerParams,
    activate,
    binaryze_symmetric,
    binaryze_werner,
    build_family,
    symmetric_distribution,
    universal_activator_q,
    werner_distribution,
)
from .probdist import (
    EveChannel,
    TripartiteDistribution,
    apply_channel,
    conditional_mutual_information,
    marginal,
    mutual_information,
    normalize,
)
from .quantum import (
    DensityMatrix,
    Ensemble,
    POVM,
    PureState,
    derive_distribution,
    eve_ensemble,
    one_distillable_check,
    ppt_check,
    purify,
    quantum_activation,
    square_root_measurement,
    symmetric_state,
    werner_state,
)

__version__ = "0.1.0"
