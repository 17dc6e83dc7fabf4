"""Privacy accounting for the shuffle model with k-ary randomized response."""
from .params import (
    C,
    BadAlphabet,
    BadDistribution,
    BadSize,
    BadTarget,
    KappaSet,
    NonPositiveEpsilon0,
    ParamError,
    ShuffleParams,
    TargetPair,
    all_kappas,
    compute_kappas,
    validate_params,
)
from .bounds import (
    BadInterval,
    Case,
    DeltaBound,
    NonPositiveEpsilon,
    NonPositiveInput,
    delta_bound,
    epsilon_for_delta,
    select_case,
)

from .tightness import (
    Classification,
    CriticalEq,
    CriticalPoly,
    Interval,
    Region,
    TheoremVerdict,
    critical_eq_eval,
    h_root_in,
    poly_root_in,
    regions_and_verdict,
)
from .oracle import (
    HistogramDist,
    KrrMatrix,
    MismatchedSupport,
    TooLarge,
    histogram_dist,
    hockey_stick_delta,
    sample_shuffled,
    tight_adp,
    tight_dp,
)

__version__ = "0.1.0"
