"""Partial-overlap duplex cellular network toolkit.

Evaluates an adjustable uplink/downlink spectrum-overlap scheme two ways:
closed-form stochastic-geometry expressions and an independent Monte Carlo
network simulation, with cross-validation between the two.
"""

__version__ = "0.1.0"

from .specfun import QuadratureSpec, QuadratureError, integrate, hyp2f1_special, lower_gamma2, u_func, erfc
from .pulse import (
    PulseShape,
    DuplexConfig,
    CrossFactors,
    spectrum_value,
    overlap_factors,
    find_orthogonal_alpha,
    noise_power,
    NoRootError,
)
from .analytic import (
    NetworkParams,
    LinkContext,
    LTKind,
    pu_density,
    pu_point_mass,
    pu_frac_moment,
    class_probabilities,
    service_distance_pdf,
    lt_interference,
    lt_uu_ceu_jensen,
    bep,
    outage,
    outage_special,
    rate,
    ul_gain_condition,
    dl_gain,
)
from .montecarlo import (
    SimulationConfig,
    NetworkRealization,
    MetricEstimate,
    sample_realization,
    sinr_sample,
    estimate_metric,
)
