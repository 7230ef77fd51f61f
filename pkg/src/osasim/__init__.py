"""Opportunistic spectrum access in overlaid Poisson networks.

Threshold-based secondary activation protocols (receiver-beacon and
transmitter-pilot sensing), exclusion-region baselines, closed-form
opportunity/coverage/throughput results, and Palm-conditioned Monte-Carlo
validation of all of them.
"""

from .analytic import (
    CoverageBounds,
    DensityProfileKind,
    IntegrationError,
    ValueBounds,
    active_st_density,
    beta_factor,
    conditional_density,
    coverage_primary_all_active,
    coverage_primary_no_secondaries,
    coverage_primary_pra,
    coverage_primary_pta_bounds,
    coverage_secondary_all_active,
    coverage_secondary_pra_lower,
    coverage_secondary_pta_bounds,
    exclusion_opportunity,
    exclusion_radius_for_opportunity,
    integrate_semi_infinite,
    kappa,
    spatial_opportunity,
    spatial_throughput,
    threshold_for_opportunity,
)
from .channel import (
    ChannelParams,
    FadingDraw,
    received_power,
    sample_fading,
    sample_fadings,
    sir,
)
from .experiments import (
    ConfigError,
    ExperimentSpec,
    ProfileSpec,
    ResultRow,
    PRESET_NAMES,
    RESULT_COLUMNS,
    SweepSpec,
    Variant,
    preset,
    run,
    spec_from_dict,
    spec_to_dict,
)
from .geometry import (
    Point,
    PointPattern,
    SimWindow,
    distance,
    empty_pattern,
    place_partner,
    sample_hppp,
)
from .montecarlo import (
    Estimate,
    RadialProfile,
    estimate_conditional_density,
    estimate_coverage_primary,
    estimate_coverage_secondary,
    estimate_spatial_opportunity,
    estimate_throughput,
)
from .params import SystemParams
from .protocols import (
    Conditioning,
    DataFadings,
    NetworkRealization,
    ProtocolKind,
    RejectionCapError,
    activation_flags,
    aloha_thin,
    build_realization,
    max_sensed_power,
    required_threshold,
    secondary_activation,
)

__all__ = [name for name in dir() if not name.startswith("_")]
