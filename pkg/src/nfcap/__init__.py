"""Closed-form capacity toolkit for line-of-sight multiuser links
served by large planar antenna arrays, with exact-propagation channel
statistics, uplink and downlink and multicast capacity expressions,
brute-force verification oracles, and deterministic sweep runners.
"""

__version__ = "0.1.0"

from ._kernels import active_backend
from .broadcast import (
    BcConfig,
    ConvergenceError,
    CovariancePair,
    PowerAllocation,
    bc_asymptotics,
    bc_capacity_general,
    bc_capacity_two_user,
    bc_covariance_recovery,
    bc_power_allocation_two_user,
    bc_region_two_user,
    linear_precoder_sum_rate,
)
from .config import (
    Scenario,
    ScenarioError,
    SweepSpec,
    default_scenario,
    load_scenario,
    parse_angle,
)
from .geometry import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    ChannelVector,
    UserLocation,
    element_distance,
    epsilon,
    ff_channel_vector,
    green_amplitude_ratio,
    nf_channel_vector,
)
from .mac import (
    FfAsymptote,
    MacConfig,
    RatePoint,
    RateRegion,
    linear_combiner_sum_rate,
    mac_asymptotics,
    mac_capacity_general,
    mac_capacity_two_user,
    mac_corner_rates_general,
    mac_region_two_user,
    sic_rates_two_user,
)
from .multicast import (
    Beamformer,
    McFfAsymptote,
    mc_asymptotics,
    mc_beamformer_two_user,
    mc_capacity_two_user,
    mc_rate_given_beamformer,
    mc_upper_bound,
)
from .oracles import (
    OracleReport,
    bc_power_grid_oracle,
    bc_simplex_grid_oracle,
    ccf_sum_oracle,
    gain_sum_oracle,
    logdet_capacity_oracle,
    mc_beam_grid_oracle,
    sic_rates_oracle,
)
from .stats import (
    CcfEstimate,
    LinkStats,
    asymptotic_nf_gain,
    asymptotic_ula_gain,
    ccf_exact,
    ff_ccf_closed,
    ff_gain_closed,
    gain_exact,
    nf_ccf_quadrature,
    nf_gain_closed,
    ula_gain_closed,
)

__all__ = [
    "__version__",
    "active_backend",
    "SPEED_OF_LIGHT",
    "ArrayGeometry",
    "UserLocation",
    "ChannelVector",
    "epsilon",
    "element_distance",
    "nf_channel_vector",
    "ff_channel_vector",
    "green_amplitude_ratio",
    "LinkStats",
    "CcfEstimate",
    "gain_exact",
    "ccf_exact",
    "nf_gain_closed",
    "ff_gain_closed",
    "ula_gain_closed",
    "asymptotic_nf_gain",
    "asymptotic_ula_gain",
    "nf_ccf_quadrature",
    "ff_ccf_closed",
    "MacConfig",
    "RatePoint",
    "RateRegion",
    "FfAsymptote",
    "mac_capacity_two_user",
    "mac_capacity_general",
    "mac_corner_rates_general",
    "sic_rates_two_user",
    "mac_region_two_user",
    "linear_combiner_sum_rate",
    "mac_asymptotics",
    "BcConfig",
    "PowerAllocation",
    "CovariancePair",
    "ConvergenceError",
    "bc_power_allocation_two_user",
    "bc_capacity_two_user",
    "bc_covariance_recovery",
    "bc_region_two_user",
    "bc_capacity_general",
    "linear_precoder_sum_rate",
    "bc_asymptotics",
    "Beamformer",
    "McFfAsymptote",
    "mc_rate_given_beamformer",
    "mc_beamformer_two_user",
    "mc_capacity_two_user",
    "mc_upper_bound",
    "mc_asymptotics",
    "OracleReport",
    "logdet_capacity_oracle",
    "sic_rates_oracle",
    "bc_power_grid_oracle",
    "bc_simplex_grid_oracle",
    "mc_beam_grid_oracle",
    "gain_sum_oracle",
    "ccf_sum_oracle",
    "Scenario",
    "ScenarioError",
    "SweepSpec",
    "default_scenario",
    "load_scenario",
    "parse_angle",
]
