"""Super-resolution sparse MIMO-OFDM channel estimation.

Path delays shared by all antenna pairs are recovered off-grid with
TLS-ESPRIT from comb-pilot measurements stacked across pairs and averaged
over adjacent OFDM symbols; gains follow by least squares.
"""

__version__ = "0.1.0"

from .channel import ChannelRealization, cfr_at, cfr_full, evolve_channel, sample_channel
from .config import SimConfig, config_from_dict, load_config
from .esprit import (
    ChannelEstimate,
    DelayEstimate,
    MeasurementWindow,
    average_window,
    build_vandermonde,
    estimate_channel,
    estimate_delays,
    reconstruct_cfr,
    recover_gains,
)
from .params import (
    ChannelParams,
    DopplerParams,
    EstimatorConfig,
    MimoGeometry,
    SystemParams,
    validate,
)
from .pilots import MeasurementMatrix, PilotPlan, default_plan, observe_pilots, pilot_indices

__all__ = [
    "ChannelEstimate", "ChannelParams", "ChannelRealization", "DelayEstimate", "DopplerParams",
    "EstimatorConfig", "MeasurementMatrix", "MeasurementWindow", "MimoGeometry", "PilotPlan",
    "SimConfig", "SystemParams", "average_window", "build_vandermonde", "cfr_at", "cfr_full",
    "config_from_dict", "default_plan", "estimate_channel", "estimate_delays", "evolve_channel",
    "load_config", "observe_pilots", "pilot_indices", "reconstruct_cfr", "recover_gains",
    "sample_channel", "validate",
]
