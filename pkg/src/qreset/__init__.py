"""Entropy production of reliable qubit reset."""

from .dynamics import (
    ControlParams,
    IntegrationError,
    LindbladConfig,
    ProtocolSchedule,
    ResetChannel,
    Trajectory,
    evolve,
    reliability,
)
from .efvector import (
    EntropyFlowVector,
    ProbeSet,
    ep_analytic,
    infer_ef_vector,
    minimally_dissipative_state,
    minimize_ep,
    minimize_ep_numeric,
    predict_ef,
)
from .qmath import (
    bloch_to_density,
    coherence_decomposition,
    density_to_bloch,
    relative_entropy,
    trace_distance,
    von_neumann_entropy,
)
from .swapreset import gibbs_qubit, swap_entropy_flow_vector, swap_entropy_production
from .thermo import ThermoReport, report

__version__ = "0.1.0"

__all__ = [
    "ControlParams",
    "IntegrationError",
    "LindbladConfig",
    "ProtocolSchedule",
    "ResetChannel",
    "Trajectory",
    "evolve",
    "reliability",
    "EntropyFlowVector",
    "ProbeSet",
    "ep_analytic",
    "infer_ef_vector",
    "minimally_dissipative_state",
    "minimize_ep",
    "minimize_ep_numeric",
    "predict_ef",
    "bloch_to_density",
    "coherence_decomposition",
    "density_to_bloch",
    "relative_entropy",
    "trace_distance",
    "von_neumann_entropy",
    "gibbs_qubit",
    "swap_entropy_flow_vector",
    "swap_entropy_production",
    "ThermoReport",
    "report",
]
