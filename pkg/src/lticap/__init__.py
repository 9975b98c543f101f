"""Classical capacities of linear time-invariant bosonic channels.

Ultimate (Holevo), homodyne and heterodyne capacities under an average
photon-flux constraint, for cascades of attenuating and amplifying filter
stages in a thermal environment.
"""

__version__ = "0.1.0"

from .capacity import (
    DetectionScheme,
    SolverConfig,
    SolverError,
    WaterfillSolution,
    capacity,
    classical_allocation,
    hsw_allocation,
    measurement_noise_spectrum,
    solve_flux_constraint,
)
from .entropy import g
from .filters import (
    Butterworth4,
    ChannelModel,
    FilterStage,
    Flat,
    Tabulated,
    cascade,
    stage_magnitude,
    stage_noise_spectrum,
)
from .physics import InvalidParameterError, PhysicalEnvironment, thermal_occupancy

__all__ = [
    "Butterworth4", "ChannelModel", "DetectionScheme", "FilterStage", "Flat",
    "InvalidParameterError", "PhysicalEnvironment", "SolverConfig", "SolverError",
    "Tabulated", "WaterfillSolution", "capacity", "cascade", "classical_allocation",
    "g", "hsw_allocation", "measurement_noise_spectrum", "solve_flux_constraint",
    "stage_magnitude", "stage_noise_spectrum", "thermal_occupancy",
]
