"""Numerical laboratory for the flashing-ratchet Brownian motor.

Simulates the switched drift-diffusion problem with no-flux boundaries,
builds the induced well-to-well Markov chain, and verifies that the
periodic orbit redistributes mass strictly monotonically across the wells
with the predicted exponential gap scaling.
"""

from .chain import (GapCertificate, MonotoneReport, StationaryVector,
                    TransitionMatrix, build_transition_matrix, certify_gap,
                    stationary_vector, verify_monotone, zero_sum_gap)
from .config import ConfigError, ExperimentConfig
from .fokker_planck import (CoarseGridWarning, PeriodicOrbit, RatchetSchedule,
                            default_time_step, find_periodic, period_map,
                            ratchet_phase, sobolev_h2_norm)
from .grid import DensityGrid
from .kernel import (DEFAULT_EVAL, KernelEval, diffuse, heat_kernel,
                     neumann_green, neumann_green_cdf, periodic_kernel,
                     periodic_kernel_dx)
from .measures import (DiracComb, LocalizationTrace, SweepPoint, TransportReport,
                       collapse, consistency_sweep, default_ladder,
                       discrete_ratchet_step, ratchet_localization_check,
                       verify_transport, wasserstein1, well_masses)
from .potential import RatchetPotential

__version__ = "0.1.0"

__all__ = [
    "CoarseGridWarning",
    "ConfigError",
    "DEFAULT_EVAL",
    "DensityGrid",
    "DiracComb",
    "ExperimentConfig",
    "GapCertificate",
    "KernelEval",
    "LocalizationTrace",
    "MonotoneReport",
    "PeriodicOrbit",
    "RatchetPotential",
    "RatchetSchedule",
    "StationaryVector",
    "SweepPoint",
    "TransitionMatrix",
    "TransportReport",
    "build_transition_matrix",
    "certify_gap",
    "collapse",
    "consistency_sweep",
    "default_ladder",
    "default_time_step",
    "diffuse",
    "discrete_ratchet_step",
    "find_periodic",
    "heat_kernel",
    "neumann_green",
    "neumann_green_cdf",
    "period_map",
    "periodic_kernel",
    "periodic_kernel_dx",
    "ratchet_localization_check",
    "ratchet_phase",
    "sobolev_h2_norm",
    "stationary_vector",
    "verify_monotone",
    "verify_transport",
    "wasserstein1",
    "well_masses",
    "zero_sum_gap",
]
