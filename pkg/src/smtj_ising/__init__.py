"""Probabilistic Ising annealing with emulated superparamagnetic tunnel junctions.

Modules: ``ising`` (energy model), ``device`` (SMTJ emulation), ``annealer``
(Gibbs sweeps and schedules), ``tsp`` (TSP/CTSP encodings),
``decomposition`` (partition-solve-stitch-refine pipeline), ``tsplib``
(instance files and run artifacts) and ``cli``.
"""

from .annealer import RunConfig, RunResult, Schedule, run, success_probability
from .device import DeviceParams
from .ising import IsingModel
from .tsp import CtspConstraint, Tour, TspInstance, build_ctsp, build_tsp

__all__ = [
    "CtspConstraint",
    "DeviceParams",
    "IsingModel",
    "RunConfig",
    "RunResult",
    "Schedule",
    "Tour",
    "TspInstance",
    "build_ctsp",
    "build_tsp",
    "run",
    "success_probability",
]
__version__ = "0.1.0"
