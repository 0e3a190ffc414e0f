"""Numerical laboratory for pulse propagation in time dependent randomly layered media."""

__version__ = "0.1.0"

from . import csvio, ensemble, medium, solver, theory  # noqa: F401
from .medium import AutocorrSpec, MediumSpec, Pulse, StationaryField, build_field, make_pulse  # noqa: F401
from .solver import (Grid, WavefrontRecord, build_grid, decompose,  # noqa: F401
                     extract_front, fdtd_run, oscillator_run, reconstruct,
                     travel_time, wavefront_integrate)
from .theory import (KernelTable, LimitFront, RegimeKernel, gamma_of_omega,  # noqa: F401
                     limit_volterra, oscillator_rate, psi_kernel,
                     shaping_kernel, stable_front, translational_gamma)
from .ensemble import (ComparisonReport, EnsembleStats, compare,  # noqa: F401
                       convergence_study, run_ensemble,
                       run_travel_time_ensemble)
