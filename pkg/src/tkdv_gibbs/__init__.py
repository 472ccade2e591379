"""Rejection sampling of the truncated KdV Gibbs measure."""

from .errors import (ConstantViolationError, DegenerateInputError, InsufficientDataError,
                     InvalidStateError, NumericalError, OptimizationError, ResolutionError)
from .hamiltonian import (beta_hamiltonian, h2, h2_exact_2mode, h3, h3_exact_2mode,
                          two_mode_spectrum)
from .proposal import (F, F_limit, ProposalParams, build_proposal, log_g, log_ratio_f_over_g,
                       sample_proposal, solve_alpha_star)
from .rejection import (RejectionSetup, SampleBatch, find_rejection_constant,
                        measure_improvement, run_parallel, run_sampler)
from .spectral import (ModelParams, SpherePoint, Spectrum, WaveField, dirichlet_kernel,
                       energy, project_to_sphere, sphere_to_spectrum, spectrum_to_field)
from .stats import EnsembleStats, ensemble_stats, extreme_event

__version__ = "0.1.0"
