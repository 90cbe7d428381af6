"""Operator-splitting solver for stochastic conservation laws with fractional degenerate diffusion."""

from .config import RunConfig, build_problem, load_config, parse_config
from .deterministic import (SolverOptions, cfl_max_dt, deterministic_update, dx_from_cfl, solve_deterministic,
                            step_deterministic)
from .diagnostics import (ConvergenceReport, bound_verdicts, l1_distance, l1_norm, linf_norm, observed_order,
                          restrict, total_variation)
from .errors import (CflViolation, ConfigError, DegenerateFit, DegenerateGrid, DomainError, FractSplitError,
                     GridMismatch, IncompatibleRefinement, IoError, NonCommensurate, NonFiniteInput,
                     NumericalFailure, ParseError, QuadratureFailure, SamplerUnavailable, SchemaError)
from .flux import eo_divergence, eo_flux, flux_split
from .fractional import FractionalStencil, apply_nonlocal, compute_a_theta, compute_weights
from .grid import Grid1D, ScalarField, TimeGrid, grid_from_cells, make_grid, make_time_grid, project_initial
from .io import emit_convergence_csv, emit_field_csv, emit_stats_csv
from .models import (IDENTITY_DIFFUSION, ZERO_DIFFUSION, ZERO_FLUX, DiffusionModel, FluxModel, ProblemSpec,
                     burgers_flux, polynomial_flux)
from .presets import preset_example_1, preset_example_2
from .special import adaptive_simpson, gamma_function
from .splitting import (EnsembleStats, PathTrajectory, convergence_study, run_ensemble, run_path,
                        time_continuity_probe)
from .stochastic import LevyMeasure, RngStream, compensator_value, sample_mark, step_em
from .validation import ValidationReport, validate_spec

__version__ = "0.1.0"
