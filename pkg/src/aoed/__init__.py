"""A-optimal Bayesian sensor placement for linear-Gaussian inverse problems."""
from .errors import (
    AoedError, DimensionMismatch, FormatError, IndexActive, InvalidBudget, InvalidSpec,
    IoError, NonFiniteObjective, NonPositiveNoise, NotBinary, NotCertified, NotSPD,
    RangeMismatch, TooLarge,
)
from .greedy import (
    PosteriorState, SweepTrace, brute_force_best, greedy_fill, greedy_sweep, incremental_gain,
)
from .informed import (
    ComparisonReport, InformedOptions, InformedTrace, compare_sweeps, informed_sweep,
)
from .model import (
    Design, Model, PrecomputedKernels, build_model, gradient, hessian, hessian_apply,
    objective, objective_dense_oracle, posterior_mean, precompute,
)
from .problems import ProblemSpec, calibrate_noise, generate, load_model, save_model
from .relaxed import (
    Certificate, RelaxedSolution, SolverOptions, certify, classify_redundant, solve_relaxed,
)
from .simplex import CappedSimplex

__version__ = "0.1.0"
