"""Conditioning of sparse super-resolution on the torus.

Fisher information and Cramer-Rao bounds for recovering a discrete
measure from its low-order Fourier coefficients, smallest singular
values of the partially confluent block Vandermonde Jacobian, a
compactly supported minorant construction that certifies separation-
limited lower bounds on them, and sweep tooling that reproduces the
phase transition at the Rayleigh limit.
"""

from .errors import (
    ConfigError,
    DomainError,
    InfeasibleError,
    NumericsError,
    SingularityError,
    SrcondError,
    TruncationError,
)
from .minorant import (
    AdmissibilityReport,
    BoundReport,
    MinorantModel,
    PoissonReport,
    autocorrelation,
    certify_admissibility,
    phi,
    phi_hat,
    poisson_decomposition,
    prop_bound,
    psi_hat_tau,
    psi_tau,
    radial_derivative_check,
    suggest_k_max,
)
from .moments import (
    BlockJacobian,
    FisherInfo,
    FrequencyIndexSet,
    WeightVector,
    block_jacobian,
    condition_proxy,
    confluent_block,
    cramer_rao_bound,
    fisher_information,
    index_set,
    sigma_min,
    synth_moments,
    unit_weights,
    vandermonde,
    vandermonde_upper_bound,
    weight_floor_bound,
)
from .specfun import BesselOrder, QuadratureRule, bessel_j, first_bessel_zero, gauss_legendre
from .sweeps import SweepConfig, SweepResult, emit_csv, emit_plot, parse_csv, run_bound_campaign, run_sweep
from .torus import NodeSet, gen_grid, gen_hex_lattice, gen_random_separated, separation

__version__ = "0.1.0"
