"""Spectral toolkit for the Klein-Gordon equation with a Hartree nonlinearity on a periodic box."""

from .errors import (
    ConfigError,
    ContractViolation,
    ExponentError,
    GridMismatchError,
    InstabilityError,
    InvalidParameter,
    KGHError,
    NoContractionError,
    NonConvergenceError,
    ResolutionExhausted,
    SingularSymbolError,
)
from .grid import Field, GridSpec, NormSpec, apply_multiplier, bessel_power, norm, transform
from .modulation import (
    BumpWindow,
    ExponentTable,
    ModulationParams,
    SplitResult,
    approx_k_functional,
    box_project,
    exponent_table,
    high_low_split,
    modulation_norm,
    partition_weights,
    reconstruct,
    stft_norm,
)
from .propagators import AdmissiblePair, PairState, gap_q, kg_matrix, kg_propagator, propagator_bound_probe, spacetime_norm
from .hartree import (
    HartreeKernel,
    HlsExponents,
    hartree_energy,
    hartree_nonlinearity,
    hartree_potential,
    hls_exponents,
    hls_ratio,
    nonlinearity_difference,
)
from .solver import (
    FirstOrderState,
    GwpReport,
    Trajectory,
    diagnostics,
    duhamel_map,
    evolve,
    from_first_order,
    gwp_experiment,
    picard_solve,
    sumspace_witness_norm,
    to_first_order,
)
from .corpus import CorpusSpec, generate_corpus
from .config import ExperimentConfig

__version__ = "0.1.0"
