"""Batched acceptance-rejection selection of the next reaction for the SSA.

Submodules:

- ``model``: propensity rows and matrices, reaction networks, mass-action
  propensities, the discrete Gaussian test distribution, file formats.
- ``rng``: counter-based uniform streams keyed by (seed, realization, purpose).
- ``select_ar``: election/selection acceptance-rejection selector, batched.
- ``select_it``: inverse-transform (direct method) selector.
- ``oracle``: exact and Monte Carlo selection laws.
- ``engine``: lockstep SSA over K realizations.
- ``validate``: accuracy experiments and the selection benchmark.
- ``cli``: the ``arssa`` command.
"""

from .errors import (
    ConsistencyError,
    ContractViolationError,
    DegenerateDistributionError,
    DistributionFormatError,
    InvalidSizeError,
    NetworkFormatError,
    UnsupportedRegimeError,
)
from .model import (
    PropensityMatrix,
    PropensityRow,
    Reaction,
    ReactionNetwork,
    RealizationState,
    compute_propensities,
    gen_discrete_gaussian,
    load_network,
    load_propensity_row,
)
from .rng import RngStream, for_realization, uniform01
from .select_ar import (
    REJECTED,
    SENTINEL,
    ThresholdPolicy,
    batched_select,
    compute_threshold,
    election_step,
    selection_step,
)
from .select_it import inverse_transform_select
from .oracle import (
    WinProbabilityVector,
    brute_force_win_probabilities,
    it_probabilities,
    win_probabilities,
)
from .engine import BatchRun, StepRecord, run_batch, sample_tau, step
from .validate import ValidationReport, bench_select, mse_normalized, run_selection_experiment

__version__ = "0.1.0"
