"""Exact and Monte-Carlo tools for the random transposition shuffle on S_n."""
import warnings

# numba probes an old system TBB on first parallel launch and falls back to
# another threading layer; the probe's warning is noise for users
warnings.filterwarnings("ignore", message="The TBB threading layer requires")

from .characters import content, eigenvalue_array, exact_eigenvalues, pn_eigenvalue, transposition_character_ratio
from .classdist import EXACT_MAX_N, ClassDistribution
from .errors import InvariantError, TooLargeError, ValidityRangeError
from .exact_oracle import (
    evolve_class,
    exact_stopped_distribution,
    exact_tv,
    full_group_convolution,
    walk_class_law,
)
from .measures import (
    WalkTime,
    cutoff_time,
    mu_class_distribution,
    nu_class_distribution,
    poisson_tv,
    prob_untouched_exactly,
    prob_untouched_superset,
)
from .partitions import Partition, dimension, enumerate_partitions
from .rng import Stream
from .spectral import mu_spectrum, plancherel_tv_bound, tail_sum, walk_spectrum, xi_spectrum_entry

__version__ = "0.1.0"
