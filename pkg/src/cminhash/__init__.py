"""MinHash and circulant C-MinHash sketches for Jaccard similarity."""

from ._backend import BACKEND
from .errors import (
    BudgetExceededError,
    CMinHashError,
    DatasetFormatError,
    DatasetParseError,
    DimensionMismatchError,
    EmptyVectorError,
    IncompatibleSketchError,
    InvalidArgumentError,
    InvalidDimensionError,
    UndefinedSimilarityError,
)
from .estimators import (
    PairStats,
    collision_indicators,
    estimate_jaccard,
    exact_pair_stats,
    minhash_theoretical_variance,
)
from .experiments import (
    MaeResultRow,
    McPerKRow,
    McResultRow,
    Placement,
    SyntheticPairSpec,
    mae_all_pairs,
    mc_bias_mse,
    mc_per_k_collision,
    mc_per_k_curve,
    synth_dataset,
    synth_pair,
)
from .io import (
    SparseDataset,
    TheoryMeanRow,
    TheoryPerKRow,
    load_sparse_dataset,
    parse_sparse_dataset,
    write_results_csv,
    write_sparse_dataset,
)
from .permute import (
    BinaryVector,
    Hasher,
    Permutation,
    Scheme,
    Sketch,
    circulant_index,
    circulant_index_inverse,
    cminhash_pi_pi,
    cminhash_sigma_pi,
    cminhash_zero_pi,
    generate_permutation,
    minhash_classic,
)
from .theory import (
    Loc,
    LocationVector,
    bias_squared,
    bruteforce_collision_expectation_k,
    collision_expectation_k,
    estimator_mean,
    location_vector,
    per_k_expectations,
)

__version__ = "0.1.0"
