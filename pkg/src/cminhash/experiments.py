"""Synthetic pairs and Monte Carlo harnesses for bias, variance, MSE and MAE.

Every trial re-draws its permutations from ``derive(seed, trial)``, so a
run is a pure function of its configuration: splitting trials across
threads changes nothing but wall time.  Statistics are accumulated as
integer power sums and finished in exact rational arithmetic.
"""

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _rng
from ._backend import kernels
from .errors import EmptyVectorError, InvalidArgumentError
from .estimators import exact_pair_stats
from .permute import SCHEME_CODE, BinaryVector, Hasher, Scheme, generate_permutation
from .theory import LocationVector, Loc

log = logging.getLogger(__name__)


class Placement(enum.Enum):
    RANDOM = "random"
    STRUCTURED = "structured"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise InvalidArgumentError(f"unknown placement {name!r}") from None


@dataclass(frozen=True)
class SyntheticPairSpec:
    D: int
    f: int
    a: int
    placement: Placement = Placement.RANDOM
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "placement", Placement.parse(self.placement))
        if self.D < 1:
            raise InvalidArgumentError(f"D must be >= 1, got {self.D}")
        if not 0 <= self.a <= self.f <= self.D:
            raise InvalidArgumentError(f"need 0 <= a <= f <= D, got D={self.D}, f={self.f}, a={self.a}")
        if self.f == 0:
            raise InvalidArgumentError("f = 0 gives an undefined similarity")

    def location_vector(self):
        x = LocationVector.structured(self.D, self.f, self.a)
        if self.placement is Placement.STRUCTURED:
            return x
        perm = generate_permutation(self.D, self.seed, _rng.TAG_SYNTH)
        codes = np.empty(self.D, dtype=np.int8)
        codes[perm.forward - 1] = x.codes
        return LocationVector(codes)


def synth_pair(spec):
    """Two vectors with exactly (a, f) shared/union counts.

    The CROSS coordinates are split in order: the first ceil((f-a)/2) go to
    ``v`` alone, the rest to ``w`` alone.
    """
    x = spec.location_vector()
    n_cross = spec.f - spec.a
    v_only = (n_cross + 1) // 2
    v_idx, w_idx = [], []
    seen_cross = 0
    # walk in the structured order so the split does not depend on placement
    order = np.argsort(_structured_rank(spec), kind="stable")
    for i0 in order:
        code = x.codes[i0]
        if code == Loc.O:
            v_idx.append(i0 + 1)
            w_idx.append(i0 + 1)
        elif code == Loc.CROSS:
            (v_idx if seen_cross < v_only else w_idx).append(i0 + 1)
            seen_cross += 1
    return BinaryVector(spec.D, v_idx), BinaryVector(spec.D, w_idx)


def _structured_rank(spec):
    if spec.placement is Placement.STRUCTURED:
        return np.arange(spec.D)
    perm = generate_permutation(spec.D, spec.seed, _rng.TAG_SYNTH)
    rank = np.empty(spec.D, dtype=np.int64)
    rank[perm.forward - 1] = np.arange(spec.D)
    return rank


def synth_dataset(n, D, density_lo=0.02, density_hi=0.5, seed=0):
    """``n`` nonempty vectors drawn around a few random base sets.

    Cluster members share a noisy subset of their base set, which spreads
    pairwise similarities over most of [0, 1] while densities vary between
    clusters.
    """
    if n < 1 or D < 1:
        raise InvalidArgumentError("need n >= 1 and D >= 1")
    if not 0 < density_lo <= density_hi <= 1:
        raise InvalidArgumentError("need 0 < density_lo <= density_hi <= 1")
    rs = _rng.KeyedStream(_rng.derive(int(seed), _rng.TAG_DATA))
    n_clusters = max(1, n // 6)
    bases = []
    for _ in range(n_clusters):
        rho = density_lo + (density_hi - density_lo) * rs.uniform()
        bases.append((rho, [i for i in range(1, D + 1) if rs.uniform() < rho]))
    out = []
    for _ in range(n):
        rho, base = bases[rs.below(n_clusters)]
        keep = 0.5 + 0.5 * rs.uniform()
        extra = rho * 0.5 * rs.uniform()
        members = {i for i in base if rs.uniform() < keep}
        members.update(i for i in range(1, D + 1) if rs.uniform() < extra)
        if not members:
            members.add(1 + rs.below(D))
        out.append(BinaryVector(D, members))
    return out


@dataclass(frozen=True)
class McMoments:
    """Integer collision statistics of one Monte Carlo run.

    ``hits[k-1]``: trials where hash k collided.  ``power_sums[m-1][K-1]``:
    sum over trials of c_K**m, c_K = collisions among the first K hashes.
    """

    scheme: Scheme
    trials: int
    hits: tuple
    power_sums: tuple

    @property
    def k_max(self):
        return len(self.hits)


@dataclass(frozen=True)
class McResultRow:
    K: int
    scheme: Scheme
    mean: float
    bias2: float
    variance: float
    mse: float
    trials: int
    stderr_mean: float


@dataclass(frozen=True)
class McPerKRow:
    k: int
    estimate: float
    stderr: float


@dataclass(frozen=True)
class MaeResultRow:
    K: int
    scheme: Scheme
    mae: float
    reps: int


def _check_run(v, w, k_max, scheme, trials):
    if v.dim != w.dim:
        raise InvalidArgumentError(f"dimensions differ: {v.dim} vs {w.dim}")
    if v.nnz == 0 or w.nnz == 0:
        raise EmptyVectorError("cannot hash a vector with no nonzeros")
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    if k_max < 1:
        raise InvalidArgumentError("K must be >= 1")
    if scheme.circulant and k_max > v.dim:
        raise InvalidArgumentError(f"K={k_max} exceeds D={v.dim} for a circulant scheme")


def _chunks(trials, threads):
    n = max(1, min(trials, 4 * max(1, threads)))
    edges = [trials * i // n for i in range(n + 1)]
    return [(edges[i], edges[i + 1]) for i in range(n) if edges[i] < edges[i + 1]]


def mc_moments(v, w, k_max, scheme, trials, seed, threads=1):
    scheme = Scheme.parse(scheme)
    _check_run(v, w, k_max, scheme, trials)
    v0 = v.nonzeros - 1
    w0 = w.nonzeros - 1
    code = SCHEME_CODE[scheme]
    seed = int(seed) & _rng.MASK

    def run(span):
        return kernels.mc_power_sums(v0, w0, v.dim, code, k_max, seed, span[0], span[1])

    spans = _chunks(trials, threads)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, spans))
    else:
        parts = [run(s) for s in spans]
    hits = sum(p[0] for p in parts)
    sums = sum(p[1] for p in parts)
    return McMoments(
        scheme, trials,
        tuple(int(h) for h in hits),
        tuple(tuple(int(s) for s in row) for row in sums),
    )


def _raw_moment(mom, K, m):
    return Fraction(mom.power_sums[m - 1][K - 1], mom.trials * K**m)


def moment_row(mom, K, J):
    """Finish the statistics for the first K hashes against exact J = a/f."""
    J = Fraction(J)
    m1 = _raw_moment(mom, K, 1)
    m2 = _raw_moment(mom, K, 2)
    variance = m2 - m1 * m1
    bias2 = (m1 - J) ** 2
    mse = variance + bias2
    return McResultRow(
        K, mom.scheme, float(m1), float(bias2), float(variance), float(mse), mom.trials,
        math.sqrt(float(variance) / mom.trials),
    )


def mse_stderr(mom, K, J):
    """Standard error of the empirical MSE, from the fourth-moment sums."""
    J = Fraction(J)
    T = mom.trials
    m = [Fraction(1)] + [_raw_moment(mom, K, p) for p in range(1, 5)]

    def central(power):
        # E[(J_hat - J)^power] from raw moments
        return sum(math.comb(power, p) * m[p] * (-J) ** (power - p) for p in range(power + 1))

    var_sq = central(4) - central(2) ** 2
    return math.sqrt(max(float(var_sq), 0.0) / T)


def mc_bias_mse(v, w, K_grid, scheme, trials, seed, threads=1):
    """Empirical mean, bias^2, variance and MSE of J_hat at each K.

    One pass draws K_max hashes per trial; the first K of them form the
    K-hash estimate, so every K shares the same permutations.
    """
    K_grid = sorted({int(K) for K in K_grid})
    if not K_grid:
        raise InvalidArgumentError("empty K grid")
    J = exact_pair_stats(v, w).J
    mom = mc_moments(v, w, K_grid[-1], scheme, trials, seed, threads)
    return [moment_row(mom, K, J) for K in K_grid]


def mc_per_k_curve(v, w, K, scheme, trials, seed, threads=1):
    mom = mc_moments(v, w, K, scheme, trials, seed, threads)
    rows = []
    for k in range(1, K + 1):
        p = mom.hits[k - 1] / trials
        rows.append(McPerKRow(k, p, math.sqrt(p * (1 - p) / trials)))
    return rows


def mc_per_k_collision(v, w, k, scheme, trials, seed, threads=1):
    """Empirical P(h_k(v) = h_k(w)) and its binomial standard error."""
    row = mc_per_k_curve(v, w, k, scheme, trials, seed, threads)[-1]
    return row.estimate, row.stderr


def mae_all_pairs(dataset, K_grid, schemes, reps, seed):
    """Mean absolute error of J_hat over all vector pairs, averaged over reps.

    Empty vectors cannot be hashed; they are dropped and the pairs they would
    have formed are reported in the log.
    """
    vectors = list(dataset)
    usable = [v for v in vectors if v.nnz > 0]
    dropped = len(vectors) - len(usable)
    if len(usable) < 2:
        raise InvalidArgumentError("need at least two nonempty vectors")
    if dropped:
        skipped = len(vectors) * (len(vectors) - 1) // 2 - len(usable) * (len(usable) - 1) // 2
        log.warning("dropped %d empty vectors (%d pairs skipped)", dropped, skipped)
    if reps < 1:
        raise InvalidArgumentError("reps must be >= 1")
    D = usable[0].dim
    if any(v.dim != D for v in usable):
        raise InvalidArgumentError("vectors have different dimensions")
    K_grid = sorted({int(K) for K in K_grid})
    k_max = K_grid[-1]
    schemes = [Scheme.parse(s) for s in schemes]

    dense = np.array([v.to_dense() for v in usable], dtype=np.int64)
    inter = dense @ dense.T
    sizes = dense.sum(axis=1)
    I, Jx = np.triu_indices(len(usable), k=1)
    J_true = inter[I, Jx] / (sizes[I] + sizes[Jx] - inter[I, Jx])
    K_idx = np.array(K_grid) - 1

    totals = {s: np.zeros(len(K_grid)) for s in schemes}
    for r in range(reps):
        rep_seed = _rng.derive(int(seed) & _rng.MASK, r)
        for s in schemes:
            hasher = Hasher(s, D, k_max, rep_seed)
            S = np.array([hasher.sketch(v).values for v in usable])
            c = np.cumsum(S[I] == S[Jx], axis=1)[:, K_idx]
            err = np.abs(c / np.array(K_grid) - J_true[:, None])
            totals[s] += err.mean(axis=0)
    return [
        MaeResultRow(K, s, float(totals[s][i] / reps), reps)
        for s in schemes for i, K in enumerate(K_grid)
    ]
