"""Exact pair statistics and the collision-fraction Jaccard estimator."""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DimensionMismatchError,
    IncompatibleSketchError,
    InvalidArgumentError,
    UndefinedSimilarityError,
)


@dataclass(frozen=True)
class PairStats:
    a: int
    f: int
    D: int

    @property
    def J(self):
        return Fraction(self.a, self.f)

    @property
    def jaccard(self):
        return self.a / self.f


def exact_pair_stats(v, w):
    """Intersection size ``a``, union size ``f`` and J = a/f of two supports."""
    if v.dim != w.dim:
        raise DimensionMismatchError(f"dimensions differ: {v.dim} vs {w.dim}")
    a = int(np.intersect1d(v.nonzeros, w.nonzeros, assume_unique=True).size)
    f = v.nnz + w.nnz - a
    if f == 0:
        raise UndefinedSimilarityError("both vectors are empty; Jaccard similarity undefined")
    return PairStats(a, f, v.dim)


def collision_indicators(sv, sw):
    _check_compatible(sv, sw)
    return np.asarray(sv.values) == np.asarray(sw.values)


def estimate_jaccard(sv, sw):
    """Fraction of sketch slots where the two hash values agree."""
    hits = collision_indicators(sv, sw)
    return int(hits.sum()) / sv.K


def _check_compatible(sv, sw):
    for field in ("scheme", "K", "dim", "seed"):
        if getattr(sv, field) != getattr(sw, field):
            raise IncompatibleSketchError(
                f"sketches differ in {field}: {getattr(sv, field)!r} vs {getattr(sw, field)!r}"
            )


def minhash_theoretical_variance(J, K):
    """J(1-J)/K, the variance of the classical MinHash estimator."""
    if not 0 <= J <= 1:
        raise InvalidArgumentError(f"J must lie in [0, 1], got {J}")
    if K < 1:
        raise InvalidArgumentError(f"K must be >= 1, got {K}")
    return J * (1 - J) / K
