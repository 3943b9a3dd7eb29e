"""Binary vectors, permutations and the four hashing schemes.

Indices are 1-based everywhere in the public API, matching the usual
mathematical notation.  Arrays are stored 0-based; :func:`_zero_based` is the
only place that converts.
"""

import enum
import hashlib
from dataclasses import dataclass

import numpy as np

from . import _rng
from .errors import (
    DimensionMismatchError,
    EmptyVectorError,
    InvalidArgumentError,
    InvalidDimensionError,
)


def _readonly(arr):
    arr.setflags(write=False)
    return arr


def _zero_based(indices):
    return np.asarray(indices, dtype=np.int64) - 1


class BinaryVector:
    """Sparse 0/1 vector: a dimension and the sorted set of nonzero indices."""

    __slots__ = ("dim", "nonzeros")

    def __init__(self, dim, nonzeros=()):
        dim = int(dim)
        if dim < 1:
            raise InvalidDimensionError(f"dimension must be >= 1, got {dim}")
        nz = np.array(sorted(int(i) for i in nonzeros), dtype=np.int64)
        if nz.size:
            if nz[0] < 1 or nz[-1] > dim:
                raise InvalidArgumentError(f"indices must lie in [1, {dim}]")
            if np.any(np.diff(nz) == 0):
                raise InvalidArgumentError("duplicate nonzero index")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "nonzeros", _readonly(nz))

    def __setattr__(self, name, value):
        raise AttributeError("BinaryVector is immutable")

    @classmethod
    def from_dense(cls, bits):
        bits = np.asarray(bits)
        return cls(bits.size, (np.flatnonzero(bits) + 1).tolist())

    @property
    def nnz(self):
        return int(self.nonzeros.size)

    def to_dense(self):
        out = np.zeros(self.dim, dtype=np.int8)
        out[_zero_based(self.nonzeros)] = 1
        return out

    def __len__(self):
        return self.nnz

    def __eq__(self, other):
        if not isinstance(other, BinaryVector):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.nonzeros, other.nonzeros)

    def __hash__(self):
        return hash((self.dim, self.nonzeros.tobytes()))

    def __repr__(self):
        return f"BinaryVector(dim={self.dim}, nonzeros={self.nonzeros.tolist()})"


class Permutation:
    """Bijection on {1..D} with forward and inverse lookup tables."""

    __slots__ = ("dim", "forward", "inverse", "seed")

    def __init__(self, forward, seed=None):
        fwd = np.array(forward, dtype=np.int64)
        dim = fwd.size
        if dim < 1:
            raise InvalidDimensionError("permutation of an empty set")
        if not np.array_equal(np.sort(fwd), np.arange(1, dim + 1)):
            raise InvalidArgumentError("forward is not a bijection on 1..D")
        inv = np.empty(dim, dtype=np.int64)
        inv[fwd - 1] = np.arange(1, dim + 1)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "forward", _readonly(fwd))
        object.__setattr__(self, "inverse", _readonly(inv))
        object.__setattr__(self, "seed", seed)

    def __setattr__(self, name, value):
        raise AttributeError("Permutation is immutable")

    @classmethod
    def identity(cls, dim):
        return cls(np.arange(1, int(dim) + 1))

    def __call__(self, i):
        return int(self.forward[i - 1])

    def inv(self, j):
        return int(self.inverse[j - 1])

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return np.array_equal(self.forward, other.forward)

    def __hash__(self):
        return hash(self.forward.tobytes())

    def __repr__(self):
        return f"Permutation({self.forward.tolist()})"


class Scheme(enum.Enum):
    MINHASH = "minhash"
    SIGMA_PI = "sigma_pi"
    PI_PI = "pi_pi"
    ZERO_PI = "zero_pi"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            choices = ", ".join(s.value for s in cls)
            raise InvalidArgumentError(f"unknown scheme {name!r} (choose from {choices})") from None

    @property
    def circulant(self):
        return self is not Scheme.MINHASH


# kernels index schemes by these codes
SCHEME_CODE = {Scheme.MINHASH: 0, Scheme.SIGMA_PI: 1, Scheme.PI_PI: 2, Scheme.ZERO_PI: 3}


@dataclass(frozen=True, eq=False)
class Sketch:
    scheme: Scheme
    K: int
    values: np.ndarray
    seed: int
    dim: int

    def __post_init__(self):
        if len(self.values) != self.K:
            raise InvalidArgumentError("sketch length does not match K")

    def to_bytes(self):
        head = f"{self.scheme.value}:{self.K}:{self.seed}:{self.dim}:".encode()
        return head + np.asarray(self.values, dtype="<i8").tobytes()

    def __eq__(self, other):
        if not isinstance(other, Sketch):
            return NotImplemented
        return self.to_bytes() == other.to_bytes()

    def __hash__(self):
        return hash(self.to_bytes())


def generate_permutation(dim, seed, tag=_rng.TAG_PI):
    """Seeded uniform permutation of {1..dim}.

    The Fisher-Yates swaps read the counter-based stream keyed by
    ``(seed, tag)``, so different tags give independent permutations from
    one master seed.
    """
    dim = int(dim)
    if dim < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {dim}")
    key = _rng.derive(int(seed), tag)
    return Permutation(_rng.shuffle_forward(dim, key), seed=int(seed) & _rng.MASK)


def _check_shift(i, k, D):
    if D < 1:
        raise InvalidDimensionError(f"dimension must be >= 1, got {D}")
    if not 1 <= i <= D:
        raise InvalidArgumentError(f"index {i} outside [1, {D}]")
    if not 1 <= k <= D:
        raise InvalidArgumentError(f"shift {k} outside [1, {D}]")


def circulant_index(i, k, D):
    """i* = ((i + k - 1) mod D) + 1."""
    _check_shift(i, k, D)
    return (i + k - 1) % D + 1


def circulant_index_inverse(i, k, D):
    """i# = ((i - k - 1) mod D) + 1, the inverse of :func:`circulant_index`."""
    _check_shift(i, k, D)
    return (i - k - 1) % D + 1


def _lineage(perms):
    h = hashlib.blake2b(digest_size=8)
    for p in perms:
        h.update(p.forward.tobytes())
        h.update(b"|")
    return int.from_bytes(h.digest(), "little")


def _require_nonempty(v):
    if v.nnz == 0:
        raise EmptyVectorError("cannot hash a vector with no nonzeros")


def _circulant_values(positions, pi, K):
    # rotating pi right by k: position s reads pi at s# = ((s - k - 1) mod D) + 1
    D = pi.dim
    s0 = _zero_based(positions)
    shifts = np.arange(1, K + 1, dtype=np.int64)[:, None]
    idx = (s0[None, :] - shifts) % D
    return pi.forward[idx].min(axis=1)


def minhash_classic(v, perms, seed=None):
    """Classical MinHash: the k-th value is the min of perms[k] over the support."""
    _require_nonempty(v)
    perms = list(perms)
    if not perms:
        raise InvalidArgumentError("need at least one permutation")
    for p in perms:
        if p.dim != v.dim:
            raise DimensionMismatchError(f"permutation dim {p.dim} != vector dim {v.dim}")
    nz0 = _zero_based(v.nonzeros)
    values = np.array([p.forward[nz0].min() for p in perms], dtype=np.int64)
    return Sketch(
        Scheme.MINHASH, len(perms), _readonly(values),
        _lineage(perms) if seed is None else seed, v.dim,
    )


def _circulant(v, sigma, pi, K, scheme, lineage, seed):
    _require_nonempty(v)
    K = int(K)
    for p in (sigma, pi):
        if p is not None and p.dim != v.dim:
            raise DimensionMismatchError(f"permutation dim {p.dim} != vector dim {v.dim}")
    if not 1 <= K <= v.dim:
        raise InvalidArgumentError(f"K must lie in [1, D={v.dim}] for circulant schemes, got {K}")
    positions = v.nonzeros if sigma is None else sigma.forward[_zero_based(v.nonzeros)]
    values = _circulant_values(positions, pi, K)
    return Sketch(scheme, K, _readonly(values), _lineage(lineage) if seed is None else seed, v.dim)


def cminhash_sigma_pi(v, sigma, pi, K, seed=None):
    """C-MinHash-(sigma, pi): shuffle by sigma, then K circulant shifts of pi."""
    return _circulant(v, sigma, pi, K, Scheme.SIGMA_PI, (sigma, pi), seed)


def cminhash_pi_pi(v, pi, K, seed=None):
    """C-MinHash-(pi, pi): pi is both the initial shuffle and the hash source."""
    return _circulant(v, pi, pi, K, Scheme.PI_PI, (pi,), seed)


def cminhash_zero_pi(v, pi, K, seed=None):
    """C-MinHash-(0, pi): no initial shuffle."""
    return _circulant(v, None, pi, K, Scheme.ZERO_PI, (pi,), seed)


class Hasher:
    """Sketches vectors under one scheme with permutations drawn from ``seed``.

    Sketches produced by the same Hasher configuration are mutually
    compatible and carry ``seed`` as their lineage.
    """

    def __init__(self, scheme, dim, K, seed):
        self.scheme = Scheme.parse(scheme)
        self.dim = int(dim)
        self.K = int(K)
        self.seed = int(seed) & _rng.MASK
        if self.K < 1:
            raise InvalidArgumentError("K must be >= 1")
        if self.scheme.circulant and self.K > self.dim:
            raise InvalidArgumentError(f"K must lie in [1, D={self.dim}] for circulant schemes")
        if self.scheme is Scheme.MINHASH:
            self.perms = [
                generate_permutation(self.dim, self.seed, _rng.TAG_MINHASH + k)
                for k in range(1, self.K + 1)
            ]
        else:
            self.pi = generate_permutation(self.dim, self.seed, _rng.TAG_PI)
            if self.scheme is Scheme.SIGMA_PI:
                self.sigma = generate_permutation(self.dim, self.seed, _rng.TAG_SIGMA)

    def sketch(self, v):
        if v.dim != self.dim:
            raise DimensionMismatchError(f"vector dim {v.dim} != hasher dim {self.dim}")
        if self.scheme is Scheme.MINHASH:
            return minhash_classic(v, self.perms, seed=self.seed)
        if self.scheme is Scheme.SIGMA_PI:
            return cminhash_sigma_pi(v, self.sigma, self.pi, self.K, seed=self.seed)
        if self.scheme is Scheme.PI_PI:
            return cminhash_pi_pi(v, self.pi, self.K, seed=self.seed)
        return cminhash_zero_pi(v, self.pi, self.K, seed=self.seed)
