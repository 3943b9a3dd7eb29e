"""Counter-based 64-bit generator (SplitMix64 finaliser) and Fisher-Yates.

Every random quantity in the package is a pure function of a 64-bit key and
a counter, so any stream can be regenerated independently of the others.
The compiled kernels implement the exact same arithmetic; the two must stay
bit-identical.
"""

import numpy as np

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15

# purpose tags
TAG_PI = 1
TAG_SIGMA = 2
TAG_SYNTH = 3
TAG_DATA = 4
TAG_MINHASH = 0x100  # + k for the k-th classical permutation

_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z):
    z &= MASK
    z = ((z ^ (z >> 30)) * _M1) & MASK
    z = ((z ^ (z >> 27)) * _M2) & MASK
    return z ^ (z >> 31)


def derive(key, x):
    """Child key for sub-stream ``x`` of ``key``."""
    return mix64((key & MASK) ^ mix64(x + GAMMA))


def draw(key, n):
    """The ``n``-th 64-bit output of stream ``key``."""
    return mix64(key + (n + 1) * GAMMA)


def shuffle_forward(dim, key):
    """Uniform permutation of 1..dim as a 0-based int64 array of 1-based values."""
    fwd = np.arange(1, dim + 1, dtype=np.int64)
    for n, i in enumerate(range(dim - 1, 0, -1)):
        j = draw(key, n) % (i + 1)
        fwd[i], fwd[j] = fwd[j], fwd[i]
    return fwd


# vectorised mirrors, operating on uint64 arrays

_M1_U = np.uint64(_M1)
_M2_U = np.uint64(_M2)
_GAMMA_U = np.uint64(GAMMA)


def mix64_array(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1_U
        z = (z ^ (z >> np.uint64(27))) * _M2_U
    return z ^ (z >> np.uint64(31))


def derive_array(keys, x):
    keys = np.asarray(keys, dtype=np.uint64)
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64_array(keys ^ mix64_array(x + _GAMMA_U))


def draw_array(keys, n):
    keys = np.asarray(keys, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64_array(keys + np.uint64(n + 1) * _GAMMA_U)


def shuffle_forward_batch(dim, keys):
    """Row ``r`` equals ``shuffle_forward(dim, keys[r])``."""
    keys = np.asarray(keys, dtype=np.uint64)
    rows = np.arange(keys.shape[0])
    fwd = np.tile(np.arange(1, dim + 1, dtype=np.int64), (keys.shape[0], 1))
    for n, i in enumerate(range(dim - 1, 0, -1)):
        j = (draw_array(keys, n) % np.uint64(i + 1)).astype(np.int64)
        tmp = fwd[rows, i].copy()
        fwd[rows, i] = fwd[rows, j]
        fwd[rows, j] = tmp
    return fwd


class KeyedStream:
    """Sequential reader over one keyed stream, for data synthesis."""

    def __init__(self, key):
        self.key = key & MASK
        self.n = 0

    def next_u64(self):
        out = draw(self.key, self.n)
        self.n += 1
        return out

    def below(self, bound):
        return self.next_u64() % bound

    def uniform(self):
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))
