"""Pure numpy implementations of the hot kernels.

Selected automatically when the compiled ``_kernels`` extension is missing.
Results must match the compiled kernels exactly for the integer kernels and
to rounding for :func:`expectation_partials`.
"""

import itertools
import math

import numpy as np

from . import _rng

BACKEND = "python"

_BATCH = 2048


def shuffle_batch(dim, keys):
    return _rng.shuffle_forward_batch(dim, keys)


def _trial_perms(dim, tkeys, scheme, kmax):
    """(pi, sigma, minhash) permutation blocks for a batch of trial keys."""
    if scheme == 0:
        n = tkeys.shape[0]
        tags = _rng.TAG_MINHASH + np.arange(1, kmax + 1, dtype=np.uint64)
        keys = _rng.derive_array(np.repeat(tkeys, kmax), np.tile(tags, n))
        return None, None, shuffle_batch(dim, keys).reshape(n, kmax, dim)
    pi = shuffle_batch(dim, _rng.derive_array(tkeys, _rng.TAG_PI))
    sigma = None
    if scheme == 1:
        sigma = shuffle_batch(dim, _rng.derive_array(tkeys, _rng.TAG_SIGMA))
    return pi, sigma, None


def _circulant_hashes(positions0, pi, kmax):
    # positions0: (B, d) 0-based positions in the shuffled vector
    D = pi.shape[1]
    rows = np.arange(pi.shape[0])[:, None]
    out = np.empty((pi.shape[0], kmax), dtype=np.int64)
    for k in range(1, kmax + 1):
        idx = positions0 - k
        idx[idx < 0] += D
        out[:, k - 1] = pi[rows, idx].min(axis=1)
    return out


def _batch_collisions(v0, w0, dim, scheme, kmax, tkeys):
    pi, sigma, mh = _trial_perms(dim, tkeys, scheme, kmax)
    if scheme == 0:
        hv = mh[:, :, v0].min(axis=2)
        hw = mh[:, :, w0].min(axis=2)
        return hv == hw
    n = tkeys.shape[0]
    if scheme == 1:
        pv, pw = sigma[:, v0] - 1, sigma[:, w0] - 1
    elif scheme == 2:
        pv, pw = pi[:, v0] - 1, pi[:, w0] - 1
    else:
        pv = np.broadcast_to(v0, (n, v0.size)).copy()
        pw = np.broadcast_to(w0, (n, w0.size)).copy()
    return _circulant_hashes(pv, pi, kmax) == _circulant_hashes(pw, pi, kmax)


def mc_power_sums(v0, w0, dim, scheme, kmax, seed, trial_start, trial_stop):
    """Collision statistics over trials ``[trial_start, trial_stop)``.

    Returns ``(hits, sums)``: ``hits[k-1]`` counts trials where hash k
    collided; ``sums[m-1, K-1]`` is the sum over trials of c_K**m, where c_K
    is the number of collisions among the first K hashes, for m = 1..4.
    """
    v0 = np.asarray(v0, dtype=np.int64)
    w0 = np.asarray(w0, dtype=np.int64)
    hits = np.zeros(kmax, dtype=np.int64)
    sums = np.zeros((4, kmax), dtype=np.int64)
    seed_u = np.uint64(seed & _rng.MASK)
    for start in range(trial_start, trial_stop, _BATCH):
        stop = min(start + _BATCH, trial_stop)
        tkeys = _rng.derive_array(np.full(stop - start, seed_u), np.arange(start, stop, dtype=np.uint64))
        coll = _batch_collisions(v0, w0, dim, scheme, kmax, tkeys)
        hits += coll.sum(axis=0)
        c = np.cumsum(coll, axis=1, dtype=np.int64)
        p = c.copy()
        for m in range(4):
            sums[m] += p.sum(axis=0)
            p *= c
    return hits, sums


def bruteforce_count(codes, k):
    """Number of permutations of {1..D} under which hash k collides (pi, pi scheme).

    ``codes`` holds the location classes (0 = both, 1 = one, 2 = neither).
    """
    codes = np.asarray(codes, dtype=np.int8)
    D = codes.size
    live = np.flatnonzero(codes != 2)
    if live.size == 0:
        return 0
    total = 0
    chunk = 50_000
    it = itertools.permutations(range(D))
    while True:
        block = np.array(list(itertools.islice(it, chunk)), dtype=np.int64)
        if block.size == 0:
            break
        rows = np.arange(block.shape[0])[:, None]
        idx = block[:, live] - k
        idx[idx < 0] += D
        h = block[rows, idx]
        winner = live[h.argmin(axis=1)]
        total += int(np.count_nonzero(codes[winner] == 0))
    return total


def z_domain(caps, draws):
    """All 6-tuples 0 <= z_c <= caps[c] with sum ``draws``, lexicographic order."""
    caps = [int(c) for c in caps]
    tail = [sum(caps[c:]) for c in range(len(caps))] + [0]
    rows = np.zeros((1, 0), dtype=np.int64)
    partial = np.zeros(1, dtype=np.int64)
    for c, cap in enumerate(caps):
        z = np.arange(cap + 1, dtype=np.int64)
        new_partial = (partial[:, None] + z[None, :]).ravel()
        keep = (new_partial <= draws) & (new_partial + tail[c + 1] >= draws)
        rows = np.hstack([np.repeat(rows, cap + 1, axis=0), np.tile(z, rows.shape[0])[:, None]])[keep]
        partial = new_partial[keep]
    return rows


def class_counts_array(codes, j, k):
    D = codes.size
    istar = (np.arange(1, D + 1) + k - 1) % D + 1
    minus = istar <= j
    nm = np.bincount(codes[minus], minlength=3)[:3]
    npl = np.bincount(codes[~minus], minlength=3)[:3]
    return nm.astype(np.int64), npl.astype(np.int64)


def _ratio(num, den):
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den != 0)
    return out


def _log_binom(lf, n, r):
    n = np.asarray(n, dtype=np.int64)
    r = np.asarray(r, dtype=np.int64)
    ok = (r >= 0) & (r <= n) & (n >= 0)
    nn = np.where(ok, n, 0)
    rr = np.where(ok, r, 0)
    return np.where(ok, lf[nn] - lf[rr] - lf[nn - rr], -np.inf), ok


def log_factorials(D):
    return np.array([math.lgamma(n + 1) for n in range(D + 1)], dtype=np.float64)


def expectation_partials(codes, k, a, f):
    """Per-threshold contributions to the k-th collision expectation.

    Entry ``j-1`` is the sum over the hypergeometric domain at threshold j.
    Each term's binomial ratios are combined in log space and exponentiated
    once per P-tilde factor.
    """
    codes = np.asarray(codes, dtype=np.int64)
    D = codes.size
    lf = log_factorials(D)
    draws = D - f
    log_total = lf[D] - lf[draws] - lf[f]
    out = np.zeros(D, dtype=np.float64)
    for j in range(1, D + 1):
        nm, npl = class_counts_array(codes, j, k)
        c = int(codes[(j - k - 1) % D])  # class of j#
        Z = z_domain(np.concatenate([nm, npl]), draws)
        if Z.shape[0] == 0:
            continue
        zm, zp = Z[:, :3], Z[:, 3:]
        log_pj = -log_total
        for col, cap in enumerate(np.concatenate([nm, npl])):
            log_pj = log_pj + _log_binom(lf, cap, Z[:, col])[0]
        b0 = zp.sum(axis=1)
        r1 = a - zm[:, 0] - zp[:, 0]
        r2 = f - a - zm[:, 1] - zp[:, 1]
        r3 = draws - zm[:, 2] - zp[:, 2]
        s = r1 + r2
        L = D - j - b0
        log_den = _log_binom(lf, draws, r3)[0] + _log_binom(lf, f, s)[0]

        lb, ok_b = _log_binom(lf, b0, r3)
        ll, ok_l = _log_binom(lf, L, s - 1)
        ok12 = ok_b & ok_l & (s >= 1)
        log12 = np.where(ok12, lb + ll - np.log(np.maximum(s, 1)) - log_den, -np.inf)
        lb, ok_b = _log_binom(lf, b0, r3 - 1)
        ll, ok_l = _log_binom(lf, L, s)
        ok3 = ok_b & ok_l & (r3 >= 1)
        log3 = np.where(ok3, lb + ll - np.log(np.maximum(r3, 1)) - log_den, -np.inf)

        jstar = _ratio(a - r1, f - s)
        jbar = [_ratio(r1 - (q == 0), L) + (1.0 - _ratio(s - (q != 2), L)) * jstar for q in range(3)]
        rm = [_ratio(zm[:, q], nm[q]) for q in range(3)]
        rm_c = rm[c]

        # brackets multiplying P-tilde_{1,2} and P-tilde_3
        A12 = np.zeros(Z.shape[0])
        for q in (0, 1):
            A12 += (npl[q] - zp[:, q]) * (1.0 - rm_c) * jbar[q]
            if c == q:
                g = (1.0 - rm[q]) * (1.0 - _ratio(zm[:, q], nm[q] - 1))
            else:
                g = (1.0 - rm[q]) * (1.0 - rm_c)
            A12 += (nm[q] - (c == q)) * g * jstar
        if c == 0:
            A12 += 1.0 - rm[0]
        A3 = (npl[2] - zp[:, 2]) * rm_c * jbar[2]
        if c == 2:
            g = rm[2] * (1.0 - _ratio(zm[:, 2] - 1, nm[2] - 1))
        else:
            g = (1.0 - rm[2]) * rm_c
        A3 = A3 + (nm[2] - (c == 2)) * g * jstar

        terms = np.exp(log_pj + log12) * A12 + np.exp(log_pj + log3) * A3
        out[j - 1] = math.fsum(terms.tolist())
    return out
