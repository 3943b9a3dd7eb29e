# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels.  Same contracts as ``_kernels_py``; integer results are
bit-identical, floating results agree to rounding."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, log, lgamma, INFINITY
from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free

from ._kernels_py import class_counts_array, z_domain  # noqa: F401  (shared, not hot)

cnp.import_array()

BACKEND = "cython"

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef uint64_t M1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t M2 = 0x94D049BB133111EBULL
cdef uint64_t TAG_PI = 1
cdef uint64_t TAG_SIGMA = 2
cdef uint64_t TAG_MINHASH = 0x100


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * M1
    z = (z ^ (z >> 27)) * M2
    return z ^ (z >> 31)


cdef inline uint64_t derive(uint64_t key, uint64_t x) noexcept nogil:
    return mix64(key ^ mix64(x + GAMMA))


cdef inline uint64_t draw(uint64_t key, uint64_t n) noexcept nogil:
    return mix64(key + (n + 1) * GAMMA)


cdef void shuffle(int64_t* fwd, int D, uint64_t key) noexcept nogil:
    cdef int i, n = 0
    cdef int64_t j, tmp
    for i in range(D):
        fwd[i] = i + 1
    i = D - 1
    while i > 0:
        j = <int64_t>(draw(key, n) % <uint64_t>(i + 1))
        tmp = fwd[i]
        fwd[i] = fwd[j]
        fwd[j] = tmp
        n += 1
        i -= 1


def shuffle_batch(int dim, keys):
    cdef const uint64_t[::1] k = np.ascontiguousarray(keys, dtype=np.uint64)
    out = np.empty((k.shape[0], dim), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    cdef Py_ssize_t r
    for r in range(k.shape[0]):
        shuffle(&o[r, 0], dim, k[r])
    return out


cdef inline int64_t circ_min(const int64_t* pos, int d, const int64_t* pi, int D, int k) noexcept nogil:
    # min over positions s of pi at ((s - k) mod D), all 0-based
    cdef int t
    cdef int64_t idx, h, best = D + 1
    for t in range(d):
        idx = pos[t] - k
        if idx < 0:
            idx += D
        h = pi[idx]
        if h < best:
            best = h
    return best


cdef void run_trials(const int64_t* v0, int dv, const int64_t* w0, int dw, int D,
                     int scheme, int kmax, uint64_t seed, int64_t t0, int64_t t1,
                     int64_t* hits, int64_t* sums) noexcept nogil:
    cdef int64_t* pi = <int64_t*>malloc(D * sizeof(int64_t))
    cdef int64_t* sigma = <int64_t*>malloc(D * sizeof(int64_t))
    cdef int64_t* pv = <int64_t*>malloc((dv + 1) * sizeof(int64_t))
    cdef int64_t* pw = <int64_t*>malloc((dw + 1) * sizeof(int64_t))
    cdef int64_t t, c, p, hv, hw
    cdef uint64_t tkey
    cdef int k, i, m
    for t in range(t0, t1):
        tkey = derive(seed, <uint64_t>t)
        c = 0
        if scheme == 0:
            for k in range(1, kmax + 1):
                shuffle(pi, D, derive(tkey, TAG_MINHASH + <uint64_t>k))
                hv = D + 1
                for i in range(dv):
                    if pi[v0[i]] < hv:
                        hv = pi[v0[i]]
                hw = D + 1
                for i in range(dw):
                    if pi[w0[i]] < hw:
                        hw = pi[w0[i]]
                if hv == hw:
                    hits[k - 1] += 1
                    c += 1
                p = c
                for m in range(4):
                    sums[m * kmax + k - 1] += p
                    p *= c
            continue
        shuffle(pi, D, derive(tkey, TAG_PI))
        if scheme == 1:
            shuffle(sigma, D, derive(tkey, TAG_SIGMA))
            for i in range(dv):
                pv[i] = sigma[v0[i]] - 1
            for i in range(dw):
                pw[i] = sigma[w0[i]] - 1
        elif scheme == 2:
            for i in range(dv):
                pv[i] = pi[v0[i]] - 1
            for i in range(dw):
                pw[i] = pi[w0[i]] - 1
        else:
            for i in range(dv):
                pv[i] = v0[i]
            for i in range(dw):
                pw[i] = w0[i]
        for k in range(1, kmax + 1):
            if circ_min(pv, dv, pi, D, k) == circ_min(pw, dw, pi, D, k):
                hits[k - 1] += 1
                c += 1
            p = c
            for m in range(4):
                sums[m * kmax + k - 1] += p
                p *= c
    free(pi)
    free(sigma)
    free(pv)
    free(pw)


def mc_power_sums(v0, w0, int dim, int scheme, int kmax, seed, int64_t trial_start, int64_t trial_stop):
    cdef const int64_t[::1] v = np.ascontiguousarray(v0, dtype=np.int64)
    cdef const int64_t[::1] w = np.ascontiguousarray(w0, dtype=np.int64)
    hits = np.zeros(kmax, dtype=np.int64)
    sums = np.zeros((4, kmax), dtype=np.int64)
    cdef int64_t[::1] h = hits
    cdef int64_t[:, ::1] s = sums
    cdef uint64_t sd = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef int dv = v.shape[0], dw = w.shape[0]
    cdef int64_t dummy = 0
    cdef const int64_t* vp = &v[0] if dv > 0 else &dummy
    cdef const int64_t* wp = &w[0] if dw > 0 else &dummy
    with nogil:
        run_trials(vp, dv, wp, dw, dim, scheme, kmax, sd, trial_start, trial_stop, &h[0], &s[0, 0])
    return hits, sums


def bruteforce_count(codes, int k):
    """Heap's algorithm over all D! permutations; counts k-th hash collisions."""
    cdef const signed char[::1] x = np.ascontiguousarray(codes, dtype=np.int8)
    cdef int D = x.shape[0]
    cdef int64_t perm[16]
    cdef int cnt[16]
    cdef int live[16]
    cdef int nlive = 0, i, t, best_t
    cdef int64_t idx, h, best, tmp
    cdef int64_t total = 0
    if D > 16:
        raise ValueError("dimension too large for brute force")
    for i in range(D):
        perm[i] = i
        cnt[i] = 0
        if x[i] != 2:
            live[nlive] = i
            nlive += 1
    if nlive == 0:
        return 0
    with nogil:
        i = 0
        while True:
            best = D + 1
            best_t = -1
            for t in range(nlive):
                idx = perm[live[t]] - k
                if idx < 0:
                    idx += D
                h = perm[idx]
                if h < best:
                    best = h
                    best_t = live[t]
            if x[best_t] == 0:
                total += 1
            # advance to the next permutation (Heap)
            while i < D and cnt[i] >= i:
                cnt[i] = 0
                i += 1
            if i >= D:
                break
            if i % 2 == 0:
                tmp = perm[0]; perm[0] = perm[i]; perm[i] = tmp
            else:
                tmp = perm[cnt[i]]; perm[cnt[i]] = perm[i]; perm[i] = tmp
            cnt[i] += 1
            i = 0
    return total


cdef inline double ratio(double num, double den) noexcept nogil:
    if den == 0:
        return 0.0
    return num / den


cdef inline double lbinom(const double* lf, int64_t n, int64_t r) noexcept nogil:
    if n < 0 or r < 0 or r > n:
        return -INFINITY
    return lf[n] - lf[r] - lf[n - r]


def expectation_partials(codes, int k, int a, int f):
    cdef const int64_t[::1] x = np.ascontiguousarray(codes, dtype=np.int64)
    cdef int D = x.shape[0]
    cdef int draws = D - f
    lf_arr = np.array([lgamma(n + 1.0) for n in range(D + 1)], dtype=np.float64)
    cdef double[::1] lf = lf_arr
    out = np.zeros(D, dtype=np.float64)
    cdef double[::1] o = out
    cdef int64_t nm[3]
    cdef int64_t npl[3]
    cdef int64_t zm[3]
    cdef int64_t zp[3]
    cdef double rm[3]
    cdef double jbar[3]
    cdef double log_total = lf[D] - lf[draws] - lf[f]
    cdef int j, i, c, q, istar
    cdef int64_t b0, r1, r2, r3, s, L, z0, z1, z2, z3, z4
    cdef double log_pj, log_den, log12, log3, jstar, rmc, g, A12, A3, term
    cdef double acc, comp, tt
    for j in range(1, D + 1):
        for q in range(3):
            nm[q] = 0
            npl[q] = 0
        for i in range(1, D + 1):
            istar = (i + k - 1) % D + 1
            if istar <= j:
                nm[x[i - 1]] += 1
            else:
                npl[x[i - 1]] += 1
        c = <int>x[((j - k - 1) % D + D) % D]
        acc = 0.0
        comp = 0.0
        with nogil:
            for z0 in range(nm[0] + 1):
                for z1 in range(nm[1] + 1):
                    for z2 in range(nm[2] + 1):
                        for z3 in range(npl[0] + 1):
                            for z4 in range(npl[1] + 1):
                                zm[0] = z0; zm[1] = z1; zm[2] = z2; zp[0] = z3; zp[1] = z4
                                zp[2] = draws - zm[0] - zm[1] - zm[2] - zp[0] - zp[1]
                                if zp[2] < 0 or zp[2] > npl[2]:
                                    continue
                                log_pj = -log_total
                                for q in range(3):
                                    log_pj += lbinom(&lf[0], nm[q], zm[q]) + lbinom(&lf[0], npl[q], zp[q])
                                b0 = zp[0] + zp[1] + zp[2]
                                r1 = a - zm[0] - zp[0]
                                r2 = f - a - zm[1] - zp[1]
                                r3 = draws - zm[2] - zp[2]
                                s = r1 + r2
                                L = D - j - b0
                                log_den = lbinom(&lf[0], draws, r3) + lbinom(&lf[0], f, s)
                                if s >= 1:
                                    log12 = lbinom(&lf[0], b0, r3) + lbinom(&lf[0], L, s - 1) - log(<double>s) - log_den
                                else:
                                    log12 = -INFINITY
                                if r3 >= 1:
                                    log3 = lbinom(&lf[0], b0, r3 - 1) + lbinom(&lf[0], L, s) - log(<double>r3) - log_den
                                else:
                                    log3 = -INFINITY
                                jstar = ratio(a - r1, f - s)
                                for q in range(3):
                                    jbar[q] = ratio(r1 - (q == 0), L) + (1.0 - ratio(s - (q != 2), L)) * jstar
                                    rm[q] = ratio(zm[q], nm[q])
                                rmc = rm[c]
                                A12 = 0.0
                                for q in range(2):
                                    A12 += (npl[q] - zp[q]) * (1.0 - rmc) * jbar[q]
                                    if c == q:
                                        g = (1.0 - rm[q]) * (1.0 - ratio(zm[q], nm[q] - 1))
                                    else:
                                        g = (1.0 - rm[q]) * (1.0 - rmc)
                                    A12 += (nm[q] - (c == q)) * g * jstar
                                if c == 0:
                                    A12 += 1.0 - rm[0]
                                A3 = (npl[2] - zp[2]) * rmc * jbar[2]
                                if c == 2:
                                    g = rm[2] * (1.0 - ratio(zm[2] - 1, nm[2] - 1))
                                else:
                                    g = (1.0 - rm[2]) * rmc
                                A3 += (nm[2] - (c == 2)) * g * jstar
                                term = 0.0
                                if log12 > -INFINITY:
                                    term += exp(log_pj + log12) * A12
                                if log3 > -INFINITY:
                                    term += exp(log_pj + log3) * A3
                                # Neumaier compensated summation
                                tt = acc + term
                                if fabs(acc) >= fabs(term):
                                    comp += (acc - tt) + term
                                else:
                                    comp += (term - tt) + acc
                                acc = tt
        o[j - 1] = acc + comp
    return out
