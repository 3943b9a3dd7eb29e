"""Exact expectation of the C-MinHash-(pi, pi) collision indicators.

For a pair of vectors summarised by its location vector ``x`` (one of
O / CROSS / DASH per coordinate) and a shift ``k``, the probability that the
k-th hashes collide is a double sum over a threshold ``j`` and a
hypergeometric vector ``Z`` of draw counts (how many dash-sourced slots fall
in each class on each side of the threshold).  Two evaluation paths exist:

* float: log-space binomials, one kernel call per ``k`` (compiled when
  available);
* exact: :class:`fractions.Fraction` arithmetic through
  :class:`Theorem2Workspace`, practical for D up to a few dozen.

:func:`bruteforce_collision_expectation_k` enumerates all D! permutations
and runs the hashing algorithm itself; it is the reference both paths are
tested against.
"""

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._backend import kernels
from .errors import (
    BudgetExceededError,
    DimensionMismatchError,
    InvalidArgumentError,
    UndefinedSimilarityError,
)

DEFAULT_BUDGET = 10**8
ORACLE_MAX_DIM = 10


class Loc(enum.IntEnum):
    O = 0
    CROSS = 1
    DASH = 2


_SYMBOLS = {"O": Loc.O, "o": Loc.O, "x": Loc.CROSS, "X": Loc.CROSS, "×": Loc.CROSS, "-": Loc.DASH}
_RENDER = {Loc.O: "O", Loc.CROSS: "x", Loc.DASH: "-"}


class LocationVector:
    """Per-coordinate class of a vector pair: O (both 1), CROSS (one), DASH (neither)."""

    __slots__ = ("codes",)

    def __init__(self, codes):
        arr = np.array(codes, dtype=np.int8)
        if arr.ndim != 1 or arr.size == 0:
            raise InvalidArgumentError("location vector must be a non-empty 1-d sequence")
        if arr.min() < 0 or arr.max() > 2:
            raise InvalidArgumentError("location codes must be 0 (O), 1 (CROSS) or 2 (DASH)")
        arr.setflags(write=False)
        object.__setattr__(self, "codes", arr)

    def __setattr__(self, name, value):
        raise AttributeError("LocationVector is immutable")

    @classmethod
    def from_string(cls, text):
        try:
            return cls([_SYMBOLS[ch] for ch in text])
        except KeyError as exc:
            raise InvalidArgumentError(f"unknown location symbol {exc.args[0]!r}") from None

    @classmethod
    def structured(cls, D, f, a):
        """a O's, then f-a CROSSes, then D-f DASHes."""
        _check_daf(D, f, a)
        return cls([Loc.O] * a + [Loc.CROSS] * (f - a) + [Loc.DASH] * (D - f))

    @property
    def dim(self):
        return int(self.codes.size)

    @property
    def classes(self):
        return tuple(Loc(int(c)) for c in self.codes)

    def members(self, q):
        """1-based indices of class ``q``."""
        return tuple((np.flatnonzero(self.codes == int(q)) + 1).tolist())

    B1 = property(lambda self: self.members(Loc.O))
    B2 = property(lambda self: self.members(Loc.CROSS))
    B3 = property(lambda self: self.members(Loc.DASH))

    @property
    def a(self):
        return int(np.count_nonzero(self.codes == Loc.O))

    @property
    def f(self):
        return int(np.count_nonzero(self.codes != Loc.DASH))

    @property
    def J(self):
        if self.f == 0:
            raise UndefinedSimilarityError("no O or CROSS coordinates")
        return Fraction(self.a, self.f)

    def __eq__(self, other):
        if not isinstance(other, LocationVector):
            return NotImplemented
        return np.array_equal(self.codes, other.codes)

    def __hash__(self):
        return hash(self.codes.tobytes())

    def __str__(self):
        return "".join(_RENDER[Loc(int(c))] for c in self.codes)

    def __repr__(self):
        return f"LocationVector({str(self)!r})"


def _check_daf(D, f, a):
    if D < 1:
        raise InvalidArgumentError(f"D must be >= 1, got {D}")
    if not 0 <= a <= f <= D:
        raise InvalidArgumentError(f"need 0 <= a <= f <= D, got D={D}, f={f}, a={a}")


def location_vector(v, w):
    if v.dim != w.dim:
        raise DimensionMismatchError(f"dimensions differ: {v.dim} vs {w.dim}")
    dv, dw = v.to_dense(), w.to_dense()
    both = dv + dw
    codes = np.where(both == 2, Loc.O, np.where(both == 1, Loc.CROSS, Loc.DASH))
    return LocationVector(codes)


@dataclass(frozen=True)
class CirculantCounts:
    """Class counts of ``x`` split by whether i* = circulant_index(i, k) is <= j."""

    j: int
    k: int
    n_minus: tuple
    n_plus: tuple

    @property
    def caps(self):
        return self.n_minus + self.n_plus

    @property
    def dim(self):
        return sum(self.caps)


def _check_jk(x, j, k):
    D = x.dim
    if not 1 <= j <= D:
        raise InvalidArgumentError(f"threshold j={j} outside [1, {D}]")
    if not 1 <= k <= D:
        raise InvalidArgumentError(f"shift k={k} outside [1, {D}]")


def class_counts(x, j, k):
    _check_jk(x, j, k)
    nm, npl = kernels.class_counts_array(x.codes.astype(np.int64), j, k)
    return CirculantCounts(j, k, tuple(int(n) for n in nm), tuple(int(n) for n in npl))


def _caps_of(counts):
    caps = counts.caps if isinstance(counts, CirculantCounts) else tuple(int(c) for c in counts)
    if len(caps) != 6:
        raise InvalidArgumentError("expected six class counts")
    if min(caps) < 0:
        raise InvalidArgumentError("class counts must be non-negative")
    return caps


def hypergeom_pmf(counts, Z, draws):
    """P(Z) for ``draws`` items drawn without replacement from six classes."""
    caps = _caps_of(counts)
    Z = tuple(int(z) for z in Z)
    if len(Z) != 6:
        raise InvalidArgumentError("Z must have six entries")
    if draws < 0 or min(Z) < 0:
        raise InvalidArgumentError("draw counts must be non-negative")
    N = sum(caps)
    if draws > N or sum(Z) != draws or any(z > n for z, n in zip(Z, caps)):
        return Fraction(0)
    num = 1
    for n, z in zip(caps, Z):
        num *= math.comb(n, z)
    return Fraction(num, math.comb(N, draws))


def enumerate_z_domain(counts, draws):
    """Yield every Z with 0 <= z_c <= n_c and sum ``draws``, in lexicographic order."""
    caps = _caps_of(counts)
    tail = [sum(caps[c:]) for c in range(6)] + [0]

    def rec(c, remaining, prefix):
        if c == 6:
            if remaining == 0:
                yield tuple(prefix)
            return
        lo = max(0, remaining - tail[c + 1])
        for z in range(lo, min(caps[c], remaining) + 1):
            prefix.append(z)
            yield from rec(c + 1, remaining - z, prefix)
            prefix.pop()

    yield from rec(0, draws, [])


def z_domain_size(counts, draws):
    """|Theta_j| without enumerating it."""
    poly = [1]
    for cap in _caps_of(counts):
        nxt = [0] * (len(poly) + cap)
        for i, c in enumerate(poly):
            if c:
                for z in range(cap + 1):
                    nxt[i + z] += c
        poly = nxt
    return poly[draws] if 0 <= draws < len(poly) else 0


def _binom(n, r):
    if n < 0 or r < 0 or r > n:
        return 0
    return math.comb(n, r)


def _ratio(num, den):
    # 0/0 guard: a zero class size forces the matching draw count to zero
    return Fraction(0) if den == 0 else Fraction(num, den)


@dataclass(frozen=True)
class Theorem2Workspace:
    """Every intermediate quantity for one (j, k, Z) term, in exact arithmetic."""

    counts: CirculantCounts
    a: int
    f: int
    z_minus: tuple
    z_plus: tuple
    b0: int
    r1: int
    r2: int
    r3: int
    Jstar: Fraction
    Ptilde: tuple
    Jbar: tuple
    indicator: tuple
    pmf: Fraction

    @property
    def D(self):
        return self.counts.dim


def theorem2_workspace(x, j, k, Z):
    counts = class_counts(x, j, k)
    a, f, D = x.a, x.f, x.dim
    Z = tuple(int(z) for z in Z)
    zm, zp = Z[:3], Z[3:]
    b0 = sum(zp)
    r1 = a - zm[0] - zp[0]
    r2 = f - a - zm[1] - zp[1]
    r3 = D - f - zm[2] - zp[2]
    s = r1 + r2
    L = D - j - b0
    den = _binom(D - f, r3) * _binom(f, s)
    if den and s >= 1:
        p12 = Fraction(_binom(b0, r3) * _binom(L, s - 1), s * den)
    else:
        p12 = Fraction(0)
    if den and r3 >= 1:
        p3 = Fraction(_binom(b0, r3 - 1) * _binom(L, s), r3 * den)
    else:
        p3 = Fraction(0)
    jstar = _ratio(a - r1, f - s)
    jbar = tuple(
        _ratio(r1 - (q == 0), L) + (1 - _ratio(s - (q != 2), L)) * jstar for q in range(3)
    )
    jhash = (j - k - 1) % D + 1
    cls = int(x.codes[jhash - 1])
    indicator = tuple(int(cls == q) for q in range(3))
    return Theorem2Workspace(
        counts, a, f, zm, zp, b0, r1, r2, r3, jstar, (p12, p12, p3), jbar, indicator,
        hypergeom_pmf(counts, Z, D - f),
    )


def psi(ws, q):
    """Psi_q(j): contribution of argmin coordinates of class q (0-based q).

    The sums over i in B_q are collapsed to counts: n_{+,q} coordinates have
    i* > j and n_{-,q} - 1{j# in B_q} have i* < j.
    """
    nm, npl = ws.counts.n_minus, ws.counts.n_plus
    zm, zp = ws.z_minus, ws.z_plus
    c = ws.indicator.index(1)
    rm = [_ratio(zm[p], nm[p]) for p in range(3)]
    # P(slot at j holds a non-dash), or a dash when the argmin itself is a dash
    at_j = rm[c] if q == 2 else 1 - rm[c]
    below = (npl[q] - zp[q]) * at_j * ws.Jbar[q]
    if q == 2:
        if c == 2:
            g = rm[2] * (1 - _ratio(zm[2] - 1, nm[2] - 1))
        else:
            g = (1 - rm[2]) * rm[c]
    elif c == q:
        g = (1 - rm[q]) * (1 - _ratio(zm[q], nm[q] - 1))
    else:
        g = (1 - rm[q]) * (1 - rm[c])
    above = (nm[q] - (c == q)) * g * ws.Jstar
    return (below + above) * ws.Ptilde[q]


def standalone_term(ws):
    """The i* = j case for an O argmin: its own slot is the colliding O."""
    if not ws.indicator[0]:
        return Fraction(0)
    return (1 - _ratio(ws.z_minus[0], ws.counts.n_minus[0])) * ws.Ptilde[0]


def term_count(x, k):
    """Number of (j, Z) terms evaluated for shift k."""
    draws = x.dim - x.f
    return sum(z_domain_size(class_counts(x, j, k), draws) for j in range(1, x.dim + 1))


def _check_x(x):
    if x.f == 0:
        raise UndefinedSimilarityError("location vector has no O or CROSS coordinates")


def _check_budget(count, budget):
    if budget is not None and count > budget:
        raise BudgetExceededError(
            f"evaluation needs {count} terms, budget is {budget}", count=count, budget=budget
        )


def _exact_expectation(x, k):
    total = Fraction(0)
    draws = x.dim - x.f
    for j in range(1, x.dim + 1):
        counts = class_counts(x, j, k)
        for Z in enumerate_z_domain(counts, draws):
            ws = theorem2_workspace(x, j, k, Z)
            bracket = psi(ws, 0) + psi(ws, 1) + psi(ws, 2) + standalone_term(ws)
            total += ws.pmf * bracket
    return total


def collision_partials(x, k):
    """Per-threshold partial sums (float path), index j-1."""
    return kernels.expectation_partials(x.codes.astype(np.int64), k, x.a, x.f)


def collision_expectation_k(x, k, exact=False, budget=DEFAULT_BUDGET):
    """P(h_k(v) = h_k(w)) under C-MinHash-(pi, pi), evaluated exactly.

    ``exact=True`` returns a Fraction; otherwise a float accumulated with
    compensated summation in fixed j order.
    """
    _check_x(x)
    if not 1 <= k <= x.dim:
        raise InvalidArgumentError(f"shift k={k} outside [1, {x.dim}]")
    _check_budget(term_count(x, k), budget)
    if exact:
        return _exact_expectation(x, k)
    # certain events: the rational path gives exactly 1 or 0 here, the float
    # path would land a few ulps off
    if x.a == x.f:
        return 1.0
    if x.a == 0:
        return 0.0
    value = math.fsum(collision_partials(x, k).tolist())
    # rounding can push a certain event a few ulps past 1
    return min(max(value, 0.0), 1.0)


def _check_K(x, K):
    if not 1 <= K <= x.dim:
        raise InvalidArgumentError(f"K={K} outside [1, D={x.dim}]")


def per_k_expectations(x, K, exact=False, budget=DEFAULT_BUDGET, threads=1):
    """[E 1{h_k(v)=h_k(w)} for k = 1..K]; shifts are evaluated in parallel."""
    _check_x(x)
    _check_K(x, K)
    _check_budget(sum(term_count(x, k) for k in range(1, K + 1)), budget)

    def one(k):
        return collision_expectation_k(x, k, exact=exact, budget=None)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(1, K + 1)))
    return [one(k) for k in range(1, K + 1)]


def estimator_mean(x, K, exact=False, budget=DEFAULT_BUDGET, threads=1):
    """E[J_hat] = average of the per-k collision expectations over k = 1..K."""
    vals = per_k_expectations(x, K, exact=exact, budget=budget, threads=threads)
    if exact:
        return sum(vals, Fraction(0)) / K
    return math.fsum(vals) / K


def bias_squared(x, K, exact=False, budget=DEFAULT_BUDGET, threads=1):
    mean = estimator_mean(x, K, exact=exact, budget=budget, threads=threads)
    if exact:
        return (mean - x.J) ** 2
    return (mean - x.a / x.f) ** 2


def bruteforce_collision_expectation_k(x, k):
    """Fraction of all D! permutations under which the k-th hashes collide.

    Runs the one-permutation hashing algorithm on every permutation, so it
    shares no algebra with :func:`collision_expectation_k`.
    """
    _check_x(x)
    if x.dim > ORACLE_MAX_DIM:
        raise BudgetExceededError(
            f"brute force over {x.dim}! permutations refused (limit D <= {ORACLE_MAX_DIM})",
            count=math.factorial(x.dim), budget=math.factorial(ORACLE_MAX_DIM),
        )
    if not 1 <= k <= x.dim:
        raise InvalidArgumentError(f"shift k={k} outside [1, {x.dim}]")
    hits = kernels.bruteforce_count(x.codes.astype(np.int8), k)
    return Fraction(hits, math.factorial(x.dim))


def bruteforce_estimator_mean(x, K):
    _check_K(x, K)
    return sum((bruteforce_collision_expectation_k(x, k) for k in range(1, K + 1)), Fraction(0)) / K
