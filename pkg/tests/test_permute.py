import itertools
import math

import numpy as np
import pytest

from cminhash import _rng
from cminhash.errors import (
    DimensionMismatchError,
    EmptyVectorError,
    InvalidArgumentError,
    InvalidDimensionError,
)
from cminhash.permute import (
    BinaryVector,
    Hasher,
    Permutation,
    Scheme,
    circulant_index,
    circulant_index_inverse,
    cminhash_pi_pi,
    cminhash_sigma_pi,
    cminhash_zero_pi,
    generate_permutation,
    minhash_classic,
)


def reference_circulant(v, sigma, pi, K):
    """Step-by-step loop version: shuffle, rotate pi right by k, take the min."""
    D = pi.dim
    ones = [sigma(i) if sigma is not None else i for i in v.nonzeros.tolist()]
    out = []
    for k in range(1, K + 1):
        rotated = [pi((s - k - 1) % D + 1) for s in range(1, D + 1)]
        out.append(min(rotated[s - 1] for s in ones))
    return out


class TestBinaryVector:
    def test_sorts_and_freezes(self):
        v = BinaryVector(5, [4, 1, 3])
        assert v.nonzeros.tolist() == [1, 3, 4]
        assert v.nnz == 3
        with pytest.raises(ValueError):
            v.nonzeros[0] = 2
        with pytest.raises(AttributeError):
            v.dim = 7

    def test_dense_roundtrip(self):
        v = BinaryVector(6, [2, 6])
        assert v.to_dense().tolist() == [0, 1, 0, 0, 0, 1]
        assert BinaryVector.from_dense(v.to_dense()) == v

    @pytest.mark.parametrize("bad", [[0], [6], [2, 2]])
    def test_rejects_bad_indices(self, bad):
        with pytest.raises(InvalidArgumentError):
            BinaryVector(5, bad)

    def test_rejects_zero_dim(self):
        with pytest.raises(InvalidDimensionError):
            BinaryVector(0, [])

    def test_hash_and_equality(self):
        assert hash(BinaryVector(4, [1, 2])) == hash(BinaryVector(4, [2, 1]))
        assert BinaryVector(4, [1]) != BinaryVector(5, [1])


class TestPermutation:
    def test_inverse(self):
        p = Permutation([3, 1, 4, 2])
        assert [p(i) for i in range(1, 5)] == [3, 1, 4, 2]
        assert all(p.inv(p(i)) == i for i in range(1, 5))

    def test_not_a_bijection(self):
        with pytest.raises(InvalidArgumentError):
            Permutation([1, 1, 3])

    def test_dim_one(self):
        for seed in (0, 5, 2**63):
            assert generate_permutation(1, seed).forward.tolist() == [1]

    def test_deterministic(self):
        a = generate_permutation(5, 7)
        b = generate_permutation(5, 7)
        assert a.forward.tobytes() == b.forward.tobytes()
        assert a.forward.tolist() == [3, 2, 5, 1, 4]

    def test_tags_give_different_streams(self):
        pi = generate_permutation(50, 3, _rng.TAG_PI)
        sigma = generate_permutation(50, 3, _rng.TAG_SIGMA)
        assert pi != sigma

    @pytest.mark.parametrize("dim", [2, 7, 64, 300])
    def test_bijection(self, dim):
        for seed in range(20):
            fwd = generate_permutation(dim, seed).forward
            assert np.array_equal(np.sort(fwd), np.arange(1, dim + 1))

    def test_batch_matches_scalar(self):
        seeds = np.arange(200, dtype=np.uint64)
        keys = _rng.derive_array(seeds, _rng.TAG_PI)
        batch = _rng.shuffle_forward_batch(9, keys)
        for s in range(0, 200, 17):
            assert batch[s].tolist() == generate_permutation(9, s).forward.tolist()

    def test_uniform_over_s5(self):
        # every one of the 120 permutations should show up ~1000 times
        n = 120_000
        keys = _rng.derive_array(np.arange(n, dtype=np.uint64), _rng.TAG_PI)
        perms = _rng.shuffle_forward_batch(5, keys)
        codes = (perms - 1) @ (5 ** np.arange(5))
        index = {sum((p[i] - 1) * 5**i for i in range(5)): r
                 for r, p in enumerate(itertools.permutations(range(1, 6)))}
        counts = np.bincount([index[c] for c in codes.tolist()], minlength=120)
        expected = n / 120
        sd = math.sqrt(n * (1 / 120) * (119 / 120))
        assert np.all(np.abs(counts - expected) <= 4 * sd)
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        # 119 dof: mean 119, sd ~15.4
        assert chi2 < 119 + 5 * math.sqrt(2 * 119)


class TestCirculantIndex:
    @pytest.mark.parametrize("i,k,expect", [(1, 1, 2), (8, 1, 1), (3, 8, 3)])
    def test_forward(self, i, k, expect):
        assert circulant_index(i, k, 8) == expect

    @pytest.mark.parametrize("i,k,expect", [(2, 1, 1), (1, 1, 8)])
    def test_inverse(self, i, k, expect):
        assert circulant_index_inverse(i, k, 8) == expect

    def test_roundtrip(self):
        for i in range(1, 9):
            for k in range(1, 9):
                assert circulant_index_inverse(circulant_index(i, k, 8), k, 8) == i
                assert circulant_index(circulant_index_inverse(i, k, 8), k, 8) == i

    @pytest.mark.parametrize("i,k", [(0, 1), (9, 1), (1, 0), (1, 9)])
    def test_range(self, i, k):
        with pytest.raises(InvalidArgumentError):
            circulant_index(i, k, 8)


class TestMinhashClassic:
    def test_direct_values(self):
        p = Permutation([3, 1, 4, 2])
        assert minhash_classic(BinaryVector(4, [2, 4]), [p]).values.tolist() == [1]
        assert minhash_classic(BinaryVector(4, [1, 3]), [p]).values.tolist() == [3]

    def test_all_ones(self):
        perms = [generate_permutation(10, s) for s in range(6)]
        sk = minhash_classic(BinaryVector(10, range(1, 11)), perms)
        assert sk.values.tolist() == [1] * 6
        assert sk.K == 6 and sk.scheme is Scheme.MINHASH

    def test_errors(self):
        p = generate_permutation(5, 0)
        with pytest.raises(EmptyVectorError):
            minhash_classic(BinaryVector(5, []), [p])
        with pytest.raises(DimensionMismatchError):
            minhash_classic(BinaryVector(4, [1]), [p])
        with pytest.raises(InvalidArgumentError):
            minhash_classic(BinaryVector(5, [1]), [])


class TestCirculantSchemes:
    def setup_method(self):
        self.sigma = generate_permutation(6, 11, _rng.TAG_SIGMA)
        self.pi = generate_permutation(6, 11, _rng.TAG_PI)
        self.v = BinaryVector(6, [2, 5])

    def test_seeded_inputs(self):
        assert self.sigma.forward.tolist() == [1, 4, 3, 5, 2, 6]
        assert self.pi.forward.tolist() == [3, 1, 5, 6, 2, 4]

    def test_golden_sigma_pi(self):
        sk = cminhash_sigma_pi(self.v, self.sigma, self.pi, 6)
        assert sk.values.tolist() == [3, 1, 2, 4, 2, 1]
        assert sk.values.tolist() == reference_circulant(self.v, self.sigma, self.pi, 6)

    def test_golden_pi_pi(self):
        sk = cminhash_pi_pi(self.v, self.pi, 6)
        assert sk.values.tolist() == [3, 2, 2, 5, 1, 1]
        assert sk.values.tolist() == reference_circulant(self.v, self.pi, self.pi, 6)

    def test_golden_zero_pi(self):
        sk = cminhash_zero_pi(self.v, self.pi, 6)
        assert sk.values.tolist() == [3, 4, 1, 3, 4, 1]
        assert sk.values.tolist() == reference_circulant(self.v, None, self.pi, 6)

    def test_identity_perms_are_pure_rotation(self):
        D = 7
        ident = Permutation.identity(D)
        sk = cminhash_sigma_pi(BinaryVector(D, [1]), ident, ident, D)
        # position 1 reads pi at 1#, so the value is the inverse shift of 1
        assert sk.values.tolist() == [circulant_index_inverse(1, k, D) for k in range(1, D + 1)]

    def test_small_worked_example(self):
        # some (sigma, pi) on a small D puts h_1 = 1 and h_2 = 3 on a two-nonzero vector
        v = BinaryVector(5, [1, 2])
        found = None
        for seed in range(500):
            s = generate_permutation(5, seed, _rng.TAG_SIGMA)
            p = generate_permutation(5, seed, _rng.TAG_PI)
            if cminhash_sigma_pi(v, s, p, 2).values.tolist() == [1, 3]:
                found = (s, p)
                break
        assert found is not None
        s, p = found
        assert reference_circulant(v, s, p, 2) == [1, 3]

    def test_scheme_coherence_exhaustive(self):
        # pi_pi is sigma_pi with sigma = pi; zero_pi is sigma_pi with sigma = identity
        D = 5
        ident = Permutation.identity(D)
        vectors = [BinaryVector(D, c) for r in (1, 2, 3) for c in itertools.combinations(range(1, D + 1), r)]
        for fwd in itertools.permutations(range(1, D + 1)):
            pi = Permutation(fwd)
            for v in vectors[::3]:
                pp = cminhash_pi_pi(v, pi, D).values
                assert np.array_equal(pp, cminhash_sigma_pi(v, pi, pi, D).values)
                zp = cminhash_zero_pi(v, pi, D).values
                assert np.array_equal(zp, cminhash_sigma_pi(v, ident, pi, D).values)

    def test_matches_reference_random(self):
        rs = np.random.default_rng(3)
        for trial in range(40):
            D = int(rs.integers(2, 30))
            v = BinaryVector(D, rs.choice(np.arange(1, D + 1), size=int(rs.integers(1, D + 1)), replace=False))
            s = generate_permutation(D, trial, _rng.TAG_SIGMA)
            p = generate_permutation(D, trial)
            K = int(rs.integers(1, D + 1))
            assert cminhash_sigma_pi(v, s, p, K).values.tolist() == reference_circulant(v, s, p, K)

    def test_zero_pi_differs_on_prefix(self):
        v = BinaryVector(16, range(1, 6))
        pi = generate_permutation(16, 4)
        assert not np.array_equal(cminhash_zero_pi(v, pi, 16).values, cminhash_pi_pi(v, pi, 16).values)

    def test_all_ones_hash_to_one(self):
        v = BinaryVector(9, range(1, 10))
        pi = generate_permutation(9, 2)
        assert cminhash_pi_pi(v, pi, 9).values.tolist() == [1] * 9

    def test_K_limits(self):
        with pytest.raises(InvalidArgumentError):
            cminhash_pi_pi(self.v, self.pi, 7)
        with pytest.raises(InvalidArgumentError):
            cminhash_pi_pi(self.v, self.pi, 0)
        with pytest.raises(EmptyVectorError):
            cminhash_pi_pi(BinaryVector(6, []), self.pi, 2)


class TestHasher:
    def test_seed_lineage(self):
        h = Hasher("pi_pi", 20, 8, 99)
        a = h.sketch(BinaryVector(20, [1, 5]))
        assert a.seed == 99
        assert a == Hasher(Scheme.PI_PI, 20, 8, 99).sketch(BinaryVector(20, [1, 5]))

    def test_prefix_property(self):
        # the first K hashes of a K_max sketch form the K-sketch
        v = BinaryVector(30, [3, 7, 20])
        for scheme in Scheme:
            full = Hasher(scheme, 30, 12, 5).sketch(v).values
            part = Hasher(scheme, 30, 4, 5).sketch(v).values
            assert np.array_equal(full[:4], part)

    def test_minhash_allows_K_above_D(self):
        assert Hasher("minhash", 4, 10, 0).sketch(BinaryVector(4, [2])).K == 10
        with pytest.raises(InvalidArgumentError):
            Hasher("sigma_pi", 4, 10, 0)

    def test_unknown_scheme(self):
        with pytest.raises(InvalidArgumentError):
            Scheme.parse("two_pi")
