from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from cminhash.estimators import estimate_jaccard, exact_pair_stats
from cminhash.io import format_sparse_dataset, parse_sparse_dataset
from cminhash.permute import (
    BinaryVector,
    Hasher,
    Scheme,
    circulant_index,
    circulant_index_inverse,
)
from cminhash.theory import (
    LocationVector,
    bruteforce_collision_expectation_k,
    class_counts,
    collision_expectation_k,
    enumerate_z_domain,
    hypergeom_pmf,
)


@st.composite
def vector_pairs(draw, max_dim=40):
    D = draw(st.integers(1, max_dim))
    idx = st.sets(st.integers(1, D), min_size=1, max_size=D)
    return BinaryVector(D, draw(idx)), BinaryVector(D, draw(idx))


schemes = st.sampled_from(list(Scheme))


class TestProperties:
    @given(st.integers(1, 50), st.data())
    def test_circulant_roundtrip(self, D, data):
        i = data.draw(st.integers(1, D))
        k = data.draw(st.integers(1, D))
        j = circulant_index(i, k, D)
        assert 1 <= j <= D
        assert circulant_index_inverse(j, k, D) == i

    @given(vector_pairs(), schemes, st.integers(0, 2**64 - 1), st.data())
    def test_estimate_symmetric_and_bounded(self, pair, scheme, seed, data):
        v, w = pair
        K = data.draw(st.integers(1, v.dim if scheme.circulant else 60))
        h = Hasher(scheme, v.dim, K, seed)
        sv, sw = h.sketch(v), h.sketch(w)
        assert np.all((sv.values >= 1) & (sv.values <= v.dim))
        est = estimate_jaccard(sv, sw)
        assert est == estimate_jaccard(sw, sv)
        assert 0.0 <= est <= 1.0
        if v == w:
            assert est == 1.0
        if exact_pair_stats(v, w).a == 0:
            assert est == 0.0

    @given(vector_pairs())
    def test_pair_stats(self, pair):
        v, w = pair
        st_vw = exact_pair_stats(v, w)
        assert st_vw == exact_pair_stats(w, v)
        assert 0 <= st_vw.a <= st_vw.f <= v.dim
        assert st_vw.J == Fraction(len(set(v.nonzeros) & set(w.nonzeros)), len(set(v.nonzeros) | set(w.nonzeros)))

    @given(st.integers(1, 30).flatmap(
        lambda D: st.tuples(st.just(D), st.lists(st.sets(st.integers(1, D)), max_size=8))))
    def test_dataset_roundtrip(self, case):
        D, sets = case
        vecs = [BinaryVector(D, s) for s in sets]
        assert list(parse_sparse_dataset(format_sparse_dataset(vecs, D))) == vecs

    @given(st.lists(st.integers(0, 4), min_size=6, max_size=6), st.data())
    def test_pmf_normalised(self, caps, data):
        draws = data.draw(st.integers(0, sum(caps)))
        assert sum(hypergeom_pmf(caps, Z, draws) for Z in enumerate_z_domain(caps, draws)) == 1

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(0, 2), min_size=2, max_size=6), st.data())
    def test_theory_equals_oracle(self, codes, data):
        x = LocationVector(codes)
        if x.f == 0:
            return
        k = data.draw(st.integers(1, x.dim))
        assert collision_expectation_k(x, k, exact=True) == bruteforce_collision_expectation_k(x, k)

    @given(st.lists(st.integers(0, 2), min_size=1, max_size=25), st.data())
    def test_class_counts_partition(self, codes, data):
        x = LocationVector(codes)
        j = data.draw(st.integers(1, x.dim))
        k = data.draw(st.integers(1, x.dim))
        c = class_counts(x, j, k)
        assert sum(c.n_minus) == j
        for q in range(3):
            assert c.n_minus[q] + c.n_plus[q] == int((x.codes == q).sum())
