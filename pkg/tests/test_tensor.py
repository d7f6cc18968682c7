import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpbt import (
    AVector,
    CpDecomposition,
    TmsVector,
    binomial_transform,
    inverse_binomial_transform,
    reconstruct,
    weighted_norm,
)
from cpbt.tensor import D_MAX, binomial_row

from fixtures import PLANTED_A, PLANTED_Y, SMALL_A, SMALL_ATOMS, SMALL_Y
from oracles import apply_each_mode, brute_norm, compress, dense_tensor, moments, rank_one

T = np.array([[1.0, 1.0], [0.0, 1.0]])


class TestBinomialTransform:
    def test_small_example(self):
        assert list(binomial_transform(SMALL_A)) == SMALL_Y

    def test_delta(self):
        assert list(binomial_transform(AVector([1, 0, 0, 0]))) == [1, 0, 0, 0]

    def test_planted_d6(self):
        assert list(binomial_transform(AVector(PLANTED_A[6]))) == PLANTED_Y[6]

    @pytest.mark.parametrize("d", [6, 7, 8, 9])
    def test_planted_all_orders(self, d):
        assert list(binomial_transform(AVector(PLANTED_A[d]))) == PLANTED_Y[d]

    def test_inverse_small(self):
        assert list(inverse_binomial_transform(TmsVector(SMALL_Y))) == [13, 5, 2, 1, 1]

    @pytest.mark.parametrize("d", [1, 4, 9])
    def test_inverse_delta(self, d):
        e0 = [1] + [0] * d
        assert list(inverse_binomial_transform(TmsVector(e0))) == e0

    @pytest.mark.parametrize("d", range(1, 7))
    def test_matches_dense_multilinear_product(self, d):
        rng = np.random.default_rng(d)
        for _ in range(5):
            p, q = rng.uniform(-2, 2, size=2)
            A = rank_one(p, q, d)
            expected = compress(apply_each_mode(A, T))
            got = binomial_transform(AVector(list(compress(A)))).to_numpy()
            assert np.allclose(got, expected, rtol=1e-12, atol=1e-12 * np.abs(expected).max())

    def test_exactness_flag(self):
        assert binomial_transform(AVector([1, 2, 3])).exact
        assert not binomial_transform(AVector([1.0, 2, 3])).exact

    @given(st.lists(st.integers(-10**6, 10**6), min_size=2, max_size=11))
    def test_round_trip_exact_integers(self, coords):
        a = AVector(coords)
        back = inverse_binomial_transform(binomial_transform(a))
        assert back == a

    @given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=21))
    def test_round_trip_floats(self, coords):
        a = AVector(coords)
        back = inverse_binomial_transform(binomial_transform(a)).to_numpy()
        ref = a.to_numpy()
        scale = max(np.abs(ref).max(), 1e-300)
        assert np.max(np.abs(back - ref)) <= 1e-12 * scale


class TestWeightedNorm:
    def test_identity_matrix(self):
        assert weighted_norm(AVector([1, 0, 1])) == pytest.approx(math.sqrt(2), rel=1e-15)

    def test_all_ones(self):
        assert weighted_norm(AVector([1, 1, 1, 1, 1])) == 4.0

    @given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=2, max_size=7))
    def test_brute_force(self, coords):
        ref = brute_norm(coords)
        got = weighted_norm(AVector(coords))
        assert got == pytest.approx(ref, rel=1e-12, abs=1e-300)


class TestReconstruct:
    def test_small_atoms_rounded(self):
        a = reconstruct(CpDecomposition(4, tuple(SMALL_ATOMS))).to_numpy()
        assert np.allclose(a, [13, 5, 2, 1, 1], atol=1e-2)

    def test_empty_is_zero(self):
        a = reconstruct(CpDecomposition(3))
        assert list(a) == [0, 0, 0, 0]

    def test_planted_d8_exact(self):
        dec = CpDecomposition(8, ((1, 0), (1, 2), (1, 1), (2, 1), (0, 1)))
        a = reconstruct(dec)
        assert a.exact
        assert list(a) == PLANTED_A[8]

    def test_matches_dense_sum(self):
        rng = np.random.default_rng(0)
        d = 5
        atoms = [tuple(rng.uniform(0, 2, size=2)) for _ in range(3)]
        dense = sum(rank_one(p, q, d) for p, q in atoms)
        got = reconstruct(CpDecomposition(d, tuple(atoms))).to_numpy()
        assert np.allclose(dense_tensor(got), dense, rtol=1e-13)

    @given(
        st.integers(1, 8),
        st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)).filter(sum), max_size=4),
        st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)).filter(sum), max_size=4),
    )
    def test_union_is_sum(self, d, left, right):
        d1, d2 = CpDecomposition(d, tuple(left)), CpDecomposition(d, tuple(right))
        assert reconstruct(d1 | d2) == reconstruct(d1) + reconstruct(d2)

    @settings(max_examples=50)
    @given(
        st.integers(1, 12),
        st.lists(st.tuples(st.floats(0.05, 5.0), st.floats(0.0, 1.0)), min_size=1, max_size=5),
    )
    def test_reconstruct_gives_measure_moments(self, d, measure):
        lam, pts = zip(*measure)
        y = binomial_transform(reconstruct(CpDecomposition.from_measure(d, lam, pts))).to_numpy()
        ref = moments(pts, lam, d)
        assert np.allclose(y, ref, rtol=1e-10, atol=1e-10 * ref[0])


class TestCpDecomposition:
    def test_weights_and_points(self):
        dec = CpDecomposition(4, ((1, 1),))
        assert dec.weights == (16,)
        assert dec.points == (Fraction(1, 2),)
        assert dec.rank == 1

    def test_clamps_tiny_negative(self):
        dec = CpDecomposition(3, ((1.0, -1e-12),))
        assert dec.atoms == ((1.0, 0.0),)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            CpDecomposition(3, ((1.0, -1e-3),))

    def test_rejects_zero_atom(self):
        with pytest.raises(ValueError):
            CpDecomposition(3, ((0, 0),))

    def test_from_measure(self):
        dec = CpDecomposition.from_measure(4, [16.0], [0.5])
        assert dec.atoms[0] == pytest.approx((1.0, 1.0))


class TestCoordinates:
    def test_length_and_order(self):
        a = AVector([1, 2, 3])
        assert a.d == 2 and len(a) == 3

    def test_too_short(self):
        with pytest.raises(ValueError):
            AVector([1])

    def test_too_long(self):
        with pytest.raises(ValueError):
            AVector([0] * (D_MAX + 2))

    def test_rejects_bool_and_nan(self):
        with pytest.raises(TypeError):
            AVector([True, 1])
        with pytest.raises(ValueError):
            AVector([float("nan"), 1])

    def test_strings_are_exact(self):
        a = AVector(["1/2", "3"])
        assert a.exact and a[0] == Fraction(1, 2)

    def test_binomial_row(self):
        assert binomial_row(4) == (1, 4, 6, 4, 1)
        assert binomial_row(60)[30] == math.comb(60, 30)
