import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ezdl import construct_member, hoyer_sigma, target_norms
from ezdl.errors import DimensionTooSmall, InfeasibleSupport, OutOfRange, ZeroVector
from ezdl.sparseness import sigma_from_norms

ROOT14 = math.sqrt(14.0)


def test_single_spike_is_maximally_sparse():
    assert hoyer_sigma([1, 0, 0, 0]) == pytest.approx(1.0, abs=1e-12)


def test_uniform_vector_is_minimally_sparse():
    assert hoyer_sigma([1, 1, 1, 1]) == pytest.approx(0.0, abs=1e-12)


def test_two_entry_example_against_direct_formula():
    # (sqrt(2) - 4/sqrt(10)) / (sqrt(2) - 1), evaluated independently
    expected = (math.sqrt(2) - 4 / math.sqrt(10)) / (math.sqrt(2) - 1)
    assert expected == pytest.approx(0.3604481163059116, abs=1e-15)
    assert hoyer_sigma([3.0, 1.0]) == pytest.approx(expected, rel=1e-12)


def test_zero_vector_rejected():
    with pytest.raises(ZeroVector):
        hoyer_sigma([0.0, 0.0, 0.0])


def test_scalar_rejected():
    with pytest.raises(DimensionTooSmall):
        hoyer_sigma([1.0])


@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=60),
       st.sampled_from([-7.5, -1.0, 0.25, 3.0, 1e4]))
@settings(max_examples=200)
def test_scale_and_permutation_invariance(entries, scale):
    x = np.array(entries)
    if not x.any():
        return
    base = hoyer_sigma(x)
    assert 0.0 <= base <= 1.0 + 1e-12
    assert hoyer_sigma(scale * x) == pytest.approx(base, abs=1e-12)
    perm = np.random.default_rng(0).permutation(x.size)
    assert hoyer_sigma(x[perm]) == pytest.approx(base, abs=1e-12)


class TestTargetNorms:
    def test_reference_value(self):
        # lambda1 = sqrt(14) * (sqrt(3) + 1) / 2
        t = target_norms(0.5, 3, ROOT14)
        assert t.lambda1 == pytest.approx(ROOT14 * (math.sqrt(3) + 1) / 2, rel=1e-14)
        assert t.lambda1 == pytest.approx(5.111199042590901, rel=1e-12)

    def test_near_one_limit(self):
        # as sigma_star -> 1 the norm ratio approaches 1
        t = target_norms(1.0 - 1e-6, 4, 1.0)
        assert t.lambda1 == pytest.approx(1.0, abs=1e-5)

    def test_near_zero_limit(self):
        # as sigma_star -> 0 the ratio approaches sqrt(n)
        t = target_norms(1e-6, 4, 1.0)
        assert t.lambda1 == pytest.approx(2.0, abs=1e-5)

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.2, 1.3, 1e-12, 1.0 - 1e-12])
    def test_out_of_range_rejected(self, bad):
        # values inside the 1e-9 guard band around the endpoints included
        with pytest.raises(OutOfRange):
            target_norms(bad, 4, 1.0)

    def test_bad_scale_rejected(self):
        with pytest.raises(OutOfRange):
            target_norms(0.5, 4, 0.0)

    def test_strict_norm_ordering(self):
        t = target_norms(0.37, 9, 2.5)
        assert t.lambda2 < t.lambda1 < math.sqrt(9) * t.lambda2

    @given(st.floats(1e-6, 1.0 - 1e-6), st.integers(2, 300), st.floats(1e-3, 1e3))
    @settings(max_examples=200)
    def test_round_trip(self, sigma, n, lam2):
        t = target_norms(sigma, n, lam2)
        assert sigma_from_norms(t.lambda1, t.lambda2, n) == pytest.approx(sigma, abs=1e-12)


class TestConstructMember:
    def test_full_support_example(self):
        t = target_norms(0.5, 3, ROOT14)
        m = construct_member(t, 3)
        # closed form evaluated independently
        psi = (t.lambda1 - math.sqrt(3 * 14 - t.lambda1 ** 2) / math.sqrt(2)) / 3
        omega = t.lambda1 - 2 * psi
        assert m == pytest.approx([psi, psi, omega], rel=1e-12)
        assert np.abs(m).sum() == pytest.approx(t.lambda1, rel=1e-10)
        assert np.linalg.norm(m) == pytest.approx(t.lambda2, rel=1e-10)

    def test_membership_across_support_sizes(self):
        t = target_norms(0.62, 9, 3.0)
        for d in range(2, 10):
            if d * t.lambda2 ** 2 <= t.lambda1 ** 2:
                continue
            m = construct_member(t, d)
            assert np.count_nonzero(m) == d
            assert hoyer_sigma(m) == pytest.approx(t.sigma_star, abs=1e-10)

    def test_near_uniform_limit(self):
        # tiny sigma_star forces psi ~ omega at full support
        t = target_norms(1e-6, 6, 1.0)
        m = construct_member(t, 6)
        assert m.max() - m.min() == pytest.approx(0.0, abs=1e-4)

    def test_infeasible_support_rejected(self):
        t = target_norms(0.9, 50, 1.0)
        # d * lambda2^2 <= lambda1^2 for small d at high sparseness
        bad_d = int(t.lambda1 ** 2 / t.lambda2 ** 2)
        with pytest.raises(InfeasibleSupport):
            construct_member(t, max(bad_d, 2))

    def test_support_size_validated(self):
        t = target_norms(0.5, 4, 1.0)
        with pytest.raises(OutOfRange):
            construct_member(t, 1)
        with pytest.raises(OutOfRange):
            construct_member(t, 5)
