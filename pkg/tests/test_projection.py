import math

import numpy as np
import pytest

from ezdl import (
    SOLVERS,
    construct_member,
    hoyer_sigma,
    oracle_project_sorted,
    project_nonneg,
    project_signed,
    target_norms,
)
from ezdl.errors import DimensionMismatch, NonUniqueProjection, OutOfRange, ZeroVector

ROOT14 = math.sqrt(14.0)

# projection of (3, 2, 1) at sigma*=0.5, lambda2=sqrt(14); frozen from the
# sorted oracle and confirmed against the closed form with full support and
# the alternating scheme
REF_P = np.array([3.330367799421657, 1.7037330141969667, 0.07709822897227586])
REF_ALPHA = 0.9526026188099586


@pytest.fixture
def triple_target():
    return target_norms(0.5, 3, ROOT14)


@pytest.mark.parametrize("solver", SOLVERS)
def test_reference_projection(triple_target, solver):
    out = project_nonneg(np.array([3.0, 2.0, 1.0]), triple_target, solver)
    assert out.p == pytest.approx(REF_P, rel=1e-9)
    assert out.alpha_star == pytest.approx(REF_ALPHA, abs=1e-9)
    assert out.d == 3
    assert out.ell1 == pytest.approx(6.0, rel=1e-12)
    assert out.ell2_sq == pytest.approx(14.0, rel=1e-12)
    assert out.solver_evals >= 1


def test_closed_form_alpha_with_known_support(triple_target):
    # quadratic closed form with all three coordinates surviving
    lam1, lam2 = triple_target.lambda1, triple_target.lambda2
    a = 3 * 14.0 - 36.0
    b = 3 * lam2 ** 2 - lam1 ** 2
    alpha = (6.0 - lam1 * math.sqrt(a / b)) / 3.0
    assert alpha == pytest.approx(REF_ALPHA, abs=1e-12)


def test_member_is_fixed_point():
    t = target_norms(0.5, 3, ROOT14)
    m = construct_member(t, 3)
    out = project_nonneg(m.copy(), t)
    assert out.p == pytest.approx(m, rel=1e-10)
    assert out.alpha_star <= 1e-10


def test_uniform_input_rejected(triple_target):
    with pytest.raises(NonUniqueProjection):
        project_nonneg(np.ones(3), triple_target)


def test_zero_input_rejected(triple_target):
    with pytest.raises(ZeroVector):
        project_nonneg(np.zeros(3), triple_target)


def test_negative_input_rejected(triple_target):
    with pytest.raises(ValueError):
        project_nonneg(np.array([3.0, -2.0, 1.0]), triple_target)


def test_dimension_checked(triple_target):
    with pytest.raises(DimensionMismatch):
        project_nonneg(np.array([3.0, 2.0]), triple_target)


def test_unknown_solver_rejected(triple_target):
    with pytest.raises(OutOfRange):
        project_nonneg(np.array([3.0, 2.0, 1.0]), triple_target, "brent")


def test_in_place_contract(triple_target):
    x = np.array([3.0, 2.0, 1.0])
    out = project_nonneg(x, triple_target)
    assert out.p is x  # the projection overwrites the input buffer


def test_sparseness_decreasing_branch():
    # input sparser than the target: no root search, full support
    t = target_norms(0.2, 4, 1.0)
    x = np.array([5.0, 0.0, 0.0, 0.0])
    out = project_nonneg(x, t)
    assert out.solver_evals == 1
    assert out.d == 4
    assert np.all(out.p > 0)
    assert hoyer_sigma(out.p) == pytest.approx(0.2, abs=1e-9)
    assert np.linalg.norm(out.p) == pytest.approx(1.0, rel=1e-12)


class TestSigned:
    def test_sign_flip_example(self, triple_target):
        r = project_signed(np.array([-3.0, 2.0, 1.0]), 0.5, ROOT14)
        assert r == pytest.approx(REF_P * np.array([-1.0, 1.0, 1.0]), rel=1e-9)

    def test_fixed_point(self):
        t = target_norms(0.6, 5, 2.0)
        m = construct_member(t, 5)
        assert project_signed(m, 0.6, 2.0) == pytest.approx(m, rel=1e-9)

    def test_zero_vector_rejected(self):
        with pytest.raises(ZeroVector):
            project_signed(np.zeros(4), 0.5)

    def test_norm_preserved_by_default(self):
        rng = np.random.Generator(np.random.Philox(3))
        x = rng.normal(0, 1, 20)
        r = project_signed(x, 0.7)
        assert np.linalg.norm(r) == pytest.approx(np.linalg.norm(x), rel=1e-12)
        assert hoyer_sigma(r) == pytest.approx(0.7, abs=1e-9)

    def test_sign_preservation_randomized(self):
        rng = np.random.Generator(np.random.Philox(4))
        for _ in range(200):
            n = int(rng.integers(2, 80))
            x = rng.normal(0, 1, n)
            r = project_signed(x, float(rng.uniform(0.1, 0.95)))
            assert np.all(r * x >= 0.0)


class TestRandomizedInvariants:
    def make_case(self, rng):
        n = int(rng.integers(2, 200))
        sigma = float(rng.uniform(0.05, 0.99))
        x = rng.random(n)
        t = target_norms(sigma, n, float(np.linalg.norm(x)))
        return x, t

    def test_all_solvers_match_oracle(self):
        rng = np.random.Generator(np.random.Philox(21))
        for _ in range(300):
            x, t = self.make_case(rng)
            ref = oracle_project_sorted(x, t)
            for solver in SOLVERS:
                out = project_nonneg(x.copy(), t, solver)
                assert np.abs(out.p - ref).max() <= 1e-9 * t.lambda2

    def test_feasibility_and_idempotence(self):
        rng = np.random.Generator(np.random.Philox(22))
        for _ in range(300):
            x, t = self.make_case(rng)
            out = project_nonneg(x.copy(), t)
            assert hoyer_sigma(out.p) == pytest.approx(t.sigma_star, abs=1e-9)
            assert np.abs(out.p).sum() == pytest.approx(t.lambda1, rel=1e-9)
            assert np.linalg.norm(out.p) == pytest.approx(t.lambda2, rel=1e-9)
            assert np.count_nonzero(out.p) == out.d
            again = project_nonneg(out.p.copy(), t)
            assert np.abs(again.p - out.p).max() <= 1e-9 * t.lambda2

    def test_order_preservation_exact(self):
        rng = np.random.Generator(np.random.Philox(23))
        for _ in range(200):
            x, t = self.make_case(rng)
            p = project_nonneg(x.copy(), t).p
            order = np.argsort(x, kind="stable")
            assert np.all(np.diff(p[order]) >= 0.0)

    def test_optimality_against_member_samples(self):
        # projections are at least as close as thousands of direct members
        rng = np.random.Generator(np.random.Philox(24))
        t = target_norms(0.55, 3, 2.0)
        for _ in range(10):
            x = rng.random(3) * 2.0
            p = project_nonneg(x.copy(), t).p
            dist_p = np.linalg.norm(x - p)
            for _ in range(1000):
                d = int(rng.integers(2, 4))
                q = construct_member(t, d)
                rng.shuffle(q)
                assert dist_p <= np.linalg.norm(x - q) + 1e-7


def test_near_tied_support_falls_back_gracefully():
    # entries tied at rounding level around the shrinkage offset: the sorted
    # reference settles the support instead of refusing
    h = np.zeros(64)
    h[0], h[1] = 0.9352191586999605, 0.4903332896756108
    h[2:] = 3.4e-16 * np.linspace(0.9, 1.0, 62)
    t = target_norms(0.95, 64, float(np.linalg.norm(h)))
    out = project_nonneg(h.copy(), t)
    assert hoyer_sigma(out.p) == pytest.approx(0.95, abs=1e-9)
