"""Cross-checks between the three projection implementations."""

import numpy as np
import pytest

from ezdl import (
    alternating_project,
    construct_member,
    oracle_project_sorted,
    project_nonneg,
    target_norms,
)
from ezdl.errors import MaxRoundsExceeded, NonUniqueProjection
from ezdl.projection import _alternating_iterates


def test_oracle_reference_value():
    t = target_norms(0.5, 3, np.sqrt(14.0))
    p = oracle_project_sorted(np.array([3.0, 2.0, 1.0]), t)
    assert p == pytest.approx(
        [3.330367799421657, 1.7037330141969667, 0.07709822897227586], rel=1e-9)


def test_oracle_member_fixed_point():
    t = target_norms(0.7, 6, 1.5)
    m = construct_member(t, 6)
    assert oracle_project_sorted(m, t) == pytest.approx(m, rel=1e-9)


def test_oracle_rejects_uniform():
    t = target_norms(0.5, 4, 1.0)
    with pytest.raises(NonUniqueProjection):
        oracle_project_sorted(np.ones(4), t)


def test_three_way_agreement_randomized():
    rng = np.random.Generator(np.random.Philox(41))
    for _ in range(250):
        n = int(rng.integers(2, 150))
        sigma = float(rng.uniform(0.1, 0.99))
        x = rng.random(n)
        t = target_norms(sigma, n, float(np.linalg.norm(x)))
        ref = oracle_project_sorted(x, t)
        alt = alternating_project(x, t)
        lin = project_nonneg(x.copy(), t).p
        assert np.abs(alt - ref).max() <= 1e-9 * t.lambda2
        assert np.abs(lin - ref).max() <= 1e-9 * t.lambda2


def test_alternating_high_sparseness_case():
    rng = np.random.Generator(np.random.Philox(42))
    x = rng.random(20)
    t = target_norms(0.9, 20, float(np.linalg.norm(x)))
    assert np.abs(alternating_project(x, t)
                  - oracle_project_sorted(x, t)).max() <= 1e-8


def test_alternating_member_stops_after_one_round():
    t = target_norms(0.6, 8, 2.0)
    m = construct_member(t, 8)
    rounds = list(_alternating_iterates(m, t))
    assert len(rounds) == 1
    assert rounds[0][0] == pytest.approx(m, rel=1e-9)


def test_alternating_support_shrinks_strictly():
    rng = np.random.Generator(np.random.Philox(43))
    for _ in range(50):
        n = int(rng.integers(8, 120))
        x = rng.random(n)
        t = target_norms(0.9, n, float(np.linalg.norm(x)))
        sizes = [d for _, d in _alternating_iterates(x, t)]
        assert all(a > b for a, b in zip(sizes, sizes[1:]))


def test_alternating_round_budget():
    rng = np.random.Generator(np.random.Philox(44))
    x = rng.random(40)
    t = target_norms(0.9, 40, float(np.linalg.norm(x)))
    with pytest.raises(MaxRoundsExceeded):
        alternating_project(x, t, max_rounds=0)
