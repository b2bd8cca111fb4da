import numpy as np
import pytest

from ezdl import grad_apply, project_nonneg, target_norms
from ezdl.errors import DegenerateGradient, DimensionMismatch
from ezdl.projection import ProjectionOutcome


@pytest.fixture
def outcome_and_target():
    rng = np.random.Generator(np.random.Philox(31))
    x = rng.uniform(0.1, 1.0, 12)
    t = target_norms(0.6, 12, float(np.linalg.norm(x)))
    return project_nonneg(x.copy(), t), t


def test_zero_vector_maps_to_zero(outcome_and_target):
    out, t = outcome_and_target
    assert np.all(grad_apply(out, t, np.zeros(12)) == 0.0)


def test_disjoint_support_annihilated(outcome_and_target):
    out, t = outcome_and_target
    y = np.where(out.p > 0, 0.0, 1.0)
    assert np.all(grad_apply(out, t, y) == 0.0)


def test_off_support_coordinates_zero(outcome_and_target):
    out, t = outcome_and_target
    rng = np.random.Generator(np.random.Philox(32))
    z = grad_apply(out, t, rng.normal(0, 1, 12))
    assert np.all(z[out.p == 0.0] == 0.0)


def test_shape_checked(outcome_and_target):
    out, t = outcome_and_target
    with pytest.raises(DimensionMismatch):
        grad_apply(out, t, np.zeros(5))


def test_uniform_slice_rejected():
    t = target_norms(0.5, 4, 2.0)
    fake = ProjectionOutcome(p=np.array([1.0, 1.0, 1.0, 1.0]), ell1=4.0,
                             ell2_sq=4.0, d=4, alpha_star=0.0, beta_star=1.0,
                             solver_evals=1)
    with pytest.raises(DegenerateGradient):
        grad_apply(fake, t, np.ones(4))


def test_matches_dense_finite_difference_jacobian():
    rng = np.random.Generator(np.random.Philox(33))
    x = rng.uniform(0.1, 1.0, 6)
    t = target_norms(0.55, 6, float(np.linalg.norm(x)))
    out = project_nonneg(x.copy(), t)
    assert np.abs(x - out.alpha_star).min() > 1e-4
    eps = 1e-6
    for j in range(6):
        e = np.zeros(6)
        e[j] = 1.0
        fd = (project_nonneg(x + eps * e, t).p - project_nonneg(x - eps * e, t).p) / (2 * eps)
        g = grad_apply(out, t, e)
        assert np.abs(g - fd).max() < 1e-6


def test_matches_directional_finite_differences_randomized():
    rng = np.random.Generator(np.random.Philox(34))
    checked = 0
    while checked < 150:
        n = int(rng.integers(3, 51))
        sigma = float(rng.uniform(0.2, 0.95))
        x = rng.uniform(0.05, 1.0, n)
        t = target_norms(sigma, n, float(np.linalg.norm(x)))
        out = project_nonneg(x.copy(), t)
        if np.abs(x - out.alpha_star).min() < 1e-4:
            continue
        y = rng.normal(0, 1, n)
        y /= np.linalg.norm(y)
        g = grad_apply(out, t, y)
        eps = 1e-6
        fd = (project_nonneg(x + eps * y, t).p - project_nonneg(x - eps * y, t).p) / (2 * eps)
        assert np.linalg.norm(g - fd) <= 1e-5 * max(np.linalg.norm(fd), 1.0)
        checked += 1


def test_two_point_support_has_zero_jacobian():
    # with two surviving entries the feasible set is locally two isolated
    # points, so the projection is locally constant
    rng = np.random.Generator(np.random.Philox(35))
    x = np.array([0.95, 0.55, 0.12, 0.08])
    t = target_norms(0.85, 4, float(np.linalg.norm(x)))
    out = project_nonneg(x.copy(), t)
    assert out.d == 2
    y = rng.normal(0, 1, 4)
    assert np.abs(grad_apply(out, t, y)).max() < 1e-10
