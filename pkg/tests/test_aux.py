import math

import numpy as np
import pytest

from ezdl import aux_eval, target_norms
from ezdl.errors import EmptySupport, OutOfRange, ZeroVector

ROOT14 = math.sqrt(14.0)


@pytest.fixture
def triple_target():
    return target_norms(0.5, 3, ROOT14)


def test_value_at_zero_offset(triple_target):
    ev = aux_eval(np.array([3.0, 2.0, 1.0]), triple_target, 0.0)
    assert ev.d == 3
    assert ev.ell1 == pytest.approx(6.0, rel=1e-14)
    assert ev.ell2_sq == pytest.approx(14.0, rel=1e-14)
    # 6/sqrt(14) - (sqrt(3)+1)/2, evaluated independently
    expected = 6.0 / ROOT14 - (math.sqrt(3.0) + 1.0) / 2.0
    assert expected == pytest.approx(0.2375420476901078, abs=1e-14)
    assert ev.psi == pytest.approx(expected, rel=1e-12)
    assert ev.eval_count_hint == 1


def test_constant_tail_has_single_survivor(triple_target):
    ev = aux_eval(np.array([3.0, 2.0, 1.0]), triple_target, 2.5)
    assert ev.d == 1
    assert ev.psi_d1 == pytest.approx(0.0, abs=1e-14)


def test_bracket_flag_inside_final_interval(triple_target):
    # the zero offset sits near 0.9526, between the entries 0 and 1, so any
    # probe in that gap certifies the bracket
    ev = aux_eval(np.array([3.0, 2.0, 1.0]), triple_target, 0.9)
    assert ev.finished
    assert ev.d == 3
    # probing between 1 and 2 probes the wrong interval
    ev2 = aux_eval(np.array([3.0, 2.0, 1.0]), triple_target, 1.5)
    assert not ev2.finished


def test_derivative_identities_on_random_grid():
    rng = np.random.Generator(np.random.Philox(11))
    for _ in range(50):
        n = int(rng.integers(3, 40))
        x = rng.random(n)
        t = target_norms(0.7, n, float(np.linalg.norm(x)))
        top = np.partition(x, n - 2)[n - 2]
        for alpha in rng.uniform(0.0, top * 0.999, 5):
            ev = aux_eval(x, t, float(alpha))
            l1a = ev.ell1 - ev.d * alpha
            l2a_sq = ev.ell2_sq - 2 * alpha * ev.ell1 + ev.d * alpha ** 2
            assert ev.psi_d2 == pytest.approx(3.0 * ev.psi_d1 * l1a / l2a_sq, rel=1e-10)
            expected_sq = (l1a ** 2 / l2a_sq) - (t.lambda1 / t.lambda2) ** 2
            assert ev.psi_sq == pytest.approx(expected_sq, rel=1e-10, abs=1e-12)
            assert ev.psi == pytest.approx(l1a / math.sqrt(l2a_sq) - t.lambda1 / t.lambda2,
                                           rel=1e-10, abs=1e-12)


def test_monotone_decrease_up_to_second_largest():
    rng = np.random.Generator(np.random.Philox(12))
    for _ in range(30):
        n = int(rng.integers(4, 100))
        x = rng.random(n)
        t = target_norms(0.8, n, float(np.linalg.norm(x)))
        second = np.partition(x, n - 2)[n - 2]
        grid = np.linspace(0.0, second * (1 - 1e-9), 64)
        values = [aux_eval(x, t, float(a)).psi for a in grid]
        diffs = np.diff(values)
        assert np.all(diffs <= 1e-12)
        assert diffs.min() < 0.0  # strictly decreasing somewhere


def test_offset_validation(triple_target):
    x = np.array([3.0, 2.0, 1.0])
    with pytest.raises(EmptySupport):
        aux_eval(x, triple_target, 3.0)
    with pytest.raises(EmptySupport):
        aux_eval(x, triple_target, 4.2)
    with pytest.raises(OutOfRange):
        aux_eval(x, triple_target, -0.1)
    with pytest.raises(ZeroVector):
        aux_eval(np.zeros(3), triple_target, 0.0)
