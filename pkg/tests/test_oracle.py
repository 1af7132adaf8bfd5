import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eprsim import EmptyTallyError
from eprsim.oracle import (
    STANDARD_ANGLES,
    analog_integral,
    best_assignment,
    digital_distribution,
    joint_at_shift,
    oracle_chsh,
    oracle_E,
)

angle = st.floats(-10, 10, allow_nan=False)


def test_analog_examples():
    assert analog_integral(0, 0, math.pi / 2) == pytest.approx(0.125, abs=1e-12)
    assert analog_integral(0, 0, math.pi / 2, method="quadrature") == pytest.approx(0.125, abs=1e-12)
    assert analog_integral(0, 0, 0, method="quadrature") == pytest.approx(0.375, abs=1e-12)


def test_analog_cos4_by_independent_quadrature():
    from scipy.integrate import quad

    val, _ = quad(lambda x: math.cos(x) ** 4, 0, 2 * math.pi, epsabs=1e-13)
    assert val / (2 * math.pi) == pytest.approx(3 / 8, abs=1e-12)


def test_closed_form_matches_quadrature_on_random_grid():
    rng = np.random.default_rng(2024)
    for a, b, d in rng.uniform(-2 * math.pi, 2 * math.pi, (100, 3)):
        assert abs(analog_integral(a, b, d) - analog_integral(a, b, d, "quadrature")) < 1e-10


@given(angle, angle, angle, st.floats(-5, 5))
def test_analog_shift_invariance(a, b, d, c):
    assert analog_integral(a + c, b + c, d) == pytest.approx(analog_integral(a, b, d), abs=1e-12)


def test_digital_ideal_zero_coincidence():
    p = digital_distribution(0, 0, math.pi / 2, 0, 0).probs
    assert p[0, 0] == 0.0


@given(angle, angle, angle)
def test_no_dead_band_means_no_undetected(a, b, d):
    p = digital_distribution(a, b, d, 0.0, 0.0).probs
    assert np.all(p[2, :] == 0) and np.all(p[:, 2] == 0)
    assert p[:2, :2].sum() == pytest.approx(1.0, abs=1e-12)


def test_dead_band_marginal():
    p = digital_distribution(0.4, 1.2, 0.3, 0.2, 0.35)
    assert p.marginal(0)[2] == pytest.approx(2 / math.pi * math.asin(0.4), abs=1e-12)
    assert p.marginal(0)[2] == pytest.approx(0.2620, abs=1e-4)


@settings(max_examples=200, deadline=None)
@given(angle, angle, angle, st.floats(0, 0.49), st.floats(0, 1))
def test_distribution_is_normalized(a, b, d, ds, dec):
    p = digital_distribution(a, b, d, ds, dec).probs
    assert np.all(p >= -1e-15)
    assert p.sum() == pytest.approx(1.0, abs=1e-9)


def _tensor_midpoint(alpha, beta, delta, ds, dec, n=2048):
    """Independent route: 2048 x 2048 midpoint grid over (eps1, eps2)."""
    h = dec * math.pi / 2
    e = (np.arange(n) + 0.5) / n * 2 * h - h
    e1, e2 = np.meshgrid(e, e, indexing="ij")
    phi = 2 * (delta + alpha - beta) + 2 * (e2 - e1)
    return joint_at_shift(phi.ravel(), ds).mean(axis=-1)


def _lambda_grid(alpha, beta, delta, ds, n=1_000_000):
    """Independent route at zero decoherence: classify a fine lambda grid."""
    lam = (np.arange(n) + 0.5) / n * 2 * math.pi

    def cls(x, a):
        c = np.cos(x - a) ** 2
        o = np.full(x.shape, 2)
        o[c > 0.5 + ds] = 0
        o[c < 0.5 - ds] = 1
        return o

    o1, o2 = cls(lam, alpha), cls(lam + delta, beta)
    return np.bincount(3 * o1 + o2, minlength=9).reshape(3, 3) / n


@pytest.mark.parametrize(
    "args",
    [(0.3, 1.1, 0.7, 0.2, 0.37), (2.0, -0.4, math.pi / 2, 0.05, 0.1), (0.0, 0.5, 0.0, 0.33, 0.9)],
)
def test_decoherence_quadrature_against_tensor_grid(args):
    exact = digital_distribution(*args).probs
    assert np.abs(exact - _tensor_midpoint(*args)).max() < 1e-6


@pytest.mark.parametrize("args", [(0.3, 1.1, 0.7, 0.2), (1.0, 0.2, math.pi / 2, 0.0), (0.0, 2.5, 1.9, 0.41)])
def test_arc_measure_against_lambda_grid(args):
    exact = digital_distribution(*args, 0.0).probs
    # grid error is bounded by (number of arc endpoints) / n
    assert np.abs(exact - _lambda_grid(*args)).max() < 1e-5


def test_oracle_chsh_ideal_is_two():
    assert oracle_chsh() == pytest.approx(2.0, abs=1e-6)


def test_oracle_chsh_threshold_point_two():
    # dead band at 0.2 is wide enough that every standard-angle E is +/-1
    assert oracle_chsh(threshold=0.2) == pytest.approx(4.0, abs=1e-12)
    assert oracle_chsh(threshold=0.2) >= 3.75


def test_oracle_chsh_full_decoherence():
    for ds in (0.0, 0.1, 0.2):
        assert oracle_chsh(threshold=ds, decoherence=1.0) <= 2 + 1e-6


def test_oracle_chsh_monotone_in_threshold():
    s = [oracle_chsh(threshold=ds) for ds in (0.0, 0.05, 0.1, 0.15, 0.2)]
    assert all(x < y for x, y in zip(s, s[1:]))


def test_triangular_E():
    for theta in np.linspace(0, math.pi / 2, 9):
        assert oracle_E(0.0, theta) == pytest.approx(-1 + 4 * theta / math.pi, abs=1e-12)
    assert oracle_E(0.0, math.pi / 4) == pytest.approx(0.0, abs=1e-12)


def test_standard_assignment_is_best_pairing():
    best = best_assignment()
    assert len(best) == 3
    winner = max(best.values(), key=lambda v: v[0])
    assert winner[0] == pytest.approx(2.0, abs=1e-9)
    assert oracle_chsh(STANDARD_ANGLES) == pytest.approx(winner[0], abs=1e-9)
    others = sorted(v[0] for v in best.values())[:2]
    assert all(s < 2.0 - 0.5 for s in others)


def test_empty_distribution_raises():
    from eprsim.oracle import e_from_probs

    with pytest.raises(EmptyTallyError):
        e_from_probs(np.diag([0, 0, 1.0]))
