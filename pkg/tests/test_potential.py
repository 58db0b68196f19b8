import numpy as np
import pytest

from wignerflow import (
    DomainOverflowError,
    HarmonicPotential,
    PhysicsConfig,
    UnsupportedOrderError,
    eval_potential,
    find_extrema,
    potential_derivative,
)

X_LEFT, X_RIGHT, X_SADDLE = -2.095, 1.514, -0.258


def exponential_basis_coefficients(cfg):
    """V as sum of v_k e^{kx}: the independent closed-form oracle."""
    de, a = cfg.delta_e, cfg.alpha
    w = de**2 / 4 * (a**2 + 1)
    q = de**2 / 4 * a
    r = -(de**2) / 4 - 2 * de
    return {
        0: 1.0 + cfg.e0 + 1.5 * de + r / 2 + 3 * w / 8,
        2: -de * a / 2 + q / 4 + r / 4 + w / 4,
        -2: de * a / 2 - q / 4 + r / 4 + w / 4,
        4: q / 8 + w / 16,
        -4: -q / 8 + w / 16,
    }


def test_value_matches_exponential_expansion(cfg):
    coeff = exponential_basis_coefficients(cfg)
    x = np.linspace(-4, 3, 25)
    expected = sum(v * np.exp(k * x) for k, v in coeff.items())
    assert np.allclose(eval_potential(x, cfg), expected, rtol=1e-12)


def test_even_for_zero_asymmetry():
    sym = PhysicsConfig(alpha=0.0)
    x = np.linspace(0.1, 3.0, 17)
    assert np.allclose(eval_potential(x, sym), eval_potential(-x, sym), rtol=1e-14)
    assert potential_derivative(0.0, 1, sym) == 0.0


def test_order_zero_equals_value(cfg):
    x = np.array([-2.0, 0.3, 1.4])
    assert np.array_equal(potential_derivative(x, 0, cfg), eval_potential(x, cfg))


def test_derivatives_match_richardson(cfg):
    from test_jets import richardson_derivative

    f = lambda x: eval_potential(x, cfg)
    for x in np.linspace(-3, 3, 7):
        for order in range(1, 7):
            fd = richardson_derivative(f, x, order)
            jet = potential_derivative(x, order, cfg)
            assert abs(jet - fd) < 1e-6 * max(1.0, abs(fd)), (x, order)


def test_derivatives_match_exponential_expansion(cfg):
    coeff = exponential_basis_coefficients(cfg)
    x = np.linspace(-3.5, 3.0, 11)
    for order in (1, 5, 11, 17, 25):
        closed = sum(v * float(k) ** order * np.exp(k * x) for k, v in coeff.items())
        assert np.allclose(potential_derivative(x, order, cfg), closed, rtol=1e-12)


def test_e0_only_shifts_value():
    base = PhysicsConfig()
    shifted = PhysicsConfig(e0=2.75)
    x = np.linspace(-2, 2, 9)
    assert np.allclose(
        eval_potential(x, shifted) - eval_potential(x, base), 2.75, rtol=0, atol=1e-14
    )
    for order in (1, 2, 7):
        assert np.array_equal(
            potential_derivative(x, order, base), potential_derivative(x, order, shifted)
        )


def test_overflow_signalled(cfg):
    with pytest.raises(DomainOverflowError):
        eval_potential(250.0, cfg)


def test_order_capacity(cfg):
    with pytest.raises(UnsupportedOrderError):
        potential_derivative(0.0, 26, cfg)
    assert np.isfinite(potential_derivative(0.0, 26, cfg, max_order=30))


def test_landmarks(cfg):
    ext = find_extrema(-4.0, 3.0, cfg)
    kinds = [k for _, k in ext]
    assert kinds == ["min", "max", "min"]
    (xl, _), (xs, _), (xr, _) = ext
    assert abs(xl - X_LEFT) < 0.005
    assert abs(xs - X_SADDLE) < 0.005
    assert abs(xr - X_RIGHT) < 0.005


def test_saddle_is_a_maximum(cfg):
    # curvature sign check backed by a dense scan on [-1, 0]
    xs = np.linspace(-1.0, 0.0, 2001)
    v = eval_potential(xs, cfg)
    top = xs[np.argmax(v)]
    assert abs(top - X_SADDLE) < 0.01
    assert potential_derivative(top, 2, cfg) < 0


def test_extrema_symmetric_for_even_well():
    sym = PhysicsConfig(alpha=0.0)
    ext = find_extrema(-4.0, 4.0, sym)
    mins = [x for x, k in ext if k == "min"]
    maxs = [x for x, k in ext if k == "max"]
    assert len(mins) == 2 and len(maxs) == 1
    assert abs(mins[0] + mins[1]) < 1e-6
    assert abs(maxs[0]) < 1e-6


def test_first_derivative_vanishes_at_minimum(cfg):
    ext = find_extrema(-3.0, -1.0, cfg)
    x_min = ext[0][0]
    curv = potential_derivative(x_min, 2, cfg)
    assert abs(potential_derivative(x_min, 1, cfg)) < 1e-3 * abs(curv)


def test_harmonic_derivatives():
    h = HarmonicPotential(mass=0.5, omega=2.0)
    x = np.linspace(-1, 1, 5)
    assert np.allclose(h.derivative(x, 1), 0.5 * 4.0 * x)
    assert np.all(h.derivative(x, 3) == 0.0)
    assert np.all(h.derivatives_upto(x, 7)[3:] == 0.0)
