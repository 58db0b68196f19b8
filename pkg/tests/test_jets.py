import numpy as np

from wignerflow.jets import Jet, sinh_cosh


def richardson_derivative(f, x, order, h0=None, levels=None):
    """Richardson-extrapolated central differences, the independent oracle.

    Uses the n-point binomial central stencil (offsets are half-integers
    for odd orders), O(h^2) accurate, then extrapolates in h^2.  The base
    step grows with the order: roundoff scales like eps/h^order, so deep
    halving is pure noise for high orders.
    """
    from math import comb

    if h0 is None:
        h0 = 0.08 if order <= 2 else 0.3
    if levels is None:
        levels = 5 if order <= 2 else 4

    def central(h):
        acc = 0.0
        for k in range(order + 1):
            acc += (-1.0) ** k * comb(order, k) * f(x + (order / 2.0 - k) * h)
        return acc / h**order

    table = [central(h0 / 2**k) for k in range(levels)]
    for m in range(1, levels):
        fac = 4.0**m
        table = [
            (fac * table[k + 1] - table[k]) / (fac - 1.0)
            for k in range(len(table) - 1)
        ]
    return table[0]


def composite(x):
    return np.sinh(2 * x) * np.cosh(x) ** 2 - 0.3 * np.cosh(x) ** 4


def composite_jet(x, order):
    xj = Jet.variable(x, order)
    s2, _ = sinh_cosh(2.0 * xj)
    _, c1 = sinh_cosh(xj)
    c2 = c1 * c1
    return s2 * c2 + (-0.3) * (c2 * c2)


def test_variable_seed():
    j = Jet.variable(1.5, 4)
    assert j.value == 1.5
    assert j.derivative(1) == 1.0
    assert j.derivative(2) == 0.0


def test_product_rule_exact():
    x = np.array([-0.7, 0.2, 1.1])
    xj = Jet.variable(x, 6)
    s, c = sinh_cosh(xj)
    prod = s * c  # sinh cosh = sinh(2x)/2
    expected = 0.5 * 2.0**3 * np.cosh(2 * x)  # third derivative of sinh(2x)/2
    assert np.allclose(prod.derivative(3), expected, rtol=1e-14)


def test_scalar_ops():
    xj = Jet.variable(0.4, 3)
    j = 2.0 * xj - 1.0 + xj * 3.0
    assert np.isclose(j.value, 5 * 0.4 - 1.0)
    assert np.isclose(j.derivative(1), 5.0)


def test_composite_against_finite_differences():
    # low orders against Richardson-extrapolated central differences
    for x in (-1.2, -0.3, 0.8):
        jet = composite_jet(x, 4)
        for order in (1, 2):
            fd = richardson_derivative(composite, x, order)
            assert abs(jet.derivative(order) - fd) < 1e-8 * max(1.0, abs(fd))


def test_high_order_against_closed_form():
    # the composite expands in exponentials e^{kx}; derivatives are exact
    coeff = {4: 1 / 8 - 0.3 / 16, 2: 2 / 8 - 0.3 * 4 / 16, 0: -0.3 * 6 / 16,
             -2: -2 / 8 - 0.3 * 4 / 16, -4: -1 / 8 - 0.3 / 16}
    x = np.linspace(-2.0, 2.0, 9)
    jet = composite_jet(x, 21)
    for order in (5, 13, 21):
        closed = sum(v * float(k) ** order * np.exp(k * x) for k, v in coeff.items())
        assert np.allclose(jet.derivative(order), closed, rtol=1e-12)


def test_derivatives_stack_matches_individual():
    xj = composite_jet(np.array([0.1, -0.4]), 8)
    stack = xj.derivatives()
    for k in (0, 3, 8):
        assert np.array_equal(stack[k], xj.derivative(k))
