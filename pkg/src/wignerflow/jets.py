"""Truncated Taylor (jet) arithmetic for exact high-order derivatives.

A jet stores the Taylor coefficients ``f(x0), f'(x0)/1!, ..., f^(N)(x0)/N!``
of a function about an expansion point.  Sums, products and hyperbolic
primitives propagate coefficients exactly (to rounding), so derivatives of
composite expressions come out at machine precision in O(N^2) operations.
Coefficients may be arrays, in which case every operation is vectorized
over the trailing axes.
"""

import math

import numpy as np


class Jet:
    """Taylor coefficients of a function about one (or many) expansion points.

    ``coeffs[k]`` holds ``f^(k)(x0) / k!``; the trailing shape of ``coeffs``
    is the shape of the evaluation-point array.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = np.asarray(coeffs, dtype=float)

    @classmethod
    def variable(cls, x, order):
        """Jet of the identity function at expansion point(s) ``x``."""
        x = np.asarray(x, dtype=float)
        c = np.zeros((order + 1,) + x.shape)
        c[0] = x
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value, order, shape=()):
        c = np.zeros((order + 1,) + shape)
        c[0] = value
        return cls(c)

    @property
    def order(self):
        return self.coeffs.shape[0] - 1

    @property
    def value(self):
        return self.coeffs[0]

    def derivative(self, k):
        """k-th derivative value(s): ``coeffs[k] * k!``."""
        if not 0 <= k <= self.order:
            raise ValueError(f"derivative order {k} outside jet order {self.order}")
        return self.coeffs[k] * float(math.factorial(k))

    def derivatives(self):
        """All derivatives 0..order, stacked along the first axis."""
        fact = np.cumprod(np.concatenate(([1.0], np.arange(1.0, self.order + 1))))
        return self.coeffs * fact.reshape((-1,) + (1,) * (self.coeffs.ndim - 1))

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.coeffs + other.coeffs)
        c = self.coeffs.copy()
        c[0] = c[0] + other
        return Jet(c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.coeffs * other)
        n = self.order
        a, b = self.coeffs, other.coeffs
        out = np.zeros_like(a)
        for k in range(n + 1):
            for j in range(k + 1):
                out[k] += a[j] * b[k - j]
        return Jet(out)

    __rmul__ = __mul__


def sinh_cosh(u):
    """Jets of sinh(u) and cosh(u) for a jet-valued argument ``u``.

    Uses the coupled recurrence s' = c*u', c' = s*u' in coefficient space.
    """
    n = u.order
    uc = u.coeffs
    s = np.zeros_like(uc)
    c = np.zeros_like(uc)
    s[0] = np.sinh(uc[0])
    c[0] = np.cosh(uc[0])
    for k in range(n):
        acc_s = np.zeros_like(uc[0])
        acc_c = np.zeros_like(uc[0])
        for j in range(k + 1):
            acc_s += (j + 1) * uc[j + 1] * c[k - j]
            acc_c += (j + 1) * uc[j + 1] * s[k - j]
        s[k + 1] = acc_s / (k + 1)
        c[k + 1] = acc_c / (k + 1)
    return Jet(s), Jet(c)
