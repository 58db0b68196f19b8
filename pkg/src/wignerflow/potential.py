"""The Caticha double well: values, arbitrary-order derivatives, extrema.

The potential is a fixed combination of sinh/cosh terms with an additive
constant; it supports two exact bound states separated by the configured
energy gap.  Derivatives of arbitrary order are obtained by jet arithmetic
on the closed form (see :mod:`wignerflow.jets`), which the flow series
needs up to odd orders around 17 and beyond.
"""

import numpy as np

from .config import PhysicsConfig
from .errors import DomainOverflowError, UnsupportedOrderError
from .jets import Jet, sinh_cosh

DEFAULT_MAX_JET_ORDER = 25


def eval_potential(x, cfg: PhysicsConfig):
    """Evaluate the double-well potential V(x).

    Raises
    ------
    DomainOverflowError
        If cosh^4(x) exceeds the floating-point range.
    """
    x = np.asarray(x, dtype=float)
    de, a = cfg.delta_e, cfg.alpha
    with np.errstate(over="ignore", invalid="ignore"):
        s2 = np.sinh(2.0 * x)
        c2 = np.cosh(x) ** 2
        v = (
            1.0
            + cfg.e0
            + 1.5 * de
            - de * a * s2
            + c2 * (de**2 / 4.0 * a * s2 - de**2 / 4.0 - 2.0 * de)
            + de**2 / 4.0 * (a**2 + 1.0) * c2**2
        )
    if not np.all(np.isfinite(v)):
        raise DomainOverflowError(
            "potential overflow: |x| too large for cosh^4 in float64"
        )
    return v if v.ndim else float(v)


def _potential_jet(x, order, cfg: PhysicsConfig) -> Jet:
    """Jet of V about ``x`` carrying derivatives up to ``order``."""
    de, a = cfg.delta_e, cfg.alpha
    xj = Jet.variable(np.asarray(x, dtype=float), order)
    s2, _ = sinh_cosh(2.0 * xj)
    _, c1 = sinh_cosh(xj)
    c2 = c1 * c1
    return (
        (1.0 + cfg.e0 + 1.5 * de)
        + (-de * a) * s2
        + c2 * ((de**2 / 4.0 * a) * s2 + (-(de**2) / 4.0 - 2.0 * de))
        + (de**2 / 4.0 * (a**2 + 1.0)) * (c2 * c2)
    )


def potential_derivative(x, order, cfg: PhysicsConfig,
                         max_order=DEFAULT_MAX_JET_ORDER):
    """n-th derivative of V at ``x`` via jet arithmetic (exact to rounding).

    Order 0 delegates to :func:`eval_potential`.
    """
    if order < 0:
        raise ValueError(f"derivative order must be >= 0, got {order}")
    if order > max_order:
        raise UnsupportedOrderError(
            f"order {order} exceeds jet capacity {max_order}"
        )
    if order == 0:
        return eval_potential(x, cfg)
    with np.errstate(over="ignore", invalid="ignore"):
        d = _potential_jet(x, order, cfg).derivative(order)
    if not np.all(np.isfinite(d)):
        raise DomainOverflowError(
            "potential derivative overflow: |x| too large in float64"
        )
    return d if np.ndim(d) else float(d)


def find_extrema(x_lo, x_hi, cfg: PhysicsConfig, scan_step=1e-3, xtol=1e-8):
    """Locate all extrema of V on [x_lo, x_hi].

    A uniform pre-scan brackets every sign change of V'; each bracket is
    bisected to ``xtol``.  Returns a list of ``(position, kind)`` with kind
    ``"min"`` or ``"max"`` from the sign of V''.  The potential is smooth
    with three extrema in the physically relevant window, so a scan step
    of 1e-3 cannot skip a pair.
    """
    if not x_lo < x_hi:
        raise ValueError(f"need x_lo < x_hi, got [{x_lo}, {x_hi}]")
    n = int(np.ceil((x_hi - x_lo) / scan_step)) + 1
    xs = np.linspace(x_lo, x_hi, n)
    d1 = potential_derivative(xs, 1, cfg)
    sgn = np.sign(d1)
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    lo, hi = xs[idx].copy(), xs[idx + 1].copy()
    flo = d1[idx].copy()
    while np.any(hi - lo > xtol):
        mid = 0.5 * (lo + hi)
        fmid = potential_derivative(mid, 1, cfg)
        take_left = flo * fmid <= 0
        hi = np.where(take_left, mid, hi)
        lo = np.where(take_left, lo, mid)
        flo = np.where(take_left, flo, fmid)
    roots = 0.5 * (lo + hi)
    # exact interior zeros of V' hit by the scan itself
    interior_zeros = xs[1:-1][sgn[1:-1] == 0]
    roots = np.sort(np.concatenate([roots, interior_zeros]))
    out = []
    for r in roots:
        kind = "min" if potential_derivative(r, 2, cfg) > 0 else "max"
        out.append((float(r), kind))
    return out


class CatichaPotential:
    """Double-well potential bound to one :class:`PhysicsConfig`."""

    def __init__(self, cfg: PhysicsConfig, max_order=DEFAULT_MAX_JET_ORDER):
        self.cfg = cfg
        self.max_order = max_order

    def value(self, x):
        return eval_potential(x, self.cfg)

    def derivative(self, x, order):
        return potential_derivative(x, order, self.cfg, max_order=self.max_order)

    def derivatives_upto(self, x, order):
        """Stack of derivatives 0..order at ``x`` from a single jet pass."""
        if order > self.max_order:
            raise UnsupportedOrderError(
                f"order {order} exceeds jet capacity {self.max_order}"
            )
        d = _potential_jet(x, order, self.cfg).derivatives()
        if not np.all(np.isfinite(d)):
            raise DomainOverflowError("potential derivative overflow")
        return d


class HarmonicPotential:
    """V = (1/2) m omega^2 x^2, the degenerate test case.

    All derivatives of order >= 3 vanish identically, so the flow series
    terminates after its first term.
    """

    def __init__(self, mass=0.5, omega=1.0):
        self.mass = mass
        self.omega = omega
        self.max_order = np.inf

    def value(self, x):
        x = np.asarray(x, dtype=float)
        v = 0.5 * self.mass * self.omega**2 * x**2
        return v if v.ndim else float(v)

    def derivative(self, x, order):
        x = np.asarray(x, dtype=float)
        k = self.mass * self.omega**2
        if order == 0:
            return self.value(x)
        if order == 1:
            d = k * x
        elif order == 2:
            d = np.full_like(x, k)
        else:
            d = np.zeros_like(x)
        return d if d.ndim else float(d)

    def derivatives_upto(self, x, order):
        return np.stack([self.derivative(x, k) for k in range(order + 1)])
