"""Exact bound states of the double well and their balanced superposition.

The ground state is nodeless and strictly positive; the first excited
state carries a single node at ``-atanh(alpha)``.  Both are real, so the
two-state superposition has an analytic time dependence: every
time-dependent quantity in this package reduces to cos/sin weights of
time-independent fields.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .config import PhysicsConfig
from .errors import GridInsufficientError, InvalidAsymmetryError

NORM_WINDOW = (-6.0, 5.0)  # |psi|^2 < 1e-30 outside for the default well


def _log_cosh(x):
    ax = np.abs(x)
    return ax - math.log(2.0) + np.log1p(np.exp(-2.0 * ax))


def _shape0(x, cfg):
    """Unnormalized ground-state shape, overflow-safe for any x.

    The exponent is written as cosh^2(x)*(1 + alpha*tanh(x)) + alpha*x so
    that no inf-inf cancellation occurs; for large |x| it underflows to 0.
    """
    x = np.asarray(x, dtype=float)
    de, a = cfg.delta_e, cfg.alpha
    with np.errstate(over="ignore"):
        expo = -de / 4.0 * (np.cosh(x) ** 2 * (1.0 + a * np.tanh(x)) + a * x)
        return np.exp(_log_cosh(x) + expo)


def _dlog_shape0(x, cfg):
    """Logarithmic derivative of the ground-state shape."""
    x = np.asarray(x, dtype=float)
    de, a = cfg.delta_e, cfg.alpha
    return np.tanh(x) - de / 4.0 * (np.sinh(2.0 * x) + a + a * np.cosh(2.0 * x))


@dataclass(frozen=True)
class SuperpositionWeights:
    """Weights of the four basis kernels at time t.

    Any bilinear observable of the balanced superposition decomposes as
    ``w00*K00 + w11*K11 + w_re*Ks + w_im*Ka`` with Ks/Ka the symmetric and
    antisymmetric cross kernels; w00 = w11 = 1/2, w_re = -cos(dE*t/hbar),
    w_im = -sin(dE*t/hbar).
    """

    w00: float
    w11: float
    w_re: float
    w_im: float
    t: float


def superposition_weights(t, cfg: PhysicsConfig) -> SuperpositionWeights:
    phase = cfg.delta_e * t / cfg.hbar
    return SuperpositionWeights(0.5, 0.5, -math.cos(phase), -math.sin(phase), t)


class EigenstatePair:
    """Normalized ground and first excited state of the double well.

    Normalization constants are computed once by adaptive composite
    Gauss-Legendre quadrature on ``NORM_WINDOW`` and taken positive; all
    subsequent evaluations are pure functions.
    """

    def __init__(self, cfg: PhysicsConfig = PhysicsConfig(), rtol=1e-13):
        if abs(cfg.alpha) >= 1.0:
            raise InvalidAsymmetryError(
                f"|alpha| must be < 1 for a normalizable excited state, "
                f"got alpha={cfg.alpha}"
            )
        self.cfg = cfg
        self.quad_x, self.quad_w = self._adaptive_lattice(cfg, rtol)
        i0 = self.integrate(_shape0(self.quad_x, cfg) ** 2)
        g = cfg.alpha + np.tanh(self.quad_x)
        i1 = self.integrate((g * _shape0(self.quad_x, cfg)) ** 2)
        self.norm0 = 1.0 / math.sqrt(i0)
        self.norm1 = 1.0 / math.sqrt(i1)

    @staticmethod
    def _adaptive_lattice(cfg, rtol):
        a, b = NORM_WINDOW
        prev = None
        for panels in (16, 32, 64, 128, 256):
            xg, wg = leggauss(16)
            edges = np.linspace(a, b, panels + 1)
            mid = 0.5 * (edges[1:] + edges[:-1])
            half = 0.5 * (edges[1] - edges[0])
            nodes = (mid[:, None] + half * xg[None, :]).ravel()
            weights = np.broadcast_to(half * wg, (panels, 16)).ravel()
            total = float(np.sum(weights * _shape0(nodes, cfg) ** 2))
            if prev is not None and abs(total - prev) <= rtol * abs(total):
                return nodes, weights
            prev = total
        return nodes, weights

    def integrate(self, values_on_lattice):
        """Quadrature of samples taken on ``self.quad_x``."""
        return float(np.sum(self.quad_w * values_on_lattice))

    @property
    def node(self):
        """Position of the excited state's single node."""
        return -math.atanh(self.cfg.alpha)

    def psi0(self, x):
        return self.norm0 * _shape0(x, self.cfg)

    def psi1(self, x):
        x = np.asarray(x, dtype=float)
        return self.norm1 * (self.cfg.alpha + np.tanh(x)) * _shape0(x, self.cfg)

    def dpsi0(self, x):
        return self.psi0(x) * _dlog_shape0(x, self.cfg)

    def dpsi1(self, x):
        x = np.asarray(x, dtype=float)
        g = self.cfg.alpha + np.tanh(x)
        dg = 1.0 / np.cosh(x) ** 2
        return self.norm1 * _shape0(x, self.cfg) * (dg + g * _dlog_shape0(x, self.cfg))

    def energies(self):
        return self.cfg.e0, self.cfg.e0 + self.cfg.delta_e

    def superposition(self, x, t):
        """Complex amplitude of the balanced superposition at time t."""
        cfg = self.cfg
        ph0 = np.exp(-1j * cfg.e0 * t / cfg.hbar)
        ph1 = np.exp(-1j * (cfg.e0 + cfg.delta_e) * t / cfg.hbar)
        return (self.psi0(x) * ph0 - self.psi1(x) * ph1) / math.sqrt(2.0)

    def position_density(self, x, t):
        """|Psi(x;t)|^2 in closed form (no complex arithmetic)."""
        w = superposition_weights(t, self.cfg)
        p0, p1 = self.psi0(x), self.psi1(x)
        return w.w00 * p0**2 + w.w11 * p1**2 + w.w_re * p0 * p1


def momentum_wavefunction(pair: EigenstatePair, x, p, t, check_norm=True):
    """Momentum representation phi(p;t) of the superposition.

    Discrete Fourier transform of Psi(x;t) on the uniform lattice ``x``
    with kernel exp(-i p x / hbar) / sqrt(2 pi hbar), evaluated exactly at
    the requested uniform ``p`` lattice.

    Raises
    ------
    GridInsufficientError
        If more than 1e-4 of the probability mass leaks outside the
        ``p`` window (the lattice cannot hold the state).
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    hbar = pair.cfg.hbar
    dx = x[1] - x[0]
    psi = pair.superposition(x, t)
    kernel = np.exp(-1j * np.outer(p, x) / hbar)
    phi = kernel @ psi * dx / math.sqrt(2.0 * math.pi * hbar)
    if check_norm:
        dp = p[1] - p[0]
        mass = float(np.sum(np.abs(phi) ** 2) * dp)
        if abs(mass - 1.0) > 1e-4:
            raise GridInsufficientError(
                f"momentum lattice holds only {mass:.6f} of the state; "
                "widen or refine the p window"
            )
    return phi
