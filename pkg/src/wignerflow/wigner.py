"""Wigner basis fields on a phase-space grid and their time assembly.

For the two-state superposition every time-dependent field is a cos/sin
weighted combination of four time-independent real basis fields (the two
diagonal Wigner functions and the real/imaginary parts of the cross
transform).  The fields and their even p-derivative stacks are computed
once per grid by a discrete Fourier transform over the chord coordinate y,
with moment kernels ``(2y/hbar)^(2l)`` supplying the derivatives
spectrally; no finite differencing in p anywhere.

Conventions: the density kernel is ``rho(x+y, x-y) = Psi*(x+y) Psi(x-y)``
with transform kernel ``exp(+2ipy/hbar)``.  This ordering makes the
p-marginal equal |phi(p)|^2 (not |phi(-p)|^2) and the tunnelling current
positive for left-to-right transport; both are asserted in the tests.
Normalization constants of the eigenstates are taken positive.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import PhysicsConfig
from .errors import GridInsufficientError
from .states import EigenstatePair, superposition_weights

DEFAULT_L_MAX = 8
NORM_DEFECT_LIMIT = 1e-4


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Uniform rectangular (x, p) lattice plus the y-lattice of the transform.

    The p-lattice is built symmetric about 0 (exact bitwise mirror pairs)
    whenever ``p_min == -p_max`` so that p -> -p symmetry statements hold
    to rounding.  The default p window is wide enough that less than 1e-6
    of the default state's momentum mass lies outside it.
    """

    x_min: float = -4.0
    x_max: float = 3.5
    p_min: float = -12.0
    p_max: float = 12.0
    nx: int = 512
    np: int = 1536
    y_half_width: float = 4.5
    ny: int = 2048

    def __post_init__(self):
        if self.np % 2 != 0:
            raise ValueError(f"np must be even, got {self.np}")
        if self.x_min >= self.x_max or self.p_min >= self.p_max:
            raise ValueError("empty phase-space window")

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dp(self):
        return (self.p_max - self.p_min) / (self.np - 1)

    @property
    def dy(self):
        return 2.0 * self.y_half_width / (self.ny - 1)

    @property
    def x(self):
        return self.x_min + self.dx * np.arange(self.nx)

    @property
    def p(self):
        if self.p_min == -self.p_max:
            return (np.arange(self.np) - (self.np - 1) / 2.0) * self.dp
        return self.p_min + self.dp * np.arange(self.np)

    @property
    def y(self):
        return (np.arange(self.ny) - (self.ny - 1) / 2.0) * self.dy

    def require_kernel_resolution(self, hbar):
        """The y-lattice must resolve the fastest transform fringe."""
        needed = 4.0 * max(abs(self.p_min), self.p_max) * self.y_half_width / (
            math.pi * hbar
        )
        if self.ny <= needed:
            raise GridInsufficientError(
                f"ny={self.ny} cannot resolve the transform kernel; "
                f"need ny > {needed:.0f}"
            )

    def region_indices(self, region=None):
        """Index slices covering ``region = (x_lo, x_hi, p_lo, p_hi)``."""
        if region is None:
            return slice(0, self.nx), slice(0, self.np)
        x_lo, x_hi, p_lo, p_hi = region
        i0, i1 = np.searchsorted(self.x, (x_lo, x_hi))
        j0, j1 = np.searchsorted(self.p, (p_lo, p_hi))
        return slice(int(i0), int(min(i1 + 1, self.nx))), slice(
            int(j0), int(min(j1 + 1, self.np))
        )


def _pair_kernels(pair, a, b):
    """Density kernels psi_i(a) psi_j(b) for the basis transform."""
    p0a, p0b = pair.psi0(a), pair.psi0(b)
    p1a, p1b = pair.psi1(a), pair.psi1(b)
    return {"00": p0a * p0b, "11": p1a * p1b, "01": p0a * p1b}


class WignerBasisFields:
    """Time-independent basis fields w00, w11, w01_re, w01_im and their
    even p-derivative stacks up to order ``2*l_max``.

    Arrays are indexed ``[x, p]``; stacks are ``[l, x, p]`` with
    ``stack[l] = d^(2l) w / dp^(2l)``.
    """

    def __init__(self, grid, cfg, stacks, source, l_max):
        self.grid = grid
        self.cfg = cfg
        self.d00 = stacks["00"]
        self.d11 = stacks["11"]
        self.d01_re = stacks["re"]
        self.d01_im = stacks["im"]
        self.source = source  # EigenstatePair or single-state callable info
        self.l_max = l_max
        self.norm_defect = self._norm_defect()

    @property
    def w00(self):
        return self.d00[0]

    @property
    def w11(self):
        return self.d11[0]

    @property
    def w01_re(self):
        return self.d01_re[0]

    @property
    def w01_im(self):
        return self.d01_im[0]

    def _norm_defect(self):
        cell = self.grid.dx * self.grid.dp
        return max(
            abs(float(self.w00.sum()) * cell - 1.0),
            abs(float(self.w11.sum()) * cell - 1.0),
        )

    # -- construction -------------------------------------------------

    @classmethod
    def from_pair(cls, grid: PhaseSpaceGrid, pair: EigenstatePair, l_max=DEFAULT_L_MAX):
        """Basis of the balanced two-state superposition."""
        cfg = pair.cfg
        grid.require_kernel_resolution(cfg.hbar)
        y = grid.y
        a = grid.x[:, None] + y[None, :]
        b = grid.x[:, None] - y[None, :]
        kernels = _pair_kernels(pair, a, b)
        arg = np.outer(y, grid.p) * (2.0 / cfg.hbar)
        cosm, sinm = np.cos(arg), np.sin(arg)
        pref = grid.dy / (math.pi * cfg.hbar)
        shape = (l_max + 1, grid.nx, grid.np)
        stacks = {k: np.empty(shape) for k in ("00", "11", "re", "im")}
        k00 = kernels["00"].copy()
        k11 = kernels["11"].copy()
        k01 = kernels["01"].copy()
        moment_step = -((2.0 * y / cfg.hbar) ** 2)
        for l in range(l_max + 1):
            stacks["00"][l] = pref * (k00 @ cosm)
            stacks["11"][l] = pref * (k11 @ cosm)
            stacks["re"][l] = pref * (k01 @ cosm)
            stacks["im"][l] = pref * (k01 @ sinm)
            if l < l_max:
                k00 *= moment_step
                k11 *= moment_step
                k01 *= moment_step
        basis = cls(grid, cfg, stacks, pair, l_max)
        if basis.norm_defect > NORM_DEFECT_LIMIT:
            raise GridInsufficientError(
                f"basis normalization defect {basis.norm_defect:.2e} exceeds "
                f"{NORM_DEFECT_LIMIT:.0e}; enlarge the (x, p) window"
            )
        return basis

    @classmethod
    def from_state(cls, grid: PhaseSpaceGrid, psi, cfg: PhysicsConfig,
                   l_max=DEFAULT_L_MAX):
        """Basis of a single real stationary state (cross fields vanish).

        ``psi`` is a callable real wavefunction, assumed normalized.  The
        assembled W(t) is time independent and its time derivative is
        identically zero.
        """
        grid.require_kernel_resolution(cfg.hbar)
        y = grid.y
        k = psi(grid.x[:, None] + y[None, :]) * psi(grid.x[:, None] - y[None, :])
        arg = np.outer(y, grid.p) * (2.0 / cfg.hbar)
        cosm = np.cos(arg)
        pref = grid.dy / (math.pi * cfg.hbar)
        shape = (l_max + 1, grid.nx, grid.np)
        stacks = {
            "00": np.empty(shape),
            "re": np.zeros(shape),
            "im": np.zeros(shape),
        }
        kw = k.copy()
        moment_step = -((2.0 * y / cfg.hbar) ** 2)
        for l in range(l_max + 1):
            stacks["00"][l] = pref * (kw @ cosm)
            if l < l_max:
                kw *= moment_step
        stacks["11"] = stacks["00"]
        basis = cls(grid, cfg, stacks, psi, l_max)
        if basis.norm_defect > NORM_DEFECT_LIMIT:
            raise GridInsufficientError(
                f"basis normalization defect {basis.norm_defect:.2e} exceeds "
                f"{NORM_DEFECT_LIMIT:.0e}; enlarge the (x, p) window"
            )
        return basis

    # -- time assembly -------------------------------------------------

    def weights(self, t):
        return superposition_weights(t, self.cfg)

    def stack_at(self, t, l):
        """Combined field derivative d^(2l) W(t) / dp^(2l) on the grid."""
        w = self.weights(t)
        return (
            w.w00 * self.d00[l]
            + w.w11 * self.d11[l]
            + w.w_re * self.d01_re[l]
            + w.w_im * self.d01_im[l]
        )

    # -- off-grid evaluation -------------------------------------------

    def _kernels_at(self, x_points):
        y = self.grid.y
        a = np.asarray(x_points, dtype=float)[:, None] + y[None, :]
        b = np.asarray(x_points, dtype=float)[:, None] - y[None, :]
        if isinstance(self.source, EigenstatePair):
            return _pair_kernels(self.source, a, b)
        k = self.source(a) * self.source(b)
        return {"00": k, "11": k, "01": None}

    def column_stacks(self, x_points, l_max=None):
        """Exact basis stacks on the grid's p-lattice at arbitrary x.

        Returns a dict of arrays shaped ``(l_max+1, len(x_points), np)``;
        used for probability currents through off-grid positions.
        """
        l_max = self.l_max if l_max is None else l_max
        y, p = self.grid.y, self.grid.p
        hbar = self.cfg.hbar
        kern = self._kernels_at(np.atleast_1d(x_points))
        arg = np.outer(y, p) * (2.0 / hbar)
        cosm, sinm = np.cos(arg), np.sin(arg)
        pref = self.grid.dy / (math.pi * hbar)
        nq = kern["00"].shape[0]
        out = {k: np.zeros((l_max + 1, nq, self.grid.np)) for k in ("00", "11", "re", "im")}
        k00 = kern["00"].copy()
        k11 = kern["11"].copy()
        k01 = kern["01"].copy() if kern["01"] is not None else None
        step = -((2.0 * y / hbar) ** 2)
        for l in range(l_max + 1):
            out["00"][l] = pref * (k00 @ cosm)
            out["11"][l] = pref * (k11 @ cosm)
            if k01 is not None:
                out["re"][l] = pref * (k01 @ cosm)
                out["im"][l] = pref * (k01 @ sinm)
            if l < l_max:
                k00 *= step
                k11 *= step
                if k01 is not None:
                    k01 *= step
        return out

    def point_stacks(self, x_points, p_points, l_max=None):
        """Exact basis stacks at arbitrary phase-space points.

        Returns a dict of arrays shaped ``(l_max+1, n_points)``.  This is
        the smooth-field evaluator used to polish located stagnation
        points and to audit interpolation error.
        """
        l_max = self.l_max if l_max is None else l_max
        y = self.grid.y
        hbar = self.cfg.hbar
        xq = np.atleast_1d(np.asarray(x_points, dtype=float))
        pq = np.atleast_1d(np.asarray(p_points, dtype=float))
        kern = self._kernels_at(xq)
        arg = (2.0 / hbar) * pq[:, None] * y[None, :]
        cosm, sinm = np.cos(arg), np.sin(arg)
        pref = self.grid.dy / (math.pi * hbar)
        out = {k: np.zeros((l_max + 1, xq.size)) for k in ("00", "11", "re", "im")}
        k00 = kern["00"].copy()
        k11 = kern["11"].copy()
        k01 = kern["01"].copy() if kern["01"] is not None else None
        step = -((2.0 * y / hbar) ** 2)
        for l in range(l_max + 1):
            out["00"][l] = pref * np.einsum("qy,qy->q", k00, cosm)
            out["11"][l] = pref * np.einsum("qy,qy->q", k11, cosm)
            if k01 is not None:
                out["re"][l] = pref * np.einsum("qy,qy->q", k01, cosm)
                out["im"][l] = pref * np.einsum("qy,qy->q", k01, sinm)
            if l < l_max:
                k00 *= step
                k11 *= step
                if k01 is not None:
                    k01 *= step
        return out


def compute_basis_fields(grid: PhaseSpaceGrid, pair: EigenstatePair,
                         l_max=DEFAULT_L_MAX) -> WignerBasisFields:
    """Compute the four basis fields and derivative stacks for ``pair``."""
    return WignerBasisFields.from_pair(grid, pair, l_max=l_max)


def wigner_at(basis: WignerBasisFields, t):
    """W(x, p; t) assembled from the basis fields."""
    return basis.stack_at(t, 0)


def wigner_time_derivative(basis: WignerBasisFields, t):
    """Analytic dW/dt at time t (exactly the derivative of wigner_at)."""
    cfg = basis.cfg
    phase = cfg.delta_e * t / cfg.hbar
    rate = cfg.delta_e / cfg.hbar
    return rate * (
        math.sin(phase) * basis.d01_re[0] - math.cos(phase) * basis.d01_im[0]
    )


def marginals(basis: WignerBasisFields, t):
    """Position and momentum densities: integrals of W over p and x."""
    w = wigner_at(basis, t)
    x_density = w.sum(axis=1) * basis.grid.dp
    p_density = w.sum(axis=0) * basis.grid.dx
    return x_density, p_density
