"""Wigner flow J = (J_x, J_p), continuity checks and marginal currents.

J_x is exactly (p/m) W.  J_p is an infinite series pairing even
p-derivatives of W with odd x-derivatives of V; the prefactors
``(i hbar/2)^(2l)`` are real for even powers, so the evaluation is
all-real.  The series is truncated adaptively per x-column and the
truncation quality is always reported, never assumed: for harmonic or
free potentials it terminates exactly after l = 0, while for cosh-type
wells the terms start decaying only once the factorial beats the
derivative growth.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NotConvergedError
from .wigner import WignerBasisFields, wigner_time_derivative

DEFAULT_EPS_REL = 1e-8


@dataclass
class FlowField:
    """Sampled flow at one time, with series-convergence diagnostics.

    ``terms_used[i]`` is the largest series index l summed for column i.
    ``converged`` means every column met the two-consecutive-small-terms
    stopping rule; ``truncation_defect`` is the largest next-term (or, if
    not converged, last-term) magnitude relative to the column's partial
    sum.  ``jx - (p/m) * w == 0`` holds exactly by construction.
    """

    t: float
    x: np.ndarray
    p: np.ndarray
    w: np.ndarray
    jx: np.ndarray
    jp: np.ndarray
    terms_used: np.ndarray
    converged: bool
    truncation_defect: float
    eps_rel: float
    l_max: int
    basis: WignerBasisFields = field(repr=False)
    potential: object = field(repr=False)
    x_slice: slice = field(repr=False)
    p_slice: slice = field(repr=False)

    @property
    def mass(self):
        return self.basis.cfg.mass

    def magnitude(self):
        return np.hypot(self.jx, self.jp)


def _series_coefficients(hbar, l_max):
    return np.array(
        [
            (-1.0) ** l * (hbar / 2.0) ** (2 * l) / math.factorial(2 * l + 1)
            for l in range(l_max + 1)
        ]
    )


def flow_field(basis: WignerBasisFields, potential, t, l_max=None,
               eps_rel=DEFAULT_EPS_REL, region=None) -> FlowField:
    """Evaluate J on the grid (or a sub-rectangle) at time t.

    The series over l stops, per x-column, as soon as the next term's
    maximum magnitude stays below ``eps_rel`` times the running partial
    sum's maximum for two consecutive l (a single small term may be an
    accidental zero).  Columns that exhaust ``l_max`` without meeting the
    rule mark the field as not converged; this is reported, never raised.
    """
    grid, cfg = basis.grid, basis.cfg
    if l_max is None:
        l_max = basis.l_max
    if l_max > basis.l_max:
        raise ValueError(
            f"l_max={l_max} exceeds the basis derivative stacks ({basis.l_max})"
        )
    xs, ps = grid.region_indices(region)
    x = grid.x[xs]
    p = grid.p[ps]
    weights = basis.weights(t)
    coeff = _series_coefficients(cfg.hbar, l_max)
    vodd = potential.derivatives_upto(x, 2 * l_max + 1)[1::2]

    nl = l_max + 1
    terms = np.empty((nl, x.size, p.size))
    for l in range(nl):
        d2l = (
            weights.w00 * basis.d00[l][xs, ps]
            + weights.w11 * basis.d11[l][xs, ps]
            + weights.w_re * basis.d01_re[l][xs, ps]
            + weights.w_im * basis.d01_im[l][xs, ps]
        )
        terms[l] = (-coeff[l]) * vodd[l][:, None] * d2l
        if l == 0:
            w = d2l

    term_max = np.abs(terms).max(axis=2)              # (nl, nx)
    partial = np.cumsum(terms, axis=0)
    partial_max = np.abs(partial).max(axis=2)         # (nl, nx)

    # smallest L whose two following terms are both below eps * partial max
    floor = np.finfo(float).tiny
    ok = np.zeros((nl, x.size), dtype=bool)
    if nl >= 3:
        ok[: nl - 2] = (
            term_max[1:-1] < eps_rel * np.maximum(partial_max[:-2], floor)
        ) & (term_max[2:] < eps_rel * np.maximum(partial_max[1:-1], floor))
    stopped = ok.any(axis=0)
    l_stop = np.where(stopped, ok.argmax(axis=0), l_max)

    jp = partial[l_stop, np.arange(x.size), :]
    converged = bool(stopped.all())
    global_max = term_max.max(axis=1)
    if not converged and nl > 3 and not np.all(np.diff(global_max[2:]) <= 0):
        warnings.warn(
            "flow series term magnitudes are not monotone for l >= 2 and the "
            "stopping rule was not met; convergence on this state/grid is doubtful",
            stacklevel=2,
        )
    next_l = np.minimum(l_stop + 1, l_max)
    defect_per_col = term_max[next_l, np.arange(x.size)] / np.maximum(
        partial_max[l_stop, np.arange(x.size)], floor
    )
    truncation_defect = float(defect_per_col.max()) if x.size else 0.0

    jx = w * (p / cfg.mass)[None, :]
    return FlowField(
        t=t, x=x, p=p, w=w, jx=jx, jp=jp,
        terms_used=l_stop, converged=converged,
        truncation_defect=truncation_defect,
        eps_rel=eps_rel, l_max=l_max,
        basis=basis, potential=potential, x_slice=xs, p_slice=ps,
    )


def _central4(f, h, axis):
    """4th-order central first derivative; output cropped by 2 on ``axis``."""
    s = [slice(None)] * f.ndim

    def sl(a, b):
        s[axis] = slice(a, b)
        return tuple(s)

    return (
        f[sl(0, -4)] - 8.0 * f[sl(1, -3)] + 8.0 * f[sl(3, -1)] - f[sl(4, None)]
    ) / (12.0 * h)


def continuity_residual(basis: WignerBasisFields, t, flow: FlowField,
                        band=4, w_floor=1e-6):
    """Residual dW/dt + dJ_x/dx + dJ_p/dp and its interior rms.

    Spatial derivatives are 4th-order central differences; a ``band``-point
    frame at the domain edge is excluded, and the rms is taken only where
    |W| exceeds ``w_floor`` times its maximum (elsewhere the statement is
    noise-dominated).  Returns ``(residual, rms)`` with ``residual`` cropped
    by ``band`` points on each side.
    """
    if not flow.converged:
        raise NotConvergedError(
            "continuity residual requires a converged flow field "
            f"(truncation defect {flow.truncation_defect:.2e})"
        )
    dwdt = wigner_time_derivative(basis, t)[flow.x_slice, flow.p_slice]
    dx = flow.x[1] - flow.x[0]
    dp = flow.p[1] - flow.p[0]
    djx = _central4(flow.jx, dx, axis=0)[:, 2:-2]
    djp = _central4(flow.jp, dp, axis=1)[2:-2, :]
    res = dwdt[2:-2, 2:-2] + djx + djp
    c = band - 2
    res = res[c:-c, c:-c] if c > 0 else res
    win = flow.w[band:-band, band:-band]
    mask = np.abs(win) > w_floor * np.abs(flow.w).max()
    rms = float(np.sqrt(np.mean(res[mask] ** 2))) if mask.any() else 0.0
    return res, rms


def probability_current_x(basis: WignerBasisFields, t, x):
    """Marginal current j_x(x;t) = integral of J_x over p.

    Works for arbitrary (off-grid) positions: the needed W column is
    evaluated by an exact transform at ``x``.  Equals the standard
    probability current (hbar/2im)(Psi* dPsi - Psi dPsi*) of the
    superposition; the tests assert this against the closed form.
    """
    scalar = np.ndim(x) == 0
    cols = basis.column_stacks(np.atleast_1d(x), l_max=0)
    weights = basis.weights(t)
    wcol = (
        weights.w00 * cols["00"][0]
        + weights.w11 * cols["11"][0]
        + weights.w_re * cols["re"][0]
        + weights.w_im * cols["im"][0]
    )
    p = basis.grid.p
    out = (wcol @ p) * basis.grid.dp / basis.cfg.mass
    return float(out[0]) if scalar else out


def probability_current_p(basis: WignerBasisFields, potential, t, p,
                          l_max=None):
    """Marginal current j_p(p;t) = integral of J_p over x.

    Evaluated with exact point transforms along the x-lattice at each
    requested momentum (off-grid p allowed).  Consistency with the time
    derivative of the momentum marginal, d|phi(p)|^2/dt = -d j_p/dp, is
    exercised in the tests; no simple closed form exists for j_p itself.
    """
    if l_max is None:
        l_max = basis.l_max
    scalar = np.ndim(p) == 0
    p_arr = np.atleast_1d(np.asarray(p, dtype=float))
    grid, cfg = basis.grid, basis.cfg
    weights = basis.weights(t)
    coeff = _series_coefficients(cfg.hbar, l_max)
    vodd = potential.derivatives_upto(grid.x, 2 * l_max + 1)[1::2]
    out = np.empty(p_arr.size)
    for k, pk in enumerate(p_arr):
        stacks = basis.point_stacks(grid.x, np.full(grid.nx, pk), l_max=l_max)
        d2l = (
            weights.w00 * stacks["00"]
            + weights.w11 * stacks["11"]
            + weights.w_re * stacks["re"]
            + weights.w_im * stacks["im"]
        )
        jp_row = -(coeff[:, None] * vodd * d2l).sum(axis=0)
        out[k] = jp_row.sum() * grid.dx
    return float(out[0]) if scalar else out
