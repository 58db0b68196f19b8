"""One-shot verification suite: invariants and release criteria.

Each check returns a :class:`CheckResult` with the measured value and the
tolerance it was held to, so reports stay auditable.  The suite is shared
between ``wignerflow verify`` and the acceptance tests; grid resolutions
are chosen per check so the whole run stays in the minutes range while
every tolerance is the contractual one.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .config import PhysicsConfig
from .errors import WignerFlowError
from .flow import continuity_residual, flow_field, probability_current_x
from .potential import CatichaPotential, HarmonicPotential, find_extrema
from .states import EigenstatePair, momentum_wavefunction
from .topology import (
    ExactFlow,
    GridFlow,
    WindingLoop,
    charge_ledger,
    classify,
    locate_stagnation_points,
    track,
    winding_number,
)
from .wigner import PhaseSpaceGrid, WignerBasisFields, marginals, wigner_at

LANDMARK_TOL = 0.005
X_LEFT = -2.095
X_RIGHT = 1.514
X_SADDLE = -0.258


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: dict
    tolerance: str
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        vals = ", ".join(f"{k}={v:.3e}" if isinstance(v, float) else f"{k}={v}"
                         for k, v in self.measured.items())
        return f"[{status}] {self.name}: {vals} (tolerance: {self.tolerance}, {self.seconds:.1f}s)"

    def to_dict(self):
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "measured": self.measured,
            "tolerance": self.tolerance,
            "seconds": self.seconds,
        }


class VerifyContext:
    """Lazily built shared objects for the verification checks."""

    def __init__(self, cfg=None, nx=256, npts=768, ny=1024, l_max=18,
                 eps_rel=1e-8, seed=20240901):
        self.cfg = cfg or PhysicsConfig()
        self.nx, self.npts, self.ny = nx, npts, ny
        self.l_max = l_max
        self.eps_rel = eps_rel
        self.rng = np.random.default_rng(seed)
        self._pair = None
        self._basis = None
        self._potential = None
        self._flows = {}

    @property
    def pair(self):
        if self._pair is None:
            self._pair = EigenstatePair(self.cfg)
        return self._pair

    @property
    def potential(self):
        if self._potential is None:
            self._potential = CatichaPotential(
                self.cfg, max_order=max(25, 2 * self.l_max + 1)
            )
        return self._potential

    @property
    def basis(self):
        if self._basis is None:
            grid = PhaseSpaceGrid(nx=self.nx, np=self.npts, ny=self.ny)
            self._basis = WignerBasisFields.from_pair(grid, self.pair, self.l_max)
        return self._basis

    def flow(self, t):
        if t not in self._flows:
            self._flows[t] = flow_field(
                self.basis, self.potential, t, l_max=self.l_max, eps_rel=self.eps_rel
            )
        return self._flows[t]

    @property
    def period(self):
        return self.cfg.period


def _check(name, tolerance):
    def wrap(fn):
        def run(ctx):
            t0 = time.time()
            try:
                passed, measured = fn(ctx)
            except WignerFlowError as exc:
                passed, measured = False, {"error": str(exc)}
            return CheckResult(name, passed, measured, tolerance, time.time() - t0)

        run.check_name = name
        return run

    return wrap


@_check("potential_landmarks", "|x - reference| < 0.005, runtime < 1 s")
def check_landmarks(ctx):
    t0 = time.time()
    ext = find_extrema(-4.0, 3.0, ctx.cfg)
    elapsed = time.time() - t0
    mins = [x for x, k in ext if k == "min"]
    maxs = [x for x, k in ext if k == "max"]
    ok = (
        len(mins) == 2
        and len(maxs) == 1
        and abs(mins[0] - X_LEFT) < LANDMARK_TOL
        and abs(mins[1] - X_RIGHT) < LANDMARK_TOL
        and abs(maxs[0] - X_SADDLE) < LANDMARK_TOL
        and elapsed < 1.0
    )
    return ok, {
        "x_left": mins[0] if mins else math.nan,
        "x_right": mins[-1] if mins else math.nan,
        "x_saddle": maxs[0] if maxs else math.nan,
        "runtime_s": elapsed,
    }


@_check("eigenstate_orthonormality", "norms within 1e-10, overlap within 1e-8")
def check_orthonormality(ctx):
    pair = ctx.pair
    n0 = pair.integrate(pair.psi0(pair.quad_x) ** 2)
    n1 = pair.integrate(pair.psi1(pair.quad_x) ** 2)
    ov = pair.integrate(pair.psi0(pair.quad_x) * pair.psi1(pair.quad_x))
    ok = abs(n0 - 1) < 1e-10 and abs(n1 - 1) < 1e-10 and abs(ov) < 1e-8
    return ok, {"norm0_defect": abs(n0 - 1), "norm1_defect": abs(n1 - 1),
                "overlap": abs(ov)}


@_check("wigner_normalization", "|integral - 1| < 1e-6 at 20 times")
def check_normalization(ctx):
    basis = ctx.basis
    cell = basis.grid.dx * basis.grid.dp
    worst = 0.0
    for t in ctx.rng.uniform(0.0, ctx.period, 20):
        worst = max(worst, abs(float(wigner_at(basis, t).sum()) * cell - 1.0))
    return worst < 1e-6, {"worst_defect": worst}


@_check("x_marginal_vs_density", "max |diff| < 1e-6")
def check_x_marginal(ctx):
    basis = ctx.basis
    worst = 0.0
    for t in (0.0, ctx.period / 8, ctx.period / 4):
        xd, _ = marginals(basis, t)
        worst = max(worst, float(np.abs(xd - ctx.pair.position_density(basis.grid.x, t)).max()))
    return worst < 1e-6, {"worst_diff": worst}


@_check("p_marginal_vs_momentum_density", "max |diff| < 1e-4")
def check_p_marginal(ctx):
    basis = ctx.basis
    grid = basis.grid
    worst = 0.0
    for t in (0.0, ctx.period / 4):
        _, pd = marginals(basis, t)
        phi = momentum_wavefunction(ctx.pair, grid.x, grid.p, t)
        worst = max(worst, float(np.abs(pd - np.abs(phi) ** 2).max()))
    return worst < 1e-4, {"worst_diff": worst}


@_check("marginal_mass_swap", "left/right well masses interchange within 2%")
def check_mass_swap(ctx):
    basis = ctx.basis
    x, dp = basis.grid.x, basis.grid.dx
    saddle = [q for q, k in find_extrema(-1.0, 0.5, ctx.cfg) if k == "max"][0]
    left = x < saddle
    xd0, _ = marginals(basis, 0.0)
    xdh, _ = marginals(basis, ctx.period / 2)
    l0, r0 = float(xd0[left].sum() * dp), float(xd0[~left].sum() * dp)
    lh, rh = float(xdh[left].sum() * dp), float(xdh[~left].sum() * dp)
    swap = max(abs(l0 - rh), abs(r0 - lh))
    return swap < 0.02, {"left_t0": l0, "right_t0": r0,
                         "left_half": lh, "right_half": rh, "swap_defect": swap}


@_check("eigenstate_flow_symmetry", "relative asymmetry < 1e-12")
def check_eigenstate_symmetry(ctx):
    grid = ctx.basis.grid
    worst = 0.0
    for which in ("psi0", "psi1"):
        psi = getattr(ctx.pair, which)
        b = WignerBasisFields.from_state(grid, psi, ctx.cfg, l_max=ctx.l_max)
        fl = flow_field(b, ctx.potential, 0.3, l_max=ctx.l_max)
        asym_x = np.abs(fl.jx + fl.jx[:, ::-1]).max() / np.abs(fl.jx).max()
        asym_p = np.abs(fl.jp - fl.jp[:, ::-1]).max() / np.abs(fl.jp).max()
        worst = max(worst, float(asym_x), float(asym_p))
    return worst < 1e-12, {"worst_asymmetry": worst}


@_check("harmonic_degenerate_oracle", "J_p + W dV/dx = 0 to machine, series ends at l=0")
def check_harmonic(ctx):
    cfg = ctx.cfg
    pot = HarmonicPotential(mass=cfg.mass, omega=1.0)
    width = math.sqrt(cfg.hbar / (cfg.mass * pot.omega))
    norm = (cfg.mass * pot.omega / (math.pi * cfg.hbar)) ** 0.25

    def gauss(x):
        return norm * np.exp(-0.5 * (np.asarray(x) / width) ** 2)

    grid = PhaseSpaceGrid(x_min=-6.0, x_max=6.0, p_min=-6.0, p_max=6.0,
                          nx=128, np=128, ny=512, y_half_width=6.0)
    b = WignerBasisFields.from_state(grid, gauss, cfg, l_max=6)
    fl = flow_field(b, pot, 0.0, l_max=6)
    resid = np.abs(fl.jp + fl.w * pot.derivative(grid.x, 1)[:, None]).max()
    scale = np.abs(fl.jp).max()
    ok = resid <= 1e-14 * scale and int(fl.terms_used.max()) == 0 and fl.converged
    return ok, {"identity_residual": float(resid / scale),
                "max_terms_used": int(fl.terms_used.max())}


@_check("continuity_convergence", ">= 8x rms reduction per grid doubling")
def check_continuity(ctx):
    rms = []
    for nx, npts, ny in ((128, 384, 1024), (256, 768, 1024)):
        grid = PhaseSpaceGrid(nx=nx, np=npts, ny=ny)
        b = WignerBasisFields.from_pair(grid, ctx.pair, ctx.l_max)
        fl = flow_field(b, ctx.potential, ctx.period / 4, l_max=ctx.l_max)
        _, r = continuity_residual(b, ctx.period / 4, fl)
        rms.append(r)
    ratio = rms[0] / rms[1]
    return ratio >= 8.0, {"rms_coarse": rms[0], "rms_fine": rms[1], "ratio": ratio}


@_check("tunnelling_current_fit", "residual < 1% of amplitude, period within 0.1%")
def check_current(ctx):
    from scipy.optimize import curve_fit

    saddle = [x for x, k in find_extrema(-1.0, 0.5, ctx.cfg) if k == "max"][0]
    T = ctx.period
    ts = np.linspace(0.0, T, 64)
    cur = np.array([probability_current_x(ctx.basis, t, saddle) for t in ts])

    def model(t, amp, period, phase):
        return amp * np.sin(2 * np.pi * t / period + phase)

    popt, _ = curve_fit(model, ts, cur, p0=(cur.max(), T, 0.0))
    amp, period_fit, phase = popt
    resid = np.abs(cur - model(ts, *popt)).max() / abs(amp)
    period_err = abs(period_fit - T) / T
    phase = math.remainder(phase + (math.pi if amp < 0 else 0.0), 2 * math.pi)
    ok = resid < 0.01 and period_err < 1e-3 and abs(phase) < 0.02 and amp > 0
    return ok, {"amplitude": float(abs(amp)), "fit_residual": float(resid),
                "period_error": float(period_err), "phase": float(phase)}


@_check("quantum_displacement", "well vortices strictly inside the classical minima")
def check_displacement(ctx):
    fl = ctx.flow(ctx.period / 4)
    ext = find_extrema(-4.0, 3.0, ctx.cfg)
    x_l = [x for x, k in ext if k == "min"][0]
    x_r = [x for x, k in ext if k == "min"][1]
    pts = locate_stagnation_points(fl, region=(x_l - 0.05, x_r + 0.05, -0.5, 0.5))
    vortices = [q for q in pts if q.winding == 1 and abs(q.p) < 0.2]
    if not vortices:
        return False, {"n_vortices": 0}
    left = min(vortices, key=lambda q: q.x)
    right = max(vortices, key=lambda q: q.x)
    margin_l = left.x - x_l
    margin_r = x_r - right.x
    ok = margin_l > 0 and margin_r > 0 and left is not right
    return ok, {"left_margin": float(margin_l), "right_margin": float(margin_r)}


@_check("vortex_string", ">= 3 alternating-handedness vortices near the barrier top")
def check_string(ctx):
    fl = ctx.flow(ctx.period / 4)
    saddle = [x for x, k in find_extrema(-1.0, 0.5, ctx.cfg) if k == "max"][0]
    pts = locate_stagnation_points(fl, region=(saddle - 0.3, saddle + 0.3, -2.6, 2.6))
    ex = ExactFlow.from_flow(fl)
    string = sorted((q for q in pts if q.winding == 1), key=lambda q: q.p)
    kinds = [classify(q, ex) for q in string]
    alternates = all(a != b for a, b in zip(kinds, kinds[1:]))
    spread = string[-1].p - string[0].p if len(string) >= 2 else 0.0
    ok = len(string) >= 3 and alternates and spread > 0.5
    return ok, {"n_vortices": len(string), "alternating": alternates,
                "p_spread": float(spread)}


@_check("stagnation_pinning", "|W| < 1e-6 max|W| at every off-axis stagnation point")
def check_pinning(ctx):
    fl = ctx.flow(ctx.period / 4)
    pts = locate_stagnation_points(fl, region=(-2.3, 1.7, -2.6, 2.6))
    ex = ExactFlow.from_flow(fl)
    wmax = float(np.abs(fl.w).max())
    worst = 0.0
    for q in pts:
        if abs(q.p) < 1e-3:
            continue
        wval = abs(float(ex.wigner(np.array([q.x]), np.array([q.p]))[0]))
        worst = max(worst, wval / wmax)
    return worst < 1e-6, {"worst_relative_w": worst}


@_check("winding_integrality", "|raw/2pi - nearest int| < 0.05 on 100 random loops")
def check_winding_integrality(ctx):
    from .errors import LoopThroughZeroError, NonIntegerWindingError

    fl = ctx.flow(ctx.period / 4)
    gf = GridFlow(fl)
    accepted = 0
    attempts = 0
    while accepted < 100 and attempts < 1000:
        attempts += 1
        cx = ctx.rng.uniform(-2.2, 1.6)
        cp = ctx.rng.uniform(-2.4, 2.4)
        r = ctx.rng.uniform(0.05, 0.6)
        loop = WindingLoop.circle((cx, cp), r, n=24)
        try:
            winding_number(loop, gf)  # raises unless near-integer after refinement
        except LoopThroughZeroError:
            continue  # inadmissible contour, draw another
        except NonIntegerWindingError as exc:
            return False, {"loops_verified": accepted, "failure": str(exc)}
        accepted += 1
    return accepted >= 100, {"loops_verified": accepted}


@_check("merger_charge_conservation", "summed winding equal across every merge/split")
def check_merger(ctx):
    T = ctx.period
    res = track(ctx.basis, ctx.potential, 0.05 * T, 0.13 * T, T / 500,
                region=(-2.3, 1.7, -2.6, 2.6), l_max=ctx.l_max)
    merges = [e for e in res.events if e.kind in ("merge", "split")]
    violations = [e for e in merges if not e.conserves_charge()]
    ok = len(merges) >= 1 and not violations
    measured = {"n_events": len(merges), "n_violations": len(violations)}
    if merges:
        ev = merges[0]
        loop = WindingLoop.ellipse(
            (float(np.mean([q.x for q in ev.participants_before])), 0.0), 0.34, 0.20
        )
        times = np.linspace(0.05 * T, min(0.105 * T, ev.time_bracket[1] + 0.01 * T), 8)
        ledger = charge_ledger(loop, times, lambda t: GridFlow(ctx.flow(t)))
        measured["torus_loop_windings"] = [w for w in ledger.windings]
        ok = ok and ledger.constant and set(ledger.windings) <= {0}
    return ok, measured


ALL_CHECKS = [
    check_landmarks,
    check_orthonormality,
    check_normalization,
    check_x_marginal,
    check_p_marginal,
    check_mass_swap,
    check_eigenstate_symmetry,
    check_harmonic,
    check_continuity,
    check_current,
    check_displacement,
    check_string,
    check_pinning,
    check_winding_integrality,
    check_merger,
]


def run_suite(ctx=None, checks=None):
    ctx = ctx or VerifyContext()
    results = [fn(ctx) for fn in (checks or ALL_CHECKS)]
    return results
