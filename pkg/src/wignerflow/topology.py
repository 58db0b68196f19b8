"""Stagnation points of Wigner flow: location, winding, tracking, charges.

Location uses a Poincare-index scan: the boundary winding of every grid
plaquette is computed from wrapped angle differences, so no nondegenerate
zero inside the grid can be missed at grid resolution, and each zero comes
with its topological charge for free.  Seeded cells are refined by
recursive subdivision on the cell's bilinear interpolant and finally
polished by Newton iteration on the exact (transform-evaluated) flow, so
reported locations are limited by the smooth field itself rather than by
interpolation bias.

Winding numbers along user loops accumulate wrapped angle increments with
adaptive sample refinement; they are rejected rather than rounded when the
accumulated total is not close to an integer.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .flow import FlowField, flow_field
from .errors import LoopThroughZeroError, NonIntegerWindingError

VORTEX_CW = "vortex_cw"
VORTEX_CCW = "vortex_ccw"
SEPARATRIX_CROSSING = "separatrix_crossing"
SADDLE_P_ORIENTED = "saddle_p_oriented"
UNRESOLVED = "unresolved"

DEFAULT_REFINE_TOL = 1e-4
DEFAULT_SUPPORT_FLOOR = 1e-12
ZERO_THRESHOLD_FRACTION = 1e-3


@dataclass
class StagnationPoint:
    x: float
    p: float
    t: float
    winding: int
    kind: str = UNRESOLVED
    refinement_radius: float = DEFAULT_REFINE_TOL

    def to_dict(self):
        return {
            "x": self.x,
            "p": self.p,
            "t": self.t,
            "winding": self.winding,
            "kind": self.kind,
            "refinement_radius": self.refinement_radius,
        }


@dataclass
class TopologyEvent:
    """A merge/split/boundary-crossing of stagnation points.

    For merge and split events the summed winding before and after must
    agree (topological-charge conservation); crossings of the tracked
    region's boundary are recorded as ``loop_crossing`` and carry no
    conservation claim.
    """

    time_bracket: tuple
    kind: str  # "merge" | "split" | "loop_crossing"
    participants_before: list
    participants_after: list

    @property
    def charge_before(self):
        return sum(pt.winding for pt in self.participants_before)

    @property
    def charge_after(self):
        return sum(pt.winding for pt in self.participants_after)

    def conserves_charge(self):
        return self.charge_before == self.charge_after

    def to_dict(self):
        return {
            "time_bracket": list(self.time_bracket),
            "kind": self.kind,
            "participants_before": [q.to_dict() for q in self.participants_before],
            "participants_after": [q.to_dict() for q in self.participants_after],
            "charge_before": self.charge_before,
            "charge_after": self.charge_after,
        }


# ---------------------------------------------------------------------------
# flow evaluators


class GridFlow:
    """Bilinear-interpolating evaluator over a sampled FlowField."""

    def __init__(self, flow: FlowField):
        self.flow = flow
        self.x = flow.x
        self.p = flow.p
        self.jx = flow.jx
        self.jp = flow.jp
        self.median_magnitude = float(np.median(flow.magnitude()))

    @property
    def zero_threshold(self):
        return ZERO_THRESHOLD_FRACTION * self.median_magnitude

    def vector(self, xq, pq):
        xq = np.asarray(xq, dtype=float)
        pq = np.asarray(pq, dtype=float)
        dx = self.x[1] - self.x[0]
        dp = self.p[1] - self.p[0]
        fi = np.clip((xq - self.x[0]) / dx, 0.0, self.x.size - 1.0 - 1e-12)
        fj = np.clip((pq - self.p[0]) / dp, 0.0, self.p.size - 1.0 - 1e-12)
        i = fi.astype(int)
        j = fj.astype(int)
        u = fi - i
        v = fj - j

        def lerp(f):
            return (
                f[i, j] * (1 - u) * (1 - v)
                + f[i + 1, j] * u * (1 - v)
                + f[i, j + 1] * (1 - u) * v
                + f[i + 1, j + 1] * u * v
            )

        return lerp(self.jx), lerp(self.jp)


class ExactFlow:
    """Evaluator computing J at arbitrary points by exact transforms."""

    def __init__(self, basis, potential, t, l_max=None, median_magnitude=None):
        from .flow import _series_coefficients

        self.basis = basis
        self.potential = potential
        self.t = t
        self.l_max = basis.l_max if l_max is None else l_max
        self._coeff = _series_coefficients(basis.cfg.hbar, self.l_max)
        self.median_magnitude = median_magnitude

    @classmethod
    def from_flow(cls, flow: FlowField):
        med = float(np.median(flow.magnitude()))
        return cls(flow.basis, flow.potential, flow.t, flow.l_max, med)

    @property
    def zero_threshold(self):
        if self.median_magnitude is None:
            raise ValueError("no grid median available for zero threshold")
        return ZERO_THRESHOLD_FRACTION * self.median_magnitude

    def vector(self, xq, pq):
        xq = np.atleast_1d(np.asarray(xq, dtype=float))
        pq = np.atleast_1d(np.asarray(pq, dtype=float))
        basis, cfg = self.basis, self.basis.cfg
        stacks = basis.point_stacks(xq, pq, l_max=self.l_max)
        wts = basis.weights(self.t)
        d2l = (
            wts.w00 * stacks["00"]
            + wts.w11 * stacks["11"]
            + wts.w_re * stacks["re"]
            + wts.w_im * stacks["im"]
        )
        vodd = self.potential.derivatives_upto(xq, 2 * self.l_max + 1)[1::2]
        jp = -(self._coeff[:, None] * vodd * d2l).sum(axis=0)
        jx = pq * d2l[0] / cfg.mass
        return jx, jp

    def wigner(self, xq, pq):
        """Exact W at arbitrary points (for pinning diagnostics)."""
        stacks = self.basis.point_stacks(xq, pq, l_max=0)
        wts = self.basis.weights(self.t)
        return (
            wts.w00 * stacks["00"][0]
            + wts.w11 * stacks["11"][0]
            + wts.w_re * stacks["re"][0]
            + wts.w_im * stacks["im"][0]
        )


# ---------------------------------------------------------------------------
# winding numbers


def _wrap(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi


@dataclass
class WindingLoop:
    """A simple closed polygon in (x, p) used as integration contour."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("loop needs at least 3 (x, p) vertices")
        if np.allclose(v[0], v[-1]):
            v = v[:-1]
        self.vertices = v
        if self._self_intersects():
            raise ValueError("loop polygon is self-intersecting")

    @classmethod
    def circle(cls, center, radius, n=32):
        ang = 2.0 * np.pi * np.arange(n) / n
        return cls(
            np.column_stack(
                [center[0] + radius * np.cos(ang), center[1] + radius * np.sin(ang)]
            )
        )

    @classmethod
    def ellipse(cls, center, semi_x, semi_p, n=48):
        ang = 2.0 * np.pi * np.arange(n) / n
        return cls(
            np.column_stack(
                [center[0] + semi_x * np.cos(ang), center[1] + semi_p * np.sin(ang)]
            )
        )

    def _self_intersects(self):
        v = self.vertices
        n = len(v)
        segs = [(v[k], v[(k + 1) % n]) for k in range(n)]

        def crosses(a, b, c, d):
            def orient(p, q, r):
                return np.sign(
                    (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
                )

            return (
                orient(a, b, c) * orient(a, b, d) < 0
                and orient(c, d, a) * orient(c, d, b) < 0
            )

        for i in range(n):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                if crosses(*segs[i], *segs[j]):
                    return True
        return False


def winding_number(loop: WindingLoop, evaluator, min_samples=64,
                   max_samples=65536, integer_tol=0.05):
    """Winding of the flow direction angle around ``loop``.

    Accumulates wrapped increments of atan2(J_p, J_x) along the boundary,
    refining the sampling until every step is below pi/2.  The loop must
    stay clear of stagnation points: all samples need |J| above ten times
    the evaluator's zero threshold.

    Raises
    ------
    LoopThroughZeroError
        If any boundary sample comes too close to a flow zero.
    NonIntegerWindingError
        If refinement cannot produce a near-integer total.
    """
    verts = loop.vertices
    per_edge = max(2, int(np.ceil(min_samples / len(verts))))
    ts = np.arange(per_edge) / per_edge
    pts = np.concatenate(
        [
            v0[None, :] + ts[:, None] * (v1 - v0)[None, :]
            for v0, v1 in zip(verts, np.roll(verts, -1, axis=0))
        ]
    )
    while True:
        jx, jp = evaluator.vector(pts[:, 0], pts[:, 1])
        mag = np.hypot(jx, jp)
        if mag.min() <= 10.0 * evaluator.zero_threshold:
            k = int(mag.argmin())
            raise LoopThroughZeroError(
                f"loop passes |J|={mag.min():.2e} at "
                f"({pts[k, 0]:.4f}, {pts[k, 1]:.4f}); move the contour"
            )
        theta = np.arctan2(jp, jx)
        steps = _wrap(np.diff(np.append(theta, theta[0])))
        bad = np.abs(steps) >= 0.5 * np.pi
        if not bad.any():
            total = steps.sum() / (2.0 * np.pi)
            w = int(np.rint(total))
            if abs(total - w) > integer_tol:
                raise NonIntegerWindingError(
                    f"winding total {total:.4f} not within {integer_tol} of an integer"
                )
            return w
        if len(pts) * 2 > max_samples:
            raise NonIntegerWindingError(
                f"sampling refinement exceeded {max_samples} boundary points"
            )
        mids = 0.5 * (pts + np.roll(pts, -1, axis=0))
        doubled = np.empty((2 * len(pts), 2))
        doubled[0::2] = pts
        doubled[1::2] = mids
        pts = doubled


# ---------------------------------------------------------------------------
# location by Poincare-index scan


def _plaquette_windings(jx, jp):
    theta = np.arctan2(jp, jx)
    total = (
        _wrap(theta[1:, :-1] - theta[:-1, :-1])
        + _wrap(theta[1:, 1:] - theta[1:, :-1])
        + _wrap(theta[:-1, 1:] - theta[1:, 1:])
        + _wrap(theta[:-1, :-1] - theta[:-1, 1:])
    )
    return np.rint(total / (2.0 * np.pi)).astype(int)


class _CellPatch:
    """Bilinear model of J on one grid cell, in unit cell coordinates."""

    def __init__(self, jx_corners, jp_corners, x0, p0, dx, dp):
        self.cx = self._coeffs(jx_corners)
        self.cp = self._coeffs(jp_corners)
        self.x0, self.p0, self.dx, self.dp = x0, p0, dx, dp

    @staticmethod
    def _coeffs(c):
        # f(u,v) = a + b u + c v + d u v from corner values
        (f00, f01), (f10, f11) = c
        return np.array([f00, f10 - f00, f01 - f00, f11 - f10 - f01 + f00])

    def eval(self, u, v):
        a, b, c, d = self.cx
        jx = a + b * u + c * v + d * u * v
        a, b, c, d = self.cp
        jp = a + b * u + c * v + d * u * v
        return jx, jp

    def boundary_winding(self, u0, u1, v0, v1, samples=8):
        ts = np.arange(samples) / samples
        us = np.concatenate(
            [u0 + (u1 - u0) * ts, np.full(samples, u1), u1 - (u1 - u0) * ts,
             np.full(samples, u0)]
        )
        vs = np.concatenate(
            [np.full(samples, v0), v0 + (v1 - v0) * ts, np.full(samples, v1),
             v1 - (v1 - v0) * ts]
        )
        while True:
            jx, jp = self.eval(us, vs)
            theta = np.arctan2(jp, jx)
            steps = _wrap(np.diff(np.append(theta, theta[0])))
            if not (np.abs(steps) >= 0.5 * np.pi).any() or len(us) > 4096:
                return int(np.rint(steps.sum() / (2.0 * np.pi)))
            mid_u = 0.5 * (us + np.roll(us, -1))
            mid_v = 0.5 * (vs + np.roll(vs, -1))
            us = np.column_stack([us, mid_u]).ravel()
            vs = np.column_stack([vs, mid_v]).ravel()

    def newton(self, u, v, iters=12):
        for _ in range(iters):
            jx, jp = self.eval(u, v)
            axx = self.cx[1] + self.cx[3] * v
            axp = self.cx[2] + self.cx[3] * u
            apx = self.cp[1] + self.cp[3] * v
            app = self.cp[2] + self.cp[3] * u
            det = axx * app - axp * apx
            if det == 0.0:
                break
            du = (-jx * app + jp * axp) / det
            dv = (-jp * axx + jx * apx) / det
            u = min(max(u + du, 0.0), 1.0)
            v = min(max(v + dv, 0.0), 1.0)
        return u, v

    def subdivide_zeros(self, tol_u, tol_v):
        """All (u, v, winding) zeros certified by recursive subdivision."""
        found = []
        stack = [(0.0, 1.0, 0.0, 1.0, None)]
        while stack:
            u0, u1, v0, v1, w = stack.pop()
            if w is None:
                w = self.boundary_winding(u0, u1, v0, v1)
            if w == 0:
                continue
            if (u1 - u0) < tol_u and (v1 - v0) < tol_v:
                uc, vc = self.newton(0.5 * (u0 + u1), 0.5 * (v0 + v1))
                found.append((uc, vc, w, 0.5 * (u1 - u0), 0.5 * (v1 - v0)))
                continue
            um, vm = 0.5 * (u0 + u1), 0.5 * (v0 + v1)
            subs = [
                (u0, um, v0, vm),
                (um, u1, v0, vm),
                (u0, um, vm, v1),
                (um, u1, vm, v1),
            ]
            ws = [self.boundary_winding(*s) for s in subs]
            if sum(ws) != w:
                # zero sits on a subdivision line; nudge by reporting center
                uc, vc = self.newton(um, vm)
                found.append((uc, vc, w, 0.5 * (u1 - u0), 0.5 * (v1 - v0)))
                continue
            for s, wk in zip(subs, ws):
                if wk != 0:
                    stack.append((*s, wk))
        return found


def locate_stagnation_points(flow: FlowField, region=None,
                             refine_tol=DEFAULT_REFINE_TOL,
                             support_floor=DEFAULT_SUPPORT_FLOOR,
                             polish=True):
    """Find all flow zeros in ``region`` with their winding numbers.

    Every grid plaquette with nonzero boundary winding is refined by
    subdivision on its bilinear interpolant to ``refine_tol`` and (by
    default) polished by Newton iteration on the exact flow.  Cells whose
    neighborhood flow magnitude is below ``support_floor`` times the
    global maximum are skipped: there the field is numerical noise and
    angle topology is meaningless.  Degenerate cells (|winding| > 1 after
    subdivision) are returned with kind ``unresolved``, never dropped.
    """
    x, p = flow.x, flow.p
    dx, dp = x[1] - x[0], p[1] - p[0]
    if region is not None:
        x_lo, x_hi, p_lo, p_hi = region
    else:
        x_lo, x_hi, p_lo, p_hi = x[0], x[-1], p[0], p[-1]

    w_cells = _plaquette_windings(flow.jx, flow.jp)
    mag = flow.magnitude()
    support = ndimage.maximum_filter(mag, size=7)[:-1, :-1]
    mask = (w_cells != 0) & (support > support_floor * mag.max())
    ii, jj = np.nonzero(mask)

    raw = []
    for i, j in zip(ii, jj):
        if not (x_lo <= x[i] + 0.5 * dx <= x_hi and p_lo <= p[j] + 0.5 * dp <= p_hi):
            continue
        patch = _CellPatch(
            ((flow.jx[i, j], flow.jx[i, j + 1]), (flow.jx[i + 1, j], flow.jx[i + 1, j + 1])),
            ((flow.jp[i, j], flow.jp[i, j + 1]), (flow.jp[i + 1, j], flow.jp[i + 1, j + 1])),
            x[i], p[j], dx, dp,
        )
        for uc, vc, w, hu, hv in patch.subdivide_zeros(refine_tol / dx, refine_tol / dp):
            raw.append(
                StagnationPoint(
                    x=x[i] + uc * dx,
                    p=p[j] + vc * dp,
                    t=flow.t,
                    winding=int(w),
                    kind=UNRESOLVED if abs(w) > 1 else "",
                    refinement_radius=float(np.hypot(hu * dx, hv * dp)),
                )
            )

    if polish and raw:
        exact = ExactFlow.from_flow(flow)
        _polish_points(raw, exact, max_step=2.0 * max(dx, dp))

    raw.sort(key=lambda q: (q.x, q.p))
    points = []
    for q in raw:
        dup = next(
            (
                r
                for r in points
                if np.hypot(r.x - q.x, r.p - q.p)
                < 2.0 * max(q.refinement_radius, r.refinement_radius)
            ),
            None,
        )
        if dup is None:
            points.append(q)
        elif dup.winding != q.winding:
            dup.winding += q.winding
            dup.kind = UNRESOLVED
    return points


def _polish_points(points, exact: ExactFlow, max_step, iters=6):
    """Newton-polish point locations on the exact flow (batched)."""
    if not points:
        return
    xq = np.array([q.x for q in points])
    pq = np.array([q.p for q in points])
    x0, p0 = xq.copy(), pq.copy()
    h = max_step / 16.0
    for _ in range(iters):
        n = xq.size
        bx = np.concatenate([xq, xq + h, xq - h, xq, xq])
        bp = np.concatenate([pq, pq, pq, pq + h, pq - h])
        jx, jp = exact.vector(bx, bp)
        jx0, jp0 = jx[:n], jp[:n]
        djx_dx = (jx[n : 2 * n] - jx[2 * n : 3 * n]) / (2 * h)
        djp_dx = (jp[n : 2 * n] - jp[2 * n : 3 * n]) / (2 * h)
        djx_dp = (jx[3 * n : 4 * n] - jx[4 * n :]) / (2 * h)
        djp_dp = (jp[3 * n : 4 * n] - jp[4 * n :]) / (2 * h)
        det = djx_dx * djp_dp - djx_dp * djp_dx
        good = det != 0.0
        step_x = np.where(good, (-jx0 * djp_dp + jp0 * djx_dp) / np.where(good, det, 1.0), 0.0)
        step_p = np.where(good, (-jp0 * djx_dx + jx0 * djp_dx) / np.where(good, det, 1.0), 0.0)
        xq = xq + np.clip(step_x, -max_step, max_step)
        pq = pq + np.clip(step_p, -max_step, max_step)
    moved = np.hypot(xq - x0, pq - p0)
    for k, q in enumerate(points):
        if moved[k] <= max_step:
            q.x = float(xq[k])
            q.p = float(pq[k])


# ---------------------------------------------------------------------------
# classification


def classify(point: StagnationPoint, evaluator, ring_radius=None, fd_step=None):
    """Assign a flow-pattern kind to a located stagnation point.

    Winding +1: the rotation sense comes from the sign of the circulation
    (line integral of J along a small circle); clockwise in (x, p) means
    negative circulation.  Winding -1: the outflow axis is the positive-
    eigenvalue eigenvector of the local Jacobian; within 45 degrees of the
    p-axis classifies as p-oriented saddle, otherwise as a separatrix
    crossing.  Anything else, or an ill-conditioned Jacobian, stays
    unresolved.
    """
    if ring_radius is None:
        ring_radius = 40.0 * point.refinement_radius + 1e-3
    if point.winding == 1:
        ang = 2.0 * np.pi * np.arange(96) / 96
        xs = point.x + ring_radius * np.cos(ang)
        ps = point.p + ring_radius * np.sin(ang)
        jx, jp = evaluator.vector(xs, ps)
        circ = float(
            np.sum(-jx * np.sin(ang) + jp * np.cos(ang)) * ring_radius
            * (2.0 * np.pi / 96)
        )
        kind = VORTEX_CCW if circ > 0 else VORTEX_CW
        point.kind = kind
        return kind
    if point.winding == -1:
        h = fd_step if fd_step is not None else ring_radius
        xs = np.array([point.x + h, point.x - h, point.x, point.x])
        ps = np.array([point.p, point.p, point.p + h, point.p - h])
        jx, jp = evaluator.vector(xs, ps)
        jac = np.array(
            [
                [(jx[0] - jx[1]) / (2 * h), (jx[2] - jx[3]) / (2 * h)],
                [(jp[0] - jp[1]) / (2 * h), (jp[2] - jp[3]) / (2 * h)],
            ]
        )
        eigvals, eigvecs = np.linalg.eig(jac)
        if np.iscomplexobj(eigvals) and np.abs(eigvals.imag).max() > 1e-9 * np.abs(
            eigvals
        ).max():
            point.kind = UNRESOLVED
            return UNRESOLVED
        eigvals = eigvals.real
        eigvecs = eigvecs.real
        if eigvals.max() <= 0 or not np.isfinite(eigvals).all():
            point.kind = UNRESOLVED
            return UNRESOLVED
        out_axis = eigvecs[:, int(eigvals.argmax())]
        angle_from_p_axis = math.degrees(
            math.acos(min(1.0, abs(out_axis[1]) / np.hypot(*out_axis)))
        )
        kind = SADDLE_P_ORIENTED if angle_from_p_axis <= 45.0 else SEPARATRIX_CROSSING
        point.kind = kind
        return kind
    point.kind = UNRESOLVED
    return UNRESOLVED


# ---------------------------------------------------------------------------
# tracking through time


@dataclass
class TrackResult:
    times: np.ndarray
    frames: list
    segments: list
    events: list
    ambiguities: list = field(default_factory=list)


def _match_frames(prev_pts, next_pts, gates):
    """Greedy minimal-distance matching under per-point gates."""
    pairs = []
    if prev_pts and next_pts:
        d = np.array(
            [[np.hypot(a.x - b.x, a.p - b.p) for b in next_pts] for a in prev_pts]
        )
        cand = [
            (d[i, j], i, j)
            for i in range(len(prev_pts))
            for j in range(len(next_pts))
            if d[i, j] <= gates[i]
        ]
        cand.sort()
        used_i, used_j = set(), set()
        for dist, i, j in cand:
            if i in used_i or j in used_j:
                continue
            used_i.add(i)
            used_j.add(j)
            pairs.append((i, j, dist))
    matched_i = {i for i, _, _ in pairs}
    matched_j = {j for _, j, _ in pairs}
    lost = [i for i in range(len(prev_pts)) if i not in matched_i]
    born = [j for j in range(len(next_pts)) if j not in matched_j]
    return pairs, lost, born


def track(basis, potential, t0, t1, dt, region, l_max=None, eps_rel=1e-8,
          support_floor=DEFAULT_SUPPORT_FLOOR, gate_factor=5.0,
          bisect_factor=64):
    """Follow stagnation points through [t0, t1] and log topology events.

    Frames are located every ``dt`` (required <= T/200) and joined by
    greedy nearest-neighbor matching with a velocity-aware gate.  Any
    unmatched disappearance/appearance is localized by bisection in time
    down to ``dt / bisect_factor`` and recorded as a merge, split or (near
    the region edge) boundary crossing, with participants re-located just
    before and after the event.
    """
    period = basis.cfg.period
    if dt > period / 200 * (1 + 1e-12):
        raise ValueError(f"dt={dt:.3e} too coarse; need dt <= T/200 = {period/200:.3e}")
    x_lo, x_hi, p_lo, p_hi = region
    grid = basis.grid
    cell = max(grid.dx, grid.dp)
    gate_floor = 3.0 * cell

    def frame(t, window=None):
        fl = flow_field(basis, potential, t, l_max=l_max, eps_rel=eps_rel,
                        region=window or region)
        pts = locate_stagnation_points(fl, support_floor=support_floor)
        pts.sort(key=lambda q: (q.x, q.p))
        return pts

    n_steps = int(round((t1 - t0) / dt))
    times = t0 + dt * np.arange(n_steps + 1)
    frames = [frame(t) for t in times]

    segments = []
    open_segs = {}
    for k, pt in enumerate(frames[0]):
        segments.append([pt])
        open_segs[k] = len(segments) - 1

    events = []
    ambiguities = []
    for fi in range(len(times) - 1):
        prev_pts, next_pts = frames[fi], frames[fi + 1]
        gates = []
        for k, pt in enumerate(prev_pts):
            seg = segments[open_segs[k]] if k in open_segs else [pt]
            if len(seg) >= 2:
                v = np.hypot(seg[-1].x - seg[-2].x, seg[-1].p - seg[-2].p) / dt
            else:
                v = 0.0
            gates.append(
                max(gate_factor * dt * v, 10.0 * pt.refinement_radius, gate_floor)
            )
        pairs, lost, born = _match_frames(prev_pts, next_pts, gates)

        # ambiguity audit: runner-up within 10% of the chosen distance
        for i, j, dist in pairs:
            for jj in range(len(next_pts)):
                if jj == j:
                    continue
                alt = np.hypot(
                    prev_pts[i].x - next_pts[jj].x, prev_pts[i].p - next_pts[jj].p
                )
                if alt <= gates[i] and dist > 0 and abs(alt - dist) < 0.1 * dist:
                    ambiguities.append((times[fi], prev_pts[i].to_dict()))

        new_open = {}
        for i, j, _ in pairs:
            seg_id = open_segs[i]
            segments[seg_id].append(next_pts[j])
            new_open[j] = seg_id
        for j in born:
            segments.append([next_pts[j]])
            new_open[j] = len(segments) - 1

        if lost or born:
            evs = _resolve_events(
                frame, times[fi], times[fi + 1],
                [prev_pts[i] for i in lost], [next_pts[j] for j in born],
                region, gate_floor, dt / bisect_factor,
            )
            events.extend(evs)
        open_segs = new_open

    return TrackResult(times=times, frames=frames, segments=segments,
                       events=events, ambiguities=ambiguities)


def _cluster(points, radius):
    groups = []
    for pt in points:
        placed = False
        for g in groups:
            if any(np.hypot(pt.x - q.x, pt.p - q.p) < radius for q in g):
                g.append(pt)
                placed = True
                break
        if not placed:
            groups.append([pt])
    merged = True
    while merged:
        merged = False
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                if any(
                    np.hypot(q.x - r.x, q.p - r.p) < radius
                    for q in groups[a]
                    for r in groups[b]
                ):
                    groups[a].extend(groups.pop(b))
                    merged = True
                    break
            if merged:
                break
    return groups


def _resolve_events(frame_fn, t_a, t_b, lost, born, region, gate_floor, dt_min):
    """Bisect unmatched dis/appearances into localized TopologyEvents."""
    x_lo, x_hi, p_lo, p_hi = region
    cluster_radius = 8.0 * gate_floor
    events = []
    for group in _cluster(lost + born, cluster_radius):
        xs = [q.x for q in group]
        ps = [q.p for q in group]
        pad = 4.0 * gate_floor
        win = (
            max(min(xs) - pad, x_lo), min(max(xs) + pad, x_hi),
            max(min(ps) - pad, p_lo), min(max(ps) + pad, p_hi),
        )
        on_boundary = (
            min(xs) - pad < x_lo or max(xs) + pad > x_hi
            or min(ps) - pad < p_lo or max(ps) + pad > p_hi
        )

        def pts_in_window(t):
            return [
                q
                for q in frame_fn(t, window=win)
                if win[0] <= q.x <= win[1] and win[2] <= q.p <= win[3]
            ]

        lo, hi = t_a, t_b
        before = pts_in_window(lo)
        after = pts_in_window(hi)
        n_before = len(before)
        while hi - lo > dt_min:
            mid = 0.5 * (lo + hi)
            mid_pts = pts_in_window(mid)
            if len(mid_pts) == n_before:
                lo, before = mid, mid_pts
            else:
                hi, after = mid, mid_pts
        if on_boundary:
            kind = "loop_crossing"
        elif len(before) > len(after):
            kind = "merge"
        elif len(before) < len(after):
            kind = "split"
        else:
            kind = "loop_crossing"
        events.append(
            TopologyEvent(
                time_bracket=(lo, hi),
                kind=kind,
                participants_before=before,
                participants_after=after,
            )
        )
    return events


# ---------------------------------------------------------------------------
# charge ledger over a fixed loop


@dataclass
class ChargeLedger:
    times: list
    windings: list
    flagged_times: list

    @property
    def constant(self):
        vals = [
            w
            for t, w in zip(self.times, self.windings)
            if t not in self.flagged_times and w is not None
        ]
        return len(set(vals)) <= 1


def charge_ledger(loop: WindingLoop, times, evaluator_at, point_locator=None):
    """Winding of ``loop`` at each time; boundary-proximate times flagged.

    ``evaluator_at(t)`` must return a flow evaluator; if ``point_locator``
    is given (a callable ``t -> [StagnationPoint]``) any time where a
    stagnation point sits within ten refinement radii of the loop boundary
    is flagged rather than silently skipped.
    """
    windings = []
    flagged = []
    for t in times:
        ev = evaluator_at(t)
        if point_locator is not None:
            pts = point_locator(t)
            verts = loop.vertices
            closed = np.vstack([verts, verts[:1]])
            for q in pts:
                d = _point_polygon_distance(q.x, q.p, closed)
                if d < 10.0 * q.refinement_radius:
                    flagged.append(t)
                    break
        try:
            windings.append(winding_number(loop, ev))
        except LoopThroughZeroError:
            if t not in flagged:
                flagged.append(t)
            windings.append(None)
    return ChargeLedger(times=list(times), windings=windings, flagged_times=flagged)


def _point_polygon_distance(px, pp, closed_vertices):
    d = np.inf
    for a, b in zip(closed_vertices[:-1], closed_vertices[1:]):
        ab = b - a
        tt = np.clip(
            ((px - a[0]) * ab[0] + (pp - a[1]) * ab[1]) / max(ab @ ab, 1e-300), 0, 1
        )
        proj = a + tt * ab
        d = min(d, np.hypot(px - proj[0], pp - proj[1]))
    return d


# ---------------------------------------------------------------------------
# iso-contours of |J|^2 (marching squares, plot-ready polylines)


def iso_contours(field, x, p, level):
    """Polylines of ``field == level`` by marching squares.

    Returns a list of (n, 2) arrays of (x, p) vertices, deterministic in
    ordering.  Saddle-configuration cells are split by the cell-center
    value, which is sufficient for the smooth fields exported here.
    """
    f = field - level
    segs = []
    nx_, np_ = f.shape
    for i in range(nx_ - 1):
        for j in range(np_ - 1):
            c = [f[i, j], f[i + 1, j], f[i + 1, j + 1], f[i, j + 1]]
            idx = sum(1 << k for k, v in enumerate(c) if v > 0)
            if idx in (0, 15):
                continue
            pts = {}
            edges = {
                "b": (c[0], c[1], (x[i], p[j]), (x[i + 1], p[j])),
                "r": (c[1], c[2], (x[i + 1], p[j]), (x[i + 1], p[j + 1])),
                "t": (c[3], c[2], (x[i], p[j + 1]), (x[i + 1], p[j + 1])),
                "l": (c[0], c[3], (x[i], p[j]), (x[i], p[j + 1])),
            }
            for name, (fa, fb, pa, pb) in edges.items():
                if (fa > 0) != (fb > 0):
                    s = fa / (fa - fb)
                    pts[name] = (
                        pa[0] + s * (pb[0] - pa[0]),
                        pa[1] + s * (pb[1] - pa[1]),
                    )
            keys = list(pts)
            if len(keys) == 2:
                segs.append((pts[keys[0]], pts[keys[1]]))
            elif len(keys) == 4:
                center = 0.25 * sum(c)
                if (center > 0) == (c[0] > 0):
                    segs.append((pts["b"], pts["r"]))
                    segs.append((pts["t"], pts["l"]))
                else:
                    segs.append((pts["b"], pts["l"]))
                    segs.append((pts["t"], pts["r"]))

    def key(pt):
        return (round(pt[0], 10), round(pt[1], 10))

    adj = {}
    for a, b in segs:
        adj.setdefault(key(a), []).append((a, b))
        adj.setdefault(key(b), []).append((b, a))
    used = set()
    lines = []
    for a, b in segs:
        if (key(a), key(b)) in used or (key(b), key(a)) in used:
            continue
        chain = [a, b]
        used.add((key(a), key(b)))
        grow = True
        while grow:
            grow = False
            for start, end, append in ((chain[-1], None, True), (chain[0], None, False)):
                for s, e in adj.get(key(start), []):
                    pair = (key(s), key(e))
                    if pair in used or (pair[1], pair[0]) in used:
                        continue
                    used.add(pair)
                    if append:
                        chain.append(e)
                    else:
                        chain.insert(0, e)
                    grow = True
                    break
        lines.append(np.array(chain))
    lines.sort(key=lambda arr: (arr[0, 0], arr[0, 1]))
    return lines
