import math

import numpy as np
import pytest

from wignerflow import (
    CatichaPotential,
    ExactFlow,
    GridFlow,
    HarmonicPotential,
    LoopThroughZeroError,
    PhaseSpaceGrid,
    WignerBasisFields,
    WindingLoop,
    charge_ledger,
    classify,
    flow_field,
    iso_contours,
    locate_stagnation_points,
    track,
    winding_number,
)
from wignerflow.topology import (
    SADDLE_P_ORIENTED,
    SEPARATRIX_CROSSING,
    VORTEX_CCW,
    VORTEX_CW,
)

from test_flow import gaussian_ground_state

X_LEFT, X_RIGHT, X_SADDLE = -2.0945, 1.5138, -0.2581
REGION = (-2.3, 1.7, -2.6, 2.6)


@pytest.fixture(scope="module")
def quarter_flow(med_basis, potential):
    return flow_field(med_basis, potential, med_basis.cfg.period / 4, l_max=18)


@pytest.fixture(scope="module")
def quarter_points(quarter_flow):
    return locate_stagnation_points(quarter_flow, region=REGION)


@pytest.fixture(scope="module")
def quarter_exact(quarter_flow):
    return ExactFlow.from_flow(quarter_flow)


def brute_winding(evaluator, center, radius, n=4096):
    """Dense fixed-sampling angle integration, the winding oracle."""
    ang = 2 * np.pi * np.arange(n) / n
    jx, jp = evaluator.vector(center[0] + radius * np.cos(ang),
                              center[1] + radius * np.sin(ang))
    theta = np.arctan2(jp, jx)
    steps = np.diff(np.append(theta, theta[0]))
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    return steps.sum() / (2 * np.pi)


# -- location -----------------------------------------------------------


def test_harmonic_single_vortex(cfg):
    # W > 0 everywhere: the origin vortex is the only zero.  The far tail
    # of this test grid carries y-window ringing below ~1e-5 of max|J|
    # (a degenerate near-stagnation continuum), excluded by the support
    # floor; the winding +1 count is one either way.
    pot = HarmonicPotential(mass=cfg.mass, omega=1.0)
    psi = gaussian_ground_state(cfg.mass, pot.omega, cfg.hbar)
    grid = PhaseSpaceGrid(x_min=-4.0, x_max=4.0, p_min=-4.0, p_max=4.0,
                          nx=128, np=128, ny=512, y_half_width=5.0)
    basis = WignerBasisFields.from_state(grid, psi, cfg, l_max=4)
    fl = flow_field(basis, pot, 0.0, l_max=4)
    all_pts = locate_stagnation_points(fl)
    assert sum(1 for q in all_pts if q.winding == 1) == 1
    pts = locate_stagnation_points(fl, support_floor=1e-4)
    assert len(pts) == 1
    q = pts[0]
    assert q.winding == 1
    assert abs(q.x) < 1e-6 and abs(q.p) < 1e-6
    ex = ExactFlow.from_flow(fl)
    assert classify(q, ex) == VORTEX_CW  # classical sense at a well bottom


def test_located_points_are_flow_zeros(quarter_points, quarter_exact, quarter_flow):
    med = np.median(quarter_flow.magnitude())
    for q in quarter_points:
        jx, jp = quarter_exact.vector(q.x, q.p)
        assert float(np.hypot(jx, jp)[0]) < 1e-3 * med


def test_pinning_to_wigner_zeros(quarter_points, quarter_exact, quarter_flow):
    wmax = np.abs(quarter_flow.w).max()
    off_axis = [q for q in quarter_points if abs(q.p) > 1e-3]
    assert off_axis
    for q in off_axis:
        val = abs(float(quarter_exact.wigner(np.array([q.x]), np.array([q.p]))[0]))
        assert val < 1e-6 * wmax


def test_quantum_displacement_inward(quarter_points):
    well = [q for q in quarter_points if q.winding == 1 and abs(q.p) < 0.2]
    left = min(well, key=lambda q: q.x)
    right = max(well, key=lambda q: q.x)
    assert left.x > X_LEFT
    assert right.x < X_RIGHT


def test_vortex_string_alternates(quarter_points, quarter_exact):
    string = sorted(
        (q for q in quarter_points if q.winding == 1 and abs(q.x - X_SADDLE) < 0.3),
        key=lambda q: q.p,
    )
    assert len(string) >= 3
    kinds = [classify(q, quarter_exact) for q in string]
    assert all(k in (VORTEX_CW, VORTEX_CCW) for k in kinds)
    assert all(a != b for a, b in zip(kinds, kinds[1:]))
    assert string[-1].p - string[0].p > 0.5


def test_fig3_region_point_count(quarter_points):
    inside = [
        q for q in quarter_points
        if X_LEFT <= q.x <= X_RIGHT and -2.0 <= q.p <= 2.0
    ]
    assert len(inside) >= 6


def test_separatrix_remnant_classification(med_basis, potential):
    # the barrier-top remnant sits on the x-axis at 0.275 T and splits the flow
    t = 0.275 * med_basis.cfg.period
    fl = flow_field(med_basis, potential, t, l_max=18)
    pts = locate_stagnation_points(fl, region=(-0.45, -0.1, -0.25, 0.25))
    ex = ExactFlow.from_flow(fl)
    saddles = [q for q in pts if q.winding == -1]
    assert saddles
    remnant = min(saddles, key=lambda q: abs(q.p))
    assert abs(remnant.x - X_SADDLE) < 0.1
    assert classify(remnant, ex) == SEPARATRIX_CROSSING


def test_p_oriented_saddle_exists(quarter_points, quarter_exact):
    saddles = [q for q in quarter_points if q.winding == -1]
    assert saddles
    kinds = {classify(q, quarter_exact) for q in saddles}
    assert SADDLE_P_ORIENTED in kinds


def test_eigenstate_stagnation_set_symmetric(pair, cfg, potential):
    grid = PhaseSpaceGrid(nx=128, np=384, ny=1024)
    basis = WignerBasisFields.from_state(grid, pair.psi0, cfg, l_max=18)
    fl = flow_field(basis, potential, 0.0, l_max=18)
    pts = locate_stagnation_points(fl, region=(-2.3, 1.7, -2.6, 2.6))
    arr = sorted((round(q.x, 5), round(q.p, 5), q.winding) for q in pts)
    mirrored = sorted((x, -p, w) for x, p, w in arr)
    for (x1, p1, w1), (x2, p2, w2) in zip(arr, mirrored):
        assert abs(x1 - x2) < 2e-4 and abs(p1 - p2) < 2e-4 and w1 == w2


# -- winding numbers ----------------------------------------------------


def test_winding_around_well_vortex(quarter_points, quarter_flow, quarter_exact):
    right = max(
        (q for q in quarter_points if q.winding == 1 and abs(q.p) < 0.2),
        key=lambda q: q.x,
    )
    loop = WindingLoop.circle((right.x, right.p), 0.08)
    assert winding_number(loop, GridFlow(quarter_flow)) == 1
    assert winding_number(loop, quarter_exact) == 1
    assert abs(brute_winding(quarter_exact, (right.x, right.p), 0.08) - 1) < 0.01


def test_winding_around_saddle(quarter_points, quarter_flow, quarter_exact):
    saddle = next(q for q in quarter_points if q.winding == -1)
    loop = WindingLoop.circle((saddle.x, saddle.p), 0.05)
    assert winding_number(loop, GridFlow(quarter_flow)) == -1
    assert abs(brute_winding(quarter_exact, (saddle.x, saddle.p), 0.05) + 1) < 0.01


def test_winding_empty_region(quarter_flow):
    loop = WindingLoop.circle((0.9, 1.5), 0.12)
    assert winding_number(loop, GridFlow(quarter_flow)) == 0


def test_winding_additivity(quarter_points, quarter_flow):
    gf = GridFlow(quarter_flow)
    configs = [
        ((-0.29, 0.0), 0.45, 1.3),
        ((0.0, 0.0), 0.9, 1.6),
        ((-0.75, -0.4), 0.55, 0.9),
        ((-1.0, 0.1), 1.0, 1.2),
        ((0.3, -0.7), 0.5, 0.6),
    ]
    checked = 0
    for center, sx, sp in configs:
        loop = WindingLoop.ellipse(center, sx, sp, n=96)
        try:
            big = winding_number(loop, gf)
        except LoopThroughZeroError:
            continue
        inside = [
            q for q in quarter_points
            if ((q.x - center[0]) / sx) ** 2 + ((q.p - center[1]) / sp) ** 2 < 1.0
        ]
        assert big == sum(q.winding for q in inside), (center, sx, sp)
        checked += 1
    assert checked >= 3


def test_loop_through_zero_raises(quarter_points, quarter_exact):
    # points are polished on the exact field, so the exact evaluator is
    # the one that sees |J| ~ 0 on a tight circle around them
    q = quarter_points[0]
    loop = WindingLoop.circle((q.x, q.p), 1e-7)
    with pytest.raises(LoopThroughZeroError):
        winding_number(loop, quarter_exact)


def test_self_intersecting_loop_rejected():
    with pytest.raises(ValueError):
        WindingLoop(np.array([[0, 0], [1, 1], [1, 0], [0, 1]], dtype=float))


def test_torus_pair_loop_is_neutral(med_basis, potential):
    # at t=0 the two stagnation points of the transient pair sit near
    # (-0.07, 0) and (+0.38, 0); a loop around both carries zero charge
    fl = flow_field(med_basis, potential, 0.0, l_max=18)
    pts = locate_stagnation_points(fl, region=(-0.2, 0.5, -0.2, 0.2))
    assert sum(q.winding for q in pts) == 0
    assert len(pts) == 2
    loop = WindingLoop.ellipse((0.155, 0.0), 0.33, 0.18, n=64)
    assert winding_number(loop, GridFlow(fl)) == 0


# -- consistency of locate / classify / winding --------------------------


def test_locate_classify_winding_agree(quarter_points, quarter_flow, quarter_exact):
    gf = GridFlow(quarter_flow)
    for q in quarter_points:
        r = max(0.03, 12 * q.refinement_radius)
        others = [o for o in quarter_points if o is not q]
        if others and min(np.hypot(o.x - q.x, o.p - q.p) for o in others) < 2 * r:
            continue
        loop = WindingLoop.circle((q.x, q.p), r)
        assert winding_number(loop, gf) == q.winding
        kind = classify(q, quarter_exact)
        if q.winding == 1:
            assert kind in (VORTEX_CW, VORTEX_CCW)
        elif q.winding == -1:
            assert kind in (SEPARATRIX_CROSSING, SADDLE_P_ORIENTED)


# -- tracking ------------------------------------------------------------


def test_track_rejects_coarse_dt(med_basis, potential):
    T = med_basis.cfg.period
    with pytest.raises(ValueError):
        track(med_basis, potential, 0.0, T / 10, T / 100, REGION)


@pytest.fixture(scope="module")
def merger_track(med_basis, potential):
    T = med_basis.cfg.period
    return track(med_basis, potential, 0.05 * T, 0.13 * T, T / 500,
                 region=REGION, l_max=18)


def test_merger_conserves_charge(merger_track):
    merges = [e for e in merger_track.events if e.kind in ("merge", "split")]
    assert len(merges) >= 1
    for e in merges:
        assert e.conserves_charge(), e.to_dict()
    # the torus annihilation: a +1/-1 pair vanishes near (0.07, 0)
    torus = [
        e for e in merges
        if any(abs(q.x) < 0.3 and abs(q.p) < 0.2 for q in e.participants_before)
    ]
    assert torus
    ev = torus[0]
    assert len(ev.participants_before) - len(ev.participants_after) == 2


def test_track_segments_persist(merger_track):
    # the well vortices live through the whole window
    n_frames = len(merger_track.times)
    persistent = [
        seg for seg in merger_track.segments
        if len(seg) == n_frames and all(q.winding == 1 for q in seg)
    ]
    xs = sorted(seg[0].x for seg in persistent)
    assert any(x < -1.8 for x in xs)
    assert any(x > 1.2 for x in xs)


def test_boundary_exit_is_loop_crossing(merger_track):
    # vortex-string points drifting through the p edge must not be
    # misreported as charge events
    crossings = [e for e in merger_track.events if e.kind == "loop_crossing"]
    for e in crossings:
        pts = e.participants_before + e.participants_after
        assert any(abs(q.p) > 2.2 for q in pts)


def test_charge_ledger_constant_around_vortex(med_basis, potential, quarter_points):
    right = max(
        (q for q in quarter_points if q.winding == 1 and abs(q.p) < 0.2),
        key=lambda q: q.x,
    )
    T = med_basis.cfg.period
    times = np.linspace(0.2 * T, 0.3 * T, 5)
    loop = WindingLoop.circle((right.x, right.p), 0.1)
    ledger = charge_ledger(
        loop, times,
        lambda t: GridFlow(flow_field(med_basis, potential, t, l_max=18)),
    )
    assert ledger.constant
    assert set(ledger.windings) == {1}


def test_charge_ledger_flags_boundary_contact(med_basis, potential, quarter_points):
    T = med_basis.cfg.period
    q = next(p for p in quarter_points if abs(p.p) < 0.2 and p.winding == 1)
    loop = WindingLoop.circle((q.x, q.p), 8 * q.refinement_radius, n=64)

    def locator(t):
        fl = flow_field(med_basis, potential, t, l_max=18)
        return locate_stagnation_points(
            fl, region=(q.x - 0.2, q.x + 0.2, q.p - 0.2, q.p + 0.2)
        )

    ledger = charge_ledger(
        loop, [T / 4],
        lambda t: GridFlow(flow_field(med_basis, potential, t, l_max=18)),
        point_locator=locator,
    )
    assert ledger.flagged_times  # proximity is flagged, never silently skipped


# -- iso contours --------------------------------------------------------


def test_iso_contours_recover_circle():
    x = np.linspace(-2, 2, 201)
    p = np.linspace(-2, 2, 201)
    f = x[:, None] ** 2 + p[None, :] ** 2
    lines = iso_contours(f, x, p, 1.0)
    pts = np.vstack(lines)
    radii = np.hypot(pts[:, 0], pts[:, 1])
    assert abs(radii - 1.0).max() < 1e-3
    assert len(pts) > 100
