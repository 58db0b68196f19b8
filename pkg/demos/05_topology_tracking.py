"""World-lines of stagnation points and charge-conserving mergers.

Tracks every stagnation point through 1.1 tunnelling periods, draws
their world-lines colored by winding, and prints the event ledger: each
merge or split must (and does) conserve the summed winding number, and a
fixed loop enclosing the transient pair keeps winding zero through the
pair's annihilation.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from wignerflow import (
    CatichaPotential,
    EigenstatePair,
    GridFlow,
    PhaseSpaceGrid,
    PhysicsConfig,
    WindingLoop,
    charge_ledger,
    compute_basis_fields,
    flow_field,
    track,
)

cfg = PhysicsConfig()
pair = EigenstatePair(cfg)
grid = PhaseSpaceGrid(nx=256, np=768, ny=1024)
basis = compute_basis_fields(grid, pair, l_max=18)
potential = CatichaPotential(cfg, max_order=37)
T = cfg.period

result = track(basis, potential, 0.0, 1.1 * T, T / 300,
               region=(-2.3, 1.7, -2.6, 2.6), l_max=18)
print(f"{len(result.segments)} segments, {len(result.events)} events")
for ev in result.events:
    ta, tb = ev.time_bracket
    ok = "conserved" if ev.conserves_charge() else "VIOLATED"
    if ev.kind == "loop_crossing":
        ok = "boundary"
    print(f"  {ev.kind:13s} at t = {0.5 * (ta + tb) / T:.4f} T   "
          f"charge {ev.charge_before:+d} -> {ev.charge_after:+d}  [{ok}]")

loop = WindingLoop.ellipse((0.155, 0.0), 0.33, 0.18, n=64)
times = np.linspace(0.0, 0.105 * T, 8)
ledger = charge_ledger(
    loop, times,
    lambda t: GridFlow(flow_field(basis, potential, t, l_max=18)),
)
print("loop winding through the pair annihilation:", ledger.windings)

fig, ax = plt.subplots(figsize=(8, 6))
for seg in result.segments:
    ts = np.array([q.t for q in seg]) / T
    xs = np.array([q.x for q in seg])
    ps = np.array([q.p for q in seg])
    color = "C3" if seg[0].winding > 0 else ("C0" if seg[0].winding < 0 else "0.5")
    ax.plot(xs, ps, color=color, lw=1.0, alpha=0.85)
    ax.scatter(xs[::25], ps[::25], c=ts[::25], cmap="rainbow_r", s=6, zorder=3,
               vmin=0, vmax=1.1)
ax.set_xlabel("x")
ax.set_ylabel("p")
ax.set_title("Stagnation-point world-lines over 1.1 T "
             "(red: winding +1, blue: -1; dots colored by time)")
fig.tight_layout()
fig.savefig("demo_topology_worldlines.png", dpi=150)
print("wrote demo_topology_worldlines.png")
