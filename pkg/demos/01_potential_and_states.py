"""The asymmetric double well and its two exact bound states.

Plots the potential with the ground and first excited state shifted to
their energy levels, marks the three extrema, and shows how the balanced
superposition shuttles probability between the wells over one tunnelling
period.

Run:  python demos/01_potential_and_states.py          (writes PNG files)
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from wignerflow import EigenstatePair, PhysicsConfig, eval_potential, find_extrema

cfg = PhysicsConfig()
pair = EigenstatePair(cfg)
T = cfg.period

x = np.linspace(-3.2, 2.6, 800)
v = eval_potential(x, cfg)
extrema = find_extrema(-4.0, 3.0, cfg)
print("extrema of the well:")
for pos, kind in extrema:
    print(f"  {kind:3s} at x = {pos:+.4f}, V = {eval_potential(pos, cfg):+.4f}")

e0, e1 = pair.energies()
fig, ax = plt.subplots(figsize=(7, 4.5))
ax.plot(x, v, "k", lw=1.5, label="V(x)")
ax.plot(x, 0.8 * pair.psi0(x) + e0, "C0", label=r"$\psi_0$ (shifted to $E_0$)")
ax.plot(x, 0.8 * pair.psi1(x) + e1, "C3", label=r"$\psi_1$ (shifted to $E_1$)")
ax.axhline(e0, color="C0", ls="--", lw=0.7)
ax.axhline(e1, color="C3", ls="--", lw=0.7)
for pos, kind in extrema:
    ax.plot(pos, eval_potential(pos, cfg), "kv" if kind == "max" else "k^", ms=7)
ax.set_xlabel("x")
ax.set_ylabel("energy")
ax.set_ylim(-3.5, 2.5)
ax.legend(loc="upper center")
ax.set_title("Caticha double well with its two exact bound states")
fig.tight_layout()
fig.savefig("demo_potential_states.png", dpi=150)
print("wrote demo_potential_states.png")

# probability shuttling between the wells
saddle = [p for p, k in extrema if k == "max"][0]
xs = np.linspace(-6, 5, 4000)
times = np.linspace(0, T, 200)
left_mass = [
    np.trapezoid(pair.position_density(xs[xs < saddle], t), xs[xs < saddle])
    for t in times
]
fig, ax = plt.subplots(figsize=(7, 3))
ax.plot(times / T, left_mass, "C0")
ax.set_xlabel("t / T")
ax.set_ylabel("probability left of the barrier")
ax.set_title("Tunnelling of the balanced superposition")
fig.tight_layout()
fig.savefig("demo_tunnelling_mass.png", dpi=150)
print("wrote demo_tunnelling_mass.png")
