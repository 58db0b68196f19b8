"""Wigner function of the tunnelling state and its marginals.

Computes the four time-independent basis fields once, assembles
W(x, p; t) at a quarter period (the instant of maximal transit), and
compares both marginals against the closed-form densities.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from wignerflow import (
    EigenstatePair,
    PhaseSpaceGrid,
    PhysicsConfig,
    compute_basis_fields,
    marginals,
    momentum_wavefunction,
    wigner_at,
)

cfg = PhysicsConfig()
pair = EigenstatePair(cfg)
grid = PhaseSpaceGrid(nx=256, np=768, ny=1024)
basis = compute_basis_fields(grid, pair, l_max=2)
T = cfg.period
t = T / 4

w = wigner_at(basis, t)
print(f"normalization of W(T/4): {w.sum() * grid.dx * grid.dp:.9f}")
print(f"most negative value:     {w.min():+.5f}  (max {w.max():+.5f})")

xd, pd = marginals(basis, t)
phi = momentum_wavefunction(pair, grid.x, grid.p, t)
print(f"x-marginal vs |Psi|^2:  {np.abs(xd - pair.position_density(grid.x, t)).max():.2e}")
print(f"p-marginal vs |phi|^2:  {np.abs(pd - np.abs(phi) ** 2).max():.2e}")

fig = plt.figure(figsize=(8, 6))
gs = fig.add_gridspec(2, 2, width_ratios=(4, 1), height_ratios=(1, 4),
                      hspace=0.05, wspace=0.05)
ax = fig.add_subplot(gs[1, 0])
sel = (np.abs(grid.p) <= 4.0)
span = np.abs(w).max()
ax.imshow(w[:, sel].T, origin="lower", aspect="auto", cmap="RdBu_r",
          vmin=-span, vmax=span,
          extent=(grid.x[0], grid.x[-1], -4.0, 4.0))
ax.set_xlabel("x")
ax.set_ylabel("p")
ax_top = fig.add_subplot(gs[0, 0], sharex=ax)
ax_top.plot(grid.x, xd, "C3")
ax_top.tick_params(labelbottom=False)
ax_top.set_ylabel(r"$|\Psi|^2$")
ax_right = fig.add_subplot(gs[1, 1], sharey=ax)
ax_right.plot(pd[sel], grid.p[sel], "C0")
ax_right.tick_params(labelleft=False)
ax_right.set_xlabel(r"$|\phi|^2$")
ax.set_title("")
fig.suptitle("Wigner function at t = T/4 with its marginals")
fig.savefig("demo_wigner_quarter_period.png", dpi=150)
print("wrote demo_wigner_quarter_period.png")
