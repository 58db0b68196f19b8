import math

import numpy as np
import pytest

from wignerflow import (
    GridInsufficientError,
    PhaseSpaceGrid,
    PhysicsConfig,
    WignerBasisFields,
    marginals,
    momentum_wavefunction,
    wigner_at,
    wigner_time_derivative,
)

X_SADDLE = -0.2581


def test_grid_mirror_exact():
    grid = PhaseSpaceGrid(nx=64, np=96, ny=128)
    p = grid.p
    assert np.array_equal(p[::-1], -p)  # bitwise mirror pairs
    y = grid.y
    assert np.array_equal(y[::-1], -y)


def test_grid_rejects_odd_np():
    with pytest.raises(ValueError):
        PhaseSpaceGrid(np=129)


def test_kernel_resolution_guard(pair):
    grid = PhaseSpaceGrid(nx=32, np=64, ny=16)
    with pytest.raises(GridInsufficientError):
        WignerBasisFields.from_pair(grid, pair, l_max=2)


def test_norm_defect_guard(pair):
    # a p-window far too narrow to hold the state's momentum mass
    grid = PhaseSpaceGrid(p_min=-1.0, p_max=1.0, nx=64, np=64, ny=256)
    with pytest.raises(GridInsufficientError):
        WignerBasisFields.from_pair(grid, pair, l_max=0)


def test_basis_normalization_and_orthogonality(med_basis):
    cell = med_basis.grid.dx * med_basis.grid.dp
    assert abs(float(med_basis.w00.sum()) * cell - 1.0) < 1e-6
    assert abs(float(med_basis.w11.sum()) * cell - 1.0) < 1e-6
    assert abs(float(med_basis.w01_re.sum()) * cell) < 1e-6
    assert abs(float(med_basis.w01_im.sum()) * cell) < 1e-6


def test_ground_state_wigner_goes_negative(med_basis):
    assert med_basis.w00.min() < -1e-3 * med_basis.w00.max()


def test_diagonal_fields_even_in_p(med_basis):
    # exact mirror symmetry on the bitwise-symmetric p lattice
    assert np.abs(med_basis.w00 - med_basis.w00[:, ::-1]).max() < 1e-12
    assert np.abs(med_basis.w11 - med_basis.w11[:, ::-1]).max() < 1e-12


def test_assembly_matches_direct_transform(pair, cfg):
    # W(t) from the four basis fields vs a one-shot transform of Psi(t)
    grid = PhaseSpaceGrid(nx=96, np=256, ny=512)
    basis = WignerBasisFields.from_pair(grid, pair, l_max=0)
    y = grid.y
    a = grid.x[:, None] + y[None, :]
    b = grid.x[:, None] - y[None, :]
    kernel_exp = np.exp(2j * np.outer(y, grid.p) / cfg.hbar)
    T = cfg.period
    for t in (0.0, T / 8, T / 4):
        rho = np.conj(pair.superposition(a, t)) * pair.superposition(b, t)
        direct = (grid.dy / (math.pi * cfg.hbar)) * np.real(rho @ kernel_exp)
        assert np.abs(wigner_at(basis, t) - direct).max() < 1e-10


def test_normalization_over_time(med_basis, rng):
    cell = med_basis.grid.dx * med_basis.grid.dp
    T = med_basis.cfg.period
    for t in rng.uniform(0, T, 20):
        assert abs(float(wigner_at(med_basis, t).sum()) * cell - 1.0) < 1e-6


def test_periodicity(med_basis):
    T = med_basis.cfg.period
    w1 = wigner_at(med_basis, 0.3)
    w2 = wigner_at(med_basis, 0.3 + T)
    assert np.abs(w1 - w2).max() < 1e-12


def test_time_derivative_matches_finite_difference(med_basis):
    T = med_basis.cfg.period
    h = 1e-4 * T
    for t in (0.1, T / 4, 2.0):
        fd = (wigner_at(med_basis, t + h) - wigner_at(med_basis, t - h)) / (2 * h)
        dw = wigner_time_derivative(med_basis, t)
        assert np.abs(dw - fd).max() < 1e-6 * np.abs(dw).max() + 1e-12


def test_time_derivative_integrates_to_zero(med_basis):
    cell = med_basis.grid.dx * med_basis.grid.dp
    dw = wigner_time_derivative(med_basis, 1.0)
    assert abs(float(dw.sum()) * cell) < 1e-6


def test_eigenstate_time_derivative_vanishes(pair, cfg):
    grid = PhaseSpaceGrid(nx=96, np=192, ny=512)
    basis = WignerBasisFields.from_state(grid, pair.psi0, cfg, l_max=0)
    assert np.abs(wigner_time_derivative(basis, 0.7)).max() == 0.0
    assert np.abs(wigner_at(basis, 0.0) - wigner_at(basis, 1.3)).max() == 0.0


def test_marginals_against_closed_forms(med_basis, pair):
    grid = med_basis.grid
    T = med_basis.cfg.period
    for t in (0.0, T / 8, T / 4):
        xd, pd = marginals(med_basis, t)
        assert xd.min() > -1e-8 and pd.min() > -1e-8
        assert abs(float(xd.sum()) * grid.dx - 1.0) < 1e-6
        assert abs(float(pd.sum()) * grid.dp - 1.0) < 1e-6
        assert np.abs(xd - pair.position_density(grid.x, t)).max() < 1e-6
        phi = momentum_wavefunction(pair, grid.x, grid.p, t)
        assert np.abs(pd - np.abs(phi) ** 2).max() < 1e-4


def test_transit_density_at_quarter_period(med_basis, pair):
    # cos term vanishes at T/4: marginal is the incoherent eigenstate mix
    grid = med_basis.grid
    T = med_basis.cfg.period
    xd, _ = marginals(med_basis, T / 4)
    mix = 0.5 * pair.psi0(grid.x) ** 2 + 0.5 * pair.psi1(grid.x) ** 2
    assert np.abs(xd - mix).max() < 1e-6


def test_well_mass_swaps_within_two_percent(med_basis):
    grid = med_basis.grid
    T = med_basis.cfg.period
    left = grid.x < X_SADDLE
    xd0, _ = marginals(med_basis, 0.0)
    xdh, _ = marginals(med_basis, T / 2)
    l0 = float(xd0[left].sum() * grid.dx)
    lh = float(xdh[left].sum() * grid.dx)
    r0 = float(xd0[~left].sum() * grid.dx)
    rh = float(xdh[~left].sum() * grid.dx)
    assert abs(l0 - rh) < 0.02 and abs(r0 - lh) < 0.02
    assert l0 > 0.85  # starts concentrated in the left well


def test_derivative_stack_against_finite_differences(med_basis):
    # independent FD oracle for the order-2 moment-kernel stack; 4th-order
    # differences keep the oracle's own truncation below the tolerance
    w = wigner_at(med_basis, 0.9)
    d2 = med_basis.stack_at(0.9, 1)  # second p-derivative
    dp = med_basis.grid.dp
    fd = (
        -w[:, 4:] + 16 * w[:, 3:-1] - 30 * w[:, 2:-2] + 16 * w[:, 1:-3] - w[:, :-4]
    ) / (12 * dp**2)
    inner = d2[:, 2:-2]
    mask = np.abs(w[:, 2:-2]) > 1e-3 * np.abs(w).max()
    rel = np.abs(fd - inner)[mask] / np.abs(inner[mask]).max()
    assert rel.max() < 1e-4


def test_interference_fringes_alternate(med_basis):
    grid = med_basis.grid
    T = med_basis.cfg.period
    w = wigner_at(med_basis, T / 4)
    icol = int(np.argmin(np.abs(grid.x - X_SADDLE)))
    sel = (grid.p >= -2) & (grid.p <= 2)
    col = w[icol, sel]
    signs = np.sign(col)
    changes = int(np.count_nonzero(signs[:-1] * signs[1:] < 0))
    assert changes >= 3


def test_point_and_column_stacks_match_grid(med_basis, rng):
    grid = med_basis.grid
    idx = rng.integers(5, grid.nx - 5, 6)
    jdx = rng.integers(5, grid.np - 5, 6)
    pts = med_basis.point_stacks(grid.x[idx], grid.p[jdx], l_max=2)
    cols = med_basis.column_stacks(grid.x[idx], l_max=2)
    for name, stack in (("00", med_basis.d00), ("11", med_basis.d11),
                        ("re", med_basis.d01_re), ("im", med_basis.d01_im)):
        for l in range(3):
            grid_vals = stack[l][idx, jdx]
            scale = max(np.abs(stack[l]).max(), 1e-300)
            assert np.abs(pts[name][l] - grid_vals).max() < 1e-12 * scale
            assert np.abs(cols[name][l][np.arange(6), jdx] - grid_vals).max() < 1e-12 * scale
