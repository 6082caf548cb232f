"""Switched-equation solver: scheme structure, phases, and the periodic orbit."""

import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from ratchet_lab import (CoarseGridWarning, DensityGrid, RatchetPotential,
                         RatchetSchedule, build_transition_matrix, diffuse,
                         find_periodic, period_map, ratchet_phase, sobolev_h2_norm,
                         stationary_vector, well_masses)

POT = RatchetPotential(2, 0.2)


def gibbs_grid(pot, sigma, n):
    mids = (np.arange(n) + 0.5) / n
    v = np.exp(-pot.psi(mids) / sigma)
    return DensityGrid(v / v.mean())


# -- schedule ------------------------------------------------------------------


def test_schedule_gate_and_tau():
    sched = RatchetSchedule(sigma=0.05, t_tr=4.0, t_diff=10.0)
    assert sched.period == 14.0
    assert sched.tau == pytest.approx(0.5)
    # gate is 1 on (nT, nT + t_tr], 0 on (nT + t_tr, (n+1)T]
    assert sched.gate(2.0) == 1.0
    assert sched.gate(4.0) == 1.0
    assert sched.gate(4.0 + 1e-12) == 0.0
    assert sched.gate(14.0) == 0.0
    assert sched.gate(16.5) == 1.0
    np.testing.assert_allclose(sched.gate(np.array([1.0, 5.0, 15.0, 20.0])),
                               [1.0, 0.0, 1.0, 0.0])


def test_schedule_zero_length_phases_allowed():
    assert RatchetSchedule(sigma=0.1, t_tr=0.0, t_diff=5.0).tau == pytest.approx(0.5)
    assert RatchetSchedule(sigma=0.1, t_tr=5.0, t_diff=0.0).tau == 0.0


def test_schedule_rejects_bad_parameters():
    with pytest.raises(ValueError):
        RatchetSchedule(sigma=0.0, t_tr=1.0, t_diff=1.0)
    with pytest.raises(ValueError):
        RatchetSchedule(sigma=0.1, t_tr=-1.0, t_diff=1.0)
    with pytest.raises(ValueError):
        RatchetSchedule(sigma=0.1, t_tr=0.0, t_diff=0.0)


# -- ratchet phase -----------------------------------------------------------------


def test_flat_potential_reduces_to_diffusion():
    flat = RatchetPotential(2, 0.25, 1e-300)
    rho = DensityGrid.from_modes(np.array([1.0, 0.5]), 1024)
    out_fv = ratchet_phase(rho, flat, 0.05, 1.0)
    out_sp = diffuse(rho, 0.05)
    # implicit Euler is first order in time; default step keeps this small
    assert out_fv.l1_distance(out_sp) <= 1e-4


def test_equilibrium_is_discrete_steady_state():
    eq = gibbs_grid(POT, 0.05, 1024)
    out = ratchet_phase(eq, POT, 0.05, 4.0)
    assert out.l1_distance(eq) <= 1e-8


def test_mass_conserved_over_thousand_steps():
    rho = DensityGrid.uniform(512)
    out = ratchet_phase(rho, POT, 0.05, 1000 * 2e-4, dt=2e-4)
    assert abs(out.mass() - 1.0) <= 1e-10


def test_nonnegativity_preserved():
    rho = DensityGrid.from_modes(np.array([1.0, 0.9]), 512)  # nearly touching zero
    out = ratchet_phase(rho, POT, 0.02, 2.0)
    assert out.values.min() >= -1e-12


def test_concentration_matches_boltzmann_oracle():
    """Long drift phase parks each well's mass near its minimum.

    The expected fraction within +-0.05 of the minimum is computed from
    the Boltzmann density by quadrature (0.9557 at sigma = 0.01); the
    solver must land on it.
    """
    sigma = 0.01
    out = ratchet_phase(DensityGrid.uniform(1024), POT, sigma, 12.0)
    z, _ = quad(lambda x: np.exp(-POT.psi(x) / sigma), 0.0, 0.5,
                epsabs=1e-13, limit=300)
    near, _ = quad(lambda x: np.exp(-POT.psi(x) / sigma), 0.15, 0.25,
                   epsabs=1e-13, limit=300)
    oracle = near / z
    assert oracle > 0.95
    mids = out.cell_midpoints()
    for a_i in POT.minima():
        inside = out.values[np.abs(mids - a_i) <= 0.05].sum()
        well = out.values[np.abs(mids - a_i) <= 0.25].sum()
        assert inside / well == pytest.approx(oracle, abs=5e-3)


def test_coarse_grid_warning():
    with pytest.warns(CoarseGridWarning):
        ratchet_phase(DensityGrid.uniform(64), POT, 0.01, 0.1)


def test_spatial_convergence_order():
    """Halving the cells (with the default dt ~ dx^2 coupling) gains >= 1.8."""
    outs = {}
    for n in (64, 128, 256):
        rho = DensityGrid.from_modes(np.array([1.0, 0.5]), n)
        outs[n] = ratchet_phase(rho, POT, 0.1, 0.25).values
    e_coarse = np.abs(outs[64] - outs[128].reshape(64, 2).mean(axis=1)).mean()
    e_fine = np.abs(outs[128] - outs[256].reshape(128, 2).mean(axis=1)).mean()
    assert np.log2(e_coarse / e_fine) >= 1.8


def test_rejects_bad_parameters():
    rho = DensityGrid.uniform(64)
    with pytest.raises(ValueError):
        ratchet_phase(rho, POT, -0.1, 1.0)
    with pytest.raises(ValueError):
        ratchet_phase(rho, POT, 0.1, -1.0)


# -- period map ---------------------------------------------------------------------


def test_period_map_diffusion_only():
    sched = RatchetSchedule(sigma=0.05, t_tr=0.0, t_diff=10.0)
    rho = DensityGrid.from_modes(np.array([1.0, 0.4]), 256)
    assert period_map(rho, POT, sched).l1_distance(diffuse(rho, 0.5)) == 0.0


def test_period_map_ratchet_only():
    sched = RatchetSchedule(sigma=0.05, t_tr=2.0, t_diff=0.0)
    rho = DensityGrid.uniform(256)
    want = ratchet_phase(rho, POT, 0.05, 2.0)
    assert period_map(rho, POT, sched).l1_distance(want) == 0.0


def test_period_map_well_masses_approach_chain():
    sched = RatchetSchedule(sigma=0.05, t_tr=4.0, t_diff=10.0)
    mu = stationary_vector(build_transition_matrix(POT, sched.tau)).mu
    state = DensityGrid.uniform(512)
    dists = [np.linalg.norm(well_masses(state, POT) - mu)]
    for _ in range(4):
        state = period_map(state, POT, sched)
        dists.append(np.linalg.norm(well_masses(state, POT) - mu))
    assert dists[1] < 0.5 * dists[0]
    assert np.all(np.diff(dists) <= 1e-7)   # settles at the model discrepancy


# -- periodic orbit ------------------------------------------------------------------


def test_fixed_point_pure_diffusion_is_uniform():
    sched = RatchetSchedule(sigma=0.05, t_tr=0.0, t_diff=10.0)
    orbit = find_periodic(POT, sched, n=512)
    assert orbit.converged
    assert orbit.density.l1_distance(DensityGrid.uniform(512)) <= 1e-9


def test_fixed_point_perpetual_drift_is_boltzmann():
    # sigma large enough that barrier hopping equilibrates the wells
    sigma = 0.3
    sched = RatchetSchedule(sigma=sigma, t_tr=4.0, t_diff=0.0)
    orbit = find_periodic(POT, sched, n=512)
    assert orbit.converged
    assert orbit.density.l1_distance(gibbs_grid(POT, sigma, 512)) <= 1e-6
    wm = well_masses(orbit.density, POT)
    assert np.max(np.abs(wm - 0.5)) <= 1e-8


def test_fixed_point_gibbs_is_invariant_at_small_sigma():
    sched = RatchetSchedule(sigma=0.05, t_tr=4.0, t_diff=0.0)
    orbit = find_periodic(POT, sched, n=512, rho0=gibbs_grid(POT, 0.05, 512))
    assert orbit.converged and orbit.cycles == 1
    assert np.max(np.abs(well_masses(orbit.density, POT) - 0.5)) <= 1e-10


def test_perpetual_drift_from_uniform_stalls_at_small_sigma():
    """Without a diffusion phase, inter-well equilibration is Kramers-slow."""
    sched = RatchetSchedule(sigma=0.05, t_tr=4.0, t_diff=0.0)
    orbit = find_periodic(POT, sched, n=256)
    assert not orbit.converged
    assert orbit.stalled
    assert orbit.cycles < 100


def test_orbit_geometric_convergence_and_uniqueness():
    sched = RatchetSchedule(sigma=0.05, t_tr=4.0, t_diff=10.0)
    tol = 1e-9
    a = find_periodic(POT, sched, n=512, tol=tol)
    assert a.converged
    ratios = a.residuals[1:] / a.residuals[:-1]
    assert np.all(ratios <= 0.05)           # strong contraction per cycle
    assert a.contraction <= 0.05
    seed = DensityGrid.from_modes(np.array([1.0, -0.3, 0.2]), 512)
    b = find_periodic(POT, sched, n=512, tol=tol, rho0=seed)
    assert b.converged
    assert a.density.l1_distance(b.density) <= 2.0 * tol


def test_orbit_mass_and_positivity():
    sched = RatchetSchedule(sigma=0.05, t_tr=4.0, t_diff=10.0)
    orbit = find_periodic(POT, sched, n=512)
    assert orbit.density.mass() == pytest.approx(1.0, abs=1e-12)
    assert orbit.density.values.min() >= 0.0


# -- H2 norm -----------------------------------------------------------------------


def test_h2_norm_uniform():
    assert sobolev_h2_norm(DensityGrid.uniform(256)) == pytest.approx(1.0, abs=1e-14)


def test_h2_norm_single_mode_analytic():
    rho = DensityGrid.from_modes(np.array([1.0, 0.5]), 512)
    exact = np.sqrt(1.0 + 0.125 * (1.0 + np.pi**2 + np.pi**4))
    assert sobolev_h2_norm(rho) == pytest.approx(exact, rel=0.01)


def test_h2_norm_rejects_tiny_grid():
    with pytest.raises(ValueError):
        sobolev_h2_norm(DensityGrid.uniform(4))
