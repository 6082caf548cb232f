"""Well masses, optimal transport distance, and the PDE-chain consistency checks."""

import numpy as np
import pytest
from scipy.integrate import quad

from ratchet_lab import (DensityGrid, DiracComb, RatchetPotential, RatchetSchedule,
                         build_transition_matrix, collapse, consistency_sweep,
                         discrete_ratchet_step, neumann_green,
                         ratchet_localization_check, stationary_vector,
                         verify_transport, wasserstein1, well_masses)

POT = RatchetPotential(2, 0.2)


# -- well masses and collapse ----------------------------------------------------


def test_well_masses_uniform():
    np.testing.assert_allclose(well_masses(DensityGrid.uniform(512), POT), 0.5,
                               atol=1e-15)


def test_well_masses_single_well():
    v = np.zeros(64)
    v[:32] = 2.0
    np.testing.assert_allclose(well_masses(DensityGrid(v), POT), [1.0, 0.0],
                               atol=1e-15)


def test_well_masses_match_independent_summation():
    rng = np.random.default_rng(3)
    v = rng.random(96) + 0.1
    rho = DensityGrid(v / v.mean())
    pot = RatchetPotential(3, 0.1)
    got = well_masses(rho, pot)
    want = [rho.values[i * 32:(i + 1) * 32].sum() / 96 for i in range(3)]
    np.testing.assert_allclose(got, want, atol=1e-12)
    assert got.sum() == pytest.approx(rho.mass(), abs=1e-12)


def test_well_masses_rejects_misaligned_grid():
    with pytest.raises(ValueError):
        well_masses(DensityGrid.uniform(100), RatchetPotential(3, 0.1))


def test_collapse_builds_comb_at_minima():
    comb = collapse(DensityGrid.uniform(512), POT)
    np.testing.assert_allclose(comb.weights, 0.5, atol=1e-15)
    np.testing.assert_allclose(comb.positions, [0.2, 0.7], atol=1e-15)


# -- discrete ratchet ---------------------------------------------------------------


def test_step_matches_matrix_row():
    p = build_transition_matrix(POT, 0.5)
    atom = DiracComb(np.array([1.0, 0.0]), POT.minima())
    np.testing.assert_allclose(discrete_ratchet_step(atom, 0.5), p.matrix[0],
                               atol=1e-14)


def test_step_fixes_stationary_comb():
    p = build_transition_matrix(POT, 0.5)
    mu = stationary_vector(p).mu
    comb = DiracComb(mu, POT.minima())
    np.testing.assert_allclose(discrete_ratchet_step(comb, 0.5), mu, atol=1e-10)


def test_step_long_time_spreads_uniformly():
    comb = DiracComb(np.array([0.9, 0.1]), POT.minima())
    out = discrete_ratchet_step(comb, 4.0)
    np.testing.assert_allclose(out, 0.5, atol=1e-14)


def test_step_matches_diffuse_and_integrate_path():
    """Independent route: quadrature of the Green function per well."""
    pot = RatchetPotential(3, 0.1)
    weights = np.array([0.5, 0.3, 0.2])
    comb = DiracComb(weights, pot.minima())
    tau = 0.6
    got = discrete_ratchet_step(comb, tau)
    edges = pot.well_boundaries()
    want = np.zeros(3)
    for j in range(3):
        for w, pos in zip(weights, pot.minima()):
            val, _ = quad(lambda x: neumann_green(pos, x, tau), edges[j], edges[j + 1],
                          epsabs=1e-13, limit=200)
            want[j] += w * val
    np.testing.assert_allclose(got, want, atol=1e-10)


def test_step_rejects_nonpositive_tau():
    with pytest.raises(ValueError):
        discrete_ratchet_step(DiracComb(np.array([1.0, 0.0]), POT.minima()), 0.0)


def test_comb_validation():
    with pytest.raises(ValueError):
        DiracComb(np.array([0.7, 0.6]), POT.minima())
    with pytest.raises(ValueError):
        DiracComb(np.array([0.5, 0.5]), np.array([0.7, 0.2]))


# -- Wasserstein-1 -------------------------------------------------------------------


def test_w1_between_atoms():
    for a, b in [(0.2, 0.7), (0.1, 0.15), (0.5, 0.5)]:
        ca = DiracComb(np.array([1.0]), np.array([a]))
        cb = DiracComb(np.array([1.0]), np.array([b]))
        assert wasserstein1(ca, cb) == pytest.approx(abs(a - b), abs=1e-14)


def test_w1_uniform_to_central_atom():
    # int_0^{1/2} x dx + int_{1/2}^1 (1 - x) dx = 1/4
    atom = DiracComb(np.array([1.0]), np.array([0.5]))
    assert wasserstein1(DensityGrid.uniform(64), atom) == pytest.approx(0.25, abs=1e-14)


def test_w1_identity_and_symmetry():
    rng = np.random.default_rng(11)
    v = rng.random(64) + 0.2
    rho = DensityGrid(v / v.mean())
    comb = DiracComb(np.array([0.3, 0.7]), np.array([0.25, 0.66]))
    assert wasserstein1(rho, rho) == 0.0
    assert wasserstein1(rho, comb) == pytest.approx(wasserstein1(comb, rho), abs=1e-15)


def test_w1_triangle_inequality_sampled():
    rng = np.random.default_rng(5)
    measures = []
    for _ in range(4):
        v = rng.random(32) + 0.1
        measures.append(DensityGrid(v / v.mean()))
        w = rng.random(3)
        measures.append(DiracComb(w / w.sum(), np.sort(rng.random(3))))
    for p in measures:
        for q in measures:
            for r in measures:
                assert wasserstein1(p, q) <= (wasserstein1(p, r)
                                              + wasserstein1(r, q) + 1e-12)


def test_w1_grid_vs_exact_linear_cdf():
    # density 2x has CDF x^2; distance to uniform (CDF x) is int |x - x^2| = 1/6
    n = 2048
    mids = (np.arange(n) + 0.5) / n
    rho = DensityGrid(2.0 * mids / (2.0 * mids).mean())
    assert wasserstein1(rho, DensityGrid.uniform(n)) == pytest.approx(1.0 / 6.0,
                                                                      abs=1e-4)


def test_w1_rejects_unnormalized():
    good = DensityGrid.uniform(16)

    class Fake:
        def mass(self):
            return 0.7
    with pytest.raises(ValueError):
        wasserstein1(good, Fake())


# -- localization -------------------------------------------------------------------


def test_localization_time_zero_is_direct_distance():
    rho0 = DensityGrid.uniform(256)
    sched = RatchetSchedule(sigma=0.05, t_tr=4.0, t_diff=10.0)
    trace = ratchet_localization_check(POT, sched, rho0, times=(0.0, 0.5))
    assert trace.distances[0] == pytest.approx(
        wasserstein1(rho0, collapse(rho0, POT)), abs=1e-15)
    assert trace.distances[1] < trace.distances[0]


def test_localization_trace_decreases_to_floor():
    rho0 = DensityGrid.uniform(512)
    sched = RatchetSchedule(sigma=0.05, t_tr=8.0, t_diff=10.0)
    trace = ratchet_localization_check(POT, sched, rho0, times=(1.0, 2.0, 4.0, 8.0))
    assert np.all(np.diff(trace.distances) <= 1e-9)   # settled at the floor


def test_localization_floor_shrinks_with_sigma():
    """The floor is the Boltzmann spread plus transient inter-well leakage.

    The spread E|x - a| comes from quadrature of the equilibrium density;
    the leakage term is the transport cost of the measured well-mass
    imbalance of the final state.
    """
    rho0 = DensityGrid.uniform(1024)
    comb0 = collapse(rho0, POT)
    floors = []
    for sigma in (0.05, 0.01, 0.001):
        sched = RatchetSchedule(sigma=sigma, t_tr=8.0, t_diff=10.0)
        trace = ratchet_localization_check(POT, sched, rho0, times=(4.0, 8.0))
        floors.append(trace.distances[-1])

        z, _ = quad(lambda x: np.exp(-POT.psi(x) / sigma), 0.0, 0.5,
                    epsabs=1e-13, limit=300)
        spread, _ = quad(lambda x: abs(x - 0.2) * np.exp(-POT.psi(x) / sigma),
                         0.0, 0.5, epsabs=1e-13, limit=300)
        oracle = spread / z
        leak = wasserstein1(
            DiracComb(well_masses(trace.final_density, POT), POT.minima()), comb0)
        assert oracle - 1e-4 <= floors[-1] <= oracle + leak + 0.002
    assert floors[0] > floors[1] > floors[2]


# -- transport verification -----------------------------------------------------------


def test_verify_transport_forward_case():
    sched = RatchetSchedule(sigma=0.05, t_tr=4.0, t_diff=10.0)
    rep = verify_transport(POT, sched, n=512, check_reversed=False)
    assert rep.converged and rep.monotone_decreasing and rep.bound_ok
    assert rep.min_gap == pytest.approx(6.04e-4, abs=5e-5)
    assert rep.discrepancy <= rep.bound + 1e-15
    assert rep.failure is None
    assert rep.passed


def test_verify_transport_symmetric_reports_no_transport():
    pot = RatchetPotential(2, 0.25)
    sched = RatchetSchedule(sigma=0.05, t_tr=4.0, t_diff=10.0)
    rep = verify_transport(pot, sched, n=512, check_reversed=False)
    assert rep.converged
    assert rep.no_transport and not rep.monotone_decreasing
    assert rep.failure == "no transport detected"
    assert not rep.passed


def test_verify_transport_chain_consistency_bound():
    """The computed inequality |rho_hat - mu| <= |rho_hat - rho_hat P| / kappa."""
    sched = RatchetSchedule(sigma=0.05, t_tr=2.0, t_diff=8.0)
    rep = verify_transport(POT, sched, n=256, check_reversed=False)
    assert rep.converged
    assert rep.discrepancy <= rep.residual / rep.kappa + 1e-15


# -- sweep -----------------------------------------------------------------------------


def test_consistency_sweep_small_ladder():
    ladder = [(0, 2.0, 0.3, 0.1), (1, 3.0, 0.4, 0.07)]
    points = consistency_sweep(POT, ladder=ladder, n=256)
    assert [sp.index for sp in points] == [0, 1]
    assert all(sp.converged for sp in points)
    assert points[1].ratio < points[0].ratio
    assert all(sp.kappa > 0.9 for sp in points)
    assert all(sp.h2_norm < 5.8 for sp in points)


def test_sweep_thread_cap_respected(monkeypatch):
    monkeypatch.setenv("RATCHET_LAB_THREADS", "1")
    ladder = [(0, 1.0, 0.3, 0.1)]
    points = consistency_sweep(POT, ladder=ladder, n=128)
    assert points[0].converged
