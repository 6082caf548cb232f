"""Well masses, Wasserstein-1 distance, the idealized collapse-diffuse
ratchet, and the end-to-end transport verification that ties the PDE orbit
to the Markov chain.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .chain import build_transition_matrix, stationary_vector, zero_sum_gap
from .fokker_planck import (RatchetSchedule, default_time_step, find_periodic,
                            ratchet_phase, sobolev_h2_norm)
from .grid import DensityGrid
from .potential import RatchetPotential

__all__ = [
    "DiracComb",
    "well_masses",
    "collapse",
    "discrete_ratchet_step",
    "wasserstein1",
    "LocalizationTrace",
    "ratchet_localization_check",
    "TransportReport",
    "verify_transport",
    "SweepPoint",
    "consistency_sweep",
    "default_ladder",
]

MASS_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class DiracComb:
    """Weighted point masses at the well minima."""

    weights: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        p = np.asarray(self.positions, dtype=float)
        if w.shape != p.shape or w.ndim != 1:
            raise ValueError("weights and positions must be 1-D arrays of equal length")
        if np.any(w < -1e-12):
            raise ValueError("comb weights must be nonnegative")
        # collapse of any accepted density must yield an accepted comb, so
        # the gate matches the density mass tolerance
        if abs(w.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"comb weights sum to {w.sum()!r}, expected 1")
        if np.any(np.diff(p) <= 0.0) or p[0] < 0.0 or p[-1] > 1.0:
            raise ValueError("positions must be increasing inside [0, 1]")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "positions", p)

    def mass(self) -> float:
        return float(self.weights.sum())


def well_masses(rho: DensityGrid, pot: RatchetPotential) -> np.ndarray:
    """Integral of the density over each well [x_i, x_{i+1}] (exact cell sums)."""
    if rho.n % pot.k != 0:
        raise ValueError(
            f"grid size {rho.n} not divisible by tooth count {pot.k}; wells misaligned")
    return rho.values.reshape(pot.k, -1).sum(axis=1) / rho.n


def collapse(rho: DensityGrid, pot: RatchetPotential) -> DiracComb:
    """Idealized ratchet-phase limit: all well mass concentrated at the minima."""
    return DiracComb(weights=well_masses(rho, pot), positions=pot.minima())


def discrete_ratchet_step(comb: DiracComb, tau: float) -> np.ndarray:
    """Well masses after diffusing a comb for nondimensional time tau.

    Equals the comb weights times the transfer matrix; recomputed here
    directly from the Green antiderivative at the comb's own positions.
    """
    if tau <= 0.0:
        raise ValueError(f"diffusion time tau must be positive, got {tau}")
    k = comb.weights.shape[0]
    pot = RatchetPotential(k=k, a=float(comb.positions[0]))
    if np.max(np.abs(comb.positions - pot.minima())) > 1e-12:
        raise ValueError("comb positions are not the minima of a ratchet potential")
    p = build_transition_matrix(pot, tau)
    return comb.weights @ p.matrix


def _cdf_pieces(measure):
    """Breakpoints, right-limit CDF values at them, and per-piece slopes."""
    if isinstance(measure, DensityGrid):
        edges = np.arange(measure.n + 1) / measure.n
        cdf = np.concatenate(([0.0], np.cumsum(measure.values) / measure.n))
        slopes = measure.values
        return edges, cdf, slopes
    if isinstance(measure, DiracComb):
        pts = np.concatenate(([0.0], measure.positions, [1.0]))
        pts = np.unique(pts)
        cdf = np.array([measure.weights[measure.positions <= x].sum() for x in pts])
        slopes = np.zeros(pts.shape[0] - 1)
        return pts, cdf, slopes
    raise TypeError(f"unsupported measure type {type(measure).__name__}")


def wasserstein1(p, q) -> float:
    """Wasserstein-1 distance between measures on [0, 1].

    One-dimensional optimal transport reduces to the L1 distance between
    cumulative distribution functions; with piecewise-linear (grid) and
    piecewise-constant (comb) CDFs the integral is evaluated exactly.
    """
    for m in (p, q):
        mass = m.mass()
        if abs(mass - 1.0) > MASS_TOL:
            raise ValueError(f"measure has mass {mass!r}, expected 1")
    bp_p, cdf_p, slope_p = _cdf_pieces(p)
    bp_q, cdf_q, slope_q = _cdf_pieces(q)
    cuts = np.union1d(bp_p, bp_q)
    widths = np.diff(cuts)
    mids = cuts[:-1]

    def right_values(bp, cdf, slopes, x):
        idx = np.minimum(np.searchsorted(bp, x, side="right") - 1, len(slopes) - 1)
        return cdf[idx] + slopes[idx] * (x - bp[idx]), slopes[idx]

    fp, sp = right_values(bp_p, cdf_p, slope_p, mids)
    fq, sq = right_values(bp_q, cdf_q, slope_q, mids)
    d0 = fp - fq
    d1 = d0 + (sp - sq) * widths
    same = d0 * d1 >= 0.0
    seg = np.where(
        same,
        0.5 * (np.abs(d0) + np.abs(d1)) * widths,
        0.5 * (d0**2 + d1**2) / np.maximum(np.abs(d0) + np.abs(d1), 1e-300) * widths,
    )
    return float(seg.sum())


@dataclass(frozen=True, eq=False)
class LocalizationTrace:
    """Distances from the evolving ratchet-phase state to the collapse comb."""

    times: np.ndarray
    distances: np.ndarray
    final_density: DensityGrid


def ratchet_localization_check(pot: RatchetPotential, sched: RatchetSchedule,
                               rho0: DensityGrid,
                               times: tuple = (0.0, 1.0, 2.0, 4.0, 8.0),
                               dt: float | None = None) -> LocalizationTrace:
    """Wasserstein-1 trace of the drift-on phase against the idealized comb.

    Evolves rho0 once up to the final checkpoint (shared time step across
    segments) and records the distance to the comb carrying rho0's well
    masses; the trace decreases toward a sigma-dependent floor.
    """
    times = np.sort(np.asarray(times, dtype=float))
    comb = collapse(rho0, pot)
    if dt is None:
        dt = default_time_step(sched.sigma, float(times[-1]), rho0.n)
    state = rho0
    distances = []
    prev = 0.0
    for t in times:
        if t > prev:
            state = ratchet_phase(state, pot, sched.sigma, t - prev, dt=dt)
            prev = t
        distances.append(wasserstein1(state, comb))
    return LocalizationTrace(times=times, distances=np.array(distances),
                             final_density=state)


@dataclass(frozen=True, eq=False)
class TransportReport:
    """Outcome of the full PDE-versus-chain transport verification."""

    converged: bool
    cycles: int
    rho_hat: np.ndarray | None           # well masses of the periodic orbit
    mu: np.ndarray | None                # stationary vector of the chain
    kappa: float | None
    residual: float | None               # |rho_hat - rho_hat P|
    discrepancy: float | None            # |rho_hat - mu|
    bound: float | None                  # residual / kappa
    bound_ok: bool
    gaps: np.ndarray | None
    min_gap: float | None
    monotone_decreasing: bool
    no_transport: bool
    h2_norm: float | None
    failure: str | None = None
    reversed_monotone_increasing: bool | None = None

    @property
    def passed(self) -> bool:
        ok = self.converged and self.monotone_decreasing and self.bound_ok
        if self.reversed_monotone_increasing is not None:
            ok = ok and self.reversed_monotone_increasing
        return ok


def _orbit_report(pot, sched, n, tol, max_cycles, dt):
    orbit = find_periodic(pot, sched, tol=tol, max_cycles=max_cycles, n=n, dt=dt)
    if not orbit.converged:
        return orbit, None
    rho_hat = well_masses(orbit.density, pot)
    p = build_transition_matrix(pot, sched.tau)
    mu = stationary_vector(p).mu
    kappa = zero_sum_gap(p)
    residual = float(np.linalg.norm(rho_hat - rho_hat @ p.matrix))
    discrepancy = float(np.linalg.norm(rho_hat - mu))
    return orbit, {
        "rho_hat": rho_hat, "mu": mu, "kappa": kappa, "residual": residual,
        "discrepancy": discrepancy, "bound": residual / kappa,
        "h2": sobolev_h2_norm(orbit.density),
    }


def verify_transport(pot: RatchetPotential, sched: RatchetSchedule,
                     n: int = 1024, tol: float = 1e-9, max_cycles: int = 10_000,
                     dt: float | None = None,
                     check_reversed: bool = True) -> TransportReport:
    """Find the periodic orbit and check the transport claims against the chain.

    Asserts (i) strictly decreasing well masses, (ii) the exact error bound
    |rho_hat - mu| <= |rho_hat - rho_hat P| / kappa(P), and optionally
    (iii) that mirroring the potential reverses every inequality.  Failure
    modes are reported in the result, not raised.
    """
    gap_tol = 10.0 * tol
    orbit, data = _orbit_report(pot, sched, n, tol, max_cycles, dt)
    if data is None:
        return TransportReport(
            converged=False, cycles=orbit.cycles, rho_hat=None, mu=None,
            kappa=None, residual=None, discrepancy=None, bound=None,
            bound_ok=False, gaps=None, min_gap=None, monotone_decreasing=False,
            no_transport=False, h2_norm=None,
            failure="no periodic orbit found within max_cycles")

    gaps = data["rho_hat"][:-1] - data["rho_hat"][1:]
    monotone = bool(np.all(gaps > gap_tol))
    no_transport = bool(np.all(np.abs(gaps) <= gap_tol))
    bound_ok = data["discrepancy"] <= data["bound"] + 1e-15

    reversed_ok = None
    if check_reversed:
        _, rdata = _orbit_report(pot.reflected(), sched, n, tol, max_cycles, dt)
        if rdata is None:
            reversed_ok = False
        else:
            rgaps = rdata["rho_hat"][:-1] - rdata["rho_hat"][1:]
            reversed_ok = bool(np.all(rgaps < -gap_tol))

    failure = None
    if not monotone:
        failure = "no transport detected" if no_transport else "monotonicity violated"
    elif not bound_ok:
        failure = "chain-consistency bound violated"
    elif reversed_ok is False:
        failure = "mirrored potential did not reverse the ordering"

    return TransportReport(
        converged=True, cycles=orbit.cycles, rho_hat=data["rho_hat"], mu=data["mu"],
        kappa=data["kappa"], residual=data["residual"],
        discrepancy=data["discrepancy"], bound=data["bound"], bound_ok=bound_ok,
        gaps=gaps, min_gap=float(gaps.min()), monotone_decreasing=monotone,
        no_transport=no_transport, h2_norm=data["h2"], failure=failure,
        reversed_monotone_increasing=reversed_ok)


@dataclass(frozen=True, eq=False)
class SweepPoint:
    """One rung of the asymptotic-consistency ladder."""

    index: int
    t_tr: float
    tau: float
    sigma: float
    converged: bool
    cycles: int
    rho_gap_min: float
    mu_gap_min: float
    discrepancy: float
    kappa: float
    residual: float
    ratio: float                 # discrepancy / smallest chain gap
    h2_norm: float


def default_ladder(count: int = 7, t_tr0: float = 2.0, t_tr_factor: float = 1.5,
                   tau0: float = 0.3, tau_step: float = 0.1,
                   sigma0: float = 0.1, sigma_factor: float = 0.7):
    """Geometric parameter ladder: t_tr up, tau up, sigma down."""
    return [
        (i, t_tr0 * t_tr_factor**i, tau0 + tau_step * i, sigma0 * sigma_factor**i)
        for i in range(count)
    ]


def _sweep_workers(requested: int | None) -> int:
    env = os.environ.get("RATCHET_LAB_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(requested or cap, cap))


def consistency_sweep(pot: RatchetPotential, ladder=None, n: int = 1024,
                      tol: float = 1e-9, max_cycles: int = 10_000,
                      dt: float | None = None,
                      max_workers: int | None = None) -> list[SweepPoint]:
    """Run the ladder and measure how fast the orbit tracks the chain.

    Points are independent and run concurrently (capped by the
    RATCHET_LAB_THREADS environment variable); results are ordered by rung
    index so concurrency never changes the artifact.
    """
    ladder = default_ladder() if ladder is None else ladder

    def run(point):
        idx, t_tr, tau, sigma = point
        sched = RatchetSchedule(sigma=sigma, t_tr=t_tr, t_diff=tau / sigma)
        orbit, data = _orbit_report(pot, sched, n, tol, max_cycles, dt)
        if data is None:
            return SweepPoint(index=idx, t_tr=t_tr, tau=tau, sigma=sigma,
                              converged=False, cycles=orbit.cycles,
                              rho_gap_min=np.nan, mu_gap_min=np.nan,
                              discrepancy=np.nan, kappa=np.nan, residual=np.nan,
                              ratio=np.nan, h2_norm=np.nan)
        rho_gaps = data["rho_hat"][:-1] - data["rho_hat"][1:]
        mu_gaps = data["mu"][:-1] - data["mu"][1:]
        return SweepPoint(
            index=idx, t_tr=t_tr, tau=tau, sigma=sigma, converged=True,
            cycles=orbit.cycles, rho_gap_min=float(rho_gaps.min()),
            mu_gap_min=float(mu_gaps.min()), discrepancy=data["discrepancy"],
            kappa=data["kappa"], residual=data["residual"],
            ratio=data["discrepancy"] / float(mu_gaps.min()),
            h2_norm=data["h2"])

    with ThreadPoolExecutor(max_workers=_sweep_workers(max_workers)) as pool:
        points = list(pool.map(run, ladder))
    return sorted(points, key=lambda sp: sp.index)
