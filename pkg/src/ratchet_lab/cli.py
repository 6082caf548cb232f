"""Command-line entry point.

Subcommands: kernel-table, chain build|stationary|certify, pde
simulate|periodic, verify, sweep, compare.  Parameters come from a JSON
config file plus flag overrides (flags win); artifacts are CSV/JSON files
with floats printed at 17 significant digits so runs are byte-comparable.

Exit codes: 0 success, 1 verification failure or non-convergence,
2 invalid configuration.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import measures
from .chain import (build_transition_matrix, certify_gap, stationary_vector,
                    verify_monotone, zero_sum_gap)
from .config import ConfigError, ExperimentConfig
from .fokker_planck import find_periodic, ratchet_phase, sobolev_h2_norm
from .grid import DensityGrid
from .kernel import diffuse, neumann_green

__all__ = ["main"]


# -- deterministic serialization ------------------------------------------------


def _fmt(x) -> str:
    """Floats at 17 significant digits; exact cross-run comparability."""
    if isinstance(x, float):
        if np.isnan(x):
            return "null"
        return f"{x:.17g}"
    return str(x)


def _jsonify(obj, indent=0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{k}": {_jsonify(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = [_jsonify(v, indent + 1) for v in np.asarray(obj).tolist()] \
            if isinstance(obj, np.ndarray) else [_jsonify(v, indent + 1) for v in obj]
        return "[" + ", ".join(seq) + "]"
    if isinstance(obj, bool) or isinstance(obj, np.bool_):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    return _fmt(float(obj))


def write_json(path: Path, obj: dict):
    path.write_text(_jsonify(obj) + "\n")


def write_csv(path: Path, header: list[str], rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
    path.write_text("\n".join(lines) + "\n")


# -- configuration plumbing -----------------------------------------------------

_OVERRIDE_FLAGS = {
    "k": ("potential.k", int),
    "a": ("potential.a", float),
    "v0": ("potential.V0", float),
    "sigma": ("schedule.sigma", float),
    "t_tr": ("schedule.t_tr", float),
    "t_diff": ("schedule.t_diff", float),
    "n": ("grid.n", int),
    "dt": ("grid.dt", float),
    "tol": ("solver.tol", float),
    "max_cycles": ("solver.max_cycles", int),
}


def _add_common(sub: argparse.ArgumentParser):
    sub.add_argument("--config", type=Path, help="JSON config file")
    sub.add_argument("--out", type=Path, default=Path("."), help="output directory")
    for flag, (_, cast) in _OVERRIDE_FLAGS.items():
        sub.add_argument(f"--{flag.replace('_', '-')}", type=cast, default=None)


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    overrides = {}
    for flag, (path, _) in _OVERRIDE_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[path] = value
    return cfg.with_overrides(overrides) if overrides else cfg


def _outdir(args) -> Path:
    args.out.mkdir(parents=True, exist_ok=True)
    return args.out


# -- subcommands ------------------------------------------------------------------


def _cmd_kernel_table(args, cfg: ExperimentConfig) -> int:
    s_values = [float(v) for v in args.s_values.split(",")]
    pts = np.linspace(0.0, 1.0, args.points)
    rows = []
    for s in s_values:
        xi, x = np.meshgrid(pts, pts, indexing="ij")
        vals = neumann_green(xi, x, s)
        for i in range(args.points):
            for j in range(args.points):
                rows.append((s, pts[i], pts[j], vals[i, j]))
    out = _outdir(args) / "kernel_table.csv"
    write_csv(out, ["s", "xi", "x", "g"], rows)
    print(f"wrote {out}")
    return 0


def _chain_inputs(args, cfg: ExperimentConfig):
    pot = cfg.make_potential()
    tau = args.tau if args.tau is not None else cfg.make_schedule().tau
    if tau <= 0.0:
        raise ConfigError("tau", f"must be positive, got {tau}")
    return pot, tau


def _cmd_chain(args, cfg: ExperimentConfig) -> int:
    pot, tau = _chain_inputs(args, cfg)
    out = _outdir(args)
    if args.action == "build":
        p = build_transition_matrix(pot, tau)
        path = out / "chain_matrix.json"
        write_json(path, {
            "k": pot.k, "a": pot.a, "tau": tau,
            "matrix": p.matrix,
            "row_sums": p.matrix.sum(axis=1),
            "config": cfg.to_dict(),
        })
        print(f"wrote {path}")
        return 0
    if args.action == "stationary":
        p = build_transition_matrix(pot, tau)
        sv = stationary_vector(p)
        path = out / "chain_stationary.json"
        write_json(path, {
            "k": pot.k, "a": pot.a, "tau": tau,
            "mu": sv.mu, "residual": sv.residual,
            "kappa": zero_sum_gap(p),
            "config": cfg.to_dict(),
        })
        print(f"wrote {path}")
        return 0
    # certify: single tau -> JSON certificate; a tau list -> CSV gap table
    taus = [float(v) for v in args.taus.split(",")] if args.taus else [tau]
    certs = []
    for t in taus:
        p = build_transition_matrix(pot, t)
        cert = certify_gap(p)
        mono = verify_monotone(stationary_vector(p), t)
        certs.append((t, cert, mono))
    if args.taus:
        path = out / "chain_gaps.csv"
        write_csv(path, ["tau", "column_gap", "column_gap_predicted", "min_stationary_gap",
                         "kappa", "passed"],
                  [(t, c.column_gap, c.column_gap_predicted, m.min_gap, c.kappa,
                    str(c.passed).lower()) for (t, c, m) in certs])
        write_json(out / "effective_config.json", {"config": cfg.to_dict()})
        print(f"wrote {path}")
        return 0
    t, cert, mono = certs[0]
    path = out / "chain_certificate.json"
    write_json(path, {
        "k": cert.k, "a": cert.a, "tau": cert.tau,
        "crossing_row": cert.crossing_row,
        "column_sums": cert.column_sums,
        "column_gaps": cert.column_gaps,
        "column_gap": cert.column_gap,
        "column_gap_predicted": cert.column_gap_predicted,
        "last_column_min": cert.last_column_min,
        "kappa": cert.kappa,
        "monotone_ok": cert.monotone_ok,
        "gap_ok": cert.gap_ok,
        "last_column_ok": cert.last_column_ok,
        "passed": cert.passed,
        "verdict": cert.reason,
        "stationary_gaps": mono.gaps,
        "config": cfg.to_dict(),
    })
    print(f"wrote {path} (verdict: {cert.reason})")
    return 0


def _cmd_pde(args, cfg: ExperimentConfig) -> int:
    pot = cfg.make_potential()
    sched = cfg.make_schedule()
    n, dt = cfg.grid["n"], cfg.grid["dt"]
    out = _outdir(args)
    if args.action == "simulate":
        state = DensityGrid.uniform(n)
        mids = state.cell_midpoints()
        columns = [("rho_initial", state.values)]
        for c in range(1, args.cycles + 1):
            state = ratchet_phase(state, pot, sched.sigma, sched.t_tr, dt=dt)
            columns.append((f"rho_ratchet_{c}", state.values))
            if sched.t_diff > 0.0:
                state = diffuse(state, sched.tau)
            columns.append((f"rho_cycle_{c}", state.values))
        path = out / "pde_snapshots.csv"
        header = ["x"] + [name for name, _ in columns]
        rows = [(mids[i], *(vals[i] for _, vals in columns)) for i in range(n)]
        write_csv(path, header, rows)
        write_json(out / "effective_config.json", {"config": cfg.to_dict()})
        print(f"wrote {path}")
        return 0
    orbit = find_periodic(pot, sched, tol=cfg.solver["tol"],
                          max_cycles=cfg.solver["max_cycles"], n=n, dt=dt)
    path = out / "periodic.json"
    write_json(path, {
        "converged": orbit.converged,
        "cycles": orbit.cycles,
        "contraction": orbit.contraction,
        "residuals": orbit.residuals,
        "well_masses": measures.well_masses(orbit.density, pot),
        "h2_norm": sobolev_h2_norm(orbit.density),
        "config": cfg.to_dict(),
    })
    dens = out / "periodic_density.csv"
    write_csv(dens, ["x", "rho"],
              zip(orbit.density.cell_midpoints(), orbit.density.values))
    print(f"wrote {path} and {dens}")
    return 0 if orbit.converged else 1


def _cmd_verify(args, cfg: ExperimentConfig) -> int:
    pot = cfg.make_potential()
    sched = cfg.make_schedule()
    report = measures.verify_transport(
        pot, sched, n=cfg.grid["n"], tol=cfg.solver["tol"],
        max_cycles=cfg.solver["max_cycles"], dt=cfg.grid["dt"])
    path = _outdir(args) / "verify.json"
    write_json(path, {
        "passed": report.passed,
        "converged": report.converged,
        "cycles": report.cycles,
        "failure": report.failure,
        "well_masses": report.rho_hat,
        "stationary": report.mu,
        "gaps": report.gaps,
        "min_gap": report.min_gap,
        "monotone_decreasing": report.monotone_decreasing,
        "no_transport": report.no_transport,
        "kappa": report.kappa,
        "residual": report.residual,
        "discrepancy": report.discrepancy,
        "bound": report.bound,
        "bound_ok": report.bound_ok,
        "reversed_monotone_increasing": report.reversed_monotone_increasing,
        "h2_norm": report.h2_norm,
        "config": cfg.to_dict(),
    })
    print(f"wrote {path} (passed: {report.passed})")
    return 0 if report.passed else 1


def _cmd_sweep(args, cfg: ExperimentConfig) -> int:
    pot = cfg.make_potential()
    points = measures.consistency_sweep(
        pot, ladder=cfg.ladder(), n=cfg.grid["n"], tol=cfg.solver["tol"],
        max_cycles=cfg.solver["max_cycles"], dt=cfg.grid["dt"])
    path = _outdir(args) / "sweep.csv"
    write_csv(path,
              ["n", "t_tr", "tau", "sigma", "converged", "cycles", "rho_gap_min",
               "mu_gap_min", "discrepancy", "kappa", "residual", "ratio", "h2_norm"],
              [(sp.index, sp.t_tr, sp.tau, sp.sigma, str(sp.converged).lower(),
                sp.cycles, sp.rho_gap_min, sp.mu_gap_min, sp.discrepancy,
                sp.kappa, sp.residual, sp.ratio, sp.h2_norm) for sp in points])
    write_json(args.out / "effective_config.json", {"config": cfg.to_dict()})
    print(f"wrote {path}")
    return 0 if all(sp.converged for sp in points) else 1


def _cmd_compare(args, cfg: ExperimentConfig) -> int:
    pot = cfg.make_potential()
    sched = cfg.make_schedule()
    times = tuple(float(v) for v in args.times.split(","))
    rho0 = DensityGrid.uniform(cfg.grid["n"])
    trace = measures.ratchet_localization_check(pot, sched, rho0, times=times,
                                                dt=cfg.grid["dt"])
    path = _outdir(args) / "compare.csv"
    write_csv(path, ["t_tr", "w1_to_comb"], zip(trace.times, trace.distances))
    write_json(args.out / "effective_config.json", {"config": cfg.to_dict()})
    print(f"wrote {path}")
    return 0


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ratchet-lab",
        description="Flashing-ratchet Brownian motor laboratory")
    subs = parser.add_subparsers(dest="command", required=True)

    kt = subs.add_parser("kernel-table", help="tabulate the Neumann Green function")
    kt.add_argument("--s-values", default="0.01,0.1,0.5,1.0")
    kt.add_argument("--points", type=int, default=50)
    _add_common(kt)
    kt.set_defaults(func=_cmd_kernel_table)

    ch = subs.add_parser("chain", help="discrete-ratchet Markov chain")
    ch.add_argument("action", choices=["build", "stationary", "certify"])
    ch.add_argument("--tau", type=float, default=None)
    ch.add_argument("--taus", default=None, help="comma list; certify emits a CSV table")
    _add_common(ch)
    ch.set_defaults(func=_cmd_chain)

    pde = subs.add_parser("pde", help="switched Fokker-Planck solver")
    pde.add_argument("action", choices=["simulate", "periodic"])
    pde.add_argument("--cycles", type=int, default=3)
    _add_common(pde)
    pde.set_defaults(func=_cmd_pde)

    ver = subs.add_parser("verify", help="full transport verification")
    _add_common(ver)
    ver.set_defaults(func=_cmd_verify)

    sw = subs.add_parser("sweep", help="asymptotic-consistency ladder")
    _add_common(sw)
    sw.set_defaults(func=_cmd_sweep)

    cmp_ = subs.add_parser("compare", help="Wasserstein trace against the comb")
    cmp_.add_argument("--times", default="0,1,2,4,8")
    _add_common(cmp_)
    cmp_.set_defaults(func=_cmd_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        return args.func(args, cfg)
    except ConfigError as err:
        print(f"invalid config -- {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"invalid config -- {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
