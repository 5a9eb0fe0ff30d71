"""Experiment driver: solve, convergence sweeps, spectra and locus dumps.

Configuration is one JSON document; outputs are CSV files plus a JSON
manifest, each embedding the fully resolved configuration so a run can be
reproduced from any of its artifacts.  Exit codes: 0 success, 2 bad
configuration, 3 solver non-convergence.
"""

import argparse
import json
import math
import sys as _sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import problems, spectrum
from .bvm import assemble_all_at_once, build_gmm, extract_trajectory
from .krylov import build_preconditioner, direct_solve, gmres_solve
from .oracles import relative_l2_error
from .spectrum import boundary_locus, eigenvalues_of_D, lmm_catalog, \
    rk_boundary_points

__all__ = ["ExperimentConfig", "ConfigError", "load_config", "run_solve",
           "run_convergence", "run_spectrum", "run_locus", "run_schrodinger",
           "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3


class ConfigError(ValueError):
    pass


@dataclass
class SolverSettings:
    method: str = "gmres"      # "gmres" or "direct" (spatial eigenbasis solve)
    tol: float = 1e-10
    max_iter: int = 500
    theta: float = math.pi
    restart: int = None
    precondition: bool = True
    workers: int = 0


@dataclass
class ExperimentConfig:
    """Resolved experiment description.

    Exactly one of (n_steps, tau) and one of (m, h) must be given; sweep
    lists, when present, must be strictly decreasing.
    """

    problem: str
    T: float = 2.0
    L: float = None
    eps: float = None
    delta: float = None
    V: float = None
    mode: int = None
    n_steps: int = None
    tau: float = None
    m: int = None
    h: float = None
    tau_over_h: float = 0.5
    h_sweep: list = None
    tau_sweep: list = None
    snapshot_times: list = None
    n_max: int = 400
    weideman_n: int = 256
    locus_methods: list = None
    window: list = None
    solver: SolverSettings = field(default_factory=SolverSettings)
    out: str = "out"

    def validate(self):
        if self.problem not in problems.catalog():
            raise ConfigError(f"problem: unknown name {self.problem!r}")
        if self.h_sweep is not None and self.tau_sweep is not None:
            raise ConfigError("sweep: give at most one of h_sweep, tau_sweep")
        for name, sweep in (("h_sweep", self.h_sweep),
                            ("tau_sweep", self.tau_sweep)):
            if sweep is not None:
                if len(sweep) == 0:
                    raise ConfigError(f"{name}: empty sweep")
                if any(b >= a for a, b in zip(sweep, sweep[1:])):
                    raise ConfigError(f"{name}: must be strictly decreasing")
        if self.tau_sweep is not None and (self.m is None) == (self.h is None):
            raise ConfigError("tau_sweep: fix the space grid with one of m, h")
        if self.h_sweep is None and self.tau_sweep is None:
            if (self.n_steps is None) == (self.tau is None):
                raise ConfigError("time grid: give exactly one of n_steps, tau")
            if (self.m is None) == (self.h is None):
                raise ConfigError("space grid: give exactly one of m, h")
        if not self.T > 0:
            raise ConfigError("T: must be positive")
        return self

    def build_problem(self) -> problems.Problem:
        kw = {}
        if self.L is not None:
            kw["L"] = self.L
        if self.eps is not None:
            if self.problem.startswith("schrodinger"):
                kw["gamma"] = self.eps
            else:
                kw["eps"] = self.eps
        if self.delta is not None:
            kw["delta"] = self.delta
        if self.V is not None:
            kw["V"] = self.V
        if self.mode is not None:
            kw["mode"] = self.mode
        return problems.build_problem(self.problem, **kw)

    def time_steps(self, h=None) -> int:
        if self.n_steps is not None:
            return self.n_steps
        tau = self.tau if self.tau is not None else self.tau_over_h * h
        return max(2, int(round(self.T / tau)))


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    try:
        solver = SolverSettings(**raw.pop("solver", {}))
    except TypeError as exc:
        raise ConfigError(f"solver: {exc}")
    if solver.method not in ("gmres", "direct"):
        raise ConfigError(f"solver.method: unknown method {solver.method!r}")
    known = {f for f in ExperimentConfig.__dataclass_fields__ if f != "solver"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    return ExperimentConfig(solver=solver, **raw).validate()


def _resolved(cfg: ExperimentConfig) -> dict:
    return asdict(cfg)


def _write_csv(path: Path, header, rows, cfg):
    lines = ["# config: " + json.dumps(_resolved(cfg), default=str)]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(f"{v:.16g}" if isinstance(v, float) else str(v)
                              for v in row))
    path.write_text("\n".join(lines) + "\n")


def _solve_once(cfg, pb, h=None, m=None, precondition=None):
    """One discretize-assemble-solve pass; returns (report, run, gmm, traj)."""
    run = problems.setup_run(pb, h=h, m=m, weideman_n=cfg.weideman_n)
    N = cfg.time_steps(h=h if h is not None else pb.L / m)
    gmm = build_gmm(N, cfg.T)
    system = assemble_all_at_once(gmm, run.sys, run.source, run.u0v0,
                                  hmode=pb.hilbert, weideman_n=cfg.weideman_n)
    if cfg.solver.method == "direct":
        report = direct_solve(system)
    else:
        use_pre = cfg.solver.precondition if precondition is None else precondition
        pre = build_preconditioner(gmm, run.sys, theta=cfg.solver.theta) \
            if use_pre else None
        report = gmres_solve(system, pre, tol=cfg.solver.tol,
                             max_iter=cfg.solver.max_iter,
                             restart=cfg.solver.restart,
                             workers=cfg.solver.workers)
    traj = extract_trajectory(report.solution, system)
    return report, run, gmm, traj


def _error_at(cfg, pb, run, traj, t_index, gmm):
    oracle = pb.oracle(n_max=cfg.n_max)
    t = t_index * gmm.tau
    window = tuple(cfg.window) if cfg.window else pb.measure_window
    u, _ = pb.physical_state(traj[t_index], t)
    if pb.scalar_field == "complex":
        exact = oracle
    else:
        u = u.real
        exact = lambda x, tt: np.asarray(oracle(x, tt)).real
    return relative_l2_error(u, exact, run.grid, t, window=window)


def run_solve(cfg: ExperimentConfig, out_dir: Path) -> int:
    pb = cfg.build_problem()
    report, run, gmm, traj = _solve_once(cfg, pb, h=cfg.h, m=cfg.m)
    x = run.grid.nodes
    times = cfg.snapshot_times or [0.0, cfg.T / 2.0, cfg.T]
    is_complex = pb.scalar_field == "complex"
    for t in times:
        j = min(range(len(traj)), key=lambda i: abs(i * gmm.tau - t))
        u, v = pb.physical_state(traj[j], j * gmm.tau)
        if is_complex:
            rows = zip(x, u.real, u.imag, v.real, v.imag)
            header = ["x", "re_u", "im_u", "re_v", "im_v"]
        else:
            rows = zip(x, u.real, v.real)
            header = ["x", "u", "v"]
        _write_csv(out_dir / f"solution_t{j * gmm.tau:g}.csv", header, rows, cfg)
    err, flagged = _error_at(cfg, pb, run, traj, len(traj) - 1, gmm)
    manifest = {
        "config": _resolved(cfg),
        "iterations": report.iterations,
        "converged": report.converged,
        "wall_time": report.wall_time,
        "residual_history": report.residual_history,
        "rel_l2_error_at_T": err,
        "error_norm_flagged_absolute": flagged,
    }
    (out_dir / "report.json").write_text(json.dumps(manifest, indent=2))
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


def _sweep_point(cfg, pb, h=None, tau=None):
    if tau is not None:
        cfg = replace(cfg, tau=tau, n_steps=None)
        h = cfg.h if cfg.h is not None else pb.L / cfg.m
    rows = {}
    variants = (("pre", True),) if cfg.solver.method == "direct" \
        else (("pre", True), ("nopre", False))
    for label, precondition in variants:
        report, run, gmm, traj = _solve_once(cfg, pb, h=h,
                                             precondition=precondition)
        err, _ = _error_at(cfg, pb, run, traj, len(traj) - 1, gmm)
        rows[label] = (report, err, h, gmm.tau)
        if not report.converged:
            break
    return rows


def run_convergence(cfg: ExperimentConfig, out_dir: Path) -> int:
    if not cfg.h_sweep and not cfg.tau_sweep:
        raise ConfigError("sweep: converge needs h_sweep or tau_sweep")
    pb = cfg.build_problem()
    if cfg.h_sweep:
        points = [{"h": h} for h in cfg.h_sweep]
        log_axis = cfg.h_sweep
    else:
        points = [{"tau": tau} for tau in cfg.tau_sweep]
        log_axis = cfg.tau_sweep
    results = []
    workers = max(1, cfg.solver.workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_sweep_point, cfg, pb, **pt) for pt in points]
        results = [fut.result() for fut in futures]
    rows = []
    failed = False
    comparison_failed = False
    for res in results:
        pre_rep, pre_err, h, tau = res["pre"]
        if "nopre" in res:
            no_rep = res["nopre"][0]
            no_iters = no_rep.iterations
            comparison_failed = comparison_failed or not no_rep.converged
        else:
            no_iters = -1
        failed = failed or not pre_rep.converged
        rows.append((h, tau, pre_err, pre_rep.iterations, no_iters))
    slope = None
    if len(rows) > 1:
        errs = np.array([r[2] for r in rows])
        slope = float(np.polyfit(np.log(np.asarray(log_axis)), np.log(errs), 1)[0])
    _write_csv(out_dir / "convergence.csv",
               ["h", "tau", "rel_l2_error", "iterations_pre", "iterations_nopre"],
               rows, cfg)
    manifest = {"config": _resolved(cfg), "fitted_slope": slope,
                "partial": failed,
                "unpreconditioned_hit_iteration_cap": comparison_failed}
    (out_dir / "convergence.json").write_text(json.dumps(manifest, indent=2))
    return EXIT_NO_CONVERGENCE if failed else EXIT_OK


def run_spectrum(cfg: ExperimentConfig, out_dir: Path) -> int:
    pb = cfg.build_problem()
    run = problems.setup_run(pb, h=cfg.h, m=cfg.m)
    lam = eigenvalues_of_D(run.sys)
    rows = [(float(z.real), float(z.imag), pb.name) for z in lam]
    _write_csv(out_dir / "spectrum.csv", ["re", "im", "label"], rows, cfg)
    return EXIT_OK


def run_locus(cfg: ExperimentConfig, out_dir: Path, methods=None) -> int:
    rows = []
    methods = (methods or cfg.locus_methods
               or sorted(lmm_catalog()) + ["rk2", "rk4", "radau_iia"])
    for name in methods:
        if name in lmm_catalog():
            pts = boundary_locus(lmm_catalog()[name], 720)
        elif name in ("rk2", "rk4", "radau_iia"):
            pts = rk_boundary_points(name, 360)
        else:
            raise ConfigError(f"locus_methods: unknown method {name!r}")
        rows.extend((float(z.real), float(z.imag), name) for z in pts)
    _write_csv(out_dir / "locus.csv", ["re", "im", "label"], rows, cfg)
    return EXIT_OK


def run_schrodinger(cfg: ExperimentConfig, out_dir: Path) -> int:
    if not cfg.problem.startswith("schrodinger"):
        raise ConfigError("problem: schrodinger subcommand needs a schrodinger_* problem")
    return run_solve(cfg, out_dir)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="halfbvm",
        description="half-Laplacian evolution runs, all-at-once in time")
    parser.add_argument("command",
                        choices=["solve", "converge", "spectrum", "locus",
                                 "schrodinger"])
    parser.add_argument("--config", required=True, help="JSON config path")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--workers", type=int, default=None,
                        help="concurrent sweep points / block solves")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.workers is not None:
            cfg.solver.workers = args.workers
        out_dir = Path(args.out or cfg.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        runner = {
            "solve": run_solve,
            "converge": run_convergence,
            "spectrum": run_spectrum,
            "locus": run_locus,
            "schrodinger": run_schrodinger,
        }[args.command]
        return runner(cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
