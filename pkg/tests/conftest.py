import numpy as np

import halfbvm as hb
from halfbvm.krylov import build_preconditioner, direct_solve


class ToySystem:
    """Minimal stand-in for a discrete system: a given dense matrix D."""

    def __init__(self, D):
        self.D = np.asarray(D, dtype=float)
        self.dim = self.D.shape[0]

    def apply_D(self, x):
        x = np.asarray(x)
        if x.ndim == 1:
            return self.D @ x
        return x @ self.D.T

    def dense_D(self):
        return self.D


def solve_problem(pb, h=None, m=None, n_steps=16, T=2.0, method="gmres",
                  tol=1e-10, max_iter=800):
    """Discretize, assemble and solve one named problem; returns run data."""
    run = hb.setup_run(pb, h=h, m=m)
    gmm = hb.build_gmm(n_steps, T)
    system = hb.assemble_all_at_once(gmm, run.sys, run.source, run.u0v0,
                                     hmode=pb.hilbert)
    if method == "direct":
        report = direct_solve(system)
    else:
        pre = build_preconditioner(gmm, run.sys)
        report = hb.gmres_solve(system, pre, tol=tol, max_iter=max_iter)
    traj = hb.extract_trajectory(report.solution, system)
    return run, gmm, system, report, traj


def fitted_slope(hs, errs):
    return float(np.polyfit(np.log(np.asarray(hs)), np.log(np.asarray(errs)), 1)[0])


def assert_multiset_close(a, b, tol):
    """Greedy nearest-neighbour matching of two complex multisets."""
    a = list(np.asarray(a, dtype=complex))
    b = list(np.asarray(b, dtype=complex))
    assert len(a) == len(b)
    for z in a:
        dist = [abs(z - w) for w in b]
        j = int(np.argmin(dist))
        assert dist[j] < tol, f"no partner for {z} within {tol} (closest {dist[j]})"
        b.pop(j)
