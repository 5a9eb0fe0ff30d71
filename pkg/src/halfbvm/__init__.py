"""Solvers for 1-D evolution equations driven by the half-Laplacian.

The pipeline: evaluate the half-Laplacian through the Hilbert transform of
the derivative (closed forms, a rational spectral fit, or a quadrature
oracle), double the problem into a first-order system in time so that time
stepping never touches a singular integral, integrate with the
generalized-midpoint boundary value scheme as one all-at-once linear system,
and solve that system with GMRES under an omega-circulant preconditioner
whose frequency blocks decouple and reduce to half-size solves.
"""

from .bvm import AllAtOnceSystem, GmmMatrices, assemble_all_at_once, build_gmm, \
    extract_trajectory
from .doubling import (DoubledState, LineProfile, SourceSpec, SourceTerm,
                       ZERO_SOURCE, doubled_initial_state, doubled_source,
                       odd_reflection, profile_from_catalog, rhs)
from .hilbert import (CatalogFunction, InvalidSampleError,
                      UnsupportedFunctionError, WeidemanExpansion,
                      half_laplacian_of, hilbert_exact, hilbert_exact_twice,
                      hilbert_quadrature_oracle, weideman_eval, weideman_fit,
                      weideman_transform)
from .krylov import (OmegaPreconditioner, SolveReport, build_omega_circulant,
                     build_preconditioner, direct_solve, gmres,
                     gmres_solve, solve_frequency_block)
from .oracles import (advection_exact, half_diffusion_exact,
                      mass_transfer_exact, rel_l2, relative_l2_error,
                      schrodinger_dalembert, schrodinger_series)
from .problems import Problem, build_problem, catalog, setup_run
from .spatial import (DIRICHLET, PERIODIC, ConfigurationError, DiscreteSystem,
                      Grid, GridTooSmallError, OperatorKind,
                      assemble_discrete_system, derivative_matrix,
                      laplacian_matrix)
from .spectrum import (MethodPolynomials, StabilityVerdict, boundary_locus,
                       classify_stability, eigenvalues_of_D, gmm_polynomials,
                       gmm_stability_verdict, lmm_catalog, rk_boundary_points)

__version__ = "0.1.0"
