#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dsg/geometry.hpp"

namespace dsg {

struct SolverConfig {
    int max_newton = 50;
    double tol = 1e-10;           // residual inf norm target
    double adm_margin = 1e-8;     // line search keeps min P1, P2 above this
    double spacelike_floor = 1e-6;
    int max_krylov = 400;
    double forcing_max = 0.1;     // cap of the Eisenstat-Walker forcing term
    double min_step = 1e-4;       // smallest accepted damping factor
};

struct IterationRecord {
    int iter = 0;
    double residual_inf = 0.0;
    double damping = 1.0;
    double min_P1 = 0.0;
    double min_P2 = 0.0;
    double spacelike = 0.0;
    double min_F_eig = 0.0; // smallest eigenvalue of F^{ij} relative to g
    int krylov_iters = 0;
    double forcing = 0.0;
};

struct SolveResult {
    GraphFunction u;
    std::vector<IterationRecord> history;
    double residual_inf = 0.0;
    int newton_iters = 0;
};

/// Damped Newton-Krylov solver for 2 P_2(lambda[u]) = psi.  The linearized
/// operator is applied matrix-free by directional differencing of the
/// residual; its principal symbol is the positive definite F^{ij} as long as
/// iterates stay admissible, which the line search enforces together with the
/// spacelike floor.  Linear solves are GMRES with diagonal preconditioning
/// and residual-slaved forcing.
SolveResult solve_sigma2(const Field& psi, double rho, const GraphFunction& u0,
                         const SolverConfig& cfg = {}, Exec exec = Exec::Parallel);

/// Converts a target scalar curvature into the prescription; requires the
/// curvature window to hold pointwise.
Field psi_from_metric(const Atlas& atlas, const Field& R_target, double rho, int n,
                      Exec exec = Exec::Parallel);

/// Pointwise Frobenius distance between the induced metric of u and a target
/// metric, measured in the target metric.  Diagnostic only.
Field isometric_residual(const GraphFunction& u, const Field& g_target, Exec exec = Exec::Parallel);

struct NormalizeResult {
    GraphFunction u;
    MinkTransform transform;
    double rapidity = 0.0;
};

/// Ambient isometry (boost composed with a spatial rotation) aligning the
/// normal at node p with the time axis, so the transformed surface has
/// tau(p) = 1 and eta(p) = 0; the result is re-sampled as a graph by a radial
/// root find per node.  Throws reparametrization_error when the transformed
/// surface is no longer graphical.
NormalizeResult lorentz_normalize(const GraphFunction& u, NodeRef p, Exec exec = Exec::Parallel);

} // namespace dsg
