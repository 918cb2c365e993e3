#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "dsg/geometry.hpp"

namespace dsg {

struct ResidualReport {
    std::string identity;
    double norm_inf = 0.0;
    double norm_l2 = 0.0;
    std::vector<int> resolutions;
    // least-squares slope of log L2 norm against log h; set with >= 3 resolutions
    double slope = std::numeric_limits<double>::quiet_NaN();
    std::string warning;
};

enum class IdentitySet : unsigned {
    First = 1u,
    Second = 2u,
    GaussCodazzi = 4u,
    Simons = 8u,
    All = 15u
};
inline bool has(IdentitySet s, IdentitySet f) {
    return (static_cast<unsigned>(s) & static_cast<unsigned>(f)) != 0;
}

/// Covariant gradient of the second fundamental form, assembled from the
/// closed-form structure (exact round-metric derivatives, finite differences
/// only on the graph function).  Layout CoSym2, synced.
Field grad_shape(const SurfaceGeometry& sg, Exec exec = Exec::Parallel);

// Residuals of the first-order tilt/height relations:
//   grad_eta          D_i eta + <E0, X_i>
//   grad_tau          D_i tau - A_i^j D_j eta
//   tilt_identity     tau^2 - 1 - eta^2/rho^2 - |grad eta|^2
//   e0_decomposition  E0 - grad eta + tau nu + rho^-2 eta X
std::vector<ResidualReport> verify_first_order(const SurfaceGeometry& sg,
                                               Exec exec = Exec::Parallel);

// Second-order relations:
//   height_hessian    Hess eta - A tau + rho^-2 g eta
//   tilt_hessian      Hess tau - grad^k eta grad_k A - tau A^2 + rho^-2 A eta
std::vector<ResidualReport> verify_second_order(const SurfaceGeometry& sg,
                                                Exec exec = Exec::Parallel);

// codazzi             antisymmetrized grad A
// gauss               intrinsic Riemann of g minus the Gauss-equation side
std::vector<ResidualReport> verify_gauss_codazzi(const SurfaceGeometry& sg,
                                                 Exec exec = Exec::Parallel);

// simons              Lap A - Hess H - |A|^2 A + H A^2 - rho^-2 (n A - H g)
ResidualReport verify_simons(const SurfaceGeometry& sg, Exec exec = Exec::Parallel);

std::vector<ResidualReport> verify_identities(const SurfaceGeometry& sg, IdentitySet which,
                                              Exec exec = Exec::Parallel);

/// Builds the graph function on a given atlas (presets are analytic, so one
/// builder serves every resolution of a refinement study).
using GraphBuilder = std::function<void(const Atlas&, Field& u)>;

/// Runs the selected identities over several resolutions and fits the
/// convergence slope of each inf norm against h (least squares, >= 3 points).
std::vector<ResidualReport> verify_suite(const GraphBuilder& build, double rho, int n,
                                         const std::vector<int>& resolutions, int fd_order,
                                         IdentitySet which, Exec exec = Exec::Parallel);

} // namespace dsg
