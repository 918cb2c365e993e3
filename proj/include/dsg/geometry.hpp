#pragma once

#include <functional>

#include "dsg/analytic.hpp"
#include "dsg/atlas.hpp"
#include "dsg/minkowski.hpp"

namespace dsg {

/// Graph function over the equatorial sphere: the surface is
/// X(xi) = rho sinh(u) E0 + rho cosh(u) xi inside the radius-rho de Sitter
/// hyperboloid of R^{n+1,1}.
struct GraphFunction {
    const Atlas* atlas = nullptr;
    Field u;
    double rho = 1.0;

    GraphFunction() = default;
    GraphFunction(const Atlas& a, double rho_) : atlas(&a), u(a, FieldKind::Scalar), rho(rho_) {}
    int n() const { return atlas->n; }
};

/// Everything derived from one graph function.  Tensor fields are synced so
/// their ghost values can be finite-differenced; Gamma_g and dg are plain
/// per-node data valid at active nodes only.
struct SurfaceGeometry {
    const Atlas* atlas = nullptr;
    double rho = 1.0;

    Field u, du, d2u_plain, d2u_cov;
    Field X, nu;            // ambient position and unit timelike normal
    Field tau, eta;         // tilt and height
    Field g, gi, A;         // induced metric, its inverse, second fundamental form
    Field lambda;           // principal curvatures, ascending
    Field H, normA2, R;     // mean curvature, |A|^2, scalar curvature
    Field Ricci;
    Field Gamma_g;          // Christoffels of g, layout [k * nsym + (ij)], active nodes
    Field dg;               // plain partials d_k g_ij, same layout, active nodes

    double spacelike_min = 0.0; // min over nodes of cosh^2 u - |Du|^2
    double min_P1 = 0.0, min_P2 = 0.0;

    int n() const { return atlas->n; }
};

Field embed(const GraphFunction& gf, Exec exec = Exec::Parallel);
Field induced_metric(const GraphFunction& gf, Exec exec = Exec::Parallel);
double spacelike_margin(const GraphFunction& gf, Exec exec = Exec::Parallel);

struct NormalTiltHeight {
    Field nu, tau, eta;
};
/// Requires a spacelike graph; throws degenerate_error naming the worst node.
NormalTiltHeight normal_tilt_height(const GraphFunction& gf, Exec exec = Exec::Parallel);

Field second_fundamental_form(const GraphFunction& gf, Exec exec = Exec::Parallel);

/// Eigenvalues of A relative to g (ascending) at every active node.
Field principal_curvatures(const Atlas& atlas, const Field& g, const Field& A,
                           Exec exec = Exec::Parallel);

struct CurvatureTensors {
    Field Ricci;  // Sym2
    Field R;      // scalar
};
CurvatureTensors curvature_tensors(const Atlas& atlas, const Field& g, const Field& A, double rho,
                                   Exec exec = Exec::Parallel);

/// Gauss-equation Riemann component R_ijkl at one node.
double riemann_component(const Atlas& atlas, const Field& g, const Field& A, double rho, int chart,
                         std::size_t node, int i, int j, int k, int l);

/// Full bundle; differentiates u once and assembles every field nodewise.
SurfaceGeometry assemble_surface(const GraphFunction& gf, Exec exec = Exec::Parallel);

/// Scalar curvature of g recomputed intrinsically (finite differences of the
/// closed-form metric), for cross-checking the Gauss-equation route.
Field intrinsic_scalar_curvature(const SurfaceGeometry& sg, Exec exec = Exec::Parallel);

/// Visits every active node with the intrinsically assembled lowered Riemann
/// tensor of g and the Christoffels used to build it.  The metric derivative
/// data is obtained by re-differencing stored fields, so it is independent of
/// the jets behind the Gauss-equation curvature.
using RiemannVisitor =
    std::function<void(int chart, std::size_t node, const double Rlow[3][3][3][3],
                       const double Gamma[3][3][3])>;
void visit_intrinsic_riemann(const SurfaceGeometry& sg, const RiemannVisitor& fn,
                             Exec exec = Exec::Parallel);

// Small per-node views ------------------------------------------------------

struct NodeMat {
    double m[3][3];
};

NodeMat node_sym2(const Field& f, int n, int chart, std::size_t q);
void put_sym2(Field& f, int n, int chart, std::size_t q, const NodeMat& m);

/// 2x2 / 3x3 symmetric inverse.
NodeMat invert_spd(int n, const NodeMat& m);

} // namespace dsg
