#pragma once

#include <optional>
#include <string>

#include "dsg/geometry.hpp"

namespace dsg {

/// Prescription function rho^-2 n(n-1) - R, pointwise.
Field psi_field(const Atlas& atlas, const Field& R, double rho, int n, Exec exec = Exec::Parallel);

struct WindowResult {
    bool ok = false;
    double lower_margin = 0.0; // min over nodes of R - rho^-2 n(n-2); min R for n = 2
    double upper_margin = 0.0; // min over nodes of rho^-2 n(n-1) - R
};

WindowResult curvature_window_range(double Rmin, double Rmax, double rho, int n);
WindowResult curvature_window(const Atlas& atlas, const Field& R, double rho, int n,
                              Exec exec = Exec::Parallel);

struct RhoRange {
    double rho_max = 0.0; // supremum (exclusive); 0 when empty
    double rho_min = 0.0; // n >= 3 lower threshold, 0 otherwise
    bool empty = false;
    std::string reason;
};

RhoRange rho_max_range(double Rmin, double Rmax, int n);
RhoRange rho_max(const Atlas& atlas, const Field& R, int n, Exec exec = Exec::Parallel);

struct MeanCurvatureBound {
    double C = 0.0;      // max over nodes of the right-hand side
    double max_H2 = 0.0;
    bool ok = false;
    Field rhs;           // pointwise right-hand side
    Field psi;           // pointwise prescription
};

/// Requires psi > 0 and rho^-2 - psi/n > 0 pointwise and an admissible
/// surface; throws hypothesis_error naming the broken inequality otherwise.
/// The flag compares max H^2 against the supremum of the right-hand side over
/// all nodes, a conservative form of the pointwise maximum-principle bound.
MeanCurvatureBound mean_curvature_bound(const SurfaceGeometry& sg, Exec exec = Exec::Parallel);

struct TiltBound {
    double C_H = 0.0;    // max |A|
    double diameter = 0.0;
    double C_tau = 0.0;  // exp(C_H diam)
    double max_tau = 0.0;
    bool ok = false;
    double eta_bound = 0.0; // rho sqrt(C_tau^2 - 1)
    double max_abs_eta = 0.0;
    bool eta_ok = false;
};

/// Requires tau(p) = 1 up to tolerance (run lorentz_normalize first).
TiltBound tilt_bound(const SurfaceGeometry& sg, NodeRef p, Exec exec = Exec::Parallel);

enum class Nonexistence { Impossible, Inadmissible, NotApplicable };

struct Certificate {
    Nonexistence verdict = Nonexistence::NotApplicable;
    double pair_product = 0.0; // forced value of lambda_i lambda_j, i != j
    std::string message;
};

/// Round sphere S^n_r into the radius-rho de Sitter space: for r < rho the
/// forced pairwise products of principal curvatures are negative, which is
/// unsatisfiable for n >= 3 and non-admissible for n = 2.
Certificate nonexistence_certificate(double r, double rho, int n);

struct EstimateReport {
    double psi_min = 0.0, psi_max = 0.0;
    WindowResult window;
    double bound_C = 0.0, max_H2 = 0.0;
    bool mean_curvature_ok = false;
    std::optional<TiltBound> tilt;
    double min_P1 = 0.0, min_P2 = 0.0;
    bool admissible = false;
    bool verdict = false;
};

/// Full report; the tilt section runs only when a basepoint is supplied (the
/// surface must be normalized there).
EstimateReport evaluate_estimates(const SurfaceGeometry& sg, std::optional<NodeRef> basepoint,
                                  Exec exec = Exec::Parallel);

} // namespace dsg
