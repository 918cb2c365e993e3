#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dsg/errors.hpp"

namespace dsg {

/// Rotationally symmetric metric ds^2 + phi(s)^2 dtheta^2 on S^2 with
/// phi(0) = phi(L) = 0, phi'(0) = 1 = -phi'(L).
struct Profile {
    double L = 0.0;
    std::function<double(double)> phi, dphi, ddphi;

    static Profile round_sphere(double r);
};

struct AxisymResult {
    bool closed = false;
    double closure_defect = 0.0;
    std::string diagnostic;

    // meridian samples in the boost gauge with eta(0) = eta(L)
    std::vector<double> s;
    std::vector<double> eta;      // height along the meridian
    std::vector<double> theta;    // polar angle of the spatial direction
    std::vector<double> u_of_s;   // graph value asinh(eta / rho)
    std::vector<double> kappa_meridian, kappa_orbit;
};

/// Integrates the rigid meridian system for a surface of revolution in the
/// radius-rho de Sitter space realizing the given profile isometrically.
/// The meridian curvature is determined algebraically through the Gauss
/// relation, so the only data is the profile; the reported defect measures
/// whether the far pole closes with a regular umbilic cap.  A failure is a
/// diagnostic consistent with nonexistence, not a proof.
AxisymResult solve_axisymmetric_isometric(const Profile& profile, double rho, int steps = 20000);

} // namespace dsg
