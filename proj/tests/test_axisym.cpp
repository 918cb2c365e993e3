#include "doctest.h"

#include <cmath>

#include "dsg/axisym.hpp"
#include "dsg/estimates.hpp"

using namespace dsg;

TEST_CASE("umbilic family closes and recovers the constant graph") {
    const double c = 0.5;
    const Profile prof = Profile::round_sphere(std::cosh(c));
    const AxisymResult res = solve_axisymmetric_isometric(prof, 1.0);
    CHECK(res.closed);
    CHECK(res.closure_defect <= 1e-8);
    REQUIRE(!res.u_of_s.empty());
    double worst = 0.0;
    for (double u : res.u_of_s) worst = std::max(worst, std::abs(u - c));
    CHECK(worst <= 1e-8);
    // meridian curvatures equal tanh(c) all along
    for (std::size_t i = 0; i < res.kappa_orbit.size(); i += 97) {
        CHECK(res.kappa_orbit[i] == doctest::Approx(std::tanh(c)).epsilon(1e-7));
        CHECK(res.kappa_meridian[i] == doctest::Approx(std::tanh(c)).epsilon(1e-6));
    }
    // polar angle sweeps the full meridian
    CHECK(res.theta.front() == doctest::Approx(0.0).epsilon(1e-3));
    CHECK(res.theta.back() == doctest::Approx(M_PI).epsilon(1e-3));
}

TEST_CASE("equator profile gives the zero graph") {
    const Profile prof = Profile::round_sphere(1.0);
    const AxisymResult res = solve_axisymmetric_isometric(prof, 1.0);
    CHECK(res.closed);
    CHECK(res.closure_defect <= 1e-8);
    double worst = 0.0;
    for (double u : res.u_of_s) worst = std::max(worst, std::abs(u));
    CHECK(worst <= 1e-8);
}

TEST_CASE("small spheres cannot start an admissible meridian") {
    for (double r : {0.3, 0.5, 0.9}) {
        const Profile prof = Profile::round_sphere(r);
        const AxisymResult res = solve_axisymmetric_isometric(prof, 1.0);
        CHECK(!res.closed);
        CHECK(res.closure_defect > 1e-6);
        CHECK(!res.diagnostic.empty());
        // consistent with the algebraic certificate
        const Certificate cert = nonexistence_certificate(r, 1.0, 2);
        CHECK(cert.verdict == Nonexistence::Inadmissible);
    }
}

TEST_CASE("scaled de Sitter radius shifts the existence threshold") {
    // r > rho exists (umbilic), r < rho fails
    const AxisymResult good = solve_axisymmetric_isometric(Profile::round_sphere(1.3), 1.0);
    CHECK(good.closed);
    const AxisymResult bad = solve_axisymmetric_isometric(Profile::round_sphere(1.3), 2.0);
    CHECK(!bad.closed);
}
