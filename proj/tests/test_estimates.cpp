#include "doctest.h"

#include <cmath>

#include "dsg/estimates.hpp"

using namespace dsg;

namespace {

SurfaceGeometry umbilic(const Atlas& atlas, double c, double rho) {
    GraphFunction gf(atlas, rho);
    gf.u.fill(c);
    return assemble_surface(gf);
}

SurfaceGeometry bump_surface(const Atlas& atlas, double a, double b, double rho) {
    GraphFunction gf(atlas, rho);
    AmbientPoly p = AmbientPoly::constant(atlas.n + 1, a);
    p += AmbientPoly::coordinate(atlas.n + 1, atlas.n, b);
    eval_on_atlas(atlas, p, gf.u);
    return assemble_surface(gf);
}

} // namespace

TEST_CASE("prescription field") {
    Atlas atlas(2, 32);
    const auto sg = umbilic(atlas, 0.5, 1.0);
    const Field psi = psi_field(atlas, sg.R, 1.0, 2);
    const double expect = 2.0 * std::tanh(0.5) * std::tanh(0.5);
    CHECK(expect == doctest::Approx(0.4271045).epsilon(1e-7));
    for (auto q : atlas.active_nodes)
        CHECK(psi.ptr(0, 0)[q] == doctest::Approx(expect).epsilon(1e-12));

    // psi(R + delta) = psi(R) - delta exactly
    Field shifted = sg.R;
    for (int c = 0; c < 2; ++c)
        for (std::size_t q = 0; q < atlas.nn; ++q) shifted.ptr(c, 0)[q] += 0.125;
    const Field psi2 = psi_field(atlas, shifted, 1.0, 2);
    for (auto q : atlas.active_nodes)
        CHECK(psi2.ptr(0, 0)[q] == doctest::Approx(psi.ptr(0, 0)[q] - 0.125));

    // equator level: psi identically zero
    Field level(atlas, FieldKind::Scalar);
    level.fill(2.0);
    const Field psi0 = psi_field(atlas, level, 1.0, 2);
    CHECK(atlas.max_abs(psi0) < 1e-14);
}

TEST_CASE("curvature window") {
    // n = 3 round metrics: window holds iff 1 < r^2 < 2
    for (double r2 : {0.5, 0.9, 1.0, 1.1, 1.5, 1.9, 2.0, 2.5}) {
        const double R = 6.0 / r2;
        const WindowResult w = curvature_window_range(R, R, 1.0, 3);
        CHECK(w.ok == (r2 > 1.0 && r2 < 2.0));
    }
    // umbilic cap passes for n = 2
    Atlas atlas(2, 32);
    const auto sg = umbilic(atlas, 0.5, 1.0);
    const WindowResult w = curvature_window(atlas, sg.R, 1.0, 2);
    CHECK(w.ok);
    CHECK(w.lower_margin == doctest::Approx(1.5728955).epsilon(1e-6));
    CHECK(w.upper_margin == doctest::Approx(2.0 - 1.5728955).epsilon(1e-5));
    // boundary fails
    const WindowResult wb = curvature_window_range(2.0, 2.0, 1.0, 2);
    CHECK(!wb.ok);
    CHECK(wb.upper_margin == doctest::Approx(0.0));
}

TEST_CASE("admissible rho range") {
    // unit round S^2
    const RhoRange r2 = rho_max_range(2.0, 2.0, 2);
    CHECK(!r2.empty);
    CHECK(r2.rho_max == doctest::Approx(1.0).epsilon(1e-12));

    const RhoRange r3 = rho_max_range(6.0, 6.0, 3);
    CHECK(!r3.empty);
    CHECK(r3.rho_min == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(r3.rho_max == doctest::Approx(1.0).epsilon(1e-12));

    const RhoRange bad = rho_max_range(-0.5, 6.0, 3);
    CHECK(bad.empty);
    CHECK(bad.rho_max == 0.0);
    CHECK(!bad.reason.empty());

    // spread too large for n = 3: need Rmax/Rmin < (n-1)/(n-2) = 2
    const RhoRange spread = rho_max_range(1.0, 3.0, 3);
    CHECK(spread.empty);
}

TEST_CASE("mean curvature bound") {
    Atlas atlas(2, 64);
    SUBCASE("umbilic saturation") {
        const auto sg = umbilic(atlas, 0.5, 1.0);
        const auto mc = mean_curvature_bound(sg);
        const double expect = 4.0 * std::tanh(0.5) * std::tanh(0.5);
        CHECK(expect == doctest::Approx(0.8542090).epsilon(1e-7));
        CHECK(mc.max_H2 == doctest::Approx(expect).epsilon(1e-10));
        CHECK(std::abs(mc.C - mc.max_H2) < 1e-8); // bound attained exactly
        CHECK(mc.ok);
    }
    SUBCASE("umbilic saturation holds for every rho and dimension") {
        Atlas a3(3, 24);
        const auto sg = umbilic(a3, 0.4, 1.3);
        const auto mc = mean_curvature_bound(sg);
        CHECK(std::abs(mc.C - mc.max_H2) < 1e-7 * std::abs(mc.C));
        CHECK(mc.ok);
    }
    SUBCASE("equator violates the psi > 0 hypothesis") {
        const auto sg = umbilic(atlas, 0.0, 1.0);
        CHECK_THROWS_AS(mean_curvature_bound(sg), hypothesis_error);
    }
    SUBCASE("admissible perturbation keeps the flag with slack") {
        const auto sg = bump_surface(atlas, 0.5, 0.02, 1.0);
        const auto mc = mean_curvature_bound(sg);
        CHECK(mc.ok);
        CHECK(mc.max_H2 < mc.C);
    }
}

TEST_CASE("nonexistence certificates") {
    const auto c3 = nonexistence_certificate(0.5, 1.0, 3);
    CHECK(c3.verdict == Nonexistence::Impossible);
    CHECK(c3.pair_product == doctest::Approx(-3.0).epsilon(1e-12));

    const auto c2 = nonexistence_certificate(0.9, 1.0, 2);
    CHECK(c2.verdict == Nonexistence::Inadmissible);
    CHECK(c2.pair_product == doctest::Approx(1.0 - 1.0 / 0.81).epsilon(1e-10));
    CHECK(c2.pair_product == doctest::Approx(-0.2345679).epsilon(1e-6));

    const auto border = nonexistence_certificate(1.0, 1.0, 2);
    CHECK(border.verdict == Nonexistence::NotApplicable);

    // general rho by scaling: r < rho is the obstruction region
    CHECK(nonexistence_certificate(1.3, 2.0, 3).verdict == Nonexistence::Impossible);
    CHECK(nonexistence_certificate(2.5, 2.0, 3).verdict == Nonexistence::NotApplicable);

    CHECK_THROWS_AS(nonexistence_certificate(-1.0, 1.0, 2), config_error);
}

TEST_CASE("report scaling covariance") {
    // homothety: (u, rho) and (u, t rho) give identical verdict flags
    Atlas atlas(2, 32);
    GraphFunction gf(atlas, 1.0);
    AmbientPoly p = AmbientPoly::constant(3, 0.5);
    p += AmbientPoly::coordinate(3, 2, 0.05);
    eval_on_atlas(atlas, p, gf.u);

    const auto rep1 = evaluate_estimates(assemble_surface(gf), std::nullopt);
    GraphFunction gf2 = gf;
    gf2.rho = 2.3;
    const auto rep2 = evaluate_estimates(assemble_surface(gf2), std::nullopt);
    CHECK(rep1.window.ok == rep2.window.ok);
    CHECK(rep1.admissible == rep2.admissible);
    CHECK(rep1.mean_curvature_ok == rep2.mean_curvature_ok);
    CHECK(rep1.verdict == rep2.verdict);
    // scaling maps H^2 by t^-2
    CHECK(rep2.max_H2 == doctest::Approx(rep1.max_H2 / (2.3 * 2.3)).epsilon(1e-9));
}

TEST_CASE("window and admissibility agree on umbilic surfaces") {
    Atlas atlas(2, 32);
    for (double c : {0.2, 0.5, 1.0}) {
        const auto sg = umbilic(atlas, c, 1.0);
        const WindowResult w = curvature_window(atlas, sg.R, 1.0, 2);
        const bool adm = sg.min_P1 > 0.0 && sg.min_P2 > 0.0;
        CHECK(w.ok == adm);
        CHECK(adm);
    }
    const auto eq = umbilic(atlas, 0.0, 1.0);
    const WindowResult w0 = curvature_window(atlas, eq.R, 1.0, 2);
    CHECK(!w0.ok);
    CHECK(!(eq.min_P2 > 0.0));
}
