#include "doctest.h"

#include <cmath>

#include "dsg/geometry.hpp"
#include "oracles.hpp"

using namespace dsg;

namespace {

GraphFunction constant_graph(const Atlas& atlas, double c, double rho) {
    GraphFunction gf(atlas, rho);
    gf.u.fill(c);
    return gf;
}

GraphFunction poly_graph(const Atlas& atlas, const AmbientPoly& p, double rho) {
    GraphFunction gf(atlas, rho);
    eval_on_atlas(atlas, p, gf.u);
    return gf;
}

AmbientPoly bump_poly(double a, double b) {
    AmbientPoly p = AmbientPoly::constant(3, a);
    p += AmbientPoly::coordinate(3, 2, b);
    return p;
}

MinkVec node_vec(const Field& f, int chart, std::size_t q, int dim) {
    MinkVec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = f.ptr(chart, i)[q];
    return v;
}

} // namespace

TEST_CASE("embedding lands on the hyperboloid") {
    Atlas atlas(2, 32);
    SUBCASE("zero graph is the equator") {
        const Field X = embed(constant_graph(atlas, 0.0, 1.0));
        for (auto q : atlas.active_nodes) {
            double xi[3];
            atlas.node_point(0, q, xi);
            CHECK(X.ptr(0, 0)[q] == 0.0);
            for (int a = 0; a < 3; ++a) CHECK(X.ptr(0, 1 + a)[q] == doctest::Approx(xi[a]).epsilon(1e-14));
        }
    }
    SUBCASE("constant graph height") {
        const Field X = embed(constant_graph(atlas, 0.5, 1.0));
        CHECK(X.ptr(0, 0)[atlas.active_nodes[0]] == doctest::Approx(std::sinh(0.5)).epsilon(1e-12));
        CHECK(std::sinh(0.5) == doctest::Approx(0.5210953).epsilon(1e-7));
    }
    SUBCASE("Minkowski length is rho^2 for any graph") {
        const double rho = 1.7;
        const Field X = embed(poly_graph(atlas, bump_poly(0.3, 0.2), rho));
        double worst = 0.0;
        for (int c = 0; c < 2; ++c)
            for (auto q : atlas.active_nodes) {
                const MinkVec v = node_vec(X, c, q, 4);
                worst = std::max(worst, std::abs(mink_dot(v, v) - rho * rho));
            }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("induced metric closed forms and finite-difference cross-check") {
    Atlas atlas(2, 32);
    SUBCASE("round values") {
        const double rho = 1.3, c0 = 0.4;
        const Field g = induced_metric(constant_graph(atlas, c0, rho));
        const double scale = rho * rho * std::cosh(c0) * std::cosh(c0);
        for (auto q : atlas.active_nodes) {
            double x[3];
            atlas.node_coords(q, x);
            const ChartGeom cg = chart_geom(2, x);
            CHECK(g.ptr(0, 0)[q] == doctest::Approx(scale * cg.f).epsilon(1e-12));
            CHECK(g.ptr(0, 2)[q] == doctest::Approx(scale * cg.f).epsilon(1e-12));
            CHECK(std::abs(g.ptr(0, 1)[q]) < 1e-12);
        }
    }
    SUBCASE("agreement with <X_i, X_j> under refinement") {
        std::vector<int> res = {32, 48, 64};
        std::vector<double> errs;
        for (int N : res) {
            Atlas a(2, N);
            GraphFunction gf = poly_graph(a, bump_poly(0.3, 0.15), 1.0);
            SurfaceGeometry sg = assemble_surface(gf);
            // finite differences of the ambient position, one component at a time
            Field dX[4] = {Field(a, FieldKind::Covector), Field(a, FieldKind::Covector),
                           Field(a, FieldKind::Covector), Field(a, FieldKind::Covector)};
            Field scratch(a, FieldKind::Scalar), d2(a, FieldKind::Sym2);
            for (int comp = 0; comp < 4; ++comp) {
                Field one(a, FieldKind::Scalar);
                for (int c = 0; c < 2; ++c)
                    for (std::size_t q = 0; q < a.nn; ++q) one.ptr(c, 0)[q] = sg.X.ptr(c, comp)[q];
                a.jets(one, dX[comp], d2, nullptr);
            }
            double worst = 0.0;
            for (int c = 0; c < 2; ++c)
                for (auto q : a.active_nodes)
                    for (int i = 0; i < 2; ++i)
                        for (int j = i; j < 2; ++j) {
                            double dot = -dX[0].ptr(c, i)[q] * dX[0].ptr(c, j)[q];
                            for (int al = 1; al < 4; ++al) dot += dX[al].ptr(c, i)[q] * dX[al].ptr(c, j)[q];
                            worst = std::max(worst,
                                             std::abs(dot - sg.g.ptr(c, sym2_index(2, i, j))[q]));
                        }
            errs.push_back(worst);
        }
        CHECK(errs.back() < 5e-4);
        const double slope = std::log(errs.front() / errs.back()) /
                             std::log(static_cast<double>(res.back() - 1) / (res.front() - 1));
        CHECK(slope > 3.0);
    }
}

TEST_CASE("spacelike margin") {
    Atlas atlas(2, 32);
    CHECK(spacelike_margin(constant_graph(atlas, 0.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spacelike_margin(constant_graph(atlas, 0.7, 1.0)) ==
          doctest::Approx(std::cosh(0.7) * std::cosh(0.7)).epsilon(1e-12));
    // steep ramp: |Du| exceeds cosh u somewhere
    const GraphFunction steep = poly_graph(atlas, bump_poly(0.0, 2.0), 1.0);
    CHECK(spacelike_margin(steep) < 0.0);
    CHECK_THROWS_AS(assemble_surface(steep), degenerate_error);
}

TEST_CASE("normal, tilt, height") {
    Atlas atlas(2, 32);
    SUBCASE("equator") {
        const auto nth = normal_tilt_height(constant_graph(atlas, 0.0, 1.0));
        for (auto q : atlas.active_nodes) {
            CHECK(nth.tau.ptr(0, 0)[q] == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(std::abs(nth.eta.ptr(0, 0)[q]) < 1e-14);
            CHECK(nth.nu.ptr(0, 0)[q] == doctest::Approx(-1.0).epsilon(1e-14));
            for (int a = 0; a < 3; ++a) CHECK(std::abs(nth.nu.ptr(0, 1 + a)[q]) < 1e-13);
        }
    }
    SUBCASE("constant cap") {
        const auto nth = normal_tilt_height(constant_graph(atlas, 0.5, 1.0));
        const std::size_t q = atlas.active_nodes[17];
        CHECK(nth.tau.ptr(1, 0)[q] == doctest::Approx(std::cosh(0.5)).epsilon(1e-13));
        CHECK(std::cosh(0.5) == doctest::Approx(1.1276260).epsilon(1e-7));
    }
    SUBCASE("normal is unit timelike and orthogonal to the surface") {
        const double rho = 1.25;
        Atlas a(2, 48);
        GraphFunction gf = poly_graph(a, bump_poly(0.25, 0.12), rho);
        SurfaceGeometry sg = assemble_surface(gf);
        double w_unit = 0.0, w_orth = 0.0, w_tilt = 0.0;
        for (int c = 0; c < 2; ++c)
            for (auto q : a.active_nodes) {
                const MinkVec nu = node_vec(sg.nu, c, q, 4);
                w_unit = std::max(w_unit, std::abs(mink_dot(nu, nu) + 1.0));
                // tangent vectors X_i = rho (u_i E_r + cosh u xi_i), closed form
                double x[2];
                a.node_coords(q, x);
                double xi[3], dxi[4][3];
                chart_point(2, c, x, xi);
                chart_point_d1(2, c, x, dxi);
                const double uu = sg.u.ptr(c, 0)[q];
                for (int i = 0; i < 2; ++i) {
                    MinkVec Xi(4);
                    Xi[0] = rho * sg.du.ptr(c, i)[q] * std::cosh(uu);
                    for (int al = 0; al < 3; ++al)
                        Xi[1 + al] = rho * (sg.du.ptr(c, i)[q] * std::sinh(uu) * xi[al] +
                                            std::cosh(uu) * dxi[al][i]);
                    w_orth = std::max(w_orth, std::abs(mink_dot(nu, Xi)));
                }
                // tau^2 = 1 + eta^2/rho^2 + |grad eta|_g^2 pointwise
                const double tau = sg.tau.ptr(c, 0)[q];
                const double eta = sg.eta.ptr(c, 0)[q];
                const NodeMat gi = node_sym2(sg.gi, 2, c, q);
                double ge = 0.0;
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        ge += gi.m[i][j] * sg.du.ptr(c, i)[q] * sg.du.ptr(c, j)[q];
                ge *= rho * rho * std::cosh(uu) * std::cosh(uu);
                w_tilt = std::max(w_tilt,
                                  std::abs(tau * tau - 1.0 - eta * eta / (rho * rho) - ge));
            }
        CHECK(w_unit < 1e-12);
        CHECK(w_orth < 1e-12);
        CHECK(w_tilt < 1e-11);
    }
}

TEST_CASE("second fundamental form") {
    Atlas atlas(2, 32);
    SUBCASE("equator is totally geodesic") {
        const Field A = second_fundamental_form(constant_graph(atlas, 0.0, 1.0));
        CHECK(atlas.max_abs(A) < 1e-12);
    }
    SUBCASE("umbilic value") {
        const Field A = second_fundamental_form(constant_graph(atlas, 0.5, 1.0));
        const double expect = std::sinh(0.5) * std::cosh(0.5);
        CHECK(expect == doctest::Approx(0.5876005).epsilon(1e-7));
        for (auto q : atlas.active_nodes) {
            double x[3];
            atlas.node_coords(q, x);
            const ChartGeom cg = chart_geom(2, x);
            CHECK(A.ptr(0, 0)[q] == doctest::Approx(expect * cg.f).epsilon(1e-11));
            CHECK(std::abs(A.ptr(0, 1)[q]) < 1e-11);
        }
    }
}

TEST_CASE("principal curvatures") {
    Atlas atlas(2, 32);
    SUBCASE("umbilic spectrum") {
        const double rho = 1.4, c0 = 0.6;
        SurfaceGeometry sg = assemble_surface(constant_graph(atlas, c0, rho));
        const double expect = std::tanh(c0) / rho;
        for (int c = 0; c < 2; ++c)
            for (auto q : atlas.active_nodes)
                for (int i = 0; i < 2; ++i)
                    CHECK(sg.lambda.ptr(c, i)[q] == doctest::Approx(expect).epsilon(1e-10));
    }
    SUBCASE("zero shape and homogeneity") {
        SurfaceGeometry sg = assemble_surface(poly_graph(atlas, bump_poly(0.3, 0.1), 1.0));
        Field A0(atlas, FieldKind::Sym2);
        const Field lam0 = principal_curvatures(atlas, sg.g, A0);
        CHECK(atlas.max_abs(lam0) < 1e-14);

        Field A2 = sg.A;
        for (int c = 0; c < 2; ++c)
            for (std::size_t q = 0; q < atlas.nn; ++q)
                for (int k = 0; k < A2.ncomp; ++k) A2.ptr(c, k)[q] *= -2.5;
        const Field lam2 = principal_curvatures(atlas, sg.g, A2);
        for (int c = 0; c < 2; ++c)
            for (auto q : atlas.active_nodes) {
                // scaling by -2.5 flips and scales the spectrum
                CHECK(lam2.ptr(c, 0)[q] == doctest::Approx(-2.5 * sg.lambda.ptr(c, 1)[q]).epsilon(1e-9));
                CHECK(lam2.ptr(c, 1)[q] == doctest::Approx(-2.5 * sg.lambda.ptr(c, 0)[q]).epsilon(1e-9));
            }
    }
}

TEST_CASE("curvature tensors") {
    SUBCASE("space form values") {
        Atlas atlas(2, 32);
        const double rho = 1.3;
        SurfaceGeometry sg = assemble_surface(constant_graph(atlas, 0.0, rho));
        for (auto q : atlas.active_nodes)
            CHECK(sg.R.ptr(0, 0)[q] == doctest::Approx(2.0 / (rho * rho)).epsilon(1e-12));
        // Gauss-equation Riemann reproduces the space-form identity
        const double r1212 = riemann_component(atlas, sg.g, sg.A, rho, 0, atlas.active_nodes[5], 0, 1, 0,
                                               1);
        const NodeMat g = node_sym2(sg.g, 2, 0, atlas.active_nodes[5]);
        CHECK(r1212 == doctest::Approx((g.m[0][0] * g.m[1][1] - g.m[0][1] * g.m[0][1]) / (rho * rho))
                           .epsilon(1e-12));
    }
    SUBCASE("umbilic scalar curvature") {
        Atlas atlas(2, 64);
        SurfaceGeometry sg = assemble_surface(constant_graph(atlas, 0.5, 1.0));
        const double expect = 2.0 / (std::cosh(0.5) * std::cosh(0.5));
        CHECK(expect == doctest::Approx(1.5728955).epsilon(1e-7));
        for (auto q : atlas.active_nodes)
            CHECK(sg.R.ptr(0, 0)[q] == doctest::Approx(expect).epsilon(1e-12));
        // umbilic sectional curvature of the induced round metric
        const std::size_t q = atlas.active_nodes[33];
        const double r1212 = riemann_component(atlas, sg.g, sg.A, 1.0, 0, q, 0, 1, 0, 1);
        const NodeMat g = node_sym2(sg.g, 2, 0, q);
        const double K = r1212 / (g.m[0][0] * g.m[1][1] - g.m[0][1] * g.m[0][1]);
        CHECK(K == doctest::Approx(1.0 / (std::cosh(0.5) * std::cosh(0.5))).epsilon(1e-10));
    }
    SUBCASE("intrinsic curvature cross-check under refinement") {
        std::vector<int> res = {32, 48, 64};
        std::vector<double> errs;
        for (int N : res) {
            Atlas a(2, N);
            SurfaceGeometry sg = assemble_surface(poly_graph(a, bump_poly(0.3, 0.1), 1.0));
            const Field Ri = intrinsic_scalar_curvature(sg);
            double worst = 0.0;
            for (int c = 0; c < 2; ++c)
                for (auto q : a.active_nodes)
                    worst = std::max(worst, std::abs(Ri.ptr(c, 0)[q] - sg.R.ptr(c, 0)[q]));
            errs.push_back(worst);
        }
        CHECK(errs.back() < 5e-4);
        const double slope = std::log(errs.front() / errs.back()) /
                             std::log(static_cast<double>(res.back() - 1) / (res.front() - 1));
        CHECK(slope > 1.5);
    }
}

TEST_CASE("three-dimensional umbilic sanity") {
    Atlas atlas(3, 24);
    const double rho = 1.2, c0 = 0.3;
    SurfaceGeometry sg = assemble_surface(constant_graph(atlas, c0, rho));
    const double lam = std::tanh(c0) / rho;
    const std::size_t q = atlas.active_nodes[atlas.active_nodes.size() / 2];
    for (int i = 0; i < 3; ++i) CHECK(sg.lambda.ptr(0, i)[q] == doctest::Approx(lam).epsilon(1e-9));
    CHECK(sg.R.ptr(0, 0)[q] ==
          doctest::Approx(3.0 * lam * lam - 9.0 * lam * lam + 6.0 / (rho * rho)).epsilon(1e-10));
}
