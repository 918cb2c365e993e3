#include "doctest.h"

#include <cmath>
#include <memory>

#include "dsg/estimates.hpp"
#include "dsg/solver.hpp"

using namespace dsg;

namespace {

// exact prescription field of an analytic graph, assembled from closed-form
// jets only (no grid differentiation): the manufactured-solution oracle
Field manufactured_psi(const Atlas& atlas, const AmbientPoly& p, double rho) {
    const int n = atlas.n;
    Field u(atlas, FieldKind::Scalar), du(atlas, FieldKind::Covector), d2(atlas, FieldKind::Sym2);
    eval_jets_on_atlas(atlas, p, u, du, d2);
    Field psi(atlas, FieldKind::Scalar);
    for (int c = 0; c < 2; ++c)
        for (std::size_t q = 0; q < atlas.nn; ++q) {
            double x[3];
            atlas.node_coords(q, x);
            const ChartGeom cg = chart_geom(n, x);
            const double uu = u.ptr(c, 0)[q];
            const double sh = std::sinh(uu), ch = std::cosh(uu), th = sh / ch;
            double dui[3];
            double du2 = 0.0;
            for (int i = 0; i < n; ++i) {
                dui[i] = du.ptr(c, i)[q];
                du2 += dui[i] * dui[i];
            }
            du2 /= cg.f;
            const double tau = ch * ch / std::sqrt(ch * ch - du2);
            NodeMat gm{}, Am{};
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    gm.m[i][j] = rho * rho * (ch * ch * cg.f * (i == j ? 1.0 : 0.0) - dui[i] * dui[j]);
                    Am.m[i][j] = rho * tau / ch *
                                 (d2.ptr(c, sym2_index(n, i, j))[q] - 2.0 * th * dui[i] * dui[j] +
                                  sh * ch * cg.f * (i == j ? 1.0 : 0.0));
                }
            const NodeMat gi = invert_spd(n, gm);
            double H = 0.0, A2 = 0.0, M[3][3] = {};
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    for (int k = 0; k < n; ++k) M[i][j] += gi.m[i][k] * Am.m[k][j];
                }
            for (int i = 0; i < n; ++i) {
                H += M[i][i];
                for (int j = 0; j < n; ++j) A2 += M[i][j] * M[j][i];
            }
            psi.ptr(c, 0)[q] = H * H - A2;
        }
    return psi;
}

NodeRef center_node(const Atlas& atlas) {
    int ij[3] = {atlas.N / 2, atlas.N / 2, atlas.N / 2};
    return NodeRef{0, atlas.node_index(ij)};
}

} // namespace

TEST_CASE("prescription from a target metric") {
    Atlas atlas(2, 32);
    Field R(atlas, FieldKind::Scalar);
    R.fill(2.0 / (std::cosh(0.5) * std::cosh(0.5)));
    const Field psi = psi_from_metric(atlas, R, 1.0, 2);
    for (auto q : atlas.active_nodes)
        CHECK(psi.ptr(0, 0)[q] == doctest::Approx(0.4271045).epsilon(1e-6));

    Field flat(atlas, FieldKind::Scalar);
    flat.fill(2.0);
    CHECK_THROWS_AS(psi_from_metric(atlas, flat, 1.0, 2), hypothesis_error);

    Atlas a3(3, 24);
    Field R3(a3, FieldKind::Scalar);
    R3.fill(4.0); // round metric with r^2 = 1.5
    const Field psi3 = psi_from_metric(a3, R3, 1.0, 3);
    CHECK(psi3.ptr(0, 0)[a3.active_nodes[0]] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("sigma2 solver: constant branch") {
    Atlas atlas(2, 48);
    Field psi(atlas, FieldKind::Scalar);
    psi.fill(2.0 * std::tanh(0.5) * std::tanh(0.5));
    GraphFunction u0(atlas, 1.0);
    u0.u.fill(0.3);

    const SolveResult res = solve_sigma2(psi, 1.0, u0);
    CHECK(res.residual_inf <= 1e-10);
    CHECK(res.newton_iters <= 15);
    double worst = 0.0;
    for (int c = 0; c < 2; ++c)
        for (auto q : atlas.active_nodes)
            worst = std::max(worst, std::abs(res.u.u.ptr(c, 0)[q] - 0.5));
    CHECK(worst < 1e-8);
    for (const auto& rec : res.history) {
        CHECK(rec.min_P2 > 0.0);
        CHECK(rec.min_F_eig > 0.0);
        CHECK(rec.spacelike > 0.0);
    }
}

TEST_CASE("sigma2 solver: window violations are rejected before iterating") {
    Atlas atlas(2, 32);
    GraphFunction u0(atlas, 1.0);
    u0.u.fill(0.3);
    Field too_big(atlas, FieldKind::Scalar);
    too_big.fill(2.5); // n rho^-2 = 2
    CHECK_THROWS_AS(solve_sigma2(too_big, 1.0, u0), hypothesis_error);
    Field zero(atlas, FieldKind::Scalar);
    CHECK_THROWS_AS(solve_sigma2(zero, 1.0, u0), hypothesis_error);
}

TEST_CASE("sigma2 solver: manufactured solution recovery") {
    AmbientPoly star = AmbientPoly::constant(3, 0.4);
    star += AmbientPoly::coordinate(3, 2, 0.1);

    std::vector<int> res = {32, 48, 64};
    std::vector<double> errs, hs;
    for (int N : res) {
        Atlas atlas(2, N);
        const Field psi = manufactured_psi(atlas, star, 1.0);
        GraphFunction u0(atlas, 1.0);
        u0.u.fill(0.4);
        const SolveResult sol = solve_sigma2(psi, 1.0, u0);
        Field exact(atlas, FieldKind::Scalar);
        eval_on_atlas(atlas, star, exact);
        double worst = 0.0;
        for (int c = 0; c < 2; ++c)
            for (auto q : atlas.active_nodes)
                worst = std::max(worst, std::abs(sol.u.u.ptr(c, 0)[q] - exact.ptr(c, 0)[q]));
        errs.push_back(worst);
        hs.push_back(atlas.h);
        for (const auto& rec : sol.history) {
            CHECK(rec.min_P2 > 0.0);
            CHECK(rec.min_F_eig > 0.0);
        }
    }
    CHECK(errs.back() < 5e-4);
    const double slope = std::log(errs.front() / errs.back()) / std::log(hs.front() / hs.back());
    CHECK(slope >= 1.5);
}

TEST_CASE("isometric residual diagnostics") {
    Atlas atlas(2, 32);
    GraphFunction gf(atlas, 1.0);
    AmbientPoly p = AmbientPoly::constant(3, 0.3);
    p += AmbientPoly::coordinate(3, 2, 0.1);
    eval_on_atlas(atlas, p, gf.u);

    const SurfaceGeometry sg = assemble_surface(gf);
    const Field self = isometric_residual(gf, sg.g);
    CHECK(atlas.max_abs(self) < 1e-12);

    // constant prescription is a true isometric embedding of the round target
    Field psi(atlas, FieldKind::Scalar);
    psi.fill(2.0 * std::tanh(0.5) * std::tanh(0.5));
    GraphFunction u0(atlas, 1.0);
    u0.u.fill(0.3);
    const SolveResult sol = solve_sigma2(psi, 1.0, u0);
    Field g_target(atlas, FieldKind::Sym2);
    const double scale = std::cosh(0.5) * std::cosh(0.5);
    for (int c = 0; c < 2; ++c)
        for (std::size_t q = 0; q < atlas.nn; ++q) {
            double x[3];
            atlas.node_coords(q, x);
            const ChartGeom cg = chart_geom(2, x);
            g_target.ptr(c, 0)[q] = scale * cg.f;
            g_target.ptr(c, 2)[q] = scale * cg.f;
        }
    const Field round = isometric_residual(sol.u, g_target);
    CHECK(atlas.max_abs(round) < 1e-8);

    // generic target: nonzero residual, no error
    Field weird = g_target;
    for (int c = 0; c < 2; ++c)
        for (std::size_t q = 0; q < atlas.nn; ++q) weird.ptr(c, 1)[q] = 0.3;
    const Field off = isometric_residual(gf, weird);
    CHECK(atlas.max_abs(off) > 0.01);
}

TEST_CASE("lorentz normalization") {
    Atlas atlas(2, 64);
    const NodeRef p = center_node(atlas);

    SUBCASE("equator is already normalized") {
        GraphFunction gf(atlas, 1.0);
        const NormalizeResult nr = lorentz_normalize(gf, p);
        CHECK(std::abs(nr.rapidity) < 1e-12);
        CHECK(atlas.max_abs(nr.u.u) < 1e-10);
    }

    SUBCASE("umbilic cap: boost by the graph height") {
        GraphFunction gf(atlas, 1.0);
        gf.u.fill(0.5);
        const NormalizeResult nr = lorentz_normalize(gf, p);
        CHECK(nr.rapidity == doctest::Approx(-0.5).epsilon(1e-6));
        const SurfaceGeometry sg = assemble_surface(nr.u);
        CHECK(std::abs(sg.u.ptr(p.chart, 0)[p.node]) < 1e-9);
        CHECK(sg.tau.ptr(p.chart, 0)[p.node] == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(std::abs(sg.eta.ptr(p.chart, 0)[p.node]) < 1e-8);
        // the boosted cap is still the same intrinsic sphere: max tau = cosh(2c)
        double max_tau = 0.0;
        for (int c = 0; c < 2; ++c)
            for (auto q : atlas.active_nodes) max_tau = std::max(max_tau, sg.tau.ptr(c, 0)[q]);
        CHECK(max_tau == doctest::Approx(std::cosh(1.0)).epsilon(5e-3));
        // principal curvatures at the basepoint survive the isometry up to
        // the re-sampling interpolation error O(h^p)
        const double lam = std::tanh(0.5);
        CHECK(sg.lambda.ptr(p.chart, 0)[p.node] == doctest::Approx(lam).epsilon(5e-4));
        CHECK(sg.lambda.ptr(p.chart, 1)[p.node] == doctest::Approx(lam).epsilon(5e-4));
        // embedding identity is preserved exactly by the resampled graph
        const Field X = embed(nr.u);
        double worst = 0.0;
        for (auto q : atlas.active_nodes) {
            MinkVec v(4);
            for (int a = 0; a < 4; ++a) v[a] = X.ptr(0, a)[q];
            worst = std::max(worst, std::abs(mink_dot(v, v) - 1.0));
        }
        CHECK(worst < 1e-12);
    }

    SUBCASE("tilt bound holds on the normalized boost image") {
        GraphFunction gf(atlas, 1.0);
        gf.u.fill(0.5);
        const NormalizeResult nr = lorentz_normalize(gf, p);
        const SurfaceGeometry sg = assemble_surface(nr.u);
        const TiltBound tb = tilt_bound(sg, p);
        CHECK(tb.ok);
        CHECK(tb.eta_ok);
        CHECK(tb.max_tau == doctest::Approx(std::cosh(1.0)).epsilon(5e-3));
        CHECK(tb.C_tau > tb.max_tau);
    }

    SUBCASE("steep but spacelike ramps still normalize") {
        // a compact spacelike surface here is a Cauchy surface, so every
        // boost image remains a radial graph; the resampling must cope with
        // strong tilts rather than reject them
        GraphFunction gf(atlas, 1.0);
        AmbientPoly ramp = AmbientPoly::constant(3, 0.0);
        ramp += AmbientPoly::coordinate(3, 2, 0.9);
        eval_on_atlas(atlas, ramp, gf.u);
        REQUIRE(spacelike_margin(gf) > 0.0);
        const NormalizeResult nr = lorentz_normalize(gf, p);
        const SurfaceGeometry sg = assemble_surface(nr.u);
        CHECK(sg.tau.ptr(p.chart, 0)[p.node] == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(std::abs(sg.eta.ptr(p.chart, 0)[p.node]) < 1e-8);
    }
}
