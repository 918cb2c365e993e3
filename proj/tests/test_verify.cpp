#include "doctest.h"

#include <cmath>
#include <memory>

#include "dsg/verify.hpp"

using namespace dsg;

namespace {

GraphBuilder constant_builder(double c) {
    return [c](const Atlas&, Field& u) { u.fill(c); };
}

GraphBuilder bump_builder(double a, double b) {
    return [a, b](const Atlas& atlas, Field& u) {
        AmbientPoly p = AmbientPoly::constant(atlas.n + 1, a);
        p += AmbientPoly::coordinate(atlas.n + 1, atlas.n, b);
        eval_on_atlas(atlas, p, u);
    };
}

SurfaceGeometry make_surface(const GraphBuilder& build, int N, double rho) {
    static std::vector<std::unique_ptr<Atlas>> keep;
    keep.push_back(std::make_unique<Atlas>(2, N));
    GraphFunction gf(*keep.back(), rho);
    build(*keep.back(), gf.u);
    return assemble_surface(gf);
}

double find_norm(const std::vector<ResidualReport>& reps, const std::string& name) {
    for (const auto& r : reps)
        if (r.identity == name) return r.norm_inf;
    return -1.0;
}

double find_slope(const std::vector<ResidualReport>& reps, const std::string& name) {
    for (const auto& r : reps)
        if (r.identity == name) return r.slope;
    return 0.0;
}

} // namespace

TEST_CASE("first-order identities on exact cases") {
    SUBCASE("equator: everything vanishes") {
        const auto sg = make_surface(constant_builder(0.0), 32, 1.0);
        for (const auto& r : verify_first_order(sg)) CHECK(r.norm_inf < 1e-12);
    }
    SUBCASE("constant graphs differentiate exactly") {
        const auto sg = make_surface(constant_builder(0.5), 32, 1.0);
        for (const auto& r : verify_first_order(sg)) CHECK(r.norm_inf < 1e-10);
    }
    SUBCASE("constant graph, scaled de Sitter radius") {
        const auto sg = make_surface(constant_builder(0.4), 32, 1.7);
        for (const auto& r : verify_first_order(sg)) CHECK(r.norm_inf < 1e-10);
    }
}

TEST_CASE("second-order identities on exact cases") {
    SUBCASE("equator") {
        const auto sg = make_surface(constant_builder(0.0), 32, 1.0);
        for (const auto& r : verify_second_order(sg)) CHECK(r.norm_inf < 1e-12);
    }
    SUBCASE("constant graph") {
        const auto sg = make_surface(constant_builder(0.5), 32, 1.0);
        for (const auto& r : verify_second_order(sg)) CHECK(r.norm_inf < 1e-9);
    }
    SUBCASE("constant graph away from rho = 1") {
        const auto sg = make_surface(constant_builder(0.3), 32, 0.8);
        for (const auto& r : verify_second_order(sg)) CHECK(r.norm_inf < 1e-9);
    }
}

TEST_CASE("gauss and codazzi on exact cases") {
    SUBCASE("equator space form") {
        const auto sg = make_surface(constant_builder(0.0), 32, 1.0);
        for (const auto& r : verify_gauss_codazzi(sg)) CHECK(r.norm_inf < 1e-10);
    }
    SUBCASE("umbilic cap") {
        const auto sg = make_surface(constant_builder(0.5), 32, 1.0);
        for (const auto& r : verify_gauss_codazzi(sg)) CHECK(r.norm_inf < 1e-9);
    }
}

TEST_CASE("simons identity on exact cases") {
    const auto s0 = make_surface(constant_builder(0.0), 48, 1.0);
    CHECK(verify_simons(s0).norm_inf < 1e-10);
    const auto sc = make_surface(constant_builder(0.5), 48, 1.0);
    CHECK(verify_simons(sc).norm_inf < 1e-8);
    const auto low = make_surface(constant_builder(0.5), 32, 1.0);
    CHECK(!verify_simons(low).warning.empty());
}

TEST_CASE("refinement slopes on the bump preset") {
    const auto reps = verify_suite(bump_builder(0.3, 0.1), 1.0, 2, {32, 48, 64}, 4,
                                   IdentitySet::All);
    // first-order residuals carry the full stencil order
    CHECK(find_slope(reps, "grad_eta") > 3.5);
    CHECK(find_slope(reps, "grad_tau") > 3.5);
    CHECK(find_slope(reps, "tilt_identity") > 3.5);
    CHECK(find_slope(reps, "e0_decomposition") > 3.5);
    // two derivatives consumed
    CHECK(find_slope(reps, "height_hessian") > 1.5);
    CHECK(find_slope(reps, "tilt_hessian") > 1.5);
    CHECK(find_slope(reps, "codazzi") > 1.5);
    CHECK(find_slope(reps, "gauss") > 1.5);
    CHECK(find_slope(reps, "simons") > 1.5);
    for (const auto& r : reps) {
        CHECK(r.resolutions.size() == 3);
        CHECK(r.norm_inf > 0.0);
        CHECK(r.norm_l2 > 0.0);
        CHECK(r.norm_l2 < 30.0 * r.norm_inf);
    }
}

TEST_CASE("residual norms are invariant under chart relabeling") {
    // swapping the two charts maps the bump +b to the bump -b
    const auto sp = make_surface(bump_builder(0.3, 0.1), 32, 1.0);
    const auto sm = make_surface(bump_builder(0.3, -0.1), 32, 1.0);
    const auto rp = verify_identities(sp, IdentitySet::All);
    const auto rm = verify_identities(sm, IdentitySet::All);
    REQUIRE(rp.size() == rm.size());
    for (std::size_t k = 0; k < rp.size(); ++k) {
        CHECK(rp[k].norm_inf == doctest::Approx(rm[k].norm_inf).epsilon(1e-10));
        CHECK(rp[k].norm_l2 == doctest::Approx(rm[k].norm_l2).epsilon(1e-10));
    }
}
