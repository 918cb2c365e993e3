#include "doctest.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "dsg/symfun.hpp"
#include "oracles.hpp"

using namespace dsg;

TEST_CASE("elementary symmetric polynomials") {
    const std::vector<double> ones{1.0, 1.0, 1.0};
    const std::vector<double> v{2.0, 1.0, 1.0};
    CHECK(elementary_symmetric(2, ones) == doctest::Approx(3.0));
    CHECK(elementary_symmetric(2, v) == doctest::Approx(oracle::elementary_symmetric_bruteforce(2, v)));
    CHECK(elementary_symmetric(2, v) == doctest::Approx(5.0));
    CHECK(elementary_symmetric(0, v) == 1.0);
    CHECK_THROWS_AS(elementary_symmetric(4, v), config_error);
    CHECK_THROWS_AS(elementary_symmetric(-1, v), config_error);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> lam(4);
        for (auto& l : lam) l = unif(rng);
        for (int k = 0; k <= 4; ++k)
            CHECK(elementary_symmetric(k, lam) ==
                  doctest::Approx(oracle::elementary_symmetric_bruteforce(k, lam)).epsilon(1e-12));
        // permutation invariance
        std::vector<double> perm = lam;
        std::shuffle(perm.begin(), perm.end(), rng);
        for (int k = 0; k <= 4; ++k)
            CHECK(elementary_symmetric(k, lam) == doctest::Approx(elementary_symmetric(k, perm)));
    }
}

TEST_CASE("truncated symmetric polynomials") {
    const std::vector<double> v{2.0, 1.0, 1.0};
    CHECK(truncated_symmetric(1, 0, v) == doctest::Approx(2.0)); // H - lam_1
    CHECK(truncated_symmetric(2, 2, v) == doctest::Approx(2.0));
    CHECK(truncated_symmetric(3, 1, v) == doctest::Approx(0.0));
    CHECK_THROWS_AS(truncated_symmetric(1, 3, v), config_error);
}

TEST_CASE("Gamma_2 membership") {
    CHECK(gamma2_contains(std::vector<double>{1.0, 1.0, 0.0}).inside);
    const auto neg = gamma2_contains(std::vector<double>{-1.0, -1.0, -1.0});
    CHECK(!neg.inside); // wrong component despite P2 = 3 > 0
    CHECK(neg.P2 > 0.0);
    CHECK(neg.P1 < 0.0);
    CHECK(!gamma2_contains(std::vector<double>{1.0, 1.0, -0.5}).inside); // P2 = 0 boundary

    // scale invariance of the verdict
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unif(-1.0, 2.0);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    for (int t = 0; t < 500; ++t) {
        std::vector<double> lam(3);
        for (auto& l : lam) l = unif(rng);
        std::vector<double> scaled = lam;
        const double s = scale(rng);
        for (auto& l : scaled) l *= s;
        CHECK(gamma2_contains(lam).inside == gamma2_contains(scaled).inside);
    }
}

TEST_CASE("Newton-Maclaurin gap") {
    // n = 2: the gap is an algebraic identity equal to zero
    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t) {
        const auto lam = oracle::sample_gamma2(2, rng);
        CHECK(std::abs(newton_maclaurin_gap(lam).gap) < 1e-13);
    }
    CHECK(newton_maclaurin_gap(std::vector<double>{1.0, 1.0, 1.0}).gap == doctest::Approx(0.0));
    CHECK(newton_maclaurin_gap(std::vector<double>{2.0, 1.0, 1.0}).gap == doctest::Approx(2.0 / 3.0));

    for (int n : {3, 4}) {
        for (int t = 0; t < 2000; ++t) {
            const auto lam = oracle::sample_gamma2(n, rng);
            const auto g = newton_maclaurin_gap(lam);
            CHECK(g.gap >= -1e-12);
            const double scale = std::max(1.0, std::abs(g.p1p2_minus_3p3));
            CHECK(std::abs(g.sum_p1i_lam2 - g.p1p2_minus_3p3) / scale < 1e-12);
        }
    }
}

TEST_CASE("sigma2 linearization") {
    // umbilic: A = lam g  ->  F = (n-1) lam g^{-1}
    {
        const double g[4] = {2.0, 0.3, 0.3, 1.5};
        const double lam = 0.7;
        double A[4];
        for (int i = 0; i < 4; ++i) A[i] = lam * g[i];
        double F[4];
        sigma2_linearization(2, A, g, F);
        Eigen::Matrix2d gm;
        gm << g[0], g[1], g[2], g[3];
        const Eigen::Matrix2d gi = gm.inverse();
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) CHECK(F[i * 2 + j] == doctest::Approx(lam * gi(i, j)).epsilon(1e-12));
    }
    // identity metric, diagonal shape
    {
        const double g[4] = {1.0, 0.0, 0.0, 1.0};
        const double A[4] = {2.0, 0.0, 0.0, 1.0};
        double F[4];
        sigma2_linearization(2, A, g, F);
        CHECK(F[0] == doctest::Approx(1.0));
        CHECK(F[3] == doctest::Approx(2.0));
        CHECK(F[1] == doctest::Approx(0.0));
    }
    const double gbad[4] = {1.0, 0.0, 0.0, -1.0};
    const double A0[4] = {0, 0, 0, 0};
    double F[4];
    CHECK_THROWS_AS(sigma2_linearization(2, A0, gbad, F), degenerate_error);

    // Gamma_2 implies positive definite F; eigenvalues w.r.t. g are P_{1,i}
    std::mt19937_64 rng(4);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const auto lam = oracle::sample_gamma2(3, rng);
        Eigen::Matrix3d M;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) M(i, j) = gauss(rng);
        if (std::abs(M.determinant()) < 0.05) continue;
        const Eigen::Matrix3d gm = M.transpose() * M;
        Eigen::Vector3d lv(lam[0], lam[1], lam[2]);
        const Eigen::Matrix3d Am = M.transpose() * lv.asDiagonal() * M;
        double Fm[9];
        sigma2_linearization(3, Am.data(), gm.data(), Fm);
        // eigenvalues of F with indices lowered by g = eigenvalues of g F
        Eigen::Matrix3d Fmat;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) Fmat(i, j) = Fm[i * 3 + j];
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix3d> es(
            (gm * Fmat * gm).eval(), gm);
        std::array<double, 3> expect{};
        for (int i = 0; i < 3; ++i) expect[i] = truncated_symmetric(1, i, lam);
        std::sort(expect.begin(), expect.end());
        for (int i = 0; i < 3; ++i) {
            CHECK(es.eigenvalues()(i) == doctest::Approx(expect[i]).epsilon(1e-8));
            CHECK(es.eigenvalues()(i) > 0.0);
        }
    }
}

TEST_CASE("sqrt(P2) is concave on Gamma_2") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> tdist(0.0, 1.0);
    for (int t = 0; t < 5000; ++t) {
        const auto a = oracle::sample_gamma2(3, rng);
        const auto b = oracle::sample_gamma2(3, rng);
        const double tt = tdist(rng);
        std::vector<double> mid(3);
        for (int i = 0; i < 3; ++i) mid[i] = tt * a[i] + (1.0 - tt) * b[i];
        const double fmid = std::sqrt(elementary_symmetric(2, mid));
        const double fa = std::sqrt(elementary_symmetric(2, a));
        const double fb = std::sqrt(elementary_symmetric(2, b));
        CHECK(fmid >= tt * fa + (1.0 - tt) * fb - 1e-12);
    }
}
