#include "dsg/symfun.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace dsg {

double elementary_symmetric(int k, std::span<const double> lam) {
    const int n = static_cast<int>(lam.size());
    if (k < 0 || k > n) throw config_error("symmetric polynomial index out of range");
    // coefficients of prod (1 + lam_i t), degree-k term
    std::vector<double> e(static_cast<std::size_t>(k) + 1, 0.0);
    e[0] = 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::min(i + 1, k); j >= 1; --j) e[j] += lam[i] * e[j - 1];
    return e[static_cast<std::size_t>(k)];
}

double truncated_symmetric(int k, int i, std::span<const double> lam) {
    const int n = static_cast<int>(lam.size());
    if (i < 0 || i >= n) throw config_error("truncation index out of range");
    std::vector<double> mu(lam.begin(), lam.end());
    mu[static_cast<std::size_t>(i)] = 0.0;
    return elementary_symmetric(k, mu);
}

Gamma2Result gamma2_contains(std::span<const double> lam) {
    Gamma2Result r;
    r.P1 = elementary_symmetric(1, lam);
    r.P2 = elementary_symmetric(2, lam);
    r.inside = r.P1 > 0.0 && r.P2 > 0.0;
    return r;
}

NewtonMaclaurinGap newton_maclaurin_gap(std::span<const double> lam) {
    const int n = static_cast<int>(lam.size());
    NewtonMaclaurinGap g;
    double H = 0.0, A2 = 0.0, A3 = 0.0;
    for (double l : lam) {
        H += l;
        A2 += l * l;
        A3 += l * l * l;
    }
    const double P1 = H;
    const double P2 = elementary_symmetric(2, lam);
    const double P3 = n >= 3 ? elementary_symmetric(3, lam) : 0.0;
    g.gap = H * A2 - A3 - 2.0 / n * P1 * P2;
    for (int i = 0; i < n; ++i)
        g.sum_p1i_lam2 += truncated_symmetric(1, i, lam) * lam[i] * lam[i];
    g.p1p2_minus_3p3 = P1 * P2 - 3.0 * P3;
    return g;
}

void sigma2_linearization(int n, const double* A, const double* g, double* F) {
    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const Mat> Am(A, n, n), gm(g, n, n);
    Eigen::Map<Mat> Fm(F, n, n);
    const double det = gm.determinant();
    if (!(det > 0.0) || !(gm(0, 0) > 0.0)) throw degenerate_error("metric not positive definite");
    const Mat gi = gm.inverse();
    const Mat shape = gi * Am; // A^i_j
    const double H = shape.trace();
    Fm = H * gi - gi * Am * gi;
}

} // namespace dsg
