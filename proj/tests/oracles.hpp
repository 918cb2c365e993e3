#pragma once

// Test-only brute-force oracles and sample generators, independent of the
// library implementations they check.

#include <array>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

/// P_k by direct enumeration of index subsets.
inline double elementary_symmetric_bruteforce(int k, const std::vector<double>& lam) {
    const int n = static_cast<int>(lam.size());
    if (k == 0) return 1.0;
    double total = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        double prod = 1.0;
        for (int i = 0; i < k; ++i) prod *= lam[static_cast<std::size_t>(idx[i])];
        total += prod;
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return total;
}

/// Rejection sampler for the Gamma_2 cone (P1 > 0, P2 > 0).
inline std::vector<double> sample_gamma2(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(-1.0, 2.0);
    while (true) {
        std::vector<double> lam(static_cast<std::size_t>(n));
        double p1 = 0.0, sq = 0.0;
        for (auto& l : lam) {
            l = unif(rng);
            p1 += l;
            sq += l * l;
        }
        const double p2 = 0.5 * (p1 * p1 - sq);
        if (p1 > 0.0 && p2 > 0.0) return lam;
    }
}

} // namespace oracle
