#pragma once

#include <array>
#include <cstddef>

#include "dsg/errors.hpp"

namespace dsg {

/// Centered finite-difference weights for one grid spacing h, at accuracy
/// order p in {2, 4}.  Third-derivative stencils are one node wider than
/// first/second ones; `reach` is the widest half-width and fixes the grid pad.
struct StencilSet {
    int order = 4;   // accuracy order p
    int hw1 = 2;     // half-width of d1/d2 stencils
    int hw3 = 3;     // half-width of d3 stencil
    int reach = 3;
    std::array<double, 7> w1{}, w2{}, w3{}; // indexed by offset + hw

    static StencilSet make(int p, double h) {
        StencilSet s;
        s.order = p;
        const double h2 = h * h, h3 = h2 * h;
        if (p == 4) {
            s.hw1 = 2;
            s.hw3 = 3;
            s.reach = 3;
            const double d1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
            const double d2[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
            const double d3[7] = {1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0};
            for (int t = 0; t < 5; ++t) s.w1[t] = d1[t] / (12.0 * h);
            for (int t = 0; t < 5; ++t) s.w2[t] = d2[t] / (12.0 * h2);
            for (int t = 0; t < 7; ++t) s.w3[t] = d3[t] / (8.0 * h3);
        } else if (p == 2) {
            s.hw1 = 1;
            s.hw3 = 2;
            s.reach = 2;
            const double d1[3] = {-1.0, 0.0, 1.0};
            const double d2[3] = {1.0, -2.0, 1.0};
            const double d3[5] = {-1.0, 2.0, 0.0, -2.0, 1.0};
            for (int t = 0; t < 3; ++t) s.w1[t] = d1[t] / (2.0 * h);
            for (int t = 0; t < 3; ++t) s.w2[t] = d2[t] / h2;
            for (int t = 0; t < 5; ++t) s.w3[t] = d3[t] / (2.0 * h3);
        } else {
            throw config_error("finite-difference order must be 2 or 4");
        }
        return s;
    }
};

} // namespace dsg
