#pragma once

#include <string>

#include "dsg/analytic.hpp"

namespace dsg {

/// Reproducible analytic test surfaces:
///   constant:c                     u = c
///   equator                        u = 0
///   bump:a,b                       u = a + b x_last
///   random:seed,amp,band[,base]    u = base + amp * f, f a seeded random
///                                  polynomial of ambient degree <= band,
///                                  normalized so max(|f|, |Df|, |D^2 f|) = 1
/// The random normalization is measured on a fixed sample of sphere points,
/// so one preset string names the same function at every resolution.
struct Preset {
    std::string name;
    AmbientPoly poly;
};

Preset parse_preset(const std::string& text, int n);

inline void preset_field(const Atlas& atlas, const Preset& p, Field& u) {
    eval_on_atlas(atlas, p.poly, u);
}

} // namespace dsg
