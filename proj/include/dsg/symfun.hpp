#pragma once

#include <span>

#include "dsg/errors.hpp"

namespace dsg {

/// Elementary symmetric polynomial P_k of the entries of lam; P_0 = 1.
double elementary_symmetric(int k, std::span<const double> lam);

/// P_k with entry i replaced by zero.
double truncated_symmetric(int k, int i, std::span<const double> lam);

struct Gamma2Result {
    bool inside = false;
    double P1 = 0.0;
    double P2 = 0.0;
};

/// Membership in the Gamma_2 cone, characterized by P1 > 0 and P2 > 0,
/// with the two margins reported.
Gamma2Result gamma2_contains(std::span<const double> lam);

struct NewtonMaclaurinGap {
    double gap = 0.0;            // H|A|^2 - tr A^3 - (2/n) P1 P2, >= 0 on Gamma_2
    double sum_p1i_lam2 = 0.0;   // sum_i P_{1,i} lam_i^2
    double p1p2_minus_3p3 = 0.0; // equals the sum above identically
};

NewtonMaclaurinGap newton_maclaurin_gap(std::span<const double> lam);

/// Linearization of 2 P_2 with respect to the shape operator:
/// F^{ij} = H g^{ij} - A^{ij}, indices raised by g.  Inputs and output are
/// n x n row-major; g must be positive definite.
void sigma2_linearization(int n, const double* A, const double* g, double* F);

} // namespace dsg
