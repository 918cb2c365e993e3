#pragma once

#include <vector>

#include "dsg/atlas.hpp"

namespace dsg {

/// Polynomial in the n+1 ambient coordinates of the sphere, used to define
/// smooth test fields with exact chart derivatives.
struct AmbientPoly {
    int nvars = 3;
    struct Term {
        double coef;
        int e[4];
    };
    std::vector<Term> terms;

    static AmbientPoly constant(int nvars, double c) {
        AmbientPoly p;
        p.nvars = nvars;
        if (c != 0.0) p.terms.push_back({c, {0, 0, 0, 0}});
        return p;
    }
    static AmbientPoly coordinate(int nvars, int axis, double coef = 1.0) {
        AmbientPoly p;
        p.nvars = nvars;
        Term t{coef, {0, 0, 0, 0}};
        t.e[axis] = 1;
        p.terms.push_back(t);
        return p;
    }
    void add_term(double coef, int e0, int e1, int e2, int e3 = 0) {
        terms.push_back({coef, {e0, e1, e2, e3}});
    }
    AmbientPoly& operator+=(const AmbientPoly& o) {
        terms.insert(terms.end(), o.terms.begin(), o.terms.end());
        return *this;
    }
    AmbientPoly& operator*=(double s) {
        for (auto& t : terms) t.coef *= s;
        return *this;
    }

    double eval(const double* xi) const;
    void grad(const double* xi, double* g) const;           // nvars entries
    void hess(const double* xi, double* H) const;           // nvars*nvars row-major
};

/// Exact chart-coordinate jets of the restriction of P to the sphere:
/// value, plain partials, covariant Hessian with respect to sigma.
struct AnalyticJet {
    double u;
    double du[3];
    double d2_plain[3][3];
    double d2_cov[3][3];
};

AnalyticJet analytic_jet(const AmbientPoly& P, int n, int chart, const double* x);

/// Evaluate P at every node (active and ghost) of both charts.
void eval_on_atlas(const Atlas& atlas, const AmbientPoly& P, Field& u);

/// Exact derivative fields at all nodes: d1 plain (= covariant) partials,
/// d2cov the covariant Hessian.
void eval_jets_on_atlas(const Atlas& atlas, const AmbientPoly& P, Field& u, Field& d1, Field& d2cov);

} // namespace dsg
