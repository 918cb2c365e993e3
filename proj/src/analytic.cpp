#include "dsg/analytic.hpp"

#include <cmath>

namespace dsg {

namespace {
inline double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}
} // namespace

double AmbientPoly::eval(const double* xi) const {
    double s = 0.0;
    for (const auto& t : terms) {
        double v = t.coef;
        for (int i = 0; i < nvars; ++i) v *= ipow(xi[i], t.e[i]);
        s += v;
    }
    return s;
}

void AmbientPoly::grad(const double* xi, double* g) const {
    for (int i = 0; i < nvars; ++i) g[i] = 0.0;
    for (const auto& t : terms)
        for (int i = 0; i < nvars; ++i) {
            if (t.e[i] == 0) continue;
            double v = t.coef * t.e[i] * ipow(xi[i], t.e[i] - 1);
            for (int j = 0; j < nvars; ++j)
                if (j != i) v *= ipow(xi[j], t.e[j]);
            g[i] += v;
        }
}

void AmbientPoly::hess(const double* xi, double* H) const {
    for (int i = 0; i < nvars * nvars; ++i) H[i] = 0.0;
    for (const auto& t : terms)
        for (int i = 0; i < nvars; ++i)
            for (int j = 0; j < nvars; ++j) {
                int ei = t.e[i], ej = t.e[j];
                double c = t.coef;
                if (i == j) {
                    if (ei < 2) continue;
                    c *= ei * (ei - 1);
                    ei -= 2;
                } else {
                    if (ei == 0 || ej == 0) continue;
                    c *= ei * ej;
                    ei -= 1;
                    ej -= 1;
                }
                double v = c;
                for (int k = 0; k < nvars; ++k) {
                    int e = t.e[k];
                    if (k == i) e = ei;
                    if (k == j && i != j) e = ej;
                    v *= ipow(xi[k], e);
                }
                H[i * nvars + j] += v;
            }
}

AnalyticJet analytic_jet(const AmbientPoly& P, int n, int chart, const double* x) {
    AnalyticJet jet{};
    const int d = n + 1;
    double xi[4];
    chart_point(n, chart, x, xi);
    double dxi[4][3];
    chart_point_d1(n, chart, x, dxi);
    double ddxi[4][3][3];
    chart_point_d2(n, chart, x, ddxi);

    jet.u = P.eval(xi);
    double g[4];
    P.grad(xi, g);
    double H[16];
    P.hess(xi, H);

    for (int i = 0; i < n; ++i) {
        double v = 0.0;
        for (int a = 0; a < d; ++a) v += g[a] * dxi[a][i];
        jet.du[i] = v;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double v = 0.0;
            for (int a = 0; a < d; ++a) {
                for (int b = 0; b < d; ++b) v += H[a * d + b] * dxi[a][i] * dxi[b][j];
                v += g[a] * ddxi[a][i][j];
            }
            jet.d2_plain[i][j] = v;
        }
    const ChartGeom cg = chart_geom(n, x);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double corr = 0.0;
            for (int k = 0; k < n; ++k) corr += christoffel_sigma(cg, k, i, j) * jet.du[k];
            jet.d2_cov[i][j] = jet.d2_plain[i][j] - corr;
        }
    return jet;
}

void eval_on_atlas(const Atlas& atlas, const AmbientPoly& P, Field& u) {
    for (int c = 0; c < 2; ++c)
        for_each_index_parallel(atlas.nn, [&](std::size_t q) {
            double xi[4];
            atlas.node_point(c, q, xi);
            u.ptr(c, 0)[q] = P.eval(xi);
        });
}

void eval_jets_on_atlas(const Atlas& atlas, const AmbientPoly& P, Field& u, Field& d1, Field& d2cov) {
    const int n = atlas.n;
    for (int c = 0; c < 2; ++c)
        for_each_index_parallel(atlas.nn, [&](std::size_t q) {
            double x[3];
            atlas.node_coords(q, x);
            const AnalyticJet jet = analytic_jet(P, n, c, x);
            u.ptr(c, 0)[q] = jet.u;
            for (int i = 0; i < n; ++i) d1.ptr(c, i)[q] = jet.du[i];
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) d2cov.ptr(c, sym2_index(n, i, j))[q] = jet.d2_cov[i][j];
        });
}

} // namespace dsg
