#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "dsg/errors.hpp"
#include "dsg/parallel.hpp"
#include "dsg/stencils.hpp"

namespace dsg {

// ---------------------------------------------------------------------------
// Symmetric index packing helpers (i <= j, and i <= j <= k for third order).

inline int sym2_count(int n) { return n * (n + 1) / 2; }

inline int sym2_index(int n, int i, int j) {
    if (i > j) std::swap(i, j);
    // row-major upper triangle
    return i * n - i * (i - 1) / 2 + (j - i);
}

inline int sym3_count(int n) { return n * (n + 1) * (n + 2) / 6; }

inline int sym3_index(int n, int i, int j, int k) {
    int a = i, b = j, c = k;
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    int idx = 0;
    for (int x = 0; x < n; ++x)
        for (int y = x; y < n; ++y)
            for (int z = y; z < n; ++z) {
                if (x == a && y == b && z == c) return idx;
                ++idx;
            }
    return -1;
}

// ---------------------------------------------------------------------------
// Conformal chart geometry of the round metric sigma_ij = 4/(1+|x|^2)^2 d_ij,
// all closed form.

struct ChartGeom {
    int n;
    double s, c, f;       // s=|x|^2, c=1/(1+s), f=conformal factor
    double x[3];
    double phi[3];        // d_k log sqrt(f) ... gradient of the conformal exponent
    double dphi[3][3];
    double df[3];         // d_k f
    double ddf[3][3];
};

inline ChartGeom chart_geom(int n, const double* x) {
    ChartGeom g;
    g.n = n;
    g.s = 0.0;
    for (int i = 0; i < n; ++i) {
        g.x[i] = x[i];
        g.s += x[i] * x[i];
    }
    g.c = 1.0 / (1.0 + g.s);
    const double c = g.c, c2 = c * c, c3 = c2 * c, c4 = c3 * c;
    g.f = 4.0 * c2;
    for (int k = 0; k < n; ++k) {
        g.phi[k] = -2.0 * x[k] * c;
        g.df[k] = -16.0 * x[k] * c3;
    }
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            g.dphi[k][l] = -2.0 * (k == l ? c : 0.0) + 4.0 * x[k] * x[l] * c2;
            g.ddf[k][l] = -16.0 * (k == l ? c3 : 0.0) + 96.0 * x[k] * x[l] * c4;
        }
    return g;
}

inline double christoffel_sigma(const ChartGeom& g, int k, int i, int j) {
    double v = 0.0;
    if (i == k) v += g.phi[j];
    if (j == k) v += g.phi[i];
    if (i == j) v -= g.phi[k];
    return v;
}

inline double dchristoffel_sigma(const ChartGeom& g, int l, int k, int i, int j) {
    double v = 0.0;
    if (i == k) v += g.dphi[j][l];
    if (j == k) v += g.dphi[i][l];
    if (i == j) v -= g.dphi[k][l];
    return v;
}

/// Sphere point of a chart coordinate; out has n+1 entries.  Chart 0 covers
/// the +e_{n+1} hemisphere at x=0, chart 1 the -e_{n+1} one.
inline void chart_point(int n, int chart, const double* x, double* out) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[i] * x[i];
    const double c = 1.0 / (1.0 + s);
    for (int a = 0; a < n; ++a) out[a] = 2.0 * x[a] * c;
    out[n] = (chart == 0 ? 1.0 : -1.0) * (1.0 - s) * c;
}

/// First derivatives d xi^alpha / d x_i; dxi[alpha][i].
inline void chart_point_d1(int n, int chart, const double* x, double dxi[4][3]) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[i] * x[i];
    const double c = 1.0 / (1.0 + s), c2 = c * c;
    const double eps = (chart == 0 ? 1.0 : -1.0);
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i)
            dxi[a][i] = 2.0 * (a == i ? c : 0.0) - 4.0 * x[a] * x[i] * c2;
    for (int i = 0; i < n; ++i) dxi[n][i] = -4.0 * eps * x[i] * c2;
}

/// Second derivatives d^2 xi^alpha / dx_i dx_j; ddxi[alpha][i][j].
inline void chart_point_d2(int n, int chart, const double* x, double ddxi[4][3][3]) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[i] * x[i];
    const double c = 1.0 / (1.0 + s), c2 = c * c, c3 = c2 * c;
    const double eps = (chart == 0 ? 1.0 : -1.0);
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = 16.0 * x[a] * x[i] * x[j] * c3;
                if (a == i) v += -4.0 * c2 * x[j];
                if (a == j) v += -4.0 * c2 * x[i];
                if (i == j) v += -4.0 * c2 * x[a];
                ddxi[a][i][j] = v;
            }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            ddxi[n][i][j] = eps * (-4.0 * (i == j ? c2 : 0.0) + 16.0 * x[i] * x[j] * c3);
}

/// Jacobian d y_b / d x_a of the chart transition y = x / |x|^2.
inline void transition_jacobian(int n, const double* x, double J[3][3]) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += x[i] * x[i];
    const double inv_s = 1.0 / s;
    for (int b = 0; b < n; ++b)
        for (int a = 0; a < n; ++a)
            J[b][a] = ((b == a ? 1.0 : 0.0) - 2.0 * x[b] * x[a] * inv_s) * inv_s;
}

// ---------------------------------------------------------------------------
// Fields

enum class FieldKind : int {
    Scalar,    // 1 component
    Covector,  // n
    Sym2,      // n(n+1)/2, symmetric lower-order tensor
    Sym3,      // n(n+1)(n+2)/6, fully symmetric (plain third partials)
    CoSym2,    // n * n(n+1)/2, covariant rank 3 symmetric in last two slots
    Ambient,   // n+2 ambient Minkowski components, chart independent
    Tuple      // caller-sized bundle of chart-invariant scalars
};

int field_comps(FieldKind kind, int n);

class Atlas;

struct Field {
    FieldKind kind = FieldKind::Scalar;
    int ncomp = 0;
    std::size_t nn = 0;
    std::array<std::vector<double>, 2> data;

    Field() = default;
    Field(const Atlas& atlas, FieldKind k);
    Field(const Atlas& atlas, FieldKind k, int ncomp_override);

    double* ptr(int chart, int comp) { return data[chart].data() + static_cast<std::size_t>(comp) * nn; }
    const double* ptr(int chart, int comp) const {
        return data[chart].data() + static_cast<std::size_t>(comp) * nn;
    }
    double& at(int chart, int comp, std::size_t node) { return ptr(chart, comp)[node]; }
    double at(int chart, int comp, std::size_t node) const { return ptr(chart, comp)[node]; }
    void fill(double v) {
        for (auto& d : data) std::fill(d.begin(), d.end(), v);
    }
};

/// Location of a grid node.
struct NodeRef {
    int chart = 0;
    std::size_t node = 0;
};

// Interpolation plan of one ghost node: tensor-product Lagrange window in the
// other chart.
struct GhostPlan {
    std::uint32_t node = 0;
    std::int16_t base[3] = {0, 0, 0};
    std::int16_t q = 0;
    double w[3][6] = {};
};

// ---------------------------------------------------------------------------
// Atlas

/// Two stereographic charts over the round sphere S^n.  Each chart is a
/// uniform Cartesian grid on [-L, L]^n; nodes with |x| <= 1.25 are "active"
/// (stencils and quadrature live there), the rest are ghosts filled from the
/// other chart through the inversion x -> x/|x|^2.  Immutable once built.
class Atlas {
public:
    Atlas(int n, int resolution, int fd_order = 4);

    int n = 2;
    int N = 0;        // nodes per chart edge
    int p = 4;        // finite-difference order
    int pad = 3;
    double L = 0.0;   // half-extent of the chart square
    double h = 0.0;
    double r_sync = 1.25;   // active radius; overlap band is [0.8, 1.25]
    std::size_t nn = 0;     // nodes per chart
    StencilSet st;
    int moment_degree = 0;  // degree of exactly integrated ambient polynomials

    std::vector<std::uint8_t> active;          // per node (same mask both charts)
    std::vector<std::uint32_t> active_nodes;   // flat indices
    std::vector<double> pou;                   // smooth partition-of-unity weight
    std::array<std::vector<double>, 2> quad_w; // corrected quadrature weights
    std::vector<GhostPlan> ghosts;             // same plan both charts (geometry symmetric)

    std::size_t strides[3] = {0, 0, 0};

    double coord(int i) const { return -L + h * static_cast<double>(i); }

    void node_ij(std::size_t node, int* ij) const {
        for (int a = n - 1; a >= 0; --a) {
            ij[a] = static_cast<int>(node % static_cast<std::size_t>(N));
            node /= static_cast<std::size_t>(N);
        }
    }
    std::size_t node_index(const int* ij) const {
        std::size_t id = 0;
        for (int a = 0; a < n; ++a) id = id * static_cast<std::size_t>(N) + static_cast<std::size_t>(ij[a]);
        return id;
    }
    void node_coords(std::size_t node, double* x) const {
        int ij[3];
        node_ij(node, ij);
        for (int a = 0; a < n; ++a) x[a] = coord(ij[a]);
    }
    /// Sphere point of a node (n+1 components).
    void node_point(int chart, std::size_t node, double* xi) const {
        double x[3];
        node_coords(node, x);
        chart_point(n, chart, x, xi);
    }

    std::size_t n_active() const { return active_nodes.size(); }

    // --- ghost synchronization -------------------------------------------
    void sync(Field& f, Exec exec = Exec::Parallel) const;

    // --- derivatives -------------------------------------------------------
    /// Covariant derivatives with respect to the round metric: d1 = D f,
    /// d2 = D^2 f (Christoffel-corrected).  Requires f synced; outputs are
    /// defined at active nodes only.
    void differentiate(const Field& f, Field& d1, Field& d2, Exec exec = Exec::Parallel) const;

    /// Plain partial derivatives up to third order (d3 optional).
    void jets(const Field& f, Field& d1, Field& d2, Field* d3, Exec exec = Exec::Parallel) const;

    // --- quadrature ---------------------------------------------------------
    double integrate(const Field& f, Exec exec = Exec::Parallel) const;
    template <class F>
    double integrate_fn(F&& fn, Exec exec = Exec::Parallel) const {
        const std::size_t m = active_nodes.size();
        return chunked_sum(exec, 2 * m, [&](std::size_t t) {
            const int c = t < m ? 0 : 1;
            const std::size_t node = active_nodes[t < m ? t : t - m];
            return quad_w[c][node] * fn(c, node);
        });
    }

    /// Point interpolation of one component of a (synced) field at arbitrary
    /// chart coordinates y with |y| <~ 1; order matches the ghost scheme.
    double interp(const Field& f, int chart, const double* y, int comp = 0) const;

    // --- geodesic distances -------------------------------------------------
    /// Intrinsic diameter of the metric g (Sym2 field, positive definite):
    /// max over a fixed seed set of shortest-path distances on the grid graph.
    /// Graph distances carry an O(h) upward bias from the edge-direction set.
    double geodesic_diameter(const Field& g) const;

    /// Largest |f| over active nodes of both charts.
    double max_abs(const Field& f, Exec exec = Exec::Parallel) const;

private:
    void build_ghost_plans();
    void build_quadrature();
};

/// Smooth partition-of-unity profile in log radius across [0.8, 1.25];
/// w(r) + w(1/r) = 1 on the band.
double pou_weight(double r);

} // namespace dsg
