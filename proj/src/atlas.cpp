#include "dsg/atlas.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <queue>

namespace dsg {

int field_comps(FieldKind kind, int n) {
    switch (kind) {
        case FieldKind::Scalar: return 1;
        case FieldKind::Covector: return n;
        case FieldKind::Sym2: return sym2_count(n);
        case FieldKind::Sym3: return sym3_count(n);
        case FieldKind::CoSym2: return n * sym2_count(n);
        case FieldKind::Ambient: return n + 2;
        case FieldKind::Tuple: return 0; // caller supplies the size
    }
    return 0;
}

Field::Field(const Atlas& atlas, FieldKind k)
    : kind(k), ncomp(field_comps(k, atlas.n)), nn(atlas.nn) {
    data[0].assign(static_cast<std::size_t>(ncomp) * nn, 0.0);
    data[1].assign(static_cast<std::size_t>(ncomp) * nn, 0.0);
}

Field::Field(const Atlas& atlas, FieldKind k, int ncomp_override)
    : kind(k), ncomp(ncomp_override), nn(atlas.nn) {
    data[0].assign(static_cast<std::size_t>(ncomp) * nn, 0.0);
    data[1].assign(static_cast<std::size_t>(ncomp) * nn, 0.0);
}

double pou_weight(double r) {
    constexpr double r0 = 0.8, r1 = 1.25;
    if (r <= r0) return 1.0;
    if (r >= r1) return 0.0;
    const double t = std::log(r / r0) / std::log(r1 / r0);
    const auto bump = [](double z) { return z > 0.0 ? std::exp(-1.0 / z) : 0.0; };
    const double a = bump(1.0 - t), b = bump(t);
    return a / (a + b);
}

// ---------------------------------------------------------------------------

Atlas::Atlas(int n_, int resolution, int fd_order) : n(n_), N(resolution), p(fd_order) {
    if (n < 2 || n > 3) throw config_error("full grids support dimension n in {2, 3}");
    st = StencilSet::make(p, 1.0);
    pad = st.reach;
    if (N < 2 * pad + 10) throw config_error("resolution below stencil width for this fd order");

    L = r_sync * static_cast<double>(N - 1) / static_cast<double>(N - 1 - 2 * pad);
    h = 2.0 * L / static_cast<double>(N - 1);
    st = StencilSet::make(p, h);

    nn = 1;
    for (int a = 0; a < n; ++a) nn *= static_cast<std::size_t>(N);
    strides[n - 1] = 1;
    for (int a = n - 2; a >= 0; --a) strides[a] = strides[a + 1] * static_cast<std::size_t>(N);

    active.assign(nn, 0);
    pou.assign(nn, 0.0);
    const double r2max = r_sync * r_sync * (1.0 + 1e-13);
    for (std::size_t q = 0; q < nn; ++q) {
        double x[3];
        node_coords(q, x);
        double s = 0.0;
        for (int a = 0; a < n; ++a) s += x[a] * x[a];
        if (s <= r2max) {
            active[q] = 1;
            active_nodes.push_back(static_cast<std::uint32_t>(q));
            pou[q] = pou_weight(std::sqrt(s));
        }
    }

    build_ghost_plans();
    build_quadrature();
}

void Atlas::build_ghost_plans() {
    ghosts.clear();
    // enumerate shift vectors ordered by chebyshev size, small first
    std::vector<std::array<int, 3>> shifts;
    for (int r = 0; r <= 2; ++r)
        for (int s0 = -r; s0 <= r; ++s0)
            for (int s1 = -r; s1 <= r; ++s1)
                for (int s2 = (n == 3 ? -r : 0); s2 <= (n == 3 ? r : 0); ++s2) {
                    const int m = std::max({std::abs(s0), std::abs(s1), std::abs(s2)});
                    if (m != r) continue;
                    shifts.push_back({s0, s1, s2});
                }

    for (std::size_t q = 0; q < nn; ++q) {
        if (active[q]) continue;
        double x[3];
        node_coords(q, x);
        double s = 0.0;
        for (int a = 0; a < n; ++a) s += x[a] * x[a];
        double y[3];
        for (int a = 0; a < n; ++a) y[a] = x[a] / s;

        GhostPlan plan;
        plan.node = static_cast<std::uint32_t>(q);
        bool found = false;
        for (int qq : {6, 4, 2}) {
            int i0[3];
            for (int a = 0; a < n; ++a)
                i0[a] = static_cast<int>(std::floor((y[a] + L) / h)) - (qq / 2 - 1);
            for (const auto& sh : shifts) {
                int base[3];
                bool ok = true;
                for (int a = 0; a < n && ok; ++a) {
                    base[a] = i0[a] + sh[a];
                    if (base[a] < 0 || base[a] + qq > N) ok = false;
                    // interpolation, not extrapolation
                    if (ok && (y[a] < coord(base[a]) - 1e-9 || y[a] > coord(base[a] + qq - 1) + 1e-9))
                        ok = false;
                }
                if (!ok) continue;
                // every window node must carry authoritative (active) data
                int ij[3] = {0, 0, 0};
                for (std::size_t t = 0; ok && t < static_cast<std::size_t>(std::pow(qq, n) + 0.5); ++t) {
                    std::size_t r = t;
                    for (int a = n - 1; a >= 0; --a) {
                        ij[a] = base[a] + static_cast<int>(r % static_cast<std::size_t>(qq));
                        r /= static_cast<std::size_t>(qq);
                    }
                    if (!active[node_index(ij)]) ok = false;
                }
                if (!ok) continue;
                plan.q = static_cast<std::int16_t>(qq);
                for (int a = 0; a < n; ++a) {
                    plan.base[a] = static_cast<std::int16_t>(base[a]);
                    for (int t = 0; t < qq; ++t) {
                        double w = 1.0;
                        const double ct = coord(base[a] + t);
                        for (int u = 0; u < qq; ++u) {
                            if (u == t) continue;
                            const double cu = coord(base[a] + u);
                            w *= (y[a] - cu) / (ct - cu);
                        }
                        plan.w[a][t] = w;
                    }
                }
                found = true;
                break;
            }
            if (found) break;
        }
        if (!found) throw config_error("resolution too low to interpolate across the chart overlap");
        ghosts.push_back(plan);
    }
}

// ---------------------------------------------------------------------------
// Quadrature: smooth partition-of-unity baseline weights plus a one-time
// least-squares moment correction that makes restrictions of ambient
// polynomials up to `moment_degree` integrate exactly.

namespace {

// coefficients of Legendre polynomials P_0..P_D
std::vector<std::vector<double>> legendre_coeffs(int D) {
    std::vector<std::vector<double>> P(static_cast<std::size_t>(D) + 1);
    P[0] = {1.0};
    if (D >= 1) P[1] = {0.0, 1.0};
    for (int k = 1; k < D; ++k) {
        std::vector<double> next(static_cast<std::size_t>(k) + 2, 0.0);
        for (std::size_t i = 0; i < P[k].size(); ++i) next[i + 1] += (2.0 * k + 1.0) * P[k][i];
        for (std::size_t i = 0; i < P[k - 1].size(); ++i) next[i] -= static_cast<double>(k) * P[k - 1][i];
        for (auto& c : next) c /= (k + 1.0);
        P[static_cast<std::size_t>(k) + 1] = std::move(next);
    }
    return P;
}

// exact sphere moment of a monomial xi^alpha over S^{d-1}
double monomial_moment(int d, const int* alpha) {
    double lg_num = 0.0, beta_sum = 0.0;
    for (int i = 0; i < d; ++i) {
        if (alpha[i] % 2 == 1) return 0.0;
        const double beta = (alpha[i] + 1.0) / 2.0;
        lg_num += std::lgamma(beta);
        beta_sum += beta;
    }
    return 2.0 * std::exp(lg_num - std::lgamma(beta_sum));
}

} // namespace

void Atlas::build_quadrature() {
    const double hn = std::pow(h, n);
    std::vector<double> w0(nn, 0.0);
    for (std::uint32_t q : active_nodes) {
        double x[3];
        node_coords(q, x);
        double s = 0.0;
        for (int a = 0; a < n; ++a) s += x[a] * x[a];
        const double f = 4.0 / ((1.0 + s) * (1.0 + s));
        w0[q] = pou[q] * std::pow(f, 0.5 * n) * hn;
    }
    quad_w[0] = w0;
    quad_w[1] = w0;

    // basis: products of Legendre polynomials in the n+1 ambient coordinates,
    // total degree <= D, degree in the last coordinate <= 1
    const int d = n + 1;
    int D = (n == 2 ? 12 : 6);
    const std::size_t m = 2 * active_nodes.size();
    auto basis_count = [&](int deg) {
        int K = 0;
        int e[4];
        for (e[0] = 0; e[0] <= deg; ++e[0])
            for (e[1] = 0; e[1] <= deg - e[0]; ++e[1]) {
                if (d == 3) {
                    for (e[2] = 0; e[2] <= std::min(1, deg - e[0] - e[1]); ++e[2]) ++K;
                } else {
                    for (e[2] = 0; e[2] <= deg - e[0] - e[1]; ++e[2])
                        for (e[3] = 0; e[3] <= std::min(1, deg - e[0] - e[1] - e[2]); ++e[3]) ++K;
                }
            }
        return K;
    };
    while (D > 0 && basis_count(D) > static_cast<int>(m / 2)) --D;
    moment_degree = D;

    std::vector<std::array<int, 4>> exps;
    {
        int e[4] = {0, 0, 0, 0};
        for (e[0] = 0; e[0] <= D; ++e[0])
            for (e[1] = 0; e[1] <= D - e[0]; ++e[1]) {
                if (d == 3) {
                    for (e[2] = 0; e[2] <= std::min(1, D - e[0] - e[1]); ++e[2])
                        exps.push_back({e[0], e[1], e[2], 0});
                } else {
                    for (e[2] = 0; e[2] <= D - e[0] - e[1]; ++e[2])
                        for (e[3] = 0; e[3] <= std::min(1, D - e[0] - e[1] - e[2]); ++e[3])
                            exps.push_back({e[0], e[1], e[2], e[3]});
                }
            }
    }
    const int K = static_cast<int>(exps.size());
    const auto P = legendre_coeffs(D);

    // exact integrals: expand each Legendre product into monomials
    Eigen::VectorXd b(K);
    for (int k = 0; k < K; ++k) {
        double total = 0.0;
        const auto& e = exps[k];
        std::array<std::size_t, 4> len{};
        for (int i = 0; i < d; ++i) len[i] = P[e[i]].size();
        std::array<std::size_t, 4> idx{};
        while (true) {
            double coef = 1.0;
            int mono[4] = {0, 0, 0, 0};
            for (int i = 0; i < d; ++i) {
                coef *= P[e[i]][idx[i]];
                mono[i] = static_cast<int>(idx[i]);
            }
            if (coef != 0.0) total += coef * monomial_moment(d, mono);
            int i = 0;
            for (; i < d; ++i) {
                if (++idx[i] < len[i]) break;
                idx[i] = 0;
            }
            if (i == d) break;
        }
        b(k) = total;
    }

    // Gram matrix and defect of the baseline weights
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(K, K);
    Eigen::VectorXd r = b;
    std::vector<double> leg(static_cast<std::size_t>(d) * (D + 1));
    Eigen::VectorXd phi(K);
    for (int c = 0; c < 2; ++c) {
        for (std::uint32_t q : active_nodes) {
            const double w = quad_w[c][q];
            double xi[4];
            node_point(c, q, xi);
            for (int i = 0; i < d; ++i) {
                leg[i * (D + 1) + 0] = 1.0;
                if (D >= 1) leg[i * (D + 1) + 1] = xi[i];
                for (int kk = 1; kk < D; ++kk)
                    leg[i * (D + 1) + kk + 1] =
                        ((2.0 * kk + 1.0) * xi[i] * leg[i * (D + 1) + kk] - kk * leg[i * (D + 1) + kk - 1]) /
                        (kk + 1.0);
            }
            for (int k = 0; k < K; ++k) {
                double v = w;
                for (int i = 0; i < d; ++i) v *= leg[i * (D + 1) + exps[k][i]];
                phi(k) = v; // includes the weight: phi_k = w0 * basis_k
            }
            // G += phi phi^T / w ; r -= phi
            if (w > 0.0) G.selfadjointView<Eigen::Lower>().rankUpdate(phi, 1.0 / w);
            r -= phi;
        }
    }
    Eigen::MatrixXd Gs = G.selfadjointView<Eigen::Lower>();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Gs);
    Eigen::VectorXd z = ldlt.solve(r);
    z += ldlt.solve(r - Gs * z); // one refinement pass

    // apply: w_q <- w_q (1 + basis^T z)
    for (int c = 0; c < 2; ++c) {
        for (std::uint32_t q : active_nodes) {
            const double w = quad_w[c][q];
            if (w <= 0.0) continue;
            double xi[4];
            node_point(c, q, xi);
            for (int i = 0; i < d; ++i) {
                leg[i * (D + 1) + 0] = 1.0;
                if (D >= 1) leg[i * (D + 1) + 1] = xi[i];
                for (int kk = 1; kk < D; ++kk)
                    leg[i * (D + 1) + kk + 1] =
                        ((2.0 * kk + 1.0) * xi[i] * leg[i * (D + 1) + kk] - kk * leg[i * (D + 1) + kk - 1]) /
                        (kk + 1.0);
            }
            double corr = 0.0;
            for (int k = 0; k < K; ++k) {
                double v = 1.0;
                for (int i = 0; i < d; ++i) v *= leg[i * (D + 1) + exps[k][i]];
                corr += v * z(k);
            }
            quad_w[c][q] = w * (1.0 + corr);
        }
    }
}

// ---------------------------------------------------------------------------
// Ghost synchronization

namespace {

template <int NDim>
inline void gather_window(const Atlas& atlas, const Field& f, int src_chart, const GhostPlan& gp,
                          double* out) {
    const int qq = gp.q;
    for (int comp = 0; comp < f.ncomp; ++comp) out[comp] = 0.0;
    if constexpr (NDim == 2) {
        for (int ti = 0; ti < qq; ++ti) {
            const double wi = gp.w[0][ti];
            const std::size_t row = static_cast<std::size_t>(gp.base[0] + ti) * atlas.strides[0] +
                                    static_cast<std::size_t>(gp.base[1]);
            for (int tj = 0; tj < qq; ++tj) {
                const double w = wi * gp.w[1][tj];
                const std::size_t node = row + static_cast<std::size_t>(tj);
                for (int comp = 0; comp < f.ncomp; ++comp) out[comp] += w * f.ptr(src_chart, comp)[node];
            }
        }
    } else {
        for (int ti = 0; ti < qq; ++ti)
            for (int tj = 0; tj < qq; ++tj) {
                const double wij = gp.w[0][ti] * gp.w[1][tj];
                const std::size_t row = static_cast<std::size_t>(gp.base[0] + ti) * atlas.strides[0] +
                                        static_cast<std::size_t>(gp.base[1] + tj) * atlas.strides[1] +
                                        static_cast<std::size_t>(gp.base[2]);
                for (int tk = 0; tk < qq; ++tk) {
                    const double w = wij * gp.w[2][tk];
                    const std::size_t node = row + static_cast<std::size_t>(tk);
                    for (int comp = 0; comp < f.ncomp; ++comp)
                        out[comp] += w * f.ptr(src_chart, comp)[node];
                }
            }
    }
}

} // namespace

void Atlas::sync(Field& f, Exec exec) const {
    const int nloc = n;
    for (int c = 0; c < 2; ++c) {
        const int o = 1 - c;
        for_each_index(exec, ghosts.size(), [&](std::size_t gi) {
            const GhostPlan& gp = ghosts[gi];
            double raw[40];
            if (nloc == 2)
                gather_window<2>(*this, f, o, gp, raw);
            else
                gather_window<3>(*this, f, o, gp, raw);

            if (f.kind == FieldKind::Scalar || f.kind == FieldKind::Ambient ||
                f.kind == FieldKind::Tuple) {
                for (int comp = 0; comp < f.ncomp; ++comp) f.ptr(c, comp)[gp.node] = raw[comp];
                return;
            }

            double x[3];
            node_coords(gp.node, x);
            double J[3][3];
            transition_jacobian(nloc, x, J);

            switch (f.kind) {
                case FieldKind::Covector: {
                    for (int a = 0; a < nloc; ++a) {
                        double v = 0.0;
                        for (int bidx = 0; bidx < nloc; ++bidx) v += raw[bidx] * J[bidx][a];
                        f.ptr(c, a)[gp.node] = v;
                    }
                    break;
                }
                case FieldKind::Sym2: {
                    for (int a = 0; a < nloc; ++a)
                        for (int b2 = a; b2 < nloc; ++b2) {
                            double v = 0.0;
                            for (int cc = 0; cc < nloc; ++cc)
                                for (int dd = 0; dd < nloc; ++dd)
                                    v += raw[sym2_index(nloc, cc, dd)] * J[cc][a] * J[dd][b2];
                            f.ptr(c, sym2_index(nloc, a, b2))[gp.node] = v;
                        }
                    break;
                }
                case FieldKind::Sym3: {
                    for (int a = 0; a < nloc; ++a)
                        for (int b2 = a; b2 < nloc; ++b2)
                            for (int c3 = b2; c3 < nloc; ++c3) {
                                double v = 0.0;
                                for (int u = 0; u < nloc; ++u)
                                    for (int vv = 0; vv < nloc; ++vv)
                                        for (int ww = 0; ww < nloc; ++ww)
                                            v += raw[sym3_index(nloc, u, vv, ww)] * J[u][a] * J[vv][b2] *
                                                 J[ww][c3];
                                f.ptr(c, sym3_index(nloc, a, b2, c3))[gp.node] = v;
                            }
                    break;
                }
                case FieldKind::CoSym2: {
                    const int ns = sym2_count(nloc);
                    for (int k = 0; k < nloc; ++k)
                        for (int a = 0; a < nloc; ++a)
                            for (int b2 = a; b2 < nloc; ++b2) {
                                double v = 0.0;
                                for (int l = 0; l < nloc; ++l)
                                    for (int cc = 0; cc < nloc; ++cc)
                                        for (int dd = 0; dd < nloc; ++dd)
                                            v += raw[l * ns + sym2_index(nloc, cc, dd)] * J[l][k] * J[cc][a] *
                                                 J[dd][b2];
                                f.ptr(c, k * ns + sym2_index(nloc, a, b2))[gp.node] = v;
                            }
                    break;
                }
                default:
                    break;
            }
        });
    }
}

// ---------------------------------------------------------------------------
// Derivatives

void Atlas::jets(const Field& f, Field& d1, Field& d2, Field* d3, Exec exec) const {
    const int nloc = n;
    const StencilSet& S = st;
    const int hw1 = S.hw1, hw3 = S.hw3;
    const int n1 = 2 * hw1 + 1, n3 = 2 * hw3 + 1;

    for (int c = 0; c < 2; ++c) {
        const double* src = f.ptr(c, 0);
        for_each_index(exec, active_nodes.size(), [&](std::size_t qi) {
            const std::size_t q = active_nodes[qi];
            // first and pure second derivatives
            for (int a = 0; a < nloc; ++a) {
                const std::ptrdiff_t sa = static_cast<std::ptrdiff_t>(strides[a]);
                double g1 = 0.0, g2 = 0.0;
                for (int t = 0; t < n1; ++t) {
                    const double v = src[static_cast<std::ptrdiff_t>(q) + (t - hw1) * sa];
                    g1 += S.w1[t] * v;
                    g2 += S.w2[t] * v;
                }
                d1.ptr(c, a)[q] = g1;
                d2.ptr(c, sym2_index(nloc, a, a))[q] = g2;
            }
            // mixed second derivatives
            for (int a = 0; a < nloc; ++a)
                for (int b = a + 1; b < nloc; ++b) {
                    const std::ptrdiff_t sa = static_cast<std::ptrdiff_t>(strides[a]);
                    const std::ptrdiff_t sb = static_cast<std::ptrdiff_t>(strides[b]);
                    double g = 0.0;
                    for (int t = 0; t < n1; ++t) {
                        if (S.w1[t] == 0.0) continue;
                        double row = 0.0;
                        for (int u = 0; u < n1; ++u)
                            row += S.w1[u] * src[static_cast<std::ptrdiff_t>(q) + (t - hw1) * sa + (u - hw1) * sb];
                        g += S.w1[t] * row;
                    }
                    d2.ptr(c, sym2_index(nloc, a, b))[q] = g;
                }
            if (!d3) return;
            // third derivatives, multiset (a,b,c)
            for (int a = 0; a < nloc; ++a) {
                const std::ptrdiff_t sa = static_cast<std::ptrdiff_t>(strides[a]);
                double g = 0.0;
                for (int t = 0; t < n3; ++t)
                    g += S.w3[t] * src[static_cast<std::ptrdiff_t>(q) + (t - hw3) * sa];
                d3->ptr(c, sym3_index(nloc, a, a, a))[q] = g;
            }
            for (int a = 0; a < nloc; ++a)
                for (int b = 0; b < nloc; ++b) {
                    if (a == b) continue;
                    const std::ptrdiff_t sa = static_cast<std::ptrdiff_t>(strides[a]);
                    const std::ptrdiff_t sb = static_cast<std::ptrdiff_t>(strides[b]);
                    // d^3 / da^2 db with a != b
                    double g = 0.0;
                    for (int t = 0; t < n1; ++t) {
                        double row = 0.0;
                        for (int u = 0; u < n1; ++u)
                            row += S.w1[u] * src[static_cast<std::ptrdiff_t>(q) + (t - hw1) * sa + (u - hw1) * sb];
                        g += S.w2[t] * row;
                    }
                    d3->ptr(c, sym3_index(nloc, a, a, b))[q] = g;
                }
            if (nloc == 3) {
                const std::ptrdiff_t s0 = static_cast<std::ptrdiff_t>(strides[0]);
                const std::ptrdiff_t s1 = static_cast<std::ptrdiff_t>(strides[1]);
                const std::ptrdiff_t s2 = static_cast<std::ptrdiff_t>(strides[2]);
                double g = 0.0;
                for (int t = 0; t < n1; ++t) {
                    if (S.w1[t] == 0.0) continue;
                    for (int u = 0; u < n1; ++u) {
                        if (S.w1[u] == 0.0) continue;
                        double row = 0.0;
                        for (int v = 0; v < n1; ++v)
                            row += S.w1[v] *
                                   src[static_cast<std::ptrdiff_t>(q) + (t - hw1) * s0 + (u - hw1) * s1 +
                                       (v - hw1) * s2];
                        g += S.w1[t] * S.w1[u] * row;
                    }
                }
                d3->ptr(c, sym3_index(3, 0, 1, 2))[q] = g;
            }
        });
    }
}

void Atlas::differentiate(const Field& f, Field& d1, Field& d2, Exec exec) const {
    jets(f, d1, d2, nullptr, exec);
    const int nloc = n;
    for (int c = 0; c < 2; ++c) {
        for_each_index(exec, active_nodes.size(), [&](std::size_t qi) {
            const std::size_t q = active_nodes[qi];
            double x[3];
            node_coords(q, x);
            const ChartGeom cg = chart_geom(nloc, x);
            for (int i = 0; i < nloc; ++i)
                for (int j = i; j < nloc; ++j) {
                    double corr = 0.0;
                    for (int k = 0; k < nloc; ++k)
                        corr += christoffel_sigma(cg, k, i, j) * d1.ptr(c, k)[q];
                    d2.ptr(c, sym2_index(nloc, i, j))[q] -= corr;
                }
        });
    }
}

double Atlas::integrate(const Field& f, Exec exec) const {
    return integrate_fn([&](int c, std::size_t q) { return f.ptr(c, 0)[q]; }, exec);
}

double Atlas::interp(const Field& f, int chart, const double* y, int comp) const {
    const int qq = 6;
    int base[3];
    for (int a = 0; a < n; ++a) {
        int b = static_cast<int>(std::floor((y[a] + L) / h)) - (qq / 2 - 1);
        base[a] = std::clamp(b, 0, N - qq);
    }
    double w[3][6];
    for (int a = 0; a < n; ++a)
        for (int t = 0; t < qq; ++t) {
            double v = 1.0;
            const double ct = coord(base[a] + t);
            for (int u = 0; u < qq; ++u) {
                if (u == t) continue;
                v *= (y[a] - coord(base[a] + u)) / (ct - coord(base[a] + u));
            }
            w[a][t] = v;
        }
    const double* src = f.ptr(chart, comp);
    double out = 0.0;
    if (n == 2) {
        for (int ti = 0; ti < qq; ++ti) {
            const std::size_t row = static_cast<std::size_t>(base[0] + ti) * strides[0] +
                                    static_cast<std::size_t>(base[1]);
            for (int tj = 0; tj < qq; ++tj) out += w[0][ti] * w[1][tj] * src[row + static_cast<std::size_t>(tj)];
        }
    } else {
        for (int ti = 0; ti < qq; ++ti)
            for (int tj = 0; tj < qq; ++tj) {
                const std::size_t row = static_cast<std::size_t>(base[0] + ti) * strides[0] +
                                        static_cast<std::size_t>(base[1] + tj) * strides[1] +
                                        static_cast<std::size_t>(base[2]);
                for (int tk = 0; tk < qq; ++tk)
                    out += w[0][ti] * w[1][tj] * w[2][tk] * src[row + static_cast<std::size_t>(tk)];
            }
    }
    return out;
}

double Atlas::max_abs(const Field& f, Exec exec) const {
    const std::size_t m = active_nodes.size();
    return chunked_max(exec, 2 * m * static_cast<std::size_t>(f.ncomp), [&](std::size_t t) {
        const std::size_t per = 2 * m;
        const int comp = static_cast<int>(t / per);
        const std::size_t r = t % per;
        const int c = r < m ? 0 : 1;
        const std::size_t q = active_nodes[r < m ? r : r - m];
        return std::abs(f.ptr(c, comp)[q]);
    });
}

// ---------------------------------------------------------------------------
// Geodesic diameter

double Atlas::geodesic_diameter(const Field& g) const {
    const int nloc = n;
    const int ns = sym2_count(nloc);

    // positive definiteness check
    for (int c = 0; c < 2; ++c)
        for (std::uint32_t q : active_nodes) {
            double M[3][3];
            for (int i = 0; i < nloc; ++i)
                for (int j = 0; j < nloc; ++j) M[i][j] = g.ptr(c, sym2_index(nloc, i, j))[q];
            bool ok = M[0][0] > 0.0;
            const double det2 = M[0][0] * M[1][1] - M[0][1] * M[1][0];
            ok = ok && det2 > 0.0;
            if (nloc == 3) {
                const double det3 = M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                                    M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                                    M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
                ok = ok && det3 > 0.0;
            }
            if (!ok) {
                char buf[128];
                std::snprintf(buf, sizeof buf, "metric not positive definite at chart %d node %u", c, q);
                throw degenerate_error(buf);
            }
        }

    // compact vertex ids
    std::vector<std::int32_t> gid(2 * nn, -1);
    std::vector<std::uint32_t> verts;
    verts.reserve(2 * active_nodes.size());
    for (int c = 0; c < 2; ++c)
        for (std::uint32_t q : active_nodes) {
            gid[static_cast<std::size_t>(c) * nn + q] = static_cast<std::int32_t>(verts.size());
            verts.push_back(static_cast<std::uint32_t>(c) * static_cast<std::uint32_t>(nn) + q);
        }
    const std::size_t nv = verts.size();

    // move set
    std::vector<std::array<int, 3>> moves;
    if (nloc == 2) {
        for (int a = -3; a <= 3; ++a)
            for (int b = -3; b <= 3; ++b) {
                if (a == 0 && b == 0) continue;
                if (std::gcd(std::abs(a), std::abs(b)) > 1) continue;
                moves.push_back({a, b, 0});
            }
    } else {
        for (int a = -1; a <= 1; ++a)
            for (int b = -1; b <= 1; ++b)
                for (int c = -1; c <= 1; ++c) {
                    if (!a && !b && !c) continue;
                    moves.push_back({a, b, c});
                }
    }

    const auto qform = [&](int c, std::size_t q, const double* d) {
        double v = 0.0;
        for (int i = 0; i < nloc; ++i)
            for (int j = 0; j < nloc; ++j) v += g.ptr(c, sym2_index(nloc, i, j))[q] * d[i] * d[j];
        return v > 0.0 ? v : 0.0;
    };

    // adjacency
    std::vector<std::vector<std::pair<std::int32_t, double>>> adj(nv);
    for (std::size_t vi = 0; vi < nv; ++vi) {
        const int c = static_cast<int>(verts[vi] / nn);
        const std::size_t q = verts[vi] % nn;
        int ij[3];
        node_ij(q, ij);
        for (const auto& mv : moves) {
            int tj[3];
            bool ok = true;
            for (int a = 0; a < nloc; ++a) {
                tj[a] = ij[a] + mv[a];
                if (tj[a] < 0 || tj[a] >= N) ok = false;
            }
            if (!ok) continue;
            const std::size_t q2 = node_index(tj);
            if (!active[q2]) continue;
            double d[3];
            for (int a = 0; a < nloc; ++a) d[a] = mv[a] * h;
            const double len = 0.5 * (std::sqrt(qform(c, q, d)) + std::sqrt(qform(c, q2, d)));
            adj[vi].push_back({gid[static_cast<std::size_t>(c) * nn + q2], len});
        }
        // cross-chart stitches in the overlap band
        double x[3];
        node_coords(q, x);
        double s = 0.0;
        for (int a = 0; a < nloc; ++a) s += x[a] * x[a];
        if (s >= 1.0) {
            const int o = 1 - c;
            double y[3];
            for (int a = 0; a < nloc; ++a) y[a] = x[a] / s;
            int corner[3];
            for (int a = 0; a < nloc; ++a) corner[a] = static_cast<int>(std::floor((y[a] + L) / h));
            const int ncorners = 1 << nloc;
            for (int bmask = 0; bmask < ncorners; ++bmask) {
                int tj[3];
                bool ok = true;
                for (int a = 0; a < nloc; ++a) {
                    tj[a] = corner[a] + ((bmask >> a) & 1);
                    if (tj[a] < 0 || tj[a] >= N) ok = false;
                }
                if (!ok) continue;
                const std::size_t q2 = node_index(tj);
                if (!active[q2]) continue;
                double d[3];
                for (int a = 0; a < nloc; ++a) d[a] = coord(tj[a]) - y[a];
                const double len = std::sqrt(qform(o, q2, d));
                adj[vi].push_back({gid[static_cast<std::size_t>(o) * nn + q2], len});
            }
        }
    }

    // seed directions: coordinate axes plus diagonals
    std::vector<std::array<double, 4>> dirs;
    const int d = nloc + 1;
    for (int a = 0; a < d; ++a)
        for (int sgn : {-1, 1}) {
            std::array<double, 4> v{};
            v[a] = sgn;
            dirs.push_back(v);
        }
    const int ndiag = 1 << d;
    for (int mask = 0; mask < ndiag; ++mask) {
        std::array<double, 4> v{};
        for (int a = 0; a < d; ++a) v[a] = ((mask >> a) & 1) ? 1.0 : -1.0;
        const double nrm = std::sqrt(static_cast<double>(d));
        for (int a = 0; a < d; ++a) v[a] /= nrm;
        dirs.push_back(v);
    }

    double diam = 0.0;
    std::vector<double> dist(nv);
    using Item = std::pair<double, std::int32_t>;
    for (const auto& dir : dirs) {
        const int c = dir[d - 1] >= 0.0 ? 0 : 1;
        const double denom = 1.0 + std::abs(dir[d - 1]);
        int ij[3];
        for (int a = 0; a < nloc; ++a) {
            const double xa = dir[a] / denom;
            ij[a] = static_cast<int>(std::lround((xa + L) / h));
            ij[a] = std::clamp(ij[a], 0, N - 1);
        }
        const std::size_t q = node_index(ij);
        if (!active[q]) continue;
        const std::int32_t src = gid[static_cast<std::size_t>(c) * nn + q];

        std::fill(dist.begin(), dist.end(), 1e300);
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
        dist[static_cast<std::size_t>(src)] = 0.0;
        heap.push({0.0, src});
        while (!heap.empty()) {
            const auto [du, u] = heap.top();
            heap.pop();
            if (du > dist[static_cast<std::size_t>(u)]) continue;
            for (const auto& [v, len] : adj[static_cast<std::size_t>(u)]) {
                const double nd = du + len;
                if (nd < dist[static_cast<std::size_t>(v)]) {
                    dist[static_cast<std::size_t>(v)] = nd;
                    heap.push({nd, v});
                }
            }
        }
        for (double dv : dist)
            if (dv < 1e299 && dv > diam) diam = dv;
    }
    return diam;
}

} // namespace dsg
