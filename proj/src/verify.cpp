#include "dsg/verify.hpp"

#include <cmath>

namespace dsg {

namespace {

struct Norms {
    double inf = 0.0;
    double l2 = 0.0;
};

// inf and quadrature L2 norm of a nonnegative magnitude defined at active nodes
Norms reduce_norms(const Atlas& atlas, const Field& mag, Exec exec) {
    Norms out;
    out.inf = atlas.max_abs(mag, exec);
    const double sq = atlas.integrate_fn(
        [&](int c, std::size_t q) {
            const double v = mag.ptr(c, 0)[q];
            return v * v;
        },
        exec);
    out.l2 = std::sqrt(std::max(0.0, sq));
    return out;
}

ResidualReport make_report(const Atlas& atlas, const std::string& name, const Field& mag, Exec exec) {
    const Norms n = reduce_norms(atlas, mag, exec);
    ResidualReport r;
    r.identity = name;
    r.norm_inf = n.inf;
    r.norm_l2 = n.l2;
    r.resolutions = {atlas.N};
    return r;
}

// plain partial jets of one component of a (synced) multi-component field
void component_jets(const Atlas& atlas, const Field& f, int comp, Field& d1, Field& d2, Exec exec) {
    Field tmp(atlas, FieldKind::Scalar);
    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.nn, [&](std::size_t q) { tmp.ptr(c, 0)[q] = f.ptr(c, comp)[q]; });
    atlas.jets(tmp, d1, d2, nullptr, exec);
}

} // namespace

Field grad_shape(const SurfaceGeometry& sg, Exec exec) {
    // Split A = S sigma + V with S = rho tau sinh(u); S and V are stored
    // fields and re-differenced, the round-metric part is differentiated in
    // closed form.  Round graphs then land on the exact branch while generic
    // graphs see genuinely independent derivative data.
    const Atlas& atlas = *sg.atlas;
    const int n = atlas.n;
    const int nsym = sym2_count(n);
    const double rho = sg.rho;
    Field out(atlas, FieldKind::CoSym2);

    Field S(atlas, FieldKind::Scalar);
    Field V(atlas, FieldKind::Sym2);
    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.active_nodes.size(), [&](std::size_t t) {
            const std::size_t q = atlas.active_nodes[t];
            double x[3];
            atlas.node_coords(q, x);
            const ChartGeom cg = chart_geom(n, x);
            const double sval = rho * sg.tau.ptr(c, 0)[q] * std::sinh(sg.u.ptr(c, 0)[q]);
            S.ptr(c, 0)[q] = sval;
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j)
                    V.ptr(c, sym2_index(n, i, j))[q] =
                        sg.A.ptr(c, sym2_index(n, i, j))[q] -
                        sval * cg.f * (i == j ? 1.0 : 0.0);
        });
    atlas.sync(S, exec);
    atlas.sync(V, exec);

    Field dS(atlas, FieldKind::Covector), d2S(atlas, FieldKind::Sym2);
    atlas.jets(S, dS, d2S, nullptr, exec);
    std::vector<Field> dV(static_cast<std::size_t>(nsym), Field(atlas, FieldKind::Covector));
    {
        Field d2scratch(atlas, FieldKind::Sym2);
        for (int ij = 0; ij < nsym; ++ij)
            component_jets(atlas, V, ij, dV[static_cast<std::size_t>(ij)], d2scratch, exec);
    }

    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.active_nodes.size(), [&](std::size_t t) {
            const std::size_t q = atlas.active_nodes[t];
            double x[3];
            atlas.node_coords(q, x);
            const ChartGeom cg = chart_geom(n, x);
            const double sval = S.ptr(c, 0)[q];
            for (int k = 0; k < n; ++k)
                for (int i = 0; i < n; ++i)
                    for (int j = i; j < n; ++j) {
                        const double dij = (i == j ? 1.0 : 0.0);
                        double v = dS.ptr(c, k)[q] * cg.f * dij + sval * cg.df[k] * dij +
                                   dV[static_cast<std::size_t>(sym2_index(n, i, j))].ptr(c, k)[q];
                        for (int l = 0; l < n; ++l) {
                            v -= sg.Gamma_g.ptr(c, l * nsym + sym2_index(n, k, i))[q] *
                                 sg.A.ptr(c, sym2_index(n, l, j))[q];
                            v -= sg.Gamma_g.ptr(c, l * nsym + sym2_index(n, k, j))[q] *
                                 sg.A.ptr(c, sym2_index(n, i, l))[q];
                        }
                        out.ptr(c, k * nsym + sym2_index(n, i, j))[q] = v;
                    }
        });
    atlas.sync(out, exec);
    return out;
}

std::vector<ResidualReport> verify_first_order(const SurfaceGeometry& sg, Exec exec) {
    const Atlas& atlas = *sg.atlas;
    const int n = atlas.n;
    const double rho = sg.rho;

    Field deta(atlas, FieldKind::Covector), d2eta(atlas, FieldKind::Sym2);
    atlas.jets(sg.eta, deta, d2eta, nullptr, exec);
    Field dtau(atlas, FieldKind::Covector), d2tau(atlas, FieldKind::Sym2);
    atlas.jets(sg.tau, dtau, d2tau, nullptr, exec);

    Field m_eta(atlas, FieldKind::Scalar), m_tau(atlas, FieldKind::Scalar),
        m_tilt(atlas, FieldKind::Scalar), m_e0(atlas, FieldKind::Scalar);

    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.active_nodes.size(), [&](std::size_t t) {
            const std::size_t q = atlas.active_nodes[t];
            double x[3];
            atlas.node_coords(q, x);
            double xi[4], dxi[4][3];
            chart_point(n, c, x, xi);
            chart_point_d1(n, c, x, dxi);

            const double uu = sg.u.ptr(c, 0)[q];
            const double sh = std::sinh(uu), ch = std::cosh(uu);
            const NodeMat gi = node_sym2(sg.gi, n, c, q);
            const NodeMat A = node_sym2(sg.A, n, c, q);
            const double tau = sg.tau.ptr(c, 0)[q];
            const double eta = sg.eta.ptr(c, 0)[q];

            // (a) D_i eta = -<E0, X_i>; X_i = rho (u_i E_r + cosh u xi_i)
            double ra2 = 0.0;
            double r_a[3];
            for (int i = 0; i < n; ++i)
                r_a[i] = deta.ptr(c, i)[q] - rho * ch * sg.du.ptr(c, i)[q];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) ra2 += gi.m[i][j] * r_a[i] * r_a[j];
            m_eta.ptr(c, 0)[q] = std::sqrt(std::max(0.0, ra2));

            // (b) D_i tau = A_i^j D_j eta
            double r_b[3];
            for (int i = 0; i < n; ++i) {
                double v = dtau.ptr(c, i)[q];
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k) v -= A.m[i][k] * gi.m[k][j] * deta.ptr(c, j)[q];
                r_b[i] = v;
            }
            double rb2 = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) rb2 += gi.m[i][j] * r_b[i] * r_b[j];
            m_tau.ptr(c, 0)[q] = std::sqrt(std::max(0.0, rb2));

            // (c) tau^2 = 1 + eta^2 / rho^2 + |grad eta|^2
            double ge2 = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) ge2 += gi.m[i][j] * deta.ptr(c, i)[q] * deta.ptr(c, j)[q];
            m_tilt.ptr(c, 0)[q] = std::abs(tau * tau - 1.0 - eta * eta / (rho * rho) - ge2);

            // (d) E0 = -grad eta - tau nu - rho^-2 eta X.  The tangential
            // projection of E0 is -grad eta with these sign conventions
            // (inner products with X_i give -D_i eta).
            MinkVec r(n + 2);
            r[0] = 1.0; // E0
            for (int i = 0; i < n; ++i) {
                double gei = 0.0;
                for (int j = 0; j < n; ++j) gei += gi.m[i][j] * deta.ptr(c, j)[q];
                // X_i components
                r[0] += gei * rho * sg.du.ptr(c, i)[q] * ch;
                for (int a = 0; a <= n; ++a)
                    r[1 + a] += gei * rho * (sg.du.ptr(c, i)[q] * sh * xi[a] + ch * dxi[a][i]);
            }
            for (int al = 0; al < n + 2; ++al) {
                r[al] += tau * sg.nu.ptr(c, al)[q];
                r[al] += eta / (rho * rho) * sg.X.ptr(c, al)[q];
            }
            m_e0.ptr(c, 0)[q] = euclid_norm(r);
        });

    std::vector<ResidualReport> out;
    out.push_back(make_report(atlas, "grad_eta", m_eta, exec));
    out.push_back(make_report(atlas, "grad_tau", m_tau, exec));
    out.push_back(make_report(atlas, "tilt_identity", m_tilt, exec));
    out.push_back(make_report(atlas, "e0_decomposition", m_e0, exec));
    return out;
}

std::vector<ResidualReport> verify_second_order(const SurfaceGeometry& sg, Exec exec) {
    const Atlas& atlas = *sg.atlas;
    const int n = atlas.n;
    const int nsym = sym2_count(n);
    const double rho = sg.rho;

    Field deta(atlas, FieldKind::Covector), d2eta(atlas, FieldKind::Sym2);
    atlas.jets(sg.eta, deta, d2eta, nullptr, exec);
    Field dtau(atlas, FieldKind::Covector), d2tau(atlas, FieldKind::Sym2);
    atlas.jets(sg.tau, dtau, d2tau, nullptr, exec);
    const Field gradA = grad_shape(sg, exec);

    Field m_h(atlas, FieldKind::Scalar), m_t(atlas, FieldKind::Scalar);

    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.active_nodes.size(), [&](std::size_t t) {
            const std::size_t q = atlas.active_nodes[t];
            const NodeMat g = node_sym2(sg.g, n, c, q);
            const NodeMat gi = node_sym2(sg.gi, n, c, q);
            const NodeMat A = node_sym2(sg.A, n, c, q);
            const double tau = sg.tau.ptr(c, 0)[q];
            const double eta = sg.eta.ptr(c, 0)[q];

            const auto hess = [&](const Field& d1, const Field& d2, int i, int j) {
                double v = d2.ptr(c, sym2_index(n, i, j))[q];
                for (int k = 0; k < n; ++k)
                    v -= sg.Gamma_g.ptr(c, k * nsym + sym2_index(n, i, j))[q] * d1.ptr(c, k)[q];
                return v;
            };

            double rh2 = 0.0, rt2 = 0.0;
            double Rh[3][3], Rt[3][3];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    Rh[i][j] = hess(deta, d2eta, i, j) - A.m[i][j] * tau + g.m[i][j] * eta / (rho * rho);
                    double A2ij = 0.0;
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l) A2ij += A.m[i][k] * gi.m[k][l] * A.m[l][j];
                    double adv = 0.0;
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l)
                            adv += gi.m[k][l] * deta.ptr(c, l)[q] *
                                   gradA.ptr(c, k * nsym + sym2_index(n, i, j))[q];
                    Rt[i][j] = hess(dtau, d2tau, i, j) - adv - tau * A2ij +
                               A.m[i][j] * eta / (rho * rho);
                }
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l) {
                            rh2 += gi.m[i][k] * gi.m[j][l] * Rh[i][j] * Rh[k][l];
                            rt2 += gi.m[i][k] * gi.m[j][l] * Rt[i][j] * Rt[k][l];
                        }
            m_h.ptr(c, 0)[q] = std::sqrt(std::max(0.0, rh2));
            m_t.ptr(c, 0)[q] = std::sqrt(std::max(0.0, rt2));
        });

    std::vector<ResidualReport> out;
    out.push_back(make_report(atlas, "height_hessian", m_h, exec));
    out.push_back(make_report(atlas, "tilt_hessian", m_t, exec));
    return out;
}

std::vector<ResidualReport> verify_gauss_codazzi(const SurfaceGeometry& sg, Exec exec) {
    const Atlas& atlas = *sg.atlas;
    const int n = atlas.n;
    const int nsym = sym2_count(n);
    const double rho = sg.rho;
    const Field gradA = grad_shape(sg, exec);

    Field m_cod(atlas, FieldKind::Scalar), m_gauss(atlas, FieldKind::Scalar);

    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.active_nodes.size(), [&](std::size_t t) {
            const std::size_t q = atlas.active_nodes[t];
            const NodeMat gi = node_sym2(sg.gi, n, c, q);
            double r2 = 0.0;
            double C[3][3][3];
            for (int k = 0; k < n; ++k)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        C[k][i][j] = gradA.ptr(c, k * nsym + sym2_index(n, i, j))[q] -
                                     gradA.ptr(c, i * nsym + sym2_index(n, k, j))[q];
            for (int k = 0; k < n; ++k)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        for (int k2 = 0; k2 < n; ++k2)
                            for (int i2 = 0; i2 < n; ++i2)
                                for (int j2 = 0; j2 < n; ++j2)
                                    r2 += gi.m[k][k2] * gi.m[i][i2] * gi.m[j][j2] * C[k][i][j] *
                                          C[k2][i2][j2];
            m_cod.ptr(c, 0)[q] = std::sqrt(std::max(0.0, r2));
        });

    visit_intrinsic_riemann(
        sg,
        [&](int c, std::size_t q, const double Rlow[3][3][3][3], const double[3][3][3]) {
            const NodeMat g = node_sym2(sg.g, n, c, q);
            const NodeMat gi = node_sym2(sg.gi, n, c, q);
            const NodeMat A = node_sym2(sg.A, n, c, q);
            double D[3][3][3][3];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l)
                            D[i][j][k][l] = Rlow[i][j][k][l] -
                                            (A.m[i][l] * A.m[j][k] - A.m[i][k] * A.m[j][l] +
                                             (g.m[i][k] * g.m[j][l] - g.m[i][l] * g.m[j][k]) /
                                                 (rho * rho));
            double r2 = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l)
                            for (int i2 = 0; i2 < n; ++i2)
                                for (int j2 = 0; j2 < n; ++j2)
                                    for (int k2 = 0; k2 < n; ++k2)
                                        for (int l2 = 0; l2 < n; ++l2)
                                            r2 += gi.m[i][i2] * gi.m[j][j2] * gi.m[k][k2] *
                                                  gi.m[l][l2] * D[i][j][k][l] * D[i2][j2][k2][l2];
            m_gauss.ptr(c, 0)[q] = std::sqrt(std::max(0.0, r2));
        },
        exec);

    std::vector<ResidualReport> out;
    out.push_back(make_report(atlas, "codazzi", m_cod, exec));
    out.push_back(make_report(atlas, "gauss", m_gauss, exec));
    return out;
}

ResidualReport verify_simons(const SurfaceGeometry& sg, Exec exec) {
    const Atlas& atlas = *sg.atlas;
    const int n = atlas.n;
    const int nsym = sym2_count(n);
    const double rho = sg.rho;
    const Field gradA = grad_shape(sg, exec);

    // second-stage finite differences of nabla A
    std::vector<Field> dGA(static_cast<std::size_t>(n * nsym), Field(atlas, FieldKind::Covector));
    {
        Field d2scratch(atlas, FieldKind::Sym2);
        for (int comp = 0; comp < n * nsym; ++comp)
            component_jets(atlas, gradA, comp, dGA[static_cast<std::size_t>(comp)], d2scratch, exec);
    }
    Field dH(atlas, FieldKind::Covector), d2H(atlas, FieldKind::Sym2);
    atlas.jets(sg.H, dH, d2H, nullptr, exec);

    Field mag(atlas, FieldKind::Scalar);
    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.active_nodes.size(), [&](std::size_t t) {
            const std::size_t q = atlas.active_nodes[t];
            const NodeMat g = node_sym2(sg.g, n, c, q);
            const NodeMat gi = node_sym2(sg.gi, n, c, q);
            const NodeMat A = node_sym2(sg.A, n, c, q);
            const double H = sg.H.ptr(c, 0)[q];
            const double A2 = sg.normA2.ptr(c, 0)[q];
            const auto Gam = [&](int k, int i, int j) {
                return sg.Gamma_g.ptr(c, k * nsym + sym2_index(n, i, j))[q];
            };
            const auto GA = [&](int k, int i, int j) {
                return gradA.ptr(c, k * nsym + sym2_index(n, i, j))[q];
            };

            // Lap A_ij = g^{mk} ( d_m (grad A)_kij - Gamma-corrections )
            double lap[3][3] = {};
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double s = 0.0;
                    for (int m = 0; m < n; ++m)
                        for (int k = 0; k < n; ++k) {
                            double v = dGA[static_cast<std::size_t>(k * nsym + sym2_index(n, i, j))]
                                           .ptr(c, m)[q];
                            for (int l = 0; l < n; ++l) {
                                v -= Gam(l, m, k) * GA(l, i, j);
                                v -= Gam(l, m, i) * GA(k, l, j);
                                v -= Gam(l, m, j) * GA(k, i, l);
                            }
                            s += gi.m[m][k] * v;
                        }
                    lap[i][j] = s;
                }

            double r2 = 0.0;
            double Rr[3][3];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double hessH = d2H.ptr(c, sym2_index(n, i, j))[q];
                    for (int k = 0; k < n; ++k) hessH -= Gam(k, i, j) * dH.ptr(c, k)[q];
                    double A2ij = 0.0;
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l) A2ij += A.m[i][k] * gi.m[k][l] * A.m[l][j];
                    Rr[i][j] = lap[i][j] - hessH - A2 * A.m[i][j] + H * A2ij -
                               (n * A.m[i][j] - H * g.m[i][j]) / (rho * rho);
                }
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l)
                            r2 += gi.m[i][k] * gi.m[j][l] * Rr[i][j] * Rr[k][l];
            mag.ptr(c, 0)[q] = std::sqrt(std::max(0.0, r2));
        });

    ResidualReport rep = make_report(atlas, "simons", mag, exec);
    if (atlas.N < 48)
        rep.warning = "resolution below 48: fourth-order derivative content marginally resolved";
    return rep;
}

std::vector<ResidualReport> verify_identities(const SurfaceGeometry& sg, IdentitySet which,
                                              Exec exec) {
    std::vector<ResidualReport> out;
    if (has(which, IdentitySet::First))
        for (auto& r : verify_first_order(sg, exec)) out.push_back(std::move(r));
    if (has(which, IdentitySet::Second))
        for (auto& r : verify_second_order(sg, exec)) out.push_back(std::move(r));
    if (has(which, IdentitySet::GaussCodazzi))
        for (auto& r : verify_gauss_codazzi(sg, exec)) out.push_back(std::move(r));
    if (has(which, IdentitySet::Simons)) out.push_back(verify_simons(sg, exec));
    return out;
}

std::vector<ResidualReport> verify_suite(const GraphBuilder& build, double rho, int n,
                                         const std::vector<int>& resolutions, int fd_order,
                                         IdentitySet which, Exec exec) {
    std::vector<std::vector<ResidualReport>> rounds;
    std::vector<double> hs;
    for (int N : resolutions) {
        Atlas atlas(n, N, fd_order);
        GraphFunction gf(atlas, rho);
        build(atlas, gf.u);
        const SurfaceGeometry sg = assemble_surface(gf, exec);
        rounds.push_back(verify_identities(sg, which, exec));
        hs.push_back(atlas.h);
    }

    std::vector<ResidualReport> merged = rounds.back();
    for (auto& rep : merged) rep.resolutions.assign(resolutions.begin(), resolutions.end());
    if (resolutions.size() >= 3) {
        // least squares of log L2 norm against log h
        for (std::size_t k = 0; k < merged.size(); ++k) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            const double m = static_cast<double>(resolutions.size());
            for (std::size_t r = 0; r < rounds.size(); ++r) {
                const double lx = std::log(hs[r]);
                const double ly = std::log(std::max(rounds[r][k].norm_l2, 1e-300));
                sx += lx;
                sy += ly;
                sxx += lx * lx;
                sxy += lx * ly;
            }
            merged[k].slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        }
    }
    return merged;
}

} // namespace dsg
