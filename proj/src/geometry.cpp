#include "dsg/geometry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>

namespace dsg {

NodeMat node_sym2(const Field& f, int n, int chart, std::size_t q) {
    NodeMat m{};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.m[i][j] = f.ptr(chart, sym2_index(n, i, j))[q];
    return m;
}

void put_sym2(Field& f, int n, int chart, std::size_t q, const NodeMat& m) {
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) f.ptr(chart, sym2_index(n, i, j))[q] = m.m[i][j];
}

NodeMat invert_spd(int n, const NodeMat& m) {
    NodeMat out{};
    if (n == 2) {
        const double det = m.m[0][0] * m.m[1][1] - m.m[0][1] * m.m[1][0];
        out.m[0][0] = m.m[1][1] / det;
        out.m[1][1] = m.m[0][0] / det;
        out.m[0][1] = out.m[1][0] = -m.m[0][1] / det;
    } else {
        Eigen::Matrix3d M;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) M(i, j) = m.m[i][j];
        const Eigen::Matrix3d I = M.inverse();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) out.m[i][j] = I(i, j);
    }
    return out;
}

namespace {

struct WorstNode {
    int chart;
    std::size_t node;
    double value;
};

[[noreturn]] void throw_not_spacelike(const Atlas& atlas, const Field& u, const Field& du) {
    WorstNode w{0, 0, 1e300};
    for (int c = 0; c < 2; ++c)
        for (auto q : atlas.active_nodes) {
            double x[3];
            atlas.node_coords(q, x);
            const ChartGeom cg = chart_geom(atlas.n, x);
            const double ch = std::cosh(u.ptr(c, 0)[q]);
            double du2 = 0.0;
            for (int i = 0; i < atlas.n; ++i) du2 += du.ptr(c, i)[q] * du.ptr(c, i)[q];
            const double margin = ch * ch - du2 / cg.f;
            if (margin < w.value) w = {c, q, margin};
        }
    char buf[160];
    std::snprintf(buf, sizeof buf, "surface not spacelike: margin %.6e at chart %d node %zu", w.value,
                  w.chart, w.node);
    throw degenerate_error(buf);
}

} // namespace

Field embed(const GraphFunction& gf, Exec exec) {
    const Atlas& atlas = *gf.atlas;
    Field u = gf.u;
    atlas.sync(u, exec);
    Field X(atlas, FieldKind::Ambient);
    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.nn, [&](std::size_t q) {
            double xi[4];
            atlas.node_point(c, q, xi);
            const double uu = u.ptr(c, 0)[q];
            X.ptr(c, 0)[q] = gf.rho * std::sinh(uu);
            const double rc = gf.rho * std::cosh(uu);
            for (int a = 0; a <= atlas.n; ++a) X.ptr(c, 1 + a)[q] = rc * xi[a];
        });
    return X;
}

double spacelike_margin(const GraphFunction& gf, Exec exec) {
    const Atlas& atlas = *gf.atlas;
    Field u = gf.u;
    atlas.sync(u, exec);
    Field du(atlas, FieldKind::Covector), d2(atlas, FieldKind::Sym2);
    atlas.differentiate(u, du, d2, exec);
    double margin = 1e300;
    for (int c = 0; c < 2; ++c) {
        const double m = chunked_min(exec, atlas.active_nodes.size(), [&](std::size_t t) {
            const std::size_t q = atlas.active_nodes[t];
            double x[3];
            atlas.node_coords(q, x);
            const ChartGeom cg = chart_geom(atlas.n, x);
            const double ch = std::cosh(u.ptr(c, 0)[q]);
            double du2 = 0.0;
            for (int i = 0; i < atlas.n; ++i) du2 += du.ptr(c, i)[q] * du.ptr(c, i)[q];
            return ch * ch - du2 / cg.f;
        });
        margin = std::min(margin, m);
    }
    return margin;
}

SurfaceGeometry assemble_surface(const GraphFunction& gf, Exec exec) {
    const Atlas& atlas = *gf.atlas;
    const int n = atlas.n;
    const int nsym = sym2_count(n);
    const double rho = gf.rho;

    SurfaceGeometry sg;
    sg.atlas = &atlas;
    sg.rho = rho;
    sg.u = gf.u;
    atlas.sync(sg.u, exec);

    sg.du = Field(atlas, FieldKind::Covector);
    sg.d2u_plain = Field(atlas, FieldKind::Sym2);
    sg.d2u_cov = Field(atlas, FieldKind::Sym2);
    atlas.jets(sg.u, sg.du, sg.d2u_plain, nullptr, exec);
    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.active_nodes.size(), [&](std::size_t t) {
            const std::size_t q = atlas.active_nodes[t];
            double x[3];
            atlas.node_coords(q, x);
            const ChartGeom cg = chart_geom(n, x);
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    double corr = 0.0;
                    for (int k = 0; k < n; ++k)
                        corr += christoffel_sigma(cg, k, i, j) * sg.du.ptr(c, k)[q];
                    sg.d2u_cov.ptr(c, sym2_index(n, i, j))[q] =
                        sg.d2u_plain.ptr(c, sym2_index(n, i, j))[q] - corr;
                }
        });

    sg.X = Field(atlas, FieldKind::Ambient);
    sg.nu = Field(atlas, FieldKind::Ambient);
    sg.tau = Field(atlas, FieldKind::Scalar);
    sg.eta = Field(atlas, FieldKind::Scalar);
    sg.g = Field(atlas, FieldKind::Sym2);
    sg.gi = Field(atlas, FieldKind::Sym2);
    sg.A = Field(atlas, FieldKind::Sym2);
    sg.lambda = Field(atlas, FieldKind::Tuple, n);
    sg.H = Field(atlas, FieldKind::Scalar);
    sg.normA2 = Field(atlas, FieldKind::Scalar);
    sg.R = Field(atlas, FieldKind::Scalar);
    sg.Ricci = Field(atlas, FieldKind::Sym2);
    sg.Gamma_g = Field(atlas, FieldKind::Tuple, n * nsym);
    sg.dg = Field(atlas, FieldKind::Tuple, n * nsym);

    // position and height are pointwise in u, fill every node exactly
    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.nn, [&](std::size_t q) {
            double xi[4];
            atlas.node_point(c, q, xi);
            const double uu = sg.u.ptr(c, 0)[q];
            sg.X.ptr(c, 0)[q] = rho * std::sinh(uu);
            const double rc = rho * std::cosh(uu);
            for (int a = 0; a <= n; ++a) sg.X.ptr(c, 1 + a)[q] = rc * xi[a];
            sg.eta.ptr(c, 0)[q] = rho * std::sinh(uu);
        });

    // first pass: spacelike margin
    double margin = 1e300;
    for (int c = 0; c < 2; ++c) {
        const double m = chunked_min(exec, atlas.active_nodes.size(), [&](std::size_t t) {
            const std::size_t q = atlas.active_nodes[t];
            double x[3];
            atlas.node_coords(q, x);
            const ChartGeom cg = chart_geom(n, x);
            const double ch = std::cosh(sg.u.ptr(c, 0)[q]);
            double du2 = 0.0;
            for (int i = 0; i < n; ++i) du2 += sg.du.ptr(c, i)[q] * sg.du.ptr(c, i)[q];
            return ch * ch - du2 / cg.f;
        });
        margin = std::min(margin, m);
    }
    sg.spacelike_min = margin;
    if (!(margin > 0.0)) throw_not_spacelike(atlas, sg.u, sg.du);

    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.active_nodes.size(), [&](std::size_t t) {
            const std::size_t q = atlas.active_nodes[t];
            double x[3];
            atlas.node_coords(q, x);
            const ChartGeom cg = chart_geom(n, x);
            double xi[4];
            chart_point(n, c, x, xi);
            double dxi[4][3];
            chart_point_d1(n, c, x, dxi);

            const double uu = sg.u.ptr(c, 0)[q];
            const double sh = std::sinh(uu), ch = std::cosh(uu), th = sh / ch;
            double dui[3], du2 = 0.0;
            for (int i = 0; i < n; ++i) {
                dui[i] = sg.du.ptr(c, i)[q];
                du2 += dui[i] * dui[i];
            }
            du2 /= cg.f;
            const double w2 = ch * ch - du2;
            const double w = std::sqrt(w2);
            const double tau = ch * ch / w;
            sg.tau.ptr(c, 0)[q] = tau;

            // ambient gradient of u along the sphere
            double damb[4] = {0, 0, 0, 0};
            for (int a = 0; a <= n; ++a)
                for (int i = 0; i < n; ++i) damb[a] += dui[i] / cg.f * dxi[a][i];
            sg.nu.ptr(c, 0)[q] = -ch * ch / w;
            for (int a = 0; a <= n; ++a) sg.nu.ptr(c, 1 + a)[q] = -(ch * sh * xi[a] + damb[a]) / w;

            NodeMat gm{}, Am{};
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    gm.m[i][j] = rho * rho * (ch * ch * cg.f * (i == j ? 1.0 : 0.0) - dui[i] * dui[j]);
                    const double d2c = sg.d2u_cov.ptr(c, sym2_index(n, i, j))[q];
                    Am.m[i][j] = rho * tau / ch *
                                 (d2c - 2.0 * th * dui[i] * dui[j] + sh * ch * cg.f * (i == j ? 1.0 : 0.0));
                }
            const NodeMat gim = invert_spd(n, gm);
            put_sym2(sg.g, n, c, q, gm);
            put_sym2(sg.gi, n, c, q, gim);
            put_sym2(sg.A, n, c, q, Am);

            // shape operator traces
            double M[3][3] = {};
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double v = 0.0;
                    for (int k = 0; k < n; ++k) v += gim.m[i][k] * Am.m[k][j];
                    M[i][j] = v;
                }
            double Hval = 0.0, A2 = 0.0;
            for (int i = 0; i < n; ++i) {
                Hval += M[i][i];
                for (int j = 0; j < n; ++j) A2 += M[i][j] * M[j][i];
            }
            sg.H.ptr(c, 0)[q] = Hval;
            sg.normA2.ptr(c, 0)[q] = A2;
            sg.R.ptr(c, 0)[q] = A2 - Hval * Hval + n * (n - 1.0) / (rho * rho);

            // Ricci = A g^{-1} A - H A + (n-1)/rho^2 g
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    double v = 0.0;
                    for (int k = 0; k < n; ++k) v += Am.m[i][k] * M[k][j];
                    sg.Ricci.ptr(c, sym2_index(n, i, j))[q] =
                        v - Hval * Am.m[i][j] + (n - 1.0) / (rho * rho) * gm.m[i][j];
                }

            // eigenvalues of A relative to g
            if (n == 2) {
                Eigen::Matrix2d Ae, ge;
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) {
                        Ae(i, j) = Am.m[i][j];
                        ge(i, j) = gm.m[i][j];
                    }
                Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> es(Ae, ge,
                                                                             Eigen::EigenvaluesOnly);
                for (int i = 0; i < 2; ++i) sg.lambda.ptr(c, i)[q] = es.eigenvalues()(i);
            } else {
                Eigen::Matrix3d Ae, ge;
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        Ae(i, j) = Am.m[i][j];
                        ge(i, j) = gm.m[i][j];
                    }
                Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix3d> es(Ae, ge,
                                                                             Eigen::EigenvaluesOnly);
                for (int i = 0; i < 3; ++i) sg.lambda.ptr(c, i)[q] = es.eigenvalues()(i);
            }

            // plain metric derivatives and Christoffels of g
            for (int k = 0; k < n; ++k)
                for (int i = 0; i < n; ++i)
                    for (int j = i; j < n; ++j) {
                        const double uik = sg.d2u_plain.ptr(c, sym2_index(n, i, k))[q];
                        const double ujk = sg.d2u_plain.ptr(c, sym2_index(n, j, k))[q];
                        double v = 2.0 * ch * sh * dui[k] * cg.f * (i == j ? 1.0 : 0.0) +
                                   ch * ch * cg.df[k] * (i == j ? 1.0 : 0.0) - uik * dui[j] - dui[i] * ujk;
                        sg.dg.ptr(c, k * nsym + sym2_index(n, i, j))[q] = rho * rho * v;
                    }
            for (int k = 0; k < n; ++k)
                for (int i = 0; i < n; ++i)
                    for (int j = i; j < n; ++j) {
                        double v = 0.0;
                        for (int l = 0; l < n; ++l) {
                            const double dgi = sg.dg.ptr(c, i * nsym + sym2_index(n, l, j))[q];
                            const double dgj = sg.dg.ptr(c, j * nsym + sym2_index(n, i, l))[q];
                            const double dgl = sg.dg.ptr(c, l * nsym + sym2_index(n, i, j))[q];
                            v += gim.m[k][l] * (dgi + dgj - dgl);
                        }
                        sg.Gamma_g.ptr(c, k * nsym + sym2_index(n, i, j))[q] = 0.5 * v;
                    }
        });

    // admissibility margins
    sg.min_P1 = 1e300;
    sg.min_P2 = 1e300;
    for (int c = 0; c < 2; ++c) {
        sg.min_P1 = std::min(sg.min_P1, chunked_min(exec, atlas.active_nodes.size(), [&](std::size_t t) {
                                 return sg.H.ptr(c, 0)[atlas.active_nodes[t]];
                             }));
        sg.min_P2 = std::min(sg.min_P2, chunked_min(exec, atlas.active_nodes.size(), [&](std::size_t t) {
                                 const std::size_t q = atlas.active_nodes[t];
                                 const double Hv = sg.H.ptr(c, 0)[q];
                                 return 0.5 * (Hv * Hv - sg.normA2.ptr(c, 0)[q]);
                             }));
    }

    // ghost values for everything downstream code differentiates
    atlas.sync(sg.tau, exec);
    atlas.sync(sg.g, exec);
    atlas.sync(sg.A, exec);
    atlas.sync(sg.H, exec);
    atlas.sync(sg.normA2, exec);
    atlas.sync(sg.R, exec);
    atlas.sync(sg.Ricci, exec);
    atlas.sync(sg.nu, exec);
    atlas.sync(sg.lambda, exec);
    return sg;
}

Field induced_metric(const GraphFunction& gf, Exec exec) {
    SurfaceGeometry sg = assemble_surface(gf, exec);
    return sg.g;
}

NormalTiltHeight normal_tilt_height(const GraphFunction& gf, Exec exec) {
    SurfaceGeometry sg = assemble_surface(gf, exec);
    return NormalTiltHeight{std::move(sg.nu), std::move(sg.tau), std::move(sg.eta)};
}

Field second_fundamental_form(const GraphFunction& gf, Exec exec) {
    SurfaceGeometry sg = assemble_surface(gf, exec);
    return sg.A;
}

Field principal_curvatures(const Atlas& atlas, const Field& g, const Field& A, Exec exec) {
    const int n = atlas.n;
    Field lambda(atlas, FieldKind::Tuple, n);
    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.active_nodes.size(), [&](std::size_t t) {
            const std::size_t q = atlas.active_nodes[t];
            const NodeMat gm = node_sym2(g, n, c, q);
            const NodeMat Am = node_sym2(A, n, c, q);
            if (n == 2) {
                Eigen::Matrix2d Ae, ge;
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) {
                        Ae(i, j) = Am.m[i][j];
                        ge(i, j) = gm.m[i][j];
                    }
                if (!(ge.determinant() > 0.0) || !(ge(0, 0) > 0.0))
                    throw degenerate_error("metric not positive definite in principal_curvatures");
                Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> es(Ae, ge,
                                                                             Eigen::EigenvaluesOnly);
                for (int i = 0; i < 2; ++i) lambda.ptr(c, i)[q] = es.eigenvalues()(i);
            } else {
                Eigen::Matrix3d Ae, ge;
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        Ae(i, j) = Am.m[i][j];
                        ge(i, j) = gm.m[i][j];
                    }
                if (!(ge.determinant() > 0.0) || !(ge(0, 0) > 0.0))
                    throw degenerate_error("metric not positive definite in principal_curvatures");
                Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix3d> es(Ae, ge,
                                                                             Eigen::EigenvaluesOnly);
                for (int i = 0; i < 3; ++i) lambda.ptr(c, i)[q] = es.eigenvalues()(i);
            }
        });
    atlas.sync(lambda, exec);
    return lambda;
}

double riemann_component(const Atlas& atlas, const Field& g, const Field& A, double rho, int chart,
                         std::size_t node, int i, int j, int k, int l) {
    const int n = atlas.n;
    const auto gv = [&](int a, int b) { return g.ptr(chart, sym2_index(n, a, b))[node]; };
    const auto Av = [&](int a, int b) { return A.ptr(chart, sym2_index(n, a, b))[node]; };
    return Av(i, l) * Av(j, k) - Av(i, k) * Av(j, l) +
           (gv(i, k) * gv(j, l) - gv(i, l) * gv(j, k)) / (rho * rho);
}

CurvatureTensors curvature_tensors(const Atlas& atlas, const Field& g, const Field& A, double rho,
                                   Exec exec) {
    const int n = atlas.n;
    CurvatureTensors out{Field(atlas, FieldKind::Sym2), Field(atlas, FieldKind::Scalar)};
    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.active_nodes.size(), [&](std::size_t t) {
            const std::size_t q = atlas.active_nodes[t];
            const NodeMat gm = node_sym2(g, n, c, q);
            const NodeMat Am = node_sym2(A, n, c, q);
            const NodeMat gim = invert_spd(n, gm);
            double M[3][3] = {};
            double Hval = 0.0, A2 = 0.0;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    double v = 0.0;
                    for (int kk = 0; kk < n; ++kk) v += gim.m[a][kk] * Am.m[kk][b];
                    M[a][b] = v;
                }
            for (int a = 0; a < n; ++a) {
                Hval += M[a][a];
                for (int b = 0; b < n; ++b) A2 += M[a][b] * M[b][a];
            }
            for (int a = 0; a < n; ++a)
                for (int b = a; b < n; ++b) {
                    double v = 0.0;
                    for (int kk = 0; kk < n; ++kk) v += Am.m[a][kk] * M[kk][b];
                    out.Ricci.ptr(c, sym2_index(n, a, b))[q] =
                        v - Hval * Am.m[a][b] + (n - 1.0) / (rho * rho) * gm.m[a][b];
                }
            out.R.ptr(c, 0)[q] = A2 - Hval * Hval + n * (n - 1.0) / (rho * rho);
        });
    atlas.sync(out.Ricci, exec);
    atlas.sync(out.R, exec);
    return out;
}

void visit_intrinsic_riemann(const SurfaceGeometry& sg, const RiemannVisitor& fn, Exec exec) {
    // Independent route: g_ij = rho^2 (C2 f d_ij - W_ij) with C2 = cosh^2 u
    // and W = du x du taken as stored fields and re-differentiated, so this
    // does not reuse the jets that built the Gauss-equation curvature.
    const Atlas& atlas = *sg.atlas;
    const int n = atlas.n;
    const double rho = sg.rho;

    Field C2(atlas, FieldKind::Scalar);
    Field W(atlas, FieldKind::Sym2);
    for (int c = 0; c < 2; ++c) {
        for_each_index(exec, atlas.nn, [&](std::size_t q) {
            const double ch = std::cosh(sg.u.ptr(c, 0)[q]);
            C2.ptr(c, 0)[q] = ch * ch;
        });
        for_each_index(exec, atlas.active_nodes.size(), [&](std::size_t t) {
            const std::size_t q = atlas.active_nodes[t];
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j)
                    W.ptr(c, sym2_index(n, i, j))[q] = sg.du.ptr(c, i)[q] * sg.du.ptr(c, j)[q];
        });
    }
    atlas.sync(W, exec);

    Field dC2(atlas, FieldKind::Covector), d2C2(atlas, FieldKind::Sym2);
    atlas.jets(C2, dC2, d2C2, nullptr, exec);
    const int nsym = sym2_count(n);
    std::vector<Field> dW(static_cast<std::size_t>(nsym), Field(atlas, FieldKind::Covector));
    std::vector<Field> d2W(static_cast<std::size_t>(nsym), Field(atlas, FieldKind::Sym2));
    {
        Field comp(atlas, FieldKind::Scalar);
        for (int ij = 0; ij < nsym; ++ij) {
            for (int c = 0; c < 2; ++c)
                for_each_index(exec, atlas.nn,
                               [&](std::size_t q) { comp.ptr(c, 0)[q] = W.ptr(c, ij)[q]; });
            atlas.jets(comp, dW[static_cast<std::size_t>(ij)], d2W[static_cast<std::size_t>(ij)],
                       nullptr, exec);
        }
    }

    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.active_nodes.size(), [&](std::size_t t) {
            const std::size_t q = atlas.active_nodes[t];
            double x[3];
            atlas.node_coords(q, x);
            const ChartGeom cg = chart_geom(n, x);
            const double c2 = C2.ptr(c, 0)[q];

            double dgv[3][3][3], ddg[3][3][3][3];
            for (int k = 0; k < n; ++k)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        const double dij = (i == j ? 1.0 : 0.0);
                        dgv[k][i][j] = rho * rho *
                                       (dC2.ptr(c, k)[q] * cg.f * dij + c2 * cg.df[k] * dij -
                                        dW[static_cast<std::size_t>(sym2_index(n, i, j))].ptr(c, k)[q]);
                    }
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j) {
                            const double dij = (i == j ? 1.0 : 0.0);
                            const double w2 =
                                d2W[static_cast<std::size_t>(sym2_index(n, i, j))].ptr(
                                    c, sym2_index(n, k, l))[q];
                            ddg[k][l][i][j] =
                                rho * rho *
                                (d2C2.ptr(c, sym2_index(n, k, l))[q] * cg.f * dij +
                                 dC2.ptr(c, k)[q] * cg.df[l] * dij + dC2.ptr(c, l)[q] * cg.df[k] * dij +
                                 c2 * cg.ddf[k][l] * dij - w2);
                        }

            const NodeMat gm = node_sym2(sg.g, n, c, q);
            const NodeMat gim = invert_spd(n, gm);
            double Gam[3][3][3];
            for (int k = 0; k < n; ++k)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        double v = 0.0;
                        for (int l = 0; l < n; ++l)
                            v += gim.m[k][l] * (dgv[i][l][j] + dgv[j][i][l] - dgv[l][i][j]);
                        Gam[k][i][j] = 0.5 * v;
                    }

            // lowered curvature tensor with the sign convention that makes a
            // round sphere satisfy R_ijkl = rho^-2 (g_ik g_jl - g_il g_jk)
            double Rlow[3][3][3][3];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l) {
                            double v = 0.5 * (ddg[j][k][i][l] + ddg[i][l][j][k] - ddg[i][k][j][l] -
                                              ddg[j][l][i][k]);
                            for (int p = 0; p < n; ++p)
                                for (int s = 0; s < n; ++s)
                                    v += gm.m[p][s] *
                                         (Gam[p][j][k] * Gam[s][i][l] - Gam[p][j][l] * Gam[s][i][k]);
                            Rlow[i][j][k][l] = v;
                        }
            fn(c, q, Rlow, Gam);
        });
}

Field intrinsic_scalar_curvature(const SurfaceGeometry& sg, Exec exec) {
    const Atlas& atlas = *sg.atlas;
    const int n = atlas.n;
    Field out(atlas, FieldKind::Scalar);
    visit_intrinsic_riemann(
        sg,
        [&](int c, std::size_t q, const double Rlow[3][3][3][3], const double[3][3][3]) {
            const NodeMat gm = node_sym2(sg.g, n, c, q);
            const NodeMat gim = invert_spd(n, gm);
            double Rsc = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l) Rsc += gim.m[i][k] * gim.m[j][l] * Rlow[i][j][k][l];
            out.ptr(c, 0)[q] = Rsc;
        },
        exec);
    atlas.sync(out, exec);
    return out;
}

} // namespace dsg
