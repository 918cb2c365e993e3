#include "dsg/solver.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>

namespace dsg {

namespace {

// ---------------------------------------------------------------------------
// Residual evaluation workspace: scatter DOFs, sync, differentiate, assemble
// 2 P_2 - psi nodewise.

struct Margins {
    double min_P1 = 1e300;
    double min_P2 = 1e300;
    double spacelike = 1e300;
    double min_F_eig = 1e300; // smallest eigenvalue of F^{ij} relative to g
};

// largest eigenvalue of the shape operator from its invariants
double lambda_max_from_traces(int n, double H, double P2, double P3) {
    if (n == 2) {
        const double disc = std::max(0.0, H * H - 4.0 * P2);
        return 0.5 * (H + std::sqrt(disc));
    }
    // roots of t^3 - H t^2 + P2 t - P3, all real
    const double p = P2 - H * H / 3.0;
    const double q = -2.0 * H * H * H / 27.0 + H * P2 / 3.0 - P3;
    if (p >= -1e-30) return H / 3.0; // triple root up to roundoff
    const double m = 2.0 * std::sqrt(-p / 3.0);
    double arg = 3.0 * q / (p * m);
    arg = std::clamp(arg, -1.0, 1.0);
    return H / 3.0 + m * std::cos(std::acos(arg) / 3.0);
}

class Sigma2System {
public:
    Sigma2System(const Atlas& atlas, const Field& psi, double rho, Exec exec)
        : atlas_(atlas), psi_(&psi), rho_(rho), exec_(exec),
          u_(atlas, FieldKind::Scalar), du_(atlas, FieldKind::Covector),
          d2_(atlas, FieldKind::Sym2) {
        m_ = atlas.active_nodes.size();
    }

    std::size_t size() const { return 2 * m_; }

    void scatter(const std::vector<double>& dof) {
        for (int c = 0; c < 2; ++c)
            for_each_index(exec_, m_, [&](std::size_t t) {
                u_.ptr(c, 0)[atlas_.active_nodes[t]] = dof[static_cast<std::size_t>(c) * m_ + t];
            });
        atlas_.sync(u_, exec_);
    }

    void gather(std::vector<double>& dof) const {
        for (int c = 0; c < 2; ++c)
            for (std::size_t t = 0; t < m_; ++t)
                dof[static_cast<std::size_t>(c) * m_ + t] = u_.ptr(c, 0)[atlas_.active_nodes[t]];
    }

    // residual of the current scattered iterate; margins are tracked so the
    // line search can enforce admissibility without a second pass
    Margins residual(std::vector<double>& out) {
        const int n = atlas_.n;
        atlas_.jets(u_, du_, d2_, nullptr, exec_);
        for (int c = 0; c < 2; ++c) {
            p1loc[c].assign(m_, 1e300);
            p2loc[c].assign(m_, 1e300);
            sloc[c].assign(m_, 1e300);
            floc[c].assign(m_, 1e300);
            for_each_index(exec_, m_, [&](std::size_t t) {
                const std::size_t q = atlas_.active_nodes[t];
                double x[3];
                atlas_.node_coords(q, x);
                const ChartGeom cg = chart_geom(n, x);
                const double uu = u_.ptr(c, 0)[q];
                const double sh = std::sinh(uu), ch = std::cosh(uu), th = sh / ch;
                double dui[3];
                double du2 = 0.0;
                for (int i = 0; i < n; ++i) {
                    dui[i] = du_.ptr(c, i)[q];
                    du2 += dui[i] * dui[i];
                }
                du2 /= cg.f;
                const double w2 = ch * ch - du2;
                sloc[c][t] = w2;
                if (!(w2 > 0.0)) {
                    out[static_cast<std::size_t>(c) * m_ + t] = 1e10;
                    p1loc[c][t] = -1e300;
                    p2loc[c][t] = -1e300;
                    floc[c][t] = -1e300;
                    return;
                }
                const double tau = ch * ch / std::sqrt(w2);

                NodeMat gm{}, Am{};
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        gm.m[i][j] =
                            rho_ * rho_ * (ch * ch * cg.f * (i == j ? 1.0 : 0.0) - dui[i] * dui[j]);
                        double d2c = d2_.ptr(c, sym2_index(n, i, j))[q];
                        for (int k = 0; k < n; ++k)
                            d2c -= christoffel_sigma(cg, k, i, j) * dui[k];
                        Am.m[i][j] = rho_ * tau / ch *
                                     (d2c - 2.0 * th * dui[i] * dui[j] +
                                      sh * ch * cg.f * (i == j ? 1.0 : 0.0));
                    }
                const NodeMat gi = invert_spd(n, gm);
                double M[3][3] = {};
                double H = 0.0, A2 = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        double v = 0.0;
                        for (int k = 0; k < n; ++k) v += gi.m[i][k] * Am.m[k][j];
                        M[i][j] = v;
                    }
                for (int i = 0; i < n; ++i) {
                    H += M[i][i];
                    for (int j = 0; j < n; ++j) A2 += M[i][j] * M[j][i];
                }
                const double P2 = 0.5 * (H * H - A2);
                double P3 = 0.0;
                if (n == 3)
                    P3 = M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                         M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                         M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
                p1loc[c][t] = H;
                p2loc[c][t] = P2;
                floc[c][t] = H - lambda_max_from_traces(n, H, P2, P3);
                out[static_cast<std::size_t>(c) * m_ + t] = 2.0 * P2 - psi_->ptr(c, 0)[q];
            });
        }
        Margins mg;
        for (int c = 0; c < 2; ++c) {
            mg.min_P1 = std::min(mg.min_P1, chunked_min(exec_, m_, [&](std::size_t t) { return p1loc[c][t]; }));
            mg.min_P2 = std::min(mg.min_P2, chunked_min(exec_, m_, [&](std::size_t t) { return p2loc[c][t]; }));
            mg.spacelike =
                std::min(mg.spacelike, chunked_min(exec_, m_, [&](std::size_t t) { return sloc[c][t]; }));
            mg.min_F_eig =
                std::min(mg.min_F_eig, chunked_min(exec_, m_, [&](std::size_t t) { return floc[c][t]; }));
        }
        return mg;
    }

    // diagonal of the linearization from the principal symbol of 2 P_2
    void jacobi_diagonal(std::vector<double>& diag) {
        const int n = atlas_.n;
        const double c2 = atlas_.p == 4 ? -30.0 / (12.0 * atlas_.h * atlas_.h)
                                        : -2.0 / (atlas_.h * atlas_.h);
        for (int c = 0; c < 2; ++c)
            for_each_index(exec_, m_, [&](std::size_t t) {
                const std::size_t q = atlas_.active_nodes[t];
                double x[3];
                atlas_.node_coords(q, x);
                const ChartGeom cg = chart_geom(n, x);
                const double uu = u_.ptr(c, 0)[q];
                const double sh = std::sinh(uu), ch = std::cosh(uu), th = sh / ch;
                double dui[3];
                double du2 = 0.0;
                for (int i = 0; i < n; ++i) {
                    dui[i] = du_.ptr(c, i)[q];
                    du2 += dui[i] * dui[i];
                }
                du2 /= cg.f;
                const double w2 = ch * ch - du2;
                const double tau = ch * ch / std::sqrt(std::max(w2, 1e-12));

                NodeMat gm{}, Am{};
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        gm.m[i][j] =
                            rho_ * rho_ * (ch * ch * cg.f * (i == j ? 1.0 : 0.0) - dui[i] * dui[j]);
                        double d2c = d2_.ptr(c, sym2_index(n, i, j))[q];
                        for (int k = 0; k < n; ++k)
                            d2c -= christoffel_sigma(cg, k, i, j) * dui[k];
                        Am.m[i][j] = rho_ * tau / ch *
                                     (d2c - 2.0 * th * dui[i] * dui[j] +
                                      sh * ch * cg.f * (i == j ? 1.0 : 0.0));
                    }
                const NodeMat gi = invert_spd(n, gm);
                double H = 0.0;
                double Fdiag = 0.0; // sum_i F^{ii} with F = H g^{-1} - g^{-1} A g^{-1}
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) H += gi.m[i][j] * Am.m[j][i];
                for (int i = 0; i < n; ++i) {
                    double Aii = 0.0;
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l) Aii += gi.m[i][k] * Am.m[k][l] * gi.m[l][i];
                    Fdiag += H * gi.m[i][i] - Aii;
                }
                double d = 2.0 * rho_ * tau / ch * Fdiag * c2;
                if (std::abs(d) < 1e-12) d = 1.0;
                diag[static_cast<std::size_t>(c) * m_ + t] = d;
            });
    }

    const Atlas& atlas_;
    const Field* psi_;
    double rho_;
    Exec exec_;
    Field u_, du_, d2_;
    std::size_t m_ = 0;
    std::array<std::vector<double>, 2> p1loc, p2loc, sloc, floc;
};

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

// Right-preconditioned GMRES on the matrix-free Jacobian.  Returns the
// Krylov iteration count.
int gmres_solve(Sigma2System& sys, const std::vector<double>& u_dof,
                const std::vector<double>& r0, const std::vector<double>& diag, double rel_tol,
                int max_iter, std::vector<double>& delta, Exec /*exec*/) {
    const std::size_t N = r0.size();
    const double unorm = norm2(u_dof);

    std::vector<double> scratch(N), Gp(N);
    const auto apply_jacobian = [&](const std::vector<double>& v, std::vector<double>& out) {
        // central directional difference; the soft modes of the linearization
        // (boost orbits of the solution) sit near the one-sided noise floor,
        // so the extra residual evaluation buys usable directions there
        const double vn = norm2(v);
        if (vn == 0.0) {
            std::fill(out.begin(), out.end(), 0.0);
            return;
        }
        const double eps = 6.1e-6 * std::sqrt(1.0 + unorm) / vn;
        for (std::size_t i = 0; i < N; ++i) scratch[i] = u_dof[i] + eps * v[i] / diag[i];
        sys.scatter(scratch);
        sys.residual(out);
        for (std::size_t i = 0; i < N; ++i) scratch[i] = u_dof[i] - eps * v[i] / diag[i];
        sys.scatter(scratch);
        sys.residual(Gp);
        for (std::size_t i = 0; i < N; ++i) out[i] = (out[i] - Gp[i]) / (2.0 * eps);
    };

    const double beta = norm2(r0);
    delta.assign(N, 0.0);
    if (beta == 0.0) return 0;

    const int mmax = max_iter;
    std::vector<std::vector<double>> V;
    V.reserve(static_cast<std::size_t>(mmax) + 1);
    V.emplace_back(N);
    for (std::size_t i = 0; i < N; ++i) V[0][i] = -r0[i] / beta;

    std::vector<double> cs(static_cast<std::size_t>(mmax)), sn(static_cast<std::size_t>(mmax));
    std::vector<double> gvec(static_cast<std::size_t>(mmax) + 1, 0.0);
    gvec[0] = beta;
    std::vector<std::vector<double>> Hcol;

    int k = 0;
    for (; k < mmax; ++k) {
        std::vector<double> w(N);
        apply_jacobian(V[static_cast<std::size_t>(k)], w);
        std::vector<double> h(static_cast<std::size_t>(k) + 2, 0.0);
        for (int j = 0; j <= k; ++j) {
            h[static_cast<std::size_t>(j)] = dot(w, V[static_cast<std::size_t>(j)]);
            for (std::size_t i = 0; i < N; ++i)
                w[i] -= h[static_cast<std::size_t>(j)] * V[static_cast<std::size_t>(j)][i];
        }
        h[static_cast<std::size_t>(k) + 1] = norm2(w);
        if (h[static_cast<std::size_t>(k) + 1] > 1e-300) {
            V.emplace_back(N);
            for (std::size_t i = 0; i < N; ++i)
                V.back()[i] = w[i] / h[static_cast<std::size_t>(k) + 1];
        }
        // apply previous Givens rotations
        for (int j = 0; j < k; ++j) {
            const double t1 = cs[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j)] +
                              sn[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j) + 1];
            const double t2 = -sn[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j)] +
                              cs[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j) + 1];
            h[static_cast<std::size_t>(j)] = t1;
            h[static_cast<std::size_t>(j) + 1] = t2;
        }
        const double denom = std::hypot(h[static_cast<std::size_t>(k)], h[static_cast<std::size_t>(k) + 1]);
        if (denom < 1e-300) {
            Hcol.push_back(h);
            ++k;
            break;
        }
        cs[static_cast<std::size_t>(k)] = h[static_cast<std::size_t>(k)] / denom;
        sn[static_cast<std::size_t>(k)] = h[static_cast<std::size_t>(k) + 1] / denom;
        h[static_cast<std::size_t>(k)] = denom;
        h[static_cast<std::size_t>(k) + 1] = 0.0;
        const double g1 = cs[static_cast<std::size_t>(k)] * gvec[static_cast<std::size_t>(k)];
        const double g2 = -sn[static_cast<std::size_t>(k)] * gvec[static_cast<std::size_t>(k)];
        gvec[static_cast<std::size_t>(k)] = g1;
        gvec[static_cast<std::size_t>(k) + 1] = g2;
        Hcol.push_back(h);
        if (std::abs(g2) <= rel_tol * beta) {
            ++k;
            break;
        }
        if (static_cast<int>(V.size()) == k + 1) { // breakdown: happy or lucky
            ++k;
            break;
        }
    }

    // back substitution
    const int kk = std::min<int>(k, static_cast<int>(Hcol.size()));
    std::vector<double> y(static_cast<std::size_t>(kk), 0.0);
    for (int i = kk - 1; i >= 0; --i) {
        double s = gvec[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < kk; ++j)
            s -= Hcol[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] *
                 y[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = s / Hcol[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    }
    for (int j = 0; j < kk; ++j)
        for (std::size_t i = 0; i < N; ++i)
            delta[i] += y[static_cast<std::size_t>(j)] * V[static_cast<std::size_t>(j)][i];
    // undo right preconditioning
    for (std::size_t i = 0; i < N; ++i) delta[i] /= diag[i];
    return kk;
}

} // namespace

Field psi_from_metric(const Atlas& atlas, const Field& R_target, double rho, int n, Exec exec) {
    double mn = 1e300, mx = -1e300;
    for (int c = 0; c < 2; ++c)
        for (auto q : atlas.active_nodes) {
            mn = std::min(mn, R_target.ptr(c, 0)[q]);
            mx = std::max(mx, R_target.ptr(c, 0)[q]);
        }
    const double lo = n * (n - 2.0) / (rho * rho), hi = n * (n - 1.0) / (rho * rho);
    if (!(mn > lo) || !(mx < hi)) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "target curvature violates the window: R in [%.6e, %.6e], required (%.6e, %.6e)",
                      mn, mx, lo, hi);
        throw hypothesis_error(buf);
    }
    Field psi(atlas, FieldKind::Scalar);
    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.nn,
                       [&](std::size_t q) { psi.ptr(c, 0)[q] = hi - R_target.ptr(c, 0)[q]; });
    return psi;
}

Field isometric_residual(const GraphFunction& u, const Field& g_target, Exec exec) {
    const Atlas& atlas = *u.atlas;
    const int n = atlas.n;
    const SurfaceGeometry sg = assemble_surface(u, exec);
    Field out(atlas, FieldKind::Scalar);
    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.active_nodes.size(), [&](std::size_t t) {
            const std::size_t q = atlas.active_nodes[t];
            const NodeMat gt = node_sym2(g_target, n, c, q);
            const NodeMat g = node_sym2(sg.g, n, c, q);
            double det = gt.m[0][0] * gt.m[1][1] - gt.m[0][1] * gt.m[1][0];
            if (n == 3) {
                det = gt.m[0][0] * (gt.m[1][1] * gt.m[2][2] - gt.m[1][2] * gt.m[2][1]) -
                      gt.m[0][1] * (gt.m[1][0] * gt.m[2][2] - gt.m[1][2] * gt.m[2][0]) +
                      gt.m[0][2] * (gt.m[1][0] * gt.m[2][1] - gt.m[1][1] * gt.m[2][0]);
            }
            double r2 = 0.0;
            if (std::abs(det) > 1e-14) {
                const NodeMat gti = invert_spd(n, gt);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        for (int k = 0; k < n; ++k)
                            for (int l = 0; l < n; ++l)
                                r2 += gti.m[i][k] * gti.m[j][l] * (g.m[i][j] - gt.m[i][j]) *
                                      (g.m[k][l] - gt.m[k][l]);
            } else {
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        const double d = g.m[i][j] - gt.m[i][j];
                        r2 += d * d;
                    }
            }
            out.ptr(c, 0)[q] = std::sqrt(std::max(0.0, r2));
        });
    atlas.sync(out, exec);
    return out;
}

SolveResult solve_sigma2(const Field& psi, double rho, const GraphFunction& u0,
                         const SolverConfig& cfg, Exec exec) {
    const Atlas& atlas = *u0.atlas;
    const int n = atlas.n;

    // hypothesis: 0 < psi < n rho^-2 pointwise
    double psi_min = 1e300, psi_max = -1e300;
    for (int c = 0; c < 2; ++c)
        for (auto q : atlas.active_nodes) {
            psi_min = std::min(psi_min, psi.ptr(c, 0)[q]);
            psi_max = std::max(psi_max, psi.ptr(c, 0)[q]);
        }
    if (!(psi_min > 0.0) || !(psi_max < n / (rho * rho))) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "prescription violates the window: psi in [%.6e, %.6e], required (0, %.6e)",
                      psi_min, psi_max, n / (rho * rho));
        throw hypothesis_error(buf);
    }

    Sigma2System sys(atlas, psi, rho, exec);
    const std::size_t N = sys.size();
    std::vector<double> u_dof(N), r(N), r_trial(N), delta(N), diag(N), u_trial(N);

    {
        Field ucopy = u0.u;
        atlas.sync(ucopy, exec);
        for (int c = 0; c < 2; ++c)
            for (std::size_t t = 0; t < sys.m_; ++t)
                u_dof[static_cast<std::size_t>(c) * sys.m_ + t] =
                    ucopy.ptr(c, 0)[atlas.active_nodes[t]];
    }

    sys.scatter(u_dof);
    Margins mg = sys.residual(r);
    if (!(mg.spacelike > cfg.spacelike_floor))
        throw degenerate_error("initial iterate is not safely spacelike");
    if (!(mg.min_P1 > cfg.adm_margin) || !(mg.min_P2 > cfg.adm_margin)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "initial iterate not admissible: min P1 = %.3e, min P2 = %.3e",
                      mg.min_P1, mg.min_P2);
        throw hypothesis_error(buf);
    }

    SolveResult result;
    result.u = GraphFunction(atlas, rho);
    double rnorm = inf_norm(r);     // convergence is judged in the max norm
    double r2 = norm2(r);           // the line search descends the l2 norm
    double prev_r2 = r2;

    for (int iter = 0; iter < cfg.max_newton && rnorm > cfg.tol; ++iter) {
        sys.scatter(u_dof);
        sys.residual(r);
        sys.jacobi_diagonal(diag);

        // Eisenstat-Walker style forcing, residual-slaved, tightened near the
        // target so the final steps are solved accurately
        double eta = cfg.forcing_max;
        if (iter > 0) eta = std::min(cfg.forcing_max, 0.9 * (r2 / prev_r2) * (r2 / prev_r2));
        if (rnorm < 1e3 * cfg.tol) eta = std::min(eta, 0.05 * cfg.tol / std::max(rnorm, cfg.tol));
        eta = std::max(eta, 1e-10);

        const int kry = gmres_solve(sys, u_dof, r, diag, eta, cfg.max_krylov, delta, exec);

        // backtracking line search with admissibility and spacelike guards
        double alpha = 1.0;
        bool accepted = false;
        double trial_norm = 0.0, trial_r2 = 0.0;
        Margins trial_mg;
        while (alpha >= cfg.min_step) {
            for (std::size_t i = 0; i < N; ++i) u_trial[i] = u_dof[i] + alpha * delta[i];
            sys.scatter(u_trial);
            trial_mg = sys.residual(r_trial);
            trial_norm = inf_norm(r_trial);
            trial_r2 = norm2(r_trial);
            const bool feasible = trial_mg.spacelike > cfg.spacelike_floor &&
                                  trial_mg.min_P1 > cfg.adm_margin &&
                                  trial_mg.min_P2 > cfg.adm_margin;
            if (feasible && trial_r2 <= (1.0 - 1e-4 * alpha) * r2) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            char buf[192];
            std::snprintf(buf, sizeof buf,
                          "line search stalled at iteration %d: residual %.3e, step floor %.1e "
                          "(min P2 along trial %.3e)",
                          iter, rnorm, cfg.min_step, trial_mg.min_P2);
            throw nonconvergence_error(buf);
        }

        u_dof = u_trial;
        prev_r2 = r2;
        r2 = trial_r2;
        rnorm = trial_norm;
        mg = trial_mg;

        IterationRecord rec;
        rec.iter = iter + 1;
        rec.residual_inf = rnorm;
        rec.damping = alpha;
        rec.min_P1 = mg.min_P1;
        rec.min_P2 = mg.min_P2;
        rec.spacelike = mg.spacelike;
        rec.min_F_eig = mg.min_F_eig;
        rec.krylov_iters = kry;
        rec.forcing = eta;
        result.history.push_back(rec);
    }

    if (rnorm > cfg.tol) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "no convergence after %d Newton steps: residual %.3e > tol %.3e",
                      cfg.max_newton, rnorm, cfg.tol);
        throw nonconvergence_error(buf);
    }

    sys.scatter(u_dof);
    result.u.u = sys.u_;
    result.residual_inf = rnorm;
    result.newton_iters = static_cast<int>(result.history.size());
    return result;
}

// ---------------------------------------------------------------------------
// Lorentz normalization

NormalizeResult lorentz_normalize(const GraphFunction& gf, NodeRef p, Exec exec) {
    const Atlas& atlas = *gf.atlas;
    const int n = atlas.n;
    const int dim = n + 2;
    const double rho = gf.rho;
    const SurfaceGeometry sg = assemble_surface(gf, exec);

    // boost aligning nu(p) with -E0
    MinkVec nu(dim);
    for (int a = 0; a < dim; ++a) nu[a] = sg.nu.ptr(p.chart, a)[p.node];
    const double tau_p = -nu[0];
    double spn = 0.0;
    for (int a = 1; a < dim; ++a) spn += nu[a] * nu[a];
    spn = std::sqrt(spn);

    MinkTransform T = MinkTransform::identity(dim);
    double chi = 0.0;
    if (spn > 1e-15) {
        MinkVec d(dim);
        for (int a = 1; a < dim; ++a) d[a] = nu[a] / spn;
        chi = -std::atanh(spn / tau_p);
        T = boost(dim, d, chi);
    }

    // rotate the image of the base point back to its original direction
    MinkVec Xp(dim);
    for (int a = 0; a < dim; ++a) Xp[a] = sg.X.ptr(p.chart, a)[p.node];
    const MinkVec Xb = T.apply(Xp);
    MinkVec dir_new(dim), dir_old(dim);
    double nn2 = 0.0, no2 = 0.0;
    for (int a = 1; a < dim; ++a) {
        nn2 += Xb[a] * Xb[a];
        no2 += Xp[a] * Xp[a];
    }
    for (int a = 1; a < dim; ++a) {
        dir_new[a] = Xb[a] / std::sqrt(nn2);
        dir_old[a] = Xp[a] / std::sqrt(no2);
    }
    // the original direction is the node's sphere point for graphs
    T = compose(rotation_between(dim, dir_new, dir_old), T);

    // inverse transform for the radial resampling
    MinkTransform Tinv = MinkTransform::identity(dim);
    {
        // isometry inverse: eta^-1 T^t eta with eta = diag(-1, 1, ..., 1)
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                double v = T.m[j][i];
                if ((i == 0) != (j == 0)) v = -v;
                Tinv.m[i][j] = v;
            }
    }

    // bracket for the radial root find
    double umin = 1e300, umax = -1e300;
    for (int c = 0; c < 2; ++c)
        for (auto q : atlas.active_nodes) {
            umin = std::min(umin, sg.u.ptr(c, 0)[q]);
            umax = std::max(umax, sg.u.ptr(c, 0)[q]);
        }
    const double pad0 = 1.0 + std::abs(chi);

    NormalizeResult out;
    out.u = GraphFunction(atlas, rho);
    out.transform = T;
    out.rapidity = chi;

    std::array<std::vector<std::uint8_t>, 2> failed;
    failed[0].assign(atlas.nn, 0);
    failed[1].assign(atlas.nn, 0);

    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.nn, [&](std::size_t q) {
            double xi[4];
            atlas.node_point(c, q, xi);
            const auto value = [&](double rr) {
                MinkVec y(dim);
                y[0] = rho * std::sinh(rr);
                for (int a = 0; a <= n; ++a) y[1 + a] = rho * std::cosh(rr) * xi[a];
                const MinkVec v = Tinv.apply(y);
                const double a_of_r = std::asinh(v[0] / rho);
                double zeta[4];
                double zn = 0.0;
                for (int a = 1; a < dim; ++a) zn += v[a] * v[a];
                zn = std::sqrt(zn);
                for (int a = 0; a <= n; ++a) zeta[a] = v[1 + a] / zn;
                const int chart = zeta[n] >= 0.0 ? 0 : 1;
                double y2[3];
                const double denom = 1.0 + std::abs(zeta[n]);
                for (int a = 0; a < n; ++a) y2[a] = zeta[a] / denom;
                return a_of_r - atlas.interp(sg.u, chart, y2);
            };

            double lo = umin - pad0, hi = umax + pad0;
            double flo = value(lo), fhi = value(hi);
            int expand = 0;
            while (flo * fhi > 0.0 && expand < 24) {
                lo -= 0.5;
                hi += 0.5;
                flo = value(lo);
                fhi = value(hi);
                ++expand;
            }
            if (flo * fhi > 0.0) {
                failed[c][q] = 1;
                return;
            }
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = value(mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if (flo * fm < 0.0) {
                    hi = mid;
                    fhi = fm;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            out.u.u.ptr(c, 0)[q] = 0.5 * (lo + hi);
        });

    std::size_t nfail = 0;
    for (int c = 0; c < 2; ++c)
        for (std::size_t q = 0; q < atlas.nn; ++q) nfail += failed[c][q];
    if (nfail > 0) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "transformed surface is not a graph over the equator: %zu nodes have no "
                      "radial crossing",
                      nfail);
        throw reparametrization_error(buf);
    }
    return out;
}

} // namespace dsg
