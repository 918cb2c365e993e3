#include "dsg/estimates.hpp"

#include <cmath>
#include <cstdio>

namespace dsg {

namespace {
constexpr double kFlagAbsTol = 1e-8;
constexpr double kFlagRelTol = 1e-6;

bool leq_with_tol(double value, double bound) {
    return value <= bound + kFlagAbsTol + kFlagRelTol * std::abs(bound);
}

void field_min_max(const Atlas& atlas, const Field& f, Exec exec, double& mn, double& mx) {
    mn = 1e300;
    mx = -1e300;
    for (int c = 0; c < 2; ++c) {
        mn = std::min(mn, chunked_min(exec, atlas.active_nodes.size(), [&](std::size_t t) {
                          return f.ptr(c, 0)[atlas.active_nodes[t]];
                      }));
        mx = std::max(mx, chunked_max(exec, atlas.active_nodes.size(), [&](std::size_t t) {
                          return f.ptr(c, 0)[atlas.active_nodes[t]];
                      }));
    }
}
} // namespace

Field psi_field(const Atlas& atlas, const Field& R, double rho, int n, Exec exec) {
    Field out(atlas, FieldKind::Scalar);
    const double level = n * (n - 1.0) / (rho * rho);
    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.nn,
                       [&](std::size_t q) { out.ptr(c, 0)[q] = level - R.ptr(c, 0)[q]; });
    return out;
}

WindowResult curvature_window_range(double Rmin, double Rmax, double rho, int n) {
    WindowResult w;
    const double lo = n * (n - 2.0) / (rho * rho);
    const double hi = n * (n - 1.0) / (rho * rho);
    w.lower_margin = Rmin - lo;
    w.upper_margin = hi - Rmax;
    w.ok = w.lower_margin > 0.0 && w.upper_margin > 0.0;
    return w;
}

WindowResult curvature_window(const Atlas& atlas, const Field& R, double rho, int n, Exec exec) {
    double mn, mx;
    field_min_max(atlas, R, exec, mn, mx);
    return curvature_window_range(mn, mx, rho, n);
}

RhoRange rho_max_range(double Rmin, double Rmax, int n) {
    RhoRange r;
    if (Rmin <= 0.0) {
        r.empty = true;
        r.reason = n >= 3 ? "min R <= 0: the lower window bound cannot hold for any rho"
                          : "min R <= 0: positive curvature required for n = 2";
        return r;
    }
    r.rho_max = std::sqrt(n * (n - 1.0) / Rmax);
    if (n >= 3) {
        r.rho_min = std::sqrt(n * (n - 2.0) / Rmin);
        if (r.rho_min >= r.rho_max) {
            r.empty = true;
            r.rho_max = 0.0;
            r.reason = "curvature spread too large: no rho satisfies both window bounds";
        }
    }
    return r;
}

RhoRange rho_max(const Atlas& atlas, const Field& R, int n, Exec exec) {
    double mn, mx;
    field_min_max(atlas, R, exec, mn, mx);
    return rho_max_range(mn, mx, n);
}

MeanCurvatureBound mean_curvature_bound(const SurfaceGeometry& sg, Exec exec) {
    const Atlas& atlas = *sg.atlas;
    const int n = atlas.n;
    const int nsym = sym2_count(n);
    const double rho = sg.rho;

    if (!(sg.min_P1 > 0.0) || !(sg.min_P2 > 0.0)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "surface not admissible: min P1 = %.3e, min P2 = %.3e",
                      sg.min_P1, sg.min_P2);
        throw hypothesis_error(buf);
    }

    MeanCurvatureBound out;
    out.psi = psi_field(atlas, sg.R, rho, n, exec);
    double psi_min, psi_max;
    field_min_max(atlas, out.psi, exec, psi_min, psi_max);
    if (!(psi_min > 0.0)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "hypothesis psi > 0 fails: min psi = %.6e", psi_min);
        throw hypothesis_error(buf);
    }
    if (!(1.0 / (rho * rho) - psi_max / n > 0.0)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "hypothesis rho^-2 - psi/n > 0 fails: max psi = %.6e", psi_max);
        throw hypothesis_error(buf);
    }

    // Laplace-Beltrami of R with respect to the induced metric
    Field dR(atlas, FieldKind::Covector), d2R(atlas, FieldKind::Sym2);
    atlas.jets(sg.R, dR, d2R, nullptr, exec);

    out.rhs = Field(atlas, FieldKind::Scalar);
    for (int c = 0; c < 2; ++c)
        for_each_index(exec, atlas.active_nodes.size(), [&](std::size_t t) {
            const std::size_t q = atlas.active_nodes[t];
            const NodeMat gi = node_sym2(sg.gi, n, c, q);
            double lap = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double hess = d2R.ptr(c, sym2_index(n, i, j))[q];
                    for (int k = 0; k < n; ++k)
                        hess -= sg.Gamma_g.ptr(c, k * nsym + sym2_index(n, i, j))[q] * dR.ptr(c, k)[q];
                    lap += gi.m[i][j] * hess;
                }
            const double psi = out.psi.ptr(c, 0)[q];
            out.rhs.ptr(c, 0)[q] = (0.5 * lap - psi * psi + n / (rho * rho) * psi) /
                                   ((n - 1.0) * (1.0 / (rho * rho) - psi / n));
        });

    out.C = -1e300;
    double h2 = -1e300;
    for (int c = 0; c < 2; ++c) {
        out.C = std::max(out.C, chunked_max(exec, atlas.active_nodes.size(), [&](std::size_t t) {
                             return out.rhs.ptr(c, 0)[atlas.active_nodes[t]];
                         }));
        h2 = std::max(h2, chunked_max(exec, atlas.active_nodes.size(), [&](std::size_t t) {
                          const double H = sg.H.ptr(c, 0)[atlas.active_nodes[t]];
                          return H * H;
                      }));
    }
    out.max_H2 = h2;
    out.ok = leq_with_tol(out.max_H2, out.C);
    return out;
}

TiltBound tilt_bound(const SurfaceGeometry& sg, NodeRef p, Exec exec) {
    const Atlas& atlas = *sg.atlas;
    const double rho = sg.rho;
    const double tau_p = sg.tau.ptr(p.chart, 0)[p.node];
    if (std::abs(tau_p - 1.0) > 1e-6) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "surface not normalized at basepoint: tau(p) = %.12f", tau_p);
        throw hypothesis_error(buf);
    }

    TiltBound out;
    double ch = -1e300, mt = -1e300, me = -1e300;
    for (int c = 0; c < 2; ++c) {
        ch = std::max(ch, chunked_max(exec, atlas.active_nodes.size(), [&](std::size_t t) {
                          return std::sqrt(std::max(0.0, sg.normA2.ptr(c, 0)[atlas.active_nodes[t]]));
                      }));
        mt = std::max(mt, chunked_max(exec, atlas.active_nodes.size(), [&](std::size_t t) {
                          return sg.tau.ptr(c, 0)[atlas.active_nodes[t]];
                      }));
        me = std::max(me, chunked_max(exec, atlas.active_nodes.size(), [&](std::size_t t) {
                          return std::abs(sg.eta.ptr(c, 0)[atlas.active_nodes[t]]);
                      }));
    }
    out.C_H = ch;
    out.max_tau = mt;
    out.max_abs_eta = me;
    out.diameter = atlas.geodesic_diameter(sg.g);
    out.C_tau = std::exp(out.C_H * out.diameter);
    out.ok = leq_with_tol(out.max_tau, out.C_tau);
    out.eta_bound = rho * std::sqrt(std::max(0.0, out.C_tau * out.C_tau - 1.0));
    out.eta_ok = leq_with_tol(out.max_abs_eta, out.eta_bound);
    return out;
}

Certificate nonexistence_certificate(double r, double rho, int n) {
    if (!(r > 0.0) || !(rho > 0.0)) throw config_error("radii must be positive");
    if (n < 2) throw config_error("dimension must be at least 2");
    Certificate cert;
    cert.pair_product = 1.0 / (rho * rho) - 1.0 / (r * r);
    char buf[192];
    if (r >= rho) {
        cert.verdict = Nonexistence::NotApplicable;
        std::snprintf(buf, sizeof buf,
                      "r >= rho: forced pairwise product %.6f is nonnegative, the obstruction "
                      "argument is silent",
                      cert.pair_product);
        cert.message = buf;
        return cert;
    }
    if (n >= 3) {
        cert.verdict = Nonexistence::Impossible;
        std::snprintf(buf, sizeof buf,
                      "every pair lambda_i lambda_j (i != j) must equal %.6f < 0; with three or "
                      "more curvatures two of them share a sign, contradiction",
                      cert.pair_product);
    } else {
        cert.verdict = Nonexistence::Inadmissible;
        std::snprintf(buf, sizeof buf,
                      "P2 = lambda_1 lambda_2 = %.6f < 0 at every point, so no admissible "
                      "embedding exists",
                      cert.pair_product);
    }
    cert.message = buf;
    return cert;
}

EstimateReport evaluate_estimates(const SurfaceGeometry& sg, std::optional<NodeRef> basepoint,
                                  Exec exec) {
    const Atlas& atlas = *sg.atlas;
    EstimateReport rep;
    rep.min_P1 = sg.min_P1;
    rep.min_P2 = sg.min_P2;
    rep.admissible = sg.min_P1 > 0.0 && sg.min_P2 > 0.0;

    double Rmin, Rmax;
    field_min_max(atlas, sg.R, exec, Rmin, Rmax);
    rep.window = curvature_window_range(Rmin, Rmax, sg.rho, atlas.n);

    const Field psi = psi_field(atlas, sg.R, sg.rho, atlas.n, exec);
    field_min_max(atlas, psi, exec, rep.psi_min, rep.psi_max);

    const MeanCurvatureBound mc = mean_curvature_bound(sg, exec);
    rep.bound_C = mc.C;
    rep.max_H2 = mc.max_H2;
    rep.mean_curvature_ok = mc.ok;

    rep.verdict = rep.window.ok && rep.admissible && rep.mean_curvature_ok;
    if (basepoint) {
        rep.tilt = tilt_bound(sg, *basepoint, exec);
        rep.verdict = rep.verdict && rep.tilt->ok && rep.tilt->eta_ok;
    }
    return rep;
}

} // namespace dsg
