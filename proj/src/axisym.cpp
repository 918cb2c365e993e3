#include "dsg/axisym.hpp"

#include <cmath>
#include <cstdio>

namespace dsg {

Profile Profile::round_sphere(double r) {
    Profile p;
    p.L = M_PI * r;
    p.phi = [r](double s) { return r * std::sin(s / r); };
    p.dphi = [r](double s) { return std::cos(s / r); };
    p.ddphi = [r](double s) { return -std::sin(s / r) / r; };
    return p;
}

namespace {

// state: meridian point, unit tangent, surface normal in the (T, W, Z) slice
struct State {
    double g[3];  // gamma
    double e[3];  // e1 = gamma'
    double nu[3]; // unit timelike normal, tau = -nu_T
};

inline double mdot(const double* a, const double* b) {
    return -a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

struct Rhs {
    const Profile* prof;
    double rho;
    bool blowup = false;
    double blowup_s = 0.0;

    // meridian curvature from the Gauss relation; kappa_orbit = -nu_W / W
    double kappa1(const State& st, double s, double* kappa2_out) {
        const double W = st.g[1];
        const double k2 = -st.nu[1] / W;
        if (kappa2_out) *kappa2_out = k2;
        const double K = -prof->ddphi(s) / prof->phi(s);
        const double num = 1.0 / (rho * rho) - K;
        if (std::abs(k2) < 1e-8) {
            if (std::abs(num) < 1e-10) return k2; // marginal umbilic branch
            blowup = true;
            blowup_s = s;
            return 0.0;
        }
        return num / k2;
    }

    void operator()(const State& st, double s, State& d) {
        const double k1 = kappa1(st, s, nullptr);
        for (int i = 0; i < 3; ++i) {
            d.g[i] = st.e[i];
            d.e[i] = -k1 * st.nu[i] - st.g[i] / (rho * rho);
            d.nu[i] = -k1 * st.e[i];
        }
    }
};

State rk4_step(Rhs& rhs, const State& st, double s, double h) {
    State k1, k2, k3, k4, tmp;
    rhs(st, s, k1);
    for (int i = 0; i < 3; ++i) {
        tmp.g[i] = st.g[i] + 0.5 * h * k1.g[i];
        tmp.e[i] = st.e[i] + 0.5 * h * k1.e[i];
        tmp.nu[i] = st.nu[i] + 0.5 * h * k1.nu[i];
    }
    rhs(tmp, s + 0.5 * h, k2);
    for (int i = 0; i < 3; ++i) {
        tmp.g[i] = st.g[i] + 0.5 * h * k2.g[i];
        tmp.e[i] = st.e[i] + 0.5 * h * k2.e[i];
        tmp.nu[i] = st.nu[i] + 0.5 * h * k2.nu[i];
    }
    rhs(tmp, s + 0.5 * h, k3);
    for (int i = 0; i < 3; ++i) {
        tmp.g[i] = st.g[i] + h * k3.g[i];
        tmp.e[i] = st.e[i] + h * k3.e[i];
        tmp.nu[i] = st.nu[i] + h * k3.nu[i];
    }
    rhs(tmp, s + h, k4);
    State out;
    for (int i = 0; i < 3; ++i) {
        out.g[i] = st.g[i] + h / 6.0 * (k1.g[i] + 2.0 * k2.g[i] + 2.0 * k3.g[i] + k4.g[i]);
        out.e[i] = st.e[i] + h / 6.0 * (k1.e[i] + 2.0 * k2.e[i] + 2.0 * k3.e[i] + k4.e[i]);
        out.nu[i] = st.nu[i] + h / 6.0 * (k1.nu[i] + 2.0 * k2.nu[i] + 2.0 * k3.nu[i] + k4.nu[i]);
    }
    return out;
}

} // namespace

AxisymResult solve_axisymmetric_isometric(const Profile& profile, double rho, int steps) {
    AxisymResult out;
    const double L = profile.L;
    const double delta = 1e-4 * L;

    // regular caps are umbilic; the pole curvature must be real
    const double K0 = -profile.ddphi(delta) / profile.phi(delta);
    const double kap0_sq = 1.0 / (rho * rho) - K0;
    if (kap0_sq < 0.0) {
        char buf[192];
        std::snprintf(buf, sizeof buf,
                      "pole cap impossible: rho^-2 - K(0) = %.6e < 0, no real umbilic curvature; "
                      "consistent with the small-sphere obstruction",
                      kap0_sq);
        out.diagnostic = buf;
        out.closure_defect = 1e300;
        return out;
    }
    const double kap0 = std::sqrt(kap0_sq);

    // series start at s = delta around the pole (0, 0, rho), gauge a = 0
    State st;
    const double d2 = delta * delta, d3 = d2 * delta;
    st.g[0] = 0.5 * d2 * kap0;
    st.g[1] = delta + d3 / 6.0 * (kap0 * kap0 - 1.0 / (rho * rho));
    st.g[2] = rho - 0.5 * d2 / rho;
    st.e[0] = delta * kap0;
    st.e[1] = 1.0 + 0.5 * d2 * (kap0 * kap0 - 1.0 / (rho * rho));
    st.e[2] = -delta / rho;
    st.nu[0] = -1.0 - 0.5 * d2 * kap0 * kap0;
    st.nu[1] = -delta * kap0;
    st.nu[2] = 0.5 * d2 * kap0 / rho;

    Rhs rhs{&profile, rho};
    const double h = (L - 2.0 * delta) / steps;
    std::vector<State> trace;
    trace.reserve(static_cast<std::size_t>(steps) + 1);
    trace.push_back(st);
    double s = delta;
    for (int i = 0; i < steps; ++i) {
        st = rk4_step(rhs, st, s, h);
        s += h;
        trace.push_back(st);
        if (rhs.blowup) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "orbit curvature vanished at s = %.6f while the Gauss relation demands a "
                          "nonzero product; integration aborted (nonexistence suspected)",
                          rhs.blowup_s);
            out.diagnostic = buf;
            out.closure_defect = 1e300;
            return out;
        }
        if (!(std::abs(st.g[0]) < 1e6)) {
            out.diagnostic = "meridian diverged";
            out.closure_defect = 1e300;
            return out;
        }
    }

    // far-pole closure: the orbit curvature must approach the regular umbilic
    // value of the far cap, and the frame must stay orthonormal
    const double KL = -profile.ddphi(L - delta) / profile.phi(L - delta);
    const double kapL_sq = 1.0 / (rho * rho) - KL;
    double defect = 0.0;
    if (kapL_sq < 0.0) {
        out.diagnostic = "far pole cap impossible: rho^-2 - K(L) < 0";
        out.closure_defect = 1e300;
        return out;
    }
    const double k2_end = -st.nu[1] / st.g[1];
    defect = std::abs(k2_end - std::sqrt(kapL_sq));
    defect = std::max(defect, std::abs(st.g[1] - profile.phi(L - delta)) / rho);
    defect = std::max(defect, std::abs(mdot(st.g, st.g) - rho * rho) / (rho * rho));
    defect = std::max(defect, std::abs(mdot(st.e, st.e) - 1.0));
    defect = std::max(defect, std::abs(mdot(st.nu, st.nu) + 1.0));
    out.closure_defect = defect;
    out.closed = defect < 1e-6;
    if (!out.closed) out.diagnostic = "closure defect above tolerance (nonexistence suspected)";

    // boost gauge with matching pole heights
    const State& first = trace.front();
    const State& last = trace.back();
    double beta = 0.0;
    const double dz = first.g[2] - last.g[2];
    const double dt = first.g[0] - last.g[0];
    if (std::abs(dz) > 1e-12) {
        const double tb = -dt / dz;
        if (std::abs(tb) < 1.0) beta = std::atanh(tb);
    }
    const double cb = std::cosh(beta), sb = std::sinh(beta);

    const std::size_t stride = trace.size() > 2000 ? trace.size() / 2000 : 1;
    for (std::size_t i = 0; i < trace.size(); i += stride) {
        const State& p = trace[i];
        const double si = delta + h * static_cast<double>(i);
        const double T = cb * p.g[0] + sb * p.g[2];
        const double Z = sb * p.g[0] + cb * p.g[2];
        out.s.push_back(si);
        out.eta.push_back(T);
        out.theta.push_back(std::atan2(p.g[1], Z));
        out.u_of_s.push_back(std::asinh(T / rho));
        double k2 = 0.0;
        const double k1 = rhs.kappa1(p, si, &k2);
        out.kappa_meridian.push_back(k1);
        out.kappa_orbit.push_back(k2);
    }
    return out;
}

} // namespace dsg
