#include "dsg/presets.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

namespace dsg {

namespace {

std::vector<double> split_args(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw config_error("malformed preset argument '" + tok + "'");
        }
    }
    return out;
}

// fixed sphere sample for resolution-independent normalization
std::vector<std::array<double, 4>> probe_points(int n, unsigned seed) {
    std::vector<std::array<double, 4>> pts;
    std::mt19937_64 rng(0xD5A5E1B7ull ^ seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < 4000; ++t) {
        std::array<double, 4> p{};
        double nrm = 0.0;
        for (int a = 0; a <= n; ++a) {
            p[a] = gauss(rng);
            nrm += p[a] * p[a];
        }
        nrm = std::sqrt(nrm);
        if (nrm < 1e-8) continue;
        for (int a = 0; a <= n; ++a) p[a] /= nrm;
        pts.push_back(p);
    }
    return pts;
}

double jet_magnitude(const AmbientPoly& poly, int n, const std::array<double, 4>& xi) {
    // chart coordinates of the sample in its better chart
    const int chart = xi[n] >= 0.0 ? 0 : 1;
    double x[3];
    const double denom = 1.0 + std::abs(xi[n]);
    for (int a = 0; a < n; ++a) x[a] = xi[a] / denom;
    const AnalyticJet jet = analytic_jet(poly, n, chart, x);
    const ChartGeom cg = chart_geom(n, x);
    double g1 = 0.0, g2 = 0.0;
    for (int i = 0; i < n; ++i) g1 += jet.du[i] * jet.du[i];
    g1 /= cg.f;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g2 += jet.d2_cov[i][j] * jet.d2_cov[i][j];
    g2 /= cg.f * cg.f;
    return std::max({std::abs(jet.u), std::sqrt(g1), std::sqrt(g2)});
}

} // namespace

Preset parse_preset(const std::string& text, int n) {
    Preset out;
    out.name = text;
    const int nvars = n + 1;

    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);

    if (head == "equator") {
        if (!args.empty()) throw config_error("preset 'equator' takes no arguments");
        out.poly = AmbientPoly::constant(nvars, 0.0);
        return out;
    }
    if (head == "constant") {
        const auto a = split_args(args);
        if (a.size() != 1) throw config_error("preset 'constant' expects one argument");
        out.poly = AmbientPoly::constant(nvars, a[0]);
        return out;
    }
    if (head == "bump") {
        const auto a = split_args(args);
        if (a.size() != 2) throw config_error("preset 'bump' expects two arguments a,b");
        out.poly = AmbientPoly::constant(nvars, a[0]);
        out.poly += AmbientPoly::coordinate(nvars, n, a[1]);
        return out;
    }
    if (head == "random") {
        const auto a = split_args(args);
        if (a.size() != 3 && a.size() != 4)
            throw config_error("preset 'random' expects seed,amplitude,bandlimit[,base]");
        const auto seed = static_cast<unsigned>(a[0]);
        const double amp = a[1];
        const int band = static_cast<int>(a[2]);
        const double base = a.size() == 4 ? a[3] : 0.5;
        if (band < 1 || band > 6) throw config_error("random bandlimit must be in [1, 6]");

        AmbientPoly f;
        f.nvars = nvars;
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        int e[4] = {0, 0, 0, 0};
        for (e[0] = 0; e[0] <= band; ++e[0])
            for (e[1] = 0; e[1] <= band - e[0]; ++e[1])
                for (e[2] = 0; e[2] <= band - e[0] - e[1]; ++e[2]) {
                    if (nvars == 3) {
                        if (e[0] + e[1] + e[2] == 0) continue; // base handles the mean
                        f.add_term(gauss(rng), e[0], e[1], e[2]);
                    } else {
                        for (e[3] = 0; e[3] <= band - e[0] - e[1] - e[2]; ++e[3]) {
                            if (e[0] + e[1] + e[2] + e[3] == 0) continue;
                            f.add_term(gauss(rng), e[0], e[1], e[2], e[3]);
                        }
                    }
                }

        double mag = 0.0;
        for (const auto& xi : probe_points(n, seed)) mag = std::max(mag, jet_magnitude(f, n, xi));
        if (mag < 1e-12) mag = 1.0;
        f *= amp / mag;
        out.poly = AmbientPoly::constant(nvars, base);
        out.poly += f;
        return out;
    }
    throw config_error("unknown preset '" + head + "'");
}

} // namespace dsg
