#include "dsg/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dsg {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_field_csv(const std::filesystem::path& path, const Atlas& atlas, const Field& f,
                     const std::vector<std::string>& value_columns) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open " + path.string() + " for writing");
    out << "chart";
    for (int a = 0; a < atlas.n; ++a) out << ",i" << a;
    for (int a = 0; a < atlas.n; ++a) out << ",x" << a + 1;
    for (const auto& c : value_columns) out << "," << c;
    out << "\n";
    for (int c = 0; c < 2; ++c)
        for (auto q : atlas.active_nodes) {
            int ij[3];
            atlas.node_ij(q, ij);
            double x[3];
            atlas.node_coords(q, x);
            out << c;
            for (int a = 0; a < atlas.n; ++a) out << "," << ij[a];
            for (int a = 0; a < atlas.n; ++a) out << "," << format_double(x[a]);
            for (int k = 0; k < f.ncomp; ++k) out << "," << format_double(f.ptr(c, k)[q]);
            out << "\n";
        }
}

void write_atlas_header(const std::filesystem::path& path, const Atlas& atlas) {
    json j;
    j["n"] = atlas.n;
    j["resolution"] = atlas.N;
    j["fd_order"] = atlas.p;
    j["h"] = atlas.h;
    j["half_extent"] = atlas.L;
    j["active_radius"] = atlas.r_sync;
    j["overlap_band"] = {0.8, 1.25};
    j["moment_degree"] = atlas.moment_degree;
    j["active_nodes_per_chart"] = atlas.active_nodes.size();
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

Field read_scalar_csv(const std::filesystem::path& path, const Atlas& atlas) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open " + path.string());
    Field f(atlas, FieldKind::Scalar);
    std::vector<std::uint8_t> seen[2];
    seen[0].assign(atlas.nn, 0);
    seen[1].assign(atlas.nn, 0);
    std::string line;
    std::getline(in, line); // header
    int nrow = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++nrow;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
        const std::size_t need = 1 + 2 * static_cast<std::size_t>(atlas.n) + 1;
        if (cols.size() < need)
            throw config_error(path.string() + ": malformed row " + std::to_string(nrow));
        const int c = std::stoi(cols[0]);
        int ij[3] = {0, 0, 0};
        for (int a = 0; a < atlas.n; ++a) ij[a] = std::stoi(cols[1 + static_cast<std::size_t>(a)]);
        if (c < 0 || c > 1) throw config_error(path.string() + ": bad chart index");
        for (int a = 0; a < atlas.n; ++a)
            if (ij[a] < 0 || ij[a] >= atlas.N)
                throw config_error(path.string() + ": node index out of range");
        const std::size_t q = atlas.node_index(ij);
        f.ptr(c, 0)[q] = std::stod(cols[need - 1]);
        seen[c][q] = 1;
    }
    for (int c = 0; c < 2; ++c)
        for (auto q : atlas.active_nodes)
            if (!seen[c][q])
                throw config_error(path.string() + ": incomplete field (missing active nodes); "
                                                   "was it dumped at this resolution?");
    atlas.sync(f);
    return f;
}

void export_surface_bundle(const std::filesystem::path& dir, const SurfaceGeometry& sg) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const Atlas& atlas = *sg.atlas;
    const int n = atlas.n;

    write_field_csv(dir / "u.csv", atlas, sg.u, {"u"});
    write_field_csv(dir / "tau.csv", atlas, sg.tau, {"tau"});
    write_field_csv(dir / "eta.csv", atlas, sg.eta, {"eta"});
    write_field_csv(dir / "H.csv", atlas, sg.H, {"H"});
    write_field_csv(dir / "normA2.csv", atlas, sg.normA2, {"normA2"});
    write_field_csv(dir / "R.csv", atlas, sg.R, {"R"});

    std::vector<std::string> sym;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) sym.push_back("c" + std::to_string(i) + std::to_string(j));
    write_field_csv(dir / "g.csv", atlas, sg.g, sym);
    write_field_csv(dir / "A.csv", atlas, sg.A, sym);
    write_field_csv(dir / "Ricci.csv", atlas, sg.Ricci, sym);

    std::vector<std::string> lam;
    for (int i = 0; i < n; ++i) lam.push_back("lambda" + std::to_string(i));
    write_field_csv(dir / "lambda.csv", atlas, sg.lambda, lam);

    std::vector<std::string> amb;
    for (int a = 0; a < n + 2; ++a) amb.push_back("v" + std::to_string(a));
    write_field_csv(dir / "X.csv", atlas, sg.X, amb);
    write_field_csv(dir / "nu.csv", atlas, sg.nu, amb);

    write_atlas_header(dir / "atlas.json", atlas);

    json j;
    j["n"] = n;
    j["rho"] = sg.rho;
    j["resolution"] = atlas.N;
    j["spacelike_margin"] = sg.spacelike_min;
    j["min_P1"] = sg.min_P1;
    j["min_P2"] = sg.min_P2;
    j["conventions"] = {
        {"ambient_signature", "diag(-1, +1, ..., +1), timelike slot first"},
        {"normal", "past-directed unit timelike, tau = <nu, E0> >= 1"},
        {"second_fundamental_form", "A(X, Y) = <nu, ambient_nabla_X Y>, positive on caps u > 0"},
        {"eigenvalue_order", "ascending"},
    };
    std::ofstream out(dir / "manifest.json");
    out << j.dump(2) << "\n";
}

void write_verify_json(const std::filesystem::path& path,
                       const std::vector<ResidualReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) {
        json j;
        j["identity"] = r.identity;
        j["norm_inf"] = r.norm_inf;
        j["norm_l2"] = r.norm_l2;
        j["resolutions"] = r.resolutions;
        if (std::isfinite(r.slope)) j["slope"] = r.slope;
        if (!r.warning.empty()) j["warning"] = r.warning;
        arr.push_back(j);
    }
    std::ofstream out(path);
    out << arr.dump(2) << "\n";
}

void write_estimate_json(const std::filesystem::path& path, const EstimateReport& rep) {
    json j;
    j["psi_min"] = rep.psi_min;
    j["psi_max"] = rep.psi_max;
    j["window"] = {{"ok", rep.window.ok},
                   {"lower_margin", rep.window.lower_margin},
                   {"upper_margin", rep.window.upper_margin}};
    j["mean_curvature"] = {{"bound_C", rep.bound_C},
                           {"max_H2", rep.max_H2},
                           {"ok", rep.mean_curvature_ok}};
    j["admissible"] = rep.admissible;
    j["min_P1"] = rep.min_P1;
    j["min_P2"] = rep.min_P2;
    if (rep.tilt) {
        j["tilt"] = {{"C_H", rep.tilt->C_H},
                     {"diameter", rep.tilt->diameter},
                     {"C_tau", rep.tilt->C_tau},
                     {"max_tau", rep.tilt->max_tau},
                     {"ok", rep.tilt->ok},
                     {"eta_bound", rep.tilt->eta_bound},
                     {"max_abs_eta", rep.tilt->max_abs_eta},
                     {"eta_ok", rep.tilt->eta_ok}};
    }
    j["verdict"] = rep.verdict;
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

void write_solver_history_json(const std::filesystem::path& path, const SolveResult& result) {
    json j;
    j["converged_residual_inf"] = result.residual_inf;
    j["newton_iterations"] = result.newton_iters;
    json hist = json::array();
    for (const auto& rec : result.history) {
        hist.push_back({{"iter", rec.iter},
                        {"residual_inf", rec.residual_inf},
                        {"damping", rec.damping},
                        {"min_P1", rec.min_P1},
                        {"min_P2", rec.min_P2},
                        {"spacelike_margin", rec.spacelike},
                        {"min_F_eig", rec.min_F_eig},
                        {"krylov_iters", rec.krylov_iters},
                        {"forcing", rec.forcing}});
    }
    j["history"] = hist;
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

void write_axisym_outputs(const std::filesystem::path& dir, const AxisymResult& res) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "meridian.csv");
        out << "s,eta,theta,u,kappa_meridian,kappa_orbit\n";
        for (std::size_t i = 0; i < res.s.size(); ++i)
            out << format_double(res.s[i]) << "," << format_double(res.eta[i]) << ","
                << format_double(res.theta[i]) << "," << format_double(res.u_of_s[i]) << ","
                << format_double(res.kappa_meridian[i]) << "," << format_double(res.kappa_orbit[i])
                << "\n";
    }
    json j;
    j["closed"] = res.closed;
    j["closure_defect"] = res.closure_defect;
    if (!res.diagnostic.empty()) j["diagnostic"] = res.diagnostic;
    std::ofstream out(dir / "closure.json");
    out << j.dump(2) << "\n";
}

void write_certificate_json(const std::filesystem::path& path, const Certificate& cert, double r,
                            double rho, int n) {
    json j;
    j["r"] = r;
    j["rho"] = rho;
    j["n"] = n;
    switch (cert.verdict) {
        case Nonexistence::Impossible: j["verdict"] = "IMPOSSIBLE"; break;
        case Nonexistence::Inadmissible: j["verdict"] = "INADMISSIBLE"; break;
        case Nonexistence::NotApplicable: j["verdict"] = "NOT-APPLICABLE"; break;
    }
    j["pair_product"] = cert.pair_product;
    j["message"] = cert.message;
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

void write_manifest(const std::filesystem::path& path, const RunConfig& cfg) {
    json j;
    j["command"] = cfg.command;
    j["n"] = cfg.n;
    j["rho"] = cfg.rho;
    j["resolutions"] = cfg.resolutions;
    j["fd_order"] = cfg.fd_order;
    if (!cfg.preset.empty()) j["preset"] = cfg.preset;
    if (!cfg.input_file.empty()) j["input"] = cfg.input_file;
    if (!cfg.psi_spec.empty()) j["psi"] = cfg.psi_spec;
    if (!cfg.rtarget_spec.empty()) j["R_target"] = cfg.rtarget_spec;
    if (!cfg.init_spec.empty()) j["init"] = cfg.init_spec;
    if (cfg.command == "axisym") j["profile"] = cfg.profile_spec;
    if (cfg.command == "nonexist") j["r"] = cfg.radius;
    j["identities"] = cfg.identities;
    j["normalize"] = cfg.normalize_first;
    j["serial"] = cfg.serial;
    j["outdir"] = cfg.outdir;
    j["solver"] = {{"max_newton", cfg.solver.max_newton},
                   {"tol", cfg.solver.tol},
                   {"adm_margin", cfg.solver.adm_margin},
                   {"spacelike_floor", cfg.solver.spacelike_floor},
                   {"max_krylov", cfg.solver.max_krylov},
                   {"forcing_max", cfg.solver.forcing_max},
                   {"min_step", cfg.solver.min_step}};
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

} // namespace dsg
