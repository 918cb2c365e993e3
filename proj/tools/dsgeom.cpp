// Command-line front end: builds surfaces from presets or dumped fields, runs
// the identity verifier, the a priori estimate reports, the nonexistence
// certificate, the sigma_2 solver, the axisymmetric meridian solver and the
// Lorentz normalization, and writes JSON/CSV artifacts.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 hypothesis
// failure, 3 solver non-convergence.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "dsg/axisym.hpp"
#include "dsg/config.hpp"
#include "dsg/estimates.hpp"
#include "dsg/io.hpp"
#include "dsg/presets.hpp"
#include "dsg/solver.hpp"
#include "dsg/verify.hpp"

namespace fs = std::filesystem;
using namespace dsg;

namespace {

Exec exec_mode(const RunConfig& cfg) { return cfg.serial ? Exec::Serial : Exec::Parallel; }

fs::path out_dir(const RunConfig& cfg) {
    if (const char* env = std::getenv("DSGEOM_OUTDIR")) return fs::path(env);
    return fs::path(cfg.outdir);
}

GraphFunction load_graph(const Atlas& atlas, const RunConfig& cfg) {
    GraphFunction gf(atlas, cfg.rho);
    if (!cfg.input_file.empty()) {
        gf.u = read_scalar_csv(cfg.input_file, atlas);
    } else {
        const Preset p = parse_preset(cfg.preset.empty() ? "equator" : cfg.preset, atlas.n);
        preset_field(atlas, p, gf.u);
    }
    return gf;
}

Field load_scalar_spec(const Atlas& atlas, const std::string& spec, const char* what) {
    if (spec.rfind("const:", 0) == 0) {
        Field f(atlas, FieldKind::Scalar);
        f.fill(std::stod(spec.substr(6)));
        return f;
    }
    if (spec.rfind("file:", 0) == 0) return read_scalar_csv(spec.substr(5), atlas);
    throw config_error(std::string(what) + " spec must be const:<value> or file:<path>");
}

NodeRef center_node(const Atlas& atlas) {
    int ij[3] = {atlas.N / 2, atlas.N / 2, atlas.N / 2};
    return NodeRef{0, atlas.node_index(ij)};
}

int run_geometry(const RunConfig& cfg) {
    Atlas atlas(cfg.n, cfg.resolutions.back(), cfg.fd_order);
    const SurfaceGeometry sg = assemble_surface(load_graph(atlas, cfg), exec_mode(cfg));
    const fs::path dir = out_dir(cfg);
    export_surface_bundle(dir, sg);
    write_manifest(dir / "run.json", cfg);
    std::cout << "surface bundle written to " << dir.string() << "\n";
    return 0;
}

int run_verify(const RunConfig& cfg) {
    IdentitySet which = IdentitySet::All;
    if (cfg.identities == "first") which = IdentitySet::First;
    else if (cfg.identities == "second") which = IdentitySet::Second;
    else if (cfg.identities == "gauss-codazzi") which = IdentitySet::GaussCodazzi;
    else if (cfg.identities == "simons") which = IdentitySet::Simons;
    else if (cfg.identities != "all")
        throw config_error("identities must be one of all, first, second, gauss-codazzi, simons");

    const Preset p = parse_preset(cfg.preset.empty() ? "bump:0.3,0.1" : cfg.preset, cfg.n);
    const auto reports = verify_suite(
        [&](const Atlas& atlas, Field& u) { preset_field(atlas, p, u); }, cfg.rho, cfg.n,
        cfg.resolutions, cfg.fd_order, which, exec_mode(cfg));

    const fs::path dir = out_dir(cfg);
    fs::create_directories(dir);
    write_verify_json(dir / "identities.json", reports);
    write_manifest(dir / "run.json", cfg);
    for (const auto& r : reports) {
        std::cout << r.identity << ": inf " << format_double(r.norm_inf) << "  l2 "
                  << format_double(r.norm_l2);
        if (std::isfinite(r.slope)) std::cout << "  slope " << format_double(r.slope);
        if (!r.warning.empty()) std::cout << "  [" << r.warning << "]";
        std::cout << "\n";
    }
    return 0;
}

int run_estimate(const RunConfig& cfg) {
    Atlas atlas(cfg.n, cfg.resolutions.back(), cfg.fd_order);
    GraphFunction gf = load_graph(atlas, cfg);
    const Exec exec = exec_mode(cfg);
    const NodeRef p = center_node(atlas);
    std::optional<NodeRef> basepoint;
    if (cfg.normalize_first) {
        gf = lorentz_normalize(gf, p, exec).u;
        basepoint = p;
    }
    const SurfaceGeometry sg = assemble_surface(gf, exec);
    const EstimateReport rep = evaluate_estimates(sg, basepoint, exec);

    const fs::path dir = out_dir(cfg);
    fs::create_directories(dir);
    write_estimate_json(dir / "estimate.json", rep);
    const MeanCurvatureBound mc = mean_curvature_bound(sg, exec);
    write_field_csv(dir / "psi.csv", atlas, mc.psi, {"psi"});
    write_field_csv(dir / "bound_rhs.csv", atlas, mc.rhs, {"rhs"});
    Field H2(atlas, FieldKind::Scalar);
    for (int c = 0; c < 2; ++c)
        for (std::size_t q = 0; q < atlas.nn; ++q) {
            const double H = sg.H.ptr(c, 0)[q];
            H2.ptr(c, 0)[q] = H * H;
        }
    write_field_csv(dir / "H2.csv", atlas, H2, {"H2"});
    write_manifest(dir / "run.json", cfg);
    std::cout << "window " << (rep.window.ok ? "ok" : "violated") << ", mean-curvature bound "
              << (rep.mean_curvature_ok ? "ok" : "violated");
    if (rep.tilt) std::cout << ", tilt bound " << (rep.tilt->ok ? "ok" : "violated");
    std::cout << ", verdict " << (rep.verdict ? "PASS" : "FAIL") << "\n";
    return rep.verdict ? 0 : 2;
}

int run_nonexist(const RunConfig& cfg) {
    const Certificate cert = nonexistence_certificate(cfg.radius, cfg.rho, cfg.n);
    const fs::path dir = out_dir(cfg);
    fs::create_directories(dir);
    write_certificate_json(dir / "certificate.json", cert, cfg.radius, cfg.rho, cfg.n);
    write_manifest(dir / "run.json", cfg);
    const char* verdict = cert.verdict == Nonexistence::Impossible      ? "IMPOSSIBLE"
                          : cert.verdict == Nonexistence::Inadmissible ? "INADMISSIBLE"
                                                                        : "NOT-APPLICABLE";
    std::cout << verdict << ": " << cert.message << "\n";
    return 0;
}

int run_solve(const RunConfig& cfg) {
    Atlas atlas(cfg.n, cfg.resolutions.back(), cfg.fd_order);
    const Exec exec = exec_mode(cfg);

    Field psi(atlas, FieldKind::Scalar);
    if (!cfg.rtarget_spec.empty()) {
        const Field R = load_scalar_spec(atlas, cfg.rtarget_spec, "R_target");
        psi = psi_from_metric(atlas, R, cfg.rho, cfg.n, exec);
    } else if (!cfg.psi_spec.empty()) {
        psi = load_scalar_spec(atlas, cfg.psi_spec, "psi");
    } else {
        throw config_error("solve needs either psi or R_target");
    }

    GraphFunction u0(atlas, cfg.rho);
    if (cfg.init_spec.empty()) {
        // constant branch of the mean prescription
        Field one(atlas, FieldKind::Scalar);
        one.fill(1.0);
        const double mean = atlas.integrate(psi, exec) / atlas.integrate(one, exec);
        const double arg = cfg.rho * std::sqrt(std::max(0.0, mean / (cfg.n * (cfg.n - 1.0))));
        u0.u.fill(std::atanh(std::min(arg, 0.999)));
    } else if (cfg.init_spec.rfind("const:", 0) == 0) {
        u0.u.fill(std::stod(cfg.init_spec.substr(6)));
    } else if (cfg.init_spec.rfind("file:", 0) == 0) {
        u0.u = read_scalar_csv(cfg.init_spec.substr(5), atlas);
    } else {
        throw config_error("init spec must be const:<value> or file:<path>");
    }

    const SolveResult result = solve_sigma2(psi, cfg.rho, u0, cfg.solver, exec);

    const fs::path dir = out_dir(cfg);
    fs::create_directories(dir);
    write_field_csv(dir / "solution.csv", atlas, result.u.u, {"u"});
    write_atlas_header(dir / "atlas.json", atlas);
    write_solver_history_json(dir / "convergence.json", result);
    write_manifest(dir / "run.json", cfg);
    std::cout << "converged in " << result.newton_iters << " Newton steps, residual "
              << format_double(result.residual_inf) << "\n";
    return 0;
}

int run_axisym(const RunConfig& cfg) {
    if (cfg.profile_spec.rfind("round:", 0) != 0)
        throw config_error("profile spec must be round:<radius>");
    const double r = std::stod(cfg.profile_spec.substr(6));
    if (!(r > 0.0)) throw config_error("profile radius must be positive");
    const AxisymResult res = solve_axisymmetric_isometric(Profile::round_sphere(r), cfg.rho);
    const fs::path dir = out_dir(cfg);
    write_axisym_outputs(dir, res);
    write_manifest(dir / "run.json", cfg);
    if (res.closed)
        std::cout << "meridian closed, defect " << format_double(res.closure_defect) << "\n";
    else
        std::cout << "meridian did not close: " << res.diagnostic << "\n";
    return 0;
}

int run_normalize(const RunConfig& cfg) {
    Atlas atlas(cfg.n, cfg.resolutions.back(), cfg.fd_order);
    const Exec exec = exec_mode(cfg);
    const NodeRef p = center_node(atlas);
    const NormalizeResult nr = lorentz_normalize(load_graph(atlas, cfg), p, exec);
    const SurfaceGeometry sg = assemble_surface(nr.u, exec);

    const fs::path dir = out_dir(cfg);
    fs::create_directories(dir);
    write_field_csv(dir / "normalized_u.csv", atlas, nr.u.u, {"u"});
    write_atlas_header(dir / "atlas.json", atlas);
    nlohmann::json j;
    j["rapidity"] = nr.rapidity;
    j["tau_at_basepoint"] = sg.tau.ptr(p.chart, 0)[p.node];
    j["eta_at_basepoint"] = sg.eta.ptr(p.chart, 0)[p.node];
    std::ofstream out(dir / "normalize.json");
    out << j.dump(2) << "\n";
    write_manifest(dir / "run.json", cfg);
    std::cout << "normalized: tau(p) = " << format_double(sg.tau.ptr(p.chart, 0)[p.node]) << "\n";
    return 0;
}

int dispatch(const RunConfig& cfg) {
    validate_config(cfg);
    if (cfg.command == "geometry") return run_geometry(cfg);
    if (cfg.command == "verify") return run_verify(cfg);
    if (cfg.command == "estimate") return run_estimate(cfg);
    if (cfg.command == "nonexist") return run_nonexist(cfg);
    if (cfg.command == "solve") return run_solve(cfg);
    if (cfg.command == "axisym") return run_axisym(cfg);
    if (cfg.command == "normalize") return run_normalize(cfg);
    throw config_error("unknown command '" + cfg.command + "'");
}

void add_common(CLI::App* app, RunConfig& cfg) {
    app->add_option("--n", cfg.n, "sphere dimension");
    app->add_option("--rho", cfg.rho, "de Sitter radius");
    app->add_option(
        "--res",
        [&cfg](const std::vector<std::string>& v) {
            cfg.resolutions = parse_resolution_list(v.back());
            return true;
        },
        "resolution or comma-separated ascending list");
    app->add_option("--fd-order", cfg.fd_order, "finite-difference order (2 or 4)");
    app->add_option("--preset", cfg.preset, "surface preset");
    app->add_option("--input", cfg.input_file, "scalar field CSV instead of a preset");
    app->add_option("--out", cfg.outdir, "output directory");
    app->add_flag("--serial", cfg.serial, "run all kernels on the serial path");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spacelike graph geometry in scaled de Sitter space"};
    app.require_subcommand(0, 1);

    RunConfig cfg;
    std::string config_path;
    app.add_option("--config", config_path, "run from a key = value configuration file");

    auto* geo = app.add_subcommand("geometry", "assemble and dump a surface bundle");
    add_common(geo, cfg);

    auto* ver = app.add_subcommand("verify", "residuals of the curvature identities");
    add_common(ver, cfg);
    ver->add_option("--identities", cfg.identities, "all|first|second|gauss-codazzi|simons");

    auto* est = app.add_subcommand("estimate", "window, mean-curvature and tilt reports");
    add_common(est, cfg);
    est->add_flag("!--no-normalize", cfg.normalize_first, "skip the Lorentz normalization");

    auto* non = app.add_subcommand("nonexist", "small-sphere nonexistence certificate");
    non->add_option("--r", cfg.radius, "round sphere radius")->required();
    non->add_option("--n", cfg.n, "sphere dimension");
    non->add_option("--rho", cfg.rho, "de Sitter radius");
    non->add_option("--out", cfg.outdir, "output directory");

    auto* sol = app.add_subcommand("solve", "prescribed sigma_2 curvature equation");
    add_common(sol, cfg);
    sol->add_option("--psi", cfg.psi_spec, "prescription: const:<v> or file:<path>");
    sol->add_option("--R-target", cfg.rtarget_spec, "target scalar curvature: const:<v>");
    sol->add_option("--init", cfg.init_spec, "initial iterate: const:<c> or file:<path>");
    sol->add_option("--tol", cfg.solver.tol, "residual tolerance");
    sol->add_option("--max-newton", cfg.solver.max_newton, "Newton iteration cap");

    auto* axi = app.add_subcommand("axisym", "axisymmetric isometric embedding by shooting");
    axi->add_option("--profile", cfg.profile_spec, "round:<radius>");
    axi->add_option("--rho", cfg.rho, "de Sitter radius");
    axi->add_option("--out", cfg.outdir, "output directory");

    auto* nor = app.add_subcommand("normalize", "Lorentz normalization at the chart center");
    add_common(nor, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw config_error("cannot open config file " + config_path);
            std::stringstream ss;
            ss << in.rdbuf();
            cfg = parse_config(ss.str());
            return dispatch(cfg);
        }
        if (geo->parsed()) cfg.command = "geometry";
        else if (ver->parsed()) cfg.command = "verify";
        else if (est->parsed()) cfg.command = "estimate";
        else if (non->parsed()) cfg.command = "nonexist";
        else if (sol->parsed()) cfg.command = "solve";
        else if (axi->parsed()) cfg.command = "axisym";
        else if (nor->parsed()) cfg.command = "normalize";
        else {
            std::cerr << "error: missing command\n" << app.help();
            return 1;
        }
        return dispatch(cfg);
    } catch (const config_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const hypothesis_error& e) {
        std::cerr << "hypothesis failure: " << e.what() << "\n";
        return 2;
    } catch (const nonconvergence_error& e) {
        std::cerr << "solver did not converge: " << e.what() << "\n";
        return 3;
    } catch (const degenerate_error& e) {
        std::cerr << "degenerate surface: " << e.what() << "\n";
        return 2;
    } catch (const reparametrization_error& e) {
        std::cerr << "reparametrization failed: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
