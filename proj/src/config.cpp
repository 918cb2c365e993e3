#include "dsg/config.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace dsg {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw config_error("line " + std::to_string(line) + ": expected a number, got '" + v + "'");
    }
}

int parse_int(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw config_error("line " + std::to_string(line) + ": expected an integer, got '" + v + "'");
    }
}

bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw config_error("line " + std::to_string(line) + ": expected a boolean, got '" + v + "'");
}

} // namespace

std::vector<int> parse_resolution_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        try {
            std::size_t pos = 0;
            out.push_back(std::stoi(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw config_error("malformed resolution '" + tok + "'");
        }
    }
    if (out.empty()) throw config_error("empty resolution list");
    return out;
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::string section = "run";
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw config_error("line " + std::to_string(line) + ": unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section != "run" && section != "solver")
                throw config_error("line " + std::to_string(line) + ": unknown section '" + section +
                                   "'");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(line) + ": expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty() || val.empty())
            throw config_error("line " + std::to_string(line) + ": empty key or value");

        if (section == "run") {
            if (key == "command") cfg.command = val;
            else if (key == "n") cfg.n = parse_int(val, line);
            else if (key == "rho") cfg.rho = parse_double(val, line);
            else if (key == "res" || key == "resolutions") cfg.resolutions = parse_resolution_list(val);
            else if (key == "fd_order") cfg.fd_order = parse_int(val, line);
            else if (key == "preset") cfg.preset = val;
            else if (key == "input") cfg.input_file = val;
            else if (key == "psi") cfg.psi_spec = val;
            else if (key == "R_target") cfg.rtarget_spec = val;
            else if (key == "init") cfg.init_spec = val;
            else if (key == "profile") cfg.profile_spec = val;
            else if (key == "r") cfg.radius = parse_double(val, line);
            else if (key == "identities") cfg.identities = val;
            else if (key == "normalize") cfg.normalize_first = parse_bool(val, line);
            else if (key == "serial") cfg.serial = parse_bool(val, line);
            else if (key == "out") cfg.outdir = val;
            else
                throw config_error("line " + std::to_string(line) + ": unknown key '" + key + "'");
        } else { // solver
            if (key == "max_newton") cfg.solver.max_newton = parse_int(val, line);
            else if (key == "tol") cfg.solver.tol = parse_double(val, line);
            else if (key == "adm_margin") cfg.solver.adm_margin = parse_double(val, line);
            else if (key == "spacelike_floor") cfg.solver.spacelike_floor = parse_double(val, line);
            else if (key == "max_krylov") cfg.solver.max_krylov = parse_int(val, line);
            else if (key == "forcing_max") cfg.solver.forcing_max = parse_double(val, line);
            else if (key == "min_step") cfg.solver.min_step = parse_double(val, line);
            else
                throw config_error("line " + std::to_string(line) + ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

void validate_config(const RunConfig& cfg) {
    std::vector<std::string> bad;
    if (cfg.command.empty()) bad.push_back("missing command");
    if (!(cfg.rho > 0.0)) bad.push_back("rho must be positive");
    if (cfg.n < 2) bad.push_back("n must be at least 2");
    if (!std::is_sorted(cfg.resolutions.begin(), cfg.resolutions.end()) ||
        std::adjacent_find(cfg.resolutions.begin(), cfg.resolutions.end()) !=
            cfg.resolutions.end())
        bad.push_back("resolutions must be strictly ascending");
    if (!cfg.preset.empty() && !cfg.input_file.empty())
        bad.push_back("preset and input file are mutually exclusive");
    if (cfg.fd_order != 2 && cfg.fd_order != 4) bad.push_back("fd_order must be 2 or 4");
    if (!(cfg.solver.tol > 0.0)) bad.push_back("solver tol must be positive");
    if (!(cfg.solver.adm_margin > 0.0)) bad.push_back("adm_margin must be positive");
    if (!bad.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& b : bad) msg += "\n  - " + b;
        throw config_error(msg);
    }
}

} // namespace dsg
