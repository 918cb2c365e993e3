#pragma once

#include <string>
#include <vector>

#include "dsg/solver.hpp"

namespace dsg {

/// Resolved run configuration shared by the CLI and config files.
struct RunConfig {
    std::string command;
    int n = 2;
    double rho = 1.0;
    std::vector<int> resolutions = {48};
    int fd_order = 4;
    std::string preset;
    std::string input_file;

    std::string psi_spec;      // const:<v> or file:<path>
    std::string rtarget_spec;  // const:<v>
    std::string init_spec;     // const:<c> or file:<path>
    std::string profile_spec = "round:1.1276259652063807";
    double radius = 0.5;       // nonexist
    std::string identities = "all";
    bool normalize_first = true;
    bool serial = false;

    std::string outdir = "out";
    SolverConfig solver;
};

/// Parses `key = value` lines with optional [run] / [solver] sections.
/// Unknown keys and malformed lines are rejected with their line number.
RunConfig parse_config(const std::string& text);

/// Constraint checks shared by the config file and flag paths; throws
/// config_error listing every violation.
void validate_config(const RunConfig& cfg);

std::vector<int> parse_resolution_list(const std::string& text);

} // namespace dsg
