#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dsg/axisym.hpp"
#include "dsg/config.hpp"
#include "dsg/estimates.hpp"
#include "dsg/verify.hpp"

namespace dsg {

/// CSV dump of a field at the active nodes: chart, grid index, chart
/// coordinates, then one column per component.  Values use 17 significant
/// digits so identical runs are byte-identical.
void write_field_csv(const std::filesystem::path& path, const Atlas& atlas, const Field& f,
                     const std::vector<std::string>& value_columns);

/// Companion JSON with the atlas parameters.
void write_atlas_header(const std::filesystem::path& path, const Atlas& atlas);

/// Reads a scalar field dumped by write_field_csv; ghost values are restored
/// by synchronization.  The file must match the atlas layout.
Field read_scalar_csv(const std::filesystem::path& path, const Atlas& atlas);

/// One CSV per field plus a manifest with dimensions, radius and the sign
/// conventions of the geometry.
void export_surface_bundle(const std::filesystem::path& dir, const SurfaceGeometry& sg);

void write_verify_json(const std::filesystem::path& path, const std::vector<ResidualReport>& reports);
void write_estimate_json(const std::filesystem::path& path, const EstimateReport& rep);
void write_solver_history_json(const std::filesystem::path& path, const SolveResult& result);
void write_axisym_outputs(const std::filesystem::path& dir, const AxisymResult& res);
void write_certificate_json(const std::filesystem::path& path, const Certificate& cert, double r,
                            double rho, int n);
void write_manifest(const std::filesystem::path& path, const RunConfig& cfg);

std::string format_double(double v); // %.17g

} // namespace dsg
