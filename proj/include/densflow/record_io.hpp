#pragma once

#include "densflow/grid.hpp"
#include "densflow/solver.hpp"

#include <map>
#include <span>
#include <string>

namespace densflow {

/// Writes `t,sup,mass,interface` with 17 significant digits.
void write_run_csv(const std::string& path, const RunRecord& record);
/// Reads the samples back; ParseError names the offending line.
std::vector<RunSample> read_run_csv(const std::string& path);

/// Sidecar with the config digest, the flag index, the final-state path and
/// the resolved config echo.
void write_run_json(const std::string& path, const RunRecord& record,
                    const std::map<std::string, std::string>& config_echo = {});
/// Restores a record from its sidecar and the CSV it names next to it.
RunRecord read_run_json(const std::string& path, const std::string& csv_path);

/// `r,u` at cell centres.
void write_field_csv(const std::string& path, const RadialGrid& grid,
                     std::span<const double> field);

std::string format_double(double v);

} // namespace densflow
