#pragma once

#include "densflow/config.hpp"

#include <ostream>
#include <string>

namespace densflow {

/// Exit statuses of the command-line tool.
enum ExitStatus : int { ExitPass = 0, ExitFail = 1, ExitInconclusive = 2 };

/// Runs one of classify, solve, asymptotics, verify-embeddings and
/// check-assumptions, writing artifacts under cfg.output_dir and a summary to
/// `out`. Library errors are reported on `err` and mapped to
/// ExitInconclusive; an unknown subcommand throws ConfigError.
int dispatch(const std::string& subcommand, const Config& cfg, std::ostream& out,
             std::ostream& err);

} // namespace densflow
