#pragma once

#include <iosfwd>

#include "rtil/config.hpp"

namespace rtil {

// Command implementations behind the CLI frontend. Each echoes the resolved
// config into the output directory, writes its artifacts there and returns a
// process exit code (0 on completion; per-cell sweep failures are recorded in
// the result files, not in the exit code).
int cmd_tube(const RunConfig& config, std::ostream& log);
int cmd_train(const RunConfig& config, std::ostream& log);
int cmd_eval(const RunConfig& config, const std::string& checkpoint_path, bool expert_only,
             std::ostream& log);
int cmd_compare(const RunConfig& config, std::ostream& log);

// Resolves the output directory: relative paths are placed under the
// RTIL_OUT_ROOT environment variable when it is set.
std::string resolve_output_dir(const std::string& output_dir);

}  // namespace rtil
