#pragma once

#include <iosfwd>
#include <optional>
#include <string>

namespace mobius_mono::cli {

enum ExitCode : int {
  kExitPass = 0,
  kExitCheckFailed = 1,
  kExitConfig = 2,
  kExitMath = 3,
};

struct CommandOptions {
  std::string config;
  std::optional<std::string> out_dir;
  std::optional<double> tol;
  std::optional<int> max_depth;
};

/// Runs decompose | ball-image | sweep | verify | selftest and returns the
/// process exit code. Diagnostics go to `err`, summaries to `out`.
int run_command(const std::string& command, const CommandOptions& options, std::ostream& out,
                std::ostream& err);

}  // namespace mobius_mono::cli
