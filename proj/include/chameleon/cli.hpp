#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace chameleon::cli {

/// Process exit codes.
enum ExitCode : int { kPass = 0, kRuntime = 1, kUsage = 2, kCap = 3 };

/// Environment variable holding the default seed.
inline constexpr const char* kSeedEnv = "CHAMELEON_SEED";

/// Everything that determines a run's output. Thread count is deliberately
/// absent: results do not depend on it.
struct RunConfig {
  std::string subcommand;  // e.g. "verify lemma1"
  std::string graph;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::string output;
  nlohmann::ordered_json tolerances = nlohmann::ordered_json::object();

  nlohmann::ordered_json to_json() const;
};

/// Parses a config file: one "key = value" per line, '#' starts a comment
/// line, blank lines are ignored. Keys are long flag names without dashes.
/// Throws std::invalid_argument on a line without '='.
std::vector<std::pair<std::string, std::string>> parse_config_file(std::istream& is);

/// Runs the command line (args excludes the program name). Normal output goes
/// to out unless --output names a file; diagnostics and usage go to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chameleon::cli
