#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "undulate/core.hpp"

namespace undulate::cli {

/// Raised by parse_config for --help; what() is the help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ValueType { Real, Integer, Text, Flag };

struct OptionSpec {
  std::string key;  // flag name without the leading dashes; also the config-file key
  ValueType type;
  nlohmann::json fallback;
  std::string help;
  bool positional = false;
};

/// Option table of a subcommand; throws UsageError for unknown subcommands.
const std::vector<OptionSpec>& options_for(const std::string& subcommand);
std::vector<std::string> subcommands();

struct ResolvedConfig {
  std::string subcommand;
  nlohmann::ordered_json values;             // every key of the subcommand
  std::map<std::string, std::string> source;  // "default", "file" or "flag"
  std::optional<std::string> config_file;

  double real(const std::string& key) const;
  long integer(const std::string& key) const;
  std::string text(const std::string& key) const;
  bool flag(const std::string& key) const;
};

/// Resolves defaults < config file < flags. `flags` holds raw flag strings
/// ("true" for switches). Unknown keys, wrong types and out-of-range values
/// raise UsageError naming the key.
ResolvedConfig resolve_config(const std::string& subcommand,
                              const std::map<std::string, std::string>& flags,
                              const std::optional<nlohmann::json>& file);

/// Parses `args` = {subcommand, flags...}, loading --config if given.
ResolvedConfig parse_config(const std::vector<std::string>& args);

/// Parameters from the eps, tau, c, g, a, b, delta keys present in the config.
Parameters parameters_from(const ResolvedConfig& cfg);

/// Worker threads: the threads key if positive, else UNDULATE_THREADS, else 1.
int resolve_threads(const ResolvedConfig& cfg);

std::string sha256_file(const std::string& path);

struct OutputRecord {
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Writes <out-dir>/manifest.json and re-verifies every listed hash.
void write_manifest(const std::string& out_dir, const ResolvedConfig& cfg, const Parameters& p,
                    const nlohmann::ordered_json& grid, int threads, double wall_seconds,
                    const std::vector<std::string>& outputs);

/// Full command-line entry point; returns the process exit code
/// (0 success, 1 I/O failure, 2 usage, 3 numerical failure, 4 acceptance mismatch).
int run(int argc, char** argv);

}  // namespace undulate::cli
