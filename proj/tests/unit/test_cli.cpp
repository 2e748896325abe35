#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "cli.hpp"
#include "undulate/errors.hpp"

using namespace undulate;
using namespace undulate::cli;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& body) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST_CASE("defaults and flags") {
  const ResolvedConfig cfg = parse_config({"sim2d", "--eps", "0.02", "--seed", "7"});
  CHECK(cfg.real("eps") == 0.02);
  CHECK(cfg.integer("seed") == 7);
  CHECK(cfg.integer("n") == 256);
  CHECK(cfg.source.at("eps") == "flag");
  CHECK(cfg.source.at("n") == "default");
  CHECK_FALSE(cfg.flag("exact-phase"));
  CHECK(parse_config({"sim2d", "--exact-phase"}).flag("exact-phase"));
}

TEST_CASE("config file sits between defaults and flags") {
  const fs::path path = write_temp("undulate_cli_test.json", R"({"eps": 0.3, "tau": 1.5, "nx": 16})");
  const ResolvedConfig cfg = parse_config({"sim3d", "--config", path.string(), "--tau", "2.5"});
  CHECK(cfg.real("eps") == 0.3);
  CHECK(cfg.real("tau") == 2.5);
  CHECK(cfg.integer("nx") == 16);
  CHECK(cfg.source.at("eps") == "file");
  CHECK(cfg.source.at("tau") == "flag");
  REQUIRE(cfg.config_file.has_value());
  const Parameters p = parameters_from(cfg);
  CHECK(p.tau == 2.5);
  fs::remove(path);
}

TEST_CASE("usage errors name the key") {
  const auto message = [](const std::function<void()>& f) {
    try {
      f();
    } catch (const UsageError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message([] { parse_config({"sim2d", "--delta", "2.5"}); }).starts_with("delta"));
  CHECK(message([] { parse_config({"walls", "--pattern", "hexagon"}); }).starts_with("pattern"));
  CHECK(message([] { resolve_config("sim3d", {}, nlohmann::json{{"bogus", 1}}); }).starts_with("bogus"));
  CHECK(message([] { resolve_config("sim3d", {}, nlohmann::json{{"nx", "big"}}); }).starts_with("nx"));
  CHECK(message([] { resolve_config("sim3d", {{"eps", "-1"}}, std::nullopt); }).starts_with("eps"));
  CHECK_THROWS_AS(options_for("fly"), UsageError);
  CHECK_THROWS_AS(parse_config({"sim2d", "--help"}), HelpRequested);
}

TEST_CASE("thread count resolution") {
  ResolvedConfig cfg = parse_config({"spectrum", "--threads", "3"});
  CHECK(resolve_threads(cfg) == 3);
  cfg = parse_config({"spectrum"});
  ::setenv("UNDULATE_THREADS", "5", 1);
  CHECK(resolve_threads(cfg) == 5);
  ::unsetenv("UNDULATE_THREADS");
  CHECK(resolve_threads(cfg) == 1);
}

TEST_CASE("sha256 of a known file") {
  const fs::path path = write_temp("undulate_sha_test.txt", "abc");
  CHECK(sha256_file(path.string()) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fs::remove(path);
}

TEST_CASE("every subcommand has an option table") {
  for (const std::string& s : subcommands()) CHECK_FALSE(options_for(s).empty());
}
