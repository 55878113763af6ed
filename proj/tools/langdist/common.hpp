#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "langdist/distance_matrix.hpp"

namespace langdist::cli {

using Json = nlohmann::ordered_json;

// State shared by all subcommands. The selected subcommand's callback stores
// its work in `action`; main runs it after parsing so errors map to exit
// codes in one place.
struct Context {
  std::uint64_t seed = 0;
  std::size_t jobs = 0;  // 0 = all logical cores
  std::function<Json()> action;
  int exit_code = 0;
};

// Adds an option that can also be set through LANGDIST_<NAME> (upper case,
// dashes as underscores). Command-line values win over the environment.
template <typename T>
CLI::Option* tuning(CLI::App* app, const std::string& flag, T& target,
                    const std::string& help) {
  std::string env = "LANGDIST_";
  for (char c : flag.substr(2)) {
    env += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return app->add_option(flag, target, help)->envname(env)->capture_default_str();
}

// Records input files with their SHA-256 digests, in the order given.
class Provenance {
 public:
  void add(const std::string& path);
  void add_all(const std::vector<std::string>& paths);
  Json json() const { return inputs_; }

 private:
  Json inputs_ = Json::array();
};

// Result artifact with the command, its configuration and input digests.
Json envelope(const std::string& command, const Json& config, const Provenance& inputs);

// Copies every top-level key of `src` into `dst`.
void merge_into(Json& dst, const Json& src);

void write_json(const std::string& path, const Json& j);
void write_text(const std::string& path, const std::string& text);

// Writes a CSV matrix plus a sidecar `<path>.meta.json` carrying metadata.
void write_matrix(const std::string& path, const DistanceMatrix& m, const Json& meta);

std::vector<std::string> split_list(const std::vector<std::string>& items);

void register_data_commands(CLI::App& app, Context& ctx);
void register_distance_commands(CLI::App& app, Context& ctx);
void register_analysis_commands(CLI::App& app, Context& ctx);
void register_regress_commands(CLI::App& app, Context& ctx);

}  // namespace langdist::cli
