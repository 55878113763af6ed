#include "common.hpp"

#include "langdist/io.hpp"

namespace langdist::cli {

void Provenance::add(const std::string& path) {
  inputs_.push_back({{"path", path}, {"sha256", file_sha256(path)}});
}

void Provenance::add_all(const std::vector<std::string>& paths) {
  for (const auto& p : paths) add(p);
}

Json envelope(const std::string& command, const Json& config, const Provenance& inputs) {
  Json j;
  j["command"] = command;
  j["config"] = config;
  j["inputs"] = inputs.json();
  return j;
}

void merge_into(Json& dst, const Json& src) {
  for (auto it = src.begin(); it != src.end(); ++it) dst[it.key()] = it.value();
}

void write_json(const std::string& path, const Json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

void write_text(const std::string& path, const std::string& text) {
  write_file_atomic(path, text);
}

void write_matrix(const std::string& path, const DistanceMatrix& m, const Json& meta) {
  write_text(path, to_csv(m));
  write_json(path + ".meta.json", meta);
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::size_t start = 0;
    while (start <= item.size()) {
      std::size_t comma = item.find(',', start);
      if (comma == std::string::npos) comma = item.size();
      if (comma > start) out.push_back(item.substr(start, comma - start));
      start = comma + 1;
    }
  }
  return out;
}

}  // namespace langdist::cli
