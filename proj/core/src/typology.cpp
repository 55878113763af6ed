#include "langdist/typology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "langdist/error.hpp"
#include "langdist/io.hpp"

namespace langdist::typology {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

// ----------------------------------------------------------- parameters

double jaccard_distance(const ParameterProfile& a, const ParameterProfile& b) {
  if (a.parameters.size() != b.parameters.size()) {
    throw DataError("parameter lists differ in length: " + a.language + " has " +
                    std::to_string(a.parameters.size()) + ", " + b.language +
                    " has " + std::to_string(b.parameters.size()));
  }
  std::size_t both = 0, either = 0;
  for (std::size_t i = 0; i < a.parameters.size(); ++i) {
    if (!a.parameters[i] || !b.parameters[i]) continue;
    const bool x = *a.parameters[i], y = *b.parameters[i];
    both += (x && y) ? 1 : 0;
    either += (x || y) ? 1 : 0;
  }
  if (either == 0) return 0.0;
  return static_cast<double>(either - both) / static_cast<double>(either);
}

std::vector<ParameterProfile> parse_parameter_table(const CsvTable& t) {
  if (t.header.empty() || t.header[0] != "language_code") {
    throw FormatError("parameter table must start with a language_code column");
  }
  std::vector<ParameterProfile> out;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    ParameterProfile p;
    p.language = row[0];
    if (!seen.insert(p.language).second) {
      throw FormatError("duplicate language '" + p.language + "' in parameter table");
    }
    for (std::size_t c = 1; c < row.size(); ++c) {
      const std::string& v = row[c];
      if (v == "1" || v == "+") {
        p.parameters.emplace_back(true);
      } else if (v == "0" || v == "-") {
        p.parameters.emplace_back(false);
      } else if (v == "?" || v.empty()) {
        p.parameters.emplace_back(std::nullopt);
      } else {
        throw FormatError("parameter " + t.header[c] + " of " + p.language +
                          " has value '" + v + "' (expected 1, 0 or ?)");
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ParameterProfile> read_parameter_file(const std::string& path) {
  try {
    return parse_parameter_table(read_csv_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

DistanceMatrix formal_distance_matrix(const std::vector<ParameterProfile>& profiles) {
  DistanceMatrix m;
  const auto n = static_cast<Eigen::Index>(profiles.size());
  m.values = Eigen::MatrixXd::Zero(n, n);
  for (const auto& p : profiles) m.languages.push_back(p.language);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      m.values(i, j) = m.values(j, i) = jaccard_distance(
          profiles[static_cast<std::size_t>(i)], profiles[static_cast<std::size_t>(j)]);
    }
  }
  m.metadata["measure"] = "formal-jaccard";
  return m;
}

// ------------------------------------------------------------------ WALS

const std::vector<std::uint8_t>* WalsProfile::find(const std::string& feature_id) const {
  auto it = features.find(feature_id);
  return it == features.end() ? nullptr : &it->second;
}

const WalsProfile& WalsTable::at(const std::string& code) const {
  auto it = languages.find(code);
  if (it == languages.end()) throw DataError("language '" + code + "' not in WALS table");
  return it->second;
}

namespace {

const char* kWalsColumns[] = {"language_code", "feature_id", "value_index", "value_flag"};

}  // namespace

WalsTable parse_wals_table(const CsvTable& t) {
  std::size_t col[4];
  for (int c = 0; c < 4; ++c) {
    const auto idx = t.column(kWalsColumns[c]);
    if (!idx) throw FormatError(std::string("WALS table lacks column ") + kWalsColumns[c]);
    col[c] = *idx;
  }
  WalsTable w;
  struct Entry {
    std::string lang, feature;
    std::size_t index;
    bool flag;
  };
  std::vector<Entry> entries;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string ctx = "WALS row " + std::to_string(r + 2);
    const long long idx = parse_int(row[col[2]], ctx + " value_index");
    if (idx < 1) throw FormatError(ctx + ": value_index must be >= 1");
    const long long flag = parse_int(row[col[3]], ctx + " value_flag");
    if (flag != 0 && flag != 1) throw FormatError(ctx + ": value_flag must be 0 or 1");
    entries.push_back({row[col[0]], row[col[1]], static_cast<std::size_t>(idx), flag == 1});
    auto& m = w.value_counts[row[col[1]]];
    m = std::max(m, static_cast<std::size_t>(idx));
  }
  for (const auto& e : entries) {
    WalsProfile& p = w.languages[e.lang];
    p.language = e.lang;
    auto& v = p.features[e.feature];
    v.resize(w.value_counts[e.feature], 0);
    if (e.flag) v[e.index - 1] = 1;
  }
  return w;
}

WalsTable read_wals_file(const std::string& path) {
  try {
    return parse_wals_table(read_csv_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::vector<std::string> validate_wals(const CsvTable& t,
                                       const std::vector<std::string>& inventory) {
  std::vector<std::string> problems;
  bool columns_ok = true;
  for (const char* c : kWalsColumns) {
    if (!t.column(c)) {
      problems.push_back(std::string("missing column ") + c);
      columns_ok = false;
    }
  }
  if (!columns_ok) return problems;
  try {
    const WalsTable w = parse_wals_table(t);
    for (const auto& id : inventory) {
      if (!w.value_counts.count(id)) {
        problems.push_back("feature " + id + " absent from WALS table");
      }
    }
    for (const auto& [lang, prof] : w.languages) {
      for (const auto& [fid, v] : prof.features) {
        if (std::none_of(v.begin(), v.end(), [](std::uint8_t x) { return x != 0; })) {
          problems.push_back("feature " + fid + " of " + lang + " has no value set");
        }
      }
    }
  } catch (const Error& e) {
    problems.push_back(e.what());
  }
  return problems;
}

std::optional<double> wals_feature_distance(const WalsProfile& a,
                                            const WalsProfile& b,
                                            const std::string& feature_id) {
  const auto* va = a.find(feature_id);
  const auto* vb = b.find(feature_id);
  if (!va || !vb) return std::nullopt;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < std::max(va->size(), vb->size()); ++i) {
    const double x = i < va->size() ? (*va)[i] : 0.0;
    const double y = i < vb->size() ? (*vb)[i] : 0.0;
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) {
    throw DataError("feature " + feature_id + " is defined but all-zero for " +
                    (na == 0.0 ? a.language : b.language));
  }
  // sqrt of the product keeps identical vectors at exactly 0.
  const double d = 1.0 - dot / std::sqrt(na * nb);
  return std::clamp(d, 0.0, 1.0);
}

std::vector<std::string> default_feature_ids() {
  std::vector<std::string> ids;
  for (const auto& f : default_inventory()) ids.push_back(f.id);
  return ids;
}

std::vector<std::string> read_inventory_file(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<std::string> ids;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line.erase(std::remove_if(line.begin(), line.end(),
                              [](char c) { return c == ' ' || c == '\t' || c == '\r'; }),
               line.end());
    if (!line.empty()) ids.push_back(line);
  }
  if (ids.empty()) throw FormatError(path + ": feature inventory is empty");
  return ids;
}

// ------------------------------------------------------------ imputation

std::string to_string(ImputationMode m) {
  return m == ImputationMode::Mean ? "mean" : "sentinel";
}

ImputationMode parse_imputation_mode(const std::string& s) {
  if (s == "mean") return ImputationMode::Mean;
  if (s == "sentinel") return ImputationMode::Sentinel;
  throw ConfigError("unknown imputation mode '" + s + "' (expected mean or sentinel)");
}

double ImputationTable::fill_for(std::size_t feature) const {
  return mode == ImputationMode::Sentinel ? kSentinel : fill.at(feature);
}

std::optional<std::size_t> ImputationTable::index_of(const std::string& feature_id) const {
  for (std::size_t i = 0; i < feature_ids.size(); ++i) {
    if (feature_ids[i] == feature_id) return i;
  }
  return std::nullopt;
}

FeatureDistanceVector raw_feature_distances(const WalsProfile& a,
                                            const WalsProfile& b,
                                            const std::vector<std::string>& ids) {
  FeatureDistanceVector v;
  v.feature_ids = ids;
  v.values.reserve(ids.size());
  v.imputed.reserve(ids.size());
  for (const auto& id : ids) {
    const auto d = wals_feature_distance(a, b, id);
    v.values.push_back(d ? *d : kNaN);
    v.imputed.push_back(!d.has_value());
  }
  return v;
}

ImputationTable fit_imputation(const std::vector<FeatureDistanceVector>& rows,
                               ImputationMode mode) {
  ImputationTable t;
  t.mode = mode;
  if (rows.empty()) throw DataError("imputation needs at least one training pair");
  t.feature_ids = rows.front().feature_ids;
  const std::size_t n = t.feature_ids.size();
  std::vector<double> sum(n, 0.0);
  std::vector<std::size_t> count(n, 0);
  double grand = 0.0;
  std::size_t grand_n = 0;
  for (const auto& r : rows) {
    if (r.feature_ids != t.feature_ids) {
      throw DataError("training rows use different feature lists");
    }
    for (std::size_t f = 0; f < n; ++f) {
      if (r.imputed[f]) continue;
      sum[f] += r.values[f];
      ++count[f];
      grand += r.values[f];
      ++grand_n;
    }
  }
  const double grand_mean = grand_n ? grand / static_cast<double>(grand_n) : 0.5;
  t.fill.resize(n);
  for (std::size_t f = 0; f < n; ++f) {
    t.fill[f] = count[f] ? sum[f] / static_cast<double>(count[f]) : grand_mean;
  }
  return t;
}

FeatureDistanceVector impute(const FeatureDistanceVector& raw,
                             const ImputationTable& table) {
  FeatureDistanceVector out = raw;
  for (std::size_t f = 0; f < out.feature_ids.size(); ++f) {
    const auto idx = table.index_of(out.feature_ids[f]);
    if (!idx) throw DataError("unknown feature id '" + out.feature_ids[f] + "'");
    if (out.imputed[f] || std::isnan(out.values[f])) {
      out.values[f] = table.fill_for(*idx);
      out.imputed[f] = true;
    }
  }
  return out;
}

FeatureDistanceVector feature_distance_vector(const WalsProfile& a,
                                              const WalsProfile& b,
                                              const std::vector<std::string>& ids,
                                              const ImputationTable& table) {
  for (const auto& id : ids) {
    if (!table.index_of(id)) throw DataError("unknown feature id '" + id + "'");
  }
  return impute(raw_feature_distances(a, b, ids), table);
}

double average_feature_distance(const FeatureDistanceVector& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t f = 0; f < v.values.size(); ++f) {
    if (v.imputed[f]) continue;
    sum += v.values[f];
    ++n;
  }
  if (n == 0) throw DataError("average feature distance of an all-missing vector");
  return sum / static_cast<double>(n);
}

nlohmann::ordered_json to_json(const ImputationTable& t) {
  return {{"mode", to_string(t.mode)}, {"feature_ids", t.feature_ids}, {"fill", t.fill}};
}

ImputationTable imputation_from_json(const nlohmann::json& j) {
  try {
    ImputationTable t;
    t.mode = parse_imputation_mode(j.at("mode").get<std::string>());
    t.feature_ids = j.at("feature_ids").get<std::vector<std::string>>();
    t.fill = j.at("fill").get<std::vector<double>>();
    if (t.fill.size() != t.feature_ids.size()) {
      throw FormatError("imputation table fill/feature length mismatch");
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed imputation table: ") + e.what());
  }
}

std::string feature_pairs_csv(const WalsTable& wals,
                              const std::vector<std::string>& languages,
                              const std::vector<std::string>& ids) {
  std::vector<std::string> header{"language_a", "language_b"};
  header.insert(header.end(), ids.begin(), ids.end());
  std::string out = csv_row(header);
  for (std::size_t i = 0; i < languages.size(); ++i) {
    for (std::size_t j = i + 1; j < languages.size(); ++j) {
      const auto v = raw_feature_distances(wals.at(languages[i]), wals.at(languages[j]), ids);
      std::vector<std::string> row{languages[i], languages[j]};
      for (std::size_t f = 0; f < ids.size(); ++f) {
        row.push_back(v.imputed[f] ? "" : format_double(v.values[f]));
      }
      out += csv_row(row);
    }
  }
  return out;
}

DistanceMatrix average_distance_matrix(const WalsTable& wals,
                                       const std::vector<std::string>& languages,
                                       const std::vector<std::string>& ids) {
  DistanceMatrix m;
  m.languages = languages;
  const auto n = static_cast<Eigen::Index>(languages.size());
  m.values = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto v = raw_feature_distances(wals.at(languages[static_cast<std::size_t>(i)]),
                                           wals.at(languages[static_cast<std::size_t>(j)]), ids);
      const bool any = std::any_of(v.imputed.begin(), v.imputed.end(), [](bool b) { return !b; });
      m.values(i, j) = m.values(j, i) = any ? average_feature_distance(v) : kNaN;
    }
  }
  m.metadata["measure"] = "wals-average-cosine";
  return m;
}

}  // namespace langdist::typology
