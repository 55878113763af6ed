#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "langdist/csv.hpp"
#include "langdist/distance_matrix.hpp"

namespace langdist::typology {

// ------------------------------------------------ formal syntax parameters

// Binary parameter list; nullopt marks an undefined slot.
struct ParameterProfile {
  std::string language;
  std::vector<std::optional<bool>> parameters;
};

// 1 - |a AND b| / |a OR b| over slots defined in both profiles; 0 when the
// union is empty. Throws DataError on a length mismatch.
double jaccard_distance(const ParameterProfile& a, const ParameterProfile& b);

// CSV (language_code, p1, p2, ...) with 1/0 (or +/-) and `?` for undefined.
std::vector<ParameterProfile> parse_parameter_table(const CsvTable& t);
std::vector<ParameterProfile> read_parameter_file(const std::string& path);

DistanceMatrix formal_distance_matrix(const std::vector<ParameterProfile>& profiles);

// ------------------------------------------------------------------ WALS

// Feature id -> multi-hot value vector. An absent feature is missing.
struct WalsProfile {
  std::string language;
  std::map<std::string, std::vector<std::uint8_t>> features;

  const std::vector<std::uint8_t>* find(const std::string& feature_id) const;
};

struct WalsTable {
  std::map<std::string, std::size_t> value_counts;  // feature id -> m
  std::map<std::string, WalsProfile> languages;

  const WalsProfile& at(const std::string& code) const;
  bool has(const std::string& code) const { return languages.count(code) != 0; }
};

// Long-format CSV with columns language_code, feature_id, value_index
// (1-based) and value_flag (0/1). Vectors are sized by the largest
// value_index seen for each feature.
WalsTable parse_wals_table(const CsvTable& t);
WalsTable read_wals_file(const std::string& path);

// Problems with a WALS CSV against an inventory: missing columns and
// inventory features absent from the table.
std::vector<std::string> validate_wals(const CsvTable& t,
                                       const std::vector<std::string>& inventory);

// 1 - cos(v_a, v_b), or nullopt when either language lacks the feature.
// Vectors of unequal length are compared as if zero-padded. Throws
// DataError when a defined vector is all zeros.
std::optional<double> wals_feature_distance(const WalsProfile& a,
                                            const WalsProfile& b,
                                            const std::string& feature_id);

struct FeatureInfo {
  std::string id;
  std::string name;
  int defined_training = 0;  // languages with a value, training set (of 23)
  int defined_all = 0;       // languages with a value, all languages (of 28)
};

// The default 116-feature inventory.
const std::vector<FeatureInfo>& default_inventory();
std::vector<std::string> default_feature_ids();
// One feature id per line; blank lines and `#` comments ignored.
std::vector<std::string> read_inventory_file(const std::string& path);

enum class ImputationMode { Mean, Sentinel };
std::string to_string(ImputationMode m);
ImputationMode parse_imputation_mode(const std::string& s);

inline constexpr double kSentinel = -1.0;

// Fill values for missing per-feature distances. In mean mode each feature
// gets the mean of its defined distances over the training pairs, or the
// grand mean of all defined entries when a feature is never defined.
struct ImputationTable {
  ImputationMode mode = ImputationMode::Mean;
  std::vector<std::string> feature_ids;
  std::vector<double> fill;

  double fill_for(std::size_t feature) const;
  std::optional<std::size_t> index_of(const std::string& feature_id) const;
};

struct FeatureDistanceVector {
  std::vector<std::string> feature_ids;
  std::vector<double> values;  // NaN where missing and not yet imputed
  std::vector<bool> imputed;   // true where the value was missing
};

// Per-feature distances without imputation (missing = NaN, mask true).
FeatureDistanceVector raw_feature_distances(const WalsProfile& a,
                                            const WalsProfile& b,
                                            const std::vector<std::string>& ids);

ImputationTable fit_imputation(const std::vector<FeatureDistanceVector>& rows,
                               ImputationMode mode);

// Fills missing entries from the table. Every id must be in the table.
FeatureDistanceVector impute(const FeatureDistanceVector& raw,
                             const ImputationTable& table);

FeatureDistanceVector feature_distance_vector(const WalsProfile& a,
                                              const WalsProfile& b,
                                              const std::vector<std::string>& ids,
                                              const ImputationTable& table);

// Mean over non-imputed entries. Throws DataError if every entry is missing.
double average_feature_distance(const FeatureDistanceVector& v);

nlohmann::ordered_json to_json(const ImputationTable& t);
ImputationTable imputation_from_json(const nlohmann::json& j);

// One row per unordered language pair, one column per feature; missing
// entries are left empty.
std::string feature_pairs_csv(const WalsTable& wals,
                              const std::vector<std::string>& languages,
                              const std::vector<std::string>& ids);

// Matrix of average_feature_distance; NaN where a pair shares no feature.
DistanceMatrix average_distance_matrix(const WalsTable& wals,
                                       const std::vector<std::string>& languages,
                                       const std::vector<std::string>& ids);

}  // namespace langdist::typology
