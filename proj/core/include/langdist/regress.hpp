#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "langdist/distance_matrix.hpp"
#include "langdist/typology.hpp"

namespace langdist::regress {

// Flat binary tree. Node 0 is the root; a node with feature < 0 is a leaf.
// Samples go left when x[feature] < threshold.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output
  double gain = 0.0;   // SSE reduction of the split (internal nodes)
  std::size_t samples = 0;

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(const double* x) const;
  int depth() const;
  bool uses(int feature) const;
};

struct GbdtConfig {
  int n_estimators = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  std::size_t min_samples_leaf = 1;

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

struct GbdtModel {
  double init_value = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
  std::vector<std::string> feature_ids;
  std::optional<typology::ImputationTable> imputation;
  GbdtConfig config;
  std::vector<double> train_mse;  // after each stage; [0] is the init-only MSE

  std::size_t n_features() const { return feature_ids.size(); }
};

// X is n x F with no NaN; y has n entries. feature_ids defaults to f0..f{F-1}.
GbdtModel fit_gbdt(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const GbdtConfig& cfg,
                   std::vector<std::string> feature_ids = {});

// NaN entries are filled from the stored imputation table; without a table
// they are an error, as is a wrong feature count.
double predict(const GbdtModel& m, const Eigen::VectorXd& x);
Eigen::VectorXd predict_all(const GbdtModel& m, const Eigen::MatrixXd& X);

// 1 - SSE/SST, or nullopt when y has zero variance.
std::optional<double> r2_score(const Eigen::VectorXd& y, const Eigen::VectorXd& pred);

struct CvReport {
  std::vector<std::optional<double>> r2_per_fold;  // nullopt: undefined fold
  double r2_mean = 0.0;                             // over defined folds
  std::size_t undefined_folds = 0;
  std::vector<std::string> fold_names;
};

// Seeded shuffled k-fold.
CvReport cross_validate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const GbdtConfig& cfg, std::size_t k, std::uint64_t seed,
                        std::size_t jobs = 1);

// One fold per group of held-out row indices; the remaining rows train.
CvReport cross_validate_groups(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const GbdtConfig& cfg,
                               const std::vector<std::vector<std::size_t>>& test_groups,
                               const std::vector<std::string>& names,
                               std::size_t jobs = 1);

struct ImportanceReport {
  std::vector<std::string> feature_ids;
  std::vector<double> impurity;
  std::vector<double> permutation_mean;  // empty until computed
  std::vector<double> permutation_std;
  double baseline_r2 = 0.0;
  int repeats = 0;
};

// Per-feature SSE reduction summed over all splits, normalized to sum 1.
// All zeros when the model has no split.
std::vector<double> impurity_importance(const GbdtModel& m);

// Mean and std over repeats of baseline R^2 minus R^2 with one column
// permuted. Features no tree splits on get exactly 0.
void permutation_importance(const GbdtModel& m, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& y, int repeats, std::uint64_t seed,
                            ImportanceReport& out, std::size_t jobs = 1);

ImportanceReport importance_report(const GbdtModel& m, const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& y, int repeats,
                                   std::uint64_t seed, std::size_t jobs = 1);

// Sorted by permutation importance (impurity when absent), descending, then
// by feature id.
std::string importance_csv(const ImportanceReport& r);

// Feature-distance rows for every unordered pair of languages present in
// both the WALS table and the target matrix with a finite target. The
// imputation table is fitted on these rows unless `fixed` is given.
struct TrainingSet {
  std::vector<std::string> language_a, language_b;
  std::vector<std::string> feature_ids;
  Eigen::MatrixXd X;  // imputed
  Eigen::VectorXd y;
  typology::ImputationTable imputation;
  std::size_t imputed_cells = 0;

  std::size_t size() const { return language_a.size(); }
};

TrainingSet build_training_set(const typology::WalsTable& wals,
                               const DistanceMatrix& target,
                               const std::vector<std::string>& feature_ids,
                               typology::ImputationMode mode,
                               const typology::ImputationTable* fixed = nullptr);

// Leave-one-language-out groups: for each language, the rows involving it.
std::vector<std::vector<std::size_t>> language_groups(const TrainingSet& t,
                                                      std::vector<std::string>& names);

struct RankedCandidate {
  std::string language;
  double predicted = 0.0;
  std::size_t imputed = 0;
};

// Candidates ordered by ascending predicted distance, ties by code.
std::vector<RankedCandidate> select_source(const GbdtModel& m,
                                           const typology::WalsProfile& target,
                                           const std::vector<typology::WalsProfile>& candidates);

nlohmann::ordered_json to_json(const GbdtModel& m);
GbdtModel model_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const CvReport& r);

}  // namespace langdist::regress
