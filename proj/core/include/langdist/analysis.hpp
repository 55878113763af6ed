#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "langdist/csv.hpp"
#include "langdist/distance_matrix.hpp"

namespace langdist::analysis {

// ------------------------------------------------------------- Spearman

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> mid_ranks(const std::vector<double>& v);

struct SpearmanResult {
  bool defined = false;  // false when either side has zero rank variance
  double rho = 0.0;
  double p_value = 1.0;  // two-sided, t approximation with n-2 dof
  std::size_t n = 0;
};

SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y);

// Exact two-sided permutation p-value: fraction of all n! rank permutations
// with |rho| at least the observed one. Limited to n <= 10.
double spearman_exact_p(const std::vector<double>& x, const std::vector<double>& y);

nlohmann::ordered_json to_json(const SpearmanResult& r);

// ------------------------------------------------------------ LAS tables

// las(s, t): LAS of the parser trained on source s, evaluated on target t.
struct TransferTable {
  std::vector<std::string> languages;
  Eigen::MatrixXd las;  // NaN for missing cells
};

// Same CSV layout as a distance matrix: rows are sources, columns targets.
TransferTable transfer_table_from_csv(const std::string& text);
TransferTable read_transfer_table(const std::string& path);

// drop(s, t) = las(s, s) - las(s, t). A missing diagonal is an error; a
// missing off-diagonal cell stays NaN.
DistanceMatrix las_drop(const TransferTable& t);

// ------------------------------------------------------------------ NDCG

// DCG over the first k entries of `order`, normalized by the ideal order's
// DCG; 1 when the ideal DCG is 0.
double ndcg_at_k(const std::vector<std::string>& order,
                 const std::map<std::string, double>& relevance, std::size_t k = 3);

// Relevances of every source for one target: its LAS on the target, shifted
// up by the minimum when any is negative.
std::map<std::string, double> transfer_relevance(const TransferTable& t,
                                                 const std::string& target,
                                                 const std::vector<std::string>& sources);

// ------------------------------------------------------------ clustering

enum class Linkage { Single, Complete, Average };
std::string to_string(Linkage l);
Linkage parse_linkage(const std::string& s);

struct ClusterNode {
  int left = -1, right = -1;  // -1 for leaves
  double height = 0.0;
  std::string label;          // leaves only
  std::vector<std::string> members;  // sorted leaf labels
};

// Leaves occupy the first n nodes in input order; each merge appends one.
struct ClusterTree {
  std::vector<ClusterNode> nodes;
  Linkage linkage = Linkage::Average;

  int root() const { return static_cast<int>(nodes.size()) - 1; }
  std::size_t leaf_count() const { return (nodes.size() + 1) / 2; }
  // (left, right) child node ids in merge order.
  std::vector<std::pair<int, int>> merges() const;
};

// Ties between equal linkage values go to the candidate pair whose
// smallest member labels compare lowest.
ClusterTree agglomerative_cluster(const DistanceMatrix& d, Linkage linkage = Linkage::Average);

// Branch lengths are height differences; leaves sit at height 0.
std::string to_newick(const ClusterTree& t);
nlohmann::ordered_json to_json(const ClusterTree& t);

// ------------------------------------------------------------------- PCA

struct Pca {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;  // feature dim x dims, orthonormal columns
  Eigen::VectorXd explained_variance;
  double total_variance = 0.0;

  Eigen::MatrixXd project(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd inverse(const Eigen::MatrixXd& Z) const;
};

inline constexpr int kDefaultPcaDims = 37;

Pca pca_fit(const Eigen::MatrixXd& X, int dims);

// --------------------------------------------------------------- compare

struct ScatterRow {
  std::string pair;
  double x = 0.0, y = 0.0;
};

struct Comparison {
  SpearmanResult spearman;
  std::vector<ScatterRow> rows;
};

// Spearman over the shared upper triangle, or over one shared row when
// `row` names a language.
Comparison compare_measures(const DistanceMatrix& a, const DistanceMatrix& b,
                            const std::string& row = "");

std::string scatter_csv(const Comparison& c, const std::string& x_name = "x",
                        const std::string& y_name = "y");

}  // namespace langdist::analysis
