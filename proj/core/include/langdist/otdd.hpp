#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "json.hpp"
#include "langdist/embedstore.hpp"
#include "langdist/sinkhorn.hpp"

namespace langdist::otdd {

enum class LabelMode { EmpiricalSinkhorn, GaussianBures };
enum class CostMode { Squared, Plain };

std::string to_string(LabelMode m);
std::string to_string(CostMode m);
LabelMode parse_label_mode(const std::string& s);
CostMode parse_cost_mode(const std::string& s);

struct OtddConfig {
  double p = 2.0;
  double eps = 0.1;
  int max_iter = 10000;
  double marginal_tol = 1e-6;
  LabelMode label_mode = LabelMode::EmpiricalSinkhorn;
  CostMode cost_mode = CostMode::Squared;
  double bures_delta = 1e-6;  // covariance ridge in gaussian-bures mode
  Eigen::Index block_size = 1024;
  std::size_t jobs = 1;  // 0 = all logical cores

  void validate() const;
  SinkhornOptions sinkhorn_options() const;
  nlohmann::ordered_json to_json() const;
};

// Pairwise Euclidean distances between the rows of xa and xb (or their
// squares), computed in row blocks of `block_size`.
Eigen::MatrixXd euclidean_cost(const Eigen::MatrixXd& xa,
                               const Eigen::MatrixXd& xb, bool squared,
                               Eigen::Index block_size = 1024);

struct LabelDistanceMatrix {
  std::vector<std::string> labels_a;
  std::vector<std::string> labels_b;
  Eigen::MatrixXd values;  // W_p between label-conditional distributions
  std::size_t unconverged = 0;  // inner problems that hit max_iter
};

// W_p between the A-samples of each label and the B-samples of each label.
LabelDistanceMatrix label_distance_matrix(const embed::LabeledDataset& a,
                                          const embed::LabeledDataset& b,
                                          const OtddConfig& cfg);

// Closed-form W_2 between Gaussians fitted to two point sets, with
// covariances regularized by +delta*I.
double gaussian_w2(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb,
                   double delta);

struct OtddResult {
  double dataset_distance = 0.0;
  LabelDistanceMatrix label_matrix;
  OtddConfig config;
  std::size_t samples_a = 0;
  std::size_t samples_b = 0;
  bool converged = false;
  int iterations = 0;
  double marginal_error = 0.0;
};

// Optimal transport distance between the joint (feature, label)
// distributions. The ground metric on samples is
//   d_Z = (|x - x'|^p + W_p(y, y')^p)^(1/p).
// Squared cost mode solves OT on d_Z^p and returns the p-th root; plain
// mode solves on d_Z directly. Marginals are uniform over samples.
// d(A, B) and d(B, A) are computed in one canonical orientation, so the
// result is exactly symmetric.
OtddResult dataset_distance(const embed::LabeledDataset& a,
                            const embed::LabeledDataset& b,
                            const OtddConfig& cfg);

nlohmann::ordered_json to_json(const OtddResult& r,
                               const embed::LabeledDataset& a,
                               const embed::LabeledDataset& b);

}  // namespace langdist::otdd
