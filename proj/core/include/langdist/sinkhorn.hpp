#pragma once

#include <Eigen/Dense>
#include <cstddef>

namespace langdist::otdd {

struct SinkhornOptions {
  double eps = 0.1;
  int max_iter = 10000;
  double marginal_tol = 1e-6;
  std::size_t jobs = 1;
};

struct Coupling {
  Eigen::MatrixXd plan;
  Eigen::VectorXd row_marginal;
  Eigen::VectorXd col_marginal;
};

struct SinkhornResult {
  double cost = 0.0;  // <plan, C>
  bool converged = false;
  int iterations = 0;
  double marginal_error = 0.0;  // max |row sum - a| of the returned plan
  Eigen::VectorXd f;            // dual potentials
  Eigen::VectorXd g;
  Coupling coupling;  // empty when keep_plan is false
};

// Entropic OT in the log domain:
//   f_i = eps log a_i - eps LSE_j((g_j - C_ij) / eps)
//   g_j = eps log b_j - eps LSE_i((f_i - C_ij) / eps)
// Column marginals are exact after every g-update; iteration stops once the
// row-marginal violation is at most marginal_tol or max_iter is reached
// (then converged = false). Marginals must be strictly positive and sum
// to 1. Throws NumericalError if the potentials stop being finite.
SinkhornResult sinkhorn(const Eigen::MatrixXd& cost, const Eigen::VectorXd& a,
                        const Eigen::VectorXd& b, const SinkhornOptions& opts,
                        bool keep_plan = true);

}  // namespace langdist::otdd
