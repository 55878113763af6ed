#include "langdist/sinkhorn.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "langdist/error.hpp"
#include "langdist/parallel.hpp"

namespace langdist::otdd {

namespace {

constexpr double kMassTol = 1e-9;
constexpr double kTiny = 1e-250;
constexpr double kHuge = 1e250;
constexpr double kDrift = 1e50;
constexpr double kFlush = -460.0;  // log(1e-200)

void check_marginal(const Eigen::VectorXd& m, Eigen::Index expected,
                    const char* name) {
  if (m.size() != expected) {
    throw ConfigError(std::string("marginal ") + name + " has size " +
                      std::to_string(m.size()) + ", cost matrix expects " +
                      std::to_string(expected));
  }
  if (!m.allFinite() || (m.array() <= 0.0).any()) {
    throw ConfigError(std::string("marginal ") + name +
                      " must be strictly positive and finite");
  }
  if (std::abs(m.sum() - 1.0) > kMassTol) {
    throw ConfigError(std::string("marginal ") + name + " must sum to 1");
  }
}

// Column ranges for the parallel passes.
struct Blocks {
  Eigen::Index n;
  std::size_t count;
  Eigen::Index begin(std::size_t k) const {
    return static_cast<Eigen::Index>(k) * n / static_cast<Eigen::Index>(count);
  }
  Eigen::Index end(std::size_t k) const { return begin(k + 1); }
};

Blocks make_blocks(Eigen::Index n, std::size_t jobs) {
  const std::size_t want = std::max<std::size_t>(1, jobs);
  return {n, static_cast<std::size_t>(std::min<Eigen::Index>(
                 n, static_cast<Eigen::Index>(want)))};
}

// f_i <- eps log a_i - eps LSE_j((g_j - C_ij)/eps), scanning C column-wise.
// The rows are split across jobs; each job owns a row range.
void update_rows(const Eigen::MatrixXd& C, const Eigen::VectorXd& g,
                 const Eigen::VectorXd& log_a, double eps, std::size_t jobs,
                 Eigen::VectorXd& f) {
  const Eigen::Index n = C.rows();
  const Eigen::Index m = C.cols();
  const Blocks blocks = make_blocks(n, jobs);
  parallel_for(blocks.count, jobs, [&](std::size_t k) {
    const Eigen::Index r0 = blocks.begin(k);
    const Eigen::Index len = blocks.end(k) - r0;
    if (len == 0) return;
    Eigen::ArrayXd mx = Eigen::ArrayXd::Constant(
        len, -std::numeric_limits<double>::infinity());
    for (Eigen::Index j = 0; j < m; ++j) {
      mx = mx.max(g[j] - C.col(j).segment(r0, len).array());
    }
    Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(len);
    for (Eigen::Index j = 0; j < m; ++j) {
      sum += ((g[j] - C.col(j).segment(r0, len).array() - mx) / eps).exp();
    }
    f.segment(r0, len) =
        (eps * log_a.segment(r0, len).array() - (mx + eps * sum.log())).matrix();
  });
}

// g_j <- eps log b_j - eps LSE_i((f_i - C_ij)/eps); columns are contiguous.
void update_cols(const Eigen::MatrixXd& C, const Eigen::VectorXd& f,
                 const Eigen::VectorXd& log_b, double eps, std::size_t jobs,
                 Eigen::VectorXd& g) {
  const Blocks blocks = make_blocks(C.cols(), jobs);
  parallel_for(blocks.count, jobs, [&](std::size_t k) {
    for (Eigen::Index j = blocks.begin(k); j < blocks.end(k); ++j) {
      const Eigen::ArrayXd v = f.array() - C.col(j).array();
      const double mx = v.maxCoeff();
      const double s = ((v - mx) / eps).exp().sum();
      g[j] = eps * log_b[j] - (mx + eps * std::log(s));
    }
  });
}

}  // namespace

SinkhornResult sinkhorn(const Eigen::MatrixXd& C, const Eigen::VectorXd& a,
                        const Eigen::VectorXd& b, const SinkhornOptions& opts,
                        bool keep_plan) {
  if (!(opts.eps > 0.0) || !std::isfinite(opts.eps)) {
    throw ConfigError("eps must be positive");
  }
  if (opts.max_iter < 1) throw ConfigError("max_iter must be at least 1");
  if (C.size() == 0) throw ConfigError("empty cost matrix");
  if (!C.allFinite() || (C.array() < 0.0).any()) {
    throw ConfigError("cost matrix entries must be finite and nonnegative");
  }
  check_marginal(a, C.rows(), "a");
  check_marginal(b, C.cols(), "b");

  const double eps = opts.eps;
  const std::size_t jobs = opts.jobs == 0 ? default_jobs() : opts.jobs;
  const Eigen::VectorXd log_a = a.array().log().matrix();
  const Eigen::VectorXd log_b = b.array().log().matrix();

  SinkhornResult res;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(C.rows());
  Eigen::VectorXd g = Eigen::VectorXd::Zero(C.cols());
  Eigen::VectorXd f_next(C.rows());

  // Stabilized scaling iterations: the plan is diag(u) K diag(v) with
  // K_ij = exp((fh_i + gh_j - C_ij) / eps). Each step is a pair of
  // matrix-vector products; u and v are folded back into the potentials
  // (and K rebuilt) when they drift far from 1 or a product underflows.
  const Eigen::Index n = C.rows();
  const Eigen::Index m = C.cols();
  const Blocks row_blocks = make_blocks(n, jobs);
  const Blocks col_blocks = make_blocks(m, jobs);
  Eigen::MatrixXd K(n, m);
  Eigen::VectorXd u = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m);
  Eigen::VectorXd Kv(n), Ktu(m);

  auto rebuild = [&] {
    parallel_for(col_blocks.count, jobs, [&](std::size_t k) {
      for (Eigen::Index j = col_blocks.begin(k); j < col_blocks.end(k); ++j) {
        // Flush entries that would only add subnormal arithmetic (slow) and
        // cannot matter while u and v stay within kDrift of 1.
        const Eigen::ArrayXd z = (f.array() + g[j] - C.col(j).array()) / eps;
        K.col(j) = (z < kFlush).select(0.0, z.exp()).matrix();
      }
    });
  };
  auto absorb = [&] {
    f.array() += eps * u.array().log();
    g.array() += eps * v.array().log();
    u.setOnes();
    v.setOnes();
  };
  auto mul_v = [&] {
    parallel_for(row_blocks.count, jobs, [&](std::size_t k) {
      const Eigen::Index r0 = row_blocks.begin(k);
      const Eigen::Index len = row_blocks.end(k) - r0;
      if (len > 0) Kv.segment(r0, len).noalias() = K.middleRows(r0, len) * v;
    });
  };
  auto mul_u = [&] {
    parallel_for(col_blocks.count, jobs, [&](std::size_t k) {
      const Eigen::Index c0 = col_blocks.begin(k);
      const Eigen::Index len = col_blocks.end(k) - c0;
      if (len > 0) Ktu.segment(c0, len).noalias() = K.middleCols(c0, len).transpose() * u;
    });
  };
  // Products too small or large to divide by safely.
  auto unsafe = [](const Eigen::VectorXd& x) {
    return !x.allFinite() || x.minCoeff() < kTiny || x.maxCoeff() > kHuge;
  };
  auto drifted = [&] {
    return u.minCoeff() < 1.0 / kDrift || u.maxCoeff() > kDrift ||
           v.minCoeff() < 1.0 / kDrift || v.maxCoeff() > kDrift;
  };

  // First step in the log domain so K starts well scaled.
  update_rows(C, g, log_a, eps, jobs, f);
  update_cols(C, f, log_b, eps, jobs, g);
  rebuild();
  res.iterations = 1;
  for (;;) {
    // The row update also yields the row sums of the current plan.
    mul_v();
    if (unsafe(Kv)) {
      absorb();
      update_rows(C, g, log_a, eps, jobs, f_next);
      if (!f_next.allFinite()) {
        throw NumericalError("Sinkhorn potentials became non-finite at eps=" +
                             std::to_string(eps) + "; try a larger eps");
      }
      // rowsum_i = a_i exp((f_i - f_next_i) / eps)
      res.marginal_error =
          (a.array() * (((f - f_next) / eps).array().exp() - 1.0)).abs().maxCoeff();
      if (res.marginal_error <= opts.marginal_tol || res.iterations >= opts.max_iter) break;
      f.swap(f_next);
      rebuild();
    } else {
      res.marginal_error = (u.array() * Kv.array() - a.array()).abs().maxCoeff();
      if (res.marginal_error <= opts.marginal_tol || res.iterations >= opts.max_iter) break;
      u = (a.array() / Kv.array()).matrix();
    }
    mul_u();
    if (unsafe(Ktu)) {
      absorb();
      update_cols(C, f, log_b, eps, jobs, g);
      rebuild();
    } else {
      v = (b.array() / Ktu.array()).matrix();
      if (drifted()) {
        absorb();
        rebuild();
      }
    }
    ++res.iterations;
  }
  res.converged = res.marginal_error <= opts.marginal_tol;
  absorb();
  if (!f.allFinite() || !g.allFinite()) {
    throw NumericalError("Sinkhorn potentials became non-finite at eps=" +
                         std::to_string(eps) + "; try a larger eps");
  }

  double cost = 0.0;
  if (keep_plan) {
    res.coupling.plan.resize(C.rows(), C.cols());
  }
  for (Eigen::Index j = 0; j < C.cols(); ++j) {
    const Eigen::ArrayXd col = ((f.array() + g[j] - C.col(j).array()) / eps).exp();
    cost += (col * C.col(j).array()).sum();
    if (keep_plan) res.coupling.plan.col(j) = col.matrix();
  }
  if (!std::isfinite(cost)) {
    throw NumericalError("Sinkhorn produced a non-finite cost at eps=" +
                         std::to_string(eps) + "; try a larger eps");
  }
  if (keep_plan) {
    res.coupling.row_marginal = a;
    res.coupling.col_marginal = b;
  }
  res.cost = cost;
  res.f = std::move(f);
  res.g = std::move(g);
  return res;
}

}  // namespace langdist::otdd
