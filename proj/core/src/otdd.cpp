#include "langdist/otdd.hpp"

#include <algorithm>
#include <cmath>

#include "langdist/error.hpp"
#include "langdist/parallel.hpp"

namespace langdist::otdd {

std::string to_string(LabelMode m) {
  return m == LabelMode::EmpiricalSinkhorn ? "empirical-sinkhorn" : "gaussian-bures";
}

std::string to_string(CostMode m) {
  return m == CostMode::Squared ? "squared" : "plain";
}

LabelMode parse_label_mode(const std::string& s) {
  if (s == "empirical-sinkhorn") return LabelMode::EmpiricalSinkhorn;
  if (s == "gaussian-bures") return LabelMode::GaussianBures;
  throw ConfigError("unknown label mode '" + s +
                    "' (expected empirical-sinkhorn or gaussian-bures)");
}

CostMode parse_cost_mode(const std::string& s) {
  if (s == "squared") return CostMode::Squared;
  if (s == "plain") return CostMode::Plain;
  throw ConfigError("unknown cost mode '" + s + "' (expected squared or plain)");
}

void OtddConfig::validate() const {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("p must be >= 1");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("eps must be > 0");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(marginal_tol > 0.0)) throw ConfigError("marginal_tol must be > 0");
  if (!(bures_delta >= 0.0)) throw ConfigError("bures_delta must be >= 0");
  if (block_size < 1) throw ConfigError("block_size must be >= 1");
  if (label_mode == LabelMode::GaussianBures && p != 2.0) {
    throw ConfigError("gaussian-bures label mode is defined for p = 2 only");
  }
}

SinkhornOptions OtddConfig::sinkhorn_options() const {
  return {eps, max_iter, marginal_tol, jobs};
}

nlohmann::ordered_json OtddConfig::to_json() const {
  return {{"p", p},
          {"eps", eps},
          {"max_iter", max_iter},
          {"marginal_tol", marginal_tol},
          {"label_mode", to_string(label_mode)},
          {"cost_mode", to_string(cost_mode)},
          {"bures_delta", bures_delta}};
}

Eigen::MatrixXd euclidean_cost(const Eigen::MatrixXd& xa,
                               const Eigen::MatrixXd& xb, bool squared,
                               Eigen::Index block_size) {
  if (xa.cols() != xb.cols()) {
    throw DataError("feature dims differ: " + std::to_string(xa.cols()) +
                    " vs " + std::to_string(xb.cols()));
  }
  if (block_size < 1) block_size = 1;
  const Eigen::VectorXd na = xa.rowwise().squaredNorm();
  const Eigen::VectorXd nb = xb.rowwise().squaredNorm();
  Eigen::MatrixXd c(xa.rows(), xb.rows());
  for (Eigen::Index r0 = 0; r0 < xa.rows(); r0 += block_size) {
    const Eigen::Index len = std::min(block_size, xa.rows() - r0);
    auto block = c.middleRows(r0, len);
    block.noalias() = -2.0 * xa.middleRows(r0, len) * xb.transpose();
    block.colwise() += na.segment(r0, len);
    block.rowwise() += nb.transpose();
    for (Eigen::Index j = 0; j < block.cols(); ++j) {
      for (Eigen::Index i = 0; i < len; ++i) {
        double& v = block(i, j);
        // The norm expansion cancels badly for near-identical rows; redo
        // those entries directly.
        if (v <= 1e-8 * (na[r0 + i] + nb[j])) {
          v = (xa.row(r0 + i) - xb.row(j)).squaredNorm();
        }
      }
    }
  }
  if (!squared) c = c.cwiseSqrt();
  return c;
}

namespace {

// Total order on point sets used to pick one orientation for symmetric
// computations.
int compare_matrices(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows()) return x.rows() < y.rows() ? -1 : 1;
  if (x.cols() != y.cols()) return x.cols() < y.cols() ? -1 : 1;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      if (x(i, k) != y(i, k)) return x(i, k) < y(i, k) ? -1 : 1;
    }
  }
  return 0;
}

// Label partition with names replaced by first-appearance order, so the
// comparison is blind to label names.
std::vector<int> partition_code(const embed::LabeledDataset& d) {
  std::vector<int> remap(d.labels.size(), -1);
  std::vector<int> out;
  out.reserve(d.size());
  int next = 0;
  for (int l : d.label_of) {
    if (remap[l] < 0) remap[l] = next++;
    out.push_back(remap[l]);
  }
  return out;
}

int compare_datasets(const embed::LabeledDataset& a, const embed::LabeledDataset& b) {
  if (int c = compare_matrices(a.features, b.features)) return c;
  const auto pa = partition_code(a);
  const auto pb = partition_code(b);
  if (pa != pb) return pa < pb ? -1 : 1;
  return 0;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x,
                            const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  }
  return out;
}

Eigen::MatrixXd ground_cost_pow(const Eigen::MatrixXd& xa,
                                const Eigen::MatrixXd& xb, double p,
                                Eigen::Index block) {
  if (p == 2.0) return euclidean_cost(xa, xb, true, block);
  if (p == 1.0) return euclidean_cost(xa, xb, false, block);
  return euclidean_cost(xa, xb, false, block).array().pow(p).matrix();
}

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

Moments moments(const Eigen::MatrixXd& x, double delta) {
  Moments m;
  m.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - m.mean.transpose();
  m.cov = centered.transpose() * centered / static_cast<double>(x.rows());
  m.cov.diagonal().array() += delta;
  return m;
}

double bures_w2(const Moments& a, const Eigen::MatrixXd& a_sqrt, const Moments& b) {
  const Eigen::MatrixXd mid = a_sqrt * b.cov * a_sqrt;
  const double cross = sym_sqrt(0.5 * (mid + mid.transpose())).trace();
  const double w2sq = (a.mean - b.mean).squaredNorm() + a.cov.trace() +
                      b.cov.trace() - 2.0 * cross;
  return std::sqrt(std::max(0.0, w2sq));
}

double empirical_wp(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb,
                    const OtddConfig& cfg, bool& converged) {
  const Eigen::MatrixXd& first = compare_matrices(xa, xb) <= 0 ? xa : xb;
  const Eigen::MatrixXd& second = &first == &xa ? xb : xa;
  const Eigen::MatrixXd c = ground_cost_pow(first, second, cfg.p, cfg.block_size);
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(
      first.rows(), 1.0 / static_cast<double>(first.rows()));
  const Eigen::VectorXd v = Eigen::VectorXd::Constant(
      second.rows(), 1.0 / static_cast<double>(second.rows()));
  SinkhornOptions opts = cfg.sinkhorn_options();
  opts.jobs = 1;
  const auto res = sinkhorn(c, u, v, opts, false);
  converged = res.converged;
  return std::pow(std::max(0.0, res.cost), 1.0 / cfg.p);
}

void require_populated(const embed::LabeledDataset& d,
                       const std::vector<std::vector<Eigen::Index>>& rows) {
  std::string empty;
  for (std::size_t l = 0; l < rows.size(); ++l) {
    if (rows[l].empty()) empty += (empty.empty() ? "" : ", ") + d.labels[l];
  }
  if (!empty.empty()) {
    throw DataError("dataset '" + d.language + "' has no samples for label(s): " +
                    empty);
  }
}

OtddResult oriented_distance(const embed::LabeledDataset& a,
                             const embed::LabeledDataset& b,
                             const OtddConfig& cfg) {
  OtddResult res;
  res.config = cfg;
  res.samples_a = a.size();
  res.samples_b = b.size();
  res.label_matrix = label_distance_matrix(a, b, cfg);
  const Eigen::MatrixXd& w = res.label_matrix.values;

  // Ground cost on samples, d_Z^p (squared mode) or d_Z (plain mode).
  Eigen::MatrixXd c = euclidean_cost(a.features, b.features, true, cfg.block_size);
  const double p = cfg.p;
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    const int lb = b.label_of[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      const double wy = w(a.label_of[static_cast<std::size_t>(i)], lb);
      const double dx2 = c(i, j);
      const double dzp = p == 2.0 ? dx2 + wy * wy
                                  : std::pow(std::sqrt(dx2), p) + std::pow(wy, p);
      c(i, j) = cfg.cost_mode == CostMode::Squared
                    ? dzp
                    : (p == 2.0 ? std::sqrt(dzp) : std::pow(dzp, 1.0 / p));
    }
  }
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(
      c.rows(), 1.0 / static_cast<double>(c.rows()));
  const Eigen::VectorXd v = Eigen::VectorXd::Constant(
      c.cols(), 1.0 / static_cast<double>(c.cols()));
  const auto sk = sinkhorn(c, u, v, cfg.sinkhorn_options(), false);
  res.converged = sk.converged;
  res.iterations = sk.iterations;
  res.marginal_error = sk.marginal_error;
  res.dataset_distance = cfg.cost_mode == CostMode::Squared
                             ? std::pow(std::max(0.0, sk.cost), 1.0 / p)
                             : sk.cost;
  return res;
}

}  // namespace

double gaussian_w2(const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb,
                   double delta) {
  if (xa.rows() == 0 || xb.rows() == 0) throw DataError("empty point set");
  if (xa.cols() != xb.cols()) throw DataError("feature dims differ");
  const Moments ma = moments(xa, delta);
  const Moments mb = moments(xb, delta);
  return bures_w2(ma, sym_sqrt(ma.cov), mb);
}

LabelDistanceMatrix label_distance_matrix(const embed::LabeledDataset& a,
                                          const embed::LabeledDataset& b,
                                          const OtddConfig& cfg) {
  cfg.validate();
  if (a.dim() != b.dim()) {
    throw DataError("feature dims differ: " + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()));
  }
  const auto rows_a = a.class_rows();
  const auto rows_b = b.class_rows();
  require_populated(a, rows_a);
  require_populated(b, rows_b);

  std::vector<Eigen::MatrixXd> xa, xb;
  for (const auto& r : rows_a) xa.push_back(gather_rows(a.features, r));
  for (const auto& r : rows_b) xb.push_back(gather_rows(b.features, r));

  LabelDistanceMatrix out;
  out.labels_a = a.labels;
  out.labels_b = b.labels;
  out.values.resize(static_cast<Eigen::Index>(xa.size()),
                    static_cast<Eigen::Index>(xb.size()));
  const std::size_t na = xa.size();
  const std::size_t nb = xb.size();

  if (cfg.label_mode == LabelMode::GaussianBures) {
    std::vector<Moments> ma(na), mb(nb);
    std::vector<Eigen::MatrixXd> sa(na);
    parallel_for(na, cfg.jobs, [&](std::size_t i) {
      ma[i] = moments(xa[i], cfg.bures_delta);
      sa[i] = sym_sqrt(ma[i].cov);
    });
    parallel_for(nb, cfg.jobs, [&](std::size_t j) {
      mb[j] = moments(xb[j], cfg.bures_delta);
    });
    parallel_for(na * nb, cfg.jobs, [&](std::size_t k) {
      const std::size_t i = k / nb, j = k % nb;
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          bures_w2(ma[i], sa[i], mb[j]);
    });
    return out;
  }

  std::vector<char> converged(na * nb, 1);
  parallel_for(na * nb, cfg.jobs, [&](std::size_t k) {
    const std::size_t i = k / nb, j = k % nb;
    bool ok = true;
    out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        empirical_wp(xa[i], xb[j], cfg, ok);
    converged[k] = ok ? 1 : 0;
  });
  out.unconverged = static_cast<std::size_t>(
      std::count(converged.begin(), converged.end(), 0));
  return out;
}

OtddResult dataset_distance(const embed::LabeledDataset& a,
                            const embed::LabeledDataset& b,
                            const OtddConfig& cfg) {
  cfg.validate();
  if (a.size() == 0 || b.size() == 0) {
    throw DataError("dataset distance needs nonempty datasets");
  }
  if (a.dim() != b.dim()) {
    throw DataError("feature dims differ: " + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()));
  }
  if (compare_datasets(a, b) <= 0) return oriented_distance(a, b, cfg);

  OtddResult r = oriented_distance(b, a, cfg);
  std::swap(r.samples_a, r.samples_b);
  std::swap(r.label_matrix.labels_a, r.label_matrix.labels_b);
  r.label_matrix.values.transposeInPlace();
  return r;
}

nlohmann::ordered_json to_json(const OtddResult& r, const embed::LabeledDataset& a,
                               const embed::LabeledDataset& b) {
  nlohmann::ordered_json j;
  j["language_a"] = a.language;
  j["language_b"] = b.language;
  j["model_id"] = a.model_id;
  if (b.model_id != a.model_id) j["model_id_b"] = b.model_id;
  j["layer"] = a.layer;
  if (b.layer != a.layer) j["layer_b"] = b.layer;
  j["distance"] = r.dataset_distance;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["marginal_error"] = r.marginal_error;
  j["config"] = r.config.to_json();
  j["samples"] = {{"a", r.samples_a}, {"b", r.samples_b}};
  nlohmann::ordered_json values = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < r.label_matrix.values.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index k = 0; k < r.label_matrix.values.cols(); ++k) {
      row.push_back(r.label_matrix.values(i, k));
    }
    values.push_back(std::move(row));
  }
  j["label_matrix"] = {{"labels_a", r.label_matrix.labels_a},
                       {"labels_b", r.label_matrix.labels_b},
                       {"values", std::move(values)},
                       {"unconverged_pairs", r.label_matrix.unconverged}};
  return j;
}

}  // namespace langdist::otdd
