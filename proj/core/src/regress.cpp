#include "langdist/regress.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "langdist/csv.hpp"
#include "langdist/error.hpp"
#include "langdist/parallel.hpp"
#include "langdist/rng.hpp"

namespace langdist::regress {

double RegressionTree::predict(const double* x) const {
  int i = 0;
  while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const TreeNode& n = nodes[static_cast<std::size_t>(i)];
    i = x[n.feature] < n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(i)].value;
}

int RegressionTree::depth() const {
  std::function<int(int)> rec = [&](int i) -> int {
    const TreeNode& n = nodes[static_cast<std::size_t>(i)];
    return n.is_leaf() ? 0 : 1 + std::max(rec(n.left), rec(n.right));
  };
  return nodes.empty() ? 0 : rec(0);
}

bool RegressionTree::uses(int feature) const {
  return std::any_of(nodes.begin(), nodes.end(),
                     [&](const TreeNode& n) { return n.feature == feature; });
}

void GbdtConfig::validate() const {
  if (n_estimators < 0) throw ConfigError("n_estimators must be >= 0");
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
}

nlohmann::ordered_json GbdtConfig::to_json() const {
  return {{"n_estimators", n_estimators},
          {"max_depth", max_depth},
          {"learning_rate", learning_rate},
          {"min_samples_leaf", min_samples_leaf}};
}

namespace {

// Per-node accumulators for one split scan.
struct Scan {
  std::size_t count = 0;
  double sum = 0.0;
  double last = 0.0;
};

struct Candidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

struct NodeStats {
  std::size_t count = 0;
  double sum = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
};

// Grows one tree level by level. `order[f]` lists rows sorted by feature f.
// On return `leaf_of[i]` is the leaf holding row i.
RegressionTree grow_tree(const Eigen::MatrixXd& X, const std::vector<double>& r,
                         const std::vector<std::vector<Eigen::Index>>& order,
                         const GbdtConfig& cfg, std::vector<int>& leaf_of) {
  const std::size_t n = r.size();
  const auto nf = static_cast<int>(X.cols());
  RegressionTree tree;
  tree.nodes.emplace_back();
  leaf_of.assign(n, 0);
  std::vector<int> frontier{0};

  for (int level = 0; level < cfg.max_depth && !frontier.empty(); ++level) {
    std::vector<int> slot_of(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < frontier.size(); ++s) {
      slot_of[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);
    }
    std::vector<NodeStats> stats(frontier.size());
    for (std::size_t i = 0; i < n; ++i) {
      const int s = slot_of[static_cast<std::size_t>(leaf_of[i])];
      if (s < 0) continue;
      NodeStats& st = stats[static_cast<std::size_t>(s)];
      ++st.count;
      st.sum += r[i];
      st.lo = std::min(st.lo, r[i]);
      st.hi = std::max(st.hi, r[i]);
    }

    std::vector<Candidate> best(frontier.size());
    std::vector<Scan> scan(frontier.size());
    for (int f = 0; f < nf; ++f) {
      std::fill(scan.begin(), scan.end(), Scan{});
      for (Eigen::Index row : order[static_cast<std::size_t>(f)]) {
        const auto i = static_cast<std::size_t>(row);
        const int s = slot_of[static_cast<std::size_t>(leaf_of[i])];
        if (s < 0) continue;
        const auto su = static_cast<std::size_t>(s);
        const NodeStats& st = stats[su];
        if (st.lo == st.hi) continue;  // residuals already constant
        Scan& sc = scan[su];
        const double x = X(row, f);
        if (sc.count >= cfg.min_samples_leaf && x > sc.last &&
            st.count - sc.count >= cfg.min_samples_leaf) {
          const double nl = static_cast<double>(sc.count);
          const double nr = static_cast<double>(st.count - sc.count);
          const double diff = sc.sum / nl - (st.sum - sc.sum) / nr;
          const double gain = nl * nr / (nl + nr) * diff * diff;
          Candidate& b = best[su];
          // Strictly better by a relative margin, so ties keep the lowest
          // feature index and threshold regardless of summation order.
          if (gain > 0.0 && gain > b.gain * (1.0 + 1e-10)) {
            double thr = 0.5 * (sc.last + x);
            if (!(thr > sc.last)) thr = x;
            b = {f, thr, gain};
          }
        }
        ++sc.count;
        sc.sum += r[i];
        sc.last = x;
      }
    }

    std::vector<int> next;
    for (std::size_t s = 0; s < frontier.size(); ++s) {
      const auto id = static_cast<std::size_t>(frontier[s]);
      tree.nodes[id].samples = stats[s].count;
      if (best[s].feature < 0) continue;
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& node = tree.nodes[id];
      node.feature = best[s].feature;
      node.threshold = best[s].threshold;
      node.gain = best[s].gain;
      node.left = left;
      node.right = left + 1;
      next.push_back(left);
      next.push_back(left + 1);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const TreeNode& node = tree.nodes[static_cast<std::size_t>(leaf_of[i])];
      if (node.is_leaf()) continue;
      leaf_of[i] = X(static_cast<Eigen::Index>(i), node.feature) < node.threshold
                       ? node.left
                       : node.right;
    }
    frontier = std::move(next);
  }

  std::vector<double> sum(tree.nodes.size(), 0.0);
  std::vector<std::size_t> count(tree.nodes.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    sum[static_cast<std::size_t>(leaf_of[i])] += r[i];
    ++count[static_cast<std::size_t>(leaf_of[i])];
  }
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    TreeNode& node = tree.nodes[id];
    if (!node.is_leaf()) continue;
    node.samples = count[id];
    node.value = count[id] ? sum[id] / static_cast<double>(count[id]) : 0.0;
  }
  return tree;
}

double mse(const Eigen::VectorXd& y, const std::vector<double>& pred) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double d = y[i] - pred[static_cast<std::size_t>(i)];
    s += d * d;
  }
  return s / static_cast<double>(y.size());
}

std::vector<std::string> default_ids(Eigen::Index n) {
  std::vector<std::string> ids;
  for (Eigen::Index f = 0; f < n; ++f) ids.push_back("f" + std::to_string(f));
  return ids;
}

}  // namespace

GbdtModel fit_gbdt(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const GbdtConfig& cfg, std::vector<std::string> feature_ids) {
  cfg.validate();
  if (X.rows() != y.size()) {
    throw DataError("feature rows (" + std::to_string(X.rows()) + ") and targets (" +
                    std::to_string(y.size()) + ") differ in count");
  }
  if (y.size() < 2) throw DataError("regressor needs at least 2 training rows");
  if (X.hasNaN()) throw DataError("NaN feature value after imputation");
  if (!X.allFinite() || !y.allFinite()) throw DataError("non-finite training value");
  if (feature_ids.empty()) feature_ids = default_ids(X.cols());
  if (static_cast<Eigen::Index>(feature_ids.size()) != X.cols()) {
    throw DataError("feature id count differs from feature columns");
  }

  const auto n = static_cast<std::size_t>(y.size());
  GbdtModel m;
  m.config = cfg;
  m.learning_rate = cfg.learning_rate;
  m.feature_ids = std::move(feature_ids);
  m.init_value = y.mean();
  if (y.maxCoeff() == y.minCoeff()) m.init_value = y[0];

  std::vector<std::vector<Eigen::Index>> order(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index f = 0; f < X.cols(); ++f) {
    auto& o = order[static_cast<std::size_t>(f)];
    o.resize(n);
    std::iota(o.begin(), o.end(), Eigen::Index{0});
    std::stable_sort(o.begin(), o.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return X(a, f) < X(b, f); });
  }

  std::vector<double> pred(n, m.init_value), resid(n), next(n);
  std::vector<int> leaf_of;
  double current = mse(y, pred);
  m.train_mse.push_back(current);
  for (int t = 0; t < cfg.n_estimators; ++t) {
    for (std::size_t i = 0; i < n; ++i) resid[i] = y[static_cast<Eigen::Index>(i)] - pred[i];
    RegressionTree tree = grow_tree(X, resid, order, cfg, leaf_of);
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = pred[i] + m.learning_rate *
                              tree.nodes[static_cast<std::size_t>(leaf_of[i])].value;
    }
    const double after = mse(y, next);
    if (after > current) {
      // Only reachable through rounding when the tree's gain is at the ulp
      // level; a null tree keeps the training loss exactly unchanged.
      tree.nodes.assign(1, TreeNode{});
      tree.nodes[0].samples = n;
    } else {
      pred.swap(next);
      current = after;
    }
    m.trees.push_back(std::move(tree));
    m.train_mse.push_back(current);
  }
  return m;
}

namespace {

void check_width(const GbdtModel& m, Eigen::Index cols) {
  if (static_cast<std::size_t>(cols) != m.n_features()) {
    throw DataError("expected " + std::to_string(m.n_features()) + " features, got " +
                    std::to_string(cols));
  }
}

double predict_row(const GbdtModel& m, const double* x) {
  double s = m.init_value;
  for (const auto& t : m.trees) s += m.learning_rate * t.predict(x);
  return s;
}

}  // namespace

double predict(const GbdtModel& m, const Eigen::VectorXd& x) {
  check_width(m, x.size());
  Eigen::VectorXd v = x;
  for (Eigen::Index f = 0; f < v.size(); ++f) {
    if (!std::isnan(v[f])) continue;
    if (!m.imputation) {
      throw DataError("missing value for feature " + m.feature_ids[static_cast<std::size_t>(f)] +
                      " and the model has no imputation table");
    }
    const auto idx = m.imputation->index_of(m.feature_ids[static_cast<std::size_t>(f)]);
    if (!idx) throw DataError("unknown feature id '" + m.feature_ids[static_cast<std::size_t>(f)] + "'");
    v[f] = m.imputation->fill_for(*idx);
  }
  return predict_row(m, v.data());
}

Eigen::VectorXd predict_all(const GbdtModel& m, const Eigen::MatrixXd& X) {
  check_width(m, X.cols());
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = predict(m, Eigen::VectorXd(X.row(i).transpose()));
  return out;
}

std::optional<double> r2_score(const Eigen::VectorXd& y, const Eigen::VectorXd& pred) {
  if (y.size() != pred.size()) throw DataError("r2: length mismatch");
  if (y.size() == 0 || y.maxCoeff() == y.minCoeff()) return std::nullopt;
  const double mean = y.mean();
  const double sst = (y.array() - mean).square().sum();
  const double sse = (y - pred).squaredNorm();
  return 1.0 - sse / sst;
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& y, const std::vector<std::size_t>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(rows[i])];
  }
  return out;
}

}  // namespace

CvReport cross_validate_groups(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const GbdtConfig& cfg,
                               const std::vector<std::vector<std::size_t>>& test_groups,
                               const std::vector<std::string>& names,
                               std::size_t jobs) {
  const auto n = static_cast<std::size_t>(y.size());
  if (X.rows() != y.size()) throw DataError("feature rows and targets differ in count");
  CvReport rep;
  rep.r2_per_fold.resize(test_groups.size());
  rep.fold_names = names;
  parallel_for(test_groups.size(), jobs, [&](std::size_t g) {
    std::vector<bool> held(n, false);
    for (std::size_t i : test_groups[g]) {
      if (i >= n) throw DataError("fold row index out of range");
      held[i] = true;
    }
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < n; ++i) {
      if (!held[i]) train.push_back(i);
    }
    if (train.size() < 2 || test_groups[g].empty()) return;
    const GbdtModel m = fit_gbdt(take_rows(X, train), take(y, train), cfg);
    const Eigen::MatrixXd xt = take_rows(X, test_groups[g]);
    rep.r2_per_fold[g] = r2_score(take(y, test_groups[g]), predict_all(m, xt));
  });
  double sum = 0.0;
  std::size_t defined = 0;
  for (const auto& r : rep.r2_per_fold) {
    if (r) {
      sum += *r;
      ++defined;
    } else {
      ++rep.undefined_folds;
    }
  }
  rep.r2_mean = defined ? sum / static_cast<double>(defined)
                        : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

CvReport cross_validate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const GbdtConfig& cfg, std::size_t k, std::uint64_t seed,
                        std::size_t jobs) {
  const auto n = static_cast<std::size_t>(y.size());
  if (k < 2) throw ConfigError("cross-validation needs k >= 2");
  if (n < k) {
    throw DataError("cannot split " + std::to_string(n) + " rows into " +
                    std::to_string(k) + " folds");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = substream(seed, "cv");
  shuffle(perm, rng);
  std::vector<std::vector<std::size_t>> groups(k);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < k; ++j) {
    groups[j].assign(perm.begin() + static_cast<long>(j * n / k),
                     perm.begin() + static_cast<long>((j + 1) * n / k));
    std::sort(groups[j].begin(), groups[j].end());
    names.push_back("fold" + std::to_string(j + 1));
  }
  return cross_validate_groups(X, y, cfg, groups, names, jobs);
}

std::vector<double> impurity_importance(const GbdtModel& m) {
  std::vector<double> imp(m.n_features(), 0.0);
  for (const auto& t : m.trees) {
    for (const auto& node : t.nodes) {
      if (!node.is_leaf()) imp[static_cast<std::size_t>(node.feature)] += node.gain;
    }
  }
  const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
  if (total > 0.0) {
    for (double& v : imp) v /= total;
  }
  return imp;
}

void permutation_importance(const GbdtModel& m, const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& y, int repeats, std::uint64_t seed,
                            ImportanceReport& out, std::size_t jobs) {
  check_width(m, X.cols());
  if (X.rows() != y.size()) throw DataError("feature rows and targets differ in count");
  if (X.rows() < 2) throw DataError("permutation importance needs at least 2 rows");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (X.hasNaN()) throw DataError("NaN feature value after imputation");
  const Eigen::Index n = X.rows();
  const std::size_t nt = m.trees.size();

  // Cached per-tree outputs; permuting a column only changes trees using it.
  Eigen::MatrixXd outputs(n, static_cast<Eigen::Index>(nt));
  Eigen::VectorXd xi(X.cols());  // X is column-major; trees want a contiguous row
  for (Eigen::Index i = 0; i < n; ++i) {
    xi = X.row(i).transpose();
    for (std::size_t t = 0; t < nt; ++t) {
      outputs(i, static_cast<Eigen::Index>(t)) = m.trees[t].predict(xi.data());
    }
  }
  auto sum_row = [&](const Eigen::MatrixXd& o, Eigen::Index i) {
    double s = m.init_value;
    for (std::size_t t = 0; t < nt; ++t) s += m.learning_rate * o(i, static_cast<Eigen::Index>(t));
    return s;
  };
  Eigen::VectorXd base(n);
  for (Eigen::Index i = 0; i < n; ++i) base[i] = sum_row(outputs, i);
  const auto base_r2 = r2_score(y, base);
  if (!base_r2) throw DataError("permutation importance undefined: targets have zero variance");

  const std::size_t nf = m.n_features();
  out.feature_ids = m.feature_ids;
  out.baseline_r2 = *base_r2;
  out.repeats = repeats;
  out.permutation_mean.assign(nf, 0.0);
  out.permutation_std.assign(nf, 0.0);

  parallel_for(nf, jobs, [&](std::size_t f) {
    std::vector<std::size_t> used;
    for (std::size_t t = 0; t < nt; ++t) {
      if (m.trees[t].uses(static_cast<int>(f))) used.push_back(t);
    }
    if (used.empty()) return;
    Eigen::MatrixXd o = outputs;
    Eigen::VectorXd row(X.cols()), pred(n);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::vector<double> drops;
    for (int r = 0; r < repeats; ++r) {
      std::iota(perm.begin(), perm.end(), Eigen::Index{0});
      Rng rng = substream(seed, "permutation",
                          static_cast<std::uint64_t>(f) * static_cast<std::uint64_t>(repeats) +
                              static_cast<std::uint64_t>(r));
      shuffle(perm, rng);
      for (Eigen::Index i = 0; i < n; ++i) {
        row = X.row(i).transpose();
        row[static_cast<Eigen::Index>(f)] = X(perm[static_cast<std::size_t>(i)], static_cast<Eigen::Index>(f));
        for (std::size_t t : used) o(i, static_cast<Eigen::Index>(t)) = m.trees[t].predict(row.data());
        pred[i] = sum_row(o, i);
      }
      drops.push_back(*base_r2 - *r2_score(y, pred));
    }
    const double mean = std::accumulate(drops.begin(), drops.end(), 0.0) /
                        static_cast<double>(drops.size());
    double var = 0.0;
    for (double d : drops) var += (d - mean) * (d - mean);
    out.permutation_mean[f] = mean;
    out.permutation_std[f] = std::sqrt(var / static_cast<double>(drops.size()));
  });
}

ImportanceReport importance_report(const GbdtModel& m, const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& y, int repeats,
                                   std::uint64_t seed, std::size_t jobs) {
  ImportanceReport r;
  r.feature_ids = m.feature_ids;
  r.impurity = impurity_importance(m);
  permutation_importance(m, X, y, repeats, seed, r, jobs);
  return r;
}

std::string importance_csv(const ImportanceReport& r) {
  const bool perm = !r.permutation_mean.empty();
  std::vector<std::size_t> idx(r.feature_ids.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto& key = perm ? r.permutation_mean : r.impurity;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (key[a] != key[b]) return key[a] > key[b];
    return r.feature_ids[a] < r.feature_ids[b];
  });
  std::string out = csv_row({"feature_id", "impurity", "permutation_mean", "permutation_std"});
  for (std::size_t i : idx) {
    out += csv_row({r.feature_ids[i], format_double(r.impurity[i]),
                    perm ? format_double(r.permutation_mean[i]) : "",
                    perm ? format_double(r.permutation_std[i]) : ""});
  }
  return out;
}

TrainingSet build_training_set(const typology::WalsTable& wals,
                               const DistanceMatrix& target,
                               const std::vector<std::string>& feature_ids,
                               typology::ImputationMode mode,
                               const typology::ImputationTable* fixed) {
  TrainingSet t;
  t.feature_ids = feature_ids;
  std::vector<std::string> langs;
  for (const auto& l : target.languages) {
    if (wals.has(l)) langs.push_back(l);
  }
  std::vector<typology::FeatureDistanceVector> raw;
  std::vector<double> ys;
  for (std::size_t i = 0; i < langs.size(); ++i) {
    for (std::size_t j = i + 1; j < langs.size(); ++j) {
      const double dij = target.at(langs[i], langs[j]);
      const double dji = target.at(langs[j], langs[i]);
      double d;
      if (std::isfinite(dij) && std::isfinite(dji)) {
        d = 0.5 * (dij + dji);
      } else if (std::isfinite(dij) || std::isfinite(dji)) {
        d = std::isfinite(dij) ? dij : dji;
      } else {
        continue;
      }
      raw.push_back(typology::raw_feature_distances(wals.at(langs[i]), wals.at(langs[j]),
                                                    feature_ids));
      ys.push_back(d);
      t.language_a.push_back(langs[i]);
      t.language_b.push_back(langs[j]);
    }
  }
  if (raw.size() < 2) {
    throw DataError("only " + std::to_string(raw.size()) +
                    " language pairs are covered by both the WALS table and the target matrix");
  }
  t.imputation = fixed ? *fixed : typology::fit_imputation(raw, mode);
  t.X.resize(static_cast<Eigen::Index>(raw.size()), static_cast<Eigen::Index>(feature_ids.size()));
  t.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  for (std::size_t r = 0; r < raw.size(); ++r) {
    const auto v = typology::impute(raw[r], t.imputation);
    for (std::size_t f = 0; f < feature_ids.size(); ++f) {
      t.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) = v.values[f];
      t.imputed_cells += raw[r].imputed[f] ? 1 : 0;
    }
  }
  return t;
}

std::vector<std::vector<std::size_t>> language_groups(const TrainingSet& t,
                                                      std::vector<std::string>& names) {
  names.clear();
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (const auto* l : {&t.language_a[i], &t.language_b[i]}) {
      if (std::find(names.begin(), names.end(), *l) == names.end()) names.push_back(*l);
    }
  }
  std::sort(names.begin(), names.end());
  std::vector<std::vector<std::size_t>> groups(names.size());
  for (std::size_t g = 0; g < names.size(); ++g) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t.language_a[i] == names[g] || t.language_b[i] == names[g]) groups[g].push_back(i);
    }
  }
  return groups;
}

std::vector<RankedCandidate> select_source(const GbdtModel& m,
                                           const typology::WalsProfile& target,
                                           const std::vector<typology::WalsProfile>& candidates) {
  if (candidates.empty()) throw DataError("source selection needs at least one candidate");
  std::vector<RankedCandidate> out;
  for (const auto& c : candidates) {
    const auto raw = typology::raw_feature_distances(target, c, m.feature_ids);
    Eigen::VectorXd x(static_cast<Eigen::Index>(raw.values.size()));
    RankedCandidate rc;
    rc.language = c.language;
    for (std::size_t f = 0; f < raw.values.size(); ++f) {
      x[static_cast<Eigen::Index>(f)] = raw.values[f];
      rc.imputed += raw.imputed[f] ? 1 : 0;
    }
    rc.predicted = predict(m, x);
    out.push_back(std::move(rc));
  }
  std::sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.predicted != b.predicted) return a.predicted < b.predicted;
    return a.language < b.language;
  });
  return out;
}

// ------------------------------------------------------------------- JSON

namespace {

nlohmann::ordered_json node_json(const RegressionTree& t, int i) {
  const TreeNode& n = t.nodes[static_cast<std::size_t>(i)];
  nlohmann::ordered_json j;
  if (n.is_leaf()) {
    j["value"] = n.value;
    j["samples"] = n.samples;
    return j;
  }
  j["feature"] = n.feature;
  j["threshold"] = n.threshold;
  j["gain"] = n.gain;
  j["samples"] = n.samples;
  j["left"] = node_json(t, n.left);
  j["right"] = node_json(t, n.right);
  return j;
}

int node_from_json(const nlohmann::json& j, RegressionTree& t, int depth, std::size_t nf) {
  if (depth > 64) throw FormatError("regression tree nesting too deep");
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  TreeNode n;
  n.samples = j.value("samples", std::size_t{0});
  if (j.contains("value")) {
    n.value = j.at("value").get<double>();
    if (!std::isfinite(n.value)) throw FormatError("non-finite leaf value");
  } else {
    n.feature = j.at("feature").get<int>();
    n.threshold = j.at("threshold").get<double>();
    n.gain = j.value("gain", 0.0);
    if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= nf) {
      throw FormatError("split feature index out of range");
    }
    if (!std::isfinite(n.threshold)) throw FormatError("non-finite split threshold");
    n.left = node_from_json(j.at("left"), t, depth + 1, nf);
    n.right = node_from_json(j.at("right"), t, depth + 1, nf);
  }
  t.nodes[static_cast<std::size_t>(id)] = n;
  return id;
}

}  // namespace

nlohmann::ordered_json to_json(const GbdtModel& m) {
  nlohmann::ordered_json j;
  j["format"] = "langdist-gbdt";
  j["version"] = 1;
  j["config"] = m.config.to_json();
  j["init_value"] = m.init_value;
  j["learning_rate"] = m.learning_rate;
  j["feature_ids"] = m.feature_ids;
  j["imputation"] = m.imputation ? typology::to_json(*m.imputation) : nlohmann::ordered_json();
  j["train_mse"] = m.train_mse;
  auto trees = nlohmann::ordered_json::array();
  for (const auto& t : m.trees) trees.push_back(node_json(t, 0));
  j["trees"] = trees;
  return j;
}

GbdtModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string()) != "langdist-gbdt") {
      throw FormatError("not a langdist-gbdt model");
    }
    GbdtModel m;
    const auto& c = j.at("config");
    m.config.n_estimators = c.at("n_estimators").get<int>();
    m.config.max_depth = c.at("max_depth").get<int>();
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.min_samples_leaf = c.at("min_samples_leaf").get<std::size_t>();
    m.init_value = j.at("init_value").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.feature_ids = j.at("feature_ids").get<std::vector<std::string>>();
    if (!j.at("imputation").is_null()) m.imputation = typology::imputation_from_json(j.at("imputation"));
    if (j.contains("train_mse")) m.train_mse = j.at("train_mse").get<std::vector<double>>();
    for (const auto& tj : j.at("trees")) {
      RegressionTree t;
      node_from_json(tj, t, 0, m.feature_ids.size());
      m.trees.push_back(std::move(t));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed regressor model: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const CvReport& r) {
  nlohmann::ordered_json j;
  auto folds = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.r2_per_fold.size(); ++i) {
    nlohmann::ordered_json f;
    f["fold"] = i < r.fold_names.size() ? r.fold_names[i] : std::to_string(i + 1);
    f["r2"] = r.r2_per_fold[i] ? nlohmann::ordered_json(*r.r2_per_fold[i]) : nlohmann::ordered_json();
    folds.push_back(f);
  }
  j["folds"] = folds;
  j["r2_mean"] = std::isnan(r.r2_mean) ? nlohmann::ordered_json() : nlohmann::ordered_json(r.r2_mean);
  j["undefined_folds"] = r.undefined_folds;
  return j;
}

}  // namespace langdist::regress
