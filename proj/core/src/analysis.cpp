#include "langdist/analysis.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "langdist/error.hpp"
#include "langdist/io.hpp"

namespace langdist::analysis {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }
}  // namespace

// ------------------------------------------------------------- Spearman

std::vector<double> mid_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = rank;
    i = j + 1;
  }
  return r;
}

namespace {

void check_pair(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DataError("spearman: inputs differ in length");
  if (x.size() < 3) throw DataError("spearman needs at least 3 pairs");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw DataError("spearman: non-finite value at position " + std::to_string(i));
    }
  }
}

double pearson(const std::vector<double>& a, const std::vector<double>& b, bool& defined) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  defined = saa > 0.0 && sbb > 0.0;
  if (!defined) return kNaN;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace

SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
  check_pair(x, y);
  SpearmanResult r;
  r.n = x.size();
  r.rho = pearson(mid_ranks(x), mid_ranks(y), r.defined);
  if (!r.defined) {
    r.p_value = kNaN;
    return r;
  }
  if (std::abs(r.rho) >= 1.0) {
    r.p_value = 0.0;
    return r;
  }
  const double dof = static_cast<double>(r.n) - 2.0;
  const double t = r.rho * std::sqrt(dof / (1.0 - r.rho * r.rho));
  const boost::math::students_t dist(dof);
  r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
  return r;
}

double spearman_exact_p(const std::vector<double>& x, const std::vector<double>& y) {
  check_pair(x, y);
  if (x.size() > 10) throw ConfigError("exact Spearman p-value is limited to n <= 10");
  std::vector<double> rx = mid_ranks(x), ry = mid_ranks(y);
  const double m = (static_cast<double>(x.size()) + 1.0) / 2.0;
  for (auto& v : rx) v -= m;
  for (auto& v : ry) v -= m;
  auto stat = [&](const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) s += rx[i] * b[i];
    return std::abs(s);
  };
  const double observed = stat(ry) - 1e-9;
  std::vector<std::size_t> perm(ry.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<double> b(ry.size());
  std::size_t hits = 0, total = 0;
  do {
    for (std::size_t i = 0; i < perm.size(); ++i) b[i] = ry[perm[i]];
    hits += stat(b) >= observed ? 1 : 0;
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

nlohmann::ordered_json to_json(const SpearmanResult& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["defined"] = r.defined;
  j["rho"] = r.defined ? nlohmann::ordered_json(r.rho) : nlohmann::ordered_json();
  j["p_value"] = r.defined ? nlohmann::ordered_json(r.p_value) : nlohmann::ordered_json();
  return j;
}

// ------------------------------------------------------------ LAS tables

TransferTable transfer_table_from_csv(const std::string& text) {
  const DistanceMatrix m = distance_matrix_from_csv(text);
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
      const double v = m.values(i, j);
      if (!std::isnan(v) && !(v >= 0.0 && v <= 100.0)) {
        throw DataError("LAS(" + m.languages[static_cast<std::size_t>(i)] + ", " +
                        m.languages[static_cast<std::size_t>(j)] + ") = " + format_double(v) +
                        " is outside [0, 100]");
      }
    }
  }
  return {m.languages, m.values};
}

TransferTable read_transfer_table(const std::string& path) {
  try {
    return transfer_table_from_csv(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

DistanceMatrix las_drop(const TransferTable& t) {
  DistanceMatrix d;
  d.languages = t.languages;
  const auto n = ix(t.languages.size());
  d.values = Eigen::MatrixXd::Constant(n, n, kNaN);
  for (Eigen::Index s = 0; s < n; ++s) {
    const double self = t.las(s, s);
    if (std::isnan(self)) {
      throw DataError("missing in-language LAS for " + t.languages[static_cast<std::size_t>(s)]);
    }
    for (Eigen::Index g = 0; g < n; ++g) {
      d.values(s, g) = s == g ? 0.0 : self - t.las(s, g);
    }
  }
  d.metadata["measure"] = "las-drop";
  return d;
}

// ------------------------------------------------------------------ NDCG

double ndcg_at_k(const std::vector<std::string>& order,
                 const std::map<std::string, double>& relevance, std::size_t k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  std::vector<double> rels;
  std::set<std::string> seen;
  for (const auto& c : order) {
    auto it = relevance.find(c);
    if (it == relevance.end()) throw DataError("no relevance for candidate '" + c + "'");
    if (!seen.insert(c).second) throw DataError("candidate '" + c + "' ranked twice");
    rels.push_back(it->second);
  }
  for (const auto& [c, r] : relevance) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw DataError("relevance of '" + c + "' must be a finite nonnegative number");
    }
  }
  std::vector<double> ideal;
  for (const auto& [c, r] : relevance) ideal.push_back(r);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  if (ideal.empty() || ideal.front() == 0.0) return 1.0;
  // Grades relative to the top one: a uniform rescaling of the relevances
  // leaves these quotients, and so the score, bit-for-bit unchanged.
  const double top = ideal.front();
  auto dcg = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < std::min(k, v.size()); ++i) {
      s += (v[i] / top) / std::log2(static_cast<double>(i) + 2.0);
    }
    return s;
  };
  const double best = dcg(ideal);
  if (best == 0.0) return 1.0;
  return std::min(1.0, dcg(rels) / best);
}

std::map<std::string, double> transfer_relevance(const TransferTable& t,
                                                 const std::string& target,
                                                 const std::vector<std::string>& sources) {
  auto find = [&](const std::string& l) {
    auto it = std::find(t.languages.begin(), t.languages.end(), l);
    if (it == t.languages.end()) throw DataError("language '" + l + "' not in LAS table");
    return ix(static_cast<std::size_t>(it - t.languages.begin()));
  };
  const Eigen::Index tg = find(target);
  std::map<std::string, double> rel;
  double lo = 0.0;
  for (const auto& s : sources) {
    const double v = t.las(find(s), tg);
    if (std::isnan(v)) throw DataError("missing LAS cell (" + s + ", " + target + ")");
    rel[s] = v;
    lo = std::min(lo, v);
  }
  if (lo < 0.0) {
    for (auto& [s, v] : rel) v -= lo;
  }
  return rel;
}

// ------------------------------------------------------------ clustering

std::string to_string(Linkage l) {
  switch (l) {
    case Linkage::Single: return "single";
    case Linkage::Complete: return "complete";
    case Linkage::Average: return "average";
  }
  return "average";
}

Linkage parse_linkage(const std::string& s) {
  if (s == "single") return Linkage::Single;
  if (s == "complete") return Linkage::Complete;
  if (s == "average") return Linkage::Average;
  throw ConfigError("unknown linkage '" + s + "' (expected single, complete or average)");
}

std::vector<std::pair<int, int>> ClusterTree::merges() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& n : nodes) {
    if (n.left >= 0) out.emplace_back(n.left, n.right);
  }
  return out;
}

ClusterTree agglomerative_cluster(const DistanceMatrix& d, Linkage linkage) {
  const std::size_t n = d.languages.size();
  if (n < 2) throw DataError("clustering needs at least 2 languages");
  if (d.values.rows() != ix(n) || d.values.cols() != ix(n)) {
    throw DataError("distance matrix shape does not match its language list");
  }
  if (d.values.hasNaN()) throw DataError("distance matrix has missing entries");
  if (d.asymmetry() > 1e-9) {
    throw DataError("distance matrix is asymmetric by " + format_double(d.asymmetry()));
  }
  if (std::set<std::string>(d.languages.begin(), d.languages.end()).size() != n) {
    throw DataError("duplicate language codes in distance matrix");
  }
  const Eigen::MatrixXd sym = 0.5 * (d.values + d.values.transpose());

  ClusterTree tree;
  tree.linkage = linkage;
  std::vector<std::vector<std::size_t>> members;  // leaf indices sorted by label
  for (std::size_t i = 0; i < n; ++i) {
    ClusterNode leaf;
    leaf.label = d.languages[i];
    leaf.members = {leaf.label};
    tree.nodes.push_back(leaf);
    members.push_back({i});
  }
  auto link = [&](int a, int b) {
    const auto& ma = members[static_cast<std::size_t>(a)];
    const auto& mb = members[static_cast<std::size_t>(b)];
    double acc = linkage == Linkage::Single ? std::numeric_limits<double>::infinity()
                                            : linkage == Linkage::Complete ? -1.0 : 0.0;
    for (std::size_t i : ma) {
      for (std::size_t j : mb) {
        const double v = sym(ix(i), ix(j));
        if (linkage == Linkage::Single) acc = std::min(acc, v);
        else if (linkage == Linkage::Complete) acc = std::max(acc, v);
        else acc += v;
      }
    }
    if (linkage == Linkage::Average) acc /= static_cast<double>(ma.size() * mb.size());
    return acc;
  };
  auto key = [&](int c) -> const std::string& {
    return tree.nodes[static_cast<std::size_t>(c)].members.front();
  };
  // Orient each pair so the first cluster has the smaller key; the linkage
  // sum then runs in the same order for any input permutation.
  auto oriented = [&](int a, int b) { return key(a) < key(b) ? std::pair{a, b} : std::pair{b, a}; };

  std::vector<int> active(n);
  std::iota(active.begin(), active.end(), 0);
  std::map<std::pair<int, int>, double> cache;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto p = oriented(static_cast<int>(i), static_cast<int>(j));
      cache[p] = link(p.first, p.second);
    }
  }
  while (active.size() > 1) {
    std::pair<int, int> best{-1, -1};
    double best_v = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < active.size(); ++x) {
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const auto p = oriented(active[x], active[y]);
        const double v = cache.at(p);
        const bool better =
            best.first < 0 || v < best_v ||
            (v == best_v && std::pair{key(p.first), key(p.second)} <
                                std::pair{key(best.first), key(best.second)});
        if (better) {
          best = p;
          best_v = v;
        }
      }
    }
    ClusterNode merged;
    merged.left = best.first;
    merged.right = best.second;
    const auto& l = tree.nodes[static_cast<std::size_t>(best.first)];
    const auto& r = tree.nodes[static_cast<std::size_t>(best.second)];
    merged.height = std::max({best_v, l.height, r.height});
    merged.members = l.members;
    merged.members.insert(merged.members.end(), r.members.begin(), r.members.end());
    std::sort(merged.members.begin(), merged.members.end());
    std::vector<std::size_t> mm = members[static_cast<std::size_t>(best.first)];
    const auto& mr = members[static_cast<std::size_t>(best.second)];
    mm.insert(mm.end(), mr.begin(), mr.end());
    std::sort(mm.begin(), mm.end(),
              [&](std::size_t a, std::size_t b) { return d.languages[a] < d.languages[b]; });
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(std::move(merged));
    members.push_back(std::move(mm));
    active.erase(std::remove_if(active.begin(), active.end(),
                                [&](int c) { return c == best.first || c == best.second; }),
                 active.end());
    for (int c : active) {
      const auto p = oriented(id, c);
      cache[p] = link(p.first, p.second);
    }
    active.push_back(id);
  }
  return tree;
}

namespace {

std::string newick_label(const std::string& s) {
  if (s.find_first_of("()[]':;, \t") == std::string::npos) return s;
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') q += '\'';
    q += c;
  }
  return q + "'";
}

void newick_rec(const ClusterTree& t, int i, std::string& out) {
  const ClusterNode& n = t.nodes[static_cast<std::size_t>(i)];
  if (n.left < 0) {
    out += newick_label(n.label);
    return;
  }
  out += '(';
  for (int c : {n.left, n.right}) {
    newick_rec(t, c, out);
    out += ':';
    out += format_double(n.height - t.nodes[static_cast<std::size_t>(c)].height);
    if (c == n.left) out += ',';
  }
  out += ')';
}

}  // namespace

std::string to_newick(const ClusterTree& t) {
  std::string out;
  newick_rec(t, t.root(), out);
  return out + ";";
}

nlohmann::ordered_json to_json(const ClusterTree& t) {
  nlohmann::ordered_json j;
  j["linkage"] = to_string(t.linkage);
  auto leaves = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < t.leaf_count(); ++i) leaves.push_back(t.nodes[i].label);
  j["leaves"] = leaves;
  auto merges = nlohmann::ordered_json::array();
  for (const auto& n : t.nodes) {
    if (n.left < 0) continue;
    merges.push_back({{"left", t.nodes[static_cast<std::size_t>(n.left)].members},
                      {"right", t.nodes[static_cast<std::size_t>(n.right)].members},
                      {"height", n.height}});
  }
  j["merges"] = merges;
  j["newick"] = to_newick(t);
  return j;
}

// ------------------------------------------------------------------- PCA

Eigen::MatrixXd Pca::project(const Eigen::MatrixXd& X) const {
  if (X.cols() != mean.size()) throw DataError("PCA input dim does not match the fit");
  return (X.rowwise() - mean.transpose()) * components;
}

Eigen::MatrixXd Pca::inverse(const Eigen::MatrixXd& Z) const {
  if (Z.cols() != components.cols()) throw DataError("PCA code dim does not match the fit");
  return (Z * components.transpose()).rowwise() + mean.transpose();
}

Pca pca_fit(const Eigen::MatrixXd& X, int dims) {
  if (X.rows() < 2) throw DataError("PCA needs at least 2 vectors");
  if (dims < 1 || dims > X.cols()) {
    throw ConfigError("PCA dims must be in [1, " + std::to_string(X.cols()) + "]");
  }
  if (!X.allFinite()) throw DataError("PCA input has non-finite values");
  Pca p;
  p.mean = X.colwise().mean().transpose();
  const Eigen::MatrixXd c = X.rowwise() - p.mean.transpose();
  const Eigen::MatrixXd cov = (c.transpose() * c) / static_cast<double>(X.rows() - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw NumericalError("PCA eigendecomposition failed");
  const Eigen::Index d = X.cols();
  p.components.resize(d, dims);
  p.explained_variance.resize(dims);
  for (int k = 0; k < dims; ++k) {
    const Eigen::Index src = d - 1 - k;  // eigenvalues come ascending
    Eigen::VectorXd v = es.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    p.components.col(k) = v;
    p.explained_variance[k] = std::max(0.0, es.eigenvalues()[src]);
  }
  p.total_variance = std::max(0.0, cov.trace());
  return p;
}

// --------------------------------------------------------------- compare

Comparison compare_measures(const DistanceMatrix& a, const DistanceMatrix& b,
                            const std::string& row) {
  std::vector<std::string> common;
  for (const auto& l : a.languages) {
    if (b.index_of(l)) common.push_back(l);
  }
  Comparison c;
  auto add = [&](const std::string& p, const std::string& q) {
    const double x = a.at(p, q), y = b.at(p, q);
    if (std::isnan(x) || std::isnan(y)) return;
    c.rows.push_back({p + "-" + q, x, y});
  };
  if (row.empty()) {
    for (std::size_t i = 0; i < common.size(); ++i) {
      for (std::size_t j = i + 1; j < common.size(); ++j) add(common[i], common[j]);
    }
  } else {
    if (std::find(common.begin(), common.end(), row) == common.end()) {
      throw DataError("language '" + row + "' is not in both matrices");
    }
    for (const auto& l : common) {
      if (l != row) add(row, l);
    }
  }
  if (c.rows.size() < 3) {
    throw DataError("only " + std::to_string(c.rows.size()) +
                    " common pairs; at least 3 are needed");
  }
  std::vector<double> xs, ys;
  for (const auto& r : c.rows) {
    xs.push_back(r.x);
    ys.push_back(r.y);
  }
  c.spearman = spearman(xs, ys);
  return c;
}

std::string scatter_csv(const Comparison& c, const std::string& x_name,
                        const std::string& y_name) {
  std::string out = csv_row({"pair", x_name, y_name});
  for (const auto& r : c.rows) out += csv_row({r.pair, format_double(r.x), format_double(r.y)});
  return out;
}

}  // namespace langdist::analysis
