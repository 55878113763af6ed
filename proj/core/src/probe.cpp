#include "langdist/probe.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "langdist/error.hpp"
#include "langdist/parallel.hpp"
#include "langdist/rng.hpp"

namespace langdist::probe {

Eigen::VectorXd ProbeModel::scores(const Eigen::VectorXd& x) const {
  return weights * x + bias;
}

int ProbeModel::predict_index(const Eigen::VectorXd& x) const {
  Eigen::Index best = 0;
  scores(x).maxCoeff(&best);
  return static_cast<int>(best);
}

const std::string& ProbeModel::predict(const Eigen::VectorXd& x) const {
  return labels[static_cast<std::size_t>(predict_index(x))];
}

namespace {

// Row-wise softmax in place, shifted by the row max.
void softmax_rows(Eigen::MatrixXd& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double mx = s.row(i).maxCoeff();
    s.row(i) = (s.row(i).array() - mx).exp().matrix();
    s.row(i) /= s.row(i).sum();
  }
}

double mean_log_loss(const Eigen::MatrixXd& w, const Eigen::VectorXd& b,
                     const Eigen::MatrixXd& x, const std::vector<int>& y,
                     const std::vector<Eigen::Index>& rows) {
  double total = 0.0;
  for (Eigen::Index r : rows) {
    const Eigen::VectorXd s = w * x.row(r).transpose() + b;
    const double mx = s.maxCoeff();
    const double lse = mx + std::log((s.array() - mx).exp().sum());
    total += lse - s[y[static_cast<std::size_t>(r)]];
  }
  return total / static_cast<double>(rows.size());
}

// Stratified split of row indices into (train, dev); every label keeps at
// least one training row.
void split_dev(const embed::LabeledDataset& ds, double fraction, Rng& rng,
               std::vector<Eigen::Index>& train, std::vector<Eigen::Index>& dev) {
  for (auto rows : ds.class_rows()) {
    if (rows.empty()) continue;
    shuffle(rows, rng);
    std::size_t n_dev = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(rows.size())));
    if (n_dev >= rows.size()) n_dev = rows.size() - 1;
    dev.insert(dev.end(), rows.begin(), rows.begin() + static_cast<long>(n_dev));
    train.insert(train.end(), rows.begin() + static_cast<long>(n_dev), rows.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(dev.begin(), dev.end());
}

}  // namespace

ProbeModel train_probe(const embed::LabeledDataset& train, double l2,
                       const Schedule& sched) {
  if (train.size() == 0) throw DataError("probe training set is empty");
  const auto rows_per_label = train.class_rows();
  std::size_t present = 0;
  for (const auto& r : rows_per_label) present += r.empty() ? 0 : 1;
  if (present < 2) {
    throw DataError("degenerate probing task: fewer than 2 labels present");
  }
  if (!(l2 >= 0.0)) throw ConfigError("l2 strength must be >= 0");
  if (sched.batch_size == 0) throw ConfigError("batch size must be positive");
  if (sched.max_epochs < 1) throw ConfigError("max_epochs must be >= 1");

  Rng rng = substream(sched.seed, "probe");
  std::vector<Eigen::Index> train_rows, dev_rows;
  split_dev(train, sched.dev_fraction, rng, train_rows, dev_rows);
  const std::vector<Eigen::Index>& monitor = dev_rows.empty() ? train_rows : dev_rows;

  const Eigen::Index k = static_cast<Eigen::Index>(train.labels.size());
  const Eigen::Index d = train.dim();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(k, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);

  ProbeModel best;
  best.labels = train.labels;
  best.l2 = l2;
  best.weights = w;
  best.bias = b;
  double best_loss = std::numeric_limits<double>::infinity();
  int stale = 0;
  long long step = 0;

  const std::size_t bs = sched.batch_size;
  Eigen::MatrixXd xb, probs;
  for (int epoch = 1; epoch <= sched.max_epochs; ++epoch) {
    shuffle(train_rows, rng);
    for (std::size_t start = 0; start < train_rows.size(); start += bs) {
      const std::size_t len = std::min(bs, train_rows.size() - start);
      xb.resize(static_cast<Eigen::Index>(len), d);
      for (std::size_t i = 0; i < len; ++i) {
        xb.row(static_cast<Eigen::Index>(i)) = train.features.row(train_rows[start + i]);
      }
      probs = (xb * w.transpose()).rowwise() + b.transpose();
      softmax_rows(probs);
      for (std::size_t i = 0; i < len; ++i) {
        probs(static_cast<Eigen::Index>(i),
              train.label_of[static_cast<std::size_t>(train_rows[start + i])]) -= 1.0;
      }
      ++step;
      const double lr = sched.learning_rate /
                        std::pow(static_cast<double>(step), sched.power_t);
      const double inv = 1.0 / static_cast<double>(len);
      w -= lr * (inv * probs.transpose() * xb + l2 * w);
      b -= lr * inv * probs.colwise().sum().transpose();
    }
    if (!w.allFinite() || !b.allFinite()) {
      throw NumericalError("probe weights diverged; lower the learning rate");
    }
    const double loss = mean_log_loss(w, b, train.features, train.label_of, monitor);
    best.epochs_run = epoch;
    if (loss < best_loss - sched.tol) {
      best_loss = loss;
      best.weights = w;
      best.bias = b;
      best.checkpoint_losses.push_back(loss);
      stale = 0;
    } else if (++stale >= sched.patience) {
      break;
    }
  }
  return best;
}

double probe_accuracy(const ProbeModel& m, const embed::LabeledDataset& eval) {
  if (eval.size() == 0) throw DataError("accuracy of an empty dataset is undefined");
  if (eval.dim() != m.weights.cols()) {
    throw DataError("eval dim " + std::to_string(eval.dim()) +
                    " differs from probe dim " + std::to_string(m.weights.cols()));
  }
  // Map eval label ids onto model class ids.
  std::vector<int> to_model(eval.labels.size(), -1);
  for (std::size_t i = 0; i < eval.labels.size(); ++i) {
    auto it = std::find(m.labels.begin(), m.labels.end(), eval.labels[i]);
    if (it != m.labels.end()) to_model[i] = static_cast<int>(it - m.labels.begin());
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < eval.size(); ++i) {
    const int gold = to_model[static_cast<std::size_t>(eval.label_of[i])];
    if (gold < 0) {
      throw DataError("eval label '" + eval.labels[eval.label_of[i]] +
                      "' unseen by the probe");
    }
    if (m.predict_index(eval.features.row(static_cast<Eigen::Index>(i)).transpose()) ==
        gold) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(eval.size());
}

const std::vector<double>& default_strengths() {
  static const std::vector<double> kStrengths = {1e-9, 1e-8, 1e-7, 1e-6,
                                                 1e-5, 1e-4, 1e-3, 1e-2};
  return kStrengths;
}

void t_interval(const std::vector<double>& values, double& mean, double& lo,
                double& hi) {
  if (values.empty()) throw DataError("confidence interval of no values");
  const double n = static_cast<double>(values.size());
  mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) {
    lo = hi = mean;
    return;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  const boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(dist, 0.975);
  lo = mean - t * se;
  hi = mean + t * se;
}

ProbeReport probe_sweep(const embed::LabeledDataset& train,
                        const embed::LabeledDataset& eval,
                        const std::vector<double>& strengths,
                        const Schedule& sched, std::size_t jobs) {
  if (strengths.empty()) throw ConfigError("probe sweep needs at least one strength");
  ProbeReport r;
  r.strengths = strengths;
  r.accuracies.assign(strengths.size(), 0.0);
  parallel_for(strengths.size(), jobs, [&](std::size_t i) {
    r.accuracies[i] = probe_accuracy(train_probe(train, strengths[i], sched), eval);
  });
  t_interval(r.accuracies, r.mean, r.ci_low, r.ci_high);
  return r;
}

nlohmann::ordered_json to_json(const ProbeModel& m) {
  nlohmann::ordered_json j;
  j["labels"] = m.labels;
  j["dim"] = m.weights.cols();
  j["l2"] = m.l2;
  j["epochs_run"] = m.epochs_run;
  j["checkpoint_losses"] = m.checkpoint_losses;
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.weights.size()));
  for (Eigen::Index i = 0; i < m.weights.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.weights.cols(); ++k) flat.push_back(m.weights(i, k));
  }
  j["weights"] = flat;
  j["bias"] = std::vector<double>(m.bias.data(), m.bias.data() + m.bias.size());
  return j;
}

ProbeModel model_from_json(const nlohmann::json& j) {
  try {
    ProbeModel m;
    m.labels = j.at("labels").get<std::vector<std::string>>();
    const auto dim = j.at("dim").get<Eigen::Index>();
    const auto flat = j.at("weights").get<std::vector<double>>();
    const auto bias = j.at("bias").get<std::vector<double>>();
    const auto k = static_cast<Eigen::Index>(m.labels.size());
    if (static_cast<Eigen::Index>(flat.size()) != k * dim ||
        static_cast<Eigen::Index>(bias.size()) != k) {
      throw FormatError("probe model weights do not match labels x dim");
    }
    m.weights.resize(k, dim);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index c = 0; c < dim; ++c) {
        m.weights(i, c) = flat[static_cast<std::size_t>(i * dim + c)];
      }
    }
    m.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), k);
    m.l2 = j.value("l2", 0.0);
    m.epochs_run = j.value("epochs_run", 0);
    if (j.contains("checkpoint_losses")) {
      m.checkpoint_losses = j.at("checkpoint_losses").get<std::vector<double>>();
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed probe model: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const ProbeReport& r) {
  return {{"strengths", r.strengths},
          {"accuracies", r.accuracies},
          {"mean_accuracy", r.mean},
          {"ci95", {r.ci_low, r.ci_high}}};
}

}  // namespace langdist::probe
