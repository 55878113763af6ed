#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "langdist/embedstore.hpp"

namespace langdist::probe {

// Linear multinomial logistic classifier over relation vectors.
struct ProbeModel {
  std::vector<std::string> labels;  // class order, serialized with the model
  Eigen::MatrixXd weights;          // num_labels x dim
  Eigen::VectorXd bias;             // num_labels
  double l2 = 0.0;
  int epochs_run = 0;
  // Dev loss of each accepted checkpoint, strictly decreasing.
  std::vector<double> checkpoint_losses;

  Eigen::VectorXd scores(const Eigen::VectorXd& x) const;
  int predict_index(const Eigen::VectorXd& x) const;
  const std::string& predict(const Eigen::VectorXd& x) const;
};

// SGD schedule. The learning rate decays as lr / t^power_t over update
// steps; training stops after `patience` epochs without a dev-loss
// improvement larger than `tol`, and the best checkpoint is returned.
struct Schedule {
  int max_epochs = 10000;
  int patience = 5;
  double tol = 1e-4;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;
  double power_t = 0.25;
  double dev_fraction = 0.1;
  std::uint64_t seed = 0;
};

ProbeModel train_probe(const embed::LabeledDataset& train, double l2,
                       const Schedule& sched = {});

// Fraction of argmax-correct predictions. Throws DataError on an empty
// dataset or a label the model has never seen.
double probe_accuracy(const ProbeModel& m, const embed::LabeledDataset& eval);

struct ProbeReport {
  std::vector<double> strengths;
  std::vector<double> accuracies;
  double mean = 0.0;
  double ci_low = 0.0;   // 95% t-interval across strengths
  double ci_high = 0.0;
};

// 1e-9, 1e-8, ..., 1e-2.
const std::vector<double>& default_strengths();

ProbeReport probe_sweep(const embed::LabeledDataset& train,
                        const embed::LabeledDataset& eval,
                        const std::vector<double>& strengths,
                        const Schedule& sched = {}, std::size_t jobs = 1);

// Mean and two-sided 95% Student-t interval; a single value collapses the
// interval to a point.
void t_interval(const std::vector<double>& values, double& mean, double& lo,
                double& hi);

nlohmann::ordered_json to_json(const ProbeModel& m);
ProbeModel model_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ProbeReport& r);

}  // namespace langdist::probe
