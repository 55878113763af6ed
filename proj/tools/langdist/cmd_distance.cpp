#include <memory>
#include <set>

#include "common.hpp"
#include "langdist/embedstore.hpp"
#include "langdist/error.hpp"
#include "langdist/otdd.hpp"
#include "langdist/parallel.hpp"
#include "langdist/probe.hpp"
#include "langdist/typology.hpp"

namespace langdist::cli {

namespace {

struct OtddFlags {
  otdd::OtddConfig cfg;
  std::string label_mode = "empirical-sinkhorn";
  std::string cost_mode = "squared";
};

void add_otdd_flags(CLI::App* sub, OtddFlags& f) {
  tuning(sub, "--p", f.cfg.p, "Wasserstein order");
  tuning(sub, "--eps", f.cfg.eps, "Entropic regularization");
  tuning(sub, "--max-iter", f.cfg.max_iter, "Sinkhorn iteration cap");
  tuning(sub, "--marginal-tol", f.cfg.marginal_tol, "Sinkhorn marginal tolerance");
  tuning(sub, "--label-mode", f.label_mode, "Label distance: empirical-sinkhorn or gaussian-bures");
  tuning(sub, "--cost-mode", f.cost_mode, "squared (OT on d^p, then p-th root) or plain");
  tuning(sub, "--bures-delta", f.cfg.bures_delta, "Covariance ridge in gaussian-bures mode");
}

otdd::OtddConfig resolve(const OtddFlags& f, std::size_t jobs) {
  otdd::OtddConfig cfg = f.cfg;
  cfg.label_mode = otdd::parse_label_mode(f.label_mode);
  cfg.cost_mode = otdd::parse_cost_mode(f.cost_mode);
  cfg.jobs = jobs;
  cfg.validate();
  return cfg;
}

void add_otdd(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string a, b, out;
    OtddFlags flags;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("otdd", "Optimal transport distance between two labeled datasets");
  sub->add_option("--a", o->a, "First LDDS dataset")->required()->check(CLI::ExistingFile);
  sub->add_option("--b", o->b, "Second LDDS dataset")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o->out, "Write the full result (with label matrix) here");
  add_otdd_flags(sub, o->flags);
  sub->callback([&ctx, o] {
    ctx.action = [&ctx, o] {
      const auto cfg = resolve(o->flags, ctx.jobs);
      const auto a = embed::read_dataset_file(o->a);
      const auto b = embed::read_dataset_file(o->b);
      const auto r = otdd::dataset_distance(a, b, cfg);
      Provenance in;
      in.add(o->a);
      in.add(o->b);
      Json j;
      j["command"] = "otdd";
      merge_into(j, otdd::to_json(r, a, b));
      j["inputs"] = in.json();
      if (!o->out.empty()) write_json(o->out, j);
      j.erase("label_matrix");
      j["unconverged_label_pairs"] = r.label_matrix.unconverged;
      return j;
    };
  });
}

void add_distance_matrix(CLI::App& app, Context& ctx) {
  struct Opts {
    std::vector<std::string> datasets;
    std::string out;
    OtddFlags flags;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("distance-matrix", "OTDD over every pair of datasets");
  sub->add_option("--datasets", o->datasets, "LDDS datasets, one per language")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", o->out, "Matrix CSV to write")->required();
  add_otdd_flags(sub, o->flags);
  sub->callback([&ctx, o] {
    ctx.action = [&ctx, o] {
      if (o->datasets.size() < 2) throw ConfigError("distance-matrix needs at least 2 datasets");
      auto cfg = resolve(o->flags, 1);
      std::vector<embed::LabeledDataset> ds(o->datasets.size());
      parallel_for(ds.size(), ctx.jobs,
                   [&](std::size_t i) { ds[i] = embed::read_dataset_file(o->datasets[i]); });
      DistanceMatrix m;
      std::set<std::string> seen;
      for (const auto& d : ds) {
        if (!seen.insert(d.language).second) {
          throw ConfigError("two datasets share language '" + d.language + "'");
        }
        m.languages.push_back(d.language);
      }
      const auto n = static_cast<Eigen::Index>(ds.size());
      m.values = Eigen::MatrixXd::Zero(n, n);
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = i + 1; j < ds.size(); ++j) pairs.emplace_back(i, j);
      }
      std::vector<otdd::OtddResult> results(pairs.size());
      parallel_for(pairs.size(), ctx.jobs, [&](std::size_t k) {
        results[k] = otdd::dataset_distance(ds[pairs[k].first], ds[pairs[k].second], cfg);
      });
      Json unconverged = Json::array();
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(pairs[k].first);
        const auto j = static_cast<Eigen::Index>(pairs[k].second);
        m.values(i, j) = m.values(j, i) = results[k].dataset_distance;
        if (!results[k].converged || results[k].label_matrix.unconverged) {
          unconverged.push_back({m.languages[pairs[k].first], m.languages[pairs[k].second]});
        }
      }
      std::set<std::string> models;
      std::set<int> layers;
      for (const auto& d : ds) {
        models.insert(d.model_id);
        layers.insert(d.layer);
      }
      Provenance in;
      in.add_all(o->datasets);
      Json meta = envelope("distance-matrix", cfg.to_json(), in);
      meta["measure"] = "otdd";
      meta["model_id"] = models.size() == 1 ? Json(*models.begin()) : Json("mixed");
      meta["layer"] = layers.size() == 1 ? Json(*layers.begin()) : Json("mixed");
      meta["languages"] = m.languages;
      meta["diagonal"] = "zero by definition";
      meta["unconverged_pairs"] = unconverged;
      write_matrix(o->out, m, meta);
      meta["output"] = o->out;
      return meta;
    };
  });
}

void add_probe(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string train, eval, out, model_out;
    std::vector<double> strengths;
    probe::Schedule sched;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("probe", "Linear relation probe swept over L2 strengths");
  sub->add_option("--train", o->train, "Training LDDS dataset")->required()->check(CLI::ExistingFile);
  sub->add_option("--eval", o->eval, "Evaluation LDDS dataset (default: the training set)")
      ->check(CLI::ExistingFile);
  sub->add_option("--strengths", o->strengths, "L2 strengths (default 1e-9 ... 1e-2)");
  sub->add_option("--out", o->out, "Report JSON to write");
  sub->add_option("--model-out", o->model_out, "Write the best model here");
  tuning(sub, "--max-epochs", o->sched.max_epochs, "Epoch cap");
  tuning(sub, "--patience", o->sched.patience, "Early stopping patience (epochs)");
  tuning(sub, "--batch-size", o->sched.batch_size, "Minibatch size");
  tuning(sub, "--learning-rate", o->sched.learning_rate, "Initial SGD step");
  tuning(sub, "--dev-fraction", o->sched.dev_fraction, "Stratified dev split fraction");
  sub->callback([&ctx, o] {
    ctx.action = [&ctx, o] {
      auto sched = o->sched;
      sched.seed = ctx.seed;
      const auto strengths = o->strengths.empty() ? probe::default_strengths() : o->strengths;
      const auto train = embed::read_dataset_file(o->train);
      const auto eval = o->eval.empty() ? train : embed::read_dataset_file(o->eval);
      const auto report = probe::probe_sweep(train, eval, strengths, sched, ctx.jobs);
      Provenance in;
      in.add(o->train);
      if (!o->eval.empty()) in.add(o->eval);
      Json cfg = {{"max_epochs", sched.max_epochs},   {"patience", sched.patience},
                  {"tol", sched.tol},                 {"batch_size", sched.batch_size},
                  {"learning_rate", sched.learning_rate}, {"power_t", sched.power_t},
                  {"dev_fraction", sched.dev_fraction}, {"seed", sched.seed}};
      Json j = envelope("probe", cfg, in);
      j["language"] = train.language;
      j["model_id"] = train.model_id;
      j["layer"] = train.layer;
      j["eval_on_train"] = o->eval.empty();
      merge_into(j, probe::to_json(report));
      if (!o->model_out.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < report.accuracies.size(); ++i) {
          if (report.accuracies[i] > report.accuracies[best]) best = i;
        }
        Json mj = probe::to_json(probe::train_probe(train, strengths[best], sched));
        mj["inputs"] = in.json();
        write_json(o->model_out, mj);
        j["model_strength"] = strengths[best];
      }
      if (!o->out.empty()) write_json(o->out, j);
      return j;
    };
  });
}

void add_formal_dist(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string params, out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("formal-dist", "Jaccard distance over binary syntactic parameters");
  sub->add_option("--params", o->params, "Parameter table CSV")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o->out, "Matrix CSV to write")->required();
  sub->callback([&ctx, o] {
    ctx.action = [o] {
      const auto profiles = typology::read_parameter_file(o->params);
      auto m = typology::formal_distance_matrix(profiles);
      Provenance in;
      in.add(o->params);
      Json meta = envelope("formal-dist", Json::object(), in);
      meta["measure"] = "formal-jaccard";
      meta["languages"] = m.languages;
      meta["parameters"] = profiles.empty() ? 0 : profiles.front().parameters.size();
      write_matrix(o->out, m, meta);
      meta["output"] = o->out;
      return meta;
    };
  });
}

void add_wals_dist(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string wals, inventory, out, pairs_out;
    std::vector<std::string> languages;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("wals-dist", "Per-feature cosine distances over WALS features");
  sub->add_option("--wals", o->wals, "WALS long-format CSV")->required()->check(CLI::ExistingFile);
  sub->add_option("--inventory", o->inventory, "Feature id list (default: built-in 116 features)")
      ->check(CLI::ExistingFile);
  sub->add_option("--languages", o->languages, "Languages to include (default: all in the table)");
  sub->add_option("--out", o->out, "Average-distance matrix CSV")->required();
  sub->add_option("--pairs-out", o->pairs_out, "Per-pair feature distance CSV");
  sub->callback([&ctx, o] {
    ctx.action = [o] {
      const auto wals = typology::read_wals_file(o->wals);
      const auto ids = o->inventory.empty() ? typology::default_feature_ids()
                                            : typology::read_inventory_file(o->inventory);
      auto langs = split_list(o->languages);
      if (langs.empty()) {
        for (const auto& [code, p] : wals.languages) langs.push_back(code);
      }
      const auto m = typology::average_distance_matrix(wals, langs, ids);
      Provenance in;
      in.add(o->wals);
      if (!o->inventory.empty()) in.add(o->inventory);
      Json meta = envelope("wals-dist", {{"features", ids.size()}}, in);
      meta["measure"] = "wals-average-cosine";
      meta["languages"] = langs;
      write_matrix(o->out, m, meta);
      if (!o->pairs_out.empty()) write_text(o->pairs_out, typology::feature_pairs_csv(wals, langs, ids));
      meta["output"] = o->out;
      return meta;
    };
  });
}

}  // namespace

void register_distance_commands(CLI::App& app, Context& ctx) {
  add_otdd(app, ctx);
  add_distance_matrix(app, ctx);
  add_probe(app, ctx);
  add_formal_dist(app, ctx);
  add_wals_dist(app, ctx);
}

}  // namespace langdist::cli
