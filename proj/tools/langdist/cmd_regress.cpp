#include <memory>

#include "common.hpp"
#include "langdist/error.hpp"
#include "langdist/io.hpp"
#include "langdist/regress.hpp"
#include "langdist/typology.hpp"

namespace langdist::cli {

namespace {

// Inputs shared by the commands that rebuild the (d_F, d_S) pair set.
struct PairInputs {
  std::string wals, target, inventory, imputation = "mean";
};

void add_pair_inputs(CLI::App* sub, PairInputs& p) {
  sub->add_option("--wals", p.wals, "WALS long-format CSV")->required()->check(CLI::ExistingFile);
  sub->add_option("--target", p.target, "Syntactic distance matrix CSV")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--inventory", p.inventory, "Feature id list (default: built-in 116 features)")
      ->check(CLI::ExistingFile);
  tuning(sub, "--imputation", p.imputation, "Missing feature distances: mean or sentinel");
}

regress::TrainingSet load_pairs(const PairInputs& p, Provenance& in,
                                const typology::ImputationTable* fixed = nullptr) {
  in.add(p.wals);
  in.add(p.target);
  if (!p.inventory.empty()) in.add(p.inventory);
  const auto wals = typology::read_wals_file(p.wals);
  const auto target = read_distance_matrix(p.target);
  const auto ids = fixed ? fixed->feature_ids
                         : p.inventory.empty() ? typology::default_feature_ids()
                                               : typology::read_inventory_file(p.inventory);
  return regress::build_training_set(wals, target, ids,
                                     typology::parse_imputation_mode(p.imputation), fixed);
}

void add_gbdt_flags(CLI::App* sub, regress::GbdtConfig& c) {
  tuning(sub, "--n-estimators", c.n_estimators, "Boosting stages");
  tuning(sub, "--max-depth", c.max_depth, "Tree depth");
  tuning(sub, "--learning-rate", c.learning_rate, "Shrinkage");
  tuning(sub, "--min-samples-leaf", c.min_samples_leaf, "Minimum rows per leaf");
}

Json pair_config(const PairInputs& p, const regress::GbdtConfig& c) {
  Json j = c.to_json();
  j["imputation"] = p.imputation;
  return j;
}

regress::GbdtModel read_model(const std::string& path) {
  try {
    return regress::model_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void add_train(CLI::App& app, Context& ctx) {
  struct Opts {
    PairInputs pairs;
    regress::GbdtConfig cfg;
    std::string out, pairs_out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("train-regressor",
                                 "Fit boosted trees mapping feature distances to syntactic distance");
  add_pair_inputs(sub, o->pairs);
  add_gbdt_flags(sub, o->cfg);
  sub->add_option("--out", o->out, "Model JSON to write")->required();
  sub->add_option("--pairs-out", o->pairs_out, "Training pairs CSV (imputed features and target)");
  sub->callback([&ctx, o] {
    ctx.action = [o] {
      Provenance in;
      const auto t = load_pairs(o->pairs, in);
      auto m = regress::fit_gbdt(t.X, t.y, o->cfg, t.feature_ids);
      m.imputation = t.imputation;
      Json mj = regress::to_json(m);
      mj["training"] = {{"pairs", t.size()},
                        {"imputed_cells", t.imputed_cells},
                        {"config", pair_config(o->pairs, o->cfg)},
                        {"inputs", in.json()}};
      write_json(o->out, mj);
      if (!o->pairs_out.empty()) {
        std::vector<std::string> header{"language_a", "language_b"};
        header.insert(header.end(), t.feature_ids.begin(), t.feature_ids.end());
        header.push_back("target");
        std::string csv = csv_row(header);
        for (std::size_t i = 0; i < t.size(); ++i) {
          std::vector<std::string> row{t.language_a[i], t.language_b[i]};
          for (Eigen::Index f = 0; f < t.X.cols(); ++f) {
            row.push_back(format_double(t.X(static_cast<Eigen::Index>(i), f)));
          }
          row.push_back(format_double(t.y[static_cast<Eigen::Index>(i)]));
          csv += csv_row(row);
        }
        write_text(o->pairs_out, csv);
      }
      Json j = envelope("train-regressor", pair_config(o->pairs, o->cfg), in);
      j["pairs"] = t.size();
      j["features"] = t.feature_ids.size();
      j["imputed_cells"] = t.imputed_cells;
      j["train_mse_initial"] = m.train_mse.front();
      j["train_mse_final"] = m.train_mse.back();
      j["train_r2"] = regress::r2_score(t.y, regress::predict_all(m, t.X)).value_or(0.0);
      j["output"] = o->out;
      return j;
    };
  });
}

void add_cross_validate(CLI::App& app, Context& ctx) {
  struct Opts {
    PairInputs pairs;
    regress::GbdtConfig cfg;
    std::size_t k = 10;
    bool lolo = false;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("cross-validate", "k-fold R^2 of the regressor over language pairs");
  add_pair_inputs(sub, o->pairs);
  add_gbdt_flags(sub, o->cfg);
  tuning(sub, "--k", o->k, "Number of folds");
  sub->add_flag("--lolo", o->lolo, "Also report leave-one-language-out folds");
  sub->add_option("--out", o->out, "Result JSON to write");
  sub->callback([&ctx, o] {
    ctx.action = [&ctx, o] {
      Provenance in;
      const auto t = load_pairs(o->pairs, in);
      Json cfg = pair_config(o->pairs, o->cfg);
      cfg["k"] = o->k;
      cfg["seed"] = ctx.seed;
      Json j = envelope("cross-validate", cfg, in);
      j["pairs"] = t.size();
      j["kfold"] = regress::to_json(regress::cross_validate(t.X, t.y, o->cfg, o->k, ctx.seed, ctx.jobs));
      if (o->lolo) {
        std::vector<std::string> names;
        const auto groups = regress::language_groups(t, names);
        j["leave_one_language_out"] =
            regress::to_json(regress::cross_validate_groups(t.X, t.y, o->cfg, groups, names, ctx.jobs));
      }
      if (!o->out.empty()) write_json(o->out, j);
      return j;
    };
  });
}

void add_importance(CLI::App& app, Context& ctx) {
  struct Opts {
    PairInputs pairs;
    std::string model, out;
    int repeats = 30;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("importance", "Impurity and permutation feature importance");
  sub->add_option("--model", o->model, "Model JSON")->required()->check(CLI::ExistingFile);
  add_pair_inputs(sub, o->pairs);
  tuning(sub, "--repeats", o->repeats, "Permutation repeats");
  sub->add_option("--out", o->out, "Importance CSV to write")->required();
  sub->callback([&ctx, o] {
    ctx.action = [&ctx, o] {
      Provenance in;
      in.add(o->model);
      const auto m = read_model(o->model);
      if (!m.imputation) throw DataError(o->model + ": model has no imputation table");
      const auto t = load_pairs(o->pairs, in, &*m.imputation);
      const auto r = regress::importance_report(m, t.X, t.y, o->repeats, ctx.seed, ctx.jobs);
      Json meta = envelope("importance", {{"repeats", o->repeats}, {"seed", ctx.seed}}, in);
      meta["pairs"] = t.size();
      meta["baseline_r2"] = r.baseline_r2;
      write_text(o->out, regress::importance_csv(r));
      write_json(o->out + ".meta.json", meta);
      Json top = Json::array();
      const auto csv = parse_csv(regress::importance_csv(r));
      for (std::size_t i = 0; i < std::min<std::size_t>(10, csv.rows.size()); ++i) {
        top.push_back(csv.rows[i][0]);
      }
      meta["top_features"] = top;
      meta["output"] = o->out;
      return meta;
    };
  });
}

void add_select_source(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string model, wals, target, out;
    std::vector<std::string> candidates;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("select-source", "Rank candidate source languages for a target");
  sub->add_option("--model", o->model, "Model JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--wals", o->wals, "WALS long-format CSV")->required()->check(CLI::ExistingFile);
  sub->add_option("--target", o->target, "Target language code")->required();
  sub->add_option("--candidates", o->candidates, "Candidate codes (default: every other language)");
  sub->add_option("--out", o->out, "Ranking JSON to write");
  sub->callback([&ctx, o] {
    ctx.action = [o] {
      const auto m = read_model(o->model);
      const auto wals = typology::read_wals_file(o->wals);
      auto codes = split_list(o->candidates);
      if (codes.empty()) {
        for (const auto& [code, p] : wals.languages) {
          if (code != o->target) codes.push_back(code);
        }
      }
      std::vector<typology::WalsProfile> cands;
      for (const auto& c : codes) cands.push_back(wals.at(c));
      const auto ranked = regress::select_source(m, wals.at(o->target), cands);
      Provenance in;
      in.add(o->model);
      in.add(o->wals);
      Json j = envelope("select-source", {{"candidates", codes}}, in);
      j["target"] = o->target;
      Json rows = Json::array();
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        rows.push_back({{"rank", i + 1},
                        {"language", ranked[i].language},
                        {"predicted", ranked[i].predicted},
                        {"imputed_features", ranked[i].imputed}});
      }
      j["ranking"] = rows;
      if (!o->out.empty()) write_json(o->out, j);
      return j;
    };
  });
}

}  // namespace

void register_regress_commands(CLI::App& app, Context& ctx) {
  add_train(app, ctx);
  add_cross_validate(app, ctx);
  add_importance(app, ctx);
  add_select_source(app, ctx);
}

}  // namespace langdist::cli
