#include <fstream>
#include <memory>

#include "common.hpp"
#include "langdist/analysis.hpp"
#include "langdist/embedstore.hpp"
#include "langdist/error.hpp"
#include "langdist/io.hpp"

namespace langdist::cli {

namespace {

void add_correlate(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string a, b, row, scatter_out, out;
    bool exact = false;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("correlate", "Spearman correlation between two distance matrices");
  sub->add_option("--a", o->a, "First matrix CSV")->required()->check(CLI::ExistingFile);
  sub->add_option("--b", o->b, "Second matrix CSV")->required()->check(CLI::ExistingFile);
  sub->add_option("--row", o->row, "Compare one language's row instead of the upper triangle");
  sub->add_option("--scatter-out", o->scatter_out, "Paired values CSV for plotting");
  sub->add_flag("--exact", o->exact, "Also compute the exact permutation p-value (n <= 10)");
  sub->add_option("--out", o->out, "Result JSON to write");
  sub->callback([&ctx, o] {
    ctx.action = [o] {
      const auto a = read_distance_matrix(o->a);
      const auto b = read_distance_matrix(o->b);
      const auto c = analysis::compare_measures(a, b, o->row);
      Provenance in;
      in.add(o->a);
      in.add(o->b);
      Json j = envelope("correlate", {{"row", o->row}, {"exact", o->exact}}, in);
      j["pairs"] = c.rows.size();
      j["spearman"] = analysis::to_json(c.spearman);
      if (o->exact) {
        std::vector<double> xs, ys;
        for (const auto& r : c.rows) {
          xs.push_back(r.x);
          ys.push_back(r.y);
        }
        j["exact_p_value"] = analysis::spearman_exact_p(xs, ys);
      }
      if (!o->scatter_out.empty()) write_text(o->scatter_out, analysis::scatter_csv(c));
      if (!o->out.empty()) write_json(o->out, j);
      return j;
    };
  });
}

void add_cluster(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string matrix, out, json_out, linkage = "average";
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("cluster", "Agglomerative clustering of a distance matrix");
  sub->add_option("--matrix", o->matrix, "Matrix CSV")->required()->check(CLI::ExistingFile);
  tuning(sub, "--linkage", o->linkage, "single, complete or average");
  sub->add_option("--out", o->out, "Newick tree to write")->required();
  sub->add_option("--json-out", o->json_out, "Merge list JSON to write");
  sub->callback([&ctx, o] {
    ctx.action = [o] {
      const auto m = read_distance_matrix(o->matrix);
      const auto tree = analysis::agglomerative_cluster(m, analysis::parse_linkage(o->linkage));
      Provenance in;
      in.add(o->matrix);
      Json j = envelope("cluster", {{"linkage", o->linkage}}, in);
      merge_into(j, analysis::to_json(tree));
      write_text(o->out, analysis::to_newick(tree) + "\n");
      if (!o->json_out.empty()) write_json(o->json_out, j);
      return j;
    };
  });
}

void add_drop(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string las, out;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("drop", "LAS drop matrix from a transfer LAS table");
  sub->add_option("--las", o->las, "LAS table CSV (rows: source, columns: target)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", o->out, "Drop matrix CSV to write")->required();
  sub->callback([&ctx, o] {
    ctx.action = [o] {
      const auto d = analysis::las_drop(analysis::read_transfer_table(o->las));
      Provenance in;
      in.add(o->las);
      Json meta = envelope("drop", Json::object(), in);
      meta["measure"] = "las-drop";
      meta["languages"] = d.languages;
      write_matrix(o->out, d, meta);
      meta["output"] = o->out;
      return meta;
    };
  });
}

// Reads a predicted ranking: {"target": t, "ranking": [{"language": ...}, ...]}
// as written by select-source, or {"target": t, "order": [codes...]}.
void read_prediction(const std::string& path, std::string& target,
                     std::vector<std::string>& order) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  if (target.empty() && j.contains("target")) target = j["target"].get<std::string>();
  if (j.contains("order")) {
    order = j["order"].get<std::vector<std::string>>();
  } else if (j.contains("ranking")) {
    for (const auto& r : j["ranking"]) order.push_back(r.at("language").get<std::string>());
  } else {
    throw FormatError(path + ": expected an \"order\" or \"ranking\" array");
  }
  if (target.empty()) throw FormatError(path + ": no target language given");
}

void add_ndcg(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string pred, gold, target, out;
    std::size_t k = 3;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("ndcg", "NDCG@k of a predicted source ranking against LAS");
  sub->add_option("--pred", o->pred, "Predicted ranking JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--gold", o->gold, "LAS table CSV")->required()->check(CLI::ExistingFile);
  sub->add_option("--target", o->target, "Target language (default: from the prediction)");
  tuning(sub, "--k", o->k, "Cutoff");
  sub->add_option("--out", o->out, "Result JSON to write");
  sub->callback([&ctx, o] {
    ctx.action = [o] {
      std::string target = o->target;
      std::vector<std::string> order;
      read_prediction(o->pred, target, order);
      const auto table = analysis::read_transfer_table(o->gold);
      const auto rel = analysis::transfer_relevance(table, target, order);
      const double score = analysis::ndcg_at_k(order, rel, o->k);
      Provenance in;
      in.add(o->pred);
      in.add(o->gold);
      Json j = envelope("ndcg", {{"k", o->k}}, in);
      j["target"] = target;
      j["order"] = order;
      j["relevance"] = rel;
      j["ndcg"] = score;
      if (!o->out.empty()) write_json(o->out, j);
      return j;
    };
  });
}

void add_pca_export(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string dataset, out;
    int dims = analysis::kDefaultPcaDims;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("pca-export", "Project relation vectors onto principal components");
  sub->add_option("--dataset", o->dataset, "LDDS dataset")->required()->check(CLI::ExistingFile);
  tuning(sub, "--dims", o->dims, "Number of components");
  sub->add_option("--out", o->out, "Projected CSV to write")->required();
  sub->callback([&ctx, o] {
    ctx.action = [o] {
      const auto ds = embed::read_dataset_file(o->dataset);
      const auto pca = analysis::pca_fit(ds.features, o->dims);
      const Eigen::MatrixXd z = pca.project(ds.features);
      std::vector<std::string> header{"item", "label"};
      for (int k = 1; k <= o->dims; ++k) header.push_back("pc" + std::to_string(k));
      std::string csv = csv_row(header);
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        std::vector<std::string> row{std::to_string(i),
                                     ds.labels[static_cast<std::size_t>(ds.label_of[static_cast<std::size_t>(i)])]};
        for (Eigen::Index k = 0; k < z.cols(); ++k) row.push_back(format_double(z(i, k)));
        csv += csv_row(row);
      }
      Provenance in;
      in.add(o->dataset);
      Json meta = envelope("pca-export", {{"dims", o->dims}}, in);
      meta["language"] = ds.language;
      meta["model_id"] = ds.model_id;
      meta["layer"] = ds.layer;
      meta["items"] = ds.size();
      meta["explained_variance"] = std::vector<double>(
          pca.explained_variance.data(), pca.explained_variance.data() + pca.explained_variance.size());
      meta["total_variance"] = pca.total_variance;
      write_text(o->out, csv);
      write_json(o->out + ".meta.json", meta);
      meta["output"] = o->out;
      return meta;
    };
  });
}

}  // namespace

void register_analysis_commands(CLI::App& app, Context& ctx) {
  add_correlate(app, ctx);
  add_cluster(app, ctx);
  add_drop(app, ctx);
  add_ndcg(app, ctx);
  add_pca_export(app, ctx);
}

}  // namespace langdist::cli
