#include <map>
#include <memory>

#include "common.hpp"
#include "langdist/analysis.hpp"
#include "langdist/embedstore.hpp"
#include "langdist/error.hpp"
#include "langdist/io.hpp"
#include "langdist/treebank.hpp"
#include "langdist/typology.hpp"

namespace langdist::cli {

namespace {

void add_parse_treebank(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string input, language, out, summary_out;
    bool keep_subtypes = false;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("parse-treebank",
                                 "Parse a CoNLL-U file into head-dependent relation instances");
  sub->add_option("--input", o->input, "CoNLL-U file")->required()->check(CLI::ExistingFile);
  sub->add_option("--language", o->language, "Language code (default: from the file name)");
  sub->add_option("--out", o->out, "Relation TSV to write")->required();
  sub->add_option("--summary-out", o->summary_out, "Also write the JSON summary here");
  sub->add_flag("--keep-subtypes", o->keep_subtypes, "Keep relation subtypes such as nmod:poss");
  sub->callback([&ctx, o] {
    ctx.action = [o] {
      const auto tb = treebank::read_conllu_file(o->input, o->language);
      const auto ex = treebank::extract_relations(tb, !o->keep_subtypes);
      write_text(o->out, treebank::relations_tsv(ex.instances));
      Provenance in;
      in.add(o->input);
      Json j = envelope("parse-treebank", {{"strip_subtypes", !o->keep_subtypes}}, in);
      const Json s =
          Json::parse(treebank::summary_json(treebank::summarize(tb, ex), tb.language));
      merge_into(j, s);
      std::map<std::string, std::size_t> reasons;
      for (const auto& r : ex.rejects) ++reasons[r.reason];
      j["reject_reasons"] = reasons;
      if (!o->summary_out.empty()) write_json(o->summary_out, j);
      return j;
    };
  });
}

struct Problems {
  Json list = Json::array();
  void add(const std::string& file, const std::string& what) {
    list.push_back({{"file", file}, {"problem", what}});
  }
};

void add_validate(CLI::App& app, Context& ctx) {
  struct Opts {
    std::vector<std::string> ldeb, conllu, ldds, matrix;
    std::string wals, inventory, params, las, out;
    std::uint32_t expect_dim = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("validate",
                                 "Check input files for format problems without computing");
  sub->add_option("--ldeb", o->ldeb, "LDEB embedding files");
  sub->add_option("--conllu", o->conllu, "CoNLL-U treebanks");
  sub->add_option("--ldds", o->ldds, "Labeled dataset files");
  sub->add_option("--matrix", o->matrix, "Distance matrix CSVs");
  sub->add_option("--wals", o->wals, "WALS long-format CSV");
  sub->add_option("--inventory", o->inventory, "Feature id list checked against --wals");
  sub->add_option("--params", o->params, "Formal parameter table CSV");
  sub->add_option("--las", o->las, "Transfer LAS table CSV");
  sub->add_option("--expect-dim", o->expect_dim, "Required embedding dim for LDEB files");
  sub->add_option("--out", o->out, "Also write the report here");
  sub->callback([&ctx, o] {
    ctx.action = [&ctx, o] {
      Problems p;
      std::size_t checked = 0;
      auto guarded = [&](const std::string& file, auto&& fn) {
        ++checked;
        try {
          fn();
        } catch (const std::exception& e) {
          p.add(file, e.what());
        }
      };

      // (language, model) -> files and dims, for the layer-consistency check.
      std::map<std::pair<std::string, std::string>,
               std::vector<std::pair<std::string, std::uint32_t>>> groups;
      for (const auto& f : o->ldeb) {
        guarded(f, [&] {
          embed::LdebHeader h;
          const auto problems = embed::validate_ldeb(read_file(f), &h);
          for (const auto& m : problems) p.add(f, m);
          if (h.dim == 0) return;
          if (o->expect_dim != 0 && h.dim != o->expect_dim) {
            p.add(f, "dim " + std::to_string(h.dim) + " differs from expected " +
                         std::to_string(o->expect_dim) + " (layer " +
                         std::to_string(h.layer) + ")");
          } else if (o->expect_dim == 0) {
            groups[{h.language, h.model_id}].emplace_back(f, h.dim);
          }
        });
      }
      for (const auto& [key, files] : groups) {
        std::map<std::uint32_t, std::size_t> counts;
        for (const auto& fd : files) ++counts[fd.second];
        if (counts.size() < 2) continue;
        std::uint32_t mode = 0;
        std::size_t best = 0, ties = 0;
        for (const auto& [d, c] : counts) {
          if (c > best) {
            best = c;
            mode = d;
            ties = 1;
          } else if (c == best) {
            ++ties;
          }
        }
        for (const auto& [f, d] : files) {
          if (ties > 1) {
            p.add(f, "dim " + std::to_string(d) + " disagrees with other files of " +
                         key.first + "/" + key.second);
          } else if (d != mode) {
            p.add(f, "dim " + std::to_string(d) + " differs from " + std::to_string(mode) +
                         " used by the other files of " + key.first + "/" + key.second);
          }
        }
      }
      for (const auto& f : o->conllu) guarded(f, [&] { treebank::read_conllu_file(f); });
      for (const auto& f : o->ldds) guarded(f, [&] { embed::read_dataset_file(f); });
      for (const auto& f : o->matrix) {
        guarded(f, [&] {
          const auto m = read_distance_matrix(f);
          if (m.asymmetry() > 1e-9) p.add(f, "matrix is not symmetric");
          if ((m.values.array() < 0.0).any()) p.add(f, "matrix has negative entries");
        });
      }
      if (!o->wals.empty()) {
        guarded(o->wals, [&] {
          const auto ids = o->inventory.empty() ? typology::default_feature_ids()
                                                : typology::read_inventory_file(o->inventory);
          for (const auto& m : typology::validate_wals(read_csv_file(o->wals), ids)) {
            p.add(o->wals, m);
          }
        });
      }
      if (!o->params.empty()) guarded(o->params, [&] { typology::read_parameter_file(o->params); });
      if (!o->las.empty()) guarded(o->las, [&] { analysis::read_transfer_table(o->las); });

      Json j;
      j["command"] = "validate";
      j["files_checked"] = checked;
      j["valid"] = p.list.empty();
      j["problems"] = p.list;
      if (!o->out.empty()) write_json(o->out, j);
      if (!p.list.empty()) ctx.exit_code = 1;
      return j;
    };
  });
}

void add_build_dataset(CLI::App& app, Context& ctx) {
  struct Opts {
    std::string conllu, ldeb, out, language;
    std::size_t max_items = 5000, per_label_min = 1;
    std::uint32_t expect_dim = 0;
    bool keep_subtypes = false;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand(
      "build-dataset", "Join a treebank with word embeddings into a labeled relation dataset");
  sub->add_option("--conllu", o->conllu, "CoNLL-U treebank")->required()->check(CLI::ExistingFile);
  sub->add_option("--ldeb", o->ldeb, "LDEB embeddings of the same sentences")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out", o->out, "LDDS dataset to write")->required();
  sub->add_option("--language", o->language, "Treebank language (default: the LDEB language)");
  tuning(sub, "--max-items", o->max_items, "Sample cap per dataset");
  tuning(sub, "--per-label-min", o->per_label_min, "Minimum items kept per label");
  sub->add_option("--expect-dim", o->expect_dim, "Reject embeddings of another dim");
  sub->add_flag("--keep-subtypes", o->keep_subtypes, "Keep relation subtypes");
  sub->callback([&ctx, o] {
    ctx.action = [&ctx, o] {
      const auto es = embed::read_embedding_file(o->ldeb, o->expect_dim);
      const auto tb = treebank::read_conllu_file(
          o->conllu, o->language.empty() ? es.language() : o->language);
      embed::Sampling s{o->max_items, o->per_label_min, ctx.seed};
      auto ds = embed::assemble_dataset(tb, es, s, !o->keep_subtypes);
      Provenance in;
      in.add(o->conllu);
      in.add(o->ldeb);
      ds.metadata["inputs"] = in.json();
      embed::write_dataset_file(o->out, ds);

      Json j = envelope("build-dataset",
                        {{"max_items", o->max_items},
                         {"per_label_min", o->per_label_min},
                         {"strip_subtypes", !o->keep_subtypes},
                         {"seed", ctx.seed}},
                        in);
      j["language"] = ds.language;
      j["model_id"] = ds.model_id;
      j["layer"] = ds.layer;
      j["dim"] = ds.dim();
      j["items"] = ds.size();
      std::map<std::string, std::size_t> counts;
      for (int l : ds.label_of) ++counts[ds.labels[static_cast<std::size_t>(l)]];
      j["label_counts"] = counts;
      j["output"] = o->out;
      return j;
    };
  });
}

}  // namespace

void register_data_commands(CLI::App& app, Context& ctx) {
  add_parse_treebank(app, ctx);
  add_validate(app, ctx);
  add_build_dataset(app, ctx);
}

}  // namespace langdist::cli
