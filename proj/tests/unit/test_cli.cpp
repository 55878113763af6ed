#include <gtest/gtest.h>

#include "json.hpp"
#include "langdist/embedstore.hpp"
#include "oracles/synthetic.hpp"
#include "support/cli_runner.hpp"

#ifdef LANGDIST_CLI_PATH

using namespace langdist;
using support::run_cli;
using support::TempDir;
using Json = nlohmann::json;

namespace {

const std::string kCli = LANGDIST_CLI_PATH;
const std::string kFixtures = LANGDIST_FIXTURE_DIR;

std::string fixture(const std::string& name) { return kFixtures + "/" + name; }

// Writes <code>.conllu and <code>.ldeb for a synthetic language.
void write_language(const TempDir& dir, const std::string& code, std::uint64_t seed,
                    double shift = 0.0) {
  Rng means_rng = substream(seed, "means");
  auto means = synth::label_means(means_rng, 3, 8, 2.0);
  for (auto& m : means) m.array() += shift;
  Rng rng = substream(seed, code);
  const auto lang = synth::make_language(code, synth::relation_labels(3), means, 20, 3, 1.0, rng);
  support::spit(dir / (code + ".conllu"), lang.conllu);
  embed::write_embedding_file(dir / (code + ".ldeb"), lang.embeddings);
}

}  // namespace

TEST(Cli, HelpExitsZero) {
  const auto r = run_cli(kCli, {"--help"});
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("distance-matrix"), std::string::npos);
}

TEST(Cli, UnknownSubcommandExitsTwo) {
  const auto r = run_cli(kCli, {"frobnicate"});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(run_cli(kCli, {}).exit_code, 2);
  EXPECT_EQ(run_cli(kCli, {"otdd", "--a", "/nonexistent", "--b", "/nonexistent"}).exit_code, 2);
}

TEST(Cli, DomainErrorExitsOneWithJson) {
  TempDir dir("cli_err");
  support::spit(dir / "bad.ldds", "not a dataset");
  const auto r = run_cli(kCli, {"otdd", "--a", dir / "bad.ldds", "--b", dir / "bad.ldds"});
  EXPECT_EQ(r.exit_code, 1);
  const auto j = Json::parse(r.err);
  EXPECT_EQ(j["error"], "format_error");
}

TEST(Cli, ParseTreebank) {
  TempDir dir("cli_tb");
  const auto r = run_cli(kCli, {"parse-treebank", "--input", fixture("two_token.conllu"),
                                "--language", "en", "--out", dir / "rel.tsv"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["relation_count"], 1);
  EXPECT_EQ(support::slurp(dir / "rel.tsv"), "sentence_id\thead_index\tdep_index\tlabel\ns1\t2\t1\tnsubj\n");
}

TEST(Cli, OtddSelfDistance) {
  TempDir dir("cli_otdd");
  write_language(dir, "aa", 1);
  auto r = run_cli(kCli, {"build-dataset", "--conllu", dir / "aa.conllu", "--ldeb", dir / "aa.ldeb",
                          "--out", dir / "aa.ldds"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  r = run_cli(kCli, {"otdd", "--a", dir / "aa.ldds", "--b", dir / "aa.ldds", "--out", dir / "r.json"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = Json::parse(r.out);
  const auto ds = embed::read_dataset_file(dir / "aa.ldds");
  double mean = 0;
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
    for (Eigen::Index k = 0; k < ds.features.rows(); ++k) {
      if (i == k) continue;
      mean += (ds.features.row(i) - ds.features.row(k)).norm();
      ++n;
    }
  }
  mean /= static_cast<double>(n);
  EXPECT_LE(j["distance"].get<double>(), 0.05 * mean);
  EXPECT_TRUE(Json::parse(support::slurp(dir / "r.json")).contains("label_matrix"));
}

TEST(Cli, NdcgHandExample) {
  const auto r = run_cli(kCli, {"ndcg", "--pred", fixture("hand_pred.json"), "--gold",
                                fixture("hand_las.csv"), "--k", "3"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NEAR(Json::parse(r.out)["ndcg"].get<double>(), 0.7900, 1e-4);
}

TEST(Cli, ValidateWrongDimLdeb) {
  TempDir dir("cli_val");
  for (int i = 0; i < 3; ++i) {
    embed::EmbeddingSet es("en", "m", 0, i == 2 ? 3 : 4);
    es.add_sentence("s", 1, std::vector<float>(i == 2 ? 3 : 4, 1.0f));
    embed::write_embedding_file(dir / ("l" + std::to_string(i) + ".ldeb"), es);
  }
  auto r = run_cli(kCli, {"validate", "--ldeb", dir / "l0.ldeb", dir / "l1.ldeb", dir / "l2.ldeb"});
  EXPECT_EQ(r.exit_code, 1);
  auto j = Json::parse(r.out);
  ASSERT_EQ(j["problems"].size(), 1u);
  EXPECT_EQ(j["problems"][0]["file"], dir / "l2.ldeb");

  r = run_cli(kCli, {"validate", "--ldeb", dir / "l0.ldeb", dir / "l1.ldeb"});
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_TRUE(Json::parse(r.out)["valid"].get<bool>());
  EXPECT_TRUE(Json::parse(r.out)["problems"].empty());

  r = run_cli(kCli, {"validate", "--expect-dim", "3", "--ldeb", dir / "l0.ldeb", dir / "l2.ldeb"});
  j = Json::parse(r.out);
  ASSERT_EQ(j["problems"].size(), 1u);
  EXPECT_EQ(j["problems"][0]["file"], dir / "l0.ldeb");
}

TEST(Cli, ValidateMissingWalsFeature) {
  const auto r = run_cli(kCli, {"validate", "--wals", fixture("wals_missing_81A.csv"), "--inventory",
                                fixture("inventory_90A_81A.txt")});
  EXPECT_EQ(r.exit_code, 1);
  const auto j = Json::parse(r.out);
  ASSERT_EQ(j["problems"].size(), 1u);
  EXPECT_NE(j["problems"][0]["problem"].get<std::string>().find("81A"), std::string::npos);
}

TEST(Cli, EnvironmentFallback) {
  TempDir dir("cli_env");
  const auto r = run_cli("/usr/bin/env", {"LANGDIST_K=2", kCli, "ndcg", "--pred", fixture("hand_pred.json"),
                                          "--gold", fixture("hand_las.csv")});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["config"]["k"], 2);
}

TEST(Cli, PipelineIsByteIdentical) {
  auto run_all = [](const TempDir& dir) {
    write_language(dir, "aa", 1);
    write_language(dir, "bb", 2, 1.0);
    for (const std::string code : {"aa", "bb"}) {
      const auto r = run_cli(kCli, {"--seed", "7", "build-dataset", "--conllu", code + ".conllu",
                                    "--ldeb", code + ".ldeb", "--max-items", "30", "--out",
                                    code + ".ldds"},
                             dir.path().string());
      ASSERT_EQ(r.exit_code, 0) << r.err;
    }
    auto r = run_cli(kCli, {"distance-matrix", "--datasets", "aa.ldds", "bb.ldds", "--out", "d.csv"},
                     dir.path().string());
    ASSERT_EQ(r.exit_code, 0) << r.err;
    r = run_cli(kCli, {"--seed", "3", "probe", "--train", "aa.ldds", "--strengths", "1e-4", "--out",
                       "probe.json"},
                dir.path().string());
    ASSERT_EQ(r.exit_code, 0) << r.err;
  };
  TempDir one("det1"), two("det2");
  run_all(one);
  run_all(two);
  for (const std::string f : {"aa.ldds", "bb.ldds", "d.csv", "d.csv.meta.json", "probe.json"}) {
    EXPECT_EQ(support::slurp(one / f), support::slurp(two / f)) << f;
  }
}

#endif
