#include <gtest/gtest.h>

#include <cstring>

#include "langdist/embedstore.hpp"
#include "langdist/error.hpp"
#include "oracles/synthetic.hpp"

using namespace langdist;
using namespace langdist::embed;

namespace {

EmbeddingSet two_word_set() {
  EmbeddingSet es("en", "bert-base-multilingual-cased", 7, 4);
  es.add_sentence("s1", 2, {0.1f, -2.5f, 3.0f, 1e-7f, 4.f, 5.f, 6.f, -0.0f});
  return es;
}

}  // namespace

TEST(Ldeb, EmptySetRoundTrips) {
  EmbeddingSet es("en", "m", 0, 3);
  const auto back = decode_ldeb(encode_ldeb(es));
  EXPECT_TRUE(back.sentences().empty());
  EXPECT_EQ(back.dim(), 3u);
}

TEST(Ldeb, RoundTripIsBitExact) {
  const auto es = two_word_set();
  const auto back = decode_ldeb(encode_ldeb(es));
  EXPECT_EQ(back.language(), "en");
  EXPECT_EQ(back.model_id(), "bert-base-multilingual-cased");
  EXPECT_EQ(back.layer(), 7);
  ASSERT_EQ(back.sentences().size(), 1u);
  const auto& a = es.sentences()[0].values;
  const auto& b = back.sentences()[0].values;
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)), 0);
}

TEST(Ldeb, BadMagicIsFormatError) {
  auto bytes = encode_ldeb(two_word_set());
  bytes.replace(0, 4, "XXXX");
  EXPECT_THROW(decode_ldeb(bytes), FormatError);
}

TEST(Ldeb, TruncationReportsOffset) {
  auto bytes = encode_ldeb(two_word_set());
  bytes.resize(bytes.size() - 3);
  try {
    decode_ldeb(bytes);
    FAIL() << "expected CorruptionError";
  } catch (const CorruptionError& e) {
    EXPECT_GT(e.offset(), 0u);
  }
}

TEST(Ldeb, DimMismatchIsFormatError) {
  EXPECT_THROW(decode_ldeb(encode_ldeb(two_word_set()), 8), FormatError);
}

TEST(Ldeb, ValidateReportsProblems) {
  const auto good = encode_ldeb(two_word_set());
  LdebHeader h;
  EXPECT_TRUE(validate_ldeb(good, &h).empty());
  EXPECT_EQ(h.dim, 4u);
  EXPECT_FALSE(validate_ldeb(good.substr(0, good.size() - 1)).empty());
}

TEST(Ldeb, RejectsBadSentences) {
  EmbeddingSet es("en", "m", 0, 2);
  EXPECT_THROW(es.add_sentence("a", 2, {1.f, 2.f, 3.f}), FormatError);
  es.add_sentence("a", 1, {1.f, 2.f});
  EXPECT_THROW(es.add_sentence("a", 1, {1.f, 2.f}), FormatError);
  EXPECT_THROW(es.add_sentence("b", 1, {1.f, NAN}), FormatError);
}

TEST(RelationVector, HeadMinusDependent) {
  EmbeddingSet es("en", "m", 7, 2);
  es.add_sentence("s", 2, {3.f, 1.f, 1.f, 2.f});
  const auto rv = relation_vector(es, {"s", 1, 2, "obj"});
  EXPECT_DOUBLE_EQ(rv.features(0), 2.0);
  EXPECT_DOUBLE_EQ(rv.features(1), -1.0);
  EXPECT_EQ(rv.label, "obj");
}

TEST(RelationVector, SameWordGivesZero) {
  EmbeddingSet es("en", "m", 7, 2);
  es.add_sentence("s", 2, {3.f, 1.f, 3.f, 1.f});
  EXPECT_EQ(relation_vector(es, {"s", 1, 2, "obj"}).features.norm(), 0.0);
}

TEST(RelationVector, MissingKeyIsJoinError) {
  EmbeddingSet es("en", "m", 7, 2);
  es.add_sentence("s", 1, {3.f, 1.f});
  try {
    relation_vector(es, {"s", 1, 2, "obj"});
    FAIL();
  } catch (const JoinError& e) {
    EXPECT_NE(std::string(e.what()).find("'s'"), std::string::npos);
  }
  EXPECT_THROW(relation_vector(es, {"t", 1, 1, "obj"}), JoinError);
}

TEST(Sampling, ProportionalAllocation) {
  const auto a = allocate_stratified({{"a", 900}, {"b", 100}}, 100, 5);
  EXPECT_EQ(a.at("a"), 90u);
  EXPECT_EQ(a.at("b"), 10u);
}

TEST(Sampling, MinimumPerLabelHonoured) {
  const auto a = allocate_stratified({{"a", 990}, {"b", 10}}, 100, 5);
  EXPECT_EQ(a.at("b"), 5u);
  EXPECT_EQ(a.at("a"), 95u);
}

TEST(Sampling, NoOpWhenUnderCap) {
  const auto a = allocate_stratified({{"a", 4}, {"b", 6}}, 100, 5);
  EXPECT_EQ(a.at("a"), 4u);
  EXPECT_EQ(a.at("b"), 6u);
}

TEST(Sampling, ImpossibleMinimumIsConfigError) {
  EXPECT_THROW(allocate_stratified({{"a", 50}, {"b", 50}, {"c", 50}}, 10, 5), ConfigError);
}

namespace {

struct Pair {
  treebank::Treebank tb;
  EmbeddingSet es;
};

// 1000 instances: 900 obj, 100 nsubj.
Pair big_pair() {
  Rng rng = substream(1, "fixture");
  std::string text;
  EmbeddingSet es("xx", "m", 3, 2);
  for (int s = 0; s < 100; ++s) {
    const std::string id = "s" + std::to_string(s);
    text += "# sent_id = " + id + "\n1\tr\t_\tX\t_\t_\t0\troot\t_\t_\n";
    std::vector<float> v;
    for (int w = 0; w < 11; ++w) {
      v.push_back(static_cast<float>(uniform_unit(rng)));
      v.push_back(static_cast<float>(w));
    }
    for (int t = 0; t < 10; ++t) {
      text += std::to_string(t + 2) + "\tw\t_\tX\t_\t_\t1\t" + (t == 0 ? "nsubj" : "obj") +
              "\t_\t_\n";
    }
    text += "\n";
    es.add_sentence(id, 11, v);
  }
  return {treebank::parse_conllu(text, "xx"), es};
}

}  // namespace

TEST(Assemble, StratifiedCapAndDeterminism) {
  const auto p = big_pair();
  const Sampling s{100, 5, 42};
  const auto ds = assemble_dataset(p.tb, p.es, s);
  ASSERT_EQ(ds.size(), 100u);
  std::size_t obj = 0;
  for (int l : ds.label_of) obj += ds.labels[static_cast<std::size_t>(l)] == "obj";
  EXPECT_EQ(obj, 90u);
  const auto again = assemble_dataset(p.tb, p.es, s);
  EXPECT_EQ(ds.features, again.features);
  EXPECT_EQ(ds.label_of, again.label_of);
  const auto other = assemble_dataset(p.tb, p.es, {100, 5, 43});
  EXPECT_NE(ds.features, other.features);
}

TEST(Assemble, SmallInputKeptWhole) {
  Rng rng = substream(3, "lang");
  const auto labels = synth::relation_labels(2);
  const auto lang = synth::make_language("xx", labels, synth::label_means(rng, 2, 3, 1.0), 5, 2,
                                         0.1, rng);
  const auto ds = assemble_dataset(treebank::parse_conllu(lang.conllu, "xx"), lang.embeddings,
                                   {100, 1, 0});
  EXPECT_EQ(ds.size(), 10u);
}

TEST(Assemble, NothingJoinableIsDataError) {
  const auto tb = treebank::parse_conllu("1\ta\t_\tX\t_\t_\t0\troot\t_\t_\n2\tb\t_\tX\t_\t_\t1\tobj\t_\t_\n\n", "xx");
  EmbeddingSet es("xx", "m", 0, 2);
  EXPECT_THROW(assemble_dataset(tb, es, {}), DataError);
}

TEST(Assemble, LanguageMismatchIsJoinError) {
  const auto p = big_pair();
  auto tb = p.tb;
  tb.language = "yy";
  EXPECT_THROW(assemble_dataset(tb, p.es, {}), JoinError);
}

TEST(Ldds, RoundTrip) {
  Rng rng = substream(5, "ldds");
  const auto labels = synth::relation_labels(3);
  auto ds = synth::gaussian_dataset("en", labels, synth::label_means(rng, 3, 4, 1.0), 5, 0.3, rng);
  ds.metadata["note"] = "x";
  const auto back = decode_ldds(encode_ldds(ds));
  EXPECT_EQ(back.language, "en");
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(back.label_of, ds.label_of);
  EXPECT_EQ(back.features, ds.features);
  EXPECT_EQ(back.metadata["note"], "x");
}

TEST(Ldds, CorruptionDetected) {
  Rng rng = substream(5, "ldds");
  const auto ds = synth::gaussian_dataset("en", synth::relation_labels(2),
                                          synth::label_means(rng, 2, 2, 1.0), 2, 0.3, rng);
  auto bytes = encode_ldds(ds);
  EXPECT_THROW(decode_ldds(bytes.substr(0, bytes.size() - 4)), CorruptionError);
  bytes.replace(0, 4, "LDEB");
  EXPECT_THROW(decode_ldds(bytes), FormatError);
}

TEST(Dataset, FromItemsSortsLabels) {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  const auto ds = LabeledDataset::from_items("en", "m", 0, x, {"obj", "amod", "obj"});
  EXPECT_EQ(ds.labels, (std::vector<std::string>{"amod", "obj"}));
  EXPECT_EQ(ds.label_of, (std::vector<int>{1, 0, 1}));
  EXPECT_EQ(ds.class_rows()[1], (std::vector<Eigen::Index>{0, 2}));
}
