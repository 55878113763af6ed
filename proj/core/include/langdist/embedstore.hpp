#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "langdist/treebank.hpp"

namespace langdist::embed {

inline constexpr int kMaxLayer = 12;

struct SentenceVectors {
  std::string id;
  std::uint32_t word_count = 0;
  std::vector<float> values;  // word_count x dim, row-major
};

// Word-aligned contextual vectors for one (language, model, layer).
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  EmbeddingSet(std::string language, std::string model_id, int layer,
               std::uint32_t dim);

  const std::string& language() const { return language_; }
  const std::string& model_id() const { return model_id_; }
  int layer() const { return layer_; }
  std::uint32_t dim() const { return dim_; }
  const std::vector<SentenceVectors>& sentences() const { return sentences_; }

  // Rejects wrong lengths, duplicate ids and non-finite values.
  void add_sentence(std::string id, std::uint32_t word_count,
                    std::vector<float> values);

  const SentenceVectors* find(const std::string& sentence_id) const;
  bool has_word(const std::string& sentence_id, int index) const;
  // 1-based word index; throws JoinError when absent.
  std::span<const float> word(const std::string& sentence_id, int index) const;

 private:
  std::string language_;
  std::string model_id_;
  int layer_ = 0;
  std::uint32_t dim_ = 0;
  std::vector<SentenceVectors> sentences_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// LDEB: magic "LDEB", u16 version 1, language (u8 len), model_id (u16 len),
// u8 layer, u32 dim, u32 sentence_count, then per sentence id (u16 len),
// u32 word_count and word_count*dim float32, all little-endian.
inline constexpr std::uint16_t kLdebVersion = 1;

std::string encode_ldeb(const EmbeddingSet& es);
// `expected_dim` of 0 accepts any width.
EmbeddingSet decode_ldeb(std::string_view bytes, std::uint32_t expected_dim = 0);
EmbeddingSet read_embedding_file(const std::string& path,
                                 std::uint32_t expected_dim = 0);
void write_embedding_file(const std::string& path, const EmbeddingSet& es);

struct LdebHeader {
  std::string language;
  std::string model_id;
  int layer = 0;
  std::uint32_t dim = 0;
  std::uint32_t sentence_count = 0;
};

// Structural check; returns every problem found (empty = valid).
std::vector<std::string> validate_ldeb(std::string_view bytes,
                                       LdebHeader* header = nullptr);

struct RelationVector {
  Eigen::VectorXd features;
  std::string label;
  std::string language;
};

// head minus dependent, computed in double precision.
RelationVector relation_vector(const EmbeddingSet& es,
                               const treebank::RelationInstance& inst);

struct Sampling {
  std::size_t max_items = 5000;
  std::size_t per_label_min = 1;
  std::uint64_t seed = 0;
};

// Label-stratified sample sizes: proportional (largest remainder) with at
// least min(per_label_min, available) per label. Sums to
// min(max_items, total).
std::map<std::string, std::size_t> allocate_stratified(
    const std::map<std::string, std::size_t>& counts, std::size_t max_items,
    std::size_t per_label_min);

// Empirical labeled distribution for one language/model/layer.
struct LabeledDataset {
  std::string language;
  std::string model_id;
  int layer = 0;
  std::vector<std::string> labels;  // sorted label set
  Eigen::MatrixXd features;         // one row per item
  std::vector<int> label_of;        // index into labels, per item
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  std::size_t size() const { return label_of.size(); }
  Eigen::Index dim() const { return features.cols(); }
  RelationVector item(std::size_t i) const;
  // Row indices per label, in item order.
  std::vector<std::vector<Eigen::Index>> class_rows() const;

  // Builds a dataset from parallel vectors of features and label names.
  static LabeledDataset from_items(std::string language, std::string model_id,
                                   int layer, const Eigen::MatrixXd& features,
                                   const std::vector<std::string>& labels);
};

LabeledDataset assemble_dataset(const treebank::Treebank& tb,
                                const EmbeddingSet& es,
                                const Sampling& sampling,
                                bool strip_subtypes = true);

// LDDS: magic "LDDS", u16 version 1, language (u8 len), model_id (u16 len),
// u8 layer, u32 dim, u16 label_count + labels (u16 len each),
// u32 item_count, metadata JSON (u32 len), then per item u16 label index
// and dim float64 values.
inline constexpr std::uint16_t kLddsVersion = 1;

std::string encode_ldds(const LabeledDataset& ds);
LabeledDataset decode_ldds(std::string_view bytes);
LabeledDataset read_dataset_file(const std::string& path);
void write_dataset_file(const std::string& path, const LabeledDataset& ds);

}  // namespace langdist::embed
