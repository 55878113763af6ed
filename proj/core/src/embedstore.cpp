#include "langdist/embedstore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "langdist/binary.hpp"
#include "langdist/error.hpp"
#include "langdist/io.hpp"
#include "langdist/rng.hpp"

namespace langdist::embed {

EmbeddingSet::EmbeddingSet(std::string language, std::string model_id,
                           int layer, std::uint32_t dim)
    : language_(std::move(language)),
      model_id_(std::move(model_id)),
      layer_(layer),
      dim_(dim) {
  if (layer < 0 || layer > kMaxLayer) {
    throw FormatError("layer " + std::to_string(layer) + " outside 0.." +
                      std::to_string(kMaxLayer));
  }
  if (dim == 0) throw FormatError("embedding dim must be positive");
}

void EmbeddingSet::add_sentence(std::string id, std::uint32_t word_count,
                                std::vector<float> values) {
  if (values.size() != static_cast<std::size_t>(word_count) * dim_) {
    throw FormatError("sentence '" + id + "': expected " +
                      std::to_string(static_cast<std::size_t>(word_count) * dim_) +
                      " values, got " + std::to_string(values.size()));
  }
  for (float v : values) {
    if (!std::isfinite(v)) {
      throw FormatError("sentence '" + id + "' has a non-finite value");
    }
  }
  if (by_id_.count(id)) throw FormatError("duplicate sentence id '" + id + "'");
  by_id_.emplace(id, sentences_.size());
  sentences_.push_back({std::move(id), word_count, std::move(values)});
}

const SentenceVectors* EmbeddingSet::find(const std::string& sentence_id) const {
  auto it = by_id_.find(sentence_id);
  return it == by_id_.end() ? nullptr : &sentences_[it->second];
}

bool EmbeddingSet::has_word(const std::string& sentence_id, int index) const {
  const SentenceVectors* s = find(sentence_id);
  return s && index >= 1 && static_cast<std::uint32_t>(index) <= s->word_count;
}

std::span<const float> EmbeddingSet::word(const std::string& sentence_id,
                                          int index) const {
  const SentenceVectors* s = find(sentence_id);
  if (!s) {
    throw JoinError("no embeddings for sentence '" + sentence_id + "'");
  }
  if (index < 1 || static_cast<std::uint32_t>(index) > s->word_count) {
    throw JoinError("sentence '" + sentence_id + "' has no word " +
                    std::to_string(index) + " (word_count " +
                    std::to_string(s->word_count) + ")");
  }
  return std::span<const float>(s->values).subspan(
      static_cast<std::size_t>(index - 1) * dim_, dim_);
}

// ---------------------------------------------------------------- LDEB

std::string encode_ldeb(const EmbeddingSet& es) {
  binary::Writer w;
  w.bytes("LDEB");
  w.put<std::uint16_t>(kLdebVersion);
  w.str<std::uint8_t>(es.language());
  w.str<std::uint16_t>(es.model_id());
  w.put<std::uint8_t>(static_cast<std::uint8_t>(es.layer()));
  w.put<std::uint32_t>(es.dim());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(es.sentences().size()));
  for (const auto& s : es.sentences()) {
    w.str<std::uint16_t>(s.id);
    w.put<std::uint32_t>(s.word_count);
    for (float v : s.values) w.put<float>(v);
  }
  return w.take();
}

namespace {

// Shared by the strict decoder and the validator. With a problem sink the
// parse continues past recoverable problems; without one it throws.
struct LdebParse {
  std::vector<std::string>* problems = nullptr;
  std::uint32_t expected_dim = 0;

  template <typename E, typename... Args>
  void fail(Args&&... args) {
    E e(std::forward<Args>(args)...);
    if (!problems) throw e;
    problems->push_back(e.what());
  }

  std::optional<EmbeddingSet> run(std::string_view bytes, LdebHeader* out) {
    binary::Reader r(bytes);
    try {
      if (r.remaining() < 4 || r.bytes(4, "magic") != "LDEB") {
        fail<FormatError>("bad magic: not an LDEB file");
        return std::nullopt;
      }
      const auto version = r.get<std::uint16_t>("version");
      if (version != kLdebVersion) {
        fail<FormatError>("unsupported LDEB version " + std::to_string(version));
        return std::nullopt;
      }
      LdebHeader h;
      h.language = r.str<std::uint8_t>("language code");
      h.model_id = r.str<std::uint16_t>("model id");
      h.layer = r.get<std::uint8_t>("layer");
      h.dim = r.get<std::uint32_t>("dim");
      h.sentence_count = r.get<std::uint32_t>("sentence count");
      if (out) *out = h;

      bool header_ok = true;
      if (h.layer > kMaxLayer) {
        fail<FormatError>("layer " + std::to_string(h.layer) + " outside 0.." +
                          std::to_string(kMaxLayer));
        header_ok = false;
      }
      if (h.dim == 0) {
        fail<FormatError>("dim must be positive");
        return std::nullopt;
      }
      if (expected_dim != 0 && h.dim != expected_dim) {
        fail<FormatError>("dim mismatch: header declares " +
                          std::to_string(h.dim) + ", expected " +
                          std::to_string(expected_dim));
      }

      std::optional<EmbeddingSet> es;
      if (header_ok) es.emplace(h.language, h.model_id, h.layer, h.dim);
      std::vector<std::string> seen;
      for (std::uint32_t s = 0; s < h.sentence_count; ++s) {
        const std::size_t record_offset = r.offset();
        std::string id = r.str<std::uint16_t>("sentence id");
        const auto words = r.get<std::uint32_t>("word count");
        const std::size_t n = static_cast<std::size_t>(words) * h.dim;
        if (r.remaining() / sizeof(float) < n) {
          throw CorruptionError("truncated record for sentence '" + id + "'",
                                record_offset);
        }
        std::vector<float> values(n);
        std::optional<std::size_t> bad_offset;
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t off = r.offset();
          values[i] = r.get<float>("vector value");
          if (!std::isfinite(values[i]) && !bad_offset) bad_offset = off;
        }
        if (bad_offset) {
          fail<CorruptionError>("non-finite value in sentence '" + id + "'",
                                *bad_offset);
          continue;
        }
        if (es) {
          if (es->find(id)) {
            fail<FormatError>("duplicate sentence id '" + id + "'");
            continue;
          }
          es->add_sentence(std::move(id), words, std::move(values));
        }
      }
      if (r.remaining() != 0) {
        fail<CorruptionError>(std::to_string(r.remaining()) + " trailing bytes",
                              r.offset());
      }
      return es;
    } catch (const CorruptionError& e) {
      if (!problems) throw;
      problems->push_back(e.what());
      return std::nullopt;
    }
  }
};

}  // namespace

EmbeddingSet decode_ldeb(std::string_view bytes, std::uint32_t expected_dim) {
  LdebParse p;
  p.expected_dim = expected_dim;
  return *p.run(bytes, nullptr);
}

EmbeddingSet read_embedding_file(const std::string& path,
                                 std::uint32_t expected_dim) {
  const std::string bytes = read_file(path);
  try {
    return decode_ldeb(bytes, expected_dim);
  } catch (const CorruptionError& e) {
    throw CorruptionError(path + ": " + e.detail(), e.offset());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_embedding_file(const std::string& path, const EmbeddingSet& es) {
  write_file_atomic(path, encode_ldeb(es));
}

std::vector<std::string> validate_ldeb(std::string_view bytes,
                                       LdebHeader* header) {
  std::vector<std::string> problems;
  LdebParse p;
  p.problems = &problems;
  p.run(bytes, header);
  return problems;
}

// ------------------------------------------------------- relation vectors

RelationVector relation_vector(const EmbeddingSet& es,
                               const treebank::RelationInstance& inst) {
  const auto head = es.word(inst.sentence_id, inst.head_index);
  const auto dep = es.word(inst.sentence_id, inst.dep_index);
  RelationVector rv;
  rv.features.resize(es.dim());
  for (std::uint32_t k = 0; k < es.dim(); ++k) {
    rv.features[k] = static_cast<double>(head[k]) - static_cast<double>(dep[k]);
  }
  rv.label = inst.label;
  rv.language = es.language();
  return rv;
}

// ------------------------------------------------------------- sampling

std::map<std::string, std::size_t> allocate_stratified(
    const std::map<std::string, std::size_t>& counts, std::size_t max_items,
    std::size_t per_label_min) {
  std::size_t total = 0;
  for (const auto& [label, n] : counts) total += n;
  if (total <= max_items) return counts;

  struct Slot {
    std::string label;
    std::size_t available;
    std::size_t floor_min;
    double quota;
    std::size_t alloc;
  };
  std::vector<Slot> slots;
  std::size_t min_sum = 0;
  for (const auto& [label, n] : counts) {
    const double quota = static_cast<double>(max_items) * static_cast<double>(n) /
                         static_cast<double>(total);
    const std::size_t lo = std::min(n, per_label_min);
    const std::size_t a =
        std::min(n, std::max(lo, static_cast<std::size_t>(std::floor(quota))));
    slots.push_back({label, n, lo, quota, a});
    min_sum += lo;
  }
  if (min_sum > max_items) {
    throw ConfigError("per_label_min " + std::to_string(per_label_min) +
                      " over " + std::to_string(counts.size()) +
                      " labels exceeds max_items " + std::to_string(max_items));
  }

  auto allocated = [&] {
    std::size_t s = 0;
    for (const auto& sl : slots) s += sl.alloc;
    return s;
  };

  // Largest-remainder top-up, then trim labels pushed above their quota by
  // the per-label minimum. Ties go to the lexicographically first label.
  std::size_t have = allocated();
  while (have < max_items) {
    Slot* best = nullptr;
    double best_key = -1e300;
    for (auto& sl : slots) {
      if (sl.alloc >= sl.available) continue;
      const double key = sl.quota - static_cast<double>(sl.alloc);
      if (key > best_key) {
        best_key = key;
        best = &sl;
      }
    }
    ++best->alloc;
    ++have;
  }
  while (have > max_items) {
    Slot* best = nullptr;
    double best_key = -1e300;
    for (auto& sl : slots) {
      if (sl.alloc <= sl.floor_min) continue;
      const double key = static_cast<double>(sl.alloc) - sl.quota;
      if (key > best_key) {
        best_key = key;
        best = &sl;
      }
    }
    --best->alloc;
    --have;
  }

  std::map<std::string, std::size_t> out;
  for (const auto& sl : slots) out[sl.label] = sl.alloc;
  return out;
}

// -------------------------------------------------------------- datasets

RelationVector LabeledDataset::item(std::size_t i) const {
  return {features.row(static_cast<Eigen::Index>(i)).transpose(),
          labels[label_of[i]], language};
}

std::vector<std::vector<Eigen::Index>> LabeledDataset::class_rows() const {
  std::vector<std::vector<Eigen::Index>> rows(labels.size());
  for (std::size_t i = 0; i < label_of.size(); ++i) {
    rows[label_of[i]].push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

LabeledDataset LabeledDataset::from_items(std::string language,
                                          std::string model_id, int layer,
                                          const Eigen::MatrixXd& features,
                                          const std::vector<std::string>& labels) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw DataError("feature rows and labels differ in length");
  }
  if (!features.allFinite()) throw DataError("non-finite feature value");
  LabeledDataset ds;
  ds.language = std::move(language);
  ds.model_id = std::move(model_id);
  ds.layer = layer;
  ds.labels = labels;
  std::sort(ds.labels.begin(), ds.labels.end());
  ds.labels.erase(std::unique(ds.labels.begin(), ds.labels.end()), ds.labels.end());
  ds.features = features;
  ds.label_of.reserve(labels.size());
  for (const auto& l : labels) {
    ds.label_of.push_back(static_cast<int>(
        std::lower_bound(ds.labels.begin(), ds.labels.end(), l) - ds.labels.begin()));
  }
  return ds;
}

LabeledDataset assemble_dataset(const treebank::Treebank& tb,
                                const EmbeddingSet& es, const Sampling& sampling,
                                bool strip_subtypes) {
  if (!tb.language.empty() && !es.language().empty() &&
      tb.language != es.language()) {
    throw JoinError("treebank language '" + tb.language +
                    "' differs from embedding language '" + es.language() + "'");
  }
  const auto extraction = treebank::extract_relations(tb, strip_subtypes);
  std::vector<const treebank::RelationInstance*> joinable;
  for (const auto& inst : extraction.instances) {
    if (es.has_word(inst.sentence_id, inst.head_index) &&
        es.has_word(inst.sentence_id, inst.dep_index)) {
      joinable.push_back(&inst);
    }
  }
  if (joinable.empty()) {
    throw DataError("no relation instance of '" + tb.language +
                    "' joins with the embedding set");
  }

  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < joinable.size(); ++i) {
    by_label[joinable[i]->label].push_back(i);
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& [label, idx] : by_label) counts[label] = idx.size();
  const auto alloc =
      allocate_stratified(counts, sampling.max_items, sampling.per_label_min);

  Rng rng = substream(sampling.seed, "sampling");
  std::vector<std::size_t> chosen;
  for (auto& [label, idx] : by_label) {
    const std::size_t take = alloc.at(label);
    // Partial Fisher-Yates: the first `take` slots become the sample.
    for (std::size_t i = 0; i < take && take < idx.size(); ++i) {
      std::swap(idx[i], idx[i + uniform_index(rng, idx.size() - i)]);
    }
    chosen.insert(chosen.end(), idx.begin(), idx.begin() + take);
  }
  std::sort(chosen.begin(), chosen.end());

  Eigen::MatrixXd features(static_cast<Eigen::Index>(chosen.size()), es.dim());
  std::vector<std::string> labels;
  labels.reserve(chosen.size());
  for (std::size_t r = 0; r < chosen.size(); ++r) {
    const auto rv = relation_vector(es, *joinable[chosen[r]]);
    features.row(static_cast<Eigen::Index>(r)) = rv.features.transpose();
    labels.push_back(rv.label);
  }
  LabeledDataset ds = LabeledDataset::from_items(es.language(), es.model_id(),
                                                 es.layer(), features, labels);
  ds.metadata["sampling"] = {{"max_items", sampling.max_items},
                             {"per_label_min", sampling.per_label_min},
                             {"seed", sampling.seed}};
  ds.metadata["strip_subtypes"] = strip_subtypes;
  ds.metadata["relation_instances"] = extraction.instances.size();
  ds.metadata["joinable_instances"] = joinable.size();
  ds.metadata["rejected_labels"] = extraction.rejects.size();
  ds.metadata["sampled_items"] = chosen.size();
  return ds;
}

}  // namespace langdist::embed
