#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace langdist::treebank {

struct Token {
  int index = 0;  // 1-based position in the sentence
  std::string form;
  std::string upos;
  int head = 0;  // 0 = root
  std::string deprel;
};

struct Sentence {
  std::string id;
  std::vector<Token> tokens;
};

struct RelationInstance {
  std::string sentence_id;
  int head_index = 0;
  int dep_index = 0;
  std::string label;

  bool operator==(const RelationInstance&) const = default;
};

struct Treebank {
  std::string language;
  std::vector<Sentence> sentences;
  // Raw dependency labels (subtypes kept) over all non-root tokens.
  std::set<std::string> label_inventory;

  std::size_t token_count() const;
};

// The 37 universal relations of UD v2; `root` is never emitted as an
// instance, leaving 36 relation labels.
const std::vector<std::string>& universal_relations();
bool is_universal_relation(std::string_view label);

// "nsubj:pass" -> "nsubj". Labels without a colon are returned unchanged.
std::string strip_subtype(std::string_view label);

// Parses CoNLL-U text. Multiword ranges (`3-4`) and empty nodes (`1.1`) are
// skipped; the sentence id comes from `# sent_id =` when present, otherwise
// from a running counter starting at 1. Throws ParseError with a line number
// on malformed input.
Treebank parse_conllu(std::string_view text, std::string language = "");
Treebank read_conllu_file(const std::string& path, std::string language = "");

// Language code guessed from a UD file name, e.g. "en_ewt-ud-train.conllu"
// gives "en".
std::string language_from_path(const std::string& path);

struct Reject {
  std::string sentence_id;
  int dep_index = 0;
  std::string label;
  std::string reason;
};

struct Extraction {
  std::vector<RelationInstance> instances;
  std::vector<Reject> rejects;
};

Extraction extract_relations(const Treebank& tb, bool strip_subtypes = true);

// Label inventory as seen through extract_relations with the same flag.
std::set<std::string> relation_labels(const Treebank& tb, bool strip_subtypes);

// Tab-separated (sentence_id, head_index, dep_index, label) with a header.
std::string relations_tsv(const std::vector<RelationInstance>& instances);

struct Summary {
  std::size_t sentence_count = 0;
  std::size_t token_count = 0;
  std::size_t relation_count = 0;
  std::size_t reject_count = 0;
  std::map<std::string, std::size_t> label_histogram;
};

Summary summarize(const Treebank& tb, const Extraction& ex);
std::string summary_json(const Summary& s, const std::string& language);

}  // namespace langdist::treebank
