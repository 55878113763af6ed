#include "langdist/treebank.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <unordered_set>

#include "json.hpp"
#include "langdist/error.hpp"
#include "langdist/io.hpp"

namespace langdist::treebank {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool to_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

struct PendingSentence {
  std::string id;
  std::vector<Token> tokens;
  std::vector<std::size_t> lines;
  std::size_t first_line = 0;

  bool empty() const { return tokens.empty() && id.empty(); }
};

void validate_sentence(const PendingSentence& s) {
  const int n = static_cast<int>(s.tokens.size());
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const Token& t = s.tokens[i];
    const std::size_t line = s.lines[i];
    if (t.index != i + 1) {
      throw ParseError("token index " + std::to_string(t.index) +
                           " breaks the contiguous 1..n sequence",
                       line);
    }
    if (t.head < 0 || t.head > n) {
      throw ParseError("head " + std::to_string(t.head) +
                           " outside sentence of length " + std::to_string(n),
                       line);
    }
    if (t.head == t.index) throw ParseError("token is its own head", line);
    if (t.deprel.empty() || t.deprel == "_") {
      throw ParseError("empty dependency relation", line);
    }
    if (t.head == 0) ++roots;
  }
  if (roots != 1) {
    throw ParseError("sentence has " + std::to_string(roots) +
                         " root tokens, expected exactly 1",
                     s.first_line);
  }
}

}  // namespace

std::size_t Treebank::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.tokens.size();
  return n;
}

const std::vector<std::string>& universal_relations() {
  static const std::vector<std::string> kRelations = {
      "acl",       "advcl",      "advmod",   "amod",     "appos",
      "aux",       "case",       "cc",       "ccomp",    "clf",
      "compound",  "conj",       "cop",      "csubj",    "dep",
      "det",       "discourse",  "dislocated", "expl",   "fixed",
      "flat",      "goeswith",   "iobj",     "list",     "mark",
      "nmod",      "nsubj",      "nummod",   "obj",      "obl",
      "orphan",    "parataxis",  "punct",    "reparandum", "root",
      "vocative",  "xcomp"};
  return kRelations;
}

bool is_universal_relation(std::string_view label) {
  const auto& rel = universal_relations();
  return std::find(rel.begin(), rel.end(), label) != rel.end();
}

std::string strip_subtype(std::string_view label) {
  return std::string(label.substr(0, label.find(':')));
}

Treebank parse_conllu(std::string_view text, std::string language) {
  Treebank tb;
  tb.language = std::move(language);
  std::unordered_set<std::string> seen_ids;
  PendingSentence cur;

  auto flush = [&] {
    if (cur.tokens.empty()) {
      cur = PendingSentence{};
      return;
    }
    validate_sentence(cur);
    Sentence s;
    s.id = cur.id.empty() ? std::to_string(tb.sentences.size() + 1) : cur.id;
    if (!seen_ids.insert(s.id).second) {
      throw ParseError("duplicate sentence id '" + s.id + "'", cur.first_line);
    }
    for (const Token& t : cur.tokens) {
      if (t.head != 0) tb.label_inventory.insert(t.deprel);
    }
    s.tokens = std::move(cur.tokens);
    tb.sentences.push_back(std::move(s));
    cur = PendingSentence{};
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (trim(line).empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      std::string_view body = trim(line.substr(1));
      if (body.substr(0, 7) == "sent_id") {
        std::string_view rest = trim(body.substr(7));
        if (!rest.empty() && rest.front() == '=') {
          if (cur.first_line == 0) cur.first_line = line_no;
          cur.id = std::string(trim(rest.substr(1)));
        }
      }
      continue;
    }

    const auto cols = split(line, '\t');
    if (cols.size() != 10) {
      throw ParseError("expected 10 tab-separated columns, found " +
                           std::to_string(cols.size()),
                       line_no);
    }
    const std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos ||
        id.find('.') != std::string_view::npos) {
      continue;  // multiword range or empty node
    }
    Token t;
    if (!to_int(id, t.index) || t.index < 1) {
      throw ParseError("invalid token id '" + std::string(id) + "'", line_no);
    }
    if (!to_int(cols[6], t.head)) {
      throw ParseError("non-integer head '" + std::string(cols[6]) + "'",
                       line_no);
    }
    t.form = std::string(cols[1]);
    t.upos = std::string(cols[3]);
    t.deprel = std::string(cols[7]);
    if (cur.first_line == 0) cur.first_line = line_no;
    cur.tokens.push_back(std::move(t));
    cur.lines.push_back(line_no);
  }
  flush();
  return tb;
}

Treebank read_conllu_file(const std::string& path, std::string language) {
  if (language.empty()) language = language_from_path(path);
  try {
    return parse_conllu(read_file(path), std::move(language));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

std::string language_from_path(const std::string& path) {
  const std::string stem = std::filesystem::path(path).stem().string();
  const std::size_t cut = stem.find_first_of("_-.");
  return cut == std::string::npos ? stem : stem.substr(0, cut);
}

Extraction extract_relations(const Treebank& tb, bool strip_subtypes) {
  Extraction ex;
  for (const Sentence& s : tb.sentences) {
    for (const Token& t : s.tokens) {
      if (t.head == 0) continue;
      const std::string label =
          strip_subtypes ? strip_subtype(t.deprel) : t.deprel;
      const std::string universal = strip_subtype(label);
      if (universal == "root" || !is_universal_relation(universal)) {
        ex.rejects.push_back({s.id, t.index, t.deprel,
                              universal == "root"
                                  ? "root label on a non-root token"
                                  : "not a universal dependency relation"});
        continue;
      }
      ex.instances.push_back({s.id, t.head, t.index, label});
    }
  }
  return ex;
}

std::set<std::string> relation_labels(const Treebank& tb, bool strip_subtypes) {
  std::set<std::string> out;
  for (const auto& inst : extract_relations(tb, strip_subtypes).instances) {
    out.insert(inst.label);
  }
  return out;
}

std::string relations_tsv(const std::vector<RelationInstance>& instances) {
  std::string out = "sentence_id\thead_index\tdep_index\tlabel\n";
  for (const auto& r : instances) {
    out += r.sentence_id;
    out += '\t';
    out += std::to_string(r.head_index);
    out += '\t';
    out += std::to_string(r.dep_index);
    out += '\t';
    out += r.label;
    out += '\n';
  }
  return out;
}

Summary summarize(const Treebank& tb, const Extraction& ex) {
  Summary s;
  s.sentence_count = tb.sentences.size();
  s.token_count = tb.token_count();
  s.relation_count = ex.instances.size();
  s.reject_count = ex.rejects.size();
  for (const auto& r : ex.instances) ++s.label_histogram[r.label];
  return s;
}

std::string summary_json(const Summary& s, const std::string& language) {
  nlohmann::ordered_json j;
  j["language"] = language;
  j["sentence_count"] = s.sentence_count;
  j["token_count"] = s.token_count;
  j["relation_count"] = s.relation_count;
  j["reject_count"] = s.reject_count;
  j["label_histogram"] = s.label_histogram;
  return j.dump(2) + "\n";
}

}  // namespace langdist::treebank
