#ifndef PROMPTCOREF_CORPUS_HPP
#define PROMPTCOREF_CORPUS_HPP

// In-memory document model and the CoNLL-2012 / SemEval-2010 column readers
// and writers.
//
// Coreference column notation (both dialects):
//   -  or  _      no mention boundary on this token
//   (12           a mention of cluster 12 opens here
//   12)           the most recent open mention of cluster 12 closes here
//   (12)          single-token mention
//   parts are joined with '|'
//
// Cluster ids read from files are arbitrary; they are renumbered densely in
// order of first appearance (document order of each cluster's first mention).

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "promptcoref/text.hpp"

namespace promptcoref {

/// Inclusive token range [start, end] in document token indices.
struct MentionSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start + 1; }
  bool contains(const MentionSpan& o) const { return start <= o.start && o.end <= end; }
  bool overlaps(const MentionSpan& o) const { return start <= o.end && o.start <= end; }
  /// Partial overlap where neither span contains the other.
  bool crosses(const MentionSpan& o) const {
    return overlaps(o) && !contains(o) && !o.contains(*this);
  }

  friend auto operator<=>(const MentionSpan&, const MentionSpan&) = default;
};

/// Document order: earlier start first, and at a shared start the longer
/// (enclosing) span first. This is the order in which opening brackets appear.
inline bool document_order(const MentionSpan& a, const MentionSpan& b) {
  if (a.start != b.start) return a.start < b.start;
  return a.end > b.end;
}

using MentionSet = std::set<MentionSpan>;

class ClusteringError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A set of disjoint, non-empty mention sets. Stored canonically: mentions in
/// document order within each cluster, clusters ordered by their first
/// mention. Two clusterings compare equal iff they denote the same partition.
class Clustering {
 public:
  using Cluster = std::vector<MentionSpan>;

  Clustering() = default;

  explicit Clustering(std::vector<Cluster> clusters) : clusters_(std::move(clusters)) {
    std::set<MentionSpan> seen;
    for (auto& c : clusters_) {
      if (c.empty()) throw ClusteringError("empty cluster");
      std::sort(c.begin(), c.end(), document_order);
      c.erase(std::unique(c.begin(), c.end()), c.end());
      for (const auto& m : c) {
        if (m.start > m.end) throw ClusteringError("mention with start > end");
        if (!seen.insert(m).second) {
          throw ClusteringError("mention [" + std::to_string(m.start) + "," +
                                std::to_string(m.end) + "] appears in two clusters");
        }
      }
    }
    std::sort(clusters_.begin(), clusters_.end(),
              [](const Cluster& a, const Cluster& b) { return document_order(a.front(), b.front()); });
  }

  const std::vector<Cluster>& clusters() const { return clusters_; }
  std::size_t size() const { return clusters_.size(); }
  bool empty() const { return clusters_.empty(); }
  auto begin() const { return clusters_.begin(); }
  auto end() const { return clusters_.end(); }

  std::size_t singleton_count() const {
    return static_cast<std::size_t>(
        std::count_if(clusters_.begin(), clusters_.end(), [](const Cluster& c) { return c.size() == 1; }));
  }
  bool has_singletons() const { return singleton_count() > 0; }

  std::size_t mention_count() const {
    std::size_t n = 0;
    for (const auto& c : clusters_) n += c.size();
    return n;
  }

  MentionSet mentions() const {
    MentionSet out;
    for (const auto& c : clusters_) out.insert(c.begin(), c.end());
    return out;
  }

  /// Index of the cluster containing `m`, if any.
  std::optional<std::size_t> cluster_of(const MentionSpan& m) const {
    for (std::size_t i = 0; i < clusters_.size(); ++i) {
      if (std::find(clusters_[i].begin(), clusters_[i].end(), m) != clusters_[i].end()) return i;
    }
    return std::nullopt;
  }

  friend bool operator==(const Clustering&, const Clustering&) = default;

 private:
  std::vector<Cluster> clusters_;
};

struct Token {
  std::string surface;
  std::size_t doc_index = 0;
  std::size_t sentence_index = 0;
  std::optional<std::string> pos_tag;
  std::optional<std::string> ne_tag;
};

enum class Dialect { conll2012, semeval2010 };

/// Column layout of a dialect. One bracket engine reads both.
struct DialectDescriptor {
  Dialect dialect;
  std::string_view name;
  std::size_t token_column;
  std::size_t pos_column;
  std::size_t ne_column;
  std::size_t min_columns;  // including the trailing coreference column
  std::string_view none_marker;
};

inline const DialectDescriptor& describe(Dialect d) {
  static const DialectDescriptor kConll{Dialect::conll2012, "conll2012", 3, 4, 10, 12, "-"};
  static const DialectDescriptor kSemeval{Dialect::semeval2010, "semeval2010", 1, 4, 12, 14, "_"};
  return d == Dialect::conll2012 ? kConll : kSemeval;
}

inline Dialect parse_dialect(std::string_view name) {
  if (name == "conll2012" || name == "conll") return Dialect::conll2012;
  if (name == "semeval2010" || name == "semeval") return Dialect::semeval2010;
  throw std::invalid_argument("unknown dialect '" + std::string(name) + "'");
}

struct Document {
  std::string doc_id;
  std::string part;  // CoNLL-2012 part number, empty for SemEval
  std::string language = "en";
  std::optional<std::string> genre;
  std::vector<Token> tokens;
  std::size_t sentence_count = 0;
  std::optional<Clustering> gold_clusters;
  Dialect dialect = Dialect::conll2012;
  /// Original non-coreference columns per token when read from a file.
  std::vector<std::vector<std::string>> columns;

  /// Unique key across a corpus: id plus part number when present.
  std::string key() const { return part.empty() ? doc_id : doc_id + "#" + part; }

  /// Half-open token ranges [begin, end) per sentence.
  std::vector<std::pair<std::size_t, std::size_t>> sentence_ranges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out(sentence_count, {0, 0});
    for (std::size_t s = 0; s < sentence_count; ++s) out[s] = {tokens.size(), tokens.size()};
    for (const auto& t : tokens) {
      auto& r = out[t.sentence_index];
      if (r.first == tokens.size()) r.first = t.doc_index;
      r.second = t.doc_index + 1;
    }
    return out;
  }

  bool contains(const MentionSpan& m) const { return m.start <= m.end && m.end < tokens.size(); }
};

/// Surface text of a span: its tokens joined by single spaces.
inline std::string span_text(const Document& doc, const MentionSpan& m) {
  std::string out;
  for (std::size_t i = m.start; i <= m.end && i < doc.tokens.size(); ++i) {
    if (i != m.start) out.push_back(' ');
    out += doc.tokens[i].surface;
  }
  return out;
}

class DocumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Checks the Token/Document invariants; throws DocumentError on violation.
inline void validate(const Document& doc) {
  std::size_t sentence = 0;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    const auto& t = doc.tokens[i];
    if (t.surface.empty()) throw DocumentError(doc.key() + ": empty token surface at " + std::to_string(i));
    if (t.doc_index != i) throw DocumentError(doc.key() + ": non-consecutive token index at " + std::to_string(i));
    const bool ok = i == 0 ? t.sentence_index == 0
                           : (t.sentence_index == sentence || t.sentence_index == sentence + 1);
    if (!ok) throw DocumentError(doc.key() + ": sentence indices have a gap at token " + std::to_string(i));
    sentence = t.sentence_index;
  }
  const std::size_t seen = doc.tokens.empty() ? 0 : sentence + 1;
  if (seen != doc.sentence_count) throw DocumentError(doc.key() + ": sentence_count mismatch");
  if (doc.gold_clusters) {
    for (const auto& c : *doc.gold_clusters) {
      for (const auto& m : c) {
        if (!doc.contains(m)) throw DocumentError(doc.key() + ": gold mention out of bounds");
      }
    }
  }
}

/// Builds a document from pre-tokenized sentences.
inline Document make_document(std::string doc_id, const std::vector<std::vector<std::string>>& sentences,
                              std::string language = "en") {
  Document doc;
  doc.doc_id = std::move(doc_id);
  doc.language = std::move(language);
  for (const auto& sentence : sentences) {
    if (sentence.empty()) continue;
    for (const auto& w : sentence) {
      doc.tokens.push_back(Token{w, doc.tokens.size(), doc.sentence_count, std::nullopt, std::nullopt});
    }
    ++doc.sentence_count;
  }
  return doc;
}

/// Builds a document from whitespace-tokenized sentence strings.
inline Document make_document(std::string doc_id, const std::vector<std::string>& sentences,
                              std::string language = "en") {
  std::vector<std::vector<std::string>> split;
  split.reserve(sentences.size());
  for (const auto& s : sentences) split.push_back(text::split_ws(s));
  return make_document(std::move(doc_id), split, std::move(language));
}

// ---------------------------------------------------------------------------
// Reading

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& doc_id, std::size_t line, const std::string& what)
      : std::runtime_error(format(doc_id, line, what)), doc_id_(doc_id), line_(line) {}

  const std::string& doc_id() const { return doc_id_; }
  std::size_t line() const { return line_; }

 private:
  static std::string format(const std::string& doc_id, std::size_t line, const std::string& what) {
    std::ostringstream os;
    os << "parse error";
    if (!doc_id.empty()) os << " in document '" << doc_id << "'";
    os << " at line " << line << ": " << what;
    return os.str();
  }
  std::string doc_id_;
  std::size_t line_;
};

class DialectError : public ParseError {
 public:
  using ParseError::ParseError;
};

struct ParseOptions {
  std::string language = "en";
};

namespace detail {

enum class BracketKind { open, close, single };

struct BracketPart {
  BracketKind kind;
  long id;
};

inline bool parse_cluster_id(std::string_view s, long& out) {
  if (s.empty() || s.size() > 18) return false;
  long v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

/// Decodes one coreference cell. Returns false on anything outside the
/// bracket grammar, including sub-token boundary markup.
inline bool parse_coref_cell(std::string_view cell, std::string_view none, std::vector<BracketPart>& out) {
  out.clear();
  if (cell == none || cell == "-" || cell == "_") return true;
  for (const auto& part : text::split(cell, '|')) {
    std::string_view p = part;
    long id = 0;
    if (p.size() >= 3 && p.front() == '(' && p.back() == ')' && parse_cluster_id(p.substr(1, p.size() - 2), id)) {
      out.push_back({BracketKind::single, id});
    } else if (p.size() >= 2 && p.front() == '(' && parse_cluster_id(p.substr(1), id)) {
      out.push_back({BracketKind::open, id});
    } else if (p.size() >= 2 && p.back() == ')' && parse_cluster_id(p.substr(0, p.size() - 1), id)) {
      out.push_back({BracketKind::close, id});
    } else {
      return false;
    }
  }
  return true;
}

/// Stateful reader for the named-entity column. Handles CoNLL-2012
/// "(PERSON*" / "*" / "*)" and SemEval "(person" / "person)" / "(person)".
class NeColumnReader {
 public:
  std::optional<std::string> feed(std::string_view cell) {
    std::optional<std::string> tag = stack_.empty() ? std::nullopt : std::optional<std::string>(stack_.back());
    std::size_t i = 0;
    std::size_t pops = 0;
    while (i < cell.size()) {
      const char c = cell[i];
      if (c == '(') {
        std::size_t j = i + 1;
        while (j < cell.size() && cell[j] != '*' && cell[j] != ')' && cell[j] != '(') ++j;
        std::string label(cell.substr(i + 1, j - i - 1));
        stack_.push_back(label);
        tag = label;
        i = j;
      } else if (c == ')') {
        ++pops;
        ++i;
      } else if (c == '*' || c == '-' || c == '_') {
        ++i;
      } else {
        // "label)" closing form
        std::size_t j = i;
        while (j < cell.size() && cell[j] != ')' && cell[j] != '(' && cell[j] != '*') ++j;
        if (!tag) tag = std::string(cell.substr(i, j - i));
        i = j;
      }
    }
    for (std::size_t k = 0; k < pops && !stack_.empty(); ++k) stack_.pop_back();
    if (tag && tag->empty()) tag.reset();
    return tag;
  }

 private:
  std::vector<std::string> stack_;
};

inline std::optional<std::string> optional_column(const std::vector<std::string>& cols, std::size_t idx) {
  if (idx >= cols.size()) return std::nullopt;
  const auto& v = cols[idx];
  if (v.empty() || v == "-" || v == "_") return std::nullopt;
  return v;
}

}  // namespace detail

/// Reads every document in a CoNLL-2012 or SemEval-2010 stream.
inline std::vector<Document> parse_conll(std::istream& in, Dialect dialect, const ParseOptions& opts = {}) {
  const auto& desc = describe(dialect);
  std::vector<Document> docs;

  struct Open {
    std::size_t token;
    std::size_t line;
  };
  std::optional<Document> cur;
  std::size_t column_count = 0;
  std::size_t sentence_tokens = 0;
  std::map<long, std::vector<Open>> open;
  std::map<long, std::vector<MentionSpan>> mentions;
  detail::NeColumnReader ne_reader;
  std::vector<detail::BracketPart> parts;

  auto finish = [&](std::size_t line_no) {
    for (const auto& [id, stack] : open) {
      if (!stack.empty()) {
        throw ParseError(cur->doc_id, stack.back().line,
                         "mention of cluster " + std::to_string(id) + " is never closed");
      }
    }
    if (sentence_tokens > 0) ++cur->sentence_count;
    std::vector<Clustering::Cluster> clusters;
    clusters.reserve(mentions.size());
    for (auto& [id, ms] : mentions) clusters.push_back(std::move(ms));
    try {
      cur->gold_clusters = Clustering(std::move(clusters));
    } catch (const ClusteringError& e) {
      throw ParseError(cur->doc_id, line_no, e.what());
    }
    docs.push_back(std::move(*cur));
    cur.reset();
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view trimmed = text::trim(line);

    if (trimmed.starts_with("#begin document")) {
      if (cur) throw ParseError(cur->doc_id, line_no, "#begin document inside an open document");
      Document doc;
      doc.dialect = dialect;
      doc.language = opts.language;
      std::string_view rest = text::trim(trimmed.substr(std::string_view("#begin document").size()));
      if (dialect == Dialect::conll2012) {
        // "(<id>); part <n>"
        const auto semi = rest.rfind("; part ");
        std::string_view id = semi == std::string_view::npos ? rest : rest.substr(0, semi);
        if (semi != std::string_view::npos) doc.part = std::string(text::trim(rest.substr(semi + 7)));
        if (id.size() >= 2 && id.front() == '(' && id.back() == ')') id = id.substr(1, id.size() - 2);
        doc.doc_id = std::string(id);
        const auto slash = doc.doc_id.find('/');
        if (slash != std::string::npos) doc.genre = doc.doc_id.substr(0, slash);
      } else {
        doc.doc_id = std::string(rest);
      }
      if (doc.doc_id.empty()) throw ParseError("", line_no, "document without an id");
      cur = std::move(doc);
      column_count = 0;
      sentence_tokens = 0;
      open.clear();
      mentions.clear();
      ne_reader = detail::NeColumnReader{};
      continue;
    }
    if (trimmed.starts_with("#end document")) {
      if (!cur) throw ParseError("", line_no, "#end document without #begin document");
      finish(line_no);
      continue;
    }
    if (trimmed.empty()) {
      if (cur && sentence_tokens > 0) {
        ++cur->sentence_count;
        sentence_tokens = 0;
      }
      continue;
    }
    if (!cur) {
      if (trimmed.front() == '#') continue;  // comments between documents
      throw ParseError("", line_no, "token line outside of a document");
    }

    auto cols = text::split_ws(trimmed);
    if (cols.size() < desc.min_columns) {
      throw DialectError(cur->doc_id, line_no,
                         "expected at least " + std::to_string(desc.min_columns) + " columns for " +
                             std::string(desc.name) + ", found " + std::to_string(cols.size()));
    }
    if (column_count == 0) {
      column_count = cols.size();
    } else if (cols.size() != column_count) {
      throw DialectError(cur->doc_id, line_no,
                         "column count changed from " + std::to_string(column_count) + " to " +
                             std::to_string(cols.size()));
    }

    const std::size_t index = cur->tokens.size();
    const std::string coref = cols.back();
    if (!detail::parse_coref_cell(coref, desc.none_marker, parts)) {
      throw ParseError(cur->doc_id, line_no, "malformed coreference cell '" + coref + "'");
    }
    for (const auto& p : parts) {
      switch (p.kind) {
        case detail::BracketKind::single:
          mentions[p.id].push_back({index, index});
          break;
        case detail::BracketKind::open:
          open[p.id].push_back({index, line_no});
          break;
        case detail::BracketKind::close: {
          auto it = open.find(p.id);
          if (it == open.end() || it->second.empty()) {
            throw ParseError(cur->doc_id, line_no,
                             "closing bracket for cluster " + std::to_string(p.id) + " without an open mention");
          }
          mentions[p.id].push_back({it->second.back().token, index});
          it->second.pop_back();
          break;
        }
      }
    }

    Token tok;
    tok.surface = cols[desc.token_column];
    tok.doc_index = index;
    tok.sentence_index = cur->sentence_count;
    tok.pos_tag = detail::optional_column(cols, desc.pos_column);
    if (desc.ne_column + 1 < cols.size()) tok.ne_tag = ne_reader.feed(cols[desc.ne_column]);
    cur->tokens.push_back(std::move(tok));
    cols.pop_back();
    cur->columns.push_back(std::move(cols));
    ++sentence_tokens;
  }
  if (cur) throw ParseError(cur->doc_id, line_no, "missing #end document");
  return docs;
}

inline std::vector<Document> parse_conll(std::string_view input, Dialect dialect, const ParseOptions& opts = {}) {
  std::istringstream in{std::string(input)};
  return parse_conll(in, dialect, opts);
}

// ---------------------------------------------------------------------------
// Writing

class SerializeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::vector<std::string> default_columns(const Document& doc, std::size_t token_index,
                                                std::size_t index_in_sentence,
                                                const std::optional<std::string>& prev_ne,
                                                const std::optional<std::string>& next_ne) {
  const auto& t = doc.tokens[token_index];
  const std::string pos = t.pos_tag.value_or(doc.dialect == Dialect::conll2012 ? "-" : "_");
  if (doc.dialect == Dialect::semeval2010) {
    std::vector<std::string> cols(16, "_");
    cols[0] = std::to_string(index_in_sentence + 1);
    cols[1] = t.surface;
    cols[4] = pos;
    if (t.ne_tag) {
      const bool opens = prev_ne != t.ne_tag;
      const bool closes = next_ne != t.ne_tag;
      cols[12] = (opens ? "(" : "") + *t.ne_tag + (closes ? ")" : "");
    }
    return cols;
  }
  std::string ne = "*";
  if (t.ne_tag) {
    const bool opens = prev_ne != t.ne_tag;
    const bool closes = next_ne != t.ne_tag;
    ne = (opens ? "(" + *t.ne_tag : std::string()) + "*" + (closes ? ")" : "");
  }
  return {doc.doc_id, doc.part.empty() ? "0" : doc.part, std::to_string(index_in_sentence), t.surface, pos,
          "-", "-", "-", "-", "-", ne};
}

}  // namespace detail

/// Writes `doc` with `clustering` in the coreference column, using the
/// document's dialect. Cluster ids are emitted 0,1,2,... in order of first
/// appearance; nested mentions produce stacked brackets.
inline std::string serialize_conll(const Document& doc, const Clustering& clustering) {
  const auto& desc = describe(doc.dialect);
  const std::size_t n = doc.tokens.size();

  struct Mark {
    std::size_t other;  // end for opens, start for closes
    std::size_t cluster;
  };
  std::vector<std::vector<Mark>> opens(n), closes(n);
  std::vector<std::vector<std::size_t>> singles(n);
  for (std::size_t c = 0; c < clustering.size(); ++c) {
    const auto& cluster = clustering.clusters()[c];
    for (const auto& m : cluster) {
      if (!doc.contains(m)) {
        throw SerializeError(doc.key() + ": mention [" + std::to_string(m.start) + "," + std::to_string(m.end) +
                             "] is outside the document");
      }
      for (const auto& o : cluster) {
        if (m.crosses(o)) {
          throw SerializeError(doc.key() + ": crossing mentions within one cluster cannot be written");
        }
      }
      if (m.start == m.end) {
        singles[m.start].push_back(c);
      } else {
        opens[m.start].push_back({m.end, c});
        closes[m.end].push_back({m.start, c});
      }
    }
  }

  std::ostringstream os;
  if (doc.dialect == Dialect::conll2012) {
    os << "#begin document (" << doc.doc_id << "); part " << (doc.part.empty() ? "000" : doc.part) << "\n";
  } else {
    os << "#begin document " << doc.doc_id << "\n";
  }
  const bool have_columns = doc.columns.size() == n;
  std::size_t index_in_sentence = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && doc.tokens[i].sentence_index != doc.tokens[i - 1].sentence_index) {
      os << "\n";
      index_in_sentence = 0;
    }
    std::vector<std::string> cols;
    if (have_columns) {
      cols = doc.columns[i];
    } else {
      const std::optional<std::string> prev = i > 0 && doc.tokens[i - 1].sentence_index == doc.tokens[i].sentence_index
                                                  ? doc.tokens[i - 1].ne_tag
                                                  : std::nullopt;
      const std::optional<std::string> next =
          i + 1 < n && doc.tokens[i + 1].sentence_index == doc.tokens[i].sentence_index ? doc.tokens[i + 1].ne_tag
                                                                                        : std::nullopt;
      cols = detail::default_columns(doc, i, index_in_sentence, prev, next);
    }

    auto o = opens[i];
    std::sort(o.begin(), o.end(), [](const Mark& a, const Mark& b) {
      return a.other != b.other ? a.other > b.other : a.cluster < b.cluster;
    });
    auto s = singles[i];
    std::sort(s.begin(), s.end());
    auto c = closes[i];
    std::sort(c.begin(), c.end(), [](const Mark& a, const Mark& b) {
      return a.other != b.other ? a.other > b.other : a.cluster < b.cluster;
    });
    std::vector<std::string> parts;
    for (const auto& m : o) parts.push_back("(" + std::to_string(m.cluster));
    for (auto id : s) parts.push_back("(" + std::to_string(id) + ")");
    for (const auto& m : c) parts.push_back(std::to_string(m.cluster) + ")");
    cols.push_back(parts.empty() ? std::string(desc.none_marker) : text::join(parts, "|"));
    os << text::join(cols, "\t") << "\n";
    ++index_in_sentence;
  }
  os << "\n#end document\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Gold mentions and statistics

class GoldUnavailableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Union of all gold mentions. Throws when the document carries no gold
/// annotation (the gold-mentions setting is unavailable for it).
inline MentionSet gold_mentions(const Document& doc) {
  if (!doc.gold_clusters) {
    throw GoldUnavailableError(doc.key() + ": no gold coreference annotation; gold-mentions setting unavailable");
  }
  return doc.gold_clusters->mentions();
}

struct GroupStats {
  std::size_t doc_count = 0;
  std::size_t token_count = 0;
  std::size_t annotated_docs = 0;
  std::size_t cluster_count = 0;
  std::size_t singleton_count = 0;

  double mean_tokens_per_doc() const {
    return doc_count == 0 ? 0.0 : static_cast<double>(token_count) / static_cast<double>(doc_count);
  }
  /// Absent when no document in the group carries gold clusters.
  std::optional<double> singleton_fraction() const {
    if (annotated_docs == 0) return std::nullopt;
    return cluster_count == 0 ? 0.0 : static_cast<double>(singleton_count) / static_cast<double>(cluster_count);
  }

  void add(const Document& doc) {
    ++doc_count;
    token_count += doc.tokens.size();
    if (doc.gold_clusters) {
      ++annotated_docs;
      cluster_count += doc.gold_clusters->size();
      singleton_count += doc.gold_clusters->singleton_count();
    }
  }
};

struct StatsReport {
  GroupStats overall;
  std::map<std::string, GroupStats> by_language;
  std::map<std::string, GroupStats> by_genre;

  std::size_t doc_count() const { return overall.doc_count; }
  double mean_tokens_per_doc() const { return overall.mean_tokens_per_doc(); }
  std::optional<double> singleton_fraction() const { return overall.singleton_fraction(); }
};

inline StatsReport corpus_stats(const std::vector<Document>& docs) {
  StatsReport r;
  for (const auto& d : docs) {
    r.overall.add(d);
    r.by_language[d.language].add(d);
    if (d.genre) r.by_genre[*d.genre].add(d);
  }
  return r;
}

inline nlohmann::json to_json(const GroupStats& g) {
  nlohmann::json j{{"doc_count", g.doc_count},
                   {"token_count", g.token_count},
                   {"mean_tokens_per_doc", g.mean_tokens_per_doc()},
                   {"cluster_count", g.cluster_count},
                   {"singleton_count", g.singleton_count}};
  if (auto f = g.singleton_fraction()) j["singleton_fraction"] = *f;
  return j;
}

inline nlohmann::json to_json(const StatsReport& r) {
  nlohmann::json j = to_json(r.overall);
  j["by_language"] = nlohmann::json::object();
  for (const auto& [k, g] : r.by_language) j["by_language"][k] = to_json(g);
  j["by_genre"] = nlohmann::json::object();
  for (const auto& [k, g] : r.by_genre) j["by_genre"][k] = to_json(g);
  return j;
}

/// Tab-separated table: one "all" row, then language and genre rows.
inline std::string to_tsv(const StatsReport& r) {
  std::ostringstream os;
  os << "group\tdocs\ttoks_per_doc\tclusters\tpct_singletons\n";
  auto row = [&](const std::string& name, const GroupStats& g) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", g.mean_tokens_per_doc());
    os << name << "\t" << g.doc_count << "\t" << buf << "\t" << g.cluster_count << "\t";
    if (auto f = g.singleton_fraction()) {
      std::snprintf(buf, sizeof buf, "%.1f", 100.0 * *f);
      os << buf;
    } else {
      os << "-";
    }
    os << "\n";
  };
  row("all", r.overall);
  for (const auto& [k, g] : r.by_language) row("lang:" + k, g);
  for (const auto& [k, g] : r.by_genre) row("genre:" + k, g);
  return os.str();
}

}  // namespace promptcoref

#endif  // PROMPTCOREF_CORPUS_HPP
