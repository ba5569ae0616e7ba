#ifndef PROMPTCOREF_MENTION_DETECT_HPP
#define PROMPTCOREF_MENTION_DETECT_HPP

// Candidate mention sources: gold mentions, spans read from an external
// CoNLL prediction file, or mentions detected by prompting the model.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "promptcoref/corpus.hpp"
#include "promptcoref/extraction.hpp"
#include "promptcoref/llm.hpp"
#include "promptcoref/metrics.hpp"
#include "promptcoref/prompting.hpp"

namespace promptcoref {

enum class MentionSourceKind { gold, external_file, llm_prompted };

struct MentionSource {
  MentionSourceKind kind = MentionSourceKind::gold;
  /// File path for external_file, backend id for llm_prompted.
  std::string provenance;
};

inline std::string to_string(const MentionSource& s) {
  switch (s.kind) {
    case MentionSourceKind::gold:
      return "gold";
    case MentionSourceKind::external_file:
      return "file:" + s.provenance;
    case MentionSourceKind::llm_prompted:
      return "llm";
  }
  return "?";
}

/// "gold", "file:PATH" or "llm".
inline MentionSource parse_mention_source(std::string_view s) {
  if (s == "gold") return {MentionSourceKind::gold, "gold"};
  if (s == "llm") return {MentionSourceKind::llm_prompted, ""};
  if (s.starts_with("file:") && s.size() > 5) return {MentionSourceKind::external_file, std::string(s.substr(5))};
  throw std::invalid_argument("unknown mention source '" + std::string(s) + "' (expected gold, file:PATH or llm)");
}

class MissingPredictionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Predicted mentions from CoNLL files whose coreference column holds
/// mention brackets. Cluster ids in the file are ignored.
class ExternalMentionIndex {
 public:
  ExternalMentionIndex() = default;

  static ExternalMentionIndex load(const std::filesystem::path& path, Dialect dialect) {
    ExternalMentionIndex idx;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read mention file '" + path.string() + "'");
    for (const auto& d : parse_conll(in, dialect)) idx.add(d);
    return idx;
  }

  void add(const Document& d) {
    MentionSet ms = d.gold_clusters ? d.gold_clusters->mentions() : MentionSet{};
    by_key_[d.key()] = ms;
    by_id_.try_emplace(d.doc_id, std::move(ms));
  }

  const MentionSet& lookup(const Document& doc) const {
    if (auto it = by_key_.find(doc.key()); it != by_key_.end()) return it->second;
    if (auto it = by_id_.find(doc.doc_id); it != by_id_.end()) return it->second;
    throw MissingPredictionError(doc.key() + ": no predicted mentions in the external file");
  }

  std::size_t size() const { return by_key_.size(); }

 private:
  std::map<std::string, MentionSet> by_key_;
  std::map<std::string, MentionSet> by_id_;
};

/// Drops spans outside the document and spans crossing an earlier-starting
/// kept span. Nesting is kept as is.
inline MentionSet validate_mentions(const Document& doc, const MentionSet& in, std::vector<std::string>* warnings) {
  std::vector<MentionSpan> sorted;
  for (const auto& m : in) {
    if (doc.contains(m)) {
      sorted.push_back(m);
    } else if (warnings != nullptr) {
      warnings->push_back(doc.key() + ": dropped out-of-bounds mention [" + std::to_string(m.start) + "," +
                          std::to_string(m.end) + "]");
    }
  }
  std::sort(sorted.begin(), sorted.end(), document_order);
  MentionSet out;
  std::vector<MentionSpan> kept;
  for (const auto& m : sorted) {
    const bool crossing = std::any_of(kept.begin(), kept.end(), [&](const MentionSpan& k) { return k.crosses(m); });
    if (crossing) {
      if (warnings != nullptr) {
        warnings->push_back(doc.key() + ": dropped crossing mention [" + std::to_string(m.start) + "," +
                            std::to_string(m.end) + "]");
      }
      continue;
    }
    kept.push_back(m);
    out.insert(m);
  }
  return out;
}

/// Classifier adapter for the echo-gold backend's mention lists.
inline llm::MentionClassifier mention_class_classifier() {
  return [](const Document& doc, const MentionSpan& m) { return static_cast<int>(classify_mention(doc, m)); };
}

struct MdDetection {
  MentionSet spans;
  MdLists lists;
  std::size_t dropped = 0;
  std::vector<std::string> dropped_strings;
  llm::CompletionResponse response;
};

inline MdDetection detect_mentions_llm(const Document& doc, llm::CompletionBackend& backend,
                                       const std::string& model = {},
                                       const PromptTemplate& tmpl = default_template(PromptKind::mention_detection)) {
  const auto prompt = render_md_prompt(doc, tmpl);
  llm::CompletionRequest req;
  req.prompt = prompt.text;
  req.model_name = model;
  req.max_output_tokens = llm::default_max_output_tokens(prompt.body);
  llm::PromptContext ctx;
  ctx.kind = PromptKind::mention_detection;
  ctx.doc = &doc;
  MdDetection out;
  out.response = backend.complete(req, &ctx);
  out.lists = parse_md_output(out.response.text);
  auto g = ground_md_strings(doc, out.lists);
  out.spans = std::move(g.spans);
  out.dropped = g.dropped;
  out.dropped_strings = std::move(g.dropped_strings);
  return out;
}

struct MentionSourceContext {
  const ExternalMentionIndex* external = nullptr;
  llm::CompletionBackend* backend = nullptr;
  std::string model;
  std::optional<PromptTemplate> md_template;
};

struct MentionResult {
  MentionSet spans;
  std::vector<std::string> warnings;
  std::size_t md_dropped = 0;
};

inline MentionResult mentions_for(const Document& doc, const MentionSource& source, const MentionSourceContext& ctx) {
  MentionResult r;
  switch (source.kind) {
    case MentionSourceKind::gold:
      r.spans = gold_mentions(doc);
      break;
    case MentionSourceKind::external_file: {
      if (ctx.external == nullptr) throw std::logic_error("external mention source without an index");
      r.spans = validate_mentions(doc, ctx.external->lookup(doc), &r.warnings);
      break;
    }
    case MentionSourceKind::llm_prompted: {
      if (ctx.backend == nullptr) throw std::logic_error("llm mention source without a backend");
      auto det = detect_mentions_llm(doc, *ctx.backend, ctx.model,
                                     ctx.md_template ? *ctx.md_template
                                                     : default_template(PromptKind::mention_detection));
      r.md_dropped = det.dropped;
      for (const auto& s : det.dropped_strings) r.warnings.push_back(doc.key() + ": ungrounded MD string '" + s + "'");
      r.spans = validate_mentions(doc, det.spans, &r.warnings);
      break;
    }
  }
  return r;
}

}  // namespace promptcoref

#endif  // PROMPTCOREF_MENTION_DETECT_HPP
