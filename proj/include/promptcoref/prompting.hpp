#ifndef PROMPTCOREF_PROMPTING_HPP
#define PROMPTCOREF_PROMPTING_HPP

// Prompt rendering for the three templates: document (marker-based),
// question answering, and mention detection.
//
// Detokenization joins tokens with single spaces and sentences with '\n';
// the aligner compares in exactly this space.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "promptcoref/corpus.hpp"

namespace promptcoref {

enum class PromptKind { document, qa, mention_detection };

inline std::string_view to_string(PromptKind k) {
  switch (k) {
    case PromptKind::document:
      return "document";
    case PromptKind::qa:
      return "qa";
    case PromptKind::mention_detection:
      return "md";
  }
  return "?";
}

inline PromptKind parse_prompt_kind(std::string_view s) {
  if (s == "document" || s == "doc") return PromptKind::document;
  if (s == "qa") return PromptKind::qa;
  if (s == "md" || s == "mention_detection") return PromptKind::mention_detection;
  throw std::invalid_argument("unknown template kind '" + std::string(s) + "'");
}

struct MarkerEntry {
  std::size_t ordinal = 0;
  MentionSpan span;
  std::size_t nesting_depth = 0;

  friend bool operator==(const MarkerEntry&, const MarkerEntry&) = default;
};

/// Entries in the left-to-right order of their opening brackets.
using MarkerRegistry = std::vector<MarkerEntry>;

struct MarkedText {
  std::string text;
  MarkerRegistry registry;
};

struct RenderedPrompt {
  PromptKind kind = PromptKind::document;
  std::string text;
  /// The text substituted into the template's input slot.
  std::string body;
  MarkerRegistry registry;
  std::optional<MentionSpan> target;
};

// ---------------------------------------------------------------------------
// Templates

/// A prompt template with `{input}` (document, md) or `{context}` and
/// `{mention}` (qa) slots. `version` is recorded in run manifests.
struct PromptTemplate {
  PromptKind kind;
  std::string version;
  std::string text;
};

inline constexpr std::string_view kDocumentTemplateText =
    "Annotate all entity mentions in the following text with coreference clusters. Use Markdown tags to "
    "indicate clusters in the output, with the following format [mention](#cluster_name)\n"
    "Input: {input}\n"
    "Output:";

inline constexpr std::string_view kQaTemplateText =
    "Instructions: Please carefully read the following passages. For each passage, you must identify which "
    "noun the mention marked in *bold* refers to.\n"
    "Context: {context}\n"
    "Question: What does *{mention}* refer to?\n"
    "Answer:";

inline constexpr std::string_view kMentionDetectionTemplateText =
    "In the following text, list all named entities, pronouns, and nominal noun phrases according to the "
    "OntoNotes conventions.\n"
    "Input: {input}\n"
    "Output:";

inline PromptTemplate default_template(PromptKind kind) {
  switch (kind) {
    case PromptKind::document:
      return {kind, "document.v1", std::string(kDocumentTemplateText)};
    case PromptKind::qa:
      return {kind, "qa.v1", std::string(kQaTemplateText)};
    case PromptKind::mention_detection:
      return {kind, "md.v1", std::string(kMentionDetectionTemplateText)};
  }
  throw std::logic_error("unreachable");
}

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::vector<std::string_view> required_slots(PromptKind kind) {
  if (kind == PromptKind::qa) return {"{context}", "{mention}"};
  return {"{input}"};
}

/// Loads a template override. One trailing newline is dropped so that text
/// files and the built-in constants compare byte-equal.
inline PromptTemplate load_template(const std::string& path, PromptKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TemplateError("cannot read template file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string body = ss.str();
  if (!body.empty() && body.back() == '\n') body.pop_back();
  for (auto slot : required_slots(kind)) {
    if (body.find(slot) == std::string::npos) {
      throw TemplateError("template '" + path + "' lacks the " + std::string(slot) + " slot");
    }
  }
  return {kind, "file:" + path + "@" + text::sha256_hex(body).substr(0, 12), body};
}

/// Single left-to-right pass: substituted values are never rescanned.
inline std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& slots) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    bool hit = false;
    if (tmpl[i] == '{') {
      for (const auto& [name, value] : slots) {
        if (tmpl.substr(i, name.size()) == name) {
          out += value;
          i += name.size();
          hit = true;
          break;
        }
      }
    }
    if (!hit) out.push_back(tmpl[i++]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string detokenize(const Document& doc, std::string_view sentence_sep = "\n") {
  std::string out;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    if (i > 0) {
      out += doc.tokens[i].sentence_index != doc.tokens[i - 1].sentence_index ? sentence_sep : " ";
    }
    out += doc.tokens[i].surface;
  }
  return out;
}

class CrossingMentionsError : public std::invalid_argument {
 public:
  CrossingMentionsError(MentionSpan a, MentionSpan b)
      : std::invalid_argument("crossing mentions [" + std::to_string(a.start) + "," + std::to_string(a.end) +
                              "] and [" + std::to_string(b.start) + "," + std::to_string(b.end) + "]"),
        first(a),
        second(b) {}
  MentionSpan first;
  MentionSpan second;
};

/// Returns the first crossing pair in document order, if any.
inline std::optional<std::pair<MentionSpan, MentionSpan>> find_crossing(const MentionSet& mentions) {
  std::vector<MentionSpan> sorted(mentions.begin(), mentions.end());
  std::sort(sorted.begin(), sorted.end(), document_order);
  // Stack of currently open spans; a properly nested set behaves like brackets.
  std::vector<MentionSpan> stack;
  for (const auto& m : sorted) {
    while (!stack.empty() && stack.back().end < m.start) stack.pop_back();
    if (!stack.empty() && !stack.back().contains(m)) return std::make_pair(stack.back(), m);
    stack.push_back(m);
  }
  return std::nullopt;
}

/// Wraps each mention as `[surface](#)`. Nested mentions nest their markers;
/// at a shared start the longer span opens first.
inline MarkedText mark_mentions(const Document& doc, const MentionSet& mentions) {
  for (const auto& m : mentions) {
    if (!doc.contains(m)) {
      throw DocumentError(doc.key() + ": mention [" + std::to_string(m.start) + "," + std::to_string(m.end) +
                          "] is outside the document");
    }
  }
  if (auto crossing = find_crossing(mentions)) throw CrossingMentionsError(crossing->first, crossing->second);

  std::vector<MentionSpan> sorted(mentions.begin(), mentions.end());
  std::sort(sorted.begin(), sorted.end(), document_order);

  MarkedText out;
  std::vector<std::size_t> opens(doc.tokens.size(), 0), closes(doc.tokens.size(), 0);
  std::vector<MentionSpan> stack;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const auto& m = sorted[k];
    while (!stack.empty() && stack.back().end < m.start) stack.pop_back();
    out.registry.push_back({k, m, stack.size()});
    stack.push_back(m);
    ++opens[m.start];
    ++closes[m.end];
  }

  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    if (i > 0) out.text += doc.tokens[i].sentence_index != doc.tokens[i - 1].sentence_index ? "\n" : " ";
    out.text.append(opens[i], '[');
    out.text += doc.tokens[i].surface;
    for (std::size_t c = 0; c < closes[i]; ++c) out.text += "](#)";
  }
  return out;
}

/// Inverse of the marking: removes every `[` and every `](#)`.
inline std::string strip_markers(std::string_view marked) {
  std::string out;
  out.reserve(marked.size());
  std::size_t i = 0;
  while (i < marked.size()) {
    if (marked.substr(i, 4) == "](#)") {
      i += 4;
    } else if (marked[i] == '[') {
      ++i;
    } else {
      out.push_back(marked[i++]);
    }
  }
  return out;
}

inline RenderedPrompt render_document_prompt(const MarkedText& marked,
                                             const PromptTemplate& tmpl = default_template(PromptKind::document)) {
  RenderedPrompt p;
  p.kind = PromptKind::document;
  p.body = marked.text;
  p.text = fill_template(tmpl.text, {{"{input}", marked.text}});
  p.registry = marked.registry;
  return p;
}

/// The QA context is the document as one passage (sentences joined by a
/// space) with the target wrapped in asterisks.
inline RenderedPrompt render_qa_prompt(const Document& doc, const MentionSpan& target,
                                       const PromptTemplate& tmpl = default_template(PromptKind::qa)) {
  if (!doc.contains(target)) throw DocumentError(doc.key() + ": QA target outside the document");
  std::string context;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    if (i > 0) context.push_back(' ');
    if (i == target.start) context.push_back('*');
    context += doc.tokens[i].surface;
    if (i == target.end) context.push_back('*');
  }
  RenderedPrompt p;
  p.kind = PromptKind::qa;
  p.body = context;
  p.target = target;
  p.text = fill_template(tmpl.text, {{"{context}", context}, {"{mention}", span_text(doc, target)}});
  return p;
}

inline RenderedPrompt render_md_prompt(const Document& doc,
                                       const PromptTemplate& tmpl = default_template(PromptKind::mention_detection)) {
  RenderedPrompt p;
  p.kind = PromptKind::mention_detection;
  p.body = detokenize(doc);
  p.text = fill_template(tmpl.text, {{"{input}", p.body}});
  return p;
}

}  // namespace promptcoref

#endif  // PROMPTCOREF_PROMPTING_HPP
