#ifndef PROMPTCOREF_EXTRACTION_HPP
#define PROMPTCOREF_EXTRACTION_HPP

// Turning completion text back into clusters.
//
// parse_annotations   tolerant stack scan for nested [surface](#label)
// align_output        sentence-by-sentence fuzzy pairing of output lines with
//                     input sentences, then grounding of each annotation to a
//                     marked input mention
// build_clustering    group grounded mentions by normalized label
// parse_md_output / ground_md_strings
//                     the mention-detection list answer and its grounding

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "promptcoref/corpus.hpp"
#include "promptcoref/prompting.hpp"
#include "promptcoref/text.hpp"

namespace promptcoref {

// ---------------------------------------------------------------------------
// Similarity primitives

/// 1 - levenshtein(a, b) / max(|a|, |b|); 1 for two empty sequences.
inline double edit_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 && m == 0) return 1.0;
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return 1.0 - static_cast<double>(prev[m]) / static_cast<double>(std::max(n, m));
}

/// Upper bound of edit_similarity from lengths alone.
inline double edit_similarity_bound(std::size_t n, std::size_t m) {
  if (n == 0 && m == 0) return 1.0;
  const auto hi = std::max(n, m), lo = std::min(n, m);
  return static_cast<double>(lo) / static_cast<double>(hi);
}

/// For each position of `a`, the position of `b` it aligns to under a
/// minimum-edit alignment (deletions map to the next aligned position).
inline std::vector<std::size_t> align_positions(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      d[i][j] = std::min({d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1), d[i - 1][j] + 1, d[i][j - 1] + 1});
    }
  }
  std::vector<std::size_t> map(n, m);
  std::size_t i = n, j = m;
  while (i > 0 && j > 0) {
    if (d[i][j] == d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)) {
      map[i - 1] = j - 1;
      --i;
      --j;
    } else if (d[i][j] == d[i - 1][j] + 1) {
      map[i - 1] = j;
      --i;
    } else {
      --j;
    }
  }
  while (i > 0) map[--i] = 0;
  for (auto& p : map) p = std::min(p, m == 0 ? 0 : m - 1);
  return map;
}

/// Multiset Dice overlap 2|A∩B| / (|A|+|B|).
inline double overlap_similarity(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::unordered_map<std::string, long> counts;
  for (const auto& t : a) ++counts[t];
  std::size_t common = 0;
  for (const auto& t : b) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  return 2.0 * static_cast<double>(common) / static_cast<double>(a.size() + b.size());
}

// ---------------------------------------------------------------------------
// Annotation parsing

struct AnnotatedSpan {
  /// Marker-stripped text between the brackets.
  std::string surface;
  std::string cluster_label;
  /// Byte offset of the opening '[' in the completion.
  std::size_t open_offset = 0;
  std::size_t nesting_depth = 0;
  /// Byte range of the surface in the marker-stripped completion.
  std::size_t plain_begin = 0;
  std::size_t plain_end = 0;
};

struct AnnotationParse {
  std::vector<AnnotatedSpan> spans;
  std::size_t malformed = 0;
  /// The completion with every recognized annotation's markup removed.
  std::string plain_text;
};

/// Stack scan for `[` ... `](#label)` with arbitrary nesting. Never fails:
/// an unclosed `[`, a `](#label)` without an open bracket, or a `](#` with no
/// closing parenthesis on the same line is plain text and counted as
/// malformed.
inline AnnotationParse parse_annotations(std::string_view out) {
  struct Recognized {
    std::size_t open;
    std::size_t close_begin;
    std::size_t close_end;
    std::string label;
  };
  std::vector<std::size_t> stack;
  std::vector<Recognized> rec;
  AnnotationParse result;

  std::size_t i = 0;
  while (i < out.size()) {
    const char c = out[i];
    if (c == '[') {
      stack.push_back(i);
      ++i;
      continue;
    }
    if (c == ']' && out.substr(i, 3) == "](#") {
      std::size_t j = i + 3;
      while (j < out.size() && out[j] != ')' && out[j] != '\n' && out[j] != '[' && out[j] != ']' && out[j] != '(') ++j;
      if (j >= out.size() || out[j] != ')') {
        ++result.malformed;
        ++i;
        continue;
      }
      if (stack.empty()) {
        ++result.malformed;
        i = j + 1;
        continue;
      }
      rec.push_back({stack.back(), i, j + 1, std::string(out.substr(i + 3, j - i - 3))});
      stack.pop_back();
      i = j + 1;
      continue;
    }
    ++i;
  }
  result.malformed += stack.size();

  // Drop recognized markup and keep an offset map into the plain text.
  std::vector<char> removed(out.size(), 0);
  for (const auto& r : rec) {
    removed[r.open] = 1;
    for (std::size_t k = r.close_begin; k < r.close_end; ++k) removed[k] = 1;
  }
  std::vector<std::size_t> plain_pos(out.size() + 1, 0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    plain_pos[k] = result.plain_text.size();
    if (!removed[k]) result.plain_text.push_back(out[k]);
  }
  plain_pos[out.size()] = result.plain_text.size();

  std::sort(rec.begin(), rec.end(), [](const Recognized& a, const Recognized& b) { return a.open < b.open; });
  std::vector<std::size_t> enclosing;  // close positions of enclosing spans
  for (const auto& r : rec) {
    while (!enclosing.empty() && enclosing.back() < r.open) enclosing.pop_back();
    AnnotatedSpan s;
    s.open_offset = r.open;
    s.cluster_label = r.label;
    s.nesting_depth = enclosing.size();
    s.plain_begin = plain_pos[r.open];
    s.plain_end = plain_pos[r.close_begin];
    s.surface = result.plain_text.substr(s.plain_begin, s.plain_end - s.plain_begin);
    result.spans.push_back(std::move(s));
    enclosing.push_back(r.close_begin);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Alignment

struct AlignmentConfig {
  double sentence_threshold = 0.8;
  double span_threshold = 0.8;
};

struct GroundedSpan {
  AnnotatedSpan annotation;
  MarkerEntry entry;
  double similarity = 0.0;
};

/// One output line paired with a run of input sentences [input_first, input_last].
struct SentencePair {
  std::size_t output_line = 0;
  std::size_t input_first = 0;
  std::size_t input_last = 0;
  double similarity = 0.0;
};

struct AlignmentResult {
  std::vector<GroundedSpan> matches;
  std::vector<AnnotatedSpan> unmatched_output;
  std::vector<MarkerEntry> unmatched_input;
  std::vector<SentencePair> sentence_map;
  std::size_t output_lines = 0;
  std::size_t unpaired_output_lines = 0;
  std::size_t malformed_annotations = 0;
  AlignmentConfig config;

  bool clean() const {
    return unmatched_output.empty() && unmatched_input.empty() && unpaired_output_lines == 0 &&
           malformed_annotations == 0;
  }
};

inline nlohmann::json diagnostics_json(const AlignmentResult& a) {
  return {{"matched", a.matches.size()},
          {"unmatched_output", a.unmatched_output.size()},
          {"unmatched_input", a.unmatched_input.size()},
          {"output_lines", a.output_lines},
          {"unpaired_output_lines", a.unpaired_output_lines},
          {"malformed_annotations", a.malformed_annotations},
          {"sentence_threshold", a.config.sentence_threshold},
          {"span_threshold", a.config.span_threshold}};
}

/// Pairs completion lines with input sentences and grounds every annotation
/// to the registry mention it most likely marks.
///
/// Lines are paired greedily in order: a line takes the first not-yet-passed
/// input sentence whose comparison tokens reach `sentence_threshold` edit
/// similarity, or failing that the best-scoring run of consecutive sentences from the
/// earliest start where one does (a model may merge lines). Within a pair, annotations are processed
/// left to right; each takes the unconsumed registry entry of the paired
/// sentences with the highest token-overlap similarity, ties broken by
/// closeness to the aligned position, then by registry order.
inline AlignmentResult align_output(const Document& doc, const MarkerRegistry& registry, std::string_view output_text,
                                    const AlignmentConfig& cfg = {}) {
  AlignmentResult result;
  result.config = cfg;

  // Input side, in comparison-token space.
  const auto ranges = doc.sentence_ranges();
  const std::size_t n_sent = ranges.size();
  std::vector<std::vector<std::string>> in_tokens(n_sent);
  std::vector<std::size_t> token_first_cmp(doc.tokens.size(), 0);  // sentence-local comparison index
  for (std::size_t s = 0; s < n_sent; ++s) {
    for (std::size_t t = ranges[s].first; t < ranges[s].second; ++t) {
      token_first_cmp[t] = in_tokens[s].size();
      for (auto& ct : text::comparison_tokens(doc.tokens[t].surface)) in_tokens[s].push_back(std::move(ct));
    }
  }
  std::vector<std::vector<std::string>> entry_tokens(registry.size());
  std::vector<std::vector<std::size_t>> entries_by_sentence(n_sent);
  for (std::size_t k = 0; k < registry.size(); ++k) {
    const auto& e = registry[k];
    entry_tokens[k] = text::comparison_tokens(span_text(doc, e.span));
    if (e.span.start < doc.tokens.size()) entries_by_sentence[doc.tokens[e.span.start].sentence_index].push_back(k);
  }
  std::vector<char> consumed(registry.size(), 0);

  const AnnotationParse parsed = parse_annotations(output_text);
  result.malformed_annotations = parsed.malformed;

  // Output lines of the plain text.
  struct Line {
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Line> lines;
  {
    std::size_t b = 0;
    const auto& p = parsed.plain_text;
    for (std::size_t k = 0; k <= p.size(); ++k) {
      if (k == p.size() || p[k] == '\n') {
        lines.push_back({b, k});
        b = k + 1;
      }
    }
  }
  std::vector<std::vector<std::size_t>> spans_by_line(lines.size());
  for (std::size_t k = 0; k < parsed.spans.size(); ++k) {
    const auto pos = parsed.spans[k].plain_begin;
    std::size_t li = 0;
    while (li + 1 < lines.size() && lines[li + 1].begin <= pos) ++li;
    spans_by_line[li].push_back(k);
  }

  std::size_t next_sentence = 0;
  std::size_t line_ordinal = 0;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string_view line_text =
        std::string_view(parsed.plain_text).substr(lines[li].begin, lines[li].end - lines[li].begin);
    const auto line_cmp = text::comparison_tokens_at(line_text);
    if (line_cmp.empty()) {
      for (auto k : spans_by_line[li]) result.unmatched_output.push_back(parsed.spans[k]);
      continue;
    }
    ++result.output_lines;
    std::vector<std::string> line_tokens;
    line_tokens.reserve(line_cmp.size());
    for (const auto& t : line_cmp) line_tokens.push_back(t.text);

    // Pair with one sentence, else with a run of sentences.
    std::optional<SentencePair> pair;
    for (std::size_t s = next_sentence; s < n_sent && !pair; ++s) {
      if (edit_similarity_bound(line_tokens.size(), in_tokens[s].size()) < cfg.sentence_threshold) continue;
      const double sim = edit_similarity(line_tokens, in_tokens[s]);
      if (sim >= cfg.sentence_threshold) pair = SentencePair{line_ordinal, s, s, sim};
    }
    for (std::size_t s = next_sentence; s < n_sent && !pair; ++s) {
      std::vector<std::string> run = in_tokens[s];
      for (std::size_t e = s + 1; e < n_sent; ++e) {
        run.insert(run.end(), in_tokens[e].begin(), in_tokens[e].end());
        if (run.size() * cfg.sentence_threshold > static_cast<double>(line_tokens.size()) + 1e-9) break;
        if (edit_similarity_bound(line_tokens.size(), run.size()) < cfg.sentence_threshold) continue;
        const double sim = edit_similarity(line_tokens, run);
        if (sim >= cfg.sentence_threshold && (!pair || sim > pair->similarity)) pair = SentencePair{line_ordinal, s, e, sim};
      }
    }
    ++line_ordinal;

    if (!pair) {
      ++result.unpaired_output_lines;
      for (auto k : spans_by_line[li]) result.unmatched_output.push_back(parsed.spans[k]);
      continue;
    }
    result.sentence_map.push_back(*pair);
    next_sentence = pair->input_last + 1;

    // Concatenated input run and each candidate's position in it.
    std::vector<std::string> run_tokens;
    std::vector<std::size_t> sentence_offset(n_sent, 0);
    for (std::size_t s = pair->input_first; s <= pair->input_last; ++s) {
      sentence_offset[s] = run_tokens.size();
      run_tokens.insert(run_tokens.end(), in_tokens[s].begin(), in_tokens[s].end());
    }
    const auto position_map = align_positions(line_tokens, run_tokens);

    for (auto k : spans_by_line[li]) {
      const auto& ann = parsed.spans[k];
      const std::size_t rel_begin = ann.plain_begin - lines[li].begin;
      const std::size_t rel_end = std::min(ann.plain_end, lines[li].end) - lines[li].begin;
      std::vector<std::string> ann_tokens;
      std::optional<std::size_t> first_cmp;
      for (std::size_t t = 0; t < line_cmp.size(); ++t) {
        if (line_cmp[t].begin >= rel_begin && line_cmp[t].end <= rel_end) {
          if (!first_cmp) first_cmp = t;
          ann_tokens.push_back(line_cmp[t].text);
        }
      }
      if (ann_tokens.empty()) {
        result.unmatched_output.push_back(ann);
        continue;
      }
      const std::size_t mapped = position_map.empty() ? 0 : position_map[*first_cmp];

      std::optional<std::size_t> best;
      double best_sim = -1.0;
      std::size_t best_dist = 0;
      for (std::size_t s = pair->input_first; s <= pair->input_last; ++s) {
        for (auto e : entries_by_sentence[s]) {
          if (consumed[e]) continue;
          const double sim = overlap_similarity(ann_tokens, entry_tokens[e]);
          if (sim < cfg.span_threshold) continue;
          const std::size_t pos = sentence_offset[s] + token_first_cmp[registry[e].span.start];
          const std::size_t dist = pos > mapped ? pos - mapped : mapped - pos;
          const bool better = !best || sim > best_sim + 1e-9 ||
                              (sim > best_sim - 1e-9 && (dist < best_dist || (dist == best_dist && e < *best)));
          if (better) {
            best = e;
            best_sim = sim;
            best_dist = dist;
          }
        }
      }
      if (!best) {
        result.unmatched_output.push_back(ann);
        continue;
      }
      consumed[*best] = 1;
      result.matches.push_back({ann, registry[*best], best_sim});
    }
  }

  for (std::size_t k = 0; k < registry.size(); ++k) {
    if (!consumed[k]) result.unmatched_input.push_back(registry[k]);
  }
  return result;
}

/// Trimmed, ASCII case-folded cluster label.
inline std::string normalize_label(std::string_view label) { return text::to_lower(text::trim(label)); }

/// Groups grounded mentions by normalized label. Unlabeled annotations
/// (`(#)` left empty) stand alone. Registry entries without a grounded
/// annotation become singletons only when `emit_unmatched_as_singletons`.
inline Clustering build_clustering(const AlignmentResult& alignment, bool emit_unmatched_as_singletons = false) {
  std::map<std::string, std::vector<MentionSpan>> by_label;
  std::vector<Clustering::Cluster> clusters;
  for (const auto& g : alignment.matches) {
    const auto label = normalize_label(g.annotation.cluster_label);
    if (label.empty()) {
      clusters.push_back({g.entry.span});
    } else {
      by_label[label].push_back(g.entry.span);
    }
  }
  for (auto& [label, spans] : by_label) clusters.push_back(std::move(spans));
  if (emit_unmatched_as_singletons) {
    for (const auto& e : alignment.unmatched_input) clusters.push_back({e.span});
  }
  return Clustering(std::move(clusters));
}

// ---------------------------------------------------------------------------
// Mention-detection output

struct MdLists {
  std::vector<std::string> names;
  std::vector<std::string> pronouns;
  std::vector<std::string> nominals;
};

/// Reads the "Named Entities:", "Pronouns:" and "Nominal Noun Phrases:"
/// lines (heads matched case-insensitively). Items are comma separated;
/// non-head lines following a head continue its list.
inline MdLists parse_md_output(std::string_view output_text) {
  MdLists out;
  std::vector<std::string>* current = nullptr;
  auto add_items = [&](std::string_view rest) {
    if (current == nullptr) return;
    for (const auto& item : text::split(rest, ',')) {
      std::string_view t = text::trim(item);
      if (t.starts_with("- ") || t.starts_with("* ")) t = text::trim(t.substr(2));
      if (!t.empty()) current->emplace_back(t);
    }
  };
  static const std::pair<std::string_view, int> kHeads[] = {
      {"named entities", 0}, {"pronouns", 1}, {"nominal noun phrases", 2}};
  for (const auto& raw : text::split_lines(output_text)) {
    const std::string_view line = text::trim(raw);
    if (line.empty()) continue;
    bool head = false;
    for (const auto& [name, which] : kHeads) {
      if (!text::starts_with_icase(line, name)) continue;
      std::string_view rest = text::trim(line.substr(name.size()));
      if (!rest.starts_with(":")) continue;
      current = which == 0 ? &out.names : which == 1 ? &out.pronouns : &out.nominals;
      add_items(rest.substr(1));
      head = true;
      break;
    }
    if (!head) add_items(line);
  }
  return out;
}

struct MdGrounding {
  MentionSet spans;
  std::size_t dropped = 0;
  std::vector<std::string> dropped_strings;
};

/// Grounds each listed string to the leftmost unconsumed token run of one
/// sentence whose comparison tokens equal the string's. Repeated strings
/// take successive occurrences; strings with no occurrence are dropped.
inline MdGrounding ground_md_strings(const Document& doc, const MdLists& lists) {
  MdGrounding g;
  std::vector<std::vector<std::string>> tok_cmp(doc.tokens.size());
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) tok_cmp[i] = text::comparison_tokens(doc.tokens[i].surface);

  auto find = [&](const std::vector<std::string>& target) -> std::optional<MentionSpan> {
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      std::size_t matched = 0;
      for (std::size_t j = i; j < doc.tokens.size(); ++j) {
        if (doc.tokens[j].sentence_index != doc.tokens[i].sentence_index) break;
        const auto& tc = tok_cmp[j];
        if (matched + tc.size() > target.size()) break;
        if (!std::equal(tc.begin(), tc.end(), target.begin() + static_cast<std::ptrdiff_t>(matched))) break;
        matched += tc.size();
        if (matched == target.size()) {
          const MentionSpan m{i, j};
          if (!g.spans.contains(m)) return m;
          break;
        }
      }
    }
    return std::nullopt;
  };

  for (const auto* list : {&lists.names, &lists.pronouns, &lists.nominals}) {
    for (const auto& s : *list) {
      auto target = text::comparison_tokens(s);
      std::optional<MentionSpan> m;
      if (!target.empty()) m = find(target);
      if (!m && target.size() > 1 && target.back() == ".") {
        target.pop_back();
        m = find(target);
      }
      if (m) {
        g.spans.insert(*m);
      } else {
        ++g.dropped;
        g.dropped_strings.push_back(s);
      }
    }
  }
  return g;
}

}  // namespace promptcoref

#endif  // PROMPTCOREF_EXTRACTION_HPP
