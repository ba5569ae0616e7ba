#ifndef PROMPTCOREF_METRICS_HPP
#define PROMPTCOREF_METRICS_HPP

// Coreference scoring: MUC, B-cubed, CEAF-phi4, CoNLL F1, mention detection,
// per-class resolution accuracy. Mentions are compared by exact span.
//
// Every metric is first computed as raw counts (numerators and denominators)
// so that corpus scores aggregate micro-style: counts are summed over
// documents, then divided once. Any 0/0 is 0.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "promptcoref/corpus.hpp"
#include "promptcoref/pronouns.hpp"

namespace promptcoref {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static PRF from(double p, double r) { return {p, r, p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0}; }
};

inline double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

struct MetricCounts {
  double p_num = 0.0;
  double p_den = 0.0;
  double r_num = 0.0;
  double r_den = 0.0;

  MetricCounts& operator+=(const MetricCounts& o) {
    p_num += o.p_num;
    p_den += o.p_den;
    r_num += o.r_num;
    r_den += o.r_den;
    return *this;
  }
  PRF prf() const { return PRF::from(safe_div(p_num, p_den), safe_div(r_num, r_den)); }
};

inline nlohmann::json to_json(const PRF& p) { return {{"p", p.precision}, {"r", p.recall}, {"f1", p.f1}}; }

// ---------------------------------------------------------------------------
// Link, mention and entity metrics

namespace detail {

inline std::map<MentionSpan, std::size_t> cluster_index(const Clustering& c) {
  std::map<MentionSpan, std::size_t> idx;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (const auto& m : c.clusters()[i]) idx[m] = i;
  }
  return idx;
}

// Σ(|K| - p(K)) and Σ(|K| - 1) over clusters of `a` partitioned by `b`.
inline std::pair<double, double> muc_side(const Clustering& a, const Clustering& b) {
  const auto idx = cluster_index(b);
  double num = 0, den = 0;
  for (const auto& k : a.clusters()) {
    if (k.size() < 2) continue;
    std::set<std::size_t> blocks;
    std::size_t absent = 0;
    for (const auto& m : k) {
      auto it = idx.find(m);
      if (it == idx.end()) {
        ++absent;
      } else {
        blocks.insert(it->second);
      }
    }
    const double parts = static_cast<double>(blocks.size() + absent);
    num += static_cast<double>(k.size()) - parts;
    den += static_cast<double>(k.size()) - 1.0;
  }
  return {num, den};
}

inline std::pair<double, double> b3_side(const Clustering& a, const Clustering& b) {
  const auto idx = cluster_index(b);
  double num = 0, den = 0;
  for (const auto& k : a.clusters()) {
    // Σ_{m∈K} |K∩R_m|/|K| = Σ_R |K∩R|² / |K|
    std::map<std::size_t, std::size_t> overlap;
    std::size_t absent = 0;
    for (const auto& m : k) {
      auto it = idx.find(m);
      if (it == idx.end()) {
        ++absent;
      } else {
        ++overlap[it->second];
      }
    }
    double s = static_cast<double>(absent);  // each absent mention overlaps only itself
    for (const auto& [r, n] : overlap) s += static_cast<double>(n * n);
    num += s / static_cast<double>(k.size());
    den += static_cast<double>(k.size());
  }
  return {num, den};
}

}  // namespace detail

inline MetricCounts muc_counts(const Clustering& key, const Clustering& response) {
  const auto [rn, rd] = detail::muc_side(key, response);
  const auto [pn, pd] = detail::muc_side(response, key);
  return {pn, pd, rn, rd};
}

inline MetricCounts b_cubed_counts(const Clustering& key, const Clustering& response) {
  const auto [rn, rd] = detail::b3_side(key, response);
  const auto [pn, pd] = detail::b3_side(response, key);
  return {pn, pd, rn, rd};
}

/// Maximum-weight assignment of rows to columns (rectangular allowed).
/// Returns, for each row, the assigned column or -1.
inline std::vector<long> max_weight_assignment(const std::vector<std::vector<double>>& w) {
  const std::size_t rows = w.size();
  const std::size_t cols = rows == 0 ? 0 : w[0].size();
  std::vector<long> result(rows, -1);
  if (rows == 0 || cols == 0) return result;
  const bool transpose = rows > cols;
  const std::size_t n = transpose ? cols : rows;  // n <= m
  const std::size_t m = transpose ? rows : cols;
  auto cost = [&](std::size_t i, std::size_t j) { return transpose ? -w[j][i] : -w[i][j]; };

  // Shortest augmenting path Hungarian method, 1-indexed potentials.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    if (transpose) {
      result[j - 1] = static_cast<long>(p[j] - 1);
    } else {
      result[p[j] - 1] = static_cast<long>(j - 1);
    }
  }
  return result;
}

inline double phi4(const Clustering::Cluster& k, const Clustering::Cluster& r) {
  std::size_t common = 0;
  for (const auto& m : k) {
    if (std::find(r.begin(), r.end(), m) != r.end()) ++common;
  }
  return 2.0 * static_cast<double>(common) / static_cast<double>(k.size() + r.size());
}

inline MetricCounts ceaf_phi4_counts(const Clustering& key, const Clustering& response) {
  const auto& K = key.clusters();
  const auto& R = response.clusters();
  double total = 0.0;
  if (!K.empty() && !R.empty()) {
    std::vector<std::vector<double>> w(K.size(), std::vector<double>(R.size(), 0.0));
    const auto ridx = detail::cluster_index(response);
    for (std::size_t i = 0; i < K.size(); ++i) {
      std::map<std::size_t, std::size_t> overlap;
      for (const auto& m : K[i]) {
        if (auto it = ridx.find(m); it != ridx.end()) ++overlap[it->second];
      }
      for (const auto& [j, c] : overlap) {
        w[i][j] = 2.0 * static_cast<double>(c) / static_cast<double>(K[i].size() + R[j].size());
      }
    }
    const auto assign = max_weight_assignment(w);
    for (std::size_t i = 0; i < assign.size(); ++i) {
      if (assign[i] >= 0) total += w[i][static_cast<std::size_t>(assign[i])];
    }
  }
  return {total, static_cast<double>(R.size()), total, static_cast<double>(K.size())};
}

inline PRF muc(const Clustering& key, const Clustering& response) { return muc_counts(key, response).prf(); }
inline PRF b_cubed(const Clustering& key, const Clustering& response) { return b_cubed_counts(key, response).prf(); }
inline PRF ceaf_phi4(const Clustering& key, const Clustering& response) {
  return ceaf_phi4_counts(key, response).prf();
}
inline double conll_f1(const PRF& m, const PRF& b, const PRF& c) { return (m.f1 + b.f1 + c.f1) / 3.0; }

// ---------------------------------------------------------------------------
// Singleton policies

enum class SingletonPolicy { keep_both, drop_both, drop_response_keep_key };

inline std::string_view to_string(SingletonPolicy p) {
  switch (p) {
    case SingletonPolicy::keep_both:
      return "keep-both";
    case SingletonPolicy::drop_both:
      return "drop-both";
    case SingletonPolicy::drop_response_keep_key:
      return "drop-response";
  }
  return "?";
}

inline SingletonPolicy parse_singleton_policy(std::string_view s) {
  if (s == "keep-both" || s == "keep_both") return SingletonPolicy::keep_both;
  if (s == "drop-both" || s == "drop_both") return SingletonPolicy::drop_both;
  if (s == "drop-response" || s == "drop_response" || s == "drop_response_keep_key")
    return SingletonPolicy::drop_response_keep_key;
  throw std::invalid_argument("unknown singleton policy '" + std::string(s) + "'");
}

inline Clustering drop_singletons(const Clustering& c) {
  std::vector<Clustering::Cluster> kept;
  for (const auto& cl : c.clusters()) {
    if (cl.size() > 1) kept.push_back(cl);
  }
  return Clustering(std::move(kept));
}

inline std::pair<Clustering, Clustering> apply_singleton_policy(const Clustering& key, const Clustering& response,
                                                                SingletonPolicy policy) {
  switch (policy) {
    case SingletonPolicy::keep_both:
      return {key, response};
    case SingletonPolicy::drop_both:
      return {drop_singletons(key), drop_singletons(response)};
    case SingletonPolicy::drop_response_keep_key:
      return {key, drop_singletons(response)};
  }
  return {key, response};
}

// ---------------------------------------------------------------------------
// Mention detection and mention classes

struct MentionCounts {
  double predicted = 0;
  double gold = 0;
  double correct = 0;

  MentionCounts& operator+=(const MentionCounts& o) {
    predicted += o.predicted;
    gold += o.gold;
    correct += o.correct;
    return *this;
  }
  PRF prf() const { return PRF::from(safe_div(correct, predicted), safe_div(correct, gold)); }
};

inline MentionCounts mention_counts(const MentionSet& predicted, const MentionSet& gold) {
  MentionCounts c;
  c.predicted = static_cast<double>(predicted.size());
  c.gold = static_cast<double>(gold.size());
  for (const auto& m : predicted) {
    if (gold.contains(m)) ++c.correct;
  }
  return c;
}

inline PRF mention_prf(const MentionSet& predicted, const MentionSet& gold) {
  return mention_counts(predicted, gold).prf();
}

enum class MentionClass { name, pronoun, nominal };

inline std::string_view to_string(MentionClass c) {
  switch (c) {
    case MentionClass::name:
      return "name";
    case MentionClass::pronoun:
      return "pronoun";
    case MentionClass::nominal:
      return "nominal";
  }
  return "?";
}

inline bool has_ne_annotation(const Document& doc) {
  return std::any_of(doc.tokens.begin(), doc.tokens.end(),
                     [](const Token& t) { return t.ne_tag && !t.ne_tag->empty(); });
}

/// Pronoun when the span is a single token on the language's closed list;
/// name when any token carries an NE tag; nominal otherwise. A document with
/// no NE tags at all falls back to the head heuristic: the last alphanumeric
/// token, capitalized and not sentence-initial, makes a name. Languages
/// without a pronoun list never yield pronouns and set `warning`.
inline MentionClass classify_mention(const Document& doc, const MentionSpan& span, std::string* warning = nullptr) {
  if (!doc.contains(span)) throw DocumentError(doc.key() + ": classified span outside the document");
  const PronounList* list = pronoun_list_for(doc.language);
  if (list == nullptr) {
    if (warning != nullptr) *warning = "no pronoun list for language '" + doc.language + "'";
  } else if (span.start == span.end && list->contains(doc.tokens[span.start].surface)) {
    return MentionClass::pronoun;
  }
  if (has_ne_annotation(doc)) {
    for (std::size_t i = span.start; i <= span.end; ++i) {
      if (doc.tokens[i].ne_tag && !doc.tokens[i].ne_tag->empty()) return MentionClass::name;
    }
    return MentionClass::nominal;
  }
  for (std::size_t i = span.end + 1; i-- > span.start;) {
    const auto& t = doc.tokens[i];
    const bool alnum = std::any_of(t.surface.begin(), t.surface.end(),
                                   [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; });
    if (!alnum) continue;
    const bool initial = i == 0 || doc.tokens[i - 1].sentence_index != t.sentence_index;
    if (!initial && std::isupper(static_cast<unsigned char>(t.surface.front()))) return MentionClass::name;
    break;
  }
  return MentionClass::nominal;
}

/// Hits over total, kept as counts for micro aggregation.
struct Ratio {
  double hits = 0;
  double total = 0;

  Ratio& operator+=(const Ratio& o) {
    hits += o.hits;
    total += o.total;
    return *this;
  }
  double value() const { return safe_div(hits, total); }
};

using ClassRatios = std::map<MentionClass, Ratio>;

inline ClassRatios md_recall_counts(const MentionSet& predicted, const MentionSet& gold, const Document& doc) {
  ClassRatios out;
  for (const auto& m : gold) {
    auto& r = out[classify_mention(doc, m)];
    ++r.total;
    if (predicted.contains(m)) ++r.hits;
  }
  return out;
}

inline std::map<MentionClass, double> md_recall_by_type(const MentionSet& predicted, const MentionSet& gold,
                                                        const Document& doc) {
  std::map<MentionClass, double> out;
  for (const auto& [cls, r] : md_recall_counts(predicted, gold, doc)) out[cls] = r.value();
  return out;
}

/// An anaphor is a recalled key mention with an earlier key-coreferent
/// mention. It is correct when its response cluster holds an earlier mention
/// that is key-coreferent with it. Classes without anaphors are absent.
inline ClassRatios resolution_counts(const Clustering& key, const Clustering& response, const MentionSet& recalled,
                                     const Document& doc) {
  const auto kidx = detail::cluster_index(key);
  const auto ridx = detail::cluster_index(response);
  ClassRatios out;
  for (const auto& m : recalled) {
    auto kit = kidx.find(m);
    if (kit == kidx.end()) continue;
    const auto& kc = key.clusters()[kit->second];
    const bool has_antecedent =
        std::any_of(kc.begin(), kc.end(), [&](const MentionSpan& a) { return document_order(a, m); });
    if (!has_antecedent) continue;
    auto& r = out[classify_mention(doc, m)];
    ++r.total;
    auto rit = ridx.find(m);
    if (rit == ridx.end()) continue;
    const auto& rc = response.clusters()[rit->second];
    const bool ok = std::any_of(rc.begin(), rc.end(), [&](const MentionSpan& a) {
      if (!document_order(a, m)) return false;
      auto ak = kidx.find(a);
      return ak != kidx.end() && ak->second == kit->second;
    });
    if (ok) ++r.hits;
  }
  return out;
}

inline std::map<MentionClass, double> resolution_accuracy(const Clustering& key, const Clustering& response,
                                                          const MentionSet& recalled, const Document& doc) {
  std::map<MentionClass, double> out;
  for (const auto& [cls, r] : resolution_counts(key, response, recalled, doc)) out[cls] = r.value();
  return out;
}

/// Mentions (present in both clusterings) whose closest preceding
/// response-cluster mate is not key-coreferent with them, or that have no
/// response antecedent although a key antecedent exists.
inline std::vector<MentionSpan> link_errors(const Clustering& key, const Clustering& response) {
  const auto kidx = detail::cluster_index(key);
  std::vector<MentionSpan> out;
  for (const auto& rc : response.clusters()) {
    for (std::size_t i = 0; i < rc.size(); ++i) {
      const auto& m = rc[i];
      auto kit = kidx.find(m);
      if (kit == kidx.end()) continue;
      std::optional<MentionSpan> prev;
      for (std::size_t j = 0; j < rc.size(); ++j) {
        if (document_order(rc[j], m) && (!prev || document_order(*prev, rc[j]))) prev = rc[j];
      }
      if (prev) {
        auto pk = kidx.find(*prev);
        if (pk == kidx.end() || pk->second != kit->second) out.push_back(m);
      } else {
        const auto& kc = key.clusters()[kit->second];
        if (std::any_of(kc.begin(), kc.end(), [&](const MentionSpan& a) { return document_order(a, m); }))
          out.push_back(m);
      }
    }
  }
  std::sort(out.begin(), out.end(), document_order);
  return out;
}

// ---------------------------------------------------------------------------
// Per-document evaluation and corpus report

struct DocEvaluation {
  std::string doc_id;
  MetricCounts muc;
  MetricCounts b3;
  MetricCounts ceaf;
  MentionCounts md;
  ClassRatios md_by_type;
  ClassRatios resolution;
  std::size_t key_clusters = 0;
  std::size_t response_clusters = 0;
};

/// Scores one document. `predicted` is the candidate mention set fed to the
/// linker (defaults to the response's mentions); it drives MD scores and the
/// recalled set for resolution accuracy. `doc` enables class breakdowns.
inline DocEvaluation evaluate_document(std::string doc_id, const Clustering& key, const Clustering& response,
                                       SingletonPolicy policy, const std::optional<MentionSet>& predicted = {},
                                       const Document* doc = nullptr) {
  DocEvaluation e;
  e.doc_id = std::move(doc_id);
  const auto [k, r] = apply_singleton_policy(key, response, policy);
  e.muc = muc_counts(k, r);
  e.b3 = b_cubed_counts(k, r);
  e.ceaf = ceaf_phi4_counts(k, r);
  e.key_clusters = k.size();
  e.response_clusters = r.size();
  const MentionSet pred = predicted ? *predicted : response.mentions();
  const MentionSet gold = key.mentions();
  e.md = mention_counts(pred, gold);
  if (doc != nullptr) {
    e.md_by_type = md_recall_counts(pred, gold, *doc);
    MentionSet recalled;
    for (const auto& m : gold) {
      if (pred.contains(m)) recalled.insert(m);
    }
    e.resolution = resolution_counts(k, r, recalled, *doc);
  }
  return e;
}

struct ScoreReport {
  PRF muc;
  PRF b3;
  PRF ceaf_phi4;
  double conll_f1 = 0.0;
  PRF md;
  std::map<MentionClass, double> md_recall_by_type;
  std::map<MentionClass, double> resolution_accuracy;
  SingletonPolicy singleton_policy = SingletonPolicy::keep_both;
  std::vector<DocEvaluation> per_doc;
  std::vector<std::string> notes;
};

inline ScoreReport aggregate(std::vector<DocEvaluation> docs, SingletonPolicy policy) {
  std::sort(docs.begin(), docs.end(), [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
  MetricCounts m, b, c;
  MentionCounts md;
  ClassRatios by_type, res;
  std::size_t key_clusters = 0, response_clusters = 0;
  for (const auto& d : docs) {
    m += d.muc;
    b += d.b3;
    c += d.ceaf;
    md += d.md;
    for (const auto& [k, v] : d.md_by_type) by_type[k] += v;
    for (const auto& [k, v] : d.resolution) res[k] += v;
    key_clusters += d.key_clusters;
    response_clusters += d.response_clusters;
  }
  ScoreReport r;
  r.singleton_policy = policy;
  r.muc = m.prf();
  r.b3 = b.prf();
  r.ceaf_phi4 = c.prf();
  r.conll_f1 = conll_f1(r.muc, r.b3, r.ceaf_phi4);
  r.md = md.prf();
  for (const auto& [k, v] : by_type) {
    if (v.total > 0) r.md_recall_by_type[k] = v.value();
  }
  for (const auto& [k, v] : res) {
    if (v.total > 0) r.resolution_accuracy[k] = v.value();
  }
  if (key_clusters == 0 && response_clusters == 0) {
    r.notes.push_back("key and response are empty after applying singleton policy " +
                      std::string(to_string(policy)) + "; all metrics are 0");
  }
  r.per_doc = std::move(docs);
  return r;
}

inline nlohmann::json class_map_json(const std::map<MentionClass, double>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : m) j[std::string(to_string(k))] = v;
  return j;
}

inline nlohmann::json to_json(const DocEvaluation& d) {
  std::map<MentionClass, double> by_type, res;
  for (const auto& [k, v] : d.md_by_type) {
    if (v.total > 0) by_type[k] = v.value();
  }
  for (const auto& [k, v] : d.resolution) {
    if (v.total > 0) res[k] = v.value();
  }
  const auto mu = d.muc.prf(), b = d.b3.prf(), c = d.ceaf.prf();
  return {{"muc", to_json(mu)},
          {"b3", to_json(b)},
          {"ceaf_phi4", to_json(c)},
          {"conll_f1", conll_f1(mu, b, c)},
          {"md", to_json(d.md.prf())},
          {"md_recall_by_type", class_map_json(by_type)},
          {"resolution_accuracy", class_map_json(res)}};
}

inline nlohmann::json to_json(const ScoreReport& r) {
  nlohmann::json per_doc = nlohmann::json::object();
  for (const auto& d : r.per_doc) per_doc[d.doc_id] = to_json(d);
  return {{"muc", to_json(r.muc)},
          {"b3", to_json(r.b3)},
          {"ceaf_phi4", to_json(r.ceaf_phi4)},
          {"conll_f1", r.conll_f1},
          {"md", to_json(r.md)},
          {"md_recall_by_type", class_map_json(r.md_recall_by_type)},
          {"resolution_accuracy", class_map_json(r.resolution_accuracy)},
          {"singleton_policy", std::string(to_string(r.singleton_policy))},
          {"notes", r.notes},
          {"per_doc", per_doc}};
}

// ---------------------------------------------------------------------------
// Table rendering

/// One row of a results table. Metric triples are percentages; rows that
/// only know their CoNLL score carry `stored_conll`.
struct TableRow {
  std::string label;
  std::optional<PRF> muc;
  std::optional<PRF> b3;
  std::optional<PRF> ceaf_phi4;
  std::optional<double> stored_conll;

  /// Mean of the three F1 columns when all are present, else the stored value.
  std::optional<double> conll() const {
    if (muc && b3 && ceaf_phi4) return (muc->f1 + b3->f1 + ceaf_phi4->f1) / 3.0;
    return stored_conll;
  }
};

inline TableRow table_row(std::string label, const ScoreReport& r) {
  auto pct = [](const PRF& p) { return PRF{p.precision * 100.0, p.recall * 100.0, p.f1 * 100.0}; };
  return {std::move(label), pct(r.muc), pct(r.b3), pct(r.ceaf_phi4), std::nullopt};
}

inline std::string format_fixed(double v, int decimals = 1) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

/// Text table: System | MUC P R F1 | B3 P R F1 | CEAF-phi4 P R F1 | CoNLL F1.
inline std::string render_table(const std::vector<TableRow>& rows) {
  std::size_t label_w = 6;
  for (const auto& r : rows) label_w = std::max(label_w, r.label.size());
  auto cell = [](const std::optional<double>& v) { return v ? format_fixed(*v) : std::string("-"); };
  auto pad = [](const std::string& s, std::size_t w) { return s.size() >= w ? s : std::string(w - s.size(), ' ') + s; };
  auto padr = [](const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); };

  std::ostringstream os;
  os << padr("", label_w) << " | " << padr("MUC", 20) << " | " << padr("B3", 20) << " | " << padr("CEAF-phi4", 20)
     << " | CoNLL\n";
  os << padr("System", label_w);
  for (int g = 0; g < 3; ++g) os << " | " << pad("P", 6) << pad("R", 7) << pad("F1", 7);
  os << " | " << pad("F1", 5) << "\n";
  os << std::string(label_w + 3 * 23 + 8, '-') << "\n";
  for (const auto& r : rows) {
    os << padr(r.label, label_w);
    for (const auto* m : {&r.muc, &r.b3, &r.ceaf_phi4}) {
      const std::optional<double> p = *m ? std::optional<double>((*m)->precision) : std::nullopt;
      const std::optional<double> rc = *m ? std::optional<double>((*m)->recall) : std::nullopt;
      const std::optional<double> f = *m ? std::optional<double>((*m)->f1) : std::nullopt;
      os << " | " << pad(cell(p), 6) << pad(cell(rc), 7) << pad(cell(f), 7);
    }
    os << " | " << pad(cell(r.conll()), 5) << "\n";
  }
  return os.str();
}

inline std::string render_report_text(const ScoreReport& r, const std::string& label = "run") {
  std::ostringstream os;
  os << render_table({table_row(label, r)});
  os << "\nsingleton policy: " << to_string(r.singleton_policy) << "\n";
  os << "MD P/R/F1: " << format_fixed(r.md.precision * 100) << " " << format_fixed(r.md.recall * 100) << " "
     << format_fixed(r.md.f1 * 100) << "\n";
  for (const auto& [k, v] : r.md_recall_by_type) os << "MD recall " << to_string(k) << ": " << format_fixed(v * 100) << "\n";
  for (const auto& [k, v] : r.resolution_accuracy) {
    os << "resolution accuracy " << to_string(k) << ": " << format_fixed(v * 100) << "\n";
  }
  for (const auto& n : r.notes) os << "note: " << n << "\n";
  return os.str();
}

}  // namespace promptcoref

#endif  // PROMPTCOREF_METRICS_HPP
