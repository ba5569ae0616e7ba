#ifndef PROMPTCOREF_PIPELINE_HPP
#define PROMPTCOREF_PIPELINE_HPP

// Run orchestration behind the command-line tool: resolve, score, md-eval,
// stats, sample and report. Every command is a function returning its
// artifacts so tests can drive it without a process boundary.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "promptcoref/corpus.hpp"
#include "promptcoref/extraction.hpp"
#include "promptcoref/llm.hpp"
#include "promptcoref/mention_detect.hpp"
#include "promptcoref/metrics.hpp"
#include "promptcoref/prompting.hpp"
#include "promptcoref/sampling.hpp"

namespace promptcoref {

inline constexpr std::string_view kToolVersion = "promptcoref 0.1.0";

// ---------------------------------------------------------------------------
// Configuration

enum class QaCandidates { preceding, all };

struct RunConfig {
  std::vector<std::string> corpus;
  Dialect dialect = Dialect::conll2012;
  std::optional<std::string> language;
  std::string mentions = "gold";
  PromptKind template_kind = PromptKind::document;
  std::optional<std::string> template_file;
  std::string backend = "echo-gold";
  std::string model = "text-davinci-003";
  std::string base_url = "https://api.openai.com";
  std::string api_key_env = "OPENAI_API_KEY";
  std::optional<std::string> cache;
  std::size_t max_attempts = 5;
  std::size_t concurrency = 4;
  std::size_t rpm = 60;
  std::size_t workers = 4;
  std::size_t token_budget = 4097;
  SingletonPolicy policy = SingletonPolicy::keep_both;
  AlignmentConfig alignment;
  QaCandidates qa_candidates = QaCandidates::preceding;
  std::uint64_t seed = 0;
  std::string out = "out";
};

inline nlohmann::json to_json(const RunConfig& c) {
  return {{"corpus", c.corpus},
          {"dialect", c.dialect == Dialect::conll2012 ? "conll2012" : "semeval2010"},
          {"language", c.language ? nlohmann::json(*c.language) : nlohmann::json(nullptr)},
          {"mentions", c.mentions},
          {"template", std::string(to_string(c.template_kind))},
          {"template_file", c.template_file ? nlohmann::json(*c.template_file) : nlohmann::json(nullptr)},
          {"backend", c.backend},
          {"model", c.model},
          {"base_url", c.base_url},
          {"api_key_env", c.api_key_env},
          {"cache", c.cache ? nlohmann::json(*c.cache) : nlohmann::json(nullptr)},
          {"max_attempts", c.max_attempts},
          {"concurrency", c.concurrency},
          {"rpm", c.rpm},
          {"workers", c.workers},
          {"token_budget", c.token_budget},
          {"policy", std::string(to_string(c.policy))},
          {"sentence_threshold", c.alignment.sentence_threshold},
          {"span_threshold", c.alignment.span_threshold},
          {"qa_antecedents", c.qa_candidates == QaCandidates::preceding ? "preceding" : "all"},
          {"seed", c.seed},
          {"out", c.out}};
}

/// Accepts a bare config object or a run manifest (reads its "config").
inline RunConfig config_from_json(const nlohmann::json& in) {
  const nlohmann::json& j = in.contains("config") ? in.at("config") : in;
  RunConfig c;
  auto opt_str = [&](const char* k) -> std::optional<std::string> {
    if (!j.contains(k) || j.at(k).is_null()) return std::nullopt;
    return j.at(k).get<std::string>();
  };
  if (j.contains("corpus")) c.corpus = j.at("corpus").get<std::vector<std::string>>();
  if (j.contains("dialect")) c.dialect = parse_dialect(j.at("dialect").get<std::string>());
  c.language = opt_str("language");
  c.mentions = j.value("mentions", c.mentions);
  if (j.contains("template")) c.template_kind = parse_prompt_kind(j.at("template").get<std::string>());
  c.template_file = opt_str("template_file");
  c.backend = j.value("backend", c.backend);
  c.model = j.value("model", c.model);
  c.base_url = j.value("base_url", c.base_url);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.cache = opt_str("cache");
  c.max_attempts = j.value("max_attempts", c.max_attempts);
  c.concurrency = j.value("concurrency", c.concurrency);
  c.rpm = j.value("rpm", c.rpm);
  c.workers = j.value("workers", c.workers);
  c.token_budget = j.value("token_budget", c.token_budget);
  if (j.contains("policy")) c.policy = parse_singleton_policy(j.at("policy").get<std::string>());
  c.alignment.sentence_threshold = j.value("sentence_threshold", c.alignment.sentence_threshold);
  c.alignment.span_threshold = j.value("span_threshold", c.alignment.span_threshold);
  if (j.contains("qa_antecedents")) {
    const auto q = j.at("qa_antecedents").get<std::string>();
    if (q != "preceding" && q != "all") throw std::invalid_argument("qa_antecedents must be preceding or all");
    c.qa_candidates = q == "all" ? QaCandidates::all : QaCandidates::preceding;
  }
  c.seed = j.value("seed", c.seed);
  c.out = j.value("out", c.out);
  return c;
}

inline std::vector<Document> load_corpus(const RunConfig& cfg) {
  ParseOptions opts;
  if (cfg.language) opts.language = *cfg.language;
  std::vector<Document> docs;
  for (const auto& path : cfg.corpus) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read corpus '" + path + "'");
    auto part = parse_conll(in, cfg.dialect, opts);
    docs.insert(docs.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return docs;
}

inline std::unique_ptr<llm::CompletionBackend> make_backend(const RunConfig& cfg) {
  if (cfg.backend == "echo-gold") return std::make_unique<llm::EchoGoldBackend>(mention_class_classifier());
  if (cfg.backend.starts_with("replay:")) return std::make_unique<llm::ReplayBackend>(cfg.backend.substr(7));
  if (cfg.backend == "http") {
    llm::HttpConfig h;
    h.base_url = cfg.base_url;
    h.api_key_env = cfg.api_key_env;
    h.max_attempts = cfg.max_attempts;
    h.max_in_flight = cfg.concurrency;
    h.requests_per_minute = cfg.rpm;
    std::shared_ptr<llm::ResponseCache> cache;
    if (cfg.cache) cache = std::make_shared<llm::ResponseCache>(*cfg.cache);
    return std::make_unique<llm::HttpBackend>(h, cache);
  }
  throw llm::ConfigurationError("unknown backend '" + cfg.backend + "' (expected http, replay:PATH or echo-gold)");
}

inline PromptTemplate template_for(const RunConfig& cfg, PromptKind kind) {
  if (cfg.template_file && kind == cfg.template_kind) return load_template(*cfg.template_file, kind);
  return default_template(kind);
}

/// Response singletons survive extraction only under keep-both.
inline bool keeps_response_singletons(SingletonPolicy p) { return p == SingletonPolicy::keep_both; }

// ---------------------------------------------------------------------------
// Per-document processing

enum class DocStatus { scored, resolved, skipped, failed };

inline std::string_view to_string(DocStatus s) {
  switch (s) {
    case DocStatus::scored:
      return "scored";
    case DocStatus::resolved:
      return "resolved";
    case DocStatus::skipped:
      return "skipped";
    case DocStatus::failed:
      return "failed";
  }
  return "?";
}

struct DocOutcome {
  std::string key;
  DocStatus status = DocStatus::failed;
  std::string reason;
  /// A skip caused by the backend rather than by the document itself.
  bool hard_failure = false;
  std::optional<Clustering> prediction;
  MentionSet mentions;
  std::size_t prompts = 0;
  std::size_t matched = 0;
  std::size_t unmatched_output = 0;
  std::size_t unmatched_input = 0;
  std::size_t output_lines = 0;
  std::size_t unpaired_output_lines = 0;
  std::size_t malformed = 0;
  std::size_t md_dropped = 0;
  std::size_t truncated = 0;
  std::vector<std::string> warnings;
  std::optional<DocEvaluation> evaluation;
};

/// Union-find over mention indices.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

/// Maps a QA answer onto the candidate with the highest token overlap
/// (at least `min_similarity`); ties go to the candidate nearest the target.
/// A leading echo of the question ("*x* refers to") is ignored and negative
/// answers map to nothing.
inline std::optional<MentionSpan> ground_qa_answer(const Document& doc, std::string_view answer,
                                                   const MentionSpan& target,
                                                   const std::vector<MentionSpan>& candidates,
                                                   double min_similarity = 0.5) {
  std::string a(text::trim(answer));
  const auto lower = text::to_lower(a);
  if (lower.find("does not refer") != std::string::npos || lower.find("no antecedent") != std::string::npos ||
      lower.find("refers to nothing") != std::string::npos) {
    return std::nullopt;
  }
  if (auto p = lower.find("refers to "); p != std::string::npos) a = a.substr(p + 10);
  if (auto nl = a.find('\n'); nl != std::string::npos) a = a.substr(0, nl);
  auto tokens = text::comparison_tokens(a);
  while (!tokens.empty() && (tokens.back() == "." || tokens.back() == "*")) tokens.pop_back();
  if (tokens.empty()) return std::nullopt;

  std::optional<MentionSpan> best;
  double best_sim = 0.0;
  std::size_t best_dist = 0;
  for (const auto& c : candidates) {
    if (c == target) continue;
    const double sim = overlap_similarity(tokens, text::comparison_tokens(span_text(doc, c)));
    if (sim < min_similarity) continue;
    const std::size_t dist = c.start > target.start ? c.start - target.start : target.start - c.start;
    if (!best || sim > best_sim + 1e-9 || (sim > best_sim - 1e-9 && dist < best_dist)) {
      best = c;
      best_sim = sim;
      best_dist = dist;
    }
  }
  return best;
}

struct RunContext {
  const RunConfig& cfg;
  llm::CompletionBackend& backend;
  const ExternalMentionIndex* external = nullptr;
  PromptTemplate doc_template;
  PromptTemplate qa_template;
  PromptTemplate md_template;
};

inline llm::CompletionResponse run_prompt(const RunContext& rc, const RenderedPrompt& prompt,
                                          const llm::PromptContext& pctx, DocOutcome& out) {
  llm::CompletionRequest req;
  req.prompt = prompt.text;
  req.model_name = rc.cfg.model;
  req.max_output_tokens = llm::default_max_output_tokens(prompt.body);
  ++out.prompts;
  auto resp = rc.backend.complete(req, &pctx);
  if (resp.finish_reason == llm::FinishReason::length) {
    ++out.truncated;
    out.warnings.push_back(out.key + ": completion truncated at the output-token limit");
  }
  return resp;
}

inline void resolve_with_document_template(const RunContext& rc, const Document& doc, DocOutcome& out) {
  const auto marked = mark_mentions(doc, out.mentions);
  const auto prompt = render_document_prompt(marked, rc.doc_template);
  const auto estimate = llm::estimate_tokens(prompt.text) + llm::default_max_output_tokens(prompt.body);
  if (estimate > rc.cfg.token_budget) {
    out.status = DocStatus::skipped;
    out.reason = "prompt and completion estimate " + std::to_string(estimate) + " tokens, budget " +
                 std::to_string(rc.cfg.token_budget);
    return;
  }
  llm::PromptContext pctx;
  pctx.kind = PromptKind::document;
  pctx.doc = &doc;
  pctx.registry = &marked.registry;
  const auto resp = run_prompt(rc, prompt, pctx, out);
  const auto alignment = align_output(doc, marked.registry, resp.text, rc.cfg.alignment);
  out.matched = alignment.matches.size();
  out.unmatched_output = alignment.unmatched_output.size();
  out.unmatched_input = alignment.unmatched_input.size();
  out.output_lines = alignment.output_lines;
  out.unpaired_output_lines = alignment.unpaired_output_lines;
  out.malformed = alignment.malformed_annotations;
  out.prediction = build_clustering(alignment, keeps_response_singletons(rc.cfg.policy));
}

inline void resolve_with_qa_template(const RunContext& rc, const Document& doc, DocOutcome& out) {
  std::vector<MentionSpan> ordered(out.mentions.begin(), out.mentions.end());
  std::sort(ordered.begin(), ordered.end(), document_order);
  DisjointSets sets(ordered.size());
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    std::vector<MentionSpan> cands;
    for (std::size_t j = 0; j < ordered.size(); ++j) {
      if (j == i) continue;
      if (rc.cfg.qa_candidates == QaCandidates::preceding && j > i) break;
      cands.push_back(ordered[j]);
    }
    if (cands.empty()) continue;
    const auto prompt = render_qa_prompt(doc, ordered[i], rc.qa_template);
    const auto estimate = llm::estimate_tokens(prompt.text) + llm::default_max_output_tokens(prompt.body);
    if (estimate > rc.cfg.token_budget) {
      out.status = DocStatus::skipped;
      out.reason = "QA prompt estimate " + std::to_string(estimate) + " tokens exceeds budget " +
                   std::to_string(rc.cfg.token_budget);
      return;
    }
    llm::PromptContext pctx;
    pctx.kind = PromptKind::qa;
    pctx.doc = &doc;
    pctx.target = ordered[i];
    pctx.candidates = cands;
    const auto resp = run_prompt(rc, prompt, pctx, out);
    if (auto ante = ground_qa_answer(doc, resp.text, ordered[i], cands)) {
      const auto j = static_cast<std::size_t>(std::find(ordered.begin(), ordered.end(), *ante) - ordered.begin());
      sets.unite(i, j);
      ++out.matched;
    } else {
      ++out.unmatched_output;
    }
  }
  std::map<std::size_t, Clustering::Cluster> groups;
  for (std::size_t i = 0; i < ordered.size(); ++i) groups[sets.find(i)].push_back(ordered[i]);
  std::vector<Clustering::Cluster> clusters;
  for (auto& [root, members] : groups) {
    if (members.size() > 1 || keeps_response_singletons(rc.cfg.policy)) clusters.push_back(std::move(members));
  }
  out.prediction = Clustering(std::move(clusters));
}

inline DocOutcome process_document(const RunContext& rc, const Document& doc) {
  DocOutcome out;
  out.key = doc.key();
  try {
    MentionSourceContext mctx;
    mctx.external = rc.external;
    mctx.backend = &rc.backend;
    mctx.model = rc.cfg.model;
    mctx.md_template = rc.md_template;
    auto mres = mentions_for(doc, parse_mention_source(rc.cfg.mentions), mctx);
    out.mentions = std::move(mres.spans);
    out.md_dropped = mres.md_dropped;
    out.warnings = std::move(mres.warnings);

    out.status = DocStatus::resolved;
    switch (rc.cfg.template_kind) {
      case PromptKind::document:
        resolve_with_document_template(rc, doc, out);
        break;
      case PromptKind::qa:
        resolve_with_qa_template(rc, doc, out);
        break;
      case PromptKind::mention_detection:
        throw llm::ConfigurationError("the md template detects mentions; use md-eval or --mentions llm");
    }
    if (out.status == DocStatus::skipped) return out;
    if (doc.gold_clusters && out.prediction) {
      out.evaluation =
          evaluate_document(out.key, *doc.gold_clusters, *out.prediction, rc.cfg.policy, out.mentions, &doc);
      out.status = DocStatus::scored;
    }
  } catch (const llm::ConfigurationError& e) {
    out.status = DocStatus::failed;
    out.reason = e.what();
  } catch (const llm::BackendError& e) {
    out.status = DocStatus::skipped;
    out.hard_failure = true;
    out.reason = std::string("backend: ") + e.what();
  } catch (const std::exception& e) {
    out.status = DocStatus::failed;
    out.reason = e.what();
  }
  if (out.status != DocStatus::scored && out.status != DocStatus::resolved) out.prediction.reset();
  return out;
}

/// Applies `fn` to every index with a bounded pool of worker threads.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Artifacts

/// Writes via a sibling temporary file and a rename.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline nlohmann::json clustering_json(const Clustering& c) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& cl : c.clusters()) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : cl) members.push_back({m.start, m.end});
    arr.push_back(members);
  }
  return arr;
}

struct RunManifest {
  RunConfig config;
  std::string template_version;
  std::string backend_id;
  std::vector<DocOutcome> documents;  // ordered by key
  std::optional<ScoreReport> scores;

  std::size_t count(DocStatus s) const {
    return static_cast<std::size_t>(
        std::count_if(documents.begin(), documents.end(), [&](const DocOutcome& d) { return d.status == s; }));
  }
  bool hard_failures() const {
    return std::any_of(documents.begin(), documents.end(),
                       [](const DocOutcome& d) { return d.status == DocStatus::failed || d.hard_failure; });
  }
  int exit_code() const { return hard_failures() ? 1 : 0; }
};

inline nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json docs = nlohmann::json::array();
  std::size_t matched = 0, un_out = 0, un_in = 0, unpaired = 0, malformed = 0, dropped = 0, truncated = 0,
              prompts = 0;
  for (const auto& d : m.documents) {
    nlohmann::json j{{"doc", d.key},
                     {"status", std::string(to_string(d.status))},
                     {"prompts", d.prompts},
                     {"diagnostics",
                      {{"matched", d.matched},
                       {"unmatched_output", d.unmatched_output},
                       {"unmatched_input", d.unmatched_input},
                       {"output_lines", d.output_lines},
                       {"unpaired_output_lines", d.unpaired_output_lines},
                       {"malformed_annotations", d.malformed},
                       {"md_dropped", d.md_dropped},
                       {"truncated", d.truncated}}}};
    if (!d.reason.empty()) j["reason"] = d.reason;
    if (d.hard_failure) j["hard_failure"] = true;
    if (!d.warnings.empty()) j["warnings"] = d.warnings;
    docs.push_back(j);
    matched += d.matched;
    un_out += d.unmatched_output;
    un_in += d.unmatched_input;
    unpaired += d.unpaired_output_lines;
    malformed += d.malformed;
    dropped += d.md_dropped;
    truncated += d.truncated;
    prompts += d.prompts;
  }
  return {{"tool", kToolVersion},
          {"config", to_json(m.config)},
          {"template_version", m.template_version},
          {"backend", m.backend_id},
          {"mention_source", m.config.mentions},
          {"counters",
           {{"documents", m.documents.size()},
            {"scored", m.count(DocStatus::scored)},
            {"resolved", m.count(DocStatus::resolved)},
            {"skipped", m.count(DocStatus::skipped)},
            {"failed", m.count(DocStatus::failed)},
            {"prompts", prompts},
            {"matched", matched},
            {"unmatched_output", un_out},
            {"unmatched_input", un_in},
            {"unpaired_output_lines", unpaired},
            {"malformed_annotations", malformed},
            {"md_dropped", dropped},
            {"truncated", truncated}}},
          {"documents", docs},
          {"scores", m.scores ? to_json(*m.scores) : nlohmann::json(nullptr)}};
}

inline std::string diagnostics_csv(const RunManifest& m) {
  std::ostringstream os;
  os << "doc_id,status,prompts,matched,unmatched_output,unmatched_input,output_lines,unpaired_output_lines,"
        "malformed_annotations,md_dropped,truncated\n";
  for (const auto& d : m.documents) {
    os << d.key << ',' << to_string(d.status) << ',' << d.prompts << ',' << d.matched << ',' << d.unmatched_output
       << ',' << d.unmatched_input << ',' << d.output_lines << ',' << d.unpaired_output_lines << ',' << d.malformed
       << ',' << d.md_dropped << ',' << d.truncated << '\n';
  }
  return os.str();
}

/// Writes manifest.json, predictions.conll, predictions.json, scores.json,
/// scores.txt and diagnostics.csv into `dir`.
inline void write_run_outputs(const RunManifest& m, const std::vector<Document>& docs,
                              const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::map<std::string, const Document*> by_key;
  for (const auto& d : docs) by_key[d.key()] = &d;
  std::string conll;
  nlohmann::json preds = nlohmann::json::object();
  for (const auto& d : m.documents) {
    if (!d.prediction) continue;
    conll += serialize_conll(*by_key.at(d.key), *d.prediction);
    preds[d.key] = clustering_json(*d.prediction);
  }
  write_atomic(dir / "predictions.conll", conll);
  write_atomic(dir / "predictions.json", preds.dump(2) + "\n");
  write_atomic(dir / "diagnostics.csv", diagnostics_csv(m));
  if (m.scores) {
    write_atomic(dir / "scores.json", to_json(*m.scores).dump(2) + "\n");
    write_atomic(dir / "scores.txt", render_report_text(*m.scores, m.config.model));
  }
  write_atomic(dir / "manifest.json", to_json(m).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Commands

/// Resolves an already-loaded corpus with the given backend.
inline RunManifest resolve_corpus(const RunConfig& cfg, const std::vector<Document>& docs,
                                  llm::CompletionBackend& backend) {
  const auto source = parse_mention_source(cfg.mentions);
  std::optional<ExternalMentionIndex> external;
  if (source.kind == MentionSourceKind::external_file) {
    external = ExternalMentionIndex::load(source.provenance, cfg.dialect);
  }
  RunContext rc{cfg,
                backend,
                external ? &*external : nullptr,
                template_for(cfg, PromptKind::document),
                template_for(cfg, PromptKind::qa),
                template_for(cfg, PromptKind::mention_detection)};

  std::vector<DocOutcome> outcomes(docs.size());
  parallel_for(docs.size(), cfg.workers, [&](std::size_t i) { outcomes[i] = process_document(rc, docs[i]); });
  std::sort(outcomes.begin(), outcomes.end(), [](const auto& a, const auto& b) { return a.key < b.key; });

  RunManifest m;
  m.config = cfg;
  m.template_version = cfg.template_kind == PromptKind::qa ? rc.qa_template.version : rc.doc_template.version;
  m.backend_id = backend.id();
  std::vector<DocEvaluation> evals;
  for (const auto& o : outcomes) {
    if (o.evaluation) evals.push_back(*o.evaluation);
  }
  if (!evals.empty()) m.scores = aggregate(std::move(evals), cfg.policy);
  m.documents = std::move(outcomes);
  return m;
}

/// Loads the corpus, builds the backend, resolves and writes all outputs.
inline RunManifest cmd_resolve(const RunConfig& cfg) {
  const auto docs = load_corpus(cfg);
  auto backend = make_backend(cfg);
  auto m = resolve_corpus(cfg, docs, *backend);
  write_run_outputs(m, docs, cfg.out);
  return m;
}

/// Scores a response file against a key file. Documents are matched by key;
/// a key document missing from the response scores against an empty
/// clustering.
inline ScoreReport cmd_score(const std::string& key_path, const std::string& response_path, Dialect dialect,
                             SingletonPolicy policy) {
  auto read = [&](const std::string& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot read '" + p + "'");
    return parse_conll(in, dialect);
  };
  const auto keys = read(key_path);
  const auto responses = read(response_path);
  std::map<std::string, const Document*> resp_by_key;
  for (const auto& d : responses) resp_by_key[d.key()] = &d;
  std::vector<DocEvaluation> evals;
  std::vector<std::string> notes;
  for (const auto& k : keys) {
    Clustering response;
    if (auto it = resp_by_key.find(k.key()); it != resp_by_key.end() && it->second->gold_clusters) {
      response = *it->second->gold_clusters;
    } else {
      notes.push_back(k.key() + ": missing from the response file");
    }
    evals.push_back(evaluate_document(k.key(), k.gold_clusters.value_or(Clustering{}), response, policy,
                                      std::nullopt, &k));
  }
  auto report = aggregate(std::move(evals), policy);
  report.notes.insert(report.notes.begin(), notes.begin(), notes.end());
  return report;
}

struct MdEvalReport {
  std::string source;
  PRF overall;
  std::map<MentionClass, double> recall_by_type;
  std::size_t dropped = 0;
  std::vector<std::pair<std::string, PRF>> per_doc;
  std::vector<std::string> failures;
};

inline nlohmann::json to_json(const MdEvalReport& r) {
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [k, p] : r.per_doc) per[k] = to_json(p);
  return {{"source", r.source},
          {"md", to_json(r.overall)},
          {"recall_by_type", class_map_json(r.recall_by_type)},
          {"dropped", r.dropped},
          {"failures", r.failures},
          {"per_doc", per}};
}

inline std::string render_md_text(const MdEvalReport& r) {
  std::ostringstream os;
  os << "Type      Recall\n";
  for (const auto& [k, v] : r.recall_by_type) {
    os << std::string(to_string(k)) << std::string(10 - to_string(k).size(), ' ') << format_fixed(v * 100) << "\n";
  }
  os << "F1        " << format_fixed(r.overall.f1 * 100) << "\n";
  os << "P/R       " << format_fixed(r.overall.precision * 100) << " / " << format_fixed(r.overall.recall * 100)
     << "\n";
  if (r.dropped > 0) os << "ungrounded strings: " << r.dropped << "\n";
  return os.str();
}

inline MdEvalReport md_eval_corpus(const RunConfig& cfg, const std::vector<Document>& docs,
                                   llm::CompletionBackend* backend) {
  const auto source = parse_mention_source(cfg.mentions);
  std::optional<ExternalMentionIndex> external;
  if (source.kind == MentionSourceKind::external_file) {
    external = ExternalMentionIndex::load(source.provenance, cfg.dialect);
  }
  MentionSourceContext mctx;
  mctx.external = external ? &*external : nullptr;
  mctx.backend = backend;
  mctx.model = cfg.model;
  mctx.md_template = template_for(cfg, PromptKind::mention_detection);

  struct Item {
    std::optional<MentionResult> result;
    std::string error;
  };
  std::vector<Item> items(docs.size());
  parallel_for(docs.size(), cfg.workers, [&](std::size_t i) {
    try {
      items[i].result = mentions_for(docs[i], source, mctx);
    } catch (const std::exception& e) {
      items[i].error = docs[i].key() + ": " + e.what();
    }
  });

  MdEvalReport r;
  r.source = to_string(source);
  MentionCounts total;
  ClassRatios by_type;
  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return docs[a].key() < docs[b].key(); });
  for (auto i : order) {
    const auto& d = docs[i];
    if (!items[i].result) {
      r.failures.push_back(items[i].error);
      continue;
    }
    const auto gold = gold_mentions(d);
    const auto c = mention_counts(items[i].result->spans, gold);
    total += c;
    for (const auto& [k, v] : md_recall_counts(items[i].result->spans, gold, d)) by_type[k] += v;
    r.dropped += items[i].result->md_dropped;
    r.per_doc.emplace_back(d.key(), c.prf());
  }
  r.overall = total.prf();
  for (const auto& [k, v] : by_type) {
    if (v.total > 0) r.recall_by_type[k] = v.value();
  }
  return r;
}

inline MdEvalReport cmd_md_eval(const RunConfig& cfg) {
  const auto docs = load_corpus(cfg);
  std::unique_ptr<llm::CompletionBackend> backend;
  if (parse_mention_source(cfg.mentions).kind == MentionSourceKind::llm_prompted) backend = make_backend(cfg);
  auto r = md_eval_corpus(cfg, docs, backend.get());
  const std::filesystem::path dir(cfg.out);
  write_atomic(dir / "md_eval.json", to_json(r).dump(2) + "\n");
  write_atomic(dir / "md_eval.txt", render_md_text(r));
  return r;
}

inline StatsReport cmd_stats(const std::vector<std::string>& paths, Dialect dialect,
                             const std::optional<std::string>& language = std::nullopt) {
  RunConfig cfg;
  cfg.corpus = paths;
  cfg.dialect = dialect;
  cfg.language = language;
  return corpus_stats(load_corpus(cfg));
}

inline SampleResult cmd_sample(const std::string& candidates_path, const std::string& reference_path,
                               std::size_t length_width, std::size_t mention_width, std::uint64_t seed,
                               Dialect dialect = Dialect::conll2012) {
  return stratified_sample(load_profiles(candidates_path, dialect), load_profiles(reference_path, dialect),
                           length_width, mention_width, seed);
}

// ---------------------------------------------------------------------------
// Report over several runs

struct ReportOutput {
  std::vector<TableRow> rows;
  /// (label, MD F1, CoNLL F1) in percent, for rows that know both.
  std::vector<std::tuple<std::string, double, double>> md_vs_conll;
  std::string table;
};

namespace detail {

inline std::optional<PRF> prf_from_json(const nlohmann::json& j, const char* key, double scale) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const auto& v = j.at(key);
  return PRF{v.at("p").get<double>() * scale, v.at("r").get<double>() * scale, v.at("f1").get<double>() * scale};
}

}  // namespace detail

/// Accepts run manifests, ScoreReport JSON files, and stored tables of the
/// form {"scale": "percent", "rows": [{"label", "muc", "b3", "ceaf_phi4",
/// "conll"}]}. Each run contributes one row labeled by its file stem.
inline ReportOutput cmd_report(const std::vector<std::string>& inputs) {
  ReportOutput out;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ": " + e.what());
    }
    if (j.contains("rows")) {
      const double scale = j.value("scale", std::string("percent")) == "percent" ? 1.0 : 100.0;
      for (const auto& r : j.at("rows")) {
        TableRow row;
        row.label = r.at("label").get<std::string>();
        row.muc = detail::prf_from_json(r, "muc", scale);
        row.b3 = detail::prf_from_json(r, "b3", scale);
        row.ceaf_phi4 = detail::prf_from_json(r, "ceaf_phi4", scale);
        if (r.contains("conll") && !r.at("conll").is_null()) row.stored_conll = r.at("conll").get<double>() * scale;
        if (r.contains("md_f1") && !r.at("md_f1").is_null() && row.conll()) {
          out.md_vs_conll.emplace_back(row.label, r.at("md_f1").get<double>() * scale, *row.conll());
        }
        out.rows.push_back(std::move(row));
      }
      continue;
    }
    const nlohmann::json& s = j.contains("scores") ? j.at("scores") : j;
    if (s.is_null() || !s.contains("muc")) throw std::runtime_error(path + ": no scores to report");
    std::string label = std::filesystem::path(path).stem().string();
    if (j.contains("config")) {
      const auto& c = j.at("config");
      label = c.value("model", std::string("run")) + " " + c.value("mentions", std::string("")) + " " +
              c.value("template", std::string(""));
    }
    TableRow row{label, detail::prf_from_json(s, "muc", 100.0), detail::prf_from_json(s, "b3", 100.0),
                 detail::prf_from_json(s, "ceaf_phi4", 100.0), std::nullopt};
    if (auto md = detail::prf_from_json(s, "md", 100.0)) out.md_vs_conll.emplace_back(label, md->f1, *row.conll());
    out.rows.push_back(std::move(row));
  }
  out.table = render_table(out.rows);
  return out;
}

inline std::string md_vs_conll_csv(const ReportOutput& r) {
  std::ostringstream os;
  os << "run,md_f1,conll_f1\n";
  for (const auto& [label, md, conll] : r.md_vs_conll) {
    os << '"' << label << "\"," << format_fixed(md, 2) << ',' << format_fixed(conll, 2) << '\n';
  }
  return os.str();
}

}  // namespace promptcoref

#endif  // PROMPTCOREF_PIPELINE_HPP
