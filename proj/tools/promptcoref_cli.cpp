// promptcoref: zero-shot coreference by prompting, plus scoring utilities.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "promptcoref/promptcoref.hpp"

namespace pc = promptcoref;

namespace {

struct RunFlags {
  std::vector<std::string> corpus;
  std::string dialect = "conll2012";
  std::string language;
  std::string mentions;
  std::string template_kind;
  std::string template_file;
  std::string backend;
  std::string model;
  std::string base_url;
  std::string api_key_env;
  std::string cache;
  std::string policy;
  std::string qa_antecedents;
  std::string config;
  std::string out;
  long long seed = -1;
  long long max_attempts = -1;
  long long concurrency = -1;
  long long rpm = -1;
  long long workers = -1;
  long long token_budget = -1;
  double sentence_threshold = -1;
  double span_threshold = -1;
};

void add_run_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--corpus", f.corpus, "CoNLL corpus file(s)");
  app->add_option("--dialect", f.dialect, "conll2012 or semeval2010");
  app->add_option("--language", f.language, "override the corpus language code");
  app->add_option("--mentions", f.mentions, "gold | file:PATH | llm");
  app->add_option("--template", f.template_kind, "document | qa | md");
  app->add_option("--template-file", f.template_file, "override the template text");
  app->add_option("--backend", f.backend, "http | replay:PATH | echo-gold");
  app->add_option("--model", f.model, "model name sent to the backend");
  app->add_option("--base-url", f.base_url, "OpenAI-compatible server");
  app->add_option("--api-key-env", f.api_key_env, "environment variable holding the API key");
  app->add_option("--cache", f.cache, "JSONL response cache");
  app->add_option("--max-attempts", f.max_attempts, "HTTP attempts per prompt");
  app->add_option("--concurrency", f.concurrency, "requests in flight");
  app->add_option("--rpm", f.rpm, "requests per minute");
  app->add_option("--workers", f.workers, "documents processed in parallel");
  app->add_option("--token-budget", f.token_budget, "estimated prompt+completion tokens per request");
  app->add_option("--policy", f.policy, "keep-both | drop-both | drop-response");
  app->add_option("--sentence-threshold", f.sentence_threshold, "sentence pairing similarity");
  app->add_option("--span-threshold", f.span_threshold, "span grounding similarity");
  app->add_option("--qa-antecedents", f.qa_antecedents, "preceding | all");
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--config", f.config, "run config or manifest JSON to start from");
  app->add_option("--out", f.out, "output directory");
}

pc::RunConfig build_config(const RunFlags& f) {
  pc::RunConfig c;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw std::runtime_error("cannot read config '" + f.config + "'");
    c = pc::config_from_json(nlohmann::json::parse(in));
  }
  if (!f.corpus.empty()) c.corpus = f.corpus;
  if (!f.dialect.empty()) c.dialect = pc::parse_dialect(f.dialect);
  if (!f.language.empty()) c.language = f.language;
  if (!f.mentions.empty()) c.mentions = f.mentions;
  if (!f.template_kind.empty()) c.template_kind = pc::parse_prompt_kind(f.template_kind);
  if (!f.template_file.empty()) c.template_file = f.template_file;
  if (!f.backend.empty()) c.backend = f.backend;
  if (!f.model.empty()) c.model = f.model;
  if (!f.base_url.empty()) c.base_url = f.base_url;
  if (!f.api_key_env.empty()) c.api_key_env = f.api_key_env;
  if (!f.cache.empty()) c.cache = f.cache;
  if (!f.policy.empty()) c.policy = pc::parse_singleton_policy(f.policy);
  if (!f.qa_antecedents.empty()) {
    if (f.qa_antecedents != "preceding" && f.qa_antecedents != "all")
      throw std::invalid_argument("--qa-antecedents must be preceding or all");
    c.qa_candidates = f.qa_antecedents == "all" ? pc::QaCandidates::all : pc::QaCandidates::preceding;
  }
  if (!f.out.empty()) c.out = f.out;
  if (f.seed >= 0) c.seed = static_cast<std::uint64_t>(f.seed);
  if (f.max_attempts > 0) c.max_attempts = static_cast<std::size_t>(f.max_attempts);
  if (f.concurrency > 0) c.concurrency = static_cast<std::size_t>(f.concurrency);
  if (f.rpm > 0) c.rpm = static_cast<std::size_t>(f.rpm);
  if (f.workers > 0) c.workers = static_cast<std::size_t>(f.workers);
  if (f.token_budget > 0) c.token_budget = static_cast<std::size_t>(f.token_budget);
  if (f.sentence_threshold >= 0) c.alignment.sentence_threshold = f.sentence_threshold;
  if (f.span_threshold >= 0) c.alignment.span_threshold = f.span_threshold;
  if (c.corpus.empty()) throw std::invalid_argument("--corpus is required");
  return c;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    pc::write_atomic(path, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot coreference resolution by prompting language models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pc::kToolVersion));

  RunFlags resolve_flags;
  auto* resolve = app.add_subcommand("resolve", "resolve a corpus and score it against its gold clusters");
  add_run_flags(resolve, resolve_flags);

  std::string key_path, response_path, score_dialect = "conll2012", score_policy = "keep-both", score_json;
  auto* score = app.add_subcommand("score", "score a response CoNLL file against a key file");
  score->add_option("key", key_path, "key CoNLL file")->required();
  score->add_option("response", response_path, "response CoNLL file")->required();
  score->add_option("--dialect", score_dialect, "conll2012 or semeval2010");
  score->add_option("--policy", score_policy, "keep-both | drop-both | drop-response");
  score->add_option("--json", score_json, "also write the ScoreReport JSON here");

  RunFlags md_flags;
  auto* md_eval = app.add_subcommand("md-eval", "evaluate a mention source against gold mentions");
  add_run_flags(md_eval, md_flags);

  std::vector<std::string> stats_paths;
  std::string stats_dialect = "conll2012", stats_format = "tsv", stats_language;
  auto* stats = app.add_subcommand("stats", "corpus statistics");
  stats->add_option("corpus", stats_paths, "CoNLL file(s)")->required();
  stats->add_option("--dialect", stats_dialect, "conll2012 or semeval2010");
  stats->add_option("--language", stats_language, "override the corpus language code");
  stats->add_option("--format", stats_format, "tsv or json")->check(CLI::IsMember({"tsv", "json"}));

  std::string cand_path, ref_path, sample_dialect = "conll2012", sample_out;
  std::size_t length_bin = 500, mention_bin = 50;
  std::uint64_t sample_seed = 0;
  auto* sample = app.add_subcommand("sample", "stratified sample matching a reference corpus");
  sample->add_option("--candidates", cand_path, "candidate profiles (.csv, .json or CoNLL)")->required();
  sample->add_option("--reference", ref_path, "reference profiles (.csv, .json or CoNLL)")->required();
  sample->add_option("--length-bin", length_bin, "token bin width");
  sample->add_option("--mention-bin", mention_bin, "mention bin width");
  sample->add_option("--seed", sample_seed, "random seed");
  sample->add_option("--dialect", sample_dialect, "dialect of CoNLL inputs");
  sample->add_option("--out", sample_out, "write the JSON result here instead of stdout");

  std::vector<std::string> report_inputs;
  std::string report_csv, report_out;
  auto* report = app.add_subcommand("report", "render runs as one results table");
  report->add_option("inputs", report_inputs, "manifests, ScoreReport JSON or stored tables")->required();
  report->add_option("--csv", report_csv, "write (MD F1, CoNLL F1) pairs here");
  report->add_option("--out", report_out, "write the table here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (resolve->parsed()) {
      const auto cfg = build_config(resolve_flags);
      const auto m = pc::cmd_resolve(cfg);
      if (m.scores) std::cout << pc::render_report_text(*m.scores, cfg.model);
      std::cerr << "documents: " << m.documents.size() << ", scored " << m.count(pc::DocStatus::scored)
                << ", skipped " << m.count(pc::DocStatus::skipped) << ", failed " << m.count(pc::DocStatus::failed)
                << "; outputs in " << cfg.out << "\n";
      for (const auto& d : m.documents) {
        if (!d.reason.empty()) std::cerr << d.key << ": " << pc::to_string(d.status) << ": " << d.reason << "\n";
      }
      return m.exit_code();
    }
    if (score->parsed()) {
      const auto r = pc::cmd_score(key_path, response_path, pc::parse_dialect(score_dialect),
                                   pc::parse_singleton_policy(score_policy));
      std::cout << pc::render_report_text(r, "response");
      if (!score_json.empty()) pc::write_atomic(score_json, pc::to_json(r).dump(2) + "\n");
      return 0;
    }
    if (md_eval->parsed()) {
      const auto cfg = build_config(md_flags);
      const auto r = pc::cmd_md_eval(cfg);
      std::cout << pc::render_md_text(r);
      for (const auto& f : r.failures) std::cerr << f << "\n";
      return r.failures.empty() ? 0 : 1;
    }
    if (stats->parsed()) {
      const auto r = pc::cmd_stats(stats_paths, pc::parse_dialect(stats_dialect),
                                   stats_language.empty() ? std::nullopt : std::optional<std::string>(stats_language));
      std::cout << (stats_format == "json" ? pc::to_json(r).dump(2) + "\n" : pc::to_tsv(r));
      return 0;
    }
    if (sample->parsed()) {
      const auto r =
          pc::cmd_sample(cand_path, ref_path, length_bin, mention_bin, sample_seed, pc::parse_dialect(sample_dialect));
      write_text(sample_out, pc::to_json(r).dump(2) + "\n");
      for (const auto& s : r.shortfalls) {
        std::cerr << "shortfall: stratum (" << s.stratum.length_bin << "," << s.stratum.mention_bin << ") wanted "
                  << s.wanted << ", available " << s.available << "\n";
      }
      return 0;
    }
    if (report->parsed()) {
      const auto r = pc::cmd_report(report_inputs);
      write_text(report_out, r.table);
      if (!report_csv.empty()) pc::write_atomic(report_csv, pc::md_vs_conll_csv(r));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
