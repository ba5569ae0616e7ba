#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "promptcoref/pipeline.hpp"
#include "support/fixtures.hpp"
#include "support/synthetic.hpp"

using namespace promptcoref;

#ifndef PROMPTCOREF_TEST_DATA_DIR
#define PROMPTCOREF_TEST_DATA_DIR "tests/data"
#endif

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("promptcoref_pipeline_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Pipeline, EchoGoldIsPerfectOnSyntheticCorpus) {
  const auto docs = synthetic::random_corpus(12, 99);
  RunConfig cfg;
  llm::EchoGoldBackend echo;
  const auto m = resolve_corpus(cfg, docs, echo);
  EXPECT_EQ(m.count(DocStatus::scored), docs.size());
  ASSERT_TRUE(m.scores);
  EXPECT_DOUBLE_EQ(m.scores->conll_f1, 1.0);
  EXPECT_DOUBLE_EQ(m.scores->md.f1, 1.0);
  const auto j = to_json(m);
  EXPECT_EQ(j["counters"]["unmatched_output"], 0);
  EXPECT_EQ(j["counters"]["unmatched_input"], 0);
  EXPECT_EQ(m.exit_code(), 0);
}

TEST(Pipeline, WorkerCountDoesNotChangeResults) {
  const auto docs = synthetic::random_corpus(8, 5);
  RunConfig one, many;
  one.workers = 1;
  many.workers = 8;
  llm::EchoGoldBackend echo;
  const auto a = to_json(resolve_corpus(one, docs, echo));
  auto b = to_json(resolve_corpus(many, docs, echo));
  b["config"]["workers"] = 1;
  EXPECT_EQ(a, b);
}

TEST(Pipeline, QaTemplateWithEchoGoldRecoversHongKong) {
  RunConfig cfg;
  cfg.template_kind = PromptKind::qa;
  llm::EchoGoldBackend echo;
  const auto m = resolve_corpus(cfg, {fixtures::hong_kong()}, echo);
  ASSERT_EQ(m.documents.size(), 1u);
  EXPECT_EQ(m.documents[0].status, DocStatus::scored) << m.documents[0].reason;
  EXPECT_EQ(*m.documents[0].prediction, *fixtures::hong_kong().gold_clusters);
  EXPECT_EQ(m.template_version, "qa.v1");
}

TEST(Pipeline, QaAnswerGrounding) {
  const auto doc = fixtures::hong_kong();
  const auto it = fixtures::find_span(doc, 3, "it");
  const std::vector<MentionSpan> cands = {fixtures::find_span(doc, 2, "The world 's fifth Disney park"),
                                          fixtures::find_span(doc, 2, "Disney"), fixtures::find_span(doc, 3, "Disney")};
  EXPECT_EQ(ground_qa_answer(doc, "*it* refers to Disney.", it, cands), cands[2]);
  EXPECT_EQ(ground_qa_answer(doc, "the world's fifth Disney park", it, cands), cands[0]);
  EXPECT_EQ(ground_qa_answer(doc, "*it* does not refer to any other mention.", it, cands), std::nullopt);
  EXPECT_EQ(ground_qa_answer(doc, "a unicorn", it, cands), std::nullopt);
}

TEST(Pipeline, ReplayedClintonCompletionScoresTheLinkError) {
  const auto doc = fixtures::clinton_with_gold();
  const auto marked = mark_mentions(doc, gold_mentions(doc));
  llm::ReplayBackend replay;
  replay.add_prompt(render_document_prompt(marked).text, fixtures::kClintonGoldMentionsCompletion);
  RunConfig cfg;
  const auto m = resolve_corpus(cfg, {doc}, replay);
  ASSERT_EQ(m.documents[0].status, DocStatus::scored) << m.documents[0].reason;
  EXPECT_EQ(*m.documents[0].prediction, fixtures::clinton_predicted(doc));
  EXPECT_LT(m.scores->conll_f1, 1.0);
  EXPECT_DOUBLE_EQ(m.scores->md.f1, 1.0);
}

TEST(Pipeline, UnreachableBackendIsHardFailure) {
  RunConfig cfg;
  cfg.backend = "http";
  cfg.base_url = "http://127.0.0.1:1";
  cfg.max_attempts = 1;
  auto backend = make_backend(cfg);
  const auto m = resolve_corpus(cfg, {fixtures::hong_kong()}, *backend);
  EXPECT_EQ(m.documents[0].status, DocStatus::skipped);
  EXPECT_TRUE(m.documents[0].hard_failure);
  EXPECT_EQ(m.exit_code(), 1);
  EXPECT_FALSE(m.scores);
}

TEST(Pipeline, OverBudgetDocumentsAreSkippedSoftly) {
  RunConfig cfg;
  cfg.token_budget = 50;
  llm::EchoGoldBackend echo;
  const auto m = resolve_corpus(cfg, {fixtures::hong_kong()}, echo);
  EXPECT_EQ(m.documents[0].status, DocStatus::skipped);
  EXPECT_FALSE(m.documents[0].hard_failure);
  EXPECT_EQ(m.documents[0].prompts, 0u);
  EXPECT_EQ(m.exit_code(), 0);
}

TEST(Pipeline, MdTemplateIsRejectedForResolution) {
  RunConfig cfg;
  cfg.template_kind = PromptKind::mention_detection;
  llm::EchoGoldBackend echo;
  const auto m = resolve_corpus(cfg, {fixtures::hong_kong()}, echo);
  EXPECT_EQ(m.documents[0].status, DocStatus::failed);
  EXPECT_EQ(m.exit_code(), 1);
}

TEST(Pipeline, DropBothScoresWithoutTouchingStoredPredictions) {
  const auto docs = synthetic::random_corpus(3, 12);
  RunConfig cfg;
  cfg.policy = SingletonPolicy::drop_both;
  llm::EchoGoldBackend echo;
  const auto m = resolve_corpus(cfg, docs, echo);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    ASSERT_TRUE(m.documents[i].prediction);
    EXPECT_EQ(*m.documents[i].prediction, *docs[i].gold_clusters);
  }
  EXPECT_DOUBLE_EQ(m.scores->conll_f1, 1.0);
  EXPECT_EQ(m.scores->singleton_policy, SingletonPolicy::drop_both);
}

TEST(Pipeline, OutputsRoundTripThroughScore) {
  const auto dir = scratch("outputs");
  auto docs = synthetic::random_corpus(4, 3);
  RunConfig cfg;
  cfg.out = dir.string();
  llm::EchoGoldBackend echo;
  const auto m = resolve_corpus(cfg, docs, echo);
  write_run_outputs(m, docs, dir);
  for (const char* f : {"predictions.conll", "predictions.json", "diagnostics.csv", "scores.json", "scores.txt",
                        "manifest.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "manifest.json.tmp"));
  const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  EXPECT_EQ(manifest["tool"], kToolVersion);
  EXPECT_EQ(manifest["template_version"], "document.v1");
  EXPECT_EQ(config_from_json(manifest).out, cfg.out);

  std::string key;
  for (const auto& d : docs) key += serialize_conll(d, *d.gold_clusters);
  std::ofstream(dir / "key.conll") << key;
  const auto report = cmd_score((dir / "key.conll").string(), (dir / "predictions.conll").string(),
                                Dialect::conll2012, SingletonPolicy::keep_both);
  EXPECT_DOUBLE_EQ(report.conll_f1, 1.0);
  EXPECT_TRUE(report.notes.empty());

  const auto rep = cmd_report({(dir / "manifest.json").string(), (dir / "scores.json").string()});
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_EQ(format_fixed(*rep.rows[0].conll()), "100.0");
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, ScoreNotesDocumentsMissingFromResponse) {
  const auto dir = scratch("missing");
  std::filesystem::create_directories(dir);
  const auto docs = synthetic::random_corpus(2, 8);
  std::ofstream(dir / "key.conll") << serialize_conll(docs[0], *docs[0].gold_clusters)
                                   << serialize_conll(docs[1], *docs[1].gold_clusters);
  std::ofstream(dir / "resp.conll") << serialize_conll(docs[0], *docs[0].gold_clusters);
  const auto r = cmd_score((dir / "key.conll").string(), (dir / "resp.conll").string(), Dialect::conll2012,
                           SingletonPolicy::keep_both);
  ASSERT_EQ(r.notes.size(), 1u);
  EXPECT_LT(r.muc.recall, 1.0);
  EXPECT_DOUBLE_EQ(r.muc.precision, 1.0);
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, ConfigSurvivesJson) {
  RunConfig c;
  c.corpus = {"a.conll", "b.conll"};
  c.language = "zh";
  c.template_kind = PromptKind::qa;
  c.policy = SingletonPolicy::drop_response_keep_key;
  c.qa_candidates = QaCandidates::all;
  c.alignment.sentence_threshold = 0.7;
  c.seed = 77;
  const auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_THROW(config_from_json(nlohmann::json{{"qa_antecedents", "sometimes"}}), std::invalid_argument);
}

TEST(Report, StoredTableRendersMeanOfF1) {
  const auto out = cmd_report({std::string(PROMPTCOREF_TEST_DATA_DIR) + "/reported_results.json"});
  ASSERT_EQ(out.rows.size(), 7u);
  const auto& gold = out.rows.back();
  EXPECT_EQ(gold.label, "InstructGPT (gold)");
  EXPECT_EQ(format_fixed(*gold.conll()), "80.8");
  EXPECT_EQ(format_fixed(*out.rows[2].conll()), "58.8");
  EXPECT_NE(out.table.find("80.8"), std::string::npos);
}

TEST(Stats, ReadsCorpusFiles) {
  const auto dir = scratch("stats");
  std::filesystem::create_directories(dir);
  auto docs = synthetic::random_corpus(3, 4);
  std::ofstream(dir / "c.conll") << serialize_conll(docs[0], *docs[0].gold_clusters)
                                 << serialize_conll(docs[1], *docs[1].gold_clusters)
                                 << serialize_conll(docs[2], *docs[2].gold_clusters);
  const auto r = cmd_stats({(dir / "c.conll").string()}, Dialect::conll2012, std::string("ar"));
  EXPECT_EQ(r.doc_count(), 3u);
  EXPECT_EQ(r.by_language.count("ar"), 1u);
  EXPECT_EQ(r.by_genre.at("syn").doc_count, 3u);
  std::filesystem::remove_all(dir);
}
