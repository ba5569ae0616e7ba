#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "promptcoref/metrics.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace promptcoref;

namespace {

constexpr double kTol = 1e-12;

Clustering abc(std::initializer_list<std::initializer_list<std::size_t>> blocks) {
  std::vector<Clustering::Cluster> cs;
  for (const auto& b : blocks) {
    Clustering::Cluster c;
    for (auto x : b) c.push_back({x, x});
    cs.push_back(c);
  }
  return Clustering(std::move(cs));
}

void expect_match(const oracle::Partition& k, const oracle::Partition& r) {
  const auto key = oracle::to_clustering(k), resp = oracle::to_clustering(r);
  const auto om = oracle::muc(k, r);
  const auto ob = oracle::b_cubed(k, r);
  const auto oc = oracle::ceaf_phi4(k, r);
  const auto m = muc(key, resp), b = b_cubed(key, resp), c = ceaf_phi4(key, resp);
  ASSERT_NEAR(m.precision, om.p, kTol);
  ASSERT_NEAR(m.recall, om.r, kTol);
  ASSERT_NEAR(b.precision, ob.p, kTol);
  ASSERT_NEAR(b.recall, ob.r, kTol);
  ASSERT_NEAR(c.precision, oc.p, kTol);
  ASSERT_NEAR(c.recall, oc.r, kTol);
}

oracle::Partition relabel(const oracle::Partition& p, const std::vector<int>& subset) {
  oracle::Partition out;
  for (const auto& b : p) {
    std::vector<int> nb;
    for (int x : b) nb.push_back(subset[static_cast<std::size_t>(x)]);
    out.push_back(nb);
  }
  return out;
}

}  // namespace

TEST(Metrics, SpotValues) {
  const auto m = muc(abc({{0, 1, 2}}), abc({{0, 1}, {2}}));
  EXPECT_DOUBLE_EQ(m.precision, 1.0);
  EXPECT_DOUBLE_EQ(m.recall, 0.5);
  EXPECT_NEAR(m.f1, 2.0 / 3.0, kTol);
  const auto b = b_cubed(abc({{0, 1}, {2}}), abc({{0, 1, 2}}));
  EXPECT_NEAR(b.precision, 5.0 / 9.0, kTol);
  EXPECT_DOUBLE_EQ(b.recall, 1.0);
  const auto b2 = b_cubed(abc({{0, 1, 2}}), abc({{0}, {1}, {2}}));
  EXPECT_NEAR(b2.recall, 1.0 / 3.0, kTol);
  EXPECT_DOUBLE_EQ(b2.precision, 1.0);
  const auto c = ceaf_phi4(abc({{0, 1, 2}}), abc({{0, 1}, {2}}));
  EXPECT_NEAR(c.precision, 0.4, kTol);
  EXPECT_NEAR(c.recall, 0.8, kTol);
  EXPECT_NEAR(c.f1, 8.0 / 15.0, kTol);
  const auto none = muc(abc({{0, 1, 2}}), abc({{0}, {1}, {2}}));
  EXPECT_EQ(none.f1, 0.0);
  EXPECT_EQ(ceaf_phi4(abc({{0, 1}}), abc({{5, 6}})).f1, 0.0);
  EXPECT_NEAR(conll_f1(PRF::from(0.5, 0.5), PRF::from(0.7, 0.7), PRF::from(0.9, 0.9)), 0.7, kTol);
}

TEST(Metrics, ExhaustiveOracleEquivalenceUpToFive) {
  for (int n = 1; n <= 5; ++n) {
    const auto parts = oracle::all_partitions(n);
    for (const auto& k : parts) {
      for (const auto& r : parts) expect_match(k, r);
    }
  }
}

TEST(Metrics, OracleEquivalenceOnDifferentMentionUniverses) {
  const int n = 4;
  std::vector<std::pair<std::vector<int>, oracle::Partition>> sides;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> subset;
    for (int x = 0; x < n; ++x) {
      if (mask & (1u << x)) subset.push_back(x);
    }
    for (const auto& p : oracle::all_partitions(static_cast<int>(subset.size()))) sides.push_back({subset, relabel(p, subset)});
  }
  for (const auto& [ks, k] : sides) {
    for (const auto& [rs, r] : sides) expect_match(k, r);
  }
}

TEST(Metrics, HungarianMatchesPermutationSearch) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t rows = 1 + rng() % 5, cols = 1 + rng() % 5;
    std::vector<std::vector<double>> w(rows, std::vector<double>(cols));
    for (auto& row : w) {
      for (auto& x : row) x = rng() % 3 == 0 ? 0.0 : u(rng);
    }
    const auto assign = max_weight_assignment(w);
    ASSERT_EQ(assign.size(), rows);
    double total = 0;
    std::vector<int> used(cols, 0);
    for (std::size_t i = 0; i < rows; ++i) {
      if (assign[i] < 0) continue;
      ASSERT_LT(static_cast<std::size_t>(assign[i]), cols);
      ASSERT_EQ(used[static_cast<std::size_t>(assign[i])]++, 0);
      total += w[i][static_cast<std::size_t>(assign[i])];
    }
    ASSERT_NEAR(total, oracle::best_assignment(w), 1e-9);
  }
}

TEST(Metrics, InvariantUnderRelabelingAndSymmetric) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 200; ++t) {
    const auto doc = synthetic::random_document(rng, "r");
    const auto& key = *doc.gold_clusters;
    if (key.empty()) continue;
    // Response over the key's mentions, regrouped at random.
    const auto ms = key.mentions();
    std::vector<MentionSpan> mentions(ms.begin(), ms.end());
    std::shuffle(mentions.begin(), mentions.end(), rng);
    std::vector<Clustering::Cluster> groups;
    for (const auto& m : mentions) {
      if (groups.empty() || rng() % 3 == 0) {
        groups.push_back({m});
      } else {
        groups[rng() % groups.size()].push_back(m);
      }
    }
    const Clustering resp(groups);
    auto reversed = groups;
    std::reverse(reversed.begin(), reversed.end());
    for (auto& g : reversed) std::reverse(g.begin(), g.end());
    const Clustering resp2(reversed);
    for (auto fn : {muc, b_cubed, ceaf_phi4}) {
      const auto a = fn(key, resp), b = fn(key, resp2), s = fn(resp, key);
      ASSERT_EQ(a.precision, b.precision);
      ASSERT_EQ(a.recall, b.recall);
      ASSERT_NEAR(a.precision, s.recall, kTol);
      ASSERT_NEAR(a.recall, s.precision, kTol);
      const auto id = fn(key, key);
      if (key.size() > key.singleton_count() || fn != muc) ASSERT_NEAR(id.f1, 1.0, kTol);
    }
  }
}

TEST(Policies, DropCountsAreAnalytic) {
  const auto key = synthetic::block_clustering(10, 3, 20);
  const auto resp = synthetic::block_clustering(5, 2, 7);
  {
    const auto [k, r] = apply_singleton_policy(key, resp, SingletonPolicy::keep_both);
    EXPECT_EQ(k.size(), 30u);
    EXPECT_EQ(r.size(), 12u);
  }
  {
    const auto [k, r] = apply_singleton_policy(key, resp, SingletonPolicy::drop_both);
    EXPECT_EQ(k.size(), 10u);
    EXPECT_EQ(r.size(), 5u);
  }
  {
    const auto [k, r] = apply_singleton_policy(key, resp, SingletonPolicy::drop_response_keep_key);
    EXPECT_EQ(k.size(), 30u);
    EXPECT_EQ(r.size(), 5u);
  }
  EXPECT_EQ(parse_singleton_policy("drop-both"), SingletonPolicy::drop_both);
  EXPECT_EQ(to_string(SingletonPolicy::drop_response_keep_key), "drop-response");
  EXPECT_THROW(parse_singleton_policy("sometimes"), std::invalid_argument);
}

TEST(Policies, DropBothEqualsScoringFilteredClusters) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 50; ++t) {
    const auto a = synthetic::random_document(rng, "a");
    const auto& key = *a.gold_clusters;
    std::vector<Clustering::Cluster> regroup;
    for (const auto& c : key.clusters()) {
      for (const auto& m : c) {
        if (regroup.empty() || rng() % 2 == 0) {
          regroup.push_back({m});
        } else {
          regroup.back().push_back(m);
        }
      }
    }
    const Clustering resp(regroup);
    const auto e = evaluate_document("x", key, resp, SingletonPolicy::drop_both);
    std::vector<Clustering::Cluster> kf, rf;
    for (const auto& c : key.clusters()) {
      if (c.size() >= 2) kf.push_back(c);
    }
    for (const auto& c : resp.clusters()) {
      if (c.size() >= 2) rf.push_back(c);
    }
    const Clustering K(kf), R(rf);
    ASSERT_EQ(e.muc.prf().f1, muc(K, R).f1);
    ASSERT_EQ(e.b3.prf().f1, b_cubed(K, R).f1);
    ASSERT_EQ(e.ceaf.prf().f1, ceaf_phi4(K, R).f1);
  }
}

TEST(Mentions, PrfAndClasses) {
  const MentionSet gold{{0, 0}, {1, 1}, {2, 3}, {5, 5}};
  const MentionSet half{{0, 0}, {1, 1}};
  const auto p = mention_prf(half, gold);
  EXPECT_DOUBLE_EQ(p.precision, 1.0);
  EXPECT_DOUBLE_EQ(p.recall, 0.5);
  EXPECT_DOUBLE_EQ(mention_prf(gold, gold).f1, 1.0);

  auto doc = fixtures::clinton();
  const auto s = fixtures::clinton_spans(doc);
  EXPECT_EQ(classify_mention(doc, s.she2), MentionClass::pronoun);
  EXPECT_EQ(classify_mention(doc, s.gennifer), MentionClass::name);
  EXPECT_EQ(classify_mention(doc, fixtures::find_span(doc, 6, "a defamation lawsuit")), MentionClass::nominal);
  EXPECT_EQ(classify_mention(doc, s.allegations), MentionClass::nominal);
  // With NE tags present, names come from the tags only.
  doc.tokens[s.gennifer.start].ne_tag = "PERSON";
  EXPECT_EQ(classify_mention(doc, s.gennifer), MentionClass::name);
  EXPECT_EQ(classify_mention(doc, s.bob), MentionClass::nominal);

  auto fr = make_document("f", std::vector<std::string>{"Il voit elle ."}, "fr");
  std::string warning;
  EXPECT_EQ(classify_mention(fr, {2, 2}, &warning), MentionClass::nominal);
  EXPECT_NE(warning.find("fr"), std::string::npos);
}

TEST(Mentions, RecallByTypeAndResolution) {
  const auto doc = fixtures::clinton_with_gold();
  const auto gold = doc.gold_clusters->mentions();
  MentionSet no_pronouns;
  for (const auto& m : gold) {
    if (classify_mention(doc, m) != MentionClass::pronoun) no_pronouns.insert(m);
  }
  const auto r = md_recall_by_type(no_pronouns, gold, doc);
  EXPECT_EQ(r.at(MentionClass::pronoun), 0.0);
  EXPECT_EQ(r.at(MentionClass::name), 1.0);
  EXPECT_EQ(r.at(MentionClass::nominal), 1.0);

  const auto acc = resolution_accuracy(*doc.gold_clusters, *doc.gold_clusters, gold, doc);
  for (const auto& [cls, v] : acc) EXPECT_EQ(v, 1.0) << to_string(cls);

  const auto chain = make_document("c", std::vector<std::string>{"x y z ."});
  const Clustering key({{{0, 0}, {1, 1}, {2, 2}}});
  const Clustering resp({{{0, 0}, {1, 1}}, {{2, 2}}});
  const auto a = resolution_accuracy(key, resp, key.mentions(), chain);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_DOUBLE_EQ(a.begin()->second, 0.5);
}

TEST(Mentions, ClintonLinkErrorIsTheAffair) {
  const auto doc = fixtures::clinton_with_gold();
  const auto errs = link_errors(*doc.gold_clusters, fixtures::clinton_predicted(doc));
  ASSERT_EQ(errs.size(), 1u);
  EXPECT_EQ(errs[0], fixtures::clinton_spans(doc).affair);
  EXPECT_TRUE(link_errors(*doc.gold_clusters, *doc.gold_clusters).empty());
}

TEST(Report, AggregateIsMicroAndSorted) {
  const auto k1 = abc({{0, 1}}), r1 = abc({{0, 1}});
  const auto k2 = abc({{0, 1, 2, 3}}), r2 = abc({{0, 1}, {2, 3}});
  auto report = aggregate({evaluate_document("b", k2, r2, SingletonPolicy::keep_both),
                           evaluate_document("a", k1, r1, SingletonPolicy::keep_both)},
                          SingletonPolicy::keep_both);
  EXPECT_EQ(report.per_doc[0].doc_id, "a");
  // MUC recall: (1 + 2) / (1 + 3).
  EXPECT_DOUBLE_EQ(report.muc.recall, 0.75);
  EXPECT_NEAR(report.conll_f1, conll_f1(report.muc, report.b3, report.ceaf_phi4), kTol);
  const auto text = render_report_text(report);
  EXPECT_NE(text.find("keep-both"), std::string::npos);
  const auto j = to_json(report);
  EXPECT_EQ(j["singleton_policy"], "keep-both");
}

TEST(Report, TableUsesMeanOfF1Columns) {
  TableRow row{"gold", PRF{89.6, 88.9, 89.2}, PRF{76.0, 89.2, 79.4}, PRF{84.8, 65.2, 73.7}, std::nullopt};
  EXPECT_EQ(format_fixed(*row.conll()), "80.8");
  TableRow only{"longdoc", std::nullopt, std::nullopt, std::nullopt, 77.6};
  const auto t = render_table({row, only});
  EXPECT_NE(t.find("80.8"), std::string::npos);
  EXPECT_NE(t.find("77.6"), std::string::npos);
}
