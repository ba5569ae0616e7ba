#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "promptcoref/corpus.hpp"
#include "support/fixtures.hpp"
#include "support/synthetic.hpp"

using namespace promptcoref;

namespace {

const char* kConll = R"(#begin document (bc/cctv/00/cctv_0001); part 000
bc/cctv/00/cctv_0001	0	0	The	DT	-	-	-	-	-	*	(0
bc/cctv/00/cctv_0001	0	1	world	NN	-	-	-	-	-	*	-
bc/cctv/00/cctv_0001	0	2	's	POS	-	-	-	-	-	*	-
bc/cctv/00/cctv_0001	0	3	fifth	JJ	-	-	-	-	-	(ORDINAL)	-
bc/cctv/00/cctv_0001	0	4	Disney	NNP	-	-	-	-	-	(ORG)	(1)
bc/cctv/00/cctv_0001	0	5	park	NN	-	-	-	-	-	*	0)
bc/cctv/00/cctv_0001	0	6	opened	VBD	-	-	-	-	-	*	-

bc/cctv/00/cctv_0001	0	0	Disney	NNP	-	-	-	-	-	(ORG)	(1)
bc/cctv/00/cctv_0001	0	1	said	VBD	-	-	-	-	-	*	-
bc/cctv/00/cctv_0001	0	2	it	PRP	-	-	-	-	-	*	(1)|(2
bc/cctv/00/cctv_0001	0	3	grew	VBD	-	-	-	-	-	*	2)

#end document
)";

const char* kSemeval = R"(#begin document doc1
1	Ana	Ana	Ana	NP	NP	_	_	_	_	_	_	(person)	(person)	(0)
2	la	el	el	DA	DA	_	_	_	_	_	_	_	_	(1
3	vio	ver	ver	VM	VM	_	_	_	_	_	_	_	_	1)

1	Ella	ella	ella	PP	PP	_	_	_	_	_	_	_	_	(0)
2	sonrió	sonreír	sonreír	VM	VM	_	_	_	_	_	_	_	_	_
#end document
)";

}  // namespace

TEST(Conll, ParsesDocumentsSentencesAndClusters) {
  const auto docs = parse_conll(std::string_view(kConll), Dialect::conll2012);
  ASSERT_EQ(docs.size(), 1u);
  const auto& d = docs[0];
  EXPECT_EQ(d.doc_id, "bc/cctv/00/cctv_0001");
  EXPECT_EQ(d.part, "000");
  EXPECT_EQ(d.key(), "bc/cctv/00/cctv_0001#000");
  EXPECT_EQ(d.genre, "bc");
  EXPECT_EQ(d.tokens.size(), 11u);
  EXPECT_EQ(d.sentence_count, 2u);
  EXPECT_EQ(d.tokens[7].sentence_index, 1u);
  ASSERT_TRUE(d.gold_clusters);
  const Clustering expected({{{0, 5}}, {{4, 4}, {7, 7}, {9, 9}}, {{9, 10}}});
  EXPECT_EQ(*d.gold_clusters, expected);
  EXPECT_EQ(d.tokens[4].ne_tag, "ORG");
  EXPECT_EQ(d.tokens[0].ne_tag, std::nullopt);
  EXPECT_EQ(d.tokens[0].pos_tag, "DT");
}

TEST(Conll, ParsesSemevalDialect) {
  const auto docs = parse_conll(std::string_view(kSemeval), Dialect::semeval2010, {"es"});
  ASSERT_EQ(docs.size(), 1u);
  const auto& d = docs[0];
  EXPECT_EQ(d.doc_id, "doc1");
  EXPECT_EQ(d.language, "es");
  EXPECT_EQ(d.tokens[0].surface, "Ana");
  EXPECT_EQ(d.tokens[0].ne_tag, "person");
  EXPECT_EQ(*d.gold_clusters, Clustering({{{0, 0}, {3, 3}}, {{1, 2}}}));
}

TEST(Conll, RejectsMalformedInput) {
  const std::string unclosed = "#begin document (a); part 000\na 0 0 x - - - - - - * (0\n#end document\n";
  try {
    parse_conll(std::string_view(unclosed), Dialect::conll2012);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.doc_id(), "a");
    EXPECT_EQ(e.line(), 2u);
  }
  const std::string stray = "#begin document (a); part 000\na 0 0 x - - - - - - * 0)\n#end document\n";
  EXPECT_THROW(parse_conll(std::string_view(stray), Dialect::conll2012), ParseError);
  const std::string narrow = "#begin document (a); part 000\na 0 0 x (0)\n#end document\n";
  EXPECT_THROW(parse_conll(std::string_view(narrow), Dialect::conll2012), DialectError);
  const std::string missing_end = "#begin document (a); part 000\na 0 0 x - - - - - - * -\n";
  EXPECT_THROW(parse_conll(std::string_view(missing_end), Dialect::conll2012), ParseError);
  const std::string subtoken = "#begin document (a); part 000\na 0 0 x - - - - - - * (0x)\n#end document\n";
  EXPECT_THROW(parse_conll(std::string_view(subtoken), Dialect::conll2012), ParseError);
}

TEST(Conll, SerializeThenParseIsIdentity) {
  const auto docs = parse_conll(std::string_view(kConll), Dialect::conll2012);
  const auto text = serialize_conll(docs[0], *docs[0].gold_clusters);
  const auto again = parse_conll(std::string_view(text), Dialect::conll2012);
  ASSERT_EQ(again.size(), 1u);
  EXPECT_EQ(*again[0].gold_clusters, *docs[0].gold_clusters);
  EXPECT_EQ(again[0].tokens.size(), docs[0].tokens.size());
  EXPECT_EQ(again[0].key(), docs[0].key());
}

TEST(Conll, SerializeRejectsOutOfBoundsAndCrossingInCluster) {
  const auto doc = make_document("x", std::vector<std::string>{"a b c d"});
  EXPECT_THROW(serialize_conll(doc, Clustering({{{2, 9}}})), SerializeError);
  EXPECT_THROW(serialize_conll(doc, Clustering({{{0, 2}, {1, 3}}})), SerializeError);
}

TEST(Conll, RandomDocumentsRoundTrip) {
  std::mt19937_64 rng(7);
  synthetic::DocSpec spec;
  spec.min_sentences = 1;
  spec.max_sentences = 6;
  spec.mention_rate = 0.5;
  for (int i = 0; i < 200; ++i) {
    auto d = synthetic::random_document(rng, "rt/" + std::to_string(i), spec);
    d.part = std::to_string(i % 3);
    d.dialect = i % 2 == 0 ? Dialect::conll2012 : Dialect::semeval2010;
    const auto text = serialize_conll(d, *d.gold_clusters);
    const auto back = parse_conll(std::string_view(text), d.dialect);
    ASSERT_EQ(back.size(), 1u);
    ASSERT_EQ(*back[0].gold_clusters, *d.gold_clusters) << text;
    ASSERT_EQ(back[0].sentence_count, d.sentence_count);
  }
}

TEST(Clustering, CanonicalFormIgnoresOrder) {
  const Clustering a({{{5, 5}, {0, 1}}, {{2, 2}}});
  const Clustering b({{{2, 2}}, {{0, 1}, {5, 5}}});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.clusters()[0].front(), (MentionSpan{0, 1}));
  EXPECT_THROW(Clustering({{{0, 0}}, {{0, 0}}}), ClusteringError);
  EXPECT_THROW(Clustering(std::vector<Clustering::Cluster>{Clustering::Cluster{}}), ClusteringError);
}

TEST(Clustering, DocumentOrderPutsOuterSpanFirst) {
  EXPECT_TRUE(document_order({2, 5}, {2, 3}));
  EXPECT_TRUE(document_order({1, 1}, {2, 9}));
  EXPECT_FALSE(document_order({2, 3}, {2, 5}));
}

TEST(Corpus, GoldMentionsRequireAnnotation) {
  auto d = make_document("x", std::vector<std::string>{"a b"});
  EXPECT_THROW(gold_mentions(d), GoldUnavailableError);
  d.gold_clusters = Clustering({{{0, 0}, {1, 1}}});
  EXPECT_EQ(gold_mentions(d).size(), 2u);
}

TEST(Corpus, StatsByLanguageAndGenre) {
  auto a = make_document("nw/a", std::vector<std::string>{"x y z", "w"});
  a.genre = "nw";
  a.gold_clusters = Clustering({{{0, 0}, {1, 1}}, {{3, 3}}});
  auto b = make_document("bc/b", std::vector<std::string>{"x y"}, "zh");
  b.genre = "bc";
  b.gold_clusters = Clustering({{{0, 0}}});
  const auto r = corpus_stats({a, b});
  EXPECT_EQ(r.doc_count(), 2u);
  EXPECT_DOUBLE_EQ(r.mean_tokens_per_doc(), 3.0);
  EXPECT_DOUBLE_EQ(*r.singleton_fraction(), 2.0 / 3.0);
  EXPECT_EQ(r.by_language.at("zh").doc_count, 1u);
  EXPECT_EQ(r.by_genre.at("nw").cluster_count, 2u);
  const auto tsv = to_tsv(r);
  EXPECT_NE(tsv.find("all\t2\t3.0\t3\t66.7"), std::string::npos) << tsv;
}

TEST(Corpus, FixtureSpansResolve) {
  const auto d = fixtures::clinton_with_gold();
  EXPECT_EQ(d.sentence_count, 8u);
  EXPECT_EQ(d.gold_clusters->mention_count(), 30u);
  EXPECT_EQ(d.gold_clusters->size(), 8u);
  EXPECT_EQ(span_text(d, fixtures::clinton_spans(d).affair), "an affair with her");
}
