#ifndef PROMPTCOREF_TESTS_FIXTURES_HPP
#define PROMPTCOREF_TESTS_FIXTURES_HPP

// Hand-built documents for the Hong Kong passage used by the prompt
// templates and for the Bill Clinton / Gennifer Flowers news passage.

#include <stdexcept>
#include <string>
#include <vector>

#include "promptcoref/corpus.hpp"

namespace fixtures {

using promptcoref::Clustering;
using promptcoref::Document;
using promptcoref::MentionSpan;

/// Span of the `occurrence`-th run of `phrase` (space separated tokens)
/// inside sentence `sentence`.
inline MentionSpan find_span(const Document& doc, std::size_t sentence, const std::string& phrase,
                             std::size_t occurrence = 0) {
  const auto words = promptcoref::text::split_ws(phrase);
  const auto ranges = doc.sentence_ranges();
  const auto [b, e] = ranges.at(sentence);
  for (std::size_t i = b; i + words.size() <= e; ++i) {
    bool ok = true;
    for (std::size_t k = 0; k < words.size() && ok; ++k) ok = doc.tokens[i + k].surface == words[k];
    if (ok && occurrence-- == 0) return {i, i + words.size() - 1};
  }
  throw std::logic_error("fixture phrase not found: " + phrase);
}

// ---------------------------------------------------------------------------
// Hong Kong passage

inline Document hong_kong() {
  auto doc = promptcoref::make_document(
      "hk/disney_0",
      std::vector<std::string>{
          "In the summer of 2005 , a picture that people have long been looking forward to started emerging with "
          "frequency in various major Hong Kong media .",
          "With their unique charm , these well-known cartoon images once again caused Hong Kong to be a focus of "
          "worldwide attention .",
          "The world 's fifth Disney park will soon open to the public here .",
          "The most important thing about Disney is that it is a global brand ."});
  doc.gold_clusters = Clustering({
      {find_span(doc, 0, "Hong Kong"), find_span(doc, 1, "Hong Kong")},
      {find_span(doc, 1, "their"), find_span(doc, 1, "these well-known cartoon images")},
      {find_span(doc, 2, "The world 's fifth Disney park")},
      {find_span(doc, 2, "Disney"), find_span(doc, 3, "Disney"), find_span(doc, 3, "it")},
  });
  return doc;
}

/// The document-template answer printed for the passage (one paragraph).
inline const std::string kHongKongDocumentOutput =
    "In the summer of 2005, a picture that people have long been looking forward to started emerging with "
    "frequency in various major [Hong Kong](#cluster_0) media. With [their](#cluster_1) unique charm, [these "
    "well-known cartoon images](#cluster_1) once again caused [Hong Kong](#cluster_0) to be a focus of worldwide "
    "attention. [The world's fifth [Disney](#cluster_3) park](#cluster_2) will soon open to the public here. The "
    "most important thing about [Disney](#cluster_3) is that [it](#cluster_3) is a global brand.";

/// The mention-detection answer printed for the passage.
inline const std::string kHongKongMdOutput =
    "Named Entities: Hong Kong\n"
    "Pronouns: their, it, many, its, that, its, this\n"
    "Nominal Noun Phrases: the summer of 2005, various major Hong Kong media, their unique charm,\n"
    "the world's fifth Disney park";

// ---------------------------------------------------------------------------
// News passage

inline Document clinton() {
  auto doc = promptcoref::make_document(
      "bn/headliners_0",
      std::vector<std::string>{
          "Nine years ago today , allegations of infidelity almost derailed Bill Clinton 's journey from hope to "
          "the White House .",
          "Bob Glascoff tracks the life of the \" other woman \" in today 's edition of \" Headliners . \"",
          "On January 1992 , Gennifer Flowers claims she had a 12 - year affair with Bill Clinton .",
          "Although Mr. Clinton denied having a relationship with Flowers , he did speak of bringing \" pain \" to "
          "his marriage during a joint television interview with his wife , Hillary .",
          "Flowers went on \" Larry King Live \" in 1998 at the height of the impeachment proceedings against Mr. "
          "Clinton .",
          "She said she felt vindicated when he admitted under oath that he 'd had an affair with her after "
          "denying it for years .",
          "A federal judge recently dismissed a defamation lawsuit she brought against Hillary Rodham Clinton and "
          "two former presidential aides .",
          "With \" Headliners , \" I 'm Bob Glascoff ."});
  return doc;
}

struct ClintonSpans {
  MentionSpan today0, allegations, bill_clintons, bob, other_woman, todays, headliners1, gennifer, claims, she2,
      bill_clinton2, mr_clinton3, flowers3, he3, his3a, his3b, his_wife, flowers4, mr_clinton4, she5a, she5b, he5a,
      he5b, affair, her5, it5, she6, hillary_rc, headliners7, i7;
};

inline ClintonSpans clinton_spans(const Document& d) {
  return {find_span(d, 0, "today"),
          find_span(d, 0, "allegations of infidelity"),
          find_span(d, 0, "Bill Clinton 's"),
          find_span(d, 1, "Bob Glascoff"),
          find_span(d, 1, "the \" other woman \""),
          find_span(d, 1, "today 's"),
          find_span(d, 1, "Headliners"),
          find_span(d, 2, "Gennifer Flowers"),
          find_span(d, 2, "claims"),
          find_span(d, 2, "she"),
          find_span(d, 2, "Bill Clinton"),
          find_span(d, 3, "Mr. Clinton"),
          find_span(d, 3, "Flowers"),
          find_span(d, 3, "he"),
          find_span(d, 3, "his", 0),
          find_span(d, 3, "his", 1),
          find_span(d, 3, "his wife , Hillary"),
          find_span(d, 4, "Flowers"),
          find_span(d, 4, "Mr. Clinton"),
          find_span(d, 5, "She"),
          find_span(d, 5, "she"),
          find_span(d, 5, "he", 0),
          find_span(d, 5, "he", 1),
          find_span(d, 5, "an affair with her"),
          find_span(d, 5, "her"),
          find_span(d, 5, "it"),
          find_span(d, 6, "she"),
          find_span(d, 6, "Hillary Rodham Clinton"),
          find_span(d, 7, "Headliners"),
          find_span(d, 7, "I")};
}

/// Clusters of the gold output row, numbered 1..8 there.
inline Clustering clinton_gold(const Document& d) {
  const auto s = clinton_spans(d);
  return Clustering({
      {s.today0, s.todays},
      {s.allegations, s.claims},
      {s.bill_clintons, s.bill_clinton2, s.mr_clinton3, s.he3, s.his3a, s.his3b, s.mr_clinton4, s.he5a, s.he5b},
      {s.bob, s.i7},
      {s.headliners1, s.headliners7},
      {s.other_woman, s.gennifer, s.she2, s.flowers3, s.flowers4, s.she5a, s.she5b, s.her5, s.she6},
      {s.his_wife, s.hillary_rc},
      {s.affair, s.it5},
  });
}

/// The gold-mentions answer: identical to gold except that "an affair with
/// her" and "it" joined the "allegations of infidelity" cluster.
inline Clustering clinton_predicted(const Document& d) {
  const auto s = clinton_spans(d);
  return Clustering({
      {s.today0, s.todays},
      {s.allegations, s.claims, s.affair, s.it5},
      {s.bill_clintons, s.bill_clinton2, s.mr_clinton3, s.he3, s.his3a, s.his3b, s.mr_clinton4, s.he5a, s.he5b},
      {s.bob, s.i7},
      {s.headliners1, s.headliners7},
      {s.other_woman, s.gennifer, s.she2, s.flowers3, s.flowers4, s.she5a, s.she5b, s.her5, s.she6},
      {s.his_wife, s.hillary_rc},
  });
}

inline Document clinton_with_gold() {
  auto d = clinton();
  d.gold_clusters = clinton_gold(d);
  return d;
}

/// The document-template completion for the gold-mentions setting, written
/// the way a model prints it: typographic quotes, clitics attached.
inline const std::string kClintonGoldMentionsCompletion =
    "Nine years ago [today](#cluster_1), [allegations of infidelity](#cluster_2) almost derailed [Bill "
    "Clinton's](#cluster_3) journey from hope to the White House.\n"
    "[Bob Glascoff](#cluster_4) tracks the life of [the \xE2\x80\x9C" "other woman\xE2\x80\x9D](#cluster_6) in "
    "[today's](#cluster_1) edition of \xE2\x80\x9C[Headliners](#cluster_5).\xE2\x80\x9D\n"
    "On January 1992, [Gennifer Flowers](#cluster_6) [claims](#cluster_2) [she](#cluster_6) had a 12 - year affair "
    "with [Bill Clinton](#cluster_3).\n"
    "Although [Mr. Clinton](#cluster_3) denied having a relationship with [Flowers](#cluster_6), [he](#cluster_3) "
    "did speak of bringing \xE2\x80\x9Cpain\xE2\x80\x9D to [his](#cluster_3) marriage during a joint television "
    "interview with [[his](#cluster_3) wife, Hillary](#cluster_7).\n"
    "[Flowers](#cluster_6) went on \xE2\x80\x9CLarry King Live\xE2\x80\x9D in 1998 at the height of the "
    "impeachment proceedings against [Mr. Clinton](#cluster_3).\n"
    "[She](#cluster_6) said [she](#cluster_6) felt vindicated when [he](#cluster_3) admitted under oath that "
    "[he](#cluster_3)'d had [an affair with [her](#cluster_6)](#cluster_2) after denying [it](#cluster_2) for "
    "years.\n"
    "A federal judge recently dismissed a defamation lawsuit [she](#cluster_6) brought against [Hillary Rodham "
    "Clinton](#cluster_7) and two former presidential aides.\n"
    "With \xE2\x80\x9C[Headliners](#cluster_5),\xE2\x80\x9D [I](#cluster_4)'m Bob Glascoff.";

/// Mention-detection answer whose groundings are the bracketed spans of the
/// mention-detection row.
inline const std::string kClintonMdCompletion =
    "Named Entities: Bob Glascoff, January 1992, Gennifer Flowers, Bill Clinton, Bill Clinton, Larry King, "
    "Hillary Rodham Clinton, Bob Glascoff\n"
    "Pronouns: she, he, his, his, She, she, he, he, her, it, she\n"
    "Nominal Noun Phrases: Nine years, today's edition, joint television interview, impeachment proceedings, "
    "federal judge, defamation lawsuit";

inline std::vector<MentionSpan> clinton_md_expected(const Document& d) {
  return {find_span(d, 1, "Bob Glascoff"),
          find_span(d, 2, "January 1992"),
          find_span(d, 2, "Gennifer Flowers"),
          find_span(d, 0, "Bill Clinton"),
          find_span(d, 2, "Bill Clinton"),
          find_span(d, 4, "Larry King"),
          find_span(d, 6, "Hillary Rodham Clinton"),
          find_span(d, 7, "Bob Glascoff"),
          find_span(d, 2, "she"),
          find_span(d, 3, "he"),
          find_span(d, 3, "his", 0),
          find_span(d, 3, "his", 1),
          find_span(d, 5, "She"),
          find_span(d, 5, "she"),
          find_span(d, 5, "he", 0),
          find_span(d, 5, "he", 1),
          find_span(d, 5, "her"),
          find_span(d, 5, "it"),
          find_span(d, 6, "she"),
          find_span(d, 0, "Nine years"),
          find_span(d, 1, "today 's edition"),
          find_span(d, 3, "joint television interview"),
          find_span(d, 4, "impeachment proceedings"),
          find_span(d, 6, "federal judge"),
          find_span(d, 6, "defamation lawsuit")};
}

}  // namespace fixtures

#endif  // PROMPTCOREF_TESTS_FIXTURES_HPP
