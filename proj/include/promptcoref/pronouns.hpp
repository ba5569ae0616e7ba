#ifndef PROMPTCOREF_PRONOUNS_HPP
#define PROMPTCOREF_PRONOUNS_HPP

// Closed pronoun lists per language, versioned so that a run manifest can
// record exactly which list classified its mentions. English entries are
// lowercase; matching case-folds ASCII only.

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promptcoref/text.hpp"

namespace promptcoref {

struct PronounList {
  std::string_view language;
  std::string_view version;
  std::vector<std::string_view> words;

  bool contains(std::string_view token) const {
    const auto folded = text::to_lower(token);
    return std::find(words.begin(), words.end(), std::string_view(folded)) != words.end();
  }
};

inline const std::vector<PronounList>& pronoun_lists() {
  static const std::vector<PronounList> lists = {
      {"en",
       "en.v1",
       {"i",       "me",       "my",         "mine",       "myself",   "you",   "your",  "yours",
        "yourself", "yourselves", "he",      "him",        "his",      "himself", "she", "her",
        "hers",    "herself",  "it",         "its",        "itself",   "we",    "us",    "our",
        "ours",    "ourselves", "they",      "them",       "their",    "theirs", "themselves",
        "this",    "that",     "these",      "those",      "one",      "oneself"}},
      {"zh",
       "zh.v1",
       {"我", "你", "您", "他", "她", "它", "我们", "你们", "他们", "她们", "它们", "咱们", "自己", "其", "这",
        "那", "这些", "那些", "此", "该", "本人", "人家", "大家"}},
      {"ar",
       "ar.v1",
       {"أنا", "أنت", "أنتِ", "أنتم", "أنتن", "أنتما", "هو", "هي", "هما", "هم", "هن", "نحن", "إياه", "إياها",
        "إياهم", "هذا", "هذه", "ذلك", "تلك", "هؤلاء", "أولئك", "الذي", "التي", "الذين"}},
      {"ca",
       "ca.v1",
       {"jo",  "em",    "mi",   "tu",   "et",    "ell",     "ella",   "ells",    "elles",  "nosaltres",
        "vosaltres", "vostè", "vostès", "es", "se", "li", "els", "les", "ho", "hi", "en", "ne",
        "meu", "meva", "teu", "teva", "seu", "seva", "seus", "seves", "nostre", "nostra", "aquest",
        "aquesta", "aquell", "aquella", "això", "allò", "que", "qui"}},
      {"nl",
       "nl.v1",
       {"ik", "mij", "me", "mijn", "jij", "je", "jou", "jouw", "u", "uw", "hij", "hem", "zijn", "zij",
        "ze", "haar", "het", "wij", "we", "ons", "onze", "jullie", "hen", "hun", "zich", "zichzelf",
        "dit", "dat", "deze", "die", "wie", "wat"}},
      {"it",
       "it.v1",
       {"io", "me", "mi", "tu", "te", "ti", "lui", "lei", "egli", "ella", "esso", "essa", "noi", "ci",
        "voi", "vi", "loro", "essi", "esse", "lo", "la", "li", "le", "gli", "ne", "si", "sé", "suo",
        "sua", "suoi", "sue", "mio", "mia", "tuo", "tua", "nostro", "nostra", "questo", "questa",
        "quello", "quella", "che", "cui", "chi"}},
      {"es",
       "es.v1",
       {"yo", "me", "mí", "tú", "te", "ti", "él", "ella", "ello", "usted", "nosotros", "nosotras", "nos",
        "vosotros", "vosotras", "os", "ellos", "ellas", "ustedes", "lo", "la", "los", "las", "le", "les",
        "se", "sí", "su", "sus", "mi", "mis", "tu", "tus", "suyo", "suya", "nuestro", "nuestra", "este",
        "esta", "ese", "esa", "aquel", "aquella", "esto", "eso", "aquello", "que", "quien"}},
  };
  return lists;
}

inline const PronounList* pronoun_list_for(std::string_view language) {
  const auto lang = text::to_lower(language);
  for (const auto& l : pronoun_lists()) {
    if (l.language == lang) return &l;
  }
  return nullptr;
}

}  // namespace promptcoref

#endif  // PROMPTCOREF_PRONOUNS_HPP
