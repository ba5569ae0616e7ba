#ifndef PROMPTCOREF_SAMPLING_HPP
#define PROMPTCOREF_SAMPLING_HPP

// Stratified sampling over (length bin, mention-count bin): draw from a
// candidate pool a subset whose joint histogram matches a reference corpus.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "promptcoref/corpus.hpp"
#include "promptcoref/text.hpp"

namespace promptcoref {

struct DocProfile {
  std::string doc_id;
  std::size_t token_count = 0;
  std::size_t mention_count = 0;
};

struct StratumKey {
  std::size_t length_bin = 0;
  std::size_t mention_bin = 0;

  auto operator<=>(const StratumKey&) const = default;
};

inline StratumKey stratum_of(const DocProfile& d, std::size_t length_width, std::size_t mention_width) {
  if (length_width == 0 || mention_width == 0) throw std::invalid_argument("bin widths must be positive");
  return {d.token_count / length_width, d.mention_count / mention_width};
}

using StratumHistogram = std::map<StratumKey, std::size_t>;

inline StratumHistogram stratum_histogram(const std::vector<DocProfile>& docs, std::size_t length_width,
                                          std::size_t mention_width) {
  StratumHistogram h;
  for (const auto& d : docs) ++h[stratum_of(d, length_width, mention_width)];
  return h;
}

struct Shortfall {
  StratumKey stratum;
  std::size_t wanted = 0;
  std::size_t available = 0;
};

struct SampleResult {
  std::vector<std::string> ids;
  std::vector<Shortfall> shortfalls;
};

/// Strata are visited in ascending key order; inside a stratum candidates
/// keep their input order and a seeded partial Fisher-Yates shuffle picks
/// min(reference count, candidate count) of them. Indices are drawn as
/// mt19937_64 output modulo the range, so a seed gives the same sample on
/// every standard library.
inline SampleResult stratified_sample(const std::vector<DocProfile>& candidates,
                                      const std::vector<DocProfile>& reference, std::size_t length_width = 500,
                                      std::size_t mention_width = 50, std::uint64_t seed = 0) {
  if (candidates.empty()) throw std::invalid_argument("stratified_sample: empty candidate pool");
  const auto wanted = stratum_histogram(reference, length_width, mention_width);
  std::map<StratumKey, std::vector<std::string>> pool;
  std::set<std::string> seen;
  for (const auto& c : candidates) {
    if (!seen.insert(c.doc_id).second) continue;
    pool[stratum_of(c, length_width, mention_width)].push_back(c.doc_id);
  }

  std::mt19937_64 rng(seed);
  SampleResult out;
  for (const auto& [key, want] : wanted) {
    auto& ids = pool[key];
    const std::size_t take = std::min(want, ids.size());
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (ids.size() - i));
      std::swap(ids[i], ids[j]);
      out.ids.push_back(ids[i]);
    }
    if (take < want) out.shortfalls.push_back({key, want, ids.size()});
  }
  return out;
}

inline nlohmann::json to_json(const SampleResult& r) {
  nlohmann::json sf = nlohmann::json::array();
  for (const auto& s : r.shortfalls) {
    sf.push_back({{"length_bin", s.stratum.length_bin},
                  {"mention_bin", s.stratum.mention_bin},
                  {"wanted", s.wanted},
                  {"available", s.available}});
  }
  return {{"ids", r.ids}, {"shortfalls", sf}};
}

// ---------------------------------------------------------------------------
// Loading profiles

class ProfileFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CSV with header containing doc_id, token_count, mention_count (any order).
inline std::vector<DocProfile> load_profiles_csv(std::istream& in, const std::string& name = "<csv>") {
  std::string line;
  if (!std::getline(in, line)) return {};
  const auto header = text::split(text::trim(line), ',');
  long id_col = -1, tok_col = -1, men_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto h = text::to_lower(text::trim(header[i]));
    if (h == "doc_id") id_col = static_cast<long>(i);
    if (h == "token_count") tok_col = static_cast<long>(i);
    if (h == "mention_count") men_col = static_cast<long>(i);
  }
  if (id_col < 0 || tok_col < 0 || men_col < 0) {
    throw ProfileFormatError(name + ": header must name doc_id, token_count, mention_count");
  }
  std::vector<DocProfile> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(text::trim(line), ',');
    const auto need = static_cast<std::size_t>(std::max({id_col, tok_col, men_col}));
    if (cells.size() <= need) throw ProfileFormatError(name + ":" + std::to_string(lineno) + ": too few fields");
    try {
      out.push_back({std::string(text::trim(cells[static_cast<std::size_t>(id_col)])),
                     std::stoul(cells[static_cast<std::size_t>(tok_col)]),
                     std::stoul(cells[static_cast<std::size_t>(men_col)])});
    } catch (const std::logic_error&) {
      throw ProfileFormatError(name + ":" + std::to_string(lineno) + ": bad count");
    }
  }
  return out;
}

/// JSON array of {"doc_id", "token_count", "mention_count"} objects.
inline std::vector<DocProfile> load_profiles_json(const nlohmann::json& j, const std::string& name = "<json>") {
  if (!j.is_array()) throw ProfileFormatError(name + ": expected a JSON array");
  std::vector<DocProfile> out;
  for (const auto& e : j) {
    try {
      out.push_back({e.at("doc_id").get<std::string>(), e.at("token_count").get<std::size_t>(),
                     e.at("mention_count").get<std::size_t>()});
    } catch (const nlohmann::json::exception& ex) {
      throw ProfileFormatError(name + ": " + ex.what());
    }
  }
  return out;
}

inline std::vector<DocProfile> profiles_of(const std::vector<Document>& docs) {
  std::vector<DocProfile> out;
  for (const auto& d : docs) {
    out.push_back({d.key(), d.tokens.size(), d.gold_clusters ? d.gold_clusters->mention_count() : 0});
  }
  return out;
}

/// Dispatches on extension: .csv, .json, otherwise a CoNLL file (whose
/// annotations supply the mention counts).
inline std::vector<DocProfile> load_profiles(const std::string& path, Dialect dialect = Dialect::conll2012) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  auto ends_with = [&](std::string_view suf) { return path.size() >= suf.size() && path.ends_with(suf); };
  if (ends_with(".csv")) return load_profiles_csv(in, path);
  if (ends_with(".json")) {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& ex) {
      throw ProfileFormatError(path + ": " + ex.what());
    }
    return load_profiles_json(j, path);
  }
  return profiles_of(parse_conll(in, dialect));
}

}  // namespace promptcoref

#endif  // PROMPTCOREF_SAMPLING_HPP
