#ifndef PROMPTCOREF_TEXT_HPP
#define PROMPTCOREF_TEXT_HPP

// Small string helpers shared by the parsers, the prompt renderer and the
// fuzzy aligner. Everything here is byte-oriented UTF-8: only ASCII letters
// are case-folded, multi-byte sequences pass through untouched.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

namespace promptcoref::text {

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view kSpace = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(kSpace);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(kSpace);
  return s.substr(b, e - b + 1);
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    char x = a[i], y = b[i];
    if (x >= 'A' && x <= 'Z') x = static_cast<char>(x - 'A' + 'a');
    if (y >= 'A' && y <= 'Z') y = static_cast<char>(y - 'A' + 'a');
    if (x != y) return false;
  }
  return true;
}

inline bool starts_with_icase(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && iequals(s.substr(0, prefix.size()), prefix);
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::vector<std::string> split_lines(std::string_view s) {
  auto lines = split(s, '\n');
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
  }
  return lines;
}

template <typename Range>
std::string join(const Range& parts, std::string_view sep) {
  std::string out;
  bool first = true;
  for (const auto& p : parts) {
    if (!first) out.append(sep);
    out.append(p);
    first = false;
  }
  return out;
}

namespace detail {

struct QuoteSub {
  std::string_view from;
  char to;
};

// Typographic quote variants and PTB quote pairs, folded onto ASCII.
inline constexpr std::array<QuoteSub, 10> kQuoteSubs{{
    {"\xE2\x80\x9C", '"'},  // left double
    {"\xE2\x80\x9D", '"'},  // right double
    {"\xE2\x80\x9E", '"'},  // low double
    {"\xC2\xAB", '"'},       // guillemets
    {"\xC2\xBB", '"'},
    {"\xE2\x80\x98", '\''},  // left single
    {"\xE2\x80\x99", '\''},  // right single
    {"``", '"'},
    {"''", '"'},
    {"\xE2\x80\x93", '-'},  // en dash
}};

inline std::size_t match_quote(std::string_view s, std::size_t i, char& folded) {
  for (const auto& sub : kQuoteSubs) {
    if (s.substr(i, sub.from.size()) == sub.from) {
      folded = sub.to;
      return sub.from.size();
    }
  }
  return 0;
}

}  // namespace detail

/// Folds typographic quotes onto ASCII quotes. Models like to "prettify"
/// straight quotes and PTB-style `` '' pairs.
inline std::string fold_quotes(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    char folded = 0;
    if (const auto n = detail::match_quote(s, i, folded)) {
      out.push_back(folded);
      i += n;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

/// A comparison token and the byte range [begin, end) it came from.
struct ComparisonToken {
  std::string text;
  std::size_t begin;
  std::size_t end;
};

/// Comparison tokens: lowercased, quotes folded, split into runs of word
/// characters and single punctuation marks. "12-year" and "12 - year" both
/// become {"12", "-", "year"}; "Clinton's" and "Clinton 's" both become
/// {"clinton", "'", "s"}. Bytes >= 0x80 count as word characters.
inline std::vector<ComparisonToken> comparison_tokens_at(std::string_view s) {
  std::vector<ComparisonToken> out;
  std::string cur;
  std::size_t cur_begin = 0;
  auto flush = [&](std::size_t end) {
    if (!cur.empty()) out.push_back({std::move(cur), cur_begin, end});
    cur.clear();
  };
  std::size_t i = 0;
  while (i < s.size()) {
    char folded = 0;
    if (const auto n = detail::match_quote(s, i, folded)) {
      flush(i);
      out.push_back({std::string(1, folded), i, i + n});
      i += n;
      continue;
    }
    const char ch = s[i];
    const auto u = static_cast<unsigned char>(ch);
    if (std::isspace(u)) {
      flush(i);
    } else if (std::isalnum(u) || u >= 0x80 || ch == '_') {
      if (cur.empty()) cur_begin = i;
      cur.push_back(ch >= 'A' && ch <= 'Z' ? static_cast<char>(ch - 'A' + 'a') : ch);
    } else {
      flush(i);
      out.push_back({std::string(1, ch), i, i + 1});
    }
    ++i;
  }
  flush(s.size());
  return out;
}

inline std::vector<std::string> comparison_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : comparison_tokens_at(s)) out.push_back(std::move(t.text));
  return out;
}

inline std::string to_hex(const unsigned char* data, std::size_t n) {
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (std::size_t i = 0; i < n; ++i) os << std::setw(2) << static_cast<int>(data[i]);
  return os.str();
}

/// Lowercase hex SHA-256 of the given bytes.
inline std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr);
  return to_hex(md.data(), len);
}

}  // namespace promptcoref::text

#endif  // PROMPTCOREF_TEXT_HPP
