#pragma once

// Tokenization, whitespace normalization, n-gram counting and truncation.
// Everything here is pure and works on UTF-8 byte strings.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "titleeval/error.hpp"
#include "titleeval/porter.hpp"

namespace titleeval {

// Lowercased tokens plus byte spans [start, end) into the text they came
// from. `offsets` is empty when tokens were supplied already tokenized and
// the surface positions are unknown; otherwise it has one span per token.
struct TokenizedText {
  std::vector<std::string> tokens;
  std::vector<std::pair<std::size_t, std::size_t>> offsets;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool has_offsets() const { return !tokens.empty() && offsets.size() == tokens.size(); }

  bool operator==(const TokenizedText&) const = default;
};

namespace utf8 {

struct Decoded {
  char32_t cp;
  std::size_t len;
};

// Malformed sequences decode as U+FFFD, consuming one byte.
inline Decoded decode(std::string_view s, std::size_t i) {
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  unsigned char c = byte(i);
  if (c < 0x80) return {c, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((c & 0xE0) == 0xC0) {
    len = 2;
    cp = c & 0x1F;
  } else if ((c & 0xF0) == 0xE0) {
    len = 3;
    cp = c & 0x0F;
  } else if ((c & 0xF8) == 0xF0) {
    len = 4;
    cp = c & 0x07;
  } else {
    return {0xFFFD, 1};
  }
  if (i + len > s.size()) return {0xFFFD, 1};
  for (std::size_t k = 1; k < len; ++k) {
    unsigned char cc = byte(i + k);
    if ((cc & 0xC0) != 0x80) return {0xFFFD, 1};
    cp = (cp << 6) | (cc & 0x3F);
  }
  return {cp, len};
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

}  // namespace utf8

inline bool is_space(char32_t cp) {
  switch (cp) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\v':
    case U'\f':
    case U'\r':
    case 0x85:
    case 0xA0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
    case 0xFEFF:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200B;
  }
}

inline bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0xA1:
    case 0xA7:
    case 0xAB:
    case 0xB6:
    case 0xB7:
    case 0xBB:
    case 0xBF:
      return true;
    default:
      break;
  }
  return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E) ||
         (cp >= 0x3001 && cp <= 0x3003) || (cp >= 0x3008 && cp <= 0x3011) ||
         (cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20);
}

// Simple one-to-one case folding for Latin, Greek and Cyrillic.
inline char32_t to_lower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 32;
  if (cp >= 0x100 && cp <= 0x17F) {
    if (cp == 0x130) return U'i';
    if (cp == 0x178) return 0xFF;
    if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp == 0x138 || cp == 0x149 || cp == 0x17F) return cp;
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

inline std::string lowercase(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    auto d = utf8::decode(s, i);
    if (d.cp == 0xFFFD) {
      out.append(s.substr(i, d.len));
    } else {
      utf8::append(out, to_lower(d.cp));
    }
    i += d.len;
  }
  return out;
}

inline bool is_punct_token(std::string_view token) {
  if (token.empty()) return false;
  for (std::size_t i = 0; i < token.size();) {
    auto d = utf8::decode(token, i);
    if (!is_punct(d.cp)) return false;
    i += d.len;
  }
  return true;
}

inline std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < text.size();) {
    auto d = utf8::decode(text, i);
    if (is_space(d.cp)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out.append(text.substr(i, d.len));
    }
    i += d.len;
  }
  return out;
}

// Whitespace split; leading and trailing punctuation characters become
// one-character tokens of their own, inner punctuation (hyphens, decimal
// points) stays inside the word.
inline TokenizedText tokenize(std::string_view text) {
  TokenizedText out;
  auto emit = [&](std::size_t b, std::size_t e) {
    out.tokens.push_back(lowercase(text.substr(b, e - b)));
    out.offsets.emplace_back(b, e);
  };

  std::size_t i = 0;
  while (i < text.size()) {
    auto d = utf8::decode(text, i);
    if (is_space(d.cp)) {
      i += d.len;
      continue;
    }
    // Collect one whitespace-delimited chunk as code point boundaries.
    std::vector<std::size_t> starts;
    std::vector<bool> punct;
    std::size_t j = i;
    while (j < text.size()) {
      auto dj = utf8::decode(text, j);
      if (is_space(dj.cp)) break;
      starts.push_back(j);
      punct.push_back(is_punct(dj.cp));
      j += dj.len;
    }
    const std::size_t n = starts.size();
    auto end_of = [&](std::size_t k) { return k + 1 < n ? starts[k + 1] : j; };

    std::size_t first = 0;
    while (first < n && punct[first]) ++first;
    std::size_t last = n;
    while (last > first && punct[last - 1]) --last;

    for (std::size_t k = 0; k < first; ++k) emit(starts[k], end_of(k));
    if (first < last) emit(starts[first], end_of(last - 1));
    for (std::size_t k = std::max(last, first); k < n; ++k) emit(starts[k], end_of(k));
    i = j;
  }
  return out;
}

inline TokenizedText truncate(const TokenizedText& text, std::size_t max_tokens) {
  if (max_tokens == 0) throw Error("truncate: max_tokens must be at least 1");
  if (text.size() <= max_tokens) return text;
  TokenizedText out;
  out.tokens.assign(text.tokens.begin(), text.tokens.begin() + static_cast<std::ptrdiff_t>(max_tokens));
  if (text.has_offsets())
    out.offsets.assign(text.offsets.begin(), text.offsets.begin() + static_cast<std::ptrdiff_t>(max_tokens));
  return out;
}

inline std::vector<std::string> stem_all(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(stem(t));
  return out;
}

using NGram = std::vector<std::string>;

struct NGramMultiset {
  std::size_t n = 1;
  std::map<NGram, std::size_t> counts;

  std::size_t total() const {
    std::size_t s = 0;
    for (const auto& [_, c] : counts) s += c;
    return s;
  }
};

inline NGramMultiset ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  if (n == 0) throw Error("ngram_counts: order must be at least 1");
  NGramMultiset out;
  out.n = n;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++out.counts[NGram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                       tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return out;
}

inline NGramMultiset ngram_counts(const TokenizedText& text, std::size_t n) {
  return ngram_counts(text.tokens, n);
}

}  // namespace titleeval
