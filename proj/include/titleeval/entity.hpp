#pragma once

// Entity-level factual consistency of a hypothesis title h against the
// source abstract s and the target (author) title t.
//
//   prec_s   = N(h matched in s) / N(h)
//   prec_t   = N(h matched in t) / N(h)
//   recall_t = N(t matched in h) / N(t)
//   F1_t     = harmonic mean of prec_t and recall_t
//
// A mention matches when any one of its words occurs in the other side's
// word set. Against the source that set is every word of the abstract;
// between titles it is the union of the other title's entity words.
// NU mode counts mentions as a list, U mode first collapses mentions with
// the same word sequence. Ratios with a zero denominator are undefined.

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "titleeval/error.hpp"
#include "titleeval/lexical.hpp"
#include "titleeval/record.hpp"
#include "titleeval/textprep.hpp"

namespace titleeval {

using WordSet = std::unordered_set<std::string>;

struct EntityOptions {
  bool drop_stopwords = false;
};

inline bool is_stopword(std::string_view w) {
  static const std::unordered_set<std::string_view> kStopwords = {
      "a",     "an",   "and",  "are",  "as",   "at",    "be",    "by",   "for",  "from", "has",
      "in",    "into", "is",   "it",   "its",  "of",    "on",    "or",   "that", "the",  "their",
      "this",  "to",   "was",  "were", "with", "via",   "using", "we",   "our",  "can",  "do",
      "does",  "not",  "but",  "than", "then", "these", "those", "how",  "what", "when", "which",
      "who",   "why",  "will", "about"};
  return kStopwords.count(w) > 0;
}

inline std::vector<std::string> match_words(const EntityMention& e, const EntityOptions& opts) {
  if (!opts.drop_stopwords) return e.words;
  std::vector<std::string> out;
  for (const auto& w : e.words)
    if (!is_stopword(w)) out.push_back(w);
  return out;
}

inline bool entity_match(const EntityMention& e, const WordSet& target_words, const EntityOptions& opts = {}) {
  for (const auto& w : match_words(e, opts))
    if (target_words.count(w)) return true;
  return false;
}

// Words of a whole text field, punctuation tokens removed.
inline WordSet text_words(const TokenizedText& t) {
  WordSet out;
  for (const auto& tok : t.tokens)
    if (!is_punct_token(tok)) out.insert(tok);
  return out;
}

inline WordSet mention_words(const std::vector<EntityMention>& mentions, const EntityOptions& opts = {}) {
  WordSet out;
  for (const auto& m : mentions)
    for (auto& w : match_words(m, opts)) out.insert(std::move(w));
  return out;
}

inline std::vector<EntityMention> unique_mentions(const std::vector<EntityMention>& x) {
  std::vector<EntityMention> out;
  std::set<std::vector<std::string>> seen;
  for (const auto& m : x)
    if (seen.insert(m.words).second) out.push_back(m);
  return out;
}

inline std::size_t intersect_nonunique(const std::vector<EntityMention>& x, const WordSet& y_words,
                                       const EntityOptions& opts = {}) {
  return static_cast<std::size_t>(
      std::count_if(x.begin(), x.end(), [&](const EntityMention& e) { return entity_match(e, y_words, opts); }));
}

inline std::size_t intersect_unique(const std::vector<EntityMention>& x, const WordSet& y_words,
                                    const EntityOptions& opts = {}) {
  return intersect_nonunique(unique_mentions(x), y_words, opts);
}

struct EntityScores {
  static constexpr std::size_t kCount = 8;
  static constexpr std::array<const char*, kCount> kNames = {
      "prec_s^NU", "prec_s^U", "prec_t^NU", "recall_t^NU", "F1_t^NU", "prec_t^U", "recall_t^U", "F1_t^U"};

  std::optional<double> prec_s_nu, prec_s_u;
  std::optional<double> prec_t_nu, recall_t_nu, f1_t_nu;
  std::optional<double> prec_t_u, recall_t_u, f1_t_u;

  std::array<std::optional<double>, kCount> as_array() const {
    return {prec_s_nu, prec_s_u, prec_t_nu, recall_t_nu, f1_t_nu, prec_t_u, recall_t_u, f1_t_u};
  }

  bool operator==(const EntityScores&) const = default;
};

namespace entity_detail {

inline std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

inline std::optional<double> f1(std::optional<double> p, std::optional<double> r) {
  if (!p || !r) return std::nullopt;
  return harmonic_mean(*p, *r);
}

inline const std::vector<EntityMention>& require_entities(const AnnotatedField& f, const char* name) {
  if (!f.entities) throw Error(std::string("entity: ") + name + " has no entity annotation");
  return *f.entities;
}

}  // namespace entity_detail

inline EntityScores entity_scores(const AnnotatedField& hyp, const AnnotatedField& target,
                                  const AnnotatedField& source, const EntityOptions& opts = {}) {
  using entity_detail::f1;
  using entity_detail::ratio;
  const auto& h = entity_detail::require_entities(hyp, "hypothesis");
  const auto& t = entity_detail::require_entities(target, "reference_title");
  entity_detail::require_entities(source, "abstract");
  if (!source.tokens) throw Error("entity: abstract is not tokenized");

  const WordSet s_words = text_words(*source.tokens);
  const WordSet t_words = mention_words(t, opts);
  const WordSet h_words = mention_words(h, opts);

  EntityScores out;
  out.prec_s_nu = ratio(intersect_nonunique(h, s_words, opts), h.size());
  out.prec_t_nu = ratio(intersect_nonunique(h, t_words, opts), h.size());
  out.recall_t_nu = ratio(intersect_nonunique(t, h_words, opts), t.size());
  out.f1_t_nu = f1(out.prec_t_nu, out.recall_t_nu);

  const auto hu = unique_mentions(h);
  const auto tu = unique_mentions(t);
  out.prec_s_u = ratio(intersect_nonunique(hu, s_words, opts), hu.size());
  out.prec_t_u = ratio(intersect_nonunique(hu, t_words, opts), hu.size());
  out.recall_t_u = ratio(intersect_nonunique(tu, h_words, opts), tu.size());
  out.f1_t_u = f1(out.prec_t_u, out.recall_t_u);
  return out;
}

struct AggregatedEntityScores {
  // Macro-average x100 over records where the field is defined;
  // nullopt when no record defines it.
  std::array<std::optional<double>, EntityScores::kCount> means;
  std::array<std::size_t, EntityScores::kCount> skipped{};
};

// Mean of `values` summed in sorted order, so the result does not depend
// on the order the values arrive in.
inline double order_independent_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

inline AggregatedEntityScores aggregate_entity_scores(const std::vector<EntityScores>& per_record) {
  if (per_record.empty()) throw Error("entity aggregate: no records");
  AggregatedEntityScores out;
  for (std::size_t k = 0; k < EntityScores::kCount; ++k) {
    std::vector<double> defined;
    for (const auto& rec : per_record) {
      auto v = rec.as_array()[k];
      if (v) {
        defined.push_back(*v);
      } else {
        ++out.skipped[k];
      }
    }
    if (!defined.empty()) out.means[k] = 100.0 * order_independent_mean(std::move(defined));
  }
  return out;
}

// Fallback annotator for corpora without NER output: maximal runs of
// capitalized or acronym tokens in the raw text, stopwords excluded.
// Produces far noisier mentions than a trained tagger.
inline std::vector<EntityMention> heuristic_entities(const std::string& raw_text, const TokenizedText& tokens) {
  TokenizedText located = tokens;
  if (!located.has_offsets()) {
    TokenizedText own = tokenize(raw_text);
    if (own.tokens != tokens.tokens) return {};
    located = std::move(own);
  }
  auto capitalized = [&](std::size_t i) {
    if (is_stopword(located.tokens[i]) || is_punct_token(located.tokens[i])) return false;
    auto [b, e] = located.offsets[i];
    auto d = utf8::decode(raw_text, b);
    return to_lower(d.cp) != d.cp;
  };
  std::vector<EntityMention> out;
  std::size_t i = 0;
  while (i < located.size()) {
    if (!capitalized(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < located.size() && capitalized(j)) ++j;
    std::size_t b = located.offsets[i].first, e = located.offsets[j - 1].second;
    out.emplace_back(raw_text.substr(b, e - b), i, j);
    i = j;
  }
  return out;
}

}  // namespace titleeval
