#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "titleeval/porter.hpp"
#include "titleeval/textprep.hpp"

namespace titleeval {

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline double harmonic_mean(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

inline PrfScore make_prf(double precision, double recall) {
  return {precision, recall, harmonic_mean(precision, recall)};
}

inline std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

struct RougeOptions {
  bool stem = true;
};

namespace lexical_detail {

inline std::vector<std::string> rouge_tokens(const TokenizedText& t, const RougeOptions& opts) {
  return opts.stem ? stem_all(t.tokens) : t.tokens;
}

}  // namespace lexical_detail

inline PrfScore rouge_n(const TokenizedText& hyp, const TokenizedText& ref, std::size_t n,
                        const RougeOptions& opts = {}) {
  auto h = ngram_counts(lexical_detail::rouge_tokens(hyp, opts), n);
  auto r = ngram_counts(lexical_detail::rouge_tokens(ref, opts), n);
  const std::size_t h_total = h.total(), r_total = r.total();
  if (h_total == 0 || r_total == 0) return {};
  std::size_t overlap = 0;
  for (const auto& [gram, count] : h.counts) {
    auto it = r.counts.find(gram);
    if (it != r.counts.end()) overlap += std::min(count, it->second);
  }
  return make_prf(static_cast<double>(overlap) / static_cast<double>(h_total),
                  static_cast<double>(overlap) / static_cast<double>(r_total));
}

inline PrfScore rouge_l(const TokenizedText& hyp, const TokenizedText& ref, const RougeOptions& opts = {}) {
  if (hyp.empty() || ref.empty()) return {};
  auto h = lexical_detail::rouge_tokens(hyp, opts);
  auto r = lexical_detail::rouge_tokens(ref, opts);
  const auto lcs = static_cast<double>(lcs_length(h, r));
  return make_prf(lcs / static_cast<double>(h.size()), lcs / static_cast<double>(r.size()));
}

// ---------------------------------------------------------------------------
// METEOR

enum class MatchStage { Exact, Stem };

struct MeteorAlignment {
  // ref_of[i] is the reference position aligned to hypothesis token i, or -1.
  std::vector<int> ref_of;
  std::vector<MatchStage> stage_of;
  std::size_t matches = 0;
  std::size_t chunks = 0;
  bool exact = true;  // false if a stage fell back to beam search
};

// Number of chunks: maximal runs where consecutive hypothesis positions map
// to consecutive reference positions.
inline std::size_t count_chunks(const std::vector<int>& ref_of) {
  std::size_t chunks = 0;
  for (std::size_t i = 0; i < ref_of.size(); ++i) {
    if (ref_of[i] < 0) continue;
    bool continues = i > 0 && ref_of[i - 1] >= 0 && ref_of[i - 1] + 1 == ref_of[i];
    if (!continues) ++chunks;
  }
  return chunks;
}

namespace lexical_detail {

// Exact search for one matching stage. Every hypothesis position either
// keeps its earlier-stage assignment, takes an unused reference position
// with the same key, or stays unmatched. The number of matches is fixed at
// its maximum (per key: min of the free counts on each side) and, among
// those alignments, the chunk count of the whole alignment is minimized.
// Options are explored in the order (leftmost reference, ..., unmatched),
// and the first optimum wins, so ties go to the lexicographically earliest
// assignment in hypothesis order.
class StageAligner {
 public:
  StageAligner(const std::vector<std::string>& hyp_keys, const std::vector<std::string>& ref_keys,
               std::vector<int> fixed, std::vector<bool> ref_used)
      : fixed_(std::move(fixed)), n_hyp_(hyp_keys.size()) {
    // Keys shared by free positions on both sides, as dense ids.
    std::map<std::string, int> key_id;
    std::vector<std::size_t> hyp_free_count, ref_free_count;
    auto id_of = [&](const std::string& k) {
      auto [it, inserted] = key_id.emplace(k, static_cast<int>(key_id.size()));
      if (inserted) {
        hyp_free_count.push_back(0);
        ref_free_count.push_back(0);
        ref_positions_.emplace_back();
      }
      return it->second;
    };
    hyp_key_.assign(n_hyp_, -1);
    for (std::size_t i = 0; i < n_hyp_; ++i) {
      if (fixed_[i] >= 0) continue;
      hyp_key_[i] = id_of(hyp_keys[i]);
      ++hyp_free_count[static_cast<std::size_t>(hyp_key_[i])];
    }
    for (std::size_t j = 0; j < ref_keys.size(); ++j) {
      if (ref_used[j]) continue;
      auto it = key_id.find(ref_keys[j]);
      if (it == key_id.end()) continue;
      ++ref_free_count[static_cast<std::size_t>(it->second)];
      ref_slot_.emplace(static_cast<int>(j), slot_count_++);
      ref_positions_[static_cast<std::size_t>(it->second)].push_back(static_cast<int>(j));
    }
    // How many hypothesis positions of each key may stay unmatched.
    skips_allowed_.resize(key_id.size());
    for (std::size_t k = 0; k < key_id.size(); ++k)
      skips_allowed_[k] = hyp_free_count[k] - std::min(hyp_free_count[k], ref_free_count[k]);
  }

  // Past this many memoized states (heavily repeated words), switch to a
  // beam search. It still yields the maximum number of matches; only the
  // chunk count may be above the optimum.
  static constexpr std::size_t kStateBudget = 200000;
  static constexpr std::size_t kBeamWidth = 256;

  std::vector<int> solve() {
    State s = initial_state();
    std::vector<int> assignment = fixed_;
    try {
      walk(0, -1, s, assignment);
    } catch (const BudgetExceeded&) {
      memo_.clear();
      return beam();
    }
    return assignment;
  }

  bool used_beam() const { return used_beam_; }

 private:
  struct State {
    std::vector<std::uint64_t> used;
    std::vector<std::size_t> skips;
  };

  struct Choice {
    std::size_t cost;
    int ref;  // -1: unmatched
  };

  struct BudgetExceeded {};

  struct Partial {
    State s;
    int prev_ref = -1;
    std::size_t chunks = 0;
    std::vector<int> assignment;
  };

  State initial_state() const {
    State s;
    s.used.assign((slot_count_ + 63) / 64, 0);
    s.skips.assign(skips_allowed_.size(), 0);
    return s;
  }

  std::vector<int> beam() {
    used_beam_ = true;
    std::vector<Partial> frontier{Partial{initial_state(), -1, 0, fixed_}};
    for (std::size_t i = 0; i < n_hyp_; ++i) {
      std::vector<Partial> next;
      for (auto& p : frontier) {
        if (fixed_[i] >= 0 || hyp_key_[i] < 0) {
          p.chunks += chunk_step(p.prev_ref, fixed_[i]);
          p.prev_ref = fixed_[i];
          next.push_back(std::move(p));
          continue;
        }
        const auto key_idx = static_cast<std::size_t>(hyp_key_[i]);
        for (int r : ref_positions_[key_idx]) {
          if (slot_used(p.s, r)) continue;
          Partial q = p;
          toggle_slot(q.s, r);
          q.chunks += chunk_step(p.prev_ref, r);
          q.prev_ref = r;
          q.assignment[i] = r;
          next.push_back(std::move(q));
        }
        if (p.s.skips[key_idx] < skips_allowed_[key_idx]) {
          Partial q = std::move(p);
          ++q.s.skips[key_idx];
          q.prev_ref = -1;
          next.push_back(std::move(q));
        }
      }
      // Stable: equal chunk counts keep expansion order.
      std::stable_sort(next.begin(), next.end(),
                       [](const Partial& a, const Partial& b) { return a.chunks < b.chunks; });
      std::vector<Partial> kept;
      std::unordered_map<std::string, bool> seen;
      for (auto& p : next) {
        if (kept.size() == kBeamWidth) break;
        if (!seen.emplace(key(i + 1, p.prev_ref, p.s), true).second) continue;
        kept.push_back(std::move(p));
      }
      frontier = std::move(kept);
    }
    return frontier.front().assignment;
  }

  std::vector<int> fixed_;
  std::size_t n_hyp_;
  std::vector<int> hyp_key_;
  std::vector<std::vector<int>> ref_positions_;
  std::map<int, std::size_t> ref_slot_;
  std::size_t slot_count_ = 0;
  std::vector<std::size_t> skips_allowed_;
  std::unordered_map<std::string, Choice> memo_;
  bool used_beam_ = false;

  static constexpr std::size_t kInfeasible = std::numeric_limits<std::size_t>::max();

  static std::size_t chunk_step(int prev_ref, int ref) {
    if (ref < 0) return 0;
    return (prev_ref >= 0 && prev_ref + 1 == ref) ? 0 : 1;
  }

  bool slot_used(const State& s, int ref) const {
    std::size_t k = ref_slot_.at(ref);
    return (s.used[k / 64] >> (k % 64)) & 1u;
  }
  void toggle_slot(State& s, int ref) const {
    std::size_t k = ref_slot_.at(ref);
    s.used[k / 64] ^= (std::uint64_t{1} << (k % 64));
  }

  std::string key(std::size_t i, int prev_ref, const State& s) const {
    std::string k;
    k.append(reinterpret_cast<const char*>(&i), sizeof i);
    k.append(reinterpret_cast<const char*>(&prev_ref), sizeof prev_ref);
    k.append(reinterpret_cast<const char*>(s.used.data()), s.used.size() * sizeof(std::uint64_t));
    k.append(reinterpret_cast<const char*>(s.skips.data()), s.skips.size() * sizeof(std::size_t));
    return k;
  }

  // Minimal chunks contributed by positions i.. given the previous ref.
  std::size_t best(std::size_t i, int prev_ref, State& s) {
    if (i == n_hyp_) return 0;
    if (fixed_[i] >= 0 || hyp_key_[i] < 0) {
      int r = fixed_[i];
      return chunk_step(prev_ref, r) + best(i + 1, r, s);
    }
    std::string k = key(i, prev_ref, s);
    if (auto it = memo_.find(k); it != memo_.end()) return it->second.cost;

    const auto key_idx = static_cast<std::size_t>(hyp_key_[i]);
    Choice pick{kInfeasible, -1};
    for (int r : ref_positions_[key_idx]) {
      if (slot_used(s, r)) continue;
      toggle_slot(s, r);
      std::size_t rest = best(i + 1, r, s);
      toggle_slot(s, r);
      if (rest == kInfeasible) continue;
      std::size_t total = chunk_step(prev_ref, r) + rest;
      if (total < pick.cost) pick = {total, r};
    }
    if (s.skips[key_idx] < skips_allowed_[key_idx]) {
      ++s.skips[key_idx];
      std::size_t rest = best(i + 1, -1, s);
      --s.skips[key_idx];
      if (rest != kInfeasible && rest < pick.cost) pick = {rest, -1};
    }
    memo_.emplace(std::move(k), pick);
    if (memo_.size() > kStateBudget) throw BudgetExceeded{};
    return pick.cost;
  }

  void walk(std::size_t i, int prev_ref, State& s, std::vector<int>& out) {
    for (; i < n_hyp_; ++i) {
      if (fixed_[i] >= 0 || hyp_key_[i] < 0) {
        prev_ref = fixed_[i];
        continue;
      }
      best(i, prev_ref, s);
      const Choice& c = memo_.at(key(i, prev_ref, s));
      const auto key_idx = static_cast<std::size_t>(hyp_key_[i]);
      if (c.ref >= 0) {
        toggle_slot(s, c.ref);
      } else {
        ++s.skips[key_idx];
      }
      out[i] = c.ref;
      prev_ref = c.ref;
    }
  }
};

}  // namespace lexical_detail

// Staged one-to-one alignment: exact token matches first, then Porter-stem
// matches among the tokens left over.
inline MeteorAlignment meteor_align(const TokenizedText& hyp, const TokenizedText& ref) {
  const std::size_t n = hyp.size();
  MeteorAlignment a;
  a.ref_of.assign(n, -1);
  a.stage_of.assign(n, MatchStage::Exact);
  std::vector<bool> ref_used(ref.size(), false);

  auto run_stage = [&](const std::vector<std::string>& hk, const std::vector<std::string>& rk, MatchStage stage) {
    lexical_detail::StageAligner aligner(hk, rk, a.ref_of, ref_used);
    std::vector<int> result = aligner.solve();
    if (aligner.used_beam()) a.exact = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (a.ref_of[i] < 0 && result[i] >= 0) {
        a.ref_of[i] = result[i];
        a.stage_of[i] = stage;
        ref_used[static_cast<std::size_t>(result[i])] = true;
      }
    }
  };
  run_stage(hyp.tokens, ref.tokens, MatchStage::Exact);
  run_stage(stem_all(hyp.tokens), stem_all(ref.tokens), MatchStage::Stem);

  a.matches = static_cast<std::size_t>(std::count_if(a.ref_of.begin(), a.ref_of.end(), [](int r) { return r >= 0; }));
  a.chunks = count_chunks(a.ref_of);
  return a;
}

struct MeteorParams {
  double alpha = 0.9;   // F_mean = P*R / (alpha*P + (1-alpha)*R)
  double beta = 3.0;    // fragmentation exponent
  double gamma = 0.5;   // maximum penalty
};

inline double meteor_from_alignment(const MeteorAlignment& a, std::size_t hyp_len, std::size_t ref_len,
                                    const MeteorParams& params = {}) {
  if (a.matches == 0 || hyp_len == 0 || ref_len == 0) return 0.0;
  const auto m = static_cast<double>(a.matches);
  const double p = m / static_cast<double>(hyp_len);
  const double r = m / static_cast<double>(ref_len);
  // With alpha = 0.9 this is 10PR / (R + 9P).
  const double f_mean = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
  const double frag = static_cast<double>(a.chunks) / m;
  const double penalty = params.gamma * std::pow(frag, params.beta);
  return f_mean * (1.0 - penalty);
}

inline double meteor_score(const TokenizedText& hyp, const TokenizedText& ref, const MeteorParams& params = {}) {
  return meteor_from_alignment(meteor_align(hyp, ref), hyp.size(), ref.size(), params);
}

}  // namespace titleeval
