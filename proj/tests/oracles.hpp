#pragma once

// Brute-force reference implementations used only by tests. None of these
// call into the library code paths they are compared against.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

inline bool is_subsequence(const Tokens& sub, const Tokens& of) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < of.size() && k < sub.size(); ++i)
    if (of[i] == sub[k]) ++k;
  return k == sub.size();
}

// Longest common subsequence by enumerating every subsequence of `a`.
inline std::size_t lcs(const Tokens& a, const Tokens& b) {
  std::size_t best = 0;
  for (unsigned mask = 0; mask < (1u << a.size()); ++mask) {
    Tokens sub;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (mask & (1u << i)) sub.push_back(a[i]);
    if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
  }
  return best;
}

inline std::size_t chunks_of(const std::vector<int>& ref_of) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < ref_of.size(); ++i) {
    if (ref_of[i] < 0) continue;
    if (i == 0 || ref_of[i - 1] < 0 || ref_of[i - 1] + 1 != ref_of[i]) ++c;
  }
  return c;
}

// One matching stage by exhaustive enumeration: among all one-to-one
// assignments of free hypothesis positions to free reference positions with
// equal keys that reach the maximum match count, the first (in
// leftmost-reference-then-unmatched order) with the fewest chunks.
inline std::vector<int> stage_bruteforce(const Tokens& hk, const Tokens& rk, const std::vector<int>& fixed,
                                         std::vector<bool> ref_used) {
  std::vector<int> cur = fixed, best;
  std::size_t best_matches = 0, best_chunks = std::numeric_limits<std::size_t>::max();
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == hk.size()) {
      std::size_t m = 0;
      for (int r : cur) m += r >= 0;
      std::size_t c = chunks_of(cur);
      if (m > best_matches || (m == best_matches && c < best_chunks)) {
        best_matches = m;
        best_chunks = c;
        best = cur;
      }
      return;
    }
    if (fixed[i] >= 0) {
      rec(i + 1);
      return;
    }
    for (std::size_t j = 0; j < rk.size(); ++j) {
      if (ref_used[j] || rk[j] != hk[i]) continue;
      ref_used[j] = true;
      cur[i] = static_cast<int>(j);
      rec(i + 1);
      cur[i] = -1;
      ref_used[j] = false;
    }
    rec(i + 1);
  };
  rec(0);
  return best;
}

// Exact stage then stem stage; stems are supplied by the caller.
inline std::pair<std::size_t, std::size_t> meteor_alignment(const Tokens& hyp, const Tokens& ref,
                                                            const Tokens& hyp_stems, const Tokens& ref_stems) {
  std::vector<int> fixed(hyp.size(), -1);
  std::vector<bool> used(ref.size(), false);
  fixed = stage_bruteforce(hyp, ref, fixed, used);
  for (int r : fixed)
    if (r >= 0) used[static_cast<std::size_t>(r)] = true;
  fixed = stage_bruteforce(hyp_stems, ref_stems, fixed, used);
  std::size_t m = 0;
  for (int r : fixed) m += r >= 0;
  return {m, chunks_of(fixed)};
}

// Minimum transport cost over every plan whose flows are multiples of
// 1/units, for supports up to 3x3. Supplies/demands are integer unit counts.
inline double grid_transport_min(const std::vector<int>& supply, const std::vector<int>& demand,
                                 const std::vector<std::vector<double>>& cost, int units,
                                 std::size_t* plans_seen = nullptr) {
  const std::size_t m = supply.size(), n = demand.size();
  std::vector<std::vector<int>> f(m, std::vector<int>(n, 0));
  std::vector<int> col_left = demand;
  double best = std::numeric_limits<double>::infinity();
  std::size_t seen = 0;
  std::function<void(std::size_t, std::size_t, int)> rec = [&](std::size_t i, std::size_t j, int row_left) {
    if (i == m) {
      for (int c : col_left)
        if (c != 0) return;
      double total = 0.0;
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < n; ++b) total += cost[a][b] * (static_cast<double>(f[a][b]) / units);
      ++seen;
      best = std::min(best, total);
      return;
    }
    if (j == n - 1) {
      // Last column takes whatever remains of the row.
      if (row_left > col_left[j]) return;
      f[i][j] = row_left;
      col_left[j] -= row_left;
      rec(i + 1, 0, i + 1 < m ? supply[i + 1] : 0);
      col_left[j] += row_left;
      f[i][j] = 0;
      return;
    }
    for (int x = 0; x <= std::min(row_left, col_left[j]); ++x) {
      f[i][j] = x;
      col_left[j] -= x;
      rec(i, j + 1, row_left - x);
      col_left[j] += x;
    }
    f[i][j] = 0;
  };
  rec(0, 0, supply[0]);
  if (plans_seen) *plans_seen = seen;
  return best;
}

// Entity scores computed literally from the definitions with plain lists.
struct Mention {
  std::vector<std::string> words;
};

struct Scores {
  std::optional<double> v[8];  // prec_s_nu, prec_s_u, prec_t_nu, recall_t_nu, f1_t_nu, prec_t_u, recall_t_u, f1_t_u
};

inline bool contains(const std::vector<std::string>& xs, const std::string& w) {
  for (const auto& x : xs)
    if (x == w) return true;
  return false;
}

inline bool hits(const Mention& e, const std::vector<std::string>& words) {
  for (const auto& w : e.words)
    if (contains(words, w)) return true;
  return false;
}

inline std::vector<Mention> dedupe(const std::vector<Mention>& xs) {
  std::vector<Mention> out;
  for (const auto& x : xs) {
    bool dup = false;
    for (const auto& y : out)
      if (y.words == x.words) dup = true;
    if (!dup) out.push_back(x);
  }
  return out;
}

inline std::vector<std::string> all_words(const std::vector<Mention>& xs) {
  std::vector<std::string> out;
  for (const auto& x : xs)
    for (const auto& w : x.words) out.push_back(w);
  return out;
}

inline std::optional<double> frac(const std::vector<Mention>& x, const std::vector<std::string>& y) {
  if (x.empty()) return std::nullopt;
  double hit = 0;
  for (const auto& e : x)
    if (hits(e, y)) hit += 1;
  return hit / static_cast<double>(x.size());
}

inline std::optional<double> f1(std::optional<double> p, std::optional<double> r) {
  if (!p || !r) return std::nullopt;
  if (*p + *r == 0) return 0.0;
  return 2 * *p * *r / (*p + *r);
}

inline Scores entity_scores(const std::vector<Mention>& h, const std::vector<Mention>& t,
                            const std::vector<std::string>& source_words) {
  Scores s;
  s.v[0] = frac(h, source_words);
  s.v[2] = frac(h, all_words(t));
  s.v[3] = frac(t, all_words(h));
  s.v[4] = f1(s.v[2], s.v[3]);
  auto hu = dedupe(h), tu = dedupe(t);
  s.v[1] = frac(hu, source_words);
  s.v[5] = frac(hu, all_words(tu));
  s.v[6] = frac(tu, all_words(hu));
  s.v[7] = f1(s.v[5], s.v[6]);
  return s;
}

inline Tokens random_tokens(std::mt19937_64& rng, std::size_t max_len, int vocab, std::size_t min_len = 0) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<int> word(0, vocab - 1);
  Tokens out(len(rng));
  for (auto& t : out) t = "w" + std::to_string(word(rng));
  return out;
}

// Random instance: mentions drawn from a small vocabulary so that
// duplicates and partial overlaps are common.
struct EntityInstance {
  std::vector<Mention> h, t;
  std::vector<std::string> source;
};

inline EntityInstance random_entity_instance(std::mt19937_64& rng, bool allow_duplicates) {
  std::uniform_int_distribution<int> count(0, 5), len(1, 4), word(0, 7), coin(0, 2);
  auto mentions = [&] {
    std::vector<Mention> out;
    int n = count(rng);
    for (int k = 0; k < n; ++k) {
      if (allow_duplicates && !out.empty() && coin(rng) == 0) {
        out.push_back(out[std::uniform_int_distribution<std::size_t>(0, out.size() - 1)(rng)]);
        continue;
      }
      Mention m;
      int l = len(rng);
      for (int w = 0; w < l; ++w) m.words.push_back("w" + std::to_string(word(rng)));
      if (!allow_duplicates) {
        bool dup = false;
        for (const auto& o : out) dup = dup || o.words == m.words;
        if (dup) continue;
      }
      out.push_back(m);
    }
    return out;
  };
  EntityInstance inst{mentions(), mentions(), {}};
  inst.source = random_tokens(rng, 10, 8);
  return inst;
}

}  // namespace oracle
