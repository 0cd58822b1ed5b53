#pragma once

// Embedding-based similarity: greedy maximum-cosine matching (BERTScore and,
// fed with scientific-domain vectors, SciBERTScore) and MoverScore computed
// from an exact Word Mover's Distance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "titleeval/error.hpp"
#include "titleeval/lexical.hpp"
#include "titleeval/record.hpp"
#include "titleeval/textprep.hpp"
#include "titleeval/transport.hpp"

namespace titleeval {

namespace embedding_detail {

inline std::vector<double> row_norms(const EmbeddingMatrix& m, const char* side) {
  std::vector<double> norms(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (float x : m.row(i)) s += static_cast<double>(x) * static_cast<double>(x);
    norms[i] = std::sqrt(s);
    if (norms[i] == 0.0) {
      std::ostringstream os;
      os << "cosine: " << side << " row " << i << " is a zero vector";
      throw Error(os.str());
    }
  }
  return norms;
}

}  // namespace embedding_detail

inline Matrix cosine_matrix(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  if (a.dim != b.dim) {
    std::ostringstream os;
    os << "cosine: dimension mismatch (" << a.dim << " vs " << b.dim << ")";
    throw Error(os.str());
  }
  auto na = embedding_detail::row_norms(a, "first");
  auto nb = embedding_detail::row_norms(b, "second");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ai = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto bj = b.row(j);
      double dot = 0.0;
      for (std::size_t k = 0; k < a.dim; ++k) dot += static_cast<double>(ai[k]) * static_cast<double>(bj[k]);
      out(i, j) = std::clamp(dot / (na[i] * nb[j]), -1.0, 1.0);
    }
  }
  return out;
}

// Precision: mean over hypothesis tokens of the best cosine against the
// reference; recall the other way round. No IDF weighting, no rescaling.
inline PrfScore greedy_match_score(const EmbeddingMatrix& hyp, const EmbeddingMatrix& ref) {
  if (hyp.rows() == 0 || ref.rows() == 0) throw Error("greedy match: empty embedding matrix");
  Matrix sim = cosine_matrix(hyp, ref);
  double p = 0.0, r = 0.0;
  for (std::size_t i = 0; i < sim.rows; ++i) {
    double best = -1.0;
    for (std::size_t j = 0; j < sim.cols; ++j) best = std::max(best, sim(i, j));
    p += best;
  }
  for (std::size_t j = 0; j < sim.cols; ++j) {
    double best = -1.0;
    for (std::size_t i = 0; i < sim.rows; ++i) best = std::max(best, sim(i, j));
    r += best;
  }
  return make_prf(p / static_cast<double>(sim.rows), r / static_cast<double>(sim.cols));
}

struct IdfTable {
  std::unordered_map<std::string, double> weights;
  double default_weight = 0.0;

  double weight(const std::string& token) const {
    auto it = weights.find(token);
    return it == weights.end() ? default_weight : it->second;
  }
};

// idf(w) = log(1 + N / (1 + df(w))); unseen tokens get log(1 + N).
inline IdfTable build_idf(std::span<const TokenizedText> texts) {
  if (texts.empty()) throw Error("idf: corpus is empty");
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& t : texts) {
    std::set<std::string> distinct(t.tokens.begin(), t.tokens.end());
    for (const auto& w : distinct) ++df[w];
  }
  const auto n = static_cast<double>(texts.size());
  IdfTable table;
  table.default_weight = std::log(1.0 + n);
  for (const auto& [w, count] : df) table.weights[w] = std::log(1.0 + n / (1.0 + static_cast<double>(count)));
  return table;
}

inline constexpr double kWeightSumTolerance = 1e-9;

// Word Mover's Distance with ground cost 1 - cos, solved exactly.
inline TransportPlan wmd(const EmbeddingMatrix& hyp, std::span<const double> hyp_weights,
                         const EmbeddingMatrix& ref, std::span<const double> ref_weights) {
  auto check = [](std::span<const double> w, std::size_t rows, const char* side) {
    if (w.size() != rows) throw Error(std::string("wmd: ") + side + " weight count does not match rows");
    for (double x : w)
      if (!(x >= 0.0)) throw Error(std::string("wmd: ") + side + " weights must be non-negative");
    double s = std::accumulate(w.begin(), w.end(), 0.0);
    if (std::abs(s - 1.0) > kWeightSumTolerance) {
      std::ostringstream os;
      os << "wmd: " << side << " weights sum to " << s << ", not 1";
      throw Error(os.str());
    }
  };
  check(hyp_weights, hyp.rows(), "hypothesis");
  check(ref_weights, ref.rows(), "reference");
  Matrix cost = cosine_matrix(hyp, ref);
  for (double& c : cost.data) c = 1.0 - c;
  return solve_transport(hyp_weights, ref_weights, cost);
}

struct MoverOptions {
  std::string model = "bert";
  bool uniform_weights = false;
};

inline std::vector<double> mover_weights(const TokenizedText& tokens, const IdfTable& idf, bool uniform) {
  std::vector<double> w(tokens.size(), 1.0);
  if (!uniform)
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = idf.weight(tokens.tokens[i]);
  double s = std::accumulate(w.begin(), w.end(), 0.0);
  if (s <= 0.0) throw Error("moverscore: token weights sum to zero");
  for (double& x : w) x /= s;
  return w;
}

// 1 - WMD cost, clamped to [0, 1].
inline double mover_score(const AnnotatedField& hyp, const AnnotatedField& ref, const IdfTable& idf,
                          const MoverOptions& opts = {}) {
  auto require = [&](const AnnotatedField& f, const char* name) -> const EmbeddingMatrix& {
    const EmbeddingMatrix* m = f.find_embeddings(opts.model);
    if (m == nullptr)
      throw Error(std::string("moverscore: ") + name + " has no embeddings for model '" + opts.model + "'");
    if (!f.tokens || f.tokens->size() != m->rows())
      throw Error(std::string("moverscore: ") + name + " embedding rows do not match its tokens");
    if (m->rows() == 0) throw Error(std::string("moverscore: ") + name + " is empty");
    return *m;
  };
  const EmbeddingMatrix& h = require(hyp, "hypothesis");
  const EmbeddingMatrix& r = require(ref, "reference");
  auto hw = mover_weights(*hyp.tokens, idf, opts.uniform_weights);
  auto rw = mover_weights(*ref.tokens, idf, opts.uniform_weights);
  TransportPlan plan = wmd(h, hw, r, rw);
  return std::clamp(1.0 - plan.cost, 0.0, 1.0);
}

}  // namespace titleeval
