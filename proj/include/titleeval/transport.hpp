#pragma once

// Exact solver for the balanced transportation problem
//
//   minimize  sum_ij flow(i,j) * cost(i,j)
//   s.t.      sum_j flow(i,j) = supply[i],  sum_i flow(i,j) = demand[j],  flow >= 0
//
// using the transportation simplex (MODI potentials over a spanning-tree
// basis). The returned row/column potentials are a dual certificate:
// u[i] + v[j] <= cost(i,j) for every cell and, at the optimum,
// sum supply*u + sum demand*v equals the primal cost.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <vector>

#include "titleeval/error.hpp"

namespace titleeval {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct TransportPlan {
  Matrix flow;
  double cost = 0.0;
  std::vector<double> row_potential;
  std::vector<double> col_potential;
  std::size_t pivots = 0;

  double dual_objective(std::span<const double> supply, std::span<const double> demand) const {
    double d = 0.0;
    for (std::size_t i = 0; i < supply.size(); ++i) d += supply[i] * row_potential[i];
    for (std::size_t j = 0; j < demand.size(); ++j) d += demand[j] * col_potential[j];
    return d;
  }

  // Largest violation of u[i] + v[j] <= cost(i,j); <= 0 means dual feasible.
  double max_dual_violation(const Matrix& cost) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cost.rows; ++i)
      for (std::size_t j = 0; j < cost.cols; ++j)
        worst = std::max(worst, row_potential[i] + col_potential[j] - cost(i, j));
    return worst;
  }
};

namespace transport_detail {

class Simplex {
 public:
  Simplex(std::span<const double> supply, std::span<const double> demand, const Matrix& cost)
      : m_(supply.size()), n_(demand.size()), cost_(cost), flow_(m_, n_), basic_(m_ * n_, false) {
    northwest_corner(supply, demand);
  }

  TransportPlan solve() {
    std::vector<double> u(m_), v(n_);
    std::size_t pivots = 0, degenerate_run = 0;
    const std::size_t bland_after = 2 * (m_ + n_);
    const std::size_t max_pivots = 50 * m_ * n_ + 1000;
    while (true) {
      potentials(u, v);
      const bool bland = degenerate_run > bland_after;
      std::size_t enter = npos;
      double most_negative = -kReducedCostTol;
      for (std::size_t c = 0; c < m_ * n_; ++c) {
        if (basic_[c]) continue;
        double rc = cost_.data[c] - u[c / n_] - v[c % n_];
        if (rc < most_negative) {
          enter = c;
          most_negative = rc;
          if (bland) break;
        }
      }
      if (enter == npos) break;
      if (++pivots > max_pivots) throw Error("transport: simplex failed to converge");
      double theta = pivot(enter);
      degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
    }

    TransportPlan plan;
    plan.flow = flow_;
    for (std::size_t c = 0; c < m_ * n_; ++c) plan.cost += flow_.data[c] * cost_.data[c];
    plan.row_potential = std::move(u);
    plan.col_potential = std::move(v);
    plan.pivots = pivots;
    return plan;
  }

 private:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  static constexpr double kReducedCostTol = 1e-13;

  std::size_t m_, n_;
  const Matrix& cost_;
  Matrix flow_;
  std::vector<bool> basic_;

  // Basis of exactly m + n - 1 cells forming a spanning tree.
  void northwest_corner(std::span<const double> supply, std::span<const double> demand) {
    std::vector<double> s(supply.begin(), supply.end()), d(demand.begin(), demand.end());
    std::size_t i = 0, j = 0;
    while (true) {
      double x = std::min(s[i], d[j]);
      flow_(i, j) = x;
      basic_[i * n_ + j] = true;
      s[i] -= x;
      d[j] -= x;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1) {
        ++j;
      } else if (j == n_ - 1) {
        ++i;
      } else if (s[i] <= d[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  // Solves u[i] + v[j] = cost(i,j) on the basis tree with u[0] = 0.
  void potentials(std::vector<double>& u, std::vector<double>& v) const {
    std::vector<bool> row_done(m_, false), col_done(n_, false);
    std::vector<std::size_t> stack;  // node ids: rows [0, m), cols [m, m+n)
    u[0] = 0.0;
    row_done[0] = true;
    stack.push_back(0);
    while (!stack.empty()) {
      std::size_t node = stack.back();
      stack.pop_back();
      if (node < m_) {
        for (std::size_t j = 0; j < n_; ++j) {
          if (!basic_[node * n_ + j] || col_done[j]) continue;
          v[j] = cost_(node, j) - u[node];
          col_done[j] = true;
          stack.push_back(m_ + j);
        }
      } else {
        std::size_t j = node - m_;
        for (std::size_t i = 0; i < m_; ++i) {
          if (!basic_[i * n_ + j] || row_done[i]) continue;
          u[i] = cost_(i, j) - v[j];
          row_done[i] = true;
          stack.push_back(i);
        }
      }
    }
  }

  // Brings `enter` into the basis along its unique cycle; returns the step.
  double pivot(std::size_t enter) {
    const std::size_t ei = enter / n_, ej = enter % n_;
    // Tree path from column node ej to row node ei.
    const std::size_t nodes = m_ + n_;
    std::vector<std::size_t> parent(nodes, npos);
    std::vector<bool> seen(nodes, false);
    std::vector<std::size_t> queue{m_ + ej};
    seen[m_ + ej] = true;
    for (std::size_t q = 0; q < queue.size() && !seen[ei]; ++q) {
      std::size_t node = queue[q];
      auto visit = [&](std::size_t next) {
        if (seen[next]) return;
        seen[next] = true;
        parent[next] = node;
        queue.push_back(next);
      };
      if (node < m_) {
        for (std::size_t j = 0; j < n_; ++j)
          if (basic_[node * n_ + j]) visit(m_ + j);
      } else {
        std::size_t j = node - m_;
        for (std::size_t i = 0; i < m_; ++i)
          if (basic_[i * n_ + j]) visit(i);
      }
    }
    if (!seen[ei]) throw Error("transport: basis is not a spanning tree");

    // Walk back from ei to ej; cells alternate -, +, -, ... starting at the
    // row end, the entering cell itself is +.
    std::vector<std::size_t> minus, plus;
    bool sign_minus = true;
    for (std::size_t node = ei; node != m_ + ej; node = parent[node]) {
      std::size_t next = parent[node];
      std::size_t cell = node < m_ ? node * n_ + (next - m_) : next * n_ + (node - m_);
      (sign_minus ? minus : plus).push_back(cell);
      sign_minus = !sign_minus;
    }

    std::size_t leave = npos;
    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t cell : minus) {
      double f = flow_.data[cell];
      if (f < theta || (f == theta && cell < leave)) {
        theta = f;
        leave = cell;
      }
    }
    flow_.data[enter] += theta;
    for (std::size_t cell : plus) flow_.data[cell] += theta;
    for (std::size_t cell : minus) flow_.data[cell] = std::max(0.0, flow_.data[cell] - theta);
    flow_.data[leave] = 0.0;
    basic_[enter] = true;
    basic_[leave] = false;
    return theta;
  }
};

}  // namespace transport_detail

inline TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                                     const Matrix& cost) {
  if (supply.empty() || demand.empty()) throw Error("transport: empty supply or demand");
  if (cost.rows != supply.size() || cost.cols != demand.size())
    throw Error("transport: cost matrix shape does not match supply/demand");
  for (double s : supply)
    if (!(s >= 0.0) || !std::isfinite(s)) throw Error("transport: negative or non-finite supply");
  for (double d : demand)
    if (!(d >= 0.0) || !std::isfinite(d)) throw Error("transport: negative or non-finite demand");
  for (double c : cost.data)
    if (!std::isfinite(c)) throw Error("transport: non-finite cost");
  const double total_s = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double total_d = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (std::abs(total_s - total_d) > 1e-9 * std::max(1.0, total_s)) {
    std::ostringstream os;
    os << "transport: unbalanced problem (supply " << total_s << ", demand " << total_d << ")";
    throw Error(os.str());
  }
  return transport_detail::Simplex(supply, demand, cost).solve();
}

}  // namespace titleeval
