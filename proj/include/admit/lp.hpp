#pragma once

// Offline matching LP and its fluid relaxation, both solved with a dense
// primal simplex (Bland's rule) so that the returned vertex is deterministic.
//
//   max  sum_ij r_ij x_ij
//   s.t. sum_j x_ij <= supply_i     (supply = expected arrivals, or realized counts)
//        sum_i x_ij <= C_j
//        x >= 0

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "admit/matrix.hpp"
#include "admit/model.hpp"

namespace admit {

inline constexpr double kLpTolerance = 1e-9;

struct LpSolution {
  std::vector<double> x;       // structural variables
  std::vector<double> slacks;  // one per constraint
  std::vector<double> duals;   // one per constraint, >= 0
  double objective = 0.0;
  std::size_t pivots = 0;
};

/// max c.x subject to A x <= b, x >= 0, with b >= 0 so the slack basis is
/// primal feasible. Entering variable: lowest index with positive reduced
/// cost. Leaving variable: minimum ratio, ties to the lowest basic index.
inline LpSolution maximize_packing(const Matrix<double>& A, std::span<const double> b,
                                   std::span<const double> c, double tol = kLpTolerance) {
  const std::size_t m = A.rows();
  const std::size_t n = A.cols();
  if (b.size() != m || c.size() != n) throw std::invalid_argument("maximize_packing: shape mismatch");
  for (double v : b)
    if (!(v >= 0.0)) throw std::invalid_argument("maximize_packing: right-hand side must be >= 0");

  const std::size_t cols = n + m + 1;  // structural, slack, rhs
  const std::size_t rhs = n + m;
  if (static_cast<double>(m + 1) * static_cast<double>(cols) > 4e8)
    throw std::length_error("maximize_packing: problem too large for the dense tableau");

  Matrix<double> tab(m + 1, cols, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) tab(i, j) = A(i, j);
    tab(i, n + i) = 1.0;
    tab(i, rhs) = b[i];
  }
  for (std::size_t j = 0; j < n; ++j) tab(m, j) = c[j];  // reduced costs; rhs holds -objective

  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

  std::vector<std::size_t> nz;
  LpSolution sol;
  for (;;) {
    std::size_t enter = rhs;
    for (std::size_t j = 0; j < rhs; ++j) {
      if (tab(m, j) > tol) {
        enter = j;
        break;
      }
    }
    if (enter == rhs) break;

    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double a = tab(i, enter);
      if (a <= tol) continue;
      const double ratio = tab(i, rhs) / a;
      if (leave == m || ratio < best - 1e-12) {
        best = ratio;
        leave = i;
      } else if (ratio <= best + 1e-12 && basis[i] < basis[leave]) {
        best = std::min(best, ratio);
        leave = i;
      }
    }
    if (leave == m) throw std::runtime_error("maximize_packing: unbounded (inconsistent data)");

    auto prow = tab.row(leave);
    const double piv = prow[enter];
    nz.clear();
    for (std::size_t j = 0; j < cols; ++j) {
      if (prow[j] != 0.0) {
        prow[j] /= piv;
        nz.push_back(j);
      }
    }
    prow[enter] = 1.0;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      auto row = tab.row(i);
      const double f = row[enter];
      if (f == 0.0) continue;
      for (std::size_t j : nz) row[j] -= f * prow[j];
      row[enter] = 0.0;
    }
    basis[leave] = enter;
    ++sol.pivots;
  }

  sol.x.assign(n, 0.0);
  sol.slacks.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double v = std::max(0.0, tab(i, rhs));
    if (basis[i] < n)
      sol.x[basis[i]] = v;
    else
      sol.slacks[basis[i] - n] = v;
  }
  sol.duals.resize(m);
  for (std::size_t i = 0; i < m; ++i) sol.duals[i] = std::max(0.0, -tab(m, n + i));
  double obj = 0.0;
  for (std::size_t j = 0; j < n; ++j) obj += c[j] * sol.x[j];
  sol.objective = obj;
  return sol;
}

struct FluidSolution {
  Matrix<double> x;                   // types x resources
  double objective = 0.0;             // upper bound on the expected offline optimum
  std::vector<double> capacity_duals; // one per resource
  std::vector<double> type_duals;     // one per type
  std::vector<double> row_slacks;     // supply_i - sum_j x_ij
  std::vector<double> col_slacks;     // C_j - sum_i x_ij
  std::size_t pivots = 0;
};

/// Transportation-shaped LP with the given per-type supplies.
inline FluidSolution solve_matching_lp(const Instance& inst, std::span<const double> supply) {
  const std::size_t m = inst.num_types();
  const std::size_t n = inst.num_resources();
  if (supply.size() != m) throw std::invalid_argument("solve_matching_lp: supply size mismatch");

  Matrix<double> A(m + n, m * n, 0.0);
  std::vector<double> b(m + n);
  std::vector<double> c(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    b[i] = supply[i];
    for (std::size_t j = 0; j < n; ++j) {
      A(i, i * n + j) = 1.0;
      A(m + j, i * n + j) = 1.0;
      c[i * n + j] = inst.reward(i, j);
    }
  }
  for (std::size_t j = 0; j < n; ++j) b[m + j] = inst.resources[j].capacity;

  const LpSolution lp = maximize_packing(A, b, c);

  FluidSolution out;
  out.x = Matrix<double>(m, n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.x(i, j) = lp.x[i * n + j];
  out.objective = lp.objective;
  out.type_duals.assign(lp.duals.begin(), lp.duals.begin() + m);
  out.capacity_duals.assign(lp.duals.begin() + m, lp.duals.end());
  out.row_slacks.assign(lp.slacks.begin(), lp.slacks.begin() + m);
  out.col_slacks.assign(lp.slacks.begin() + m, lp.slacks.end());
  out.pivots = lp.pivots;
  return out;
}

/// Fluid relaxation: supplies are the expected arrival counts. Its optimum
/// bounds the expected offline optimum from above.
inline FluidSolution solve_fluid(const Instance& inst) {
  std::vector<double> supply(inst.num_types());
  for (std::size_t i = 0; i < supply.size(); ++i) supply[i] = inst.expected_arrivals(i);
  return solve_matching_lp(inst, supply);
}

struct OfflineSolution {
  double objective = 0.0;
  Matrix<double> x;
};

/// Offline optimum for realized per-type arrival counts (a weighted
/// b-matching). With integer data the simplex vertex is integral.
inline OfflineSolution solve_offline(const Instance& inst, std::span<const int> delta) {
  std::vector<double> supply(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    if (delta[i] < 0) throw std::invalid_argument("solve_offline: negative arrival count");
    supply[i] = delta[i];
  }
  FluidSolution s = solve_matching_lp(inst, supply);
  return {s.objective, std::move(s.x)};
}

}  // namespace admit
