#pragma once

// Per-resource reward functions f_j(t, c): the expected future reward of
// optimally admitting the customers routed to resource j, given the thinned
// arrival streams lambda_ij(t) = lambda_i(t) x_ij / Lambda_i. The backward
// equation
//
//   df_j/dt (t, c) = - sum_i lambda_ij(t) (r_ij - f_j(t, c) + f_j(t, c-1))^+
//   f_j(T, c) = 0,  f_j(t, 0) = 0
//
// is swept with explicit Euler on a grid that contains every rate breakpoint.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "admit/lp.hpp"
#include "admit/matrix.hpp"
#include "admit/model.hpp"

namespace admit {

inline constexpr double kStabilityLimit = 0.1;  // max dt * total routed rate

class StabilityError : public std::runtime_error {
 public:
  StabilityError(double requested, double required)
      : std::runtime_error("grid step " + std::to_string(requested) +
                           " violates the stability guard; need dt <= " + std::to_string(required)),
        required_(required) {}
  double required_step() const { return required_; }

 private:
  double required_;
};

/// Thinned arrival rates, indexed (type, resource).
using SplitRates = Matrix<RateFunction>;

inline SplitRates split_rates(const Instance& inst, const FluidSolution& fluid) {
  SplitRates out(inst.num_types(), inst.num_resources());
  for (std::size_t i = 0; i < inst.num_types(); ++i) {
    const double total = inst.expected_arrivals(i);
    for (std::size_t j = 0; j < inst.num_resources(); ++j) {
      const double share = total > 0.0 ? fluid.x(i, j) / total : 0.0;
      out(i, j) = inst.types[i].rate.scaled(share);
    }
  }
  return out;
}

class RewardFunction {
 public:
  RewardFunction() = default;
  RewardFunction(std::size_t resource, std::vector<double> times, Matrix<double> values, double step)
      : resource_(resource), times_(std::move(times)), values_(std::move(values)), step_(step) {}

  std::size_t resource() const { return resource_; }
  const std::vector<double>& times() const { return times_; }
  double step() const { return step_; }
  int capacity() const { return static_cast<int>(values_.cols()) - 1; }
  std::size_t grid_size() const { return times_.size(); }

  double value(std::size_t n, int c) const { return values_(n, static_cast<std::size_t>(c)); }

  /// Index of the last grid point at or before t (clamped to the grid).
  std::size_t grid_index(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return 0;
    return static_cast<std::size_t>(it - times_.begin()) - 1;
  }

  double at(double t, int c) const { return value(grid_index(t), c); }

  /// Bid price f(t, c) - f(t, c-1); +inf when nothing remains.
  double marginal(double t, int c) const {
    if (c <= 0) return std::numeric_limits<double>::infinity();
    const std::size_t n = grid_index(t);
    return value(n, c) - value(n, c - 1);
  }

  double initial_value() const { return value(0, capacity()); }

 private:
  std::size_t resource_ = 0;
  std::vector<double> times_;
  Matrix<double> values_;  // (grid points) x (capacity + 1)
  double step_ = 0.0;
};

namespace detail {

struct Segment {
  double t0, t1;
  std::vector<double> rates;    // routed rate per contributing type
  std::vector<double> rewards;  // matching rewards
  double total = 0.0;
};

inline std::vector<Segment> routed_segments(const Instance& inst, const SplitRates& split, std::size_t j) {
  std::vector<double> cuts{0.0, inst.horizon};
  for (std::size_t i = 0; i < inst.num_types(); ++i) {
    if (!(split(i, j).integral() > 0.0)) continue;
    for (const auto& p : split(i, j).pieces()) {
      cuts.push_back(p.t_start);
      cuts.push_back(p.t_end);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  const double eps = 1e-12 * std::max(1.0, inst.horizon);
  std::vector<double> uniq;
  for (double c : cuts) {
    if (c < 0.0 || c > inst.horizon) continue;
    if (uniq.empty() || c - uniq.back() > eps) uniq.push_back(c);
  }
  uniq.back() = inst.horizon;

  std::vector<Segment> segs;
  for (std::size_t s = 0; s + 1 < uniq.size(); ++s) {
    Segment seg{uniq[s], uniq[s + 1], {}, {}, 0.0};
    const double mid = 0.5 * (seg.t0 + seg.t1);
    for (std::size_t i = 0; i < inst.num_types(); ++i) {
      const double rate = split(i, j)(mid);
      if (rate > 0.0) {
        seg.rates.push_back(rate);
        seg.rewards.push_back(inst.reward(i, j));
        seg.total += rate;
      }
    }
    segs.push_back(std::move(seg));
  }
  return segs;
}

}  // namespace detail

/// Default grid step for resource j: min(1e-3 T, stability bound).
inline double default_grid_step(const Instance& inst, const SplitRates& split, std::size_t j) {
  double peak = 0.0;
  for (const auto& seg : detail::routed_segments(inst, split, j)) peak = std::max(peak, seg.total);
  double dt = 1e-3 * inst.horizon;
  if (peak > 0.0) dt = std::min(dt, kStabilityLimit / peak);
  return dt;
}

inline RewardFunction compute_reward_function(const Instance& inst, const SplitRates& split,
                                              std::size_t j, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("compute_reward_function: dt must be > 0");
  const auto segs = detail::routed_segments(inst, split, j);
  double peak = 0.0;
  for (const auto& seg : segs) peak = std::max(peak, seg.total);
  if (dt * peak > kStabilityLimit * (1.0 + 1e-12)) throw StabilityError(dt, kStabilityLimit / peak);

  std::vector<double> times;
  std::vector<std::size_t> seg_of_step;  // segment index for [t_n, t_{n+1}]
  times.push_back(0.0);
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const double len = segs[s].t1 - segs[s].t0;
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(len / dt - 1e-9)));
    for (std::size_t k = 1; k <= steps; ++k) {
      times.push_back(k == steps ? segs[s].t1 : segs[s].t0 + len * static_cast<double>(k) / steps);
      seg_of_step.push_back(s);
    }
  }

  const int cap = inst.resources[j].capacity;
  const std::size_t last = times.size() - 1;
  Matrix<double> f(times.size(), static_cast<std::size_t>(cap) + 1, 0.0);
  for (std::size_t n = last; n-- > 0;) {
    const auto& seg = segs[seg_of_step[n]];
    const double h = times[n + 1] - times[n];
    for (int c = 1; c <= cap; ++c) {
      const double next = f(n + 1, c);
      const double next_below = f(n + 1, c - 1);
      double drift = 0.0;
      for (std::size_t q = 0; q < seg.rates.size(); ++q)
        drift += seg.rates[q] * std::max(0.0, seg.rewards[q] - next + next_below);
      double v = next + h * drift;
      v = std::max({v, next, f(n, c - 1)});  // monotone in t and c
      f(n, c) = v;
    }
  }
  return RewardFunction(j, std::move(times), std::move(f), dt);
}

/// Reward functions for every resource. A non-positive dt selects the
/// per-resource default step.
inline std::vector<RewardFunction> compute_reward_functions(const Instance& inst, const FluidSolution& fluid,
                                                            double dt = 0.0) {
  const SplitRates split = split_rates(inst, fluid);
  std::vector<RewardFunction> out;
  out.reserve(inst.num_resources());
  for (std::size_t j = 0; j < inst.num_resources(); ++j) {
    const double step = dt > 0.0 ? dt : default_grid_step(inst, split, j);
    out.push_back(compute_reward_function(inst, split, j, step));
  }
  return out;
}

/// Expected total reward of the routing-plus-admission policy: sum_j f_j(0, C_j).
inline double separation_expected_reward(const std::vector<RewardFunction>& rfs) {
  double total = 0.0;
  for (const auto& rf : rfs) total += rf.initial_value();
  return total;
}

/// CSV dump with columns resource,t,c,f.
inline void write_reward_csv(std::ostream& os, const std::vector<RewardFunction>& rfs) {
  os << "resource,t,c,f\n";
  os.precision(9);
  for (const auto& rf : rfs)
    for (std::size_t n = 0; n < rf.grid_size(); ++n)
      for (int c = 0; c <= rf.capacity(); ++c)
        os << rf.resource() << ',' << rf.times()[n] << ',' << c << ',' << rf.value(n, c) << '\n';
}

}  // namespace admit
