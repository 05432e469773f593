#pragma once

// Competitive-ratio laboratory for the routing-plus-admission policy with
// minimum capacity k.
//
// The bounded Poisson process R(t) on [0, k] is a unit-rate counting process
// held below a staircase barrier: the barrier sits at level b on [t_b,
// t_{b+1}) with t_0 = 0 and t_k = k. Below the barrier the occupation
// probabilities p_i(t) = P(R(t) = i) obey dp_i/dt = p_{i-1} - p_i; at the
// barrier level b they only accumulate, dp_b/dt = p_{b-1}.
//
// For a given beta the barrier times are built so that the time spent at
// level i during [t_i, t_{i+1}] has expectation exactly 1/beta - 1. beta* is
// the value for which the last level, on [t_{k-1}, k], meets the same target.
// alpha_i(t) = beta* p_i(t) is then feasible for the dual of the
// bound-revealing problem, so beta* lower-bounds the competitive ratio.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "admit/matrix.hpp"
#include "admit/poisson.hpp"

namespace admit {

inline double default_bound_step(int k) { return std::min(1e-3, 1e-4 * k); }

struct BoundedProcess {
  int k = 1;
  std::vector<double> barriers;  // t_1 .. t_{k-1}
  double step = 1e-4;
  std::vector<double> times;     // grid over [0, k], includes every barrier time
  Matrix<double> prob;           // P(R(t) = i), grid x k
  Matrix<double> occupation;     // int_0^t P(R(s) = i) ds, grid x k

  std::vector<double> terminal() const {
    std::vector<double> out(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) out[i] = prob(times.size() - 1, i);
    return out;
  }
};

struct BoundResult {
  int k = 1;
  double beta_star = 0.5;
  std::vector<double> barriers;
  std::vector<double> terminal;  // P(R(k) = i), i = 0..k-1
  double residual = 0.0;         // final-interval area minus (1/beta - 1)
  int iterations = 0;
  double step = 1e-4;
};

namespace detail {

// State layout: p_0..p_{k-1}, then A_0..A_{k-1} with A_i = int_0^t p_i.
class BarrierOde {
 public:
  explicit BarrierOde(int k) : k_(k), k1_(2 * k), k2_(2 * k), k3_(2 * k), k4_(2 * k), tmp_(2 * k) {}

  // One RK4 step of length h with the barrier at `level`; only states up to
  // the level are active.
  void step(std::vector<double>& y, double h, int level) {
    const int active = level + 1;
    deriv(y, k1_, level);
    axpy(y, k1_, 0.5 * h, tmp_, active);
    deriv(tmp_, k2_, level);
    axpy(y, k2_, 0.5 * h, tmp_, active);
    deriv(tmp_, k3_, level);
    axpy(y, k3_, h, tmp_, active);
    deriv(tmp_, k4_, level);
    for (int i = 0; i < active; ++i) {
      y[i] += h / 6.0 * (k1_[i] + 2 * k2_[i] + 2 * k3_[i] + k4_[i]);
      y[k_ + i] += h / 6.0 * (k1_[k_ + i] + 2 * k2_[k_ + i] + 2 * k3_[k_ + i] + k4_[k_ + i]);
    }
  }

  int k() const { return k_; }

 private:
  void deriv(const std::vector<double>& y, std::vector<double>& dy, int level) const {
    for (int i = 0; i <= level; ++i) {
      const double inflow = i > 0 ? y[i - 1] : 0.0;
      dy[i] = i < level ? inflow - y[i] : inflow;
      dy[k_ + i] = y[i];
    }
  }

  void axpy(const std::vector<double>& y, const std::vector<double>& d, double h, std::vector<double>& out,
            int active) const {
    for (int i = 0; i < active; ++i) {
      out[i] = y[i] + h * d[i];
      out[k_ + i] = y[k_ + i] + h * d[k_ + i];
    }
  }

  int k_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

inline std::size_t steps_for(double length, double h) {
  return static_cast<std::size_t>(std::max(1.0, std::ceil(length / h - 1e-9)));
}

inline void check_step(double h) {
  if (!(h > 0.0) || h > 1e-3 * (1.0 + 1e-12))
    throw std::invalid_argument("bounded process: grid step must lie in (0, 1e-3]");
}

}  // namespace detail

/// Forward integration of the occupation probabilities for given barrier
/// times; RK4 steps are split exactly at each barrier.
inline BoundedProcess integrate_bounded(int k, const std::vector<double>& barriers, double h) {
  if (k < 1) throw std::invalid_argument("integrate_bounded: k must be >= 1");
  detail::check_step(h);
  if (barriers.size() != static_cast<std::size_t>(k - 1))
    throw std::invalid_argument("integrate_bounded: expected k-1 barrier times");
  double prev = 0.0;
  for (double t : barriers) {
    if (!(t >= prev) || !(t < k)) throw std::invalid_argument("integrate_bounded: barriers must satisfy 0 <= t_1 <= ... <= t_{k-1} < k");
    prev = t;
  }

  BoundedProcess out;
  out.k = k;
  out.barriers = barriers;
  out.step = h;

  std::vector<double> edges{0.0};
  edges.insert(edges.end(), barriers.begin(), barriers.end());
  edges.push_back(static_cast<double>(k));

  std::size_t total = 1;
  for (int b = 0; b < k; ++b) {
    const double len = edges[b + 1] - edges[b];
    if (len > 0.0) total += detail::steps_for(len, h);
  }
  out.times.reserve(total);
  out.prob = Matrix<double>(total, k, 0.0);
  out.occupation = Matrix<double>(total, k, 0.0);

  detail::BarrierOde ode(k);
  std::vector<double> y(2 * k, 0.0);
  y[0] = 1.0;
  std::size_t row = 0;
  auto record = [&](double t) {
    out.times.push_back(t);
    for (int i = 0; i < k; ++i) {
      out.prob(row, i) = y[i];
      out.occupation(row, i) = y[k + i];
    }
    ++row;
  };
  record(0.0);
  for (int b = 0; b < k; ++b) {
    const double len = edges[b + 1] - edges[b];
    if (!(len > 0.0)) continue;
    const std::size_t n = detail::steps_for(len, h);
    const double dt = len / static_cast<double>(n);
    for (std::size_t s = 1; s <= n; ++s) {
      ode.step(y, dt, b);
      record(s == n ? edges[b + 1] : edges[b] + dt * static_cast<double>(s));
    }
  }
  return out;
}

struct BarrierConstruction {
  bool feasible = false;
  std::vector<double> barriers;
  double final_area = 0.0;  // int_{t_{k-1}}^{k} p_{k-1}
};

/// Builds t_1..t_{k-1} so that each level's time at the barrier equals
/// 1/beta - 1. The crossing inside a step is solved on the RK4 step length
/// itself (Newton on the stepped occupation), not by interpolation.
inline BarrierConstruction construct_barriers(int k, double beta, double h) {
  if (k < 1) throw std::invalid_argument("construct_barriers: k must be >= 1");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("construct_barriers: beta must be in (0, 1)");
  detail::check_step(h);

  const double target = 1.0 / beta - 1.0;
  const double horizon = k;
  detail::BarrierOde ode(k);
  std::vector<double> y(2 * k, 0.0), trial(2 * k);
  y[0] = 1.0;
  double t = 0.0;

  BarrierConstruction out;
  for (int b = 0; b + 1 < k; ++b) {
    if (target <= 0.0) {
      out.barriers.push_back(t);
      continue;
    }
    bool crossed = false;
    while (!crossed) {
      const double remaining = horizon - t;
      if (remaining <= 1e-15 * horizon) return out;  // infeasible
      const double dt = std::min(h, remaining);
      trial = y;
      ode.step(trial, dt, b);
      const double before = y[k + b];
      const double after = trial[k + b];
      if (after < target) {
        y.swap(trial);
        t += dt;
        continue;
      }
      // Root of A_b(t + s) = target for s in (0, dt].
      double s = dt * (target - before) / std::max(after - before, 1e-300);
      s = std::clamp(s, 0.0, dt);
      for (int it = 0; it < 50; ++it) {
        trial = y;
        ode.step(trial, s, b);
        const double g = trial[k + b] - target;
        if (std::abs(g) <= 1e-15 * std::max(1.0, target)) break;
        const double slope = std::max(trial[b], 1e-300);
        const double next = std::clamp(s - g / slope, 0.0, dt);
        if (next == s) break;
        s = next;
      }
      trial = y;
      ode.step(trial, s, b);
      y.swap(trial);
      t += s;
      if (!(t < horizon)) return out;  // infeasible
      out.barriers.push_back(t);
      crossed = true;
    }
  }

  // Last level runs to the horizon.
  const double len = horizon - t;
  if (len > 0.0) {
    const std::size_t n = detail::steps_for(len, h);
    const double dt = len / static_cast<double>(n);
    for (std::size_t s = 0; s < n; ++s) ode.step(y, dt, k - 1);
  }
  out.final_area = y[k + (k - 1)];
  out.feasible = true;
  return out;
}

class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Residual of the final-interval condition; -inf when the construction runs
/// past the horizon.
inline double beta_residual(int k, double beta, double h, BarrierConstruction* keep = nullptr) {
  BarrierConstruction c = construct_barriers(k, beta, h);
  const double r = c.feasible ? c.final_area - (1.0 / beta - 1.0) : -std::numeric_limits<double>::infinity();
  if (keep) *keep = std::move(c);
  return r;
}

/// Bisection for beta* on a bracket that starts at (max(1/(1+k), 0.4), 1-1e-6)
/// and widens downward if needed. The residual increases in beta.
inline BoundResult solve_beta_star(int k, double tol = 1e-12, double h = 0.0) {
  if (k < 1) throw std::invalid_argument("solve_beta_star: k must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_beta_star: tol must be > 0");
  if (h <= 0.0) h = default_bound_step(k);

  double lo = std::max(1.0 / (1.0 + k), 0.4);
  double hi = 1.0 - 1e-6;
  double r_lo = beta_residual(k, lo, h);
  for (int widen = 0; r_lo > 0.0 && widen < 60; ++widen) {
    lo *= 0.5;
    r_lo = beta_residual(k, lo, h);
  }
  const double r_hi = beta_residual(k, hi, h);
  if (r_lo > 0.0 || r_hi < 0.0)
    throw BracketError("solve_beta_star: failed to bracket the root for k=" + std::to_string(k) +
                       " (residual " + std::to_string(r_lo) + " at " + std::to_string(lo) + ", " +
                       std::to_string(r_hi) + " at " + std::to_string(hi) + ")");

  BoundResult res;
  res.k = k;
  res.step = h;
  BarrierConstruction best;
  double beta = lo;
  double r = r_lo;
  if (std::abs(r_lo) < tol) {
    beta_residual(k, lo, h, &best);
  } else {
    for (int it = 0; it < 200; ++it) {
      beta = 0.5 * (lo + hi);
      BarrierConstruction c;
      r = beta_residual(k, beta, h, &c);
      ++res.iterations;
      if (r > 0.0)
        hi = beta;
      else
        lo = beta;
      if (c.feasible) best = std::move(c);
      if (std::abs(r) < tol || hi - lo < 1e-15) break;
    }
    if (!best.feasible) beta_residual(k, beta, h, &best);
  }
  res.beta_star = beta;
  res.residual = r;
  res.barriers = best.barriers;
  res.terminal = integrate_bounded(k, res.barriers, h).terminal();
  return res;
}

struct DualCheck {
  double max_violation = 0.0;
  std::array<double, 4> family{};  // largest violation per constraint family
  double sum_deviation = 0.0;      // max |sum_i alpha_i(t) - beta|
  double first_tightness = 0.0;    // max |alpha_0 + int alpha_0 - 1| for t >= t_1
};

/// Evaluates alpha_i(t) = beta* p_i(t) against every constraint of the dual
/// on the process grid:
///   alpha_0(t) + int_0^t alpha_0 <= 1
///   alpha_i(t) + int_0^t alpha_i <= int_0^t alpha_{i-1}
///   beta <= sum_i alpha_i(t)
///   alpha_i(t) >= 0
inline DualCheck verify_dual_feasibility(const BoundResult& bound, const BoundedProcess& process) {
  const double beta = bound.beta_star;
  const int k = process.k;
  const double t1 = k > 1 ? process.barriers.front() : static_cast<double>(k);
  DualCheck out;
  for (std::size_t n = 0; n < process.times.size(); ++n) {
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      const double alpha = beta * process.prob(n, i);
      const double acc = beta * process.occupation(n, i);
      sum += alpha;
      double v;
      if (i == 0) {
        v = alpha + acc - 1.0;
        out.family[0] = std::max(out.family[0], v);
        if (k > 1 && process.times[n] >= t1) out.first_tightness = std::max(out.first_tightness, std::abs(v));
      } else {
        v = alpha + acc - beta * process.occupation(n, i - 1);
        out.family[1] = std::max(out.family[1], v);
      }
      out.family[3] = std::max(out.family[3], -alpha);
    }
    out.family[2] = std::max(out.family[2], beta - sum);
    out.sum_deviation = std::max(out.sum_deviation, std::abs(sum - beta));
  }
  for (double v : out.family) out.max_violation = std::max(out.max_violation, v);
  return out;
}

struct LemmaResiduals {
  double lemma = 0.0;  // |beta - 1/2 - (1/2k) sum_i i beta P(R(k)=i)|
  double balance = 0.0;  // |k (1 - beta) - beta (k - sum_i i P(R(k)=i))|
};

inline LemmaResiduals lemma_identity_check(const BoundResult& bound) {
  const double k = bound.k;
  const double beta = bound.beta_star;
  double mean = 0.0;
  for (std::size_t i = 0; i < bound.terminal.size(); ++i) mean += static_cast<double>(i) * bound.terminal[i];
  LemmaResiduals out;
  out.lemma = std::abs(beta - 0.5 - beta * mean / (2.0 * k));
  out.balance = std::abs(k * (1.0 - beta) - beta * (k - mean));
  return out;
}

/// Closed-form lower bound
///   1 / (1 + [sum_{i >= 2k-1} i P_i(k) + 2 sum_{i=1}^{k-1} i P_{k+i-1}(k)] / k).
inline double closed_form_bound(int k) {
  if (k < 1) throw std::invalid_argument("closed_form_bound: k must be >= 1");
  const double lambda = k;
  double tail = 0.0;
  for (int i = 2 * k - 1;; ++i) {
    const double term = i * poisson_pmf(i, lambda);
    tail += term;
    if (i > lambda && term < 1e-18 * (tail + 1e-300)) break;
  }
  double middle = 0.0;
  for (int i = 1; i <= k - 1; ++i) middle += i * poisson_pmf(k + i - 1, lambda);
  return 1.0 / (1.0 + (tail + 2.0 * middle) / lambda);
}

/// 1 / (1 + 2 [P(N >= k)/k + e^{-k} k^k / k!]) with N ~ Poisson(k).
inline double asymptotic_bound(int k) {
  if (k < 1) throw std::invalid_argument("asymptotic_bound: k must be >= 1");
  const double lambda = k;
  return 1.0 / (1.0 + 2.0 * (poisson_upper_tail(k, lambda) / lambda + poisson_pmf(k, lambda)));
}

/// Leading-order expansion 1 - sqrt(2/pi) / sqrt(k).
inline double asymptotic_expansion(int k) {
  return 1.0 - std::sqrt(2.0 / std::numbers::pi) / std::sqrt(static_cast<double>(k));
}

/// Piecewise-constant reward-rate profile on [0, k].
struct StepProfile {
  std::vector<double> breaks;  // 0 = b_0 < ... < b_M = k
  std::vector<double> values;  // M values

  double integral() const {
    double s = 0.0;
    for (std::size_t q = 0; q < values.size(); ++q) s += values[q] * (breaks[q + 1] - breaks[q]);
    return s;
  }
};

/// u_0(0) for the unit-rate single-type problem with reward rate r on [0, k]:
///   du_l/dt = -(r(t) - u_l + u_{l+1})^+,  u_k = 0,  u_l(k) = 0,
/// i.e. the policy's normalized reward against an offline bound of 1.
inline double worst_case_ratio(const StepProfile& r, int k, double h = 1e-3) {
  if (k < 1) throw std::invalid_argument("worst_case_ratio: k must be >= 1");
  if (r.breaks.size() != r.values.size() + 1 || r.values.empty())
    throw std::invalid_argument("worst_case_ratio: malformed profile");
  if (std::abs(r.breaks.front()) > 1e-12 || std::abs(r.breaks.back() - k) > 1e-9)
    throw std::invalid_argument("worst_case_ratio: profile must cover [0, k]");
  for (std::size_t q = 0; q < r.values.size(); ++q) {
    if (!(r.breaks[q + 1] >= r.breaks[q])) throw std::invalid_argument("worst_case_ratio: breaks must increase");
    if (!(r.values[q] >= 0.0)) throw std::invalid_argument("worst_case_ratio: rates must be >= 0");
  }
  if (std::abs(r.integral() - 1.0) > 1e-9) throw std::invalid_argument("worst_case_ratio: profile must integrate to 1");

  // Integrate backward in time: with s = k - t, du_l/ds = (r - u_l + u_{l+1})^+.
  std::vector<double> u(k + 1, 0.0), k1(k), k2(k), k3(k), k4(k), tmp(k + 1, 0.0);
  auto deriv = [k](const std::vector<double>& v, double rate, std::vector<double>& d) {
    for (int l = 0; l < k; ++l) d[l] = std::max(0.0, rate - v[l] + v[l + 1]);
  };
  for (std::size_t q = r.values.size(); q-- > 0;) {
    const double len = r.breaks[q + 1] - r.breaks[q];
    if (!(len > 0.0)) continue;
    const double rate = r.values[q];
    const std::size_t n = detail::steps_for(len, h);
    const double dt = len / static_cast<double>(n);
    for (std::size_t s = 0; s < n; ++s) {
      deriv(u, rate, k1);
      for (int l = 0; l < k; ++l) tmp[l] = u[l] + 0.5 * dt * k1[l];
      deriv(tmp, rate, k2);
      for (int l = 0; l < k; ++l) tmp[l] = u[l] + 0.5 * dt * k2[l];
      deriv(tmp, rate, k3);
      for (int l = 0; l < k; ++l) tmp[l] = u[l] + dt * k3[l];
      deriv(tmp, rate, k4);
      for (int l = 0; l < k; ++l) u[l] += dt / 6.0 * (k1[l] + 2 * k2[l] + 2 * k3[l] + k4[l]);
    }
  }
  return u[0];
}

/// Everything reported per k: beta*, the closed-form bounds, and the checks.
struct BoundReport {
  BoundResult result;
  double closed_form = 0.0;
  double asymptotic = 0.0;
  DualCheck dual;
  LemmaResiduals lemma;
};

inline BoundReport analyze_bound(int k, double h = 0.0, double tol = 1e-12) {
  BoundReport rep;
  rep.result = solve_beta_star(k, tol, h);
  const BoundedProcess process = integrate_bounded(k, rep.result.barriers, rep.result.step);
  rep.dual = verify_dual_feasibility(rep.result, process);
  rep.lemma = lemma_identity_check(rep.result);
  rep.closed_form = closed_form_bound(k);
  rep.asymptotic = asymptotic_bound(k);
  return rep;
}

}  // namespace admit
