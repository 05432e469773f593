#pragma once

// Synthetic instance generators: random non-stationary instances used for
// property and acceptance testing, and clinic-style weekly session instances
// with per-patient availability masks.

#include <algorithm>
#include <bit>
#include <iterator>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "admit/model.hpp"
#include "admit/rng.hpp"

namespace admit {

struct RandomInstanceConfig {
  int n_resources = 3;
  int m_types = 4;
  int min_capacity = 1;
  double horizon = 1.0;
  std::uint64_t seed = 0;
};

/// Random piecewise-constant rates (2 to 6 pieces per type), rewards uniform in
/// [0, 1], capacities in {k, k+1, k+2}. Expected demand is scaled so the total
/// load lies between half and one and a half times the total capacity.
inline Instance gen_random_instance(const RandomInstanceConfig& cfg) {
  if (cfg.n_resources < 1 || cfg.m_types < 1 || cfg.min_capacity < 1 || !(cfg.horizon > 0.0))
    throw std::invalid_argument("gen_random_instance: counts must be >= 1 and horizon > 0");

  Rng rng(derive_seed(cfg.seed, 0, 0x6e6e));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> extra_capacity(0, 2);
  std::uniform_int_distribution<int> piece_count(2, 6);

  Instance inst;
  inst.horizon = cfg.horizon;
  int total_capacity = 0;
  for (int j = 0; j < cfg.n_resources; ++j) {
    Resource r;
    r.capacity = cfg.min_capacity + extra_capacity(rng);
    total_capacity += r.capacity;
    inst.resources.push_back(r);
  }

  const double load = 0.5 + unit(rng);
  const double per_type = load * total_capacity / cfg.m_types;
  for (int i = 0; i < cfg.m_types; ++i) {
    const int pieces = piece_count(rng);
    std::vector<double> cuts;
    for (int p = 0; p + 1 < pieces; ++p) cuts.push_back(cfg.horizon * unit(rng));
    std::sort(cuts.begin(), cuts.end());
    cuts.insert(cuts.begin(), 0.0);
    cuts.push_back(cfg.horizon);

    std::vector<RatePiece> out;
    double raw_mass = 0.0;
    for (int p = 0; p < pieces; ++p) {
      if (!(cuts[p + 1] > cuts[p])) continue;  // measure-zero coincident cuts
      const double rate = 0.05 + unit(rng);
      out.push_back({cuts[p], cuts[p + 1], rate});
      raw_mass += rate * (cuts[p + 1] - cuts[p]);
    }
    const double target = per_type * (0.5 + unit(rng));
    for (auto& piece : out) piece.rate *= target / raw_mass;

    CustomerType type;
    type.rate = RateFunction(std::move(out));
    for (int j = 0; j < cfg.n_resources; ++j) type.rewards.push_back(unit(rng));
    inst.types.push_back(std::move(type));
  }
  return inst;
}

struct ClinicConfig {
  int weeks = 1;
  int sessions_per_week = 8;  // two per day starting Monday, at most 14
  int capacity = 23;
  double availability = 1.0;  // probability a patient can attend any given session
  std::map<int, double> reward_table = {{0, 0.95}, {7, 0.7}, {14, 0.55}, {28, 0.4}, {56, 0.27}};
  std::vector<double> weekday_weights = {1.0, 1.0, 1.0, 1.0, 2.0};  // Mon..Fri arrival profile
  double load = 1.0;  // weekly expected arrivals / weekly capacity
  std::uint64_t seed = 0;
};

/// Show probability after waiting `days`: the value at the largest tabulated
/// wait that does not exceed it, or 0 before the first entry.
inline double lookup_wait_reward(const std::map<int, double>& table, int days) {
  auto it = table.upper_bound(days);
  if (it == table.begin()) return 0.0;
  return std::prev(it)->second;
}

/// Time is measured in days. A patient booking on day d arrives during
/// [d, d+1); a session held on day s is a resource that expires at s+1, so
/// sessions earlier than the booking day carry reward 0. One customer type is
/// created per (booking day, availability mask) with positive probability.
inline Instance gen_clinic_instance(const ClinicConfig& cfg) {
  if (cfg.weeks < 1) throw std::invalid_argument("gen_clinic_instance: weeks must be >= 1");
  if (cfg.sessions_per_week < 1 || cfg.sessions_per_week > 14)
    throw std::invalid_argument("gen_clinic_instance: sessions_per_week must be in [1, 14]");
  if (cfg.capacity < 1) throw std::invalid_argument("gen_clinic_instance: capacity must be >= 1");
  if (!(cfg.availability > 0.0) || cfg.availability > 1.0)
    throw std::invalid_argument("gen_clinic_instance: availability probability must be in (0, 1]");
  if (cfg.reward_table.empty())
    throw std::invalid_argument("gen_clinic_instance: reward table is empty");
  for (const auto& [days, p] : cfg.reward_table)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("gen_clinic_instance: show probability for wait " +
                                  std::to_string(days) + " outside [0, 1]");
  if (cfg.weekday_weights.empty() || cfg.weekday_weights.size() > 7)
    throw std::invalid_argument("gen_clinic_instance: weekday_weights needs 1 to 7 entries");

  const int s = cfg.sessions_per_week;
  Instance inst;
  inst.horizon = 7.0 * cfg.weeks;

  std::vector<int> session_day;
  for (int w = 0; w < cfg.weeks; ++w) {
    for (int q = 0; q < s; ++q) {
      const int day = 7 * w + q / 2;
      session_day.push_back(day);
      inst.resources.push_back({cfg.capacity, static_cast<double>(day + 1)});
    }
  }

  double weight_sum = 0.0;
  for (double w : cfg.weekday_weights) weight_sum += w;
  const double per_weight = cfg.load * s * cfg.capacity / weight_sum;

  Rng rng(derive_seed(cfg.seed, 0, 0xc11c));
  std::uniform_real_distribution<double> jitter(0.8, 1.2);

  const std::uint32_t masks = 1u << s;
  const double pa = cfg.availability;
  for (int w = 0; w < cfg.weeks; ++w) {
    for (std::size_t wd = 0; wd < cfg.weekday_weights.size(); ++wd) {
      const int day = 7 * w + static_cast<int>(wd);
      const double day_rate = cfg.weekday_weights[wd] * per_weight * jitter(rng);
      for (std::uint32_t mask = 0; mask < masks; ++mask) {
        const int avail = std::popcount(mask);
        const double prob = std::pow(pa, avail) * std::pow(1.0 - pa, s - avail);
        if (!(prob > 0.0)) continue;

        std::vector<RatePiece> pieces;
        if (day > 0) pieces.push_back({0.0, static_cast<double>(day), 0.0});
        pieces.push_back({static_cast<double>(day), static_cast<double>(day + 1), day_rate * prob});
        if (day + 1 < inst.horizon) pieces.push_back({static_cast<double>(day + 1), inst.horizon, 0.0});

        CustomerType type;
        type.rate = RateFunction(std::move(pieces));
        type.rewards.resize(inst.resources.size(), 0.0);
        for (std::size_t j = 0; j < inst.resources.size(); ++j) {
          const int q = static_cast<int>(j) % s;
          const int wait = session_day[j] - day;
          if (wait < 0 || !(mask & (1u << q))) continue;
          type.rewards[j] = lookup_wait_reward(cfg.reward_table, wait);
        }
        inst.types.push_back(std::move(type));
      }
    }
  }
  return inst;
}

}  // namespace admit
