#pragma once

// Online decision rules. Every policy sees the arrival time, the customer
// type, the remaining capacities, and an RNG, and either rejects the customer
// or assigns one unit of an available resource. Ties go to the lowest index.

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "admit/hjb.hpp"
#include "admit/lp.hpp"
#include "admit/model.hpp"
#include "admit/rng.hpp"

namespace admit {

struct Decision {
  std::optional<std::size_t> resource;

  static Decision reject() { return {}; }
  static Decision assign(std::size_t j) { return {j}; }
  bool accepted() const { return resource.has_value(); }

  friend bool operator==(const Decision&, const Decision&) = default;
};

struct PolicyState {
  std::vector<int> remaining;
  double clock = 0.0;
};

enum class PolicyKind { Separation, MarginalAllocation, Greedy, BidPrice };

inline std::string_view policy_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::Separation: return "separation";
    case PolicyKind::MarginalAllocation: return "maa";
    case PolicyKind::Greedy: return "greedy";
    case PolicyKind::BidPrice: return "bidprice";
  }
  return "?";
}

inline std::optional<PolicyKind> parse_policy(std::string_view s) {
  for (auto k : {PolicyKind::Separation, PolicyKind::MarginalAllocation, PolicyKind::Greedy, PolicyKind::BidPrice})
    if (policy_name(k) == s) return k;
  return std::nullopt;
}

using SharedRewardFunctions = std::shared_ptr<const std::vector<RewardFunction>>;

inline SharedRewardFunctions share(std::vector<RewardFunction> rfs) {
  return std::make_shared<const std::vector<RewardFunction>>(std::move(rfs));
}

/// Policies keep a pointer to the instance; it must outlive them.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyKind kind() const = 0;
  std::string_view name() const { return policy_name(kind()); }
  virtual Decision decide(const PolicyState& state, std::size_t type, double t, Rng& rng) const = 0;
};

/// Assign the available resource with the largest reward - price when that
/// margin is >= 0; reject otherwise.
template <typename PriceFn>
Decision choose_max_margin_by(std::span<const double> rewards, std::span<const int> remaining, PriceFn&& price) {
  std::optional<std::size_t> best;
  double best_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < rewards.size(); ++j) {
    if (remaining[j] <= 0) continue;
    const double margin = rewards[j] - price(j);
    if (margin >= 0.0 && margin > best_margin) {
      best_margin = margin;
      best = j;
    }
  }
  return {best};
}

inline Decision choose_max_margin(std::span<const double> rewards, std::span<const double> prices,
                                  std::span<const int> remaining) {
  return choose_max_margin_by(rewards, remaining, [&](std::size_t j) { return prices[j]; });
}

/// Among available resources whose price does not exceed the reward, pick
/// the lowest price; ties go to the higher reward, then the lower index.
inline Decision choose_lowest_price(std::span<const double> rewards, std::span<const double> prices,
                                    std::span<const int> remaining) {
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < rewards.size(); ++j) {
    if (remaining[j] <= 0 || prices[j] > rewards[j]) continue;
    if (!best || prices[j] < prices[*best] ||
        (prices[j] == prices[*best] && rewards[j] > rewards[*best]))
      best = j;
  }
  return {best};
}

/// Random routing by x*_ij / Lambda_i, then single-resource admission control
/// against the routed resource's bid price. One uniform draw per arrival.
class SeparationPolicy final : public Policy {
 public:
  SeparationPolicy(const Instance& inst, const FluidSolution& fluid, SharedRewardFunctions rfs)
      : inst_(&inst), rfs_(std::move(rfs)), routing_(inst.num_types(), inst.num_resources(), 0.0) {
    for (std::size_t i = 0; i < inst.num_types(); ++i) {
      const double total = inst.expected_arrivals(i);
      if (!(total > 0.0)) continue;
      double cum = 0.0;
      for (std::size_t j = 0; j < inst.num_resources(); ++j) {
        cum += fluid.x(i, j) / total;
        routing_(i, j) = cum;
      }
    }
  }

  PolicyKind kind() const override { return PolicyKind::Separation; }

  /// Candidate resource for uniform draw u, or nullopt for the residual mass.
  std::optional<std::size_t> route(std::size_t type, double u) const {
    for (std::size_t j = 0; j < routing_.cols(); ++j)
      if (u < routing_(type, j)) return j;
    return std::nullopt;
  }

  Decision decide(const PolicyState& state, std::size_t type, double t, Rng& rng) const override {
    const double u = uniform01(rng);
    const auto j = route(type, u);
    if (!j) return Decision::reject();
    const int c = state.remaining[*j];
    if (c <= 0) return Decision::reject();
    if (inst_->reward(type, *j) >= (*rfs_)[*j].marginal(t, c)) return Decision::assign(*j);
    return Decision::reject();
  }

 private:
  const Instance* inst_;
  SharedRewardFunctions rfs_;
  Matrix<double> routing_;  // cumulative routing probabilities per type
};

/// Bid-price rule with the time-varying marginal values f_j(t,c) - f_j(t,c-1).
class MarginalAllocationPolicy final : public Policy {
 public:
  MarginalAllocationPolicy(const Instance& inst, SharedRewardFunctions rfs)
      : inst_(&inst), rfs_(std::move(rfs)) {}

  PolicyKind kind() const override { return PolicyKind::MarginalAllocation; }

  Decision decide(const PolicyState& state, std::size_t type, double t, Rng&) const override {
    const auto& rfs = *rfs_;
    return choose_max_margin_by(inst_->types[type].rewards, state.remaining,
                                [&](std::size_t j) { return rfs[j].marginal(t, state.remaining[j]); });
  }

 private:
  const Instance* inst_;
  SharedRewardFunctions rfs_;
};

/// Most-preferred available resource; rejects when the best reward is 0.
class GreedyPolicy final : public Policy {
 public:
  explicit GreedyPolicy(const Instance& inst) : inst_(&inst) {}

  PolicyKind kind() const override { return PolicyKind::Greedy; }

  Decision decide(const PolicyState& state, std::size_t type, double, Rng&) const override {
    const auto& r = inst_->types[type].rewards;
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < r.size(); ++j)
      if (state.remaining[j] > 0 && (!best || r[j] > r[*best])) best = j;
    if (best && r[*best] > 0.0) return Decision::assign(*best);
    return Decision::reject();
  }

 private:
  const Instance* inst_;
};

/// Static bid prices from the fluid LP's capacity duals.
class BidPricePolicy final : public Policy {
 public:
  BidPricePolicy(const Instance& inst, std::vector<double> prices) : inst_(&inst), prices_(std::move(prices)) {}

  PolicyKind kind() const override { return PolicyKind::BidPrice; }

  Decision decide(const PolicyState& state, std::size_t type, double, Rng&) const override {
    return choose_lowest_price(inst_->types[type].rewards, prices_, state.remaining);
  }

 private:
  const Instance* inst_;
  std::vector<double> prices_;
};

/// Everything a policy may depend on, computed once per instance.
struct PolicyContext {
  const Instance* instance = nullptr;
  FluidSolution fluid;
  SharedRewardFunctions reward_functions;

  static PolicyContext build(const Instance& inst, double dt = 0.0) {
    PolicyContext ctx;
    ctx.instance = &inst;
    ctx.fluid = solve_fluid(inst);
    ctx.reward_functions = share(compute_reward_functions(inst, ctx.fluid, dt));
    return ctx;
  }

  std::unique_ptr<Policy> make(PolicyKind kind) const {
    switch (kind) {
      case PolicyKind::Separation:
        return std::make_unique<SeparationPolicy>(*instance, fluid, reward_functions);
      case PolicyKind::MarginalAllocation:
        return std::make_unique<MarginalAllocationPolicy>(*instance, reward_functions);
      case PolicyKind::Greedy:
        return std::make_unique<GreedyPolicy>(*instance);
      case PolicyKind::BidPrice:
        return std::make_unique<BidPricePolicy>(*instance, fluid.capacity_duals);
    }
    throw std::logic_error("unknown policy kind");
  }
};

}  // namespace admit
