#pragma once

#include <cmath>
#include <vector>

#include "admit/model.hpp"
#include "admit/poisson.hpp"

namespace testing_support {

/// One resource per capacity, one type per (rate, rewards) row, all rates
/// constant on [0, horizon].
inline admit::Instance constant_instance(double horizon, const std::vector<int>& capacities,
                                         const std::vector<double>& rates,
                                         const std::vector<std::vector<double>>& rewards) {
  admit::Instance inst;
  inst.horizon = horizon;
  for (int c : capacities) inst.resources.push_back({c, std::nullopt});
  for (std::size_t i = 0; i < rates.size(); ++i)
    inst.types.push_back({admit::RateFunction::constant(rates[i], 0.0, horizon), rewards[i]});
  return inst;
}

/// Total-rate Lambda spread over one unit of time for a single resource.
inline admit::Instance single_resource(double lambda, int capacity, double reward = 1.0) {
  return constant_instance(1.0, {capacity}, {lambda}, {{reward}});
}

}  // namespace testing_support
