#pragma once

// Overbooking as capacity expansion. The k-th overbooked unit of resource j
// costs, in expectation,
//
//   o_j(k) = D_j (1 - p_j) P[Binomial(C_j + k - 1, p_j) <= k - 1]
//
// (at most k-1 no-shows among those already booked, and the new customer
// shows). Each such unit becomes a unit-capacity virtual slot whose reward is
// r_ij - o_j(k), floored at 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "admit/model.hpp"
#include "admit/sim.hpp"

namespace admit {

/// The no-show fraction reported for the clinic data set.
inline constexpr double kClinicNoShowProbability = 0.2689;

/// Binomial(n, p) probability mass at l. Boost evaluates it through the
/// incomplete-beta derivative, which keeps full relative accuracy for large n
/// where a log-gamma difference would not.
inline double binomial_pmf(int n, int l, double p) {
  if (l < 0 || l > n) return 0.0;
  if (p <= 0.0) return l == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return l == n ? 1.0 : 0.0;
  return boost::math::pdf(boost::math::binomial_distribution<double>(n, p), l);
}

/// The binomial lower tail is built up from k = 1 by
///   P[Bin(n+1, p) <= k] = P[Bin(n, p) <= k-1] + (1-p) P[Bin(n, p) = k],
/// so every step adds a nonnegative term and the result is nondecreasing in
/// k even in floating point.
inline double overbook_cost(int capacity, int k, double p, double denial_cost) {
  if (k < 1) throw std::invalid_argument("overbook_cost: k must be >= 1");
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("overbook_cost: no-show probability must be in [0, 1)");
  double tail = binomial_pmf(capacity, 0, p);
  for (int m = 2; m <= k; ++m) tail += (1.0 - p) * binomial_pmf(capacity + m - 2, m - 1, p);
  return denial_cost * (1.0 - p) * std::min(1.0, tail);
}

/// Sum of o_j(1..b).
inline double cumulative_overbook_cost(int capacity, int b, double p, double denial_cost) {
  double total = 0.0;
  for (int k = 1; k <= b; ++k) total += overbook_cost(capacity, k, p, denial_cost);
  return total;
}

struct OverbookTerms {
  double no_show = 0.0;      // p_j
  double denial_cost = 0.0;  // D_j
  int max_virtual = 0;       // K_max
};

struct OverbookSpec {
  std::vector<OverbookTerms> resources;

  static OverbookSpec uniform(std::size_t n, double p, double d, int kmax) {
    return {std::vector<OverbookTerms>(n, OverbookTerms{p, d, kmax})};
  }
};

/// Provenance of one expanded resource.
struct Slot {
  std::size_t source = 0;  // original resource
  int virtual_index = 0;   // 0 for the regular capacity, k >= 1 for virtual slots
  double cost = 0.0;       // o_j(k); 0 for regular capacity
};

struct ExpandedInstance {
  Instance instance;
  std::vector<Slot> slots;      // parallel to instance.resources
  Instance original;
  OverbookSpec spec;
};

/// Slots are grouped per original resource: the regular capacity first, then
/// virtual slots in increasing k, so lowest-index tie-breaking fills in order.
inline ExpandedInstance expand_instance(const Instance& inst, const OverbookSpec& spec) {
  if (spec.resources.size() != inst.num_resources())
    throw std::invalid_argument("expand_instance: spec must cover every resource");
  for (const auto& t : spec.resources) {
    if (!(t.no_show >= 0.0 && t.no_show < 1.0)) throw std::invalid_argument("expand_instance: p must be in [0, 1)");
    if (!(t.denial_cost >= 0.0) || !std::isfinite(t.denial_cost))
      throw std::invalid_argument("expand_instance: denial cost must be finite and >= 0");
    if (t.max_virtual < 0) throw std::invalid_argument("expand_instance: K_max must be >= 0");
  }

  ExpandedInstance out;
  out.original = inst;
  out.spec = spec;
  out.instance.horizon = inst.horizon;
  for (auto& type : inst.types) out.instance.types.push_back({type.rate, {}});

  for (std::size_t j = 0; j < inst.num_resources(); ++j) {
    const auto& res = inst.resources[j];
    const auto& terms = spec.resources[j];
    out.instance.resources.push_back(res);
    out.slots.push_back({j, 0, 0.0});
    for (std::size_t i = 0; i < inst.num_types(); ++i) out.instance.types[i].rewards.push_back(inst.reward(i, j));

    for (int k = 1; k <= terms.max_virtual; ++k) {
      const double cost = overbook_cost(res.capacity, k, terms.no_show, terms.denial_cost);
      out.instance.resources.push_back({1, res.expiry});
      out.slots.push_back({j, k, cost});
      for (std::size_t i = 0; i < inst.num_types(); ++i)
        out.instance.types[i].rewards.push_back(std::max(0.0, inst.reward(i, j) - cost));
    }
  }
  return out;
}

struct OverbookAccounting {
  double gross = 0.0;           // sum of original r_ij over accepted customers
  double overbook_cost = 0.0;   // sum_j sum_{k <= b_j} o_j(k)
  double net = 0.0;             // gross - overbook_cost
  std::vector<int> virtual_used;  // b_j per original resource
};

/// Net reward of a traced replication on the expanded instance.
inline OverbookAccounting account(const ExpandedInstance& ex, const ReplicationOutcome& out) {
  OverbookAccounting acc;
  acc.virtual_used.assign(ex.original.num_resources(), 0);
  for (const auto& e : out.trace) {
    if (!e.decision.accepted()) continue;
    const Slot& slot = ex.slots[*e.decision.resource];
    acc.gross += ex.original.reward(e.type, slot.source);
  }
  for (std::size_t s = 0; s < ex.slots.size(); ++s)
    if (ex.slots[s].virtual_index > 0) acc.virtual_used[ex.slots[s].source] += out.units_used[s];
  for (std::size_t j = 0; j < acc.virtual_used.size(); ++j) {
    const auto& t = ex.spec.resources[j];
    acc.overbook_cost += cumulative_overbook_cost(ex.original.resources[j].capacity, acc.virtual_used[j], t.no_show,
                                                  t.denial_cost);
  }
  acc.net = acc.gross - acc.overbook_cost;
  return acc;
}

}  // namespace admit
