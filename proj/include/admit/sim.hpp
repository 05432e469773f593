#pragma once

// Sample-path simulation: exact piecewise Poisson sampling of arrivals,
// event-by-event policy execution, and replicated experiments with common
// random numbers across policies.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "admit/lp.hpp"
#include "admit/model.hpp"
#include "admit/policies.hpp"
#include "admit/rng.hpp"

namespace admit {

/// Per type and rate piece: a Poisson(rate * length) count of uniform times
/// inside the piece. Events are sorted by time, then type index.
inline ArrivalSample sample_arrivals(const Instance& inst, std::uint64_t seed) {
  Rng rng(seed);
  ArrivalSample sample;
  sample.seed = seed;
  for (std::size_t i = 0; i < inst.num_types(); ++i) {
    for (const auto& piece : inst.types[i].rate.pieces()) {
      const double mean = piece.mass();
      if (!(mean > 0.0)) continue;
      const long count = std::poisson_distribution<long>(mean)(rng);
      std::uniform_real_distribution<double> when(piece.t_start, piece.t_end);
      for (long q = 0; q < count; ++q) sample.events.push_back({when(rng), i});
    }
  }
  std::sort(sample.events.begin(), sample.events.end(), [](const Arrival& a, const Arrival& b) {
    return a.time < b.time || (a.time == b.time && a.type < b.type);
  });
  return sample;
}

struct TraceEntry {
  double time = 0.0;
  std::size_t type = 0;
  Decision decision;
  double reward = 0.0;
};

struct ReplicationOutcome {
  double reward = 0.0;
  int accepted = 0;
  int arrivals = 0;
  std::vector<int> units_used;  // per resource
  std::vector<int> arrivals_by_type;
  std::vector<TraceEntry> trace;
  double net_reward = 0.0;  // equals reward unless an accounting hook is set
};

/// Seeds used by one replication: arrivals and the policy's own draws come
/// from separate streams so that every policy replays the same arrivals.
struct ReplicationSeeds {
  std::uint64_t arrivals = 0;
  std::uint64_t routing = 0;

  static ReplicationSeeds from(std::uint64_t seed) { return {seed, derive_seed(seed, 0, 1)}; }
};

inline ReplicationOutcome run_replication(const Instance& inst, const Policy& policy, const ArrivalSample& sample,
                                          std::uint64_t routing_seed, bool record_trace = false) {
  Rng rng(routing_seed);
  PolicyState state;
  state.remaining.resize(inst.num_resources());
  for (std::size_t j = 0; j < inst.num_resources(); ++j) state.remaining[j] = inst.resources[j].capacity;

  ReplicationOutcome out;
  out.units_used.assign(inst.num_resources(), 0);
  out.arrivals_by_type = sample.counts(inst.num_types());
  out.arrivals = static_cast<int>(sample.events.size());
  for (const auto& e : sample.events) {
    state.clock = e.time;
    const Decision d = policy.decide(state, e.type, e.time, rng);
    double gained = 0.0;
    if (d.accepted()) {
      const std::size_t j = *d.resource;
      if (state.remaining[j] <= 0) throw std::logic_error("policy assigned an exhausted resource");
      --state.remaining[j];
      ++out.units_used[j];
      ++out.accepted;
      gained = inst.reward(e.type, j);
      out.reward += gained;
    }
    if (record_trace) out.trace.push_back({e.time, e.type, d, gained});
  }
  out.net_reward = out.reward;
  return out;
}

inline ReplicationOutcome run_replication(const Instance& inst, const Policy& policy, std::uint64_t seed,
                                          bool record_trace = false) {
  const auto seeds = ReplicationSeeds::from(seed);
  return run_replication(inst, policy, sample_arrivals(inst, seeds.arrivals), seeds.routing, record_trace);
}

struct Summary {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
  std::size_t n = 0;
};

inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / static_cast<double>(s.n - 1) / static_cast<double>(s.n));
  }
  return s;
}

/// Summary of the paired differences a - b.
inline Summary summarize_difference(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t r = 0; r < a.size(); ++r) d[r] = a[r] - b[r];
  return summarize(d);
}

struct PolicyRun {
  PolicyKind kind = PolicyKind::MarginalAllocation;
  std::vector<ReplicationOutcome> reps;
  Summary reward;
  Summary net_reward;
  double ratio_to_fluid = 0.0;

  std::vector<double> rewards() const {
    std::vector<double> out;
    for (const auto& r : reps) out.push_back(r.reward);
    return out;
  }
};

struct SimulationResult {
  std::size_t n_reps = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::uint64_t> seeds;  // per replication
  double fluid_upper_bound = 0.0;
  double separation_expected = 0.0;  // sum_j f_j(0, C_j)
  std::vector<PolicyRun> policies;
  std::vector<double> offline;  // OPT(delta) per replication, when requested
  Summary offline_summary;

  const PolicyRun* find(PolicyKind k) const {
    for (const auto& p : policies)
      if (p.kind == k) return &p;
    return nullptr;
  }
};

struct ExperimentOptions {
  std::size_t n_reps = 100;
  std::uint64_t base_seed = 0;
  unsigned jobs = 1;
  bool offline = false;
  // Optional per-replication accounting (e.g. net of overbooking cost); the
  // replication is run with a trace when set.
  std::function<double(const ReplicationOutcome&)> net_metric;
};

inline std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t r) { return derive_seed(base_seed, r); }

/// Replication r uses seed derive_seed(base_seed, r) for every policy. The
/// result is independent of `jobs`: each slot is written only by its
/// replication.
inline SimulationResult run_experiment(const PolicyContext& ctx, std::span<const PolicyKind> kinds,
                                       const ExperimentOptions& opt) {
  if (opt.n_reps < 1) throw std::invalid_argument("run_experiment: n_reps must be >= 1");
  const Instance& inst = *ctx.instance;

  SimulationResult res;
  res.n_reps = opt.n_reps;
  res.base_seed = opt.base_seed;
  res.fluid_upper_bound = ctx.fluid.objective;
  res.separation_expected = separation_expected_reward(*ctx.reward_functions);
  res.seeds.resize(opt.n_reps);
  for (std::size_t r = 0; r < opt.n_reps; ++r) res.seeds[r] = replication_seed(opt.base_seed, r);

  std::vector<std::unique_ptr<Policy>> policies;
  for (auto k : kinds) {
    policies.push_back(ctx.make(k));
    PolicyRun run;
    run.kind = k;
    run.reps.resize(opt.n_reps);
    res.policies.push_back(std::move(run));
  }
  if (opt.offline) res.offline.assign(opt.n_reps, 0.0);

  auto one = [&](std::size_t r) {
    const auto seeds = ReplicationSeeds::from(res.seeds[r]);
    const ArrivalSample sample = sample_arrivals(inst, seeds.arrivals);
    const bool trace = static_cast<bool>(opt.net_metric);
    for (std::size_t p = 0; p < policies.size(); ++p) {
      ReplicationOutcome out = run_replication(inst, *policies[p], sample, seeds.routing, trace);
      if (trace) {
        out.net_reward = opt.net_metric(out);
        out.trace.clear();
        out.trace.shrink_to_fit();
      }
      res.policies[p].reps[r] = std::move(out);
    }
    if (opt.offline) {
      const auto delta = sample.counts(inst.num_types());
      res.offline[r] = solve_offline(inst, delta).objective;
    }
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(opt.n_reps)));
  if (jobs == 1) {
    for (std::size_t r = 0; r < opt.n_reps; ++r) one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          const std::size_t r = next.fetch_add(1);
          if (r >= opt.n_reps) return;
          try {
            one(r);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = opt.n_reps;
            return;
          }
        }
      });
    }
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  for (auto& run : res.policies) {
    std::vector<double> gross, net;
    for (const auto& o : run.reps) {
      gross.push_back(o.reward);
      net.push_back(o.net_reward);
    }
    run.reward = summarize(gross);
    run.net_reward = summarize(net);
    run.ratio_to_fluid = res.fluid_upper_bound > 0.0 ? run.reward.mean / res.fluid_upper_bound : 0.0;
  }
  if (opt.offline) res.offline_summary = summarize(res.offline);
  return res;
}

}  // namespace admit
