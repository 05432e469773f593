#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "admit/generators.hpp"
#include "admit/report.hpp"
#include "admit/sim.hpp"
#include "helpers.hpp"

using namespace admit;
using testing_support::constant_instance;

TEST(SampleArrivals, ZeroRatesGiveEmptySample) {
  const auto inst = constant_instance(1.0, {1}, {0.0}, {{1.0}});
  EXPECT_TRUE(sample_arrivals(inst, 1).events.empty());
}

TEST(SampleArrivals, SortedAndDeterministic) {
  const Instance inst = gen_random_instance({3, 5, 2, 2.0, 4});
  const auto a = sample_arrivals(inst, 77);
  const auto b = sample_arrivals(inst, 77);
  ASSERT_EQ(a.events.size(), b.events.size());
  for (std::size_t e = 0; e < a.events.size(); ++e) {
    EXPECT_EQ(a.events[e].time, b.events[e].time);
    EXPECT_EQ(a.events[e].type, b.events[e].type);
    if (e) { EXPECT_LE(a.events[e - 1].time, a.events[e].time); }
    EXPECT_GE(a.events[e].time, 0.0);
    EXPECT_LE(a.events[e].time, inst.horizon);
  }
}

TEST(SampleArrivals, PoissonMean) {
  const auto inst = constant_instance(1.0, {1}, {2.0}, {{1.0}});
  const int reps = 10000;
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) sum += static_cast<double>(sample_arrivals(inst, derive_seed(9, r)).events.size());
  EXPECT_NEAR(sum / reps, 2.0, 3 * std::sqrt(2.0 / reps));
}

TEST(SampleArrivals, PiecewiseCounts) {
  Instance inst = constant_instance(1.0, {1}, {1.0}, {{1.0}});
  inst.types[0].rate = RateFunction({{0.0, 0.5, 1.0}, {0.5, 1.0, 3.0}});
  const int reps = 10000;
  double first = 0.0, second = 0.0;
  for (int r = 0; r < reps; ++r)
    for (const auto& e : sample_arrivals(inst, derive_seed(10, r)).events) (e.time < 0.5 ? first : second) += 1.0;
  EXPECT_NEAR(first / reps, 0.5, 3 * std::sqrt(0.5 / reps));
  EXPECT_NEAR(second / reps, 1.5, 3 * std::sqrt(1.5 / reps));
}

TEST(RunReplication, EmptySampleGivesZero) {
  const auto inst = constant_instance(1.0, {1}, {1.0}, {{1.0}});
  const auto ctx = PolicyContext::build(inst);
  const auto p = ctx.make(PolicyKind::MarginalAllocation);
  EXPECT_EQ(run_replication(inst, *p, ArrivalSample{}, 0).reward, 0.0);
}

TEST(RunReplication, SingleArrivalIsAccepted) {
  const auto inst = constant_instance(1.0, {1}, {1.0}, {{0.7}});
  const auto ctx = PolicyContext::build(inst);
  const auto p = ctx.make(PolicyKind::MarginalAllocation);
  ArrivalSample s;
  s.events.push_back({0.999999, 0});
  const auto out = run_replication(inst, *p, s, 0, true);
  EXPECT_DOUBLE_EQ(out.reward, 0.7);
  ASSERT_EQ(out.trace.size(), 1u);
  EXPECT_EQ(out.trace[0].decision, Decision::assign(0));
}

TEST(RunReplication, DeterministicWithTrace) {
  const Instance inst = gen_random_instance({3, 4, 1, 1.0, 21});
  const auto ctx = PolicyContext::build(inst);
  const auto p = ctx.make(PolicyKind::Separation);
  const auto a = run_replication(inst, *p, 123, true);
  const auto b = run_replication(inst, *p, 123, true);
  EXPECT_EQ(a.reward, b.reward);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t e = 0; e < a.trace.size(); ++e) EXPECT_EQ(a.trace[e].decision, b.trace[e].decision);
  for (std::size_t j = 0; j < inst.num_resources(); ++j) EXPECT_LE(a.units_used[j], inst.resources[j].capacity);
}

TEST(RunExperiment, SingleReplicationMatchesRunReplication) {
  const Instance inst = gen_random_instance({3, 4, 2, 1.0, 2});
  const auto ctx = PolicyContext::build(inst);
  const std::vector<PolicyKind> kinds{PolicyKind::Separation, PolicyKind::MarginalAllocation, PolicyKind::Greedy,
                                      PolicyKind::BidPrice};
  ExperimentOptions opt;
  opt.n_reps = 1;
  opt.base_seed = 17;
  const auto res = run_experiment(ctx, kinds, opt);
  for (std::size_t p = 0; p < kinds.size(); ++p) {
    const auto policy = ctx.make(kinds[p]);
    EXPECT_EQ(res.policies[p].reps[0].reward, run_replication(inst, *policy, replication_seed(17, 0)).reward);
    EXPECT_DOUBLE_EQ(res.policies[p].ratio_to_fluid, res.policies[p].reward.mean / ctx.fluid.objective);
  }
}

TEST(RunExperiment, IndependentOfJobs) {
  const Instance inst = gen_random_instance({3, 4, 2, 1.0, 6});
  const auto ctx = PolicyContext::build(inst);
  const std::vector<PolicyKind> kinds{PolicyKind::Separation, PolicyKind::MarginalAllocation};
  ExperimentOptions opt;
  opt.n_reps = 50;
  opt.base_seed = 5;
  opt.offline = true;
  const auto serial = run_experiment(ctx, kinds, opt);
  opt.jobs = 4;
  const auto parallel = run_experiment(ctx, kinds, opt);
  std::ostringstream a, b;
  write_simulation_csv(a, serial);
  write_simulation_csv(b, parallel);
  EXPECT_EQ(a.str(), b.str());
}

TEST(RunExperiment, RejectsZeroReplications) {
  const Instance inst = gen_random_instance({2, 2, 1, 1.0, 6});
  const auto ctx = PolicyContext::build(inst);
  const std::vector<PolicyKind> kinds{PolicyKind::Greedy};
  ExperimentOptions opt;
  opt.n_reps = 0;
  EXPECT_THROW(run_experiment(ctx, kinds, opt), std::invalid_argument);
}

TEST(RunExperiment, SeparationRoutingMatchesFluidShares) {
  // One type, two resources, generous capacity so routing is never cut short.
  const auto inst = constant_instance(1.0, {40, 40}, {4.0}, {{1.0, 1.0}});
  const auto ctx = PolicyContext::build(inst);
  const SeparationPolicy sep(inst, ctx.fluid, ctx.reward_functions);
  std::vector<double> share0;
  for (std::uint64_t r = 0; r < 2000; ++r) {
    const auto out = run_replication(inst, sep, derive_seed(3, r));
    if (out.accepted > 0) share0.push_back(static_cast<double>(out.units_used[0]) / out.accepted);
  }
  const auto s = summarize(share0);
  EXPECT_NEAR(s.mean, ctx.fluid.x(0, 0) / 4.0, 3 * s.se + 1e-12);
}

TEST(Summary, MeanAndStandardError) {
  const std::vector<double> xs{1, 2, 3, 4};
  const auto s = summarize(xs);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}

TEST(SimulationCsv, ColumnCountsMatchHeader) {
  const Instance inst = gen_random_instance({2, 3, 1, 1.0, 1});
  const auto ctx = PolicyContext::build(inst);
  const std::vector<PolicyKind> kinds{PolicyKind::Greedy, PolicyKind::BidPrice};
  ExperimentOptions opt;
  opt.n_reps = 5;
  opt.offline = true;
  std::ostringstream os;
  write_simulation_csv(os, run_experiment(ctx, kinds, opt), "x.manifest.json");
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# manifest=x.manifest.json");
  std::getline(in, line);
  const auto cols = std::count(line.begin(), line.end(), ',');
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), cols) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 3 * 5 + 2 + 3);
}
