#pragma once

// CSV writers and run manifests. Numbers are written with 9 significant
// digits in the C locale; columns are fixed per file kind.

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "admit/bounds.hpp"
#include "admit/instance_io.hpp"
#include "admit/overbook.hpp"
#include "admit/sim.hpp"

namespace admit {

inline std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline constexpr const char* kSimulationHeader =
    "record,policy,replication,seed,reward,accepted,arrivals,net_reward,se,ratio_to_fluid_ub";
inline constexpr const char* kBoundsHeader =
    "k,beta_star,closed_form,asymptotic,max_dual_residual,lemma_residual,barrier_times";
inline constexpr const char* kSlotsHeader = "slot,resource,virtual_index,cost";
inline constexpr const char* kOfflineHeader = "replication,seed,arrivals,opt";

inline void write_manifest_ref(std::ostream& os, const std::string& manifest) {
  if (!manifest.empty()) os << "# manifest=" << manifest << '\n';
}

/// One `rep` row per (policy, replication) in replication order, then one
/// `summary` row per policy and for the fluid bound, the predicted
/// routing-plus-admission reward, and (when computed) the offline optimum.
inline void write_simulation_csv(std::ostream& os, const SimulationResult& res, const std::string& manifest = {}) {
  write_manifest_ref(os, manifest);
  os << kSimulationHeader << '\n';
  const double ub = res.fluid_upper_bound;
  auto ratio = [ub](double v) { return ub > 0.0 ? fmt9(v / ub) : std::string(); };
  for (const auto& run : res.policies) {
    for (std::size_t r = 0; r < run.reps.size(); ++r) {
      const auto& o = run.reps[r];
      os << "rep," << policy_name(run.kind) << ',' << r << ',' << res.seeds[r] << ',' << fmt9(o.reward) << ','
         << o.accepted << ',' << o.arrivals << ',' << fmt9(o.net_reward) << ",," << '\n';
    }
  }
  if (!res.offline.empty())
    for (std::size_t r = 0; r < res.offline.size(); ++r)
      os << "rep,offline," << r << ',' << res.seeds[r] << ',' << fmt9(res.offline[r]) << ",,,,," << '\n';

  for (const auto& run : res.policies) {
    double acc = 0.0, arr = 0.0;
    for (const auto& o : run.reps) {
      acc += o.accepted;
      arr += o.arrivals;
    }
    const double n = static_cast<double>(run.reps.size());
    os << "summary," << policy_name(run.kind) << ",," << ',' << fmt9(run.reward.mean) << ',' << fmt9(acc / n) << ','
       << fmt9(arr / n) << ',' << fmt9(run.net_reward.mean) << ',' << fmt9(run.reward.se) << ','
       << ratio(run.reward.mean) << '\n';
  }
  os << "summary,fluid_ub,,," << fmt9(ub) << ",,,,," << ratio(ub) << '\n';
  os << "summary,hjb_separation,,," << fmt9(res.separation_expected) << ",,,,," << ratio(res.separation_expected)
     << '\n';
  if (!res.offline.empty())
    os << "summary,offline,,," << fmt9(res.offline_summary.mean) << ",,,," << fmt9(res.offline_summary.se) << ','
       << ratio(res.offline_summary.mean) << '\n';
}

inline void write_bounds_csv(std::ostream& os, const std::vector<BoundReport>& rows, const std::string& manifest = {}) {
  write_manifest_ref(os, manifest);
  os << kBoundsHeader << '\n';
  for (const auto& r : rows) {
    os << r.result.k << ',' << fmt9(r.result.beta_star) << ',' << fmt9(r.closed_form) << ',' << fmt9(r.asymptotic)
       << ',' << fmt9(r.dual.max_violation) << ',' << fmt9(r.lemma.lemma) << ',';
    for (std::size_t i = 0; i < r.result.barriers.size(); ++i)
      os << (i ? ";" : "") << fmt9(r.result.barriers[i]);
    os << '\n';
  }
}

inline void write_slots_csv(std::ostream& os, const ExpandedInstance& ex, const std::string& manifest = {}) {
  write_manifest_ref(os, manifest);
  os << kSlotsHeader << '\n';
  for (std::size_t s = 0; s < ex.slots.size(); ++s)
    os << s << ',' << ex.slots[s].source << ',' << ex.slots[s].virtual_index << ',' << fmt9(ex.slots[s].cost) << '\n';
}

/// Provenance for one CLI invocation.
struct RunManifest {
  int schema_version = kInstanceSchemaVersion;
  std::string tool_version;
  std::vector<std::string> argv;
  std::string command;
  std::uint64_t base_seed = 0;
  std::string seed_rule;  // how per-replication seeds derive from base_seed
  std::string rng;
  std::vector<double> grid_steps;
  nlohmann::json tolerances = nlohmann::json::object();
  nlohmann::json parameters = nlohmann::json::object();
  std::string timestamp;
  std::vector<std::pair<std::string, std::string>> outputs;  // path, sha256

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

inline nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json j;
  j["schema_version"] = m.schema_version;
  j["tool_version"] = m.tool_version;
  j["argv"] = m.argv;
  j["command"] = m.command;
  j["base_seed"] = m.base_seed;
  j["seed_rule"] = m.seed_rule;
  j["rng"] = m.rng;
  j["grid_steps"] = m.grid_steps;
  j["tolerances"] = m.tolerances;
  j["parameters"] = m.parameters;
  j["timestamp"] = m.timestamp;
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& [path, digest] : m.outputs) outs.push_back({{"path", path}, {"sha256", digest}});
  j["outputs"] = outs;
  return j;
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.schema_version = j.at("schema_version").get<int>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.command = j.at("command").get<std::string>();
    m.base_seed = j.at("base_seed").get<std::uint64_t>();
    m.seed_rule = j.at("seed_rule").get<std::string>();
    m.rng = j.at("rng").get<std::string>();
    m.grid_steps = j.at("grid_steps").get<std::vector<double>>();
    m.tolerances = j.at("tolerances");
    m.parameters = j.at("parameters");
    m.timestamp = j.at("timestamp").get<std::string>();
    for (const auto& o : j.at("outputs")) m.outputs.emplace_back(o.at("path").get<std::string>(), o.at("sha256").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  if (m.schema_version != kInstanceSchemaVersion)
    throw ParseError("manifest: unsupported schema_version " + std::to_string(m.schema_version));
  return m;
}

}  // namespace admit
