// admit: command-line front end for instance generation, policy simulation,
// competitive-ratio bounds, overbooking expansion and offline optima.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "admit/admit.hpp"

namespace {

using namespace admit;

constexpr const char* kToolVersion = "admit 1.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string basename_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << bytes;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

/// Collects provenance while a command runs; written next to the primary
/// output once every file is final.
struct Provenance {
  RunManifest m;
  std::vector<std::pair<std::string, std::string>> files;  // path, bytes

  void add(const std::string& path, std::string bytes) { files.emplace_back(path, std::move(bytes)); }

  void commit(const std::string& primary) {
    for (const auto& [path, bytes] : files) {
      write_file(path, bytes);
      m.outputs.emplace_back(path, sha256_hex(bytes));
    }
    m.timestamp = utc_now();
    write_file(manifest_path(primary), to_json(m).dump(2) + "\n");
  }
};

Provenance start(const std::vector<std::string>& args, const std::string& command) {
  Provenance p;
  p.m.tool_version = kToolVersion;
  p.m.argv = args;
  p.m.command = command;
  p.m.rng = std::string(kRngName);
  return p;
}

std::vector<PolicyKind> policies_from(const std::string& flag) {
  if (flag == "all")
    return {PolicyKind::Separation, PolicyKind::MarginalAllocation, PolicyKind::Greedy, PolicyKind::BidPrice};
  std::vector<PolicyKind> out;
  std::stringstream ss(flag);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto k = parse_policy(item);
    if (!k) throw UsageError("unknown policy '" + item + "' (expected separation, maa, greedy, bidprice or all)");
    out.push_back(*k);
  }
  if (out.empty()) throw UsageError("--policy must name at least one policy");
  return out;
}

std::vector<int> parse_counts(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw UsageError("--delta: '" + item + "' is not an integer");
    }
    if (used != item.size() || v < 0) throw UsageError("--delta: '" + item + "' is not a nonnegative integer");
    out.push_back(v);
  }
  return out;
}

nlohmann::json tolerances_json() {
  return {{"lp", kLpTolerance}, {"hjb_stability", kStabilityLimit}};
}

// --- gen -------------------------------------------------------------------

struct GenOptions {
  std::string kind = "random";
  std::string out;
  std::uint64_t seed = 0;
  RandomInstanceConfig random;
  ClinicConfig clinic;
};

void run_gen(const GenOptions& o, const std::vector<std::string>& args) {
  Instance inst;
  if (o.kind == "random") {
    auto cfg = o.random;
    cfg.seed = o.seed;
    inst = gen_random_instance(cfg);
  } else {
    auto cfg = o.clinic;
    cfg.seed = o.seed;
    inst = gen_clinic_instance(cfg);
  }
  const std::string text = dump_instance(inst);
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  auto prov = start(args, "gen");
  prov.m.base_seed = o.seed;
  prov.m.seed_rule = "generator seeded directly";
  prov.m.parameters = {{"kind", o.kind}};
  if (o.kind == "random")
    prov.m.parameters.update({{"n", o.random.n_resources},
                              {"m", o.random.m_types},
                              {"k", o.random.min_capacity},
                              {"horizon", o.random.horizon}});
  else
    prov.m.parameters.update({{"weeks", o.clinic.weeks},
                              {"sessions", o.clinic.sessions_per_week},
                              {"capacity", o.clinic.capacity},
                              {"availability", o.clinic.availability},
                              {"load", o.clinic.load}});
  prov.add(o.out, text);
  prov.commit(o.out);
}

// --- simulate ----------------------------------------------------------------

struct SimulateOptions {
  std::string instance;
  std::string policy = "all";
  std::size_t reps = 100;
  std::uint64_t seed = 0;
  bool offline = false;
  std::string out;
  unsigned jobs = 1;
  double dt = 0.0;
  std::string dump_hjb;
};

constexpr const char* kSeedRule = "replication r uses derive_seed(base_seed, r); arrivals from that seed, "
                                  "policy draws from derive_seed(seed_r, 0, 1)";

void run_simulate(const SimulateOptions& o, const std::vector<std::string>& args) {
  const auto kinds = policies_from(o.policy);
  const Instance inst = load_instance(o.instance);
  const PolicyContext ctx = PolicyContext::build(inst, o.dt);

  ExperimentOptions opt;
  opt.n_reps = o.reps;
  opt.base_seed = o.seed;
  opt.jobs = o.jobs;
  opt.offline = o.offline;
  const SimulationResult res = run_experiment(ctx, kinds, opt);

  auto prov = start(args, "simulate");
  prov.m.base_seed = o.seed;
  prov.m.seed_rule = kSeedRule;
  for (const auto& rf : *ctx.reward_functions) prov.m.grid_steps.push_back(rf.step());
  prov.m.tolerances = tolerances_json();
  prov.m.parameters = {{"instance", o.instance},
                       {"instance_sha256", sha256_hex(read_file(o.instance))},
                       {"policy", o.policy},
                       {"reps", o.reps},
                       {"offline", o.offline}};

  std::ostringstream csv;
  write_simulation_csv(csv, res, o.out.empty() ? std::string() : basename_of(manifest_path(o.out)));
  if (!o.dump_hjb.empty()) {
    std::ostringstream hjb;
    write_reward_csv(hjb, *ctx.reward_functions);
    if (o.out.empty())
      write_file(o.dump_hjb, hjb.str());
    else
      prov.add(o.dump_hjb, hjb.str());
  }
  if (o.out.empty()) {
    std::cout << csv.str();
    return;
  }
  prov.add(o.out, csv.str());
  prov.commit(o.out);
}

// --- bound -------------------------------------------------------------------

struct BoundOptions {
  int k = 2;
  int kmax = 0;
  double h = 0.0;
  double tol = 1e-12;
  std::string out;
  unsigned jobs = 1;
};

void run_bound(const BoundOptions& o, const std::vector<std::string>& args) {
  const int first = o.k;
  const int last = std::max(o.k, o.kmax);
  if (o.h > 1e-3) throw UsageError("--h must be at most 1e-3");
  std::vector<BoundReport> rows(static_cast<std::size_t>(last - first + 1));

  std::atomic<int> next{first};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k > last) return;
      try {
        rows[k - first] = analyze_bound(k, o.h, o.tol);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = last + 1;
        return;
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(o.jobs, static_cast<unsigned>(rows.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < jobs; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::ostringstream csv;
  write_bounds_csv(csv, rows, o.out.empty() ? std::string() : basename_of(manifest_path(o.out)));
  if (o.out.empty()) {
    std::cout << csv.str();
    return;
  }
  auto prov = start(args, "bound");
  prov.m.seed_rule = "deterministic";
  for (const auto& r : rows) prov.m.grid_steps.push_back(r.result.step);
  prov.m.tolerances = {{"bisection_residual", o.tol}};
  prov.m.parameters = {{"k", first}, {"kmax", last}};
  prov.add(o.out, csv.str());
  prov.commit(o.out);
}

// --- overbook ----------------------------------------------------------------

struct OverbookOptions {
  std::string instance;
  double p = kClinicNoShowProbability;
  double d = 1.0;
  int kmax = 0;
  std::string out;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::string policy = "all";
  unsigned jobs = 1;
  double dt = 0.0;
};

void run_overbook(const OverbookOptions& o, const std::vector<std::string>& args) {
  const Instance inst = load_instance(o.instance);
  const ExpandedInstance ex = expand_instance(inst, OverbookSpec::uniform(inst.num_resources(), o.p, o.d, o.kmax));

  auto prov = start(args, "overbook");
  prov.m.base_seed = o.seed;
  prov.m.parameters = {{"instance", o.instance}, {"p", o.p}, {"d", o.d}, {"kmax", o.kmax}, {"reps", o.reps}};
  prov.m.tolerances = tolerances_json();
  const std::string ref = basename_of(manifest_path(o.out));
  prov.add(o.out, dump_instance(ex.instance));
  std::ostringstream slots;
  write_slots_csv(slots, ex, ref);
  prov.add(o.out + ".slots.csv", slots.str());

  if (o.reps > 0) {
    const auto kinds = policies_from(o.policy);
    const PolicyContext ctx = PolicyContext::build(ex.instance, o.dt);
    ExperimentOptions opt;
    opt.n_reps = o.reps;
    opt.base_seed = o.seed;
    opt.jobs = o.jobs;
    opt.net_metric = [&ex](const ReplicationOutcome& out) { return account(ex, out).net; };
    const SimulationResult res = run_experiment(ctx, kinds, opt);
    prov.m.seed_rule = kSeedRule;
    for (const auto& rf : *ctx.reward_functions) prov.m.grid_steps.push_back(rf.step());
    std::ostringstream csv;
    write_simulation_csv(csv, res, ref);
    prov.add(o.out + ".sim.csv", csv.str());
  } else {
    prov.m.seed_rule = "unused";
  }
  prov.commit(o.out);
}

// --- offline-opt -------------------------------------------------------------

struct OfflineOptions {
  std::string instance;
  std::string delta;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::string out;
};

void run_offline(const OfflineOptions& o, const std::vector<std::string>& args) {
  const Instance inst = load_instance(o.instance);
  std::ostringstream text;
  if (!o.delta.empty()) {
    const auto delta = parse_counts(o.delta);
    if (delta.size() != inst.num_types())
      throw UsageError("--delta needs " + std::to_string(inst.num_types()) + " counts, got " +
                       std::to_string(delta.size()));
    const auto sol = solve_offline(inst, delta);
    text << "type,resource,x\n";
    for (std::size_t i = 0; i < inst.num_types(); ++i)
      for (std::size_t j = 0; j < inst.num_resources(); ++j)
        if (sol.x(i, j) != 0.0) text << i << ',' << j << ',' << fmt9(sol.x(i, j)) << '\n';
    text << "objective,," << fmt9(sol.objective) << '\n';
  } else {
    if (o.reps == 0) throw UsageError("offline-opt needs --delta or --reps");
    std::vector<double> opts;
    if (!o.out.empty()) write_manifest_ref(text, basename_of(manifest_path(o.out)));
    text << kOfflineHeader << '\n';
    for (std::size_t r = 0; r < o.reps; ++r) {
      const auto seed = replication_seed(o.seed, r);
      const auto sample = sample_arrivals(inst, ReplicationSeeds::from(seed).arrivals);
      const double v = solve_offline(inst, sample.counts(inst.num_types())).objective;
      opts.push_back(v);
      text << r << ',' << seed << ',' << sample.events.size() << ',' << fmt9(v) << '\n';
    }
    const auto s = summarize(opts);
    text << "# mean=" << fmt9(s.mean) << " se=" << fmt9(s.se) << " fluid_ub=" << fmt9(solve_fluid(inst).objective)
         << '\n';
  }
  if (o.out.empty()) {
    std::cout << text.str();
    return;
  }
  auto prov = start(args, "offline-opt");
  prov.m.base_seed = o.seed;
  prov.m.seed_rule = kSeedRule;
  prov.m.tolerances = tolerances_json();
  prov.m.parameters = {{"instance", o.instance}, {"delta", o.delta}, {"reps", o.reps}};
  prov.add(o.out, text.str());
  prov.commit(o.out);
}

int run(std::vector<std::string> args);

int replay(const std::string& path) {
  const RunManifest m = manifest_from_json(nlohmann::json::parse(read_file(path)));
  if (m.argv.empty()) throw ParseError("manifest: empty argv");
  return run(m.argv);
}

int run(std::vector<std::string> args) {
  CLI::App app{"Online advance admission scheduling: simulation, bounds and overbooking"};
  app.name(args.empty() ? "admit" : basename_of(args.front()));
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate a random or clinic-style instance (JSON)");
  g->add_option("--kind", gen.kind, "Generator")->check(CLI::IsMember({"random", "clinic"}));
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--out", gen.out, "Output file (stdout if omitted)");
  g->add_option("--n", gen.random.n_resources, "random: number of resources")->check(CLI::PositiveNumber);
  g->add_option("--m", gen.random.m_types, "random: number of customer types")->check(CLI::PositiveNumber);
  g->add_option("--k", gen.random.min_capacity, "random: minimum capacity")->check(CLI::PositiveNumber);
  g->add_option("--horizon", gen.random.horizon, "random: horizon T")->check(CLI::PositiveNumber);
  g->add_option("--weeks", gen.clinic.weeks, "clinic: number of weeks")->check(CLI::PositiveNumber);
  g->add_option("--sessions", gen.clinic.sessions_per_week, "clinic: sessions per week")->check(CLI::Range(1, 14));
  g->add_option("--capacity", gen.clinic.capacity, "clinic: capacity per session")->check(CLI::PositiveNumber);
  g->add_option("--availability", gen.clinic.availability, "clinic: probability a patient can attend a session");
  g->add_option("--load", gen.clinic.load, "clinic: expected arrivals per unit of capacity")->check(CLI::PositiveNumber);

  SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "Simulate policies with common random numbers (CSV)");
  s->add_option("--instance", sim.instance, "Instance JSON")->required();
  s->add_option("--policy", sim.policy, "separation, maa, greedy, bidprice, a comma list, or all");
  s->add_option("--reps", sim.reps, "Replications")->check(CLI::PositiveNumber);
  s->add_option("--seed", sim.seed, "Base seed");
  s->add_flag("--offline", sim.offline, "Also solve the offline optimum per replication");
  s->add_option("--out", sim.out, "Output CSV (stdout if omitted)");
  s->add_option("--jobs", sim.jobs, "Worker threads")->check(CLI::PositiveNumber);
  s->add_option("--dt", sim.dt, "Reward-function time step (0 = automatic)")->check(CLI::NonNegativeNumber);
  s->add_option("--dump-hjb", sim.dump_hjb, "Write reward-function grids to this CSV");

  BoundOptions bnd;
  auto* b = app.add_subcommand("bound", "Competitive-ratio lower bound beta*(k) and closed forms (CSV)");
  b->set_help_flag("--help", "Print this help message and exit");  // frees -h for the step size
  b->add_option("--k", bnd.k, "Minimum capacity k")->check(CLI::Range(1, 100000));
  b->add_option("--kmax", bnd.kmax, "Scan k..kmax")->check(CLI::Range(1, 100000));
  b->add_option("--h", bnd.h, "ODE step (0 = min(1e-3, 1e-4 k))")->check(CLI::NonNegativeNumber);
  b->add_option("--tol", bnd.tol, "Bisection residual tolerance")->check(CLI::PositiveNumber);
  b->add_option("--out", bnd.out, "Output CSV (stdout if omitted)");
  b->add_option("--jobs", bnd.jobs, "Worker threads")->check(CLI::PositiveNumber);

  OverbookOptions ob;
  auto* o = app.add_subcommand("overbook", "Expand an instance with overbooked virtual slots");
  o->add_option("--instance", ob.instance, "Instance JSON")->required();
  o->add_option("--p", ob.p, "No-show probability")->check(CLI::Range(0.0, 0.999999999));
  o->add_option("--d", ob.d, "Denial cost")->check(CLI::NonNegativeNumber);
  o->add_option("--kmax", ob.kmax, "Virtual slots per resource")->check(CLI::NonNegativeNumber);
  o->add_option("--out", ob.out, "Expanded instance JSON; also writes <out>.slots.csv")->required();
  o->add_option("--reps", ob.reps, "If > 0, simulate the expanded instance into <out>.sim.csv");
  o->add_option("--seed", ob.seed, "Base seed for --reps");
  o->add_option("--policy", ob.policy, "Policies for --reps");
  o->add_option("--jobs", ob.jobs, "Worker threads")->check(CLI::PositiveNumber);
  o->add_option("--dt", ob.dt, "Reward-function time step (0 = automatic)")->check(CLI::NonNegativeNumber);

  OfflineOptions off;
  auto* f = app.add_subcommand("offline-opt", "Offline optimum for given or sampled arrival counts");
  f->add_option("--instance", off.instance, "Instance JSON")->required();
  f->add_option("--delta", off.delta, "Comma-separated arrival count per type");
  f->add_option("--reps", off.reps, "Sample this many replications instead");
  f->add_option("--seed", off.seed, "Base seed for --reps");
  f->add_option("--out", off.out, "Output CSV (stdout if omitted)");

  std::string manifest;
  auto* rp = app.add_subcommand("replay", "Rerun the command recorded in a manifest");
  rp->add_option("manifest", manifest, "Manifest JSON")->required();

  std::vector<const char*> cargv;
  std::vector<std::string> storage = args.empty() ? std::vector<std::string>{"admit"} : args;
  for (const auto& a : storage) cargv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (g->parsed()) run_gen(gen, storage);
    if (s->parsed()) run_simulate(sim, storage);
    if (b->parsed()) run_bound(bnd, storage);
    if (o->parsed()) run_overbook(ob, storage);
    if (f->parsed()) run_offline(off, storage);
    if (rp->parsed()) return replay(manifest);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const InvalidInstance& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  args.front() = "admit";
  return run(args);
}
