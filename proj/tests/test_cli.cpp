#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "admit/report.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "admit_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CliRun cli(const std::string& args) {
  const fs::path out = scratch() / "stdout.txt";
  const std::string cmd = std::string(ADMIT_CLI) + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::ostringstream buf;
  buf << in.rdbuf();
  r.out = buf.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string path(const std::string& name) { return (scratch() / name).string(); }

}  // namespace

TEST(Cli, HelpListsSubcommands) {
  const auto r = cli("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"gen", "simulate", "bound", "overbook", "offline-opt"})
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  EXPECT_EQ(cli("simulate --help").code, 0);
}

TEST(Cli, UnknownFlagIsUsageError) { EXPECT_EQ(cli("bound --frobnicate").code, 1); }

TEST(Cli, GenIsDeterministic) {
  ASSERT_EQ(cli("gen --seed 7 --out " + path("g1.json")).code, 0);
  ASSERT_EQ(cli("gen --seed 7 --out " + path("g2.json")).code, 0);
  EXPECT_EQ(slurp(path("g1.json")), slurp(path("g2.json")));
  EXPECT_TRUE(fs::exists(path("g1.json.manifest.json")));
}

TEST(Cli, BoundPrintsBetaStar) {
  const auto r = cli("bound --k 2");
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream in(r.out);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, admit::kBoundsHeader);
  const double beta = std::stod(row.substr(row.find(',') + 1));
  EXPECT_NEAR(beta, 0.615, 1e-3);
}

TEST(Cli, SimulateZeroRepsIsUsageError) {
  ASSERT_EQ(cli("gen --seed 1 --out " + path("z.json")).code, 0);
  EXPECT_EQ(cli("simulate --instance " + path("z.json") + " --reps 0").code, 1);
  EXPECT_EQ(cli("simulate --instance " + path("z.json") + " --policy bogus").code, 1);
}

TEST(Cli, InvalidInstanceIsDataError) {
  std::ofstream(path("bad.json")) << R"({"version":1,"horizon":1,"resources":[{"capacity":0}],)"
                                      R"("types":[{"rate_pieces":[[0,1,1]],"rewards":[1]}]})";
  const auto r = cli("simulate --instance " + path("bad.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("capacity"), std::string::npos) << r.out;
  std::ofstream(path("broken.json")) << "{";
  EXPECT_EQ(cli("offline-opt --instance " + path("broken.json") + " --delta 1").code, 2);
  EXPECT_EQ(cli("simulate --instance " + path("missing.json")).code, 2);
}

TEST(Cli, SimulateWritesManifestAndReplays) {
  ASSERT_EQ(cli("gen --seed 3 --n 3 --m 4 --k 2 --out " + path("s.json")).code, 0);
  ASSERT_EQ(cli("simulate --instance " + path("s.json") + " --reps 20 --seed 9 --offline --out " + path("s.csv") +
                " --dump-hjb " + path("s_hjb.csv"))
                .code,
            0);
  const std::string first = slurp(path("s.csv"));
  const auto manifest = admit::manifest_from_json(nlohmann::json::parse(slurp(path("s.csv.manifest.json"))));
  EXPECT_EQ(manifest.command, "simulate");
  EXPECT_EQ(manifest.base_seed, 9u);
  EXPECT_EQ(manifest.outputs.size(), 2u);
  EXPECT_EQ(first.rfind("# manifest=s.csv.manifest.json\n", 0), 0u);
  EXPECT_EQ(slurp(path("s_hjb.csv")).rfind("resource,t,c,f\n", 0), 0u);

  ASSERT_EQ(cli("replay " + path("s.csv.manifest.json")).code, 0);
  EXPECT_EQ(slurp(path("s.csv")), first);
}

TEST(Cli, OverbookWritesExpandedInstanceAndSlots) {
  ASSERT_EQ(cli("gen --seed 4 --n 2 --m 3 --out " + path("o.json")).code, 0);
  ASSERT_EQ(cli("overbook --instance " + path("o.json") + " --p 0.2689 --d 3 --kmax 4 --reps 10 --out " +
                path("o2.json"))
                .code,
            0);
  EXPECT_TRUE(fs::exists(path("o2.json.slots.csv")));
  EXPECT_TRUE(fs::exists(path("o2.json.sim.csv")));
  EXPECT_NO_THROW(admit::load_instance(path("o2.json")));
}

TEST(Cli, OfflineOpt) {
  std::ofstream(path("sq.json")) << R"({"version":1,"horizon":1,"resources":[{"capacity":1},{"capacity":1}],)"
                                     R"("types":[{"rate_pieces":[[0,1,1]],"rewards":[1,0.4]},)"
                                     R"({"rate_pieces":[[0,1,1]],"rewards":[0.9,0.8]}]})";
  const auto r = cli("offline-opt --instance " + path("sq.json") + " --delta 1,1");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("objective,,1.8"), std::string::npos) << r.out;
  EXPECT_EQ(cli("offline-opt --instance " + path("sq.json") + " --delta 1").code, 1);
  const auto s = cli("offline-opt --instance " + path("sq.json") + " --reps 5 --seed 1");
  EXPECT_EQ(s.code, 0);
  EXPECT_NE(s.out.find(admit::kOfflineHeader), std::string::npos);
}
