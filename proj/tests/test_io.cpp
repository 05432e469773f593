#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "admit/generators.hpp"
#include "admit/instance_io.hpp"
#include "admit/report.hpp"
#include "helpers.hpp"

using namespace admit;

namespace {

std::string expect_parse_error(const std::string& text) {
  try {
    parse_instance(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no ParseError for: " << text;
  return {};
}

}  // namespace

TEST(InstanceIo, RoundTripIsBitExact) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Instance inst = gen_random_instance({3, 5, 2, 1.7, seed});
    const std::string path = (std::filesystem::temp_directory_path() / ("admit_io_" + std::to_string(seed) + ".json")).string();
    save_instance(inst, path);
    const Instance back = load_instance(path);
    EXPECT_EQ(back, inst);
    EXPECT_EQ(dump_instance(back), dump_instance(inst));
    std::remove(path.c_str());
  }
}

TEST(InstanceIo, ExpiryRoundTrips) {
  ClinicConfig cfg;
  cfg.weeks = 1;
  const Instance inst = gen_clinic_instance(cfg);
  EXPECT_EQ(parse_instance(dump_instance(inst)), inst);
}

TEST(InstanceIo, WrongFieldTypeNamesTheField) {
  const std::string msg = expect_parse_error(
      R"({"version":1,"horizon":1,"resources":[{"capacity":1}],"types":[{"rate_pieces":[[0,1,1]],"rewards":["x"]}]})");
  EXPECT_NE(msg.find("$.types[0].rewards[0]"), std::string::npos) << msg;
}

TEST(InstanceIo, MissingFieldIsReported) {
  const std::string msg = expect_parse_error(R"({"version":1,"resources":[],"types":[]})");
  EXPECT_NE(msg.find("horizon"), std::string::npos) << msg;
}

TEST(InstanceIo, MalformedJsonReportsPosition) {
  const std::string msg = expect_parse_error("{\"version\":1,\n\"horizon\": }");
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
}

TEST(InstanceIo, SchemaVersionMismatch) {
  const std::string msg = expect_parse_error(R"({"version":2,"horizon":1,"resources":[],"types":[]})");
  EXPECT_NE(msg.find("version"), std::string::npos);
}

TEST(InstanceIo, CoverageGapIsAValidationError) {
  EXPECT_THROW(parse_instance(R"({"version":1,"horizon":1,"resources":[{"capacity":1}],)"
                              R"("types":[{"rate_pieces":[[0,0.5,1]],"rewards":[1]}]})"),
               InvalidInstance);
}

TEST(Manifest, RoundTrips) {
  RunManifest m;
  m.tool_version = "t";
  m.argv = {"admit", "bound", "--k", "2"};
  m.command = "bound";
  m.base_seed = 18446744073709551615ull;
  m.seed_rule = "deterministic";
  m.rng = "mt19937_64+splitmix64";
  m.grid_steps = {1e-4, 0.1 + 0.2};
  m.tolerances = {{"lp", 1e-9}};
  m.parameters = {{"k", 2}};
  m.timestamp = "2026-01-01T00:00:00Z";
  m.outputs = {{"a.csv", "00"}};
  const RunManifest back = manifest_from_json(nlohmann::json::parse(to_json(m).dump()));
  EXPECT_EQ(back, m);
}

TEST(Csv, NineSignificantDigits) {
  EXPECT_EQ(fmt9(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(fmt9(2.0), "2");
  EXPECT_EQ(fmt9(123456789012.0), "1.23456789e+11");
}
