#pragma once

// JSON persistence for instances. Schema (version 1):
//   { "version": 1, "horizon": T,
//     "resources": [ {"capacity": C, "expiry": t?}, ... ],
//     "types": [ {"rate_pieces": [[t0, t1, rate], ...], "rewards": [...]}, ... ] }
// Doubles are written in shortest round-trip form, so load(save(x)) == x.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "admit/model.hpp"
#include "json.hpp"

namespace admit {

inline constexpr int kInstanceSchemaVersion = 1;

/// Malformed document: bad JSON, wrong field types, missing fields, or an
/// unsupported schema version. The message names the offending field.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "." + key + ": missing field");
  return *it;
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path + ": expected a number, got " + std::string(v.type_name()));
  return v.get<double>();
}

inline int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ParseError(path + ": expected an integer, got " + std::string(v.type_name()));
  return v.get<int>();
}

inline const json& array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path + ": expected an array, got " + std::string(v.type_name()));
  return v;
}

}  // namespace detail

inline nlohmann::json to_json(const Instance& inst) {
  nlohmann::json doc;
  doc["version"] = kInstanceSchemaVersion;
  doc["horizon"] = inst.horizon;
  auto& resources = doc["resources"] = nlohmann::json::array();
  for (const auto& r : inst.resources) {
    nlohmann::json jr;
    jr["capacity"] = r.capacity;
    if (r.expiry) jr["expiry"] = *r.expiry;
    resources.push_back(std::move(jr));
  }
  auto& types = doc["types"] = nlohmann::json::array();
  for (const auto& t : inst.types) {
    nlohmann::json jt;
    auto& pieces = jt["rate_pieces"] = nlohmann::json::array();
    for (const auto& p : t.rate.pieces()) pieces.push_back({p.t_start, p.t_end, p.rate});
    jt["rewards"] = t.rewards;
    types.push_back(std::move(jt));
  }
  return doc;
}

/// Structural decode only; call validate() for the model invariants.
inline Instance from_json(const nlohmann::json& doc) {
  using detail::array;
  using detail::field;
  using detail::integer;
  using detail::number;

  const int version = integer(field(doc, "version", "$"), "$.version");
  if (version != kInstanceSchemaVersion)
    throw ParseError("$.version: unsupported schema version " + std::to_string(version) +
                     " (expected " + std::to_string(kInstanceSchemaVersion) + ")");

  Instance inst;
  inst.horizon = number(field(doc, "horizon", "$"), "$.horizon");

  const auto& resources = array(field(doc, "resources", "$"), "$.resources");
  for (std::size_t j = 0; j < resources.size(); ++j) {
    const std::string path = "$.resources[" + std::to_string(j) + "]";
    Resource r;
    r.capacity = integer(field(resources[j], "capacity", path), path + ".capacity");
    if (resources[j].contains("expiry")) r.expiry = number(resources[j]["expiry"], path + ".expiry");
    inst.resources.push_back(r);
  }

  const auto& types = array(field(doc, "types", "$"), "$.types");
  for (std::size_t i = 0; i < types.size(); ++i) {
    const std::string path = "$.types[" + std::to_string(i) + "]";
    CustomerType type;
    std::vector<RatePiece> pieces;
    const auto& jp = array(field(types[i], "rate_pieces", path), path + ".rate_pieces");
    for (std::size_t p = 0; p < jp.size(); ++p) {
      const std::string pp = path + ".rate_pieces[" + std::to_string(p) + "]";
      const auto& triple = array(jp[p], pp);
      if (triple.size() != 3) throw ParseError(pp + ": expected [t_start, t_end, rate]");
      pieces.push_back({number(triple[0], pp + "[0]"), number(triple[1], pp + "[1]"),
                        number(triple[2], pp + "[2]")});
    }
    type.rate = RateFunction(std::move(pieces));
    const auto& jr = array(field(types[i], "rewards", path), path + ".rewards");
    for (std::size_t j = 0; j < jr.size(); ++j)
      type.rewards.push_back(number(jr[j], path + ".rewards[" + std::to_string(j) + "]"));
    inst.types.push_back(std::move(type));
  }
  return inst;
}

inline std::string dump_instance(const Instance& inst) { return to_json(inst).dump(1) + "\n"; }

/// Parses and validates. Throws ParseError or InvalidInstance.
inline Instance parse_instance(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  Instance inst = from_json(doc);
  require_valid(inst);
  return inst;
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

inline void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  out << dump_instance(inst);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace admit
