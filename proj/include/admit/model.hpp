#pragma once

// Domain types for online advance-admission scheduling: resources with
// integer capacities, customer types with piecewise-constant Poisson arrival
// rates, and the reward matrix linking them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace admit {

struct RatePiece {
  double t_start = 0.0;
  double t_end = 0.0;
  double rate = 0.0;

  double length() const { return t_end - t_start; }
  double mass() const { return rate * (t_end - t_start); }

  friend bool operator==(const RatePiece&, const RatePiece&) = default;
};

/// Piecewise-constant arrival rate on [0, T]. Pieces are kept in time order;
/// the evaluation at a breakpoint uses the piece that starts there.
class RateFunction {
 public:
  RateFunction() = default;
  explicit RateFunction(std::vector<RatePiece> pieces) : pieces_(std::move(pieces)) {}

  static RateFunction constant(double rate, double t0, double t1) {
    return RateFunction({RatePiece{t0, t1, rate}});
  }

  const std::vector<RatePiece>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }

  double operator()(double t) const {
    if (pieces_.empty()) return 0.0;
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                               [](double v, const RatePiece& p) { return v < p.t_start; });
    if (it == pieces_.begin()) return 0.0;
    --it;
    if (t > it->t_end) return 0.0;
    return it->rate;
  }

  double integral() const {
    double total = 0.0;
    for (const auto& p : pieces_) total += p.mass();
    return total;
  }

  double integral(double a, double b) const {
    double total = 0.0;
    for (const auto& p : pieces_) {
      const double lo = std::max(a, p.t_start);
      const double hi = std::min(b, p.t_end);
      if (hi > lo) total += p.rate * (hi - lo);
    }
    return total;
  }

  double max_rate() const {
    double m = 0.0;
    for (const auto& p : pieces_) m = std::max(m, p.rate);
    return m;
  }

  // True when some piece with positive rate intersects (t, +inf).
  bool positive_after(double t) const {
    return std::any_of(pieces_.begin(), pieces_.end(),
                       [t](const RatePiece& p) { return p.rate > 0.0 && p.t_end > t; });
  }

  RateFunction scaled(double factor) const {
    RateFunction out = *this;
    for (auto& p : out.pieces_) p.rate *= factor;
    return out;
  }

  friend bool operator==(const RateFunction&, const RateFunction&) = default;

 private:
  std::vector<RatePiece> pieces_;
};

struct Resource {
  int capacity = 1;
  std::optional<double> expiry;

  friend bool operator==(const Resource&, const Resource&) = default;
};

struct CustomerType {
  RateFunction rate;
  std::vector<double> rewards;  // one per resource

  friend bool operator==(const CustomerType&, const CustomerType&) = default;
};

struct Instance {
  double horizon = 1.0;
  std::vector<Resource> resources;
  std::vector<CustomerType> types;

  std::size_t num_resources() const { return resources.size(); }
  std::size_t num_types() const { return types.size(); }
  double reward(std::size_t i, std::size_t j) const { return types[i].rewards[j]; }
  double expected_arrivals(std::size_t i) const { return types[i].rate.integral(); }

  int min_capacity() const {
    int k = std::numeric_limits<int>::max();
    for (const auto& r : resources) k = std::min(k, r.capacity);
    return resources.empty() ? 0 : k;
  }

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct Arrival {
  double time = 0.0;
  std::size_t type = 0;

  friend bool operator==(const Arrival&, const Arrival&) = default;
};

/// One realized arrival sequence, sorted by (time, type).
struct ArrivalSample {
  std::vector<Arrival> events;
  std::uint64_t seed = 0;

  std::vector<int> counts(std::size_t num_types) const {
    std::vector<int> delta(num_types, 0);
    for (const auto& e : events) ++delta[e.type];
    return delta;
  }
};

struct Violation {
  std::string rule;
  std::string location;
  std::string message;
};

inline std::string describe(const std::vector<Violation>& violations) {
  std::ostringstream os;
  for (const auto& v : violations) os << v.rule << " at " << v.location << ": " << v.message << '\n';
  return os.str();
}

/// Raised when an instance fails validation where a valid one is required.
class InvalidInstance : public std::runtime_error {
 public:
  explicit InvalidInstance(std::vector<Violation> violations)
      : std::runtime_error("invalid instance:\n" + describe(violations)),
        violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

namespace detail {

inline std::string at_type(std::size_t i) { return "types[" + std::to_string(i) + "]"; }
inline std::string at_resource(std::size_t j) { return "resources[" + std::to_string(j) + "]"; }

inline void check_rate(const RateFunction& rate, double horizon, const std::string& where,
                       std::vector<Violation>& out) {
  const double tol = 1e-12 * std::max(1.0, horizon);
  const auto& pieces = rate.pieces();
  if (pieces.empty()) {
    out.push_back({"coverage", where, "no rate pieces; pieces must cover [0, T]"});
    return;
  }
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    const auto& piece = pieces[p];
    const std::string loc = where + ".rate_pieces[" + std::to_string(p) + "]";
    if (!std::isfinite(piece.rate) || piece.rate < 0.0)
      out.push_back({"rate", loc, "rate must be finite and >= 0"});
    if (!std::isfinite(piece.t_start) || !std::isfinite(piece.t_end) ||
        !(piece.t_end > piece.t_start))
      out.push_back({"coverage", loc, "piece must have t_end > t_start"});
    if (p > 0 && std::abs(piece.t_start - pieces[p - 1].t_end) > tol)
      out.push_back({"coverage", loc, "gap or overlap with previous piece"});
  }
  if (std::abs(pieces.front().t_start) > tol)
    out.push_back({"coverage", where, "first piece must start at 0"});
  if (std::abs(pieces.back().t_end - horizon) > tol)
    out.push_back({"coverage", where, "last piece must end at the horizon"});
}

}  // namespace detail

/// Every violated structural invariant, with its location. Empty means valid.
inline std::vector<Violation> validate(const Instance& inst) {
  std::vector<Violation> out;
  if (!std::isfinite(inst.horizon) || !(inst.horizon > 0.0))
    out.push_back({"horizon", "horizon", "horizon must be finite and > 0"});
  if (inst.resources.empty()) out.push_back({"resources", "resources", "at least one resource"});
  if (inst.types.empty()) out.push_back({"types", "types", "at least one customer type"});

  for (std::size_t j = 0; j < inst.resources.size(); ++j) {
    const auto& r = inst.resources[j];
    if (r.capacity < 1)
      out.push_back({"capacity", detail::at_resource(j), "capacity must be >= 1"});
    if (r.expiry && (!std::isfinite(*r.expiry) || *r.expiry < 0.0 || *r.expiry > inst.horizon))
      out.push_back({"expiry", detail::at_resource(j), "expiry must lie in [0, T]"});
  }

  for (std::size_t i = 0; i < inst.types.size(); ++i) {
    const auto& type = inst.types[i];
    detail::check_rate(type.rate, inst.horizon, detail::at_type(i), out);
    if (type.rewards.size() != inst.resources.size()) {
      out.push_back({"rewards", detail::at_type(i) + ".rewards",
                     "expected " + std::to_string(inst.resources.size()) + " rewards, got " +
                         std::to_string(type.rewards.size())});
      continue;
    }
    for (std::size_t j = 0; j < type.rewards.size(); ++j) {
      const double r = type.rewards[j];
      const std::string loc = detail::at_type(i) + ".rewards[" + std::to_string(j) + "]";
      if (!std::isfinite(r) || r < 0.0) out.push_back({"rewards", loc, "reward must be finite and >= 0"});
      const auto& expiry = inst.resources[j].expiry;
      if (expiry && r != 0.0 && type.rate.positive_after(*expiry))
        out.push_back({"expiry consistency", loc,
                       "type arrives after the resource expires but has a nonzero reward"});
    }
  }
  return out;
}

inline void require_valid(const Instance& inst) {
  auto v = validate(inst);
  if (!v.empty()) throw InvalidInstance(std::move(v));
}

}  // namespace admit
