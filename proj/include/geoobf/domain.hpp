// Copyright 2026 The geoobf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef GEOOBF_DOMAIN_HPP_
#define GEOOBF_DOMAIN_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geoobf/errors.hpp"
#include "geoobf/rng.hpp"

namespace geoobf {

using LocationId = std::size_t;

// Planar position in km.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct Location {
  LocationId id = 0;
  Point pos;
  double prior = 0.0;
  // Personal privacy budget; either every location of a domain carries one
  // or none does.
  std::optional<double> eps;
};

inline double distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline double distance(const Location& a, const Location& b) {
  return distance(a.pos, b.pos);
}

// The finite location set together with its (normalized) prior.
class LocationDomain {
 public:
  LocationDomain() = default;

  // Locations may arrive in any order; ids must be exactly 0..n-1. Priors are
  // rescaled to sum to one.
  explicit LocationDomain(std::vector<Location> locations)
      : locations_(std::move(locations)) {
    std::sort(locations_.begin(), locations_.end(),
              [](const Location& a, const Location& b) { return a.id < b.id; });
    double total = 0.0;
    std::size_t with_eps = 0;
    for (std::size_t i = 0; i < locations_.size(); ++i) {
      const Location& loc = locations_[i];
      if (loc.id != i) {
        throw InvalidArgument(
            i > 0 && locations_[i - 1].id == loc.id
                ? "duplicate location id " + std::to_string(loc.id)
                : "location ids must be exactly 0..n-1, missing " +
                      std::to_string(i));
      }
      if (!std::isfinite(loc.pos.x) || !std::isfinite(loc.pos.y)) {
        throw InvalidArgument("location " + std::to_string(i) +
                              " has non-finite coordinates");
      }
      if (!std::isfinite(loc.prior) || loc.prior < 0.0) {
        throw InvalidArgument("location " + std::to_string(i) +
                              " has a negative or non-finite prior");
      }
      if (loc.eps) {
        if (!(*loc.eps > 0.0) || !std::isfinite(*loc.eps)) {
          throw InvalidArgument("location " + std::to_string(i) +
                                " has a non-positive privacy budget");
        }
        ++with_eps;
      }
      total += loc.prior;
    }
    if (with_eps != 0 && with_eps != locations_.size()) {
      throw InvalidArgument(
          "personal budgets must be given for every location or for none");
    }
    if (!locations_.empty()) {
      if (!(total > 0.0)) throw InvalidArgument("prior mass sums to zero");
      for (Location& loc : locations_) loc.prior /= total;
    }
  }

  std::size_t size() const { return locations_.size(); }
  bool empty() const { return locations_.empty(); }

  const Location& operator[](LocationId id) const { return locations_[id]; }
  const Location& at(LocationId id) const {
    if (id >= locations_.size()) {
      throw InvalidArgument("unknown location id " + std::to_string(id));
    }
    return locations_[id];
  }
  std::span<const Location> locations() const { return locations_; }

  Point pos(LocationId id) const { return locations_[id].pos; }
  double prior(LocationId id) const { return locations_[id].prior; }
  double distance(LocationId a, LocationId b) const {
    return geoobf::distance(locations_[a].pos, locations_[b].pos);
  }

  bool has_personal_eps() const {
    return !locations_.empty() && locations_.front().eps.has_value();
  }
  // Personal budget of `id`, or `fallback` when the domain carries none.
  double eps_or(LocationId id, double fallback) const {
    return locations_[id].eps.value_or(fallback);
  }

  std::vector<LocationId> ids() const {
    std::vector<LocationId> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
  }

 private:
  std::vector<Location> locations_;
};

struct PrivacyParams {
  double eps = 1.0;     // global budget
  double em = 0.0;      // minimum expected inference error, km
  double lambda = 0.5;  // personalization weight offset

  void validate() const {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
      throw InvalidArgument("eps must be positive");
    }
    if (!(em >= 0.0) || !std::isfinite(em)) {
      throw InvalidArgument("E_m must be non-negative");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      throw InvalidArgument("lambda must be non-negative");
    }
  }
};

namespace detail {

inline void require_members(const LocationDomain& domain,
                            std::span<const LocationId> members) {
  if (members.empty()) throw InvalidArgument("empty location set");
  for (LocationId id : members) {
    if (id >= domain.size()) {
      throw InvalidArgument("unknown location id " + std::to_string(id));
    }
  }
}

// min over `candidates` of sum_{x in members} weight[x] * d(c, x), with the
// minimizing candidate (first one on ties) written to *argmin. A candidate
// is abandoned as soon as its running sum exceeds the best complete sum;
// since terms are non-negative this never changes the result.
inline double weighted_min_cost(const LocationDomain& domain,
                                std::span<const LocationId> members,
                                std::span<const double> weights,
                                std::span<const LocationId> candidates,
                                LocationId* argmin = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  LocationId best_id = candidates.empty() ? 0 : candidates.front();
  for (LocationId c : candidates) {
    double sum = 0.0;
    bool pruned = false;
    for (std::size_t i = 0; i < members.size(); ++i) {
      sum += weights[i] * domain.distance(c, members[i]);
      if (sum > best) {
        pruned = true;
        break;
      }
    }
    if (!pruned && sum < best) {
      best = sum;
      best_id = c;
    }
  }
  if (argmin != nullptr) *argmin = best_id;
  return best;
}

inline double expected_error(const LocationDomain& domain,
                             std::span<const LocationId> members,
                             std::span<const LocationId> candidates) {
  require_members(domain, members);
  if (members.size() == 1) return 0.0;
  double mass = 0.0;
  for (LocationId id : members) mass += domain.prior(id);
  if (!(mass > 0.0)) throw InvalidArgument("location set has zero prior mass");
  std::vector<double> weights(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    weights[i] = domain.prior(members[i]) / mass;
  }
  return weighted_min_cost(domain, members, weights, candidates);
}

}  // namespace detail

// Largest pairwise distance among `members`.
inline double diameter(const LocationDomain& domain,
                       std::span<const LocationId> members) {
  detail::require_members(domain, members);
  double d = 0.0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      d = std::max(d, domain.distance(members[i], members[j]));
    }
  }
  return d;
}

inline double prior_mass(const LocationDomain& domain,
                         std::span<const LocationId> members) {
  double mass = 0.0;
  for (LocationId id : members) mass += domain.at(id).prior;
  return mass;
}

// Prior-weighted mean distance from the best single guess to the members of
// `members`, the guess ranging over the whole domain.
inline double e_prime(const LocationDomain& domain,
                      std::span<const LocationId> members) {
  const std::vector<LocationId> all = domain.ids();
  return detail::expected_error(domain, members, all);
}

// Same as e_prime but the guess is restricted to `members` itself, so the
// result is never smaller.
inline double e_restricted(const LocationDomain& domain,
                           std::span<const LocationId> members) {
  return detail::expected_error(domain, members, members);
}

// Partition condition: e_prime(members) >= exp(eps_region) * em, compared
// without slack.
inline bool check_condition(const LocationDomain& domain,
                            std::span<const LocationId> members,
                            double eps_region, double em) {
  if (!(eps_region > 0.0)) throw InvalidArgument("eps_region must be positive");
  return e_prime(domain, members) >= std::exp(eps_region) * em;
}

// Budget effective on a set: the smallest personal budget among its members
// when personalized, else the global one.
inline double region_eps(const LocationDomain& domain,
                         std::span<const LocationId> members,
                         const PrivacyParams& params, bool personalized) {
  if (!personalized) return params.eps;
  double eps = std::numeric_limits<double>::infinity();
  for (LocationId id : members) eps = std::min(eps, domain.eps_or(id, params.eps));
  return eps;
}

// ---------------------------------------------------------------------------
// Dataset CSV: header `id,x_km,y_km,prior[,eps]`.

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

inline std::optional<std::uint64_t> parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline LocationDomain load_domain(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  bool with_eps = false;
  std::vector<Location> locations;
  std::vector<std::size_t> line_of_id;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    const auto fields = detail::split_csv(view);
    if (!header_seen) {
      const bool base = fields.size() >= 4 && fields[0] == "id" &&
                        fields[1] == "x_km" && fields[2] == "y_km" &&
                        fields[3] == "prior";
      with_eps = fields.size() == 5 && fields[4] == "eps";
      if (!base || (fields.size() != 4 && !with_eps)) {
        throw ParseError(line_no, "expected header id,x_km,y_km,prior[,eps]");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != (with_eps ? 5u : 4u)) {
      throw ParseError(line_no, "expected " + std::to_string(with_eps ? 5 : 4) +
                                    " fields, got " + std::to_string(fields.size()));
    }
    Location loc;
    const auto id = detail::parse_uint(fields[0]);
    const auto x = detail::parse_double(fields[1]);
    const auto y = detail::parse_double(fields[2]);
    const auto prior = detail::parse_double(fields[3]);
    if (!id) throw ParseError(line_no, "bad id '" + std::string(fields[0]) + "'");
    if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y)) {
      throw ParseError(line_no, "bad coordinates");
    }
    if (!prior || !std::isfinite(*prior)) {
      throw ParseError(line_no, "bad prior '" + std::string(fields[3]) + "'");
    }
    if (*prior < 0.0) throw ParseError(line_no, "negative prior");
    loc.id = static_cast<LocationId>(*id);
    loc.pos = {*x, *y};
    loc.prior = *prior;
    if (with_eps) {
      const auto eps = detail::parse_double(fields[4]);
      if (!eps || !(*eps > 0.0) || !std::isfinite(*eps)) {
        throw ParseError(line_no, "eps must be a positive number");
      }
      loc.eps = *eps;
    }
    if (loc.id >= line_of_id.size()) line_of_id.resize(loc.id + 1, 0);
    if (line_of_id[loc.id] != 0) {
      throw ParseError(line_no, "duplicate id " + std::to_string(loc.id) +
                                    " (first seen on line " +
                                    std::to_string(line_of_id[loc.id]) + ")");
    }
    line_of_id[loc.id] = line_no;
    locations.push_back(loc);
  }
  if (!header_seen) throw ParseError(0, "empty dataset");
  if (locations.size() < 2) {
    throw ParseError(0, "dataset needs at least 2 locations, got " +
                            std::to_string(locations.size()));
  }
  try {
    return LocationDomain(std::move(locations));
  } catch (const InvalidArgument& e) {
    throw ParseError(0, e.what());
  }
}

inline void write_domain(std::ostream& out, const LocationDomain& domain) {
  const bool with_eps = domain.has_personal_eps();
  out << (with_eps ? "id,x_km,y_km,prior,eps\n" : "id,x_km,y_km,prior\n");
  for (const Location& loc : domain.locations()) {
    out << loc.id << ',' << detail::format_double(loc.pos.x) << ','
        << detail::format_double(loc.pos.y) << ','
        << detail::format_double(loc.prior);
    if (with_eps) out << ',' << detail::format_double(*loc.eps);
    out << '\n';
  }
}

// Synthetic dataset: distinct cells of a grid_side x grid_side grid,
// priors uniform in [prior_low, prior_high] before normalization.
struct SynthOptions {
  std::size_t n = 50;
  double cell_km = 1.0;
  double prior_low = 0.01;
  double prior_high = 0.03;
  std::uint64_t seed = 0;
  // 0 picks ceil(2 * sqrt(n)), i.e. about a quarter of the cells occupied.
  std::size_t grid_side = 0;
  // Personal budgets uniform in [eps_low, eps_high] when set.
  std::optional<std::pair<double, double>> eps_range;
};

inline LocationDomain synth_domain(const SynthOptions& opt) {
  if (opt.n < 2) throw InvalidArgument("synthetic domain needs n >= 2");
  if (!(opt.cell_km > 0.0)) throw InvalidArgument("cell_km must be positive");
  if (!(opt.prior_low >= 0.0) || !(opt.prior_high >= opt.prior_low) ||
      !(opt.prior_high > 0.0)) {
    throw InvalidArgument("need 0 <= prior_low <= prior_high, prior_high > 0");
  }
  if (opt.eps_range &&
      !(opt.eps_range->first > 0.0 && opt.eps_range->second >= opt.eps_range->first)) {
    throw InvalidArgument("need 0 < eps_low <= eps_high");
  }
  const std::size_t side =
      opt.grid_side != 0
          ? opt.grid_side
          : static_cast<std::size_t>(std::ceil(2.0 * std::sqrt(static_cast<double>(opt.n))));
  const std::size_t cells = side * side;
  if (opt.n > cells) {
    throw InvalidArgument("n = " + std::to_string(opt.n) + " exceeds the " +
                          std::to_string(cells) + " available grid cells");
  }
  Rng rng = make_rng(opt.seed, {kSynthStream});
  std::vector<std::size_t> pool(cells);
  for (std::size_t i = 0; i < cells; ++i) pool[i] = i;
  std::vector<Location> locations(opt.n);
  for (std::size_t i = 0; i < opt.n; ++i) {
    std::swap(pool[i], pool[i + uniform_index(rng, cells - i)]);
    const std::size_t cx = pool[i] % side;
    const std::size_t cy = pool[i] / side;
    locations[i].id = i;
    locations[i].pos = {(static_cast<double>(cx) + 0.5) * opt.cell_km,
                        (static_cast<double>(cy) + 0.5) * opt.cell_km};
    locations[i].prior = uniform_real(rng, opt.prior_low, opt.prior_high);
  }
  if (opt.eps_range) {
    Rng eps_rng = make_rng(opt.seed, {kPersonalEpsStream});
    for (Location& loc : locations) {
      loc.eps = uniform_real(eps_rng, opt.eps_range->first, opt.eps_range->second);
    }
  }
  return LocationDomain(std::move(locations));
}

inline LocationDomain synth_domain(std::size_t n, double cell_km, double prior_low,
                                   double prior_high, std::uint64_t seed) {
  SynthOptions opt;
  opt.n = n;
  opt.cell_km = cell_km;
  opt.prior_low = prior_low;
  opt.prior_high = prior_high;
  opt.seed = seed;
  return synth_domain(opt);
}

}  // namespace geoobf

#endif  // GEOOBF_DOMAIN_HPP_
