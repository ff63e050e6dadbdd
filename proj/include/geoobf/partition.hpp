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

#ifndef GEOOBF_PARTITION_HPP_
#define GEOOBF_PARTITION_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "geoobf/domain.hpp"
#include "geoobf/errors.hpp"
#include "geoobf/hilbert.hpp"

namespace geoobf {

// One protection location set. `diam` and `mass` cache diameter() and
// prior_mass() of `members`.
struct Pls {
  std::vector<LocationId> members;
  double diam = 0.0;
  double mass = 0.0;
  double eps_region = 0.0;
};

inline Pls make_pls(const LocationDomain& domain, std::vector<LocationId> members,
                    double eps_region) {
  Pls pls;
  pls.diam = diameter(domain, members);
  pls.mass = prior_mass(domain, members);
  pls.eps_region = eps_region;
  pls.members = std::move(members);
  return pls;
}

struct Provenance {
  std::string algorithm;
  std::optional<Rotation> rotation;
  std::optional<std::uint64_t> seed;
};

struct Partition {
  std::vector<Pls> plss;
  PrivacyParams params;
  Provenance provenance;

  // pls index of every location id; requires a full cover of n ids.
  std::vector<std::size_t> pls_of(std::size_t n) const {
    std::vector<std::size_t> out(n, plss.size());
    for (std::size_t k = 0; k < plss.size(); ++k) {
      for (LocationId id : plss[k].members) {
        if (id < n) out[id] = k;
      }
    }
    return out;
  }

  double max_diameter() const {
    double d = 0.0;
    for (const Pls& p : plss) d = std::max(d, p.diam);
    return d;
  }
  double min_diameter() const {
    double d = plss.empty() ? 0.0 : plss.front().diam;
    for (const Pls& p : plss) d = std::min(d, p.diam);
    return d;
  }
};

// Mass-weighted mean diameter sum_k mass_k * diam_k / sum_k mass_k.
inline double weighted_avg_diameter(std::span<const Pls> plss) {
  if (plss.empty()) throw InvalidArgument("no protection sets");
  double num = 0.0;
  double den = 0.0;
  for (const Pls& p : plss) {
    num += p.mass * p.diam;
    den += p.mass;
  }
  if (!(den > 0.0)) throw InvalidArgument("protection sets have zero mass");
  return num / den;
}

inline double weighted_avg_diameter(const Partition& partition) {
  return weighted_avg_diameter(partition.plss);
}

// Every violated partition invariant, as a readable message. Empty means the
// partition is a disjoint cover of sets of size >= 2, caches are coherent
// and each set meets the partition condition under its own budget.
inline std::vector<std::string> partition_violations(const LocationDomain& domain,
                                                     const Partition& partition) {
  std::vector<std::string> out;
  std::vector<int> seen(domain.size(), 0);
  for (std::size_t k = 0; k < partition.plss.size(); ++k) {
    const Pls& p = partition.plss[k];
    const std::string tag = "pls " + std::to_string(k) + ": ";
    if (p.members.size() < 2) out.push_back(tag + "fewer than 2 members");
    bool ids_ok = true;
    for (LocationId id : p.members) {
      if (id >= domain.size()) {
        out.push_back(tag + "unknown id " + std::to_string(id));
        ids_ok = false;
      } else {
        ++seen[id];
      }
    }
    if (!ids_ok || p.members.empty()) continue;
    if (p.diam != diameter(domain, p.members)) out.push_back(tag + "stale diameter");
    if (std::abs(p.mass - prior_mass(domain, p.members)) > 1e-12) {
      out.push_back(tag + "stale mass");
    }
    if (!(p.eps_region > 0.0)) {
      out.push_back(tag + "non-positive eps_region");
    } else if (p.mass > 0.0 &&
               !check_condition(domain, p.members, p.eps_region, partition.params.em)) {
      out.push_back(tag + "partition condition fails");
    }
  }
  for (LocationId id = 0; id < domain.size(); ++id) {
    if (seen[id] == 0) out.push_back("location " + std::to_string(id) + " uncovered");
    if (seen[id] > 1) out.push_back("location " + std::to_string(id) + " in several sets");
  }
  return out;
}

// Partition CSV: `pls_id,location_id,eps_region,diam_km`, one row per
// membership.
inline void write_partition(std::ostream& out, const Partition& partition) {
  out << "pls_id,location_id,eps_region,diam_km\n";
  for (std::size_t k = 0; k < partition.plss.size(); ++k) {
    const Pls& p = partition.plss[k];
    for (LocationId id : p.members) {
      out << k << ',' << id << ',' << detail::format_double(p.eps_region) << ','
          << detail::format_double(p.diam) << '\n';
    }
  }
}

// Reads a partition written by write_partition against `domain`. The caller
// supplies the params (the file does not record E_m).
inline Partition read_partition(std::istream& in, const LocationDomain& domain,
                                const PrivacyParams& params = {}) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  struct Pending {
    std::vector<LocationId> members;
    double eps_region = 0.0;
    double diam = 0.0;
    std::size_t line = 0;
  };
  std::map<std::uint64_t, Pending> by_id;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    const auto f = detail::split_csv(view);
    if (!header_seen) {
      if (f.size() != 4 || f[0] != "pls_id" || f[1] != "location_id" ||
          f[2] != "eps_region" || f[3] != "diam_km") {
        throw ParseError(line_no, "expected header pls_id,location_id,eps_region,diam_km");
      }
      header_seen = true;
      continue;
    }
    if (f.size() != 4) throw ParseError(line_no, "expected 4 fields");
    const auto pls_id = detail::parse_uint(f[0]);
    const auto loc = detail::parse_uint(f[1]);
    const auto eps = detail::parse_double(f[2]);
    const auto diam = detail::parse_double(f[3]);
    if (!pls_id || !loc || !eps || !diam) throw ParseError(line_no, "malformed row");
    if (*loc >= domain.size()) {
      throw ParseError(line_no, "location id " + std::to_string(*loc) +
                                    " not in dataset of " +
                                    std::to_string(domain.size()) + " locations");
    }
    auto [it, inserted] = by_id.try_emplace(*pls_id);
    Pending& p = it->second;
    if (inserted) {
      p.eps_region = *eps;
      p.diam = *diam;
      p.line = line_no;
    } else if (p.eps_region != *eps || p.diam != *diam) {
      throw ParseError(line_no, "inconsistent eps_region/diam_km within pls " +
                                    std::to_string(*pls_id));
    }
    p.members.push_back(static_cast<LocationId>(*loc));
  }
  if (!header_seen) throw ParseError(0, "empty partition file");
  Partition out;
  out.params = params;
  out.provenance.algorithm = "file";
  for (auto& [id, p] : by_id) {
    Pls pls = make_pls(domain, std::move(p.members), p.eps_region);
    if (std::abs(pls.diam - p.diam) > 1e-9 * std::max(1.0, pls.diam)) {
      throw ParseError(p.line, "diam_km of pls " + std::to_string(id) +
                                   " does not match the dataset");
    }
    out.plss.push_back(std::move(pls));
  }
  std::vector<int> seen(domain.size(), 0);
  for (const Pls& p : out.plss) {
    for (LocationId id : p.members) ++seen[id];
  }
  for (LocationId id = 0; id < domain.size(); ++id) {
    if (seen[id] != 1) {
      throw ParseError(0, "location " + std::to_string(id) +
                              (seen[id] == 0 ? " missing from" : " repeated in") +
                              " partition");
    }
  }
  return out;
}

}  // namespace geoobf

#endif  // GEOOBF_PARTITION_HPP_
