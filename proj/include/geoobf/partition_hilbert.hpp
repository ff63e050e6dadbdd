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

#ifndef GEOOBF_PARTITION_HILBERT_HPP_
#define GEOOBF_PARTITION_HILBERT_HPP_

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoobf/domain.hpp"
#include "geoobf/errors.hpp"
#include "geoobf/hilbert.hpp"
#include "geoobf/partition.hpp"

namespace geoobf {

// Throws InfeasibleError unless the whole domain meets the partition
// condition; no partition can exist otherwise.
inline void require_feasible(const LocationDomain& domain, const PrivacyParams& params,
                             bool personalized) {
  params.validate();
  const std::vector<LocationId> all = domain.ids();
  const double eps = region_eps(domain, all, params, personalized);
  const double ep = e_prime(domain, all);
  if (!(ep >= std::exp(eps) * params.em)) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "infeasible parameters: eps=%.6g, E_m=%.6g, but E'(X)=%.6g < "
                  "exp(eps)*E_m=%.6g",
                  eps, params.em, ep, std::exp(eps) * params.em);
    throw InfeasibleError(buf);
  }
}

namespace detail {

// Contiguous run [begin, end) of a Hilbert sequence.
struct RankRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
};

class CurvePartitioner {
 public:
  CurvePartitioner(const LocationDomain& domain, std::span<const LocationId> sequence,
                   const PrivacyParams& params, bool personalized)
      : domain_(domain), seq_(sequence), params_(params), personalized_(personalized) {}

  std::vector<RankRange> run() {
    const std::size_t n = seq_.size();
    RankRange left{0, 2};
    RankRange right{n - 2, n};
    std::size_t q_begin = 2;
    std::size_t q_end = n - 2;

    while (true) {
      while (!satisfies(left) && q_begin < q_end) {
        ++left.end;
        ++q_begin;
      }
      while (!satisfies(right) && q_begin < q_end) {
        --right.begin;
        --q_end;
      }
      if (q_end - q_begin < 2) break;
      // Close the wider side; ties close the left one.
      if (diam(left) >= diam(right)) {
        close_left(left);
        left = {q_begin, q_begin + 2};
        q_begin += 2;
      } else {
        close_right(right);
        right = {q_end - 2, q_end};
        q_end -= 2;
      }
    }

    if (q_end - q_begin == 1) {
      // Lone remainder joins the Euclidean-nearer open set.
      const LocationId lone = seq_[q_begin];
      if (set_distance(lone, left) <= set_distance(lone, right)) {
        ++left.end;
      } else {
        --right.begin;
      }
    }

    if (satisfies(left) && satisfies(right)) {
      close_left(left);
      close_right(right);
      return collect(std::nullopt);
    }

    RankRange merged{left.begin, right.end};
    while (true) {
      if (satisfies(merged)) return collect(merged);
      if (split_into_neighbors(merged)) return collect(std::nullopt);
      merged = absorb_latest(merged);
    }
  }

  std::vector<LocationId> members(RankRange r) const {
    return {seq_.begin() + static_cast<std::ptrdiff_t>(r.begin),
            seq_.begin() + static_cast<std::ptrdiff_t>(r.end)};
  }

  double eps_of(RankRange r) const {
    return region_eps(domain_, members(r), params_, personalized_);
  }

 private:
  struct Closed {
    RankRange range;
    std::size_t stamp;
  };

  bool satisfies(RankRange r) const {
    const std::vector<LocationId> m = members(r);
    return check_condition(domain_, m, region_eps(domain_, m, params_, personalized_),
                           params_.em);
  }

  double diam(RankRange r) const { return diameter(domain_, members(r)); }

  double set_distance(LocationId id, RankRange r) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = r.begin; i < r.end; ++i) {
      best = std::min(best, domain_.distance(id, seq_[i]));
    }
    return best;
  }

  void close_left(RankRange r) { left_closed_.push_back({r, stamp_++}); }
  void close_right(RankRange r) { right_closed_.push_back({r, stamp_++}); }

  // Cuts `merged` at every point (both one-sided cuts included) and hands
  // the pieces to the closed neighbors on each side, keeping the cut whose
  // enlarged neighbors both satisfy the condition with the smallest
  // mass-weighted diameter.
  bool split_into_neighbors(RankRange merged) {
    Closed* lhs = left_closed_.empty() ? nullptr : &left_closed_.back();
    Closed* rhs = right_closed_.empty() ? nullptr : &right_closed_.back();
    if (lhs == nullptr && rhs == nullptr) return false;
    std::optional<std::size_t> best_cut;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t cut = merged.begin; cut <= merged.end; ++cut) {
      if (cut > merged.begin && lhs == nullptr) break;
      if (cut < merged.end && rhs == nullptr) continue;
      double num = 0.0;
      double den = 0.0;
      bool ok = true;
      if (lhs != nullptr) {
        const RankRange grown{lhs->range.begin, cut};
        ok = satisfies(grown);
        const std::vector<LocationId> m = members(grown);
        const double mass = prior_mass(domain_, m);
        num += mass * diameter(domain_, m);
        den += mass;
      }
      if (ok && rhs != nullptr) {
        const RankRange grown{cut, rhs->range.end};
        ok = satisfies(grown);
        const std::vector<LocationId> m = members(grown);
        const double mass = prior_mass(domain_, m);
        num += mass * diameter(domain_, m);
        den += mass;
      }
      if (!ok) continue;
      const double score = den > 0.0 ? num / den : 0.0;
      if (score < best_score) {
        best_score = score;
        best_cut = cut;
      }
    }
    if (!best_cut) return false;
    if (lhs != nullptr) lhs->range.end = *best_cut;
    if (rhs != nullptr) rhs->range.begin = *best_cut;
    return true;
  }

  // Unions `merged` with the most recently closed set, which is always one
  // of its two neighbors.
  RankRange absorb_latest(RankRange merged) {
    const bool take_left =
        !left_closed_.empty() &&
        (right_closed_.empty() || left_closed_.back().stamp > right_closed_.back().stamp);
    if (take_left) {
      merged.begin = left_closed_.back().range.begin;
      left_closed_.pop_back();
    } else {
      merged.end = right_closed_.back().range.end;
      right_closed_.pop_back();
    }
    return merged;
  }

  std::vector<RankRange> collect(std::optional<RankRange> middle) const {
    std::vector<RankRange> out;
    for (const Closed& c : left_closed_) out.push_back(c.range);
    if (middle) out.push_back(*middle);
    for (auto it = right_closed_.rbegin(); it != right_closed_.rend(); ++it) {
      out.push_back(it->range);
    }
    return out;
  }

  const LocationDomain& domain_;
  std::span<const LocationId> seq_;
  PrivacyParams params_;
  bool personalized_;
  std::vector<Closed> left_closed_;
  std::vector<Closed> right_closed_;
  std::size_t stamp_ = 0;
};

}  // namespace detail

// Two-sided construction of contiguous protection sets along one Hilbert
// ordering. With `personalized`, each set's budget is the smallest personal
// budget of its members.
inline Partition partition_on_ordering(const LocationDomain& domain,
                                       const HilbertOrdering& ordering,
                                       const PrivacyParams& params,
                                       bool personalized = false) {
  if (domain.size() < 4) {
    throw InvalidArgument("partitioning needs at least 4 locations");
  }
  if (ordering.sequence.size() != domain.size()) {
    throw InvalidArgument("ordering does not match the domain");
  }
  require_feasible(domain, params, personalized);

  detail::CurvePartitioner partitioner(domain, ordering.sequence, params, personalized);
  Partition out;
  out.params = params;
  out.provenance.algorithm = personalized ? "hilbert-personalized" : "hilbert";
  out.provenance.rotation = ordering.rotation;
  for (const detail::RankRange& r : partitioner.run()) {
    out.plss.push_back(make_pls(domain, partitioner.members(r), partitioner.eps_of(r)));
  }
  return out;
}

// Runs partition_on_ordering on the four rotated curves and keeps the result
// with the smallest weighted average diameter (earliest rotation on ties).
inline Partition best_partition_hilbert(const LocationDomain& domain,
                                        const PrivacyParams& params, unsigned order,
                                        bool personalized = false) {
  std::optional<Partition> best;
  double best_score = std::numeric_limits<double>::infinity();
  for (const HilbertOrdering& ordering : all_rotations(domain, order)) {
    Partition candidate = partition_on_ordering(domain, ordering, params, personalized);
    const double score = weighted_avg_diameter(candidate);
    if (!best || score < best_score) {
      best_score = score;
      best = std::move(candidate);
    }
  }
  return std::move(*best);
}

inline Partition best_partition_hilbert(const LocationDomain& domain,
                                        const PrivacyParams& params,
                                        bool personalized = false) {
  return best_partition_hilbert(domain, params, default_order(domain), personalized);
}

}  // namespace geoobf

#endif  // GEOOBF_PARTITION_HILBERT_HPP_
