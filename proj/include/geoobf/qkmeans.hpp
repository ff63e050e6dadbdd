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

#ifndef GEOOBF_QKMEANS_HPP_
#define GEOOBF_QKMEANS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoobf/domain.hpp"
#include "geoobf/errors.hpp"
#include "geoobf/partition.hpp"
#include "geoobf/partition_hilbert.hpp"
#include "geoobf/rng.hpp"

namespace geoobf {

struct QkConfig {
  std::size_t max_samp = 10;   // restarts per k
  std::size_t max_iter = 100;  // iterations per restart
  double center_tol = 1e-6;    // km
  std::uint64_t seed = 0;
  // Personalized runs scale distances by eps_weight(); false gives the
  // plain-distance variant.
  bool eps_weighting = true;

  void validate() const {
    if (max_samp < 1) throw InvalidArgument("max_samp must be >= 1");
    if (max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
    if (!(center_tol > 0.0)) throw InvalidArgument("center_tol must be positive");
  }
};

// Distance multiplier 1 + lambda - min(eps_x, eps_j) / max(eps_x, eps_j),
// within [lambda, 1 + lambda]. Smallest when the candidate's budget matches
// the cluster's.
inline double eps_weight(double eps_x, double eps_cluster, double lambda) {
  return 1.0 + lambda - std::min(eps_x, eps_cluster) / std::max(eps_x, eps_cluster);
}

// k-means++-style seeding: the first center is a uniformly chosen location,
// each further one a not-yet-chosen location drawn with probability
// proportional to its distance from the nearest chosen center.
inline std::vector<Point> seed_centers(const LocationDomain& domain, std::size_t k,
                                       Rng& rng) {
  const std::size_t n = domain.size();
  if (k == 0) throw InvalidArgument("k must be positive");
  if (k > n) {
    throw InvalidArgument("k = " + std::to_string(k) + " exceeds " +
                          std::to_string(n) + " locations");
  }
  std::vector<bool> chosen(n, false);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<Point> centers;
  centers.reserve(k);
  LocationId next = uniform_index(rng, n);
  while (true) {
    chosen[next] = true;
    centers.push_back(domain.pos(next));
    if (centers.size() == k) break;
    double total = 0.0;
    std::size_t remaining = 0;
    for (LocationId id = 0; id < n; ++id) {
      nearest[id] = std::min(nearest[id], domain.distance(id, next));
      if (!chosen[id]) {
        total += nearest[id];
        ++remaining;
      }
    }
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      std::optional<LocationId> pick;
      for (LocationId id = 0; id < n; ++id) {
        if (chosen[id] || nearest[id] <= 0.0) continue;
        acc += nearest[id];
        pick = id;
        if (acc > target) break;
      }
      next = *pick;
    } else {
      // Every remaining location coincides with a center.
      std::size_t skip = uniform_index(rng, remaining);
      for (LocationId id = 0; id < n; ++id) {
        if (chosen[id]) continue;
        if (skip-- == 0) {
          next = id;
          break;
        }
      }
    }
  }
  return centers;
}

struct AssignResult {
  bool ok = false;
  std::vector<std::vector<LocationId>> clusters;
  std::vector<double> eps_region;
};

// One assignment pass against fixed centers. Clusters start empty. Locations
// are taken in ascending order of their distance to the nearest center and
// each joins the nearest cluster that is still open; a cluster closes once
// it has two members and meets the partition condition. Once all clusters
// are closed, leftovers join the nearest cluster that still meets the
// condition afterwards. Fails if a cluster never closes or a leftover fits
// nowhere. Personalized runs scale distances by eps_weight() against the
// cluster's current budget.
inline AssignResult assign_round(const LocationDomain& domain,
                                 std::span<const Point> centers,
                                 const PrivacyParams& params, bool personalized,
                                 bool eps_weighting = true) {
  const std::size_t n = domain.size();
  const std::size_t k = centers.size();
  if (k == 0) throw InvalidArgument("no centers");
  const bool weighted = personalized && eps_weighting;
  const double inf = std::numeric_limits<double>::infinity();

  AssignResult res;
  res.clusters.assign(k, {});
  std::vector<double> cluster_eps(k, inf);
  std::vector<bool> closed(k, false);
  std::vector<bool> assigned(n, false);

  const auto eps_x = [&](LocationId id) { return domain.eps_or(id, params.eps); };
  const auto budget = [&](double eps_j) { return personalized ? eps_j : params.eps; };

  // sigma[id * k + j]: weighted distance from id to center j; key[id]: its
  // minimum over j.
  std::vector<double> base(n * k);
  std::vector<double> sigma(n * k);
  std::vector<double> key(n, inf);
  for (LocationId id = 0; id < n; ++id) {
    for (std::size_t j = 0; j < k; ++j) {
      base[id * k + j] = sigma[id * k + j] = distance(domain.pos(id), centers[j]);
      key[id] = std::min(key[id], sigma[id * k + j]);
    }
  }
  // Re-weights column j after cluster j's budget changed.
  const auto refresh = [&](std::size_t j) {
    if (!weighted) return;
    for (LocationId id = 0; id < n; ++id) {
      if (assigned[id]) continue;
      double& s = sigma[id * k + j];
      const double old = s;
      s = base[id * k + j] * eps_weight(eps_x(id), cluster_eps[j], params.lambda);
      if (s < key[id]) {
        key[id] = s;
      } else if (old == key[id] && s > old) {
        key[id] = *std::min_element(sigma.begin() + id * k, sigma.begin() + (id + 1) * k);
      }
    }
  };
  const auto next_location = [&] {
    LocationId best_id = 0;
    double best = inf;
    for (LocationId id = 0; id < n; ++id) {
      if (!assigned[id] && key[id] < best) {
        best = key[id];
        best_id = id;
      }
    }
    return best_id;
  };

  std::size_t open = k;
  std::size_t left = n;
  while (open > 0 && left > 0) {
    const LocationId id = next_location();
    std::size_t target = k;
    for (std::size_t j = 0; j < k; ++j) {
      if (!closed[j] && (target == k || sigma[id * k + j] < sigma[id * k + target])) target = j;
    }
    assigned[id] = true;
    --left;
    res.clusters[target].push_back(id);
    cluster_eps[target] = std::min(cluster_eps[target], eps_x(id));
    refresh(target);
    if (res.clusters[target].size() >= 2 &&
        check_condition(domain, res.clusters[target], budget(cluster_eps[target]),
                        params.em)) {
      closed[target] = true;
      --open;
    }
  }
  if (open > 0) return res;

  std::vector<std::size_t> order(k);
  while (left > 0) {
    const LocationId id = next_location();
    for (std::size_t j = 0; j < k; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return sigma[id * k + a] < sigma[id * k + b];
    });
    bool placed = false;
    for (std::size_t j : order) {
      std::vector<LocationId> trial = res.clusters[j];
      trial.push_back(id);
      const double eps_j = std::min(cluster_eps[j], eps_x(id));
      if (check_condition(domain, trial, budget(eps_j), params.em)) {
        res.clusters[j] = std::move(trial);
        assigned[id] = true;
        --left;
        if (eps_j != cluster_eps[j]) {
          cluster_eps[j] = eps_j;
          refresh(j);
        }
        placed = true;
        break;
      }
    }
    if (!placed) return res;
  }

  for (std::size_t j = 0; j < k; ++j) {
    std::sort(res.clusters[j].begin(), res.clusters[j].end());
    res.eps_region.push_back(budget(cluster_eps[j]));
  }
  res.ok = true;
  return res;
}

// Constrained k-means partitioning with adaptive k. Starting from the whole
// domain (k = 1), k grows while the best feasible family found over all
// restarts and iterations does not get a larger weighted average diameter.
inline Partition qk_partition(const LocationDomain& domain, const PrivacyParams& params,
                              const QkConfig& config, bool personalized = false) {
  config.validate();
  require_feasible(domain, params, personalized);
  const std::size_t n = domain.size();

  Partition best;
  best.params = params;
  best.provenance.algorithm = personalized
                                  ? (config.eps_weighting ? "qk-personalized"
                                                          : "qk-personalized-unweighted")
                                  : "qk";
  best.provenance.seed = config.seed;
  {
    std::vector<LocationId> all = domain.ids();
    const double eps = region_eps(domain, all, params, personalized);
    best.plss.push_back(make_pls(domain, std::move(all), eps));
  }
  double best_score = weighted_avg_diameter(best);

  for (std::size_t k = 2; 2 * k <= n; ++k) {
    std::optional<std::vector<Pls>> family;
    double family_score = std::numeric_limits<double>::infinity();
    for (std::size_t restart = 0; restart < config.max_samp; ++restart) {
      Rng rng = make_rng(config.seed, {kQkStream, k, restart});
      std::vector<Point> centers = seed_centers(domain, k, rng);
      for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
        AssignResult round =
            assign_round(domain, centers, params, personalized, config.eps_weighting);
        if (!round.ok) break;
        std::vector<Pls> plss;
        for (std::size_t j = 0; j < k; ++j) {
          plss.push_back(make_pls(domain, round.clusters[j], round.eps_region[j]));
        }
        const double score = weighted_avg_diameter(plss);
        if (score < family_score) {
          family_score = score;
          family = std::move(plss);
        }
        double moved = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
          Point mean;
          for (LocationId id : round.clusters[j]) {
            mean.x += domain.pos(id).x;
            mean.y += domain.pos(id).y;
          }
          const double size = static_cast<double>(round.clusters[j].size());
          mean.x /= size;
          mean.y /= size;
          moved = std::max(moved, distance(mean, centers[j]));
          centers[j] = mean;
        }
        if (moved < config.center_tol) break;
      }
    }
    if (!family || family_score > best_score) break;
    best.plss = std::move(*family);
    best_score = family_score;
  }
  return best;
}

}  // namespace geoobf

#endif  // GEOOBF_QKMEANS_HPP_
