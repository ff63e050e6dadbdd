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

// Shared fixtures and brute-force oracles for the test suites. The oracles
// are written independently of the library code paths they check.

#ifndef GEOOBF_TESTS_FIXTURES_HPP_
#define GEOOBF_TESTS_FIXTURES_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "geoobf.hpp"

namespace geoobf::testing {

inline LocationDomain make_domain(const std::vector<Point>& points,
                                  std::vector<double> priors = {}) {
  if (priors.empty()) priors.assign(points.size(), 1.0);
  std::vector<Location> locs(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    locs[i].id = i;
    locs[i].pos = points[i];
    locs[i].prior = priors[i];
  }
  return LocationDomain(std::move(locs));
}

// Points at 0, 1, ..., n-1 km on the x axis, uniform prior.
inline LocationDomain line_domain(std::size_t n) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({static_cast<double>(i), 0.0});
  return make_domain(pts);
}

// Triangle A=(50,120), B=(0,0), C=(100,0) with edges 130, 130, 100 and an
// extra domain point F=(50,29) outside it; uniform prior over {A,B,C,F}.
inline LocationDomain triangle_domain() {
  return make_domain({{50, 120}, {0, 0}, {100, 0}, {50, 29}});
}

inline LocationDomain corpus_domain(std::uint64_t seed, std::size_t n,
                                    bool personal_eps = false) {
  SynthOptions opt;
  opt.n = n;
  opt.seed = seed;
  if (personal_eps) opt.eps_range = std::make_pair(0.5, 1.5);
  return synth_domain(opt);
}

// --- oracles ---------------------------------------------------------------

inline double oracle_distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// min over candidates c of sum_i w_i d(c, member_i), full double loop.
inline double oracle_min_cost(const LocationDomain& d, const std::vector<LocationId>& members,
                              const std::vector<double>& w,
                              const std::vector<LocationId>& candidates,
                              LocationId* argmin = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  LocationId arg = 0;
  for (LocationId c : candidates) {
    double s = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      s += w[i] * d.distance(c, members[i]);
    }
    if (s < best) {
      best = s;
      arg = c;
    }
  }
  if (argmin) *argmin = arg;
  return best;
}

inline double oracle_e_prime(const LocationDomain& d, const std::vector<LocationId>& members,
                             bool restricted = false) {
  if (members.size() == 1) return 0.0;
  double mass = 0.0;
  for (LocationId id : members) mass += d.prior(id);
  std::vector<double> w;
  for (LocationId id : members) w.push_back(d.prior(id) / mass);
  return oracle_min_cost(d, members, w, restricted ? members : d.ids());
}

inline std::vector<double> oracle_posterior(const LocationDomain& d,
                                            const ObfuscationMatrix& m, std::size_t pseudo) {
  std::vector<double> p(d.size());
  double z = 0.0;
  for (LocationId x = 0; x < d.size(); ++x) z += d.prior(x) * m(x, pseudo);
  for (LocationId x = 0; x < d.size(); ++x) p[x] = d.prior(x) * m(x, pseudo) / z;
  return p;
}

inline double oracle_cond_exp_err(const LocationDomain& d, const ObfuscationMatrix& m,
                                  std::size_t pseudo, LocationId* guess = nullptr) {
  const std::vector<double> post = oracle_posterior(d, m, pseudo);
  return oracle_min_cost(d, d.ids(), post, d.ids(), guess);
}

// Largest ln f(x'|x) - ln f(x'|y) over all columns x'.
inline double max_log_ratio(const ObfuscationMatrix& m, std::size_t x, std::size_t y) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < m.size(); ++c) {
    worst = std::max(worst, std::log(m(x, c)) - std::log(m(y, c)));
  }
  return worst;
}

}  // namespace geoobf::testing

#endif  // GEOOBF_TESTS_FIXTURES_HPP_
