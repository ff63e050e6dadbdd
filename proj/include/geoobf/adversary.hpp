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

#ifndef GEOOBF_ADVERSARY_HPP_
#define GEOOBF_ADVERSARY_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geoobf/domain.hpp"
#include "geoobf/errors.hpp"
#include "geoobf/mechanism.hpp"

namespace geoobf {

namespace detail {

inline void require_same_size(const LocationDomain& domain,
                              const ObfuscationMatrix& matrix) {
  if (domain.size() != matrix.size()) {
    throw InvalidArgument("matrix size " + std::to_string(matrix.size()) +
                          " does not match domain size " + std::to_string(domain.size()));
  }
}

// pi(x) * f(x' | x) for every x.
inline std::vector<double> joint_column(const LocationDomain& domain,
                                        const ObfuscationMatrix& matrix,
                                        std::size_t pseudo_id) {
  require_same_size(domain, matrix);
  if (pseudo_id >= matrix.size()) throw InvalidArgument("pseudo id out of range");
  std::vector<double> joint(domain.size());
  for (LocationId x = 0; x < domain.size(); ++x) {
    joint[x] = domain.prior(x) * matrix(x, pseudo_id);
  }
  return joint;
}

}  // namespace detail

// Pr(x') = sum_x pi(x) f(x' | x).
inline double pseudo_probability(const LocationDomain& domain,
                                 const ObfuscationMatrix& matrix, std::size_t pseudo_id) {
  double total = 0.0;
  for (double v : detail::joint_column(domain, matrix, pseudo_id)) total += v;
  return total;
}

// Pr(x | x') by Bayes' rule.
inline std::vector<double> posterior(const LocationDomain& domain,
                                     const ObfuscationMatrix& matrix,
                                     std::size_t pseudo_id) {
  std::vector<double> post = detail::joint_column(domain, matrix, pseudo_id);
  double total = 0.0;
  for (double v : post) total += v;
  if (!(total > 0.0)) {
    throw InvalidArgument("pseudo-location " + std::to_string(pseudo_id) +
                          " has zero probability");
  }
  for (double& v : post) v /= total;
  return post;
}

// Location minimizing the posterior-expected distance; lowest id on ties.
inline std::size_t optimal_attack(const LocationDomain& domain,
                                  std::span<const double> post) {
  if (post.size() != domain.size()) throw InvalidArgument("posterior size mismatch");
  const std::vector<LocationId> all = domain.ids();
  LocationId guess = 0;
  detail::weighted_min_cost(domain, all, post, all, &guess);
  return guess;
}

// Maximum a posteriori guess; lowest id on ties.
inline std::size_t bayes_attack(std::span<const double> post) {
  if (post.empty()) throw InvalidArgument("empty posterior");
  std::size_t best = 0;
  for (std::size_t i = 1; i < post.size(); ++i) {
    if (post[i] > post[best]) best = i;
  }
  return best;
}

// Expected error of the optimal attack after observing `pseudo_id`.
inline double cond_exp_err(const LocationDomain& domain, const ObfuscationMatrix& matrix,
                           std::size_t pseudo_id) {
  const std::vector<double> post = posterior(domain, matrix, pseudo_id);
  const std::vector<LocationId> all = domain.ids();
  return detail::weighted_min_cost(domain, all, post, all);
}

// Unconditional expected inference error,
// sum_{x'} min_{g} sum_x pi(x) f(x'|x) d(g, x).
inline double exp_err(const LocationDomain& domain, const ObfuscationMatrix& matrix) {
  detail::require_same_size(domain, matrix);
  const std::vector<LocationId> all = domain.ids();
  double total = 0.0;
  for (std::size_t pseudo = 0; pseudo < matrix.size(); ++pseudo) {
    const std::vector<double> joint = detail::joint_column(domain, matrix, pseudo);
    total += detail::weighted_min_cost(domain, all, joint, all);
  }
  return total;
}

// Expected distance between true and reported location.
inline double qloss(const LocationDomain& domain, const ObfuscationMatrix& matrix) {
  detail::require_same_size(domain, matrix);
  double total = 0.0;
  for (LocationId x = 0; x < domain.size(); ++x) {
    double row = 0.0;
    for (LocationId y = 0; y < domain.size(); ++y) {
      row += matrix(x, y) * domain.distance(x, y);
    }
    total += domain.prior(x) * row;
  }
  return total;
}

namespace detail {

template <typename Guess>
std::vector<std::size_t> guesses(const LocationDomain& domain,
                                 const ObfuscationMatrix& matrix, Guess&& guess) {
  require_same_size(domain, matrix);
  std::vector<std::size_t> out(matrix.size());
  for (std::size_t pseudo = 0; pseudo < matrix.size(); ++pseudo) {
    out[pseudo] = guess(posterior(domain, matrix, pseudo));
  }
  return out;
}

inline std::vector<std::size_t> optimal_guesses(const LocationDomain& domain,
                                                const ObfuscationMatrix& matrix) {
  return guesses(domain, matrix,
                 [&](const std::vector<double>& p) { return optimal_attack(domain, p); });
}

inline std::vector<std::size_t> bayes_guesses(const LocationDomain& domain,
                                              const ObfuscationMatrix& matrix) {
  return guesses(domain, matrix,
                 [](const std::vector<double>& p) { return bayes_attack(p); });
}

inline double avg_err_with(const LocationDomain& domain, const ObfuscationMatrix& matrix,
                           std::span<const std::size_t> guess, std::size_t true_id) {
  double total = 0.0;
  for (std::size_t pseudo = 0; pseudo < matrix.size(); ++pseudo) {
    total += matrix(true_id, pseudo) * domain.distance(guess[pseudo], true_id);
  }
  return total;
}

inline double success_with(const ObfuscationMatrix& matrix,
                           std::span<const std::size_t> guess, std::size_t true_id) {
  double total = 0.0;
  for (std::size_t pseudo = 0; pseudo < matrix.size(); ++pseudo) {
    if (guess[pseudo] == true_id) total += matrix(true_id, pseudo);
  }
  return total;
}

}  // namespace detail

// Mean distance between the optimal attacker's guess and `true_id`.
inline double avg_err(const LocationDomain& domain, const ObfuscationMatrix& matrix,
                      std::size_t true_id) {
  if (true_id >= domain.size()) throw InvalidArgument("true id out of range");
  const auto guess = detail::optimal_guesses(domain, matrix);
  return detail::avg_err_with(domain, matrix, guess, true_id);
}

// Probability that the MAP attacker names `true_id` exactly.
inline double success_prob(const LocationDomain& domain, const ObfuscationMatrix& matrix,
                           std::size_t true_id) {
  if (true_id >= domain.size()) throw InvalidArgument("true id out of range");
  const auto guess = detail::bayes_guesses(domain, matrix);
  return detail::success_with(matrix, guess, true_id);
}

// Expected Hamming distance between the MAP guess and `true_id`, i.e.
// 1 - success_prob.
inline double hamming_failure_prob(const LocationDomain& domain,
                                   const ObfuscationMatrix& matrix, std::size_t true_id) {
  if (true_id >= domain.size()) throw InvalidArgument("true id out of range");
  const auto guess = detail::bayes_guesses(domain, matrix);
  double total = 0.0;
  for (std::size_t pseudo = 0; pseudo < matrix.size(); ++pseudo) {
    if (guess[pseudo] != true_id) total += matrix(true_id, pseudo);
  }
  return total;
}

struct MetricsReport {
  double exp_err = 0.0;
  double qloss = 0.0;
  std::vector<double> cond_err;  // per pseudo-location
  std::vector<double> avg_err;   // per true location
  std::vector<double> success;   // per true location
};

inline MetricsReport evaluate(const LocationDomain& domain,
                              const ObfuscationMatrix& matrix) {
  detail::require_same_size(domain, matrix);
  const std::size_t n = domain.size();
  MetricsReport r;
  r.exp_err = exp_err(domain, matrix);
  r.qloss = qloss(domain, matrix);
  r.cond_err.resize(n);
  for (std::size_t pseudo = 0; pseudo < n; ++pseudo) {
    r.cond_err[pseudo] = cond_exp_err(domain, matrix, pseudo);
  }
  const auto optimal = detail::optimal_guesses(domain, matrix);
  const auto bayes = detail::bayes_guesses(domain, matrix);
  r.avg_err.resize(n);
  r.success.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    r.avg_err[x] = detail::avg_err_with(domain, matrix, optimal, x);
    r.success[x] = detail::success_with(matrix, bayes, x);
  }
  return r;
}

inline constexpr std::array<std::string_view, 5> kMetricNames = {
    "exp_err", "qloss", "cond_err", "avg_err", "success"};

inline std::string metric_names_list() {
  std::string out;
  for (std::string_view name : kMetricNames) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

inline bool is_metric_name(std::string_view name) {
  return std::find(kMetricNames.begin(), kMetricNames.end(), name) != kMetricNames.end();
}

// Metrics CSV `metric,location_or_pseudo_id,value`; scalar metrics leave the
// id empty. An empty `metrics` selection writes all of them.
inline void write_metrics(std::ostream& out, const MetricsReport& report,
                          std::span<const std::string> metrics = {}) {
  for (const std::string& m : metrics) {
    if (!is_metric_name(m)) {
      throw InvalidArgument("unknown metric '" + m + "'; valid: " + metric_names_list());
    }
  }
  const auto wanted = [&](std::string_view name) {
    return metrics.empty() || std::find(metrics.begin(), metrics.end(), name) != metrics.end();
  };
  out << "metric,location_or_pseudo_id,value\n";
  if (wanted("exp_err")) out << "exp_err,," << detail::format_double(report.exp_err) << '\n';
  if (wanted("qloss")) out << "qloss,," << detail::format_double(report.qloss) << '\n';
  const auto series = [&](std::string_view name, const std::vector<double>& v) {
    if (!wanted(name)) return;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out << name << ',' << i << ',' << detail::format_double(v[i]) << '\n';
    }
  };
  series("cond_err", report.cond_err);
  series("avg_err", report.avg_err);
  series("success", report.success);
}

inline MetricsReport read_metrics(std::istream& in) {
  MetricsReport r;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    const auto f = detail::split_csv(view);
    if (!header_seen) {
      if (f.size() != 3 || f[0] != "metric") throw ParseError(line_no, "expected header");
      header_seen = true;
      continue;
    }
    if (f.size() != 3) throw ParseError(line_no, "expected 3 fields");
    const auto value = detail::parse_double(f[2]);
    if (!value) throw ParseError(line_no, "bad value");
    if (f[0] == "exp_err") {
      r.exp_err = *value;
    } else if (f[0] == "qloss") {
      r.qloss = *value;
    } else {
      std::vector<double>* target = f[0] == "cond_err"  ? &r.cond_err
                                    : f[0] == "avg_err" ? &r.avg_err
                                    : f[0] == "success" ? &r.success
                                                        : nullptr;
      if (target == nullptr) {
        throw ParseError(line_no, "unknown metric '" + std::string(f[0]) + "'");
      }
      const auto id = detail::parse_uint(f[1]);
      if (!id) throw ParseError(line_no, "bad id");
      if (*id >= target->size()) target->resize(*id + 1, 0.0);
      (*target)[*id] = *value;
    }
  }
  if (!header_seen) throw ParseError(0, "empty metrics file");
  return r;
}

}  // namespace geoobf

#endif  // GEOOBF_ADVERSARY_HPP_
