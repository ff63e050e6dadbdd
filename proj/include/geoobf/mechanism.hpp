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

#ifndef GEOOBF_MECHANISM_HPP_
#define GEOOBF_MECHANISM_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "geoobf/domain.hpp"
#include "geoobf/errors.hpp"
#include "geoobf/partition.hpp"
#include "geoobf/rng.hpp"

namespace geoobf {

struct RowMeta {
  std::optional<std::size_t> pls;  // unset for the constant-diameter mechanism
  double sensitivity = 0.0;        // km
  double eps_region = 0.0;
};

// Dense row-stochastic release distribution: row x holds f(. | x).
class ObfuscationMatrix {
 public:
  ObfuscationMatrix() = default;

  // Arbitrary row-stochastic matrix without exponential-mechanism metadata.
  static ObfuscationMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    ObfuscationMatrix m;
    m.n_ = rows.size();
    m.probs_.reserve(m.n_ * m.n_);
    for (std::size_t i = 0; i < m.n_; ++i) {
      if (rows[i].size() != m.n_) throw InvalidArgument("matrix must be square");
      double sum = 0.0;
      for (double p : rows[i]) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
          throw InvalidArgument("row " + std::to_string(i) + " has a negative entry");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw InvalidArgument("row " + std::to_string(i) + " does not sum to 1");
      }
      m.probs_.insert(m.probs_.end(), rows[i].begin(), rows[i].end());
    }
    m.meta_.assign(m.n_, RowMeta{});
    m.normalizers_.assign(m.n_, 1.0);
    return m;
  }

  static ObfuscationMatrix identity(std::size_t n) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) rows[i][i] = 1.0;
    return from_rows(rows);
  }

  std::size_t size() const { return n_; }
  double operator()(std::size_t true_id, std::size_t pseudo_id) const {
    return probs_[true_id * n_ + pseudo_id];
  }
  std::span<const double> row(std::size_t true_id) const {
    return std::span<const double>(probs_).subspan(true_id * n_, n_);
  }
  const RowMeta& meta(std::size_t true_id) const { return meta_[true_id]; }
  // w(x) = 1 / sum_{x'} exp(-eps d(x, x') / (2 D)).
  double normalizer(std::size_t true_id) const { return normalizers_[true_id]; }

 private:
  template <typename Sensitivity>
  friend ObfuscationMatrix build_rows(const LocationDomain&, Sensitivity&&);

  std::size_t n_ = 0;
  std::vector<double> probs_;
  std::vector<RowMeta> meta_;
  std::vector<double> normalizers_;
};

// Exponential-mechanism rows f(x' | x) proportional to
// exp(-eps_x d(x, x') / (2 D_x)), (eps_x, D_x) supplied per row by `meta_of`.
template <typename Sensitivity>
ObfuscationMatrix build_rows(const LocationDomain& domain, Sensitivity&& meta_of) {
  ObfuscationMatrix m;
  const std::size_t n = domain.size();
  m.n_ = n;
  m.probs_.assign(n * n, 0.0);
  m.meta_.resize(n);
  m.normalizers_.resize(n);
  std::vector<double> score(n);
  for (LocationId x = 0; x < n; ++x) {
    const RowMeta meta = meta_of(x);
    if (!(meta.sensitivity > 0.0)) {
      throw InvalidArgument("zero sensitivity for location " + std::to_string(x));
    }
    if (!(meta.eps_region > 0.0)) {
      throw InvalidArgument("non-positive budget for location " + std::to_string(x));
    }
    const double scale = meta.eps_region / (2.0 * meta.sensitivity);
    double top = -std::numeric_limits<double>::infinity();
    for (LocationId y = 0; y < n; ++y) {
      score[y] = -scale * domain.distance(x, y);
      top = std::max(top, score[y]);
    }
    double shifted_sum = 0.0;
    for (LocationId y = 0; y < n; ++y) {
      score[y] = std::exp(score[y] - top);
      shifted_sum += score[y];
    }
    for (LocationId y = 0; y < n; ++y) m.probs_[x * n + y] = score[y] / shifted_sum;
    m.meta_[x] = meta;
    // sum of unshifted scores = exp(top) * shifted_sum
    m.normalizers_[x] = std::exp(-top) / shifted_sum;
  }
  return m;
}

// Regionalized mechanism: every row of a set uses that set's diameter as
// sensitivity and its eps_region as budget.
inline ObfuscationMatrix build_matrix(const LocationDomain& domain,
                                      const Partition& partition) {
  const std::vector<std::size_t> owner = partition.pls_of(domain.size());
  for (LocationId x = 0; x < domain.size(); ++x) {
    if (owner[x] == partition.plss.size()) {
      throw InvalidArgument("partition does not cover location " + std::to_string(x));
    }
  }
  return build_rows(domain, [&](LocationId x) {
    const Pls& p = partition.plss[owner[x]];
    return RowMeta{owner[x], p.diam, p.eps_region};
  });
}

// Baseline: one sensitivity `d_const` and budget `eps` for every row.
inline ObfuscationMatrix build_matrix_constant(const LocationDomain& domain,
                                               double d_const, double eps) {
  if (!(d_const > 0.0)) throw InvalidArgument("constant diameter must be positive");
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  return build_rows(domain,
                    [&](LocationId) { return RowMeta{std::nullopt, d_const, eps}; });
}

// Draws a pseudo-location id from row `true_id` by inverse CDF.
inline std::size_t sample_pseudo(const ObfuscationMatrix& matrix, std::size_t true_id,
                                 Rng& rng) {
  if (true_id >= matrix.size()) throw InvalidArgument("true id out of range");
  const std::span<const double> row = matrix.row(true_id);
  const double u = uniform01(rng);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] <= 0.0) continue;
    acc += row[j];
    last_positive = j;
    if (u < acc) return j;
  }
  return last_positive;
}

// Matrix CSV: header `true_id,0,1,...,n-1`, then one row per true location,
// probabilities at 12 significant digits.
inline void write_matrix(std::ostream& out, const ObfuscationMatrix& matrix) {
  const std::size_t n = matrix.size();
  out << "true_id";
  for (std::size_t j = 0; j < n; ++j) out << ',' << j;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < n; ++i) {
    out << i;
    for (std::size_t j = 0; j < n; ++j) {
      std::snprintf(buf, sizeof(buf), "%.12g", matrix(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

// Reads write_matrix output. Rows are renormalized to absorb the 12-digit
// rounding.
inline ObfuscationMatrix read_matrix(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> n;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    const auto f = detail::split_csv(view);
    if (!n) {
      if (f.empty() || f[0] != "true_id") throw ParseError(line_no, "expected header");
      for (std::size_t j = 1; j < f.size(); ++j) {
        const auto id = detail::parse_uint(f[j]);
        if (!id || *id != j - 1) throw ParseError(line_no, "bad pseudo id header");
      }
      n = f.size() - 1;
      continue;
    }
    if (f.size() != *n + 1) throw ParseError(line_no, "wrong number of fields");
    const auto id = detail::parse_uint(f[0]);
    if (!id || *id != rows.size()) throw ParseError(line_no, "rows out of order");
    std::vector<double> row(*n);
    double sum = 0.0;
    for (std::size_t j = 0; j < *n; ++j) {
      const auto v = detail::parse_double(f[j + 1]);
      if (!v || *v < 0.0) throw ParseError(line_no, "bad probability");
      row[j] = *v;
      sum += *v;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw ParseError(line_no, "row does not sum to 1");
    for (double& v : row) v /= sum;
    rows.push_back(std::move(row));
  }
  if (!n || rows.size() != *n) throw ParseError(0, "matrix is not square");
  return ObfuscationMatrix::from_rows(rows);
}

}  // namespace geoobf

#endif  // GEOOBF_MECHANISM_HPP_
