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

#include "geoobf/mechanism.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "fixtures.hpp"
#include "gtest/gtest.h"

namespace geoobf {
namespace {

using ::geoobf::testing::line_domain;
using ::geoobf::testing::max_log_ratio;

double row_entropy(const ObfuscationMatrix& m, std::size_t x) {
  double h = 0.0;
  for (double p : m.row(x)) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

Partition single_set_partition(const LocationDomain& d, double eps) {
  Partition p;
  p.params.eps = eps;
  p.plss.push_back(make_pls(d, d.ids(), eps));
  return p;
}

TEST(BuildMatrixTest, ExponentialRowExample) {
  const LocationDomain d = line_domain(3);
  const ObfuscationMatrix m = build_matrix_constant(d, 1.0, 2.0);
  EXPECT_NEAR(m(0, 0), 0.665241, 1e-6);
  EXPECT_NEAR(m(0, 1), 0.244728, 1e-6);
  EXPECT_NEAR(m(0, 2), 0.090031, 1e-6);
  EXPECT_NEAR(1.0 / m.normalizer(0), 1.503215, 1e-6);
  EXPECT_EQ(m.meta(0).sensitivity, 1.0);
  EXPECT_EQ(m.meta(0).eps_region, 2.0);
  EXPECT_FALSE(m.meta(0).pls.has_value());
}

TEST(BuildMatrixTest, NormalizerMatchesDirectSum) {
  const LocationDomain d = testing::corpus_domain(5, 25);
  PrivacyParams params;
  params.eps = 0.9;
  params.em = 0.2;
  const Partition part = best_partition_hilbert(d, params);
  const ObfuscationMatrix m = build_matrix(d, part);
  const auto owner = part.pls_of(d.size());
  for (LocationId x = 0; x < d.size(); ++x) {
    const Pls& p = part.plss[owner[x]];
    double z = 0.0;
    for (LocationId y = 0; y < d.size(); ++y) {
      z += std::exp(-p.eps_region * d.distance(x, y) / (2.0 * p.diam));
    }
    EXPECT_NEAR(m.normalizer(x) * z, 1.0, 1e-12);
    for (LocationId y = 0; y < d.size(); ++y) {
      const double direct = std::exp(-p.eps_region * d.distance(x, y) / (2.0 * p.diam)) / z;
      EXPECT_NEAR(m(x, y), direct, 1e-14);
    }
    EXPECT_EQ(m.meta(x).pls, owner[x]);
    EXPECT_EQ(m.meta(x).sensitivity, p.diam);
  }
}

TEST(BuildMatrixTest, TinyBudgetIsNearlyUniform) {
  const LocationDomain d = line_domain(7);
  const ObfuscationMatrix m = build_matrix_constant(d, 1.0, 1e-12);
  for (LocationId x = 0; x < 7; ++x) {
    for (LocationId y = 0; y < 7; ++y) EXPECT_NEAR(m(x, y), 1.0 / 7.0, 1e-10);
  }
}

TEST(BuildMatrixTest, MirrorSymmetricOnALine) {
  const LocationDomain d = line_domain(5);
  const ObfuscationMatrix m = build_matrix_constant(d, 4.0, 1.3);
  for (LocationId x = 0; x < 5; ++x) {
    for (LocationId y = 0; y < 5; ++y) EXPECT_NEAR(m(x, y), m(4 - x, 4 - y), 1e-15);
  }
}

TEST(BuildMatrixTest, SingleSetEqualsConstantAtItsDiameter) {
  const LocationDomain d = testing::corpus_domain(9, 15);
  const double diam = diameter(d, d.ids());
  const ObfuscationMatrix a = build_matrix(d, single_set_partition(d, 0.7));
  const ObfuscationMatrix b = build_matrix_constant(d, diam, 0.7);
  for (LocationId x = 0; x < d.size(); ++x) {
    for (LocationId y = 0; y < d.size(); ++y) EXPECT_EQ(a(x, y), b(x, y));
  }
}

TEST(BuildMatrixTest, EntropyGrowsWithSensitivity) {
  const LocationDomain d = testing::corpus_domain(2, 20);
  const ObfuscationMatrix m1 = build_matrix_constant(d, 1.0, 1.0);
  const ObfuscationMatrix m2 = build_matrix_constant(d, 2.0, 1.0);
  const ObfuscationMatrix m4 = build_matrix_constant(d, 4.0, 1.0);
  const ObfuscationMatrix odd = build_matrix_constant(d, 1.66, 1.0);
  for (LocationId x = 0; x < d.size(); ++x) {
    EXPECT_LE(row_entropy(m1, x), row_entropy(m2, x) + 1e-12);
    EXPECT_LE(row_entropy(m2, x), row_entropy(m4, x) + 1e-12);
    double sum = 0.0;
    for (double p : odd.row(x)) sum += p;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(BuildMatrixTest, RejectsBadInputs) {
  const LocationDomain d = line_domain(4);
  EXPECT_THROW(build_matrix_constant(d, 0.0, 1.0), InvalidArgument);
  EXPECT_THROW(build_matrix_constant(d, 1.0, 0.0), InvalidArgument);
  Partition partial;
  partial.plss.push_back(make_pls(d, {0, 1}, 1.0));
  EXPECT_THROW(build_matrix(d, partial), InvalidArgument);
  EXPECT_THROW(ObfuscationMatrix::from_rows({{0.5, 0.4}, {0.5, 0.5}}), InvalidArgument);
  EXPECT_THROW(ObfuscationMatrix::from_rows({{1.0, 0.0}}), InvalidArgument);
  EXPECT_THROW(ObfuscationMatrix::from_rows({{1.5, -0.5}, {0.5, 0.5}}), InvalidArgument);
}

TEST(PrivacyBoundTest, WithinSetRatioBounded) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LocationDomain d = testing::corpus_domain(seed, 30);
    PrivacyParams params;
    params.eps = 0.6;
    params.em = 0.15;
    const Partition part = best_partition_hilbert(d, params);
    const ObfuscationMatrix m = build_matrix(d, part);
    for (const Pls& p : part.plss) {
      for (LocationId x : p.members) {
        for (LocationId y : p.members) {
          if (x == y) continue;
          const double r = max_log_ratio(m, x, y);
          EXPECT_LE(r, p.eps_region + 1e-9);
          EXPECT_LE(r, p.eps_region / (2.0 * p.diam) * (d.distance(x, y) + p.diam) + 1e-9);
        }
      }
    }
  }
}

TEST(SamplePseudoTest, DegenerateRowAlwaysReturnsItsSupport) {
  const ObfuscationMatrix m = ObfuscationMatrix::from_rows({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}});
  Rng rng = make_rng(1, {kSampleStream});
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(sample_pseudo(m, 0, rng), 1u);
    EXPECT_EQ(sample_pseudo(m, 1, rng), 2u);
    EXPECT_EQ(sample_pseudo(m, 2, rng), 0u);
  }
  EXPECT_THROW(sample_pseudo(m, 3, rng), InvalidArgument);
}

TEST(SamplePseudoTest, EmpiricalDistributionMatchesRow) {
  const LocationDomain d = line_domain(6);
  const ObfuscationMatrix m = build_matrix_constant(d, 2.0, 1.0);
  Rng rng = make_rng(11, {kSampleStream});
  const int draws = 100000;
  std::vector<int> counts(6, 0);
  for (int i = 0; i < draws; ++i) ++counts[sample_pseudo(m, 2, rng)];
  double tv = 0.0;
  for (std::size_t j = 0; j < 6; ++j) {
    tv += std::abs(counts[j] / static_cast<double>(draws) - m(2, j));
  }
  EXPECT_LT(tv / 2.0, 0.01);
}

TEST(SamplePseudoTest, DeterministicForASeed) {
  const LocationDomain d = line_domain(6);
  const ObfuscationMatrix m = build_matrix_constant(d, 2.0, 1.0);
  Rng a = make_rng(5, {kSampleStream});
  Rng b = make_rng(5, {kSampleStream});
  for (int i = 0; i < 200; ++i) EXPECT_EQ(sample_pseudo(m, 3, a), sample_pseudo(m, 3, b));
}

TEST(MatrixCsvTest, RoundTrip) {
  const LocationDomain d = testing::corpus_domain(1, 12);
  const ObfuscationMatrix m = build_matrix_constant(d, 3.0, 0.8);
  std::stringstream buf;
  write_matrix(buf, m);
  const std::string text = buf.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "true_id,0,1,2,3,4,5,6,7,8,9,10,11");
  const ObfuscationMatrix back = read_matrix(buf);
  ASSERT_EQ(back.size(), m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) EXPECT_NEAR(back(i, j), m(i, j), 1e-11);
  }
}

TEST(MatrixCsvTest, RejectsMalformedInput) {
  std::istringstream no_header("0,1\n");
  EXPECT_THROW(read_matrix(no_header), ParseError);
  std::istringstream ragged("true_id,0,1\n0,1\n");
  EXPECT_THROW(read_matrix(ragged), ParseError);
  std::istringstream not_square("true_id,0,1\n0,1,0\n");
  EXPECT_THROW(read_matrix(not_square), ParseError);
  std::istringstream bad_sum("true_id,0,1\n0,0.5,0.4\n1,0,1\n");
  EXPECT_THROW(read_matrix(bad_sum), ParseError);
}

}  // namespace
}  // namespace geoobf
