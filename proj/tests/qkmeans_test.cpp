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

#include "geoobf/qkmeans.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "gtest/gtest.h"

namespace geoobf {
namespace {

using ::geoobf::testing::line_domain;
using ::geoobf::testing::make_domain;

using Sets = std::vector<std::vector<LocationId>>;

Sets members_of(const Partition& p) {
  Sets out;
  for (const Pls& pls : p.plss) out.push_back(pls.members);
  std::sort(out.begin(), out.end());
  return out;
}

TEST(EpsWeightTest, Examples) {
  EXPECT_DOUBLE_EQ(eps_weight(1.0, 1.0, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(eps_weight(0.5, 1.0, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(eps_weight(1.0, 0.5, 0.5), 1.0);
  for (double a = 0.1; a < 3.0; a += 0.3) {
    for (double b = 0.1; b < 3.0; b += 0.3) {
      const double w = eps_weight(a, b, 0.25);
      EXPECT_GE(w, 0.25);
      EXPECT_LE(w, 1.25);
    }
  }
}

TEST(SeedCentersTest, SizesAndErrors) {
  const LocationDomain d = line_domain(6);
  Rng rng = make_rng(1, {kQkStream});
  EXPECT_EQ(seed_centers(d, 1, rng).size(), 1u);
  std::vector<Point> all = seed_centers(d, 6, rng);
  ASSERT_EQ(all.size(), 6u);
  std::vector<double> xs;
  for (const Point& p : all) xs.push_back(p.x);
  std::sort(xs.begin(), xs.end());
  EXPECT_EQ(xs, (std::vector<double>{0, 1, 2, 3, 4, 5}));
  EXPECT_THROW(seed_centers(d, 0, rng), InvalidArgument);
  EXPECT_THROW(seed_centers(d, 7, rng), InvalidArgument);
}

TEST(SeedCentersTest, CoincidentLocationsStillYieldDistinctIds) {
  const LocationDomain d = make_domain({{0, 0}, {0, 0}, {0, 0}});
  Rng rng = make_rng(2, {kQkStream});
  EXPECT_EQ(seed_centers(d, 3, rng).size(), 3u);
}

TEST(SeedCentersTest, FavoursDistantCluster) {
  std::vector<Point> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({i * 0.1, 0.0});
  for (int i = 0; i < 5; ++i) pts.push_back({100.0 + i * 0.1, 0.0});
  const LocationDomain d = make_domain(pts);
  int split = 0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    Rng rng = make_rng(7, {kQkStream, t});
    const std::vector<Point> c = seed_centers(d, 2, rng);
    if ((c[0].x < 50) != (c[1].x < 50)) ++split;
  }
  EXPECT_GE(split, 900);
}

TEST(AssignRoundTest, SingleCenterTakesEverything) {
  const LocationDomain d = line_domain(5);
  PrivacyParams params;
  params.eps = 0.1;
  params.em = 0.4;
  const std::vector<Point> centers = {{2.0, 0.0}};
  const AssignResult r = assign_round(d, centers, params, false);
  ASSERT_TRUE(r.ok);
  EXPECT_EQ(r.clusters, (Sets{{0, 1, 2, 3, 4}}));
  EXPECT_EQ(r.eps_region, (std::vector<double>{0.1}));
}

TEST(AssignRoundTest, WellPlacedCentersGivePairs) {
  const LocationDomain d = line_domain(6);
  PrivacyParams params;
  params.eps = 0.1;
  params.em = 0.4;
  const std::vector<Point> centers = {{0.5, 0}, {2.5, 0}, {4.5, 0}};
  const AssignResult r = assign_round(d, centers, params, false);
  ASSERT_TRUE(r.ok);
  EXPECT_EQ(r.clusters, (Sets{{0, 1}, {2, 3}, {4, 5}}));
}

TEST(AssignRoundTest, LeftoverJoinsNearestQualifyingCluster) {
  const LocationDomain d = line_domain(5);
  PrivacyParams params;
  params.eps = 0.1;
  params.em = 0.4;
  const std::vector<Point> centers = {{0.5, 0}, {3.5, 0}};
  const AssignResult r = assign_round(d, centers, params, false);
  ASSERT_TRUE(r.ok);
  EXPECT_EQ(r.clusters, (Sets{{0, 1, 2}, {3, 4}}));
}

TEST(AssignRoundTest, OrderFollowsNearestCenterEvenIfClosed) {
  // Location 0 sits 1 km from the closed left center, so it is taken before
  // 3 and 4 (2 km from the right center) and has to join the right cluster.
  std::vector<Point> pts = {{-0.5, 0}, {0, 0}, {1, 0}, {4, 0}, {8, 0}};
  const LocationDomain d = make_domain(pts);
  PrivacyParams params;
  params.eps = 0.1;
  params.em = 0.4;
  const std::vector<Point> centers = {{0.5, 0}, {6, 0}};
  const AssignResult r = assign_round(d, centers, params, false);
  ASSERT_TRUE(r.ok);
  EXPECT_EQ(r.clusters, (Sets{{1, 2}, {0, 3, 4}}));
}

TEST(AssignRoundTest, FailsWhenAClusterCannotClose) {
  const LocationDomain d = line_domain(3);
  PrivacyParams params;
  params.eps = 0.1;
  params.em = 0.6 / std::exp(0.1);
  const std::vector<Point> centers = {{0, 0}, {2, 0}};
  EXPECT_FALSE(assign_round(d, centers, params, false).ok);
}

TEST(QkPartitionTest, SixPointLineGivesPairs) {
  const LocationDomain d = line_domain(6);
  PrivacyParams params;
  params.eps = 0.1;
  params.em = 0.4;
  QkConfig config;
  config.seed = 3;
  const Partition p = qk_partition(d, params, config);
  EXPECT_EQ(members_of(p), (Sets{{0, 1}, {2, 3}, {4, 5}}));
  EXPECT_DOUBLE_EQ(weighted_avg_diameter(p), 1.0);
  EXPECT_EQ(p.provenance.algorithm, "qk");
  EXPECT_EQ(p.provenance.seed, 3u);
}

TEST(QkPartitionTest, TinyDomainFallsBackToWholeSet) {
  const LocationDomain d = line_domain(3);
  PrivacyParams params;
  params.eps = 0.5;
  params.em = 0.1;
  const Partition p = qk_partition(d, params, QkConfig{});
  EXPECT_EQ(members_of(p), (Sets{{0, 1, 2}}));
  EXPECT_TRUE(partition_violations(d, p).empty());
}

TEST(QkPartitionTest, InfeasibleParametersThrow) {
  const LocationDomain d = line_domain(6);
  PrivacyParams params;
  params.eps = 1.0;
  params.em = 5.0;
  EXPECT_THROW(qk_partition(d, params, QkConfig{}), InfeasibleError);
}

TEST(QkPartitionTest, ValidAndDeterministicOnSyntheticDomains) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const LocationDomain d = testing::corpus_domain(seed, 40);
    PrivacyParams params;
    params.eps = 1.0;
    params.em = 0.1;
    QkConfig config;
    config.seed = seed;
    const Partition p = qk_partition(d, params, config);
    const auto v = partition_violations(d, p);
    EXPECT_TRUE(v.empty()) << "seed " << seed << ": " << v.front();
    EXPECT_EQ(members_of(qk_partition(d, params, config)), members_of(p));
  }
}

TEST(QkPartitionTest, PersonalizedBudgetsAreMemberMinimum) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const LocationDomain d = testing::corpus_domain(seed, 30, /*personal_eps=*/true);
    PrivacyParams params;
    params.em = 0.1;
    for (bool weighting : {true, false}) {
      QkConfig config;
      config.seed = seed;
      config.eps_weighting = weighting;
      const Partition p = qk_partition(d, params, config, /*personalized=*/true);
      EXPECT_TRUE(partition_violations(d, p).empty());
      EXPECT_EQ(p.provenance.algorithm,
                weighting ? "qk-personalized" : "qk-personalized-unweighted");
      for (const Pls& pls : p.plss) {
        double lowest = 1e9;
        for (LocationId id : pls.members) lowest = std::min(lowest, *d[id].eps);
        EXPECT_EQ(pls.eps_region, lowest);
      }
    }
  }
}

TEST(QkConfigTest, Validation) {
  QkConfig c;
  EXPECT_NO_THROW(c.validate());
  c.max_samp = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = QkConfig{};
  c.max_iter = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = QkConfig{};
  c.center_tol = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

}  // namespace
}  // namespace geoobf
