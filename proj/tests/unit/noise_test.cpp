#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cogforest/density.hpp"
#include "cogforest/distance.hpp"
#include "cogforest/feature_io.hpp"
#include "cogforest/forest.hpp"
#include "cogforest/noise.hpp"
#include "oracles.hpp"

using namespace cogforest;

namespace {

struct Built {
  FeatureMatrix x;
  CLForest forest;
  DensityVector rho;
};

Built build_one(const FeatureMatrix& x) {
  auto forests = build_forests(x, ClfParams{});
  auto rho = class_density(x.features(), forests.at(0));
  return {x, std::move(forests.at(0)), std::move(rho)};
}

Built random_instance(std::mt19937_64& rng) {
  auto pts = oracle::clustered_points(rng, 30 + rng() % 90, 2);
  std::uniform_real_distribution<double> far(-80.0, 80.0);
  for (std::size_t k = 0; k < 1 + rng() % 6; ++k) pts.push_back({far(rng), far(rng)});
  return build_one(oracle::to_matrix(pts));
}

std::set<std::size_t> as_set(const NoiseReport& r) { return {r.flagged.begin(), r.flagged.end()}; }

}  // namespace

TEST(DensityCap, CeilWithSnapping) {
  EXPECT_EQ(density_cap(0.1, 30), 3u);
  EXPECT_EQ(density_cap(0.1, 31), 4u);
  EXPECT_EQ(density_cap(0.0, 100), 0u);
  EXPECT_EQ(density_cap(1.0, 7), 7u);
  EXPECT_EQ(density_cap(0.07, 100), 7u);
}

TEST(SelectNoise, ZeroPercentileFlagsNothing) {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 10; ++t) {
    const auto b = random_instance(rng);
    NoiseParams p;
    p.p_d = 0.0;
    p.n_min = 1000;
    EXPECT_TRUE(select_noise(b.forest, b.rho, p).flagged.empty());
  }
}

TEST(SelectNoise, SmallTreeFlaggedAsClusterSize) {
  Matrix m(2, 1);
  m << 0.0, 0.5;
  const auto b = build_one(FeatureMatrix({"a", "b"}, m, {0, 0}));
  ASSERT_EQ(b.forest.tree_count(), 1u);
  NoiseParams p;
  p.n_min = 3;
  p.p_d = 1.0;
  const auto r = select_noise(b.forest, b.rho, p);
  ASSERT_EQ(r.flagged.size(), 2u);
  for (auto row : r.flagged) EXPECT_EQ(r.reason.at(row), NoiseReason::kClusterSize);
}

TEST(SelectNoise, LastLayerOfTree) {
  // Collinear chain: prototypes at depths 0..4 below the centre.
  Matrix m(5, 1);
  m << 0.0, 1.5, 3.0, 4.5, 6.0;
  const std::vector<std::size_t> rows{0, 1, 2, 3, 4};
  const std::vector<std::string> ids{"a", "b", "c", "d", "e"};
  const auto d = pairwise_distances(FeatureMatrix(ids, m));
  const auto rho = compute_density(d, 4.0);
  const auto f = build_clf(d, rho, rows, ids, 0, 4.0, 1.0);
  NoiseParams p;
  p.n_min = 0;
  p.n_d = 0;
  p.n_l = 1;
  const auto cand = noise_candidates(f, p);
  const std::size_t bottom = f.tree_max_depth(0);
  ASSERT_GT(bottom, 0u);
  for (const auto& n : f.nodes()) {
    for (auto s : n.members) EXPECT_EQ(cand.count(s) == 1, n.depth == bottom) << "sample " << s;
  }
  p.n_d = bottom + 1;  // start depth below the tree: nothing qualifies
  EXPECT_TRUE(noise_candidates(f, p).empty());
  p.n_d = 0;
  p.n_l = 50;  // more layers than the tree has: whole tree qualifies
  EXPECT_EQ(noise_candidates(f, p).size(), 5u);
}

TEST(SelectNoise, PlantedOutliers) {
  const auto b = build_one(read_features(oracle::fixture_path("planted_outliers.csv")));
  NoiseParams p;
  p.n_min = 2;
  p.n_l = 0;
  p.p_d = 0.1;
  const auto r = select_noise(b.forest, b.rho, p);
  std::set<std::string> ids;
  for (auto row : r.flagged) ids.insert(b.x.id(row));
  EXPECT_EQ(ids, (std::set<std::string>{"out0", "out1", "out2", "out3", "out4"}));
  for (auto row : r.flagged) EXPECT_EQ(r.reason.at(row), NoiseReason::kClusterSize);

  // With the default layer rule some sparse inliers may join, but never
  // beyond the cap and never at the expense of an outlier.
  p.n_l = 1;
  const auto wider = select_noise(b.forest, b.rho, p);
  EXPECT_LE(wider.flagged.size(), density_cap(0.1, 105));
  for (auto row : r.flagged) EXPECT_TRUE(wider.contains(row));
}

TEST(SelectNoise, PropertiesOnRandomInstances) {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const auto b = random_instance(rng);
    NoiseParams p;
    p.n_min = rng() % 6;
    p.n_d = rng() % 4;
    p.n_l = rng() % 3;
    double lo = u(rng);
    double hi = u(rng);
    if (lo > hi) std::swap(lo, hi);

    p.p_d = lo;
    const auto small = select_noise(b.forest, b.rho, p);
    p.p_d = hi;
    const auto large = select_noise(b.forest, b.rho, p);
    const auto s = as_set(small);
    const auto l = as_set(large);
    EXPECT_TRUE(std::includes(l.begin(), l.end(), s.begin(), s.end())) << "instance " << t;
    EXPECT_LE(small.flagged.size(), density_cap(lo, b.forest.size()));
    EXPECT_LE(large.flagged.size(), density_cap(hi, b.forest.size()));

    // Soundness: each flagged sample meets criterion 1 or 2 and sits in the
    // lowest-density band of its class.
    for (auto row : large.flagged) {
      const auto node = b.forest.node_of(row);
      const auto tree = b.forest.tree_of(node);
      const bool c1 = b.forest.tree_size(tree) < p.n_min;
      const auto depth = b.forest.node(node).depth;
      const bool c2 = depth >= p.n_d && p.n_l > 0 && depth + p.n_l > b.forest.tree_max_depth(tree);
      EXPECT_TRUE(c1 || c2);
      std::size_t lower = 0;
      const double mine = b.rho.rho[b.forest.local_index(row)];
      for (std::size_t k = 0; k < b.forest.size(); ++k) {
        const double other = b.rho.rho[k];
        lower += other < mine || (other == mine && b.forest.samples()[k] < row);
      }
      EXPECT_LT(lower, density_cap(hi, b.forest.size()));
    }

    // Candidates grow with n_min.
    auto q = p;
    q.n_min = p.n_min + 1 + rng() % 5;
    const auto before = noise_candidates(b.forest, p);
    const auto after = noise_candidates(b.forest, q);
    for (const auto& [row, why] : before) EXPECT_EQ(after.count(row), 1u);
  }
}

TEST(NoiseReport, CsvAndPercentiles) {
  const auto b = build_one(read_features(oracle::fixture_path("planted_outliers.csv")));
  NoiseParams p;
  p.n_min = 2;
  p.n_l = 0;
  const auto r = select_noise(b.forest, b.rho, p);
  for (const auto& [row, pct] : r.density_percentile) {
    EXPECT_GE(pct, 0.0);
    EXPECT_LT(pct, 1.0);
  }
  const auto csv = noise_to_csv(r, b.x.ids());
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "id,reason,density_percentile");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  EXPECT_NE(csv.find("out2,cluster_size,"), std::string::npos);
  p.p_d = 0.0;
  EXPECT_EQ(noise_to_csv(select_noise(b.forest, b.rho, p), b.x.ids()), "id,reason,density_percentile\n");
  const auto mask = noise_mask(r, b.x.size());
  EXPECT_EQ(std::count(mask.begin(), mask.end(), true), 5);
}
