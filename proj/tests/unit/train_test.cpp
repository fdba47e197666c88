#include <gtest/gtest.h>

#include <cmath>

#include "cogforest/synthetic.hpp"
#include "cogforest/train.hpp"

using namespace cogforest;

namespace {

SyntheticDataset small_data(double noise = 0.0) {
  SyntheticConfig sc;
  sc.class_sizes = {120, 40};
  sc.heldout_per_cell = 20;
  sc.noise_fraction = noise;
  return make_synthetic(sc);
}

struct Models {
  LinearExtractor ext;
  LinearClassifier clf;
};

Models models(const FeatureMatrix& x, std::uint64_t seed = 3) {
  return {make_toy_extractor(x.dim(), 4, seed), LinearClassifier::random(4, 2, seed + 1)};
}

TrainConfig short_cfg() {
  TrainConfig cfg;
  cfg.warmup_epochs = 1;
  cfg.epochs = 4;
  return cfg;
}

}  // namespace

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = TrainConfig{};
  cfg.refresh_period = 0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = TrainConfig{};
  cfg.environments.clear();
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), InputError);
  EXPECT_EQ(parse_loss_kind("mctl"), LossKind::kMctl);
  EXPECT_THROW(parse_loss_kind("center"), InputError);
}

TEST(Train, MinimalRun) {
  const auto d = small_data();
  auto m = models(d.train);
  TrainConfig cfg;
  cfg.warmup_epochs = 0;
  cfg.epochs = 1;
  const auto r = run_cognisance(d.train, nullptr, m.ext, m.clf, cfg);
  ASSERT_EQ(r.history.records.size(), 1u);
  EXPECT_FALSE(r.history.records[0].warmup);
  EXPECT_FALSE(r.history.records[0].balanced_accuracy.has_value());
}

TEST(Train, RejectsSingleClassAndMismatchedModels) {
  const auto d = small_data();
  Matrix one = d.train.features().topRows(5);
  FeatureMatrix single({"a", "b", "c", "d", "e"}, one, {0, 0, 0, 0, 0});
  auto m = models(d.train);
  EXPECT_THROW(run_cognisance(single, nullptr, m.ext, m.clf, short_cfg()), InputError);
  auto wrong = make_toy_extractor(d.train.dim() + 1, 4, 1);
  EXPECT_THROW(run_cognisance(d.train, nullptr, wrong, m.clf, short_cfg()), InputError);
  EXPECT_THROW(run_cognisance_plus(d.train, nullptr, m.ext, m.clf, short_cfg()), InputError);
}

TEST(Train, EpochStructureAndWarmupIsolation) {
  const auto d = small_data();
  auto m = models(d.train);
  auto cfg = short_cfg();
  cfg.batch_size = 25;
  std::map<std::size_t, std::vector<std::size_t>> envs_per_epoch;
  TrainHooks hooks;
  hooks.on_step = [&](std::size_t epoch, std::size_t env, const std::vector<std::size_t>& rows) {
    envs_per_epoch[epoch].push_back(env);
    EXPECT_LE(rows.size(), cfg.batch_size);
  };
  const auto r = run_cognisance(d.train, &d.heldout, m.ext, m.clf, cfg, hooks);
  ASSERT_EQ(r.history.records.size(), cfg.warmup_epochs + cfg.epochs);
  const std::size_t steps = (d.train.size() + cfg.batch_size - 1) / cfg.batch_size;
  for (const auto& rec : r.history.records) {
    if (rec.warmup) {
      EXPECT_EQ(rec.summed_ifl, 0.0);
      continue;
    }
    ASSERT_EQ(rec.env_losses.size(), cfg.environments.size());
    const auto& seq = envs_per_epoch[rec.epoch];
    ASSERT_EQ(seq.size(), steps * cfg.environments.size());
    for (std::size_t k = 0; k < seq.size(); ++k) EXPECT_EQ(seq[k], k % cfg.environments.size());
    for (const auto& e : rec.env_losses) {
      EXPECT_EQ(e.steps, steps);
      EXPECT_TRUE(std::isfinite(e.total));
    }
    EXPECT_TRUE(rec.balanced_accuracy.has_value());
  }
}

TEST(Train, RefreshCentersMatchRootPrototypes) {
  const auto d = small_data();
  auto m = models(d.train);
  std::size_t refreshes = 0;
  TrainHooks hooks;
  hooks.on_refresh = [&](const RefreshSnapshot& s) {
    ++refreshes;
    for (const auto& f : *s.forests) {
      const auto& list = s.centers->of_class(f.class_label());
      ASSERT_EQ(list.size(), f.tree_count());
      for (std::size_t t = 0; t < list.size(); ++t) {
        const auto proto = f.node(f.roots()[t]).prototype;
        EXPECT_EQ(list[t].vector, s.features->row(static_cast<Eigen::Index>(proto)).transpose());
      }
    }
    EXPECT_EQ(s.environments->size(), 2u);
  };
  auto cfg = short_cfg();
  cfg.refresh_period = 2;
  const auto r = run_cognisance(d.train, nullptr, m.ext, m.clf, cfg, hooks);
  EXPECT_EQ(refreshes, 1u + cfg.epochs / cfg.refresh_period);
  for (const auto& rec : r.history.records) {
    if (!rec.warmup) EXPECT_EQ(rec.trees_per_class, rec.centers_per_class);
  }
}

TEST(Train, Deterministic) {
  const auto d = small_data(0.1);
  auto cfg = short_cfg();
  cfg.noise = NoiseParams{};
  auto a = models(d.train);
  auto b = models(d.train);
  const auto ra = run_cognisance_plus(d.train, &d.heldout, a.ext, a.clf, cfg);
  const auto rb = run_cognisance_plus(d.train, &d.heldout, b.ext, b.clf, cfg);
  EXPECT_EQ(ra.history.to_jsonl(), rb.history.to_jsonl());
  EXPECT_EQ(a.ext.parameters(), b.ext.parameters());
  EXPECT_EQ(a.clf.parameters(), b.clf.parameters());
}

TEST(Train, PlusWithZeroPercentileEqualsMctl) {
  const auto d = small_data(0.1);
  auto cfg = short_cfg();
  auto a = models(d.train);
  auto b = models(d.train);
  cfg.loss = LossKind::kMctl;
  const auto plain = run_cognisance(d.train, &d.heldout, a.ext, a.clf, cfg);
  cfg.noise = NoiseParams{};
  cfg.noise->p_d = 0.0;
  const auto plus = run_cognisance_plus(d.train, &d.heldout, b.ext, b.clf, cfg);
  EXPECT_EQ(plain.history, plus.history);
  EXPECT_TRUE(plus.noise.flagged.empty());
}

TEST(Train, FlaggedNoiseHasZeroWeightAfterRebuild) {
  const auto d = small_data(0.1);
  auto m = models(d.train);
  auto cfg = short_cfg();
  cfg.noise = NoiseParams{};
  std::size_t checked = 0;
  TrainHooks hooks;
  hooks.on_refresh = [&](const RefreshSnapshot& s) {
    for (const auto& env : *s.environments) {
      for (auto row : s.noise->flagged) {
        EXPECT_EQ(env.weights[row], 0.0);
        ++checked;
      }
    }
  };
  const auto r = run_cognisance_plus(d.train, nullptr, m.ext, m.clf, cfg, hooks);
  EXPECT_GT(checked, 0u);
  EXPECT_EQ(r.history.records.back().flagged_noise, r.noise.flagged.size());
}

TEST(Train, DegenerateFeaturesAreFlaggedNotFatal) {
  const auto d = small_data();
  LinearExtractor zero(Matrix::Zero(4, static_cast<Eigen::Index>(d.train.dim())), Vector::Zero(4));
  auto clf = LinearClassifier::random(4, 2, 1);
  TrainConfig cfg;
  cfg.warmup_epochs = 0;
  cfg.epochs = 1;
  cfg.refresh_period = 5;  // the only rebuild is the initial one
  bool first_degenerate = false;
  std::vector<std::size_t> nodes;
  TrainHooks hooks;
  hooks.on_refresh = [&](const RefreshSnapshot& s) {
    first_degenerate = s.degenerate;
    for (const auto& f : *s.forests) nodes.push_back(f.nodes().size());
  };
  const auto r = run_cognisance(d.train, nullptr, zero, clf, cfg, hooks);
  EXPECT_TRUE(first_degenerate);
  EXPECT_EQ(nodes, (std::vector<std::size_t>{1, 1}));
  EXPECT_TRUE(r.history.records.back().degenerate_features);
  EXPECT_NE(r.history.to_jsonl().find("\"degenerate\":true"), std::string::npos);
}

TEST(Train, MclDecreasesAfterWarmup) {
  const auto d = make_synthetic(SyntheticConfig{});
  auto m = models(d.train, 7);
  const auto r = run_cognisance(d.train, &d.heldout, m.ext, m.clf, TrainConfig{});
  const EpochRecord* first = nullptr;
  for (const auto& rec : r.history.records) {
    if (!rec.warmup) {
      first = &rec;
      break;
    }
  }
  ASSERT_NE(first, nullptr);
  EXPECT_LT(r.history.records.back().summed_ifl, first->summed_ifl);
}

TEST(Synthetic, ShapesAndTruth) {
  SyntheticConfig sc;
  sc.noise_fraction = 0.1;
  const auto d = make_synthetic(sc);
  EXPECT_EQ(d.train.size(), 500u);
  EXPECT_EQ(d.heldout.size(), 4 * sc.heldout_per_cell);
  EXPECT_EQ(std::count(d.is_noise.begin(), d.is_noise.end(), true), 50);
  const auto csv = truth_to_csv(d);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "id,attribute,noise");
  const auto again = make_synthetic(sc);
  EXPECT_EQ(again.train.features(), d.train.features());
  sc.noise_radius_min = 5;
  sc.noise_radius_max = 4;
  EXPECT_THROW(make_synthetic(sc), InputError);
}
