#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cogforest/forest.hpp"
#include "cogforest/loss.hpp"
#include "cogforest/model.hpp"
#include "cogforest/noise.hpp"
#include "cogforest/sampler.hpp"
#include "cogforest/types.hpp"

namespace cogforest {

enum class LossKind { kMcl, kMctl };

std::string_view loss_kind_name(LossKind k);
LossKind parse_loss_kind(std::string_view name);

struct TrainConfig {
  std::size_t warmup_epochs = 2;
  std::size_t epochs = 20;
  /// Epochs between forest / environment / noise rebuilds.
  std::size_t refresh_period = 1;
  /// One environment per pair; default is the i.i.d. pair then the balanced pair.
  std::vector<EnvParams> environments = {{1.0, 1.0}, {0.0, 0.0}};
  double alpha = 0.5;
  double learning_rate = 0.05;
  std::size_t batch_size = 32;
  std::uint64_t seed = 7;
  /// Unset: MCL for run_cognisance, MCTL for run_cognisance_plus.
  std::optional<LossKind> loss;
  double margin = 0.0;
  std::optional<NoiseParams> noise;
  ClfParams clf;
  BuildOptions build;

  void validate() const;
};

struct EnvEpochLoss {
  EnvParams params;
  std::size_t steps = 0;
  // Means per drawn sample over the epoch.
  double total = 0.0;
  double cls = 0.0;
  double ifl = 0.0;

  bool operator==(const EnvEpochLoss&) const = default;
};

struct EpochRecord {
  std::size_t epoch = 0;  // counts warm-up epochs too
  bool warmup = false;
  std::vector<EnvEpochLoss> env_losses;
  // Sums over environments of the per-sample means.
  double summed_total = 0.0;
  double summed_cls = 0.0;
  double summed_ifl = 0.0;
  std::map<int, std::size_t> trees_per_class;
  std::map<int, std::size_t> centers_per_class;
  std::size_t flagged_noise = 0;
  std::optional<double> balanced_accuracy;
  bool degenerate_features = false;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  std::vector<EpochRecord> records;

  /// One JSON object per line, one line per epoch.
  std::string to_jsonl() const;
  bool operator==(const TrainHistory&) const = default;
};

/// State after a forest rebuild, handed to TrainHooks::on_refresh.
struct RefreshSnapshot {
  std::size_t epoch = 0;
  const Matrix* features = nullptr;
  const std::vector<CLForest>* forests = nullptr;
  const CenterSet* centers = nullptr;
  const std::vector<Environment>* environments = nullptr;
  const NoiseReport* noise = nullptr;
  bool degenerate = false;
};

struct TrainHooks {
  std::function<void(const RefreshSnapshot&)> on_refresh;
  /// Called per gradient step with the environment index and drawn rows.
  std::function<void(std::size_t epoch, std::size_t env, const std::vector<std::size_t>& rows)> on_step;
};

struct TrainResult {
  TrainHistory history;
  std::vector<CLForest> forests;
  CenterSet centers;
  NoiseReport noise;
  std::vector<Environment> environments;
};

/// Warm-up on plain cross-entropy, then per epoch: read centers from the
/// forests, alternate whole batches across environments on
/// cls + alpha * IFL, and rebuild forests and environments every
/// refresh_period epochs. Extractor and classifier are updated in place.
TrainResult run_cognisance(const FeatureMatrix& train, const FeatureMatrix* heldout, FeatureExtractor& extractor,
                           LinearClassifier& classifier, const TrainConfig& cfg, const TrainHooks& hooks = {});

/// run_cognisance plus noise selection after every in-loop rebuild; flagged
/// rows are excluded from all environments until the next rebuild.
/// Requires cfg.noise.
TrainResult run_cognisance_plus(const FeatureMatrix& train, const FeatureMatrix* heldout,
                                FeatureExtractor& extractor, LinearClassifier& classifier, const TrainConfig& cfg,
                                const TrainHooks& hooks = {});

/// Mean over classes of per-class accuracy.
double balanced_accuracy(const FeatureMatrix& data, const FeatureExtractor& extractor,
                         const LinearClassifier& classifier);

}  // namespace cogforest
