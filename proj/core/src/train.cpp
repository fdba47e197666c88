#include "cogforest/train.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

namespace cogforest {

std::string_view loss_kind_name(LossKind k) { return k == LossKind::kMcl ? "mcl" : "mctl"; }

LossKind parse_loss_kind(std::string_view name) {
  if (name == "mcl") return LossKind::kMcl;
  if (name == "mctl") return LossKind::kMctl;
  throw InputError("unknown loss kind '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InputError("epochs must be >= 1");
  if (refresh_period < 1) throw InputError("refresh_period must be >= 1");
  if (batch_size < 1) throw InputError("batch_size must be >= 1");
  if (environments.empty()) throw InputError("at least one environment is required");
  for (const auto& e : environments) e.validate();
  if (!(alpha >= 0.0)) throw InputError("alpha must be >= 0");
  if (!(learning_rate > 0.0)) throw InputError("learning rate must be > 0");
  if (!(margin >= 0.0)) throw InputError("margin must be >= 0");
  clf.validate();
  if (noise) noise->validate();
}

std::string TrainHistory::to_jsonl() const {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["epoch"] = r.epoch;
    j["phase"] = r.warmup ? "warmup" : "train";
    nlohmann::ordered_json envs = nlohmann::ordered_json::array();
    for (const auto& e : r.env_losses) {
      envs.push_back({{"q_cls", e.params.q_cls},
                      {"q_attr", e.params.q_attr},
                      {"steps", e.steps},
                      {"total", e.total},
                      {"cls", e.cls},
                      {"ifl", e.ifl}});
    }
    j["envs"] = std::move(envs);
    j["summed_total"] = r.summed_total;
    j["summed_cls"] = r.summed_cls;
    j["summed_ifl"] = r.summed_ifl;
    nlohmann::ordered_json trees = nlohmann::ordered_json::object();
    for (const auto& [c, n] : r.trees_per_class) trees[std::to_string(c)] = n;
    nlohmann::ordered_json centers = nlohmann::ordered_json::object();
    for (const auto& [c, n] : r.centers_per_class) centers[std::to_string(c)] = n;
    j["trees"] = std::move(trees);
    j["centers"] = std::move(centers);
    j["flagged_noise"] = r.flagged_noise;
    j["balanced_accuracy"] = r.balanced_accuracy ? nlohmann::ordered_json(*r.balanced_accuracy) : nullptr;
    j["degenerate"] = r.degenerate_features;
    out += j.dump();
    out += '\n';
  }
  return out;
}

double balanced_accuracy(const FeatureMatrix& data, const FeatureExtractor& extractor,
                         const LinearClassifier& classifier) {
  const Matrix logits = classifier.logits(extractor.forward(data.features()));
  std::map<int, std::pair<std::size_t, std::size_t>> per_class;  // correct, total
  for (std::size_t i = 0; i < data.size(); ++i) {
    Eigen::Index best = 0;
    logits.row(static_cast<Eigen::Index>(i)).maxCoeff(&best);
    auto& [correct, total] = per_class[data.label(i)];
    ++total;
    if (best == data.label(i)) ++correct;
  }
  double sum = 0.0;
  for (const auto& [c, ct] : per_class) sum += static_cast<double>(ct.first) / static_cast<double>(ct.second);
  return sum / static_cast<double>(per_class.size());
}

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Matrix gather(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = m.row(static_cast<Eigen::Index>(rows[k]));
  }
  return out;
}

class Trainer {
 public:
  Trainer(const FeatureMatrix& train, const FeatureMatrix* heldout, FeatureExtractor& extractor,
          LinearClassifier& classifier, const TrainConfig& cfg, const TrainHooks& hooks, LossKind loss,
          bool select_noise)
      : train_(train),
        heldout_(heldout),
        extractor_(extractor),
        classifier_(classifier),
        cfg_(cfg),
        hooks_(hooks),
        loss_(loss),
        select_noise_(select_noise),
        labels_(train.labels()) {}

  TrainResult run() {
    if (train_.classes().size() < 2) throw InputError("training data needs at least two classes");
    if (extractor_.input_dim() != train_.dim()) throw InputError("extractor input width does not match data");
    if (classifier_.feature_dim() != extractor_.output_dim()) {
      throw InputError("classifier width does not match extractor output");
    }
    const int max_label = *std::max_element(labels_.begin(), labels_.end());
    if (static_cast<std::size_t>(max_label) >= classifier_.classes()) {
      throw InputError("classifier has fewer outputs than classes");
    }

    std::size_t epoch = 0;
    for (std::size_t w = 0; w < cfg_.warmup_epochs; ++w, ++epoch) warmup_epoch(epoch);

    refresh(epoch, /*with_noise=*/false);
    for (std::size_t e = 0; e < cfg_.epochs; ++e, ++epoch) {
      EpochRecord rec = train_epoch(epoch);
      if ((e + 1) % cfg_.refresh_period == 0) refresh(epoch, select_noise_);
      for (const auto& f : result_.forests) rec.trees_per_class[f.class_label()] = f.tree_count();
      for (const auto& [c, list] : result_.centers.by_class()) rec.centers_per_class[c] = list.size();
      rec.flagged_noise = result_.noise.flagged.size();
      rec.degenerate_features = degenerate_;
      if (heldout_) rec.balanced_accuracy = balanced_accuracy(*heldout_, extractor_, classifier_);
      result_.history.records.push_back(std::move(rec));
    }
    return std::move(result_);
  }

 private:
  struct StepLoss {
    double cls = 0.0;
    double ifl = 0.0;
  };

  // One SGD step on a batch; the IFL term is skipped when centers is null.
  StepLoss step(const std::vector<std::size_t>& rows, const std::vector<CenterRef>* assigned) {
    const Matrix inputs = gather(train_.features(), rows);
    const Matrix features = extractor_.forward(inputs);
    std::vector<int> labels(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) labels[k] = labels_[rows[k]];

    Matrix grad_logits;
    StepLoss out;
    out.cls = softmax_cross_entropy(classifier_.logits(features), labels, &grad_logits);
    Matrix grad_features = classifier_.feature_gradient(grad_logits);
    if (assigned) {
      std::vector<CenterRef> refs(rows.size());
      for (std::size_t k = 0; k < rows.size(); ++k) refs[k] = (*assigned)[rows[k]];
      const NoClassificationLoss none;
      const LossEvaluation ifl = loss_ == LossKind::kMcl
                                     ? mcl(features, labels, refs, result_.centers, none, cfg_.alpha)
                                     : mctl(features, labels, refs, result_.centers, none, cfg_.alpha, cfg_.margin);
      out.ifl = ifl.breakdown.ifl_term;
      grad_features += ifl.grad;
    }

    const double scale = 1.0 / static_cast<double>(rows.size());
    auto classifier_grad = classifier_.parameter_gradient(features, grad_logits);
    auto extractor_grad = extractor_.parameter_gradient(inputs, grad_features);
    for (double& g : classifier_grad) g *= scale;
    for (double& g : extractor_grad) g *= scale;
    classifier_.sgd_step(classifier_grad, cfg_.learning_rate);
    extractor_.sgd_step(extractor_grad, cfg_.learning_rate);
    if (!std::isfinite(out.cls) || !std::isfinite(out.ifl)) {
      throw std::runtime_error("training diverged: non-finite loss; lower the learning rate");
    }
    return out;
  }

  std::size_t steps_per_pass() const { return (train_.size() + cfg_.batch_size - 1) / cfg_.batch_size; }

  void warmup_epoch(std::size_t epoch) {
    std::vector<std::size_t> order(train_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(cfg_.seed, 0x5741524d, epoch));
    std::shuffle(order.begin(), order.end(), rng);

    EnvEpochLoss env{{1.0, 1.0}, 0, 0.0, 0.0, 0.0};
    std::size_t drawn = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg_.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg_.batch_size);
      std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                    order.begin() + static_cast<std::ptrdiff_t>(end));
      if (hooks_.on_step) hooks_.on_step(epoch, 0, rows);
      const StepLoss l = step(rows, nullptr);
      env.cls += l.cls;
      drawn += rows.size();
      ++env.steps;
    }
    env.cls /= static_cast<double>(drawn);
    env.total = env.cls;

    EpochRecord rec;
    rec.epoch = epoch;
    rec.warmup = true;
    rec.env_losses.push_back(env);
    rec.summed_total = env.total;
    rec.summed_cls = env.cls;
    if (heldout_) rec.balanced_accuracy = balanced_accuracy(*heldout_, extractor_, classifier_);
    result_.history.records.push_back(std::move(rec));
  }

  EpochRecord train_epoch(std::size_t epoch) {
    // Centers are read from the current forests under current parameters.
    const Matrix features = extractor_.forward(train_.features());
    result_.centers = extract_centers(result_.forests, features);
    const auto assigned = assign_all(train_.size(), result_.forests, result_.centers);

    const std::size_t envs = result_.environments.size();
    std::vector<BatchSampler> samplers;
    samplers.reserve(envs);
    for (std::size_t k = 0; k < envs; ++k) {
      samplers.emplace_back(result_.environments[k].weights, derive_seed(cfg_.seed, epoch + 1, k));
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.env_losses.resize(envs);
    std::vector<std::size_t> drawn(envs, 0);
    for (std::size_t k = 0; k < envs; ++k) rec.env_losses[k].params = result_.environments[k].params;
    for (std::size_t s = 0; s < steps_per_pass(); ++s) {
      for (std::size_t k = 0; k < envs; ++k) {
        const auto rows = samplers[k].next(cfg_.batch_size);
        if (hooks_.on_step) hooks_.on_step(epoch, k, rows);
        const StepLoss l = step(rows, &assigned);
        auto& e = rec.env_losses[k];
        e.cls += l.cls;
        e.ifl += l.ifl;
        ++e.steps;
        drawn[k] += rows.size();
      }
    }
    for (std::size_t k = 0; k < envs; ++k) {
      auto& e = rec.env_losses[k];
      const auto n = static_cast<double>(drawn[k]);
      e.cls /= n;
      e.ifl /= n;
      e.total = e.cls + cfg_.alpha * e.ifl;
      rec.summed_total += e.total;
      rec.summed_cls += e.cls;
      rec.summed_ifl += e.ifl;
    }
    return rec;
  }

  void refresh(std::size_t epoch, bool with_noise) {
    const Matrix features = extractor_.forward(train_.features());
    const FeatureMatrix view = train_.with_features(features);

    ClfParams radii = cfg_.clf;
    degenerate_ = false;
    if (!radii.resolved()) {
      double base = base_distance(pairwise_distances(view, cfg_.build.metric));
      if (!(base > 0.0) || !std::isfinite(base)) {
        // All features coincide: any positive radius yields one node per class.
        degenerate_ = true;
        base = 1.0;
      }
      radii = resolve_params(radii, base);
    }

    std::vector<CLForest> forests;
    NoiseReport noise;
    for (int label : view.classes()) {
      const auto rows = view.class_rows(label);
      const DistanceMatrix d = pairwise_distances(features, rows, cfg_.build.metric);
      const DensityVector rho = compute_density(d, radii.d_rd.value);
      std::vector<std::string> ids;
      for (std::size_t r : rows) ids.push_back(view.id(r));
      forests.push_back(
          build_clf(d, rho, rows, ids, label, radii.d_rd.value, radii.d_rn.value, cfg_.build.leader_radius));
      if (with_noise) noise.merge(select_noise(forests.back(), rho, *cfg_.noise));
    }

    const auto mask = noise_mask(noise, train_.size());
    std::vector<Environment> envs;
    for (std::size_t k = 0; k < cfg_.environments.size(); ++k) {
      envs.push_back(build_environment(view, forests, cfg_.environments[k], mask, static_cast<int>(k)));
    }

    result_.forests = std::move(forests);
    result_.noise = std::move(noise);
    result_.environments = std::move(envs);
    result_.centers = extract_centers(result_.forests, features);

    if (hooks_.on_refresh) {
      RefreshSnapshot snap{epoch, &features, &result_.forests, &result_.centers, &result_.environments,
                           &result_.noise, degenerate_};
      hooks_.on_refresh(snap);
    }
  }

  const FeatureMatrix& train_;
  const FeatureMatrix* heldout_;
  FeatureExtractor& extractor_;
  LinearClassifier& classifier_;
  const TrainConfig& cfg_;
  const TrainHooks& hooks_;
  LossKind loss_;
  bool select_noise_;
  std::vector<int> labels_;
  bool degenerate_ = false;
  TrainResult result_;
};

}  // namespace

TrainResult run_cognisance(const FeatureMatrix& train, const FeatureMatrix* heldout, FeatureExtractor& extractor,
                           LinearClassifier& classifier, const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  Trainer t(train, heldout, extractor, classifier, cfg, hooks, cfg.loss.value_or(LossKind::kMcl), false);
  return t.run();
}

TrainResult run_cognisance_plus(const FeatureMatrix& train, const FeatureMatrix* heldout,
                                FeatureExtractor& extractor, LinearClassifier& classifier, const TrainConfig& cfg,
                                const TrainHooks& hooks) {
  cfg.validate();
  if (!cfg.noise) throw InputError("noise parameters are required for the noise-aware loop");
  Trainer t(train, heldout, extractor, classifier, cfg, hooks, cfg.loss.value_or(LossKind::kMctl), true);
  return t.run();
}

}  // namespace cogforest
