#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cogforest/types.hpp"

namespace cogforest {

/// Differentiable map from raw inputs to D-dimensional features.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;

  virtual std::size_t input_dim() const = 0;
  virtual std::size_t output_dim() const = 0;
  virtual std::size_t parameter_count() const = 0;

  /// One feature row per input row.
  virtual Matrix forward(const Matrix& inputs) const = 0;
  /// Gradient of a loss w.r.t. the flattened parameters, given the loss
  /// gradient w.r.t. the features produced by `forward(inputs)`.
  virtual std::vector<double> parameter_gradient(const Matrix& inputs, const Matrix& grad_features) const = 0;
  virtual std::vector<double> parameters() const = 0;
  virtual void set_parameters(std::span<const double> params) = 0;
  /// params -= learning_rate * grad
  void sgd_step(std::span<const double> grad, double learning_rate);
};

/// features = inputs * W^T + b, with W of shape (out x in).
class LinearExtractor final : public FeatureExtractor {
 public:
  LinearExtractor(Matrix weight, Vector bias);
  static LinearExtractor identity(std::size_t dim);

  std::size_t input_dim() const override { return static_cast<std::size_t>(weight_.cols()); }
  std::size_t output_dim() const override { return static_cast<std::size_t>(weight_.rows()); }
  std::size_t parameter_count() const override { return static_cast<std::size_t>(weight_.size() + bias_.size()); }

  Matrix forward(const Matrix& inputs) const override;
  std::vector<double> parameter_gradient(const Matrix& inputs, const Matrix& grad_features) const override;
  std::vector<double> parameters() const override;
  void set_parameters(std::span<const double> params) override;

  const Matrix& weight() const { return weight_; }
  const Vector& bias() const { return bias_; }

 private:
  Matrix weight_;
  Vector bias_;
};

/// Linear map with seeded Gaussian initialization (std 1/sqrt(input_dim))
/// and zero bias.
LinearExtractor make_toy_extractor(std::size_t input_dim, std::size_t feature_dim, std::uint64_t seed);

/// Linear classifier g(f) = f * V^T + c producing one logit per class.
class LinearClassifier {
 public:
  LinearClassifier(Matrix weight, Vector bias);
  /// Zero bias, seeded Gaussian weights with std 1/sqrt(feature_dim).
  static LinearClassifier random(std::size_t feature_dim, std::size_t classes, std::uint64_t seed);

  std::size_t classes() const { return static_cast<std::size_t>(weight_.rows()); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(weight_.cols()); }

  Matrix logits(const Matrix& features) const;
  /// d(loss)/d(features) from d(loss)/d(logits).
  Matrix feature_gradient(const Matrix& grad_logits) const;
  std::vector<double> parameter_gradient(const Matrix& features, const Matrix& grad_logits) const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> params);
  void sgd_step(std::span<const double> grad, double learning_rate);

  const Matrix& weight() const { return weight_; }
  const Vector& bias() const { return bias_; }

 private:
  Matrix weight_;
  Vector bias_;
};

/// Summed softmax cross-entropy over a batch and its gradient w.r.t. logits.
double softmax_cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* grad_logits);

/// Serializes extractor and classifier parameters as a JSON document.
std::string model_to_json(const LinearExtractor& extractor, const LinearClassifier& classifier);

}  // namespace cogforest
