#include "cogforest/model.hpp"

#include <cmath>
#include <random>

#include <json.hpp>

namespace cogforest {
namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, double stddev, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = normal(rng);
  return m;
}

std::vector<double> flatten(const Matrix& w, const Vector& b) {
  std::vector<double> out(static_cast<std::size_t>(w.size() + b.size()));
  std::copy(w.data(), w.data() + w.size(), out.begin());
  std::copy(b.data(), b.data() + b.size(), out.begin() + w.size());
  return out;
}

void unflatten(std::span<const double> params, Matrix& w, Vector& b) {
  if (params.size() != static_cast<std::size_t>(w.size() + b.size())) {
    throw InputError("parameter vector has the wrong length");
  }
  std::copy(params.begin(), params.begin() + w.size(), w.data());
  std::copy(params.begin() + w.size(), params.end(), b.data());
}

// Shared backward pass of an affine map y = x W^T + b.
std::vector<double> affine_gradient(const Matrix& inputs, const Matrix& grad_out, const Matrix& w) {
  if (inputs.rows() != grad_out.rows() || grad_out.cols() != w.rows() || inputs.cols() != w.cols()) {
    throw InputError("gradient shape does not match the layer");
  }
  const Matrix gw = grad_out.transpose() * inputs;
  const Vector gb = grad_out.colwise().sum().transpose();
  return flatten(gw, gb);
}

}  // namespace

void FeatureExtractor::sgd_step(std::span<const double> grad, double learning_rate) {
  auto p = parameters();
  if (grad.size() != p.size()) throw InputError("gradient has the wrong length");
  for (std::size_t k = 0; k < p.size(); ++k) p[k] -= learning_rate * grad[k];
  set_parameters(p);
}

LinearExtractor::LinearExtractor(Matrix weight, Vector bias) : weight_(std::move(weight)), bias_(std::move(bias)) {
  if (weight_.rows() < 1 || weight_.cols() < 1) throw InputError("extractor dimensions must be >= 1");
  if (bias_.size() != weight_.rows()) throw InputError("extractor bias length must equal output dim");
}

LinearExtractor LinearExtractor::identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return LinearExtractor(Matrix::Identity(n, n), Vector::Zero(n));
}

Matrix LinearExtractor::forward(const Matrix& inputs) const {
  if (inputs.cols() != weight_.cols()) throw InputError("input width does not match extractor");
  Matrix out = inputs * weight_.transpose();
  out.rowwise() += bias_.transpose();
  return out;
}

std::vector<double> LinearExtractor::parameter_gradient(const Matrix& inputs, const Matrix& grad_features) const {
  return affine_gradient(inputs, grad_features, weight_);
}

std::vector<double> LinearExtractor::parameters() const { return flatten(weight_, bias_); }

void LinearExtractor::set_parameters(std::span<const double> params) { unflatten(params, weight_, bias_); }

LinearExtractor make_toy_extractor(std::size_t input_dim, std::size_t feature_dim, std::uint64_t seed) {
  if (input_dim < 1 || feature_dim < 1) throw InputError("extractor dimensions must be >= 1");
  return LinearExtractor(gaussian(feature_dim, input_dim, 1.0 / std::sqrt(static_cast<double>(input_dim)), seed),
                         Vector::Zero(static_cast<Eigen::Index>(feature_dim)));
}

LinearClassifier::LinearClassifier(Matrix weight, Vector bias) : weight_(std::move(weight)), bias_(std::move(bias)) {
  if (weight_.rows() < 1 || weight_.cols() < 1) throw InputError("classifier dimensions must be >= 1");
  if (bias_.size() != weight_.rows()) throw InputError("classifier bias length must equal class count");
}

LinearClassifier LinearClassifier::random(std::size_t feature_dim, std::size_t classes, std::uint64_t seed) {
  return LinearClassifier(gaussian(classes, feature_dim, 1.0 / std::sqrt(static_cast<double>(feature_dim)), seed),
                          Vector::Zero(static_cast<Eigen::Index>(classes)));
}

Matrix LinearClassifier::logits(const Matrix& features) const {
  if (features.cols() != weight_.cols()) throw InputError("feature width does not match classifier");
  Matrix out = features * weight_.transpose();
  out.rowwise() += bias_.transpose();
  return out;
}

Matrix LinearClassifier::feature_gradient(const Matrix& grad_logits) const { return grad_logits * weight_; }

std::vector<double> LinearClassifier::parameter_gradient(const Matrix& features, const Matrix& grad_logits) const {
  return affine_gradient(features, grad_logits, weight_);
}

std::vector<double> LinearClassifier::parameters() const { return flatten(weight_, bias_); }

void LinearClassifier::set_parameters(std::span<const double> params) { unflatten(params, weight_, bias_); }

void LinearClassifier::sgd_step(std::span<const double> grad, double learning_rate) {
  auto p = parameters();
  if (grad.size() != p.size()) throw InputError("gradient has the wrong length");
  for (std::size_t k = 0; k < p.size(); ++k) p[k] -= learning_rate * grad[k];
  set_parameters(p);
}

double softmax_cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* grad_logits) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) throw InputError("label count does not match batch");
  if (grad_logits) grad_logits->setZero(logits.rows(), logits.cols());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= logits.cols()) throw InputError("label " + std::to_string(y) + " outside classifier range");
    const double mx = logits.row(i).maxCoeff();
    double z = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) z += std::exp(logits(i, c) - mx);
    const double log_z = mx + std::log(z);
    loss += log_z - logits(i, y);
    if (grad_logits) {
      for (Eigen::Index c = 0; c < logits.cols(); ++c) (*grad_logits)(i, c) = std::exp(logits(i, c) - log_z);
      (*grad_logits)(i, y) -= 1.0;
    }
  }
  return loss;
}

std::string model_to_json(const LinearExtractor& extractor, const LinearClassifier& classifier) {
  auto rows_of = [](const Matrix& m) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows[static_cast<std::size_t>(i)].assign(m.row(i).data(), m.row(i).data() + m.cols());
    return rows;
  };
  auto vec_of = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::ordered_json doc;
  doc["extractor"] = {{"kind", "linear"}, {"weight", rows_of(extractor.weight())}, {"bias", vec_of(extractor.bias())}};
  doc["classifier"] = {{"kind", "linear-softmax"}, {"weight", rows_of(classifier.weight())}, {"bias", vec_of(classifier.bias())}};
  return doc.dump(2);
}

}  // namespace cogforest
