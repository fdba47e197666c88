#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace cogforest {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Raised for malformed or out-of-contract input. The CLI maps it to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kNoLabel = -1;

/// N samples x D features with stable string ids and optional class labels.
///
/// Construction validates every invariant: N >= 1, D >= 1, finite values,
/// unique ids, and labels either all absent or all >= 0.
class FeatureMatrix {
 public:
  FeatureMatrix(std::vector<std::string> ids, Matrix features, std::vector<int> labels = {});

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features_.cols()); }

  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t row) const { return ids_[row]; }
  const Matrix& features() const { return features_; }
  auto row(std::size_t i) const { return features_.row(static_cast<Eigen::Index>(i)); }

  bool has_labels() const { return has_labels_; }
  /// Label of a row; unlabeled matrices report class 0 for every row.
  int label(std::size_t row) const { return has_labels_ ? labels_[row] : 0; }
  std::vector<int> labels() const;

  /// Distinct class labels present, ascending.
  std::vector<int> classes() const;
  /// Row indices (ascending) carrying the given label.
  std::vector<std::size_t> class_rows(int label) const;

  std::optional<std::size_t> find(const std::string& id) const;

  /// Copy with the feature block replaced; ids and labels are kept.
  FeatureMatrix with_features(Matrix features) const;

 private:
  std::vector<std::string> ids_;
  Matrix features_;
  std::vector<int> labels_;
  bool has_labels_ = false;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Throws InputError naming the first sample with a NaN/Inf feature.
void require_finite(const Matrix& features, std::span<const std::string> ids);

/// A radius given either directly or as a multiple of the base distance.
struct Radius {
  double value = 1.0;
  bool is_multiple = false;

  static Radius absolute(double v) { return {v, false}; }
  static Radius multiple(double m) { return {m, true}; }
};

struct ClfParams {
  Radius d_rd = Radius::multiple(3.0);
  Radius d_rn = Radius::multiple(1.0);

  bool resolved() const { return !d_rd.is_multiple && !d_rn.is_multiple; }
  void validate() const;
};

struct EnvParams {
  double q_cls = 1.0;
  double q_attr = 1.0;

  void validate() const;
  bool operator==(const EnvParams&) const = default;
};

struct NoiseParams {
  std::size_t n_min = 3;
  std::size_t n_d = 2;
  std::size_t n_l = 1;
  double p_d = 0.1;

  void validate() const;
};

}  // namespace cogforest
