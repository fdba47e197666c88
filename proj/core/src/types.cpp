#include "cogforest/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cogforest {

void require_finite(const Matrix& features, std::span<const std::string> ids) {
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      if (!std::isfinite(features(i, j))) {
        const std::string who = static_cast<std::size_t>(i) < ids.size()
                                    ? ids[static_cast<std::size_t>(i)]
                                    : "#" + std::to_string(i);
        throw InputError("non-finite feature f" + std::to_string(j) + " in sample '" + who + "'");
      }
    }
  }
}

FeatureMatrix::FeatureMatrix(std::vector<std::string> ids, Matrix features, std::vector<int> labels)
    : ids_(std::move(ids)), features_(std::move(features)), labels_(std::move(labels)) {
  if (ids_.empty()) throw InputError("feature matrix has no samples");
  if (features_.cols() < 1) throw InputError("feature matrix has no feature columns");
  if (static_cast<std::size_t>(features_.rows()) != ids_.size()) {
    throw InputError("feature rows (" + std::to_string(features_.rows()) + ") do not match ids (" +
                     std::to_string(ids_.size()) + ")");
  }
  require_finite(features_, ids_);

  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) throw InputError("duplicate sample id '" + ids_[i] + "'");
  }

  if (!labels_.empty()) {
    if (labels_.size() != ids_.size()) throw InputError("label count does not match sample count");
    const bool any = std::any_of(labels_.begin(), labels_.end(), [](int l) { return l != kNoLabel; });
    const bool all = std::all_of(labels_.begin(), labels_.end(), [](int l) { return l != kNoLabel; });
    if (any && !all) throw InputError("labels must be given for all samples or for none");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] < kNoLabel) throw InputError("negative label for sample '" + ids_[i] + "'");
    }
    has_labels_ = all;
    if (!all) labels_.clear();
  }
}

std::vector<int> FeatureMatrix::labels() const {
  if (has_labels_) return labels_;
  return std::vector<int>(size(), 0);
}

std::vector<int> FeatureMatrix::classes() const {
  if (!has_labels_) return {0};
  std::set<int> seen(labels_.begin(), labels_.end());
  return {seen.begin(), seen.end()};
}

std::vector<std::size_t> FeatureMatrix::class_rows(int label) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < size(); ++i) {
    if (this->label(i) == label) rows.push_back(i);
  }
  return rows;
}

std::optional<std::size_t> FeatureMatrix::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FeatureMatrix FeatureMatrix::with_features(Matrix features) const {
  return FeatureMatrix(ids_, std::move(features), has_labels_ ? labels_ : std::vector<int>{});
}

void ClfParams::validate() const {
  if (!(d_rd.value > 0.0) || !std::isfinite(d_rd.value)) {
    throw InputError(d_rd.is_multiple ? "d_rd multiplier must be > 0" : "d_rd must be > 0");
  }
  if (!(d_rn.value > 0.0) || !std::isfinite(d_rn.value)) {
    throw InputError(d_rn.is_multiple ? "d_rn multiplier must be > 0" : "d_rn must be > 0");
  }
}

void EnvParams::validate() const {
  if (!(q_cls >= 0.0 && q_cls <= 1.0)) throw InputError("q_cls must lie in [0, 1]");
  if (!(q_attr >= 0.0 && q_attr <= 1.0)) throw InputError("q_attr must lie in [0, 1]");
}

void NoiseParams::validate() const {
  if (!(p_d >= 0.0 && p_d <= 1.0)) throw InputError("p_d must lie in [0, 1]");
}

}  // namespace cogforest
