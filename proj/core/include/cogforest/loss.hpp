#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cogforest/forest.hpp"
#include "cogforest/model.hpp"
#include "cogforest/types.hpp"

namespace cogforest {

/// A class center; one per tree, initialized at the tree root's prototype.
struct Center {
  NodeId tree_root = 0;
  std::size_t prototype = 0;  // feature-matrix row of the root prototype
  Vector vector;
};

struct CenterRef {
  int class_label = 0;
  std::size_t tree = 0;  // index into the class's center list

  bool operator==(const CenterRef&) const = default;
};

/// Per-class center lists, ordered like each forest's roots.
class CenterSet {
 public:
  CenterSet() = default;
  explicit CenterSet(std::map<int, std::vector<Center>> centers);

  const std::map<int, std::vector<Center>>& by_class() const { return centers_; }
  const std::vector<Center>& of_class(int label) const;
  const Center& at(const CenterRef& ref) const;
  std::size_t class_count() const { return centers_.size(); }
  std::size_t dim() const { return dim_; }

 private:
  std::map<int, std::vector<Center>> centers_;
  std::size_t dim_ = 0;
};

/// One center per tree: the feature row of the tree root's prototype.
CenterSet extract_centers(std::span<const CLForest> forests, const Matrix& features);
CenterSet extract_centers(std::span<const CLForest> forests, const FeatureMatrix& x);

/// Center of the tree holding a sample. Throws InputError for unknown rows.
CenterRef assign_center(std::size_t sample, std::span<const CLForest> forests, const CenterSet& centers);
/// assign_center for every row 0..rows-1.
std::vector<CenterRef> assign_all(std::size_t rows, std::span<const CLForest> forests, const CenterSet& centers);

/// Pluggable classification term. Returns the loss summed over the batch
/// and adds its gradient w.r.t. the features into `grad`.
class ClassificationLoss {
 public:
  virtual ~ClassificationLoss() = default;
  virtual double evaluate(const Matrix& features, std::span<const int> labels, Matrix& grad) const = 0;
};

/// Softmax cross-entropy on top of a linear classifier.
class SoftmaxCrossEntropy final : public ClassificationLoss {
 public:
  explicit SoftmaxCrossEntropy(const LinearClassifier& classifier) : classifier_(classifier) {}
  double evaluate(const Matrix& features, std::span<const int> labels, Matrix& grad) const override;

 private:
  const LinearClassifier& classifier_;
};

/// Contributes nothing; isolates the invariant-feature term.
class NoClassificationLoss final : public ClassificationLoss {
 public:
  double evaluate(const Matrix&, std::span<const int>, Matrix&) const override { return 0.0; }
};

struct LossBreakdown {
  double total = 0.0;
  double cls_term = 0.0;
  double ifl_term = 0.0;
  double alpha = 0.0;
};

struct LossEvaluation {
  LossBreakdown breakdown;
  Matrix grad;  // d(total)/d(features), one row per batch sample
};

/// Distances below this are treated as zero when normalizing gradients.
inline constexpr double kNormEpsilon = 1e-12;

/// Multi-center loss: cls + alpha * sum_i ||f_i - C(x_i)||_2.
LossEvaluation mcl(const Matrix& features, std::span<const int> labels, std::span<const CenterRef> assigned,
                   const CenterSet& centers, const ClassificationLoss& cls, double alpha);

/// Multi-center triplet loss: cls + alpha * sum_i max(0, ||f_i - C_p|| - ||f_i - C_n|| + margin),
/// where C_n is the nearest center of any other class. `margin` defaults to 0.
LossEvaluation mctl(const Matrix& features, std::span<const int> labels, std::span<const CenterRef> assigned,
                    const CenterSet& centers, const ClassificationLoss& cls, double alpha, double margin = 0.0);

/// JSON {class: [{tree_root_id, prototype, vector}]}.
std::string centers_to_json(const CenterSet& centers, std::span<const std::string> ids_by_row = {});

}  // namespace cogforest
