#include "cogforest/loss.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

namespace cogforest {

CenterSet::CenterSet(std::map<int, std::vector<Center>> centers) : centers_(std::move(centers)) {
  bool first = true;
  for (const auto& [label, list] : centers_) {
    if (list.empty()) throw InputError("class " + std::to_string(label) + " has no centers");
    for (const auto& c : list) {
      if (first) {
        dim_ = static_cast<std::size_t>(c.vector.size());
        first = false;
      }
      if (static_cast<std::size_t>(c.vector.size()) != dim_) throw InputError("centers differ in dimension");
      if (!c.vector.allFinite()) throw InputError("center of class " + std::to_string(label) + " is not finite");
    }
  }
}

const std::vector<Center>& CenterSet::of_class(int label) const {
  auto it = centers_.find(label);
  if (it == centers_.end()) throw InputError("no centers for class " + std::to_string(label));
  return it->second;
}

const Center& CenterSet::at(const CenterRef& ref) const {
  const auto& list = of_class(ref.class_label);
  if (ref.tree >= list.size()) throw InputError("center index out of range");
  return list[ref.tree];
}

CenterSet extract_centers(std::span<const CLForest> forests, const Matrix& features) {
  std::map<int, std::vector<Center>> out;
  for (const auto& f : forests) {
    auto& list = out[f.class_label()];
    if (!list.empty()) throw InputError("two forests for class " + std::to_string(f.class_label()));
    for (NodeId root : f.roots()) {
      const std::size_t proto = f.node(root).prototype;
      if (proto >= static_cast<std::size_t>(features.rows())) throw InputError("prototype row outside feature matrix");
      list.push_back({root, proto, features.row(static_cast<Eigen::Index>(proto)).transpose()});
    }
  }
  return CenterSet(std::move(out));
}

CenterSet extract_centers(std::span<const CLForest> forests, const FeatureMatrix& x) {
  return extract_centers(forests, x.features());
}

CenterRef assign_center(std::size_t sample, std::span<const CLForest> forests, const CenterSet& centers) {
  for (const auto& f : forests) {
    if (!f.contains(sample)) continue;
    const CenterRef ref{f.class_label(), f.tree_of(f.node_of(sample))};
    if (centers.at(ref).tree_root != f.roots()[ref.tree]) {
      throw InputError("center set does not match the forest of class " + std::to_string(f.class_label()));
    }
    return ref;
  }
  throw InputError("sample " + std::to_string(sample) + " belongs to no forest");
}

std::vector<CenterRef> assign_all(std::size_t rows, std::span<const CLForest> forests, const CenterSet& centers) {
  std::vector<CenterRef> out(rows);
  std::vector<bool> seen(rows, false);
  for (const auto& f : forests) {
    const auto& list = centers.of_class(f.class_label());
    if (list.size() != f.tree_count()) throw InputError("center count differs from tree count");
    for (const auto& node : f.nodes()) {
      const std::size_t tree = f.tree_of(node.id);
      for (std::size_t m : node.members) {
        if (m >= rows) throw InputError("forest row outside range");
        out[m] = {f.class_label(), tree};
        seen[m] = true;
      }
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (!seen[r]) throw InputError("sample " + std::to_string(r) + " belongs to no forest");
  }
  return out;
}

double SoftmaxCrossEntropy::evaluate(const Matrix& features, std::span<const int> labels, Matrix& grad) const {
  Matrix grad_logits;
  const double loss = softmax_cross_entropy(classifier_.logits(features), labels, &grad_logits);
  grad += classifier_.feature_gradient(grad_logits);
  return loss;
}

namespace {

void check_batch(const Matrix& features, std::span<const int> labels, std::span<const CenterRef> assigned,
                 const CenterSet& centers, double alpha) {
  if (!(alpha >= 0.0)) throw InputError("alpha must be >= 0");
  const auto b = static_cast<std::size_t>(features.rows());
  if (labels.size() != b || assigned.size() != b) throw InputError("batch, label and center counts differ");
  if (centers.class_count() == 0) throw InputError("center set is empty");
  if (static_cast<std::size_t>(features.cols()) != centers.dim()) {
    throw InputError("feature dimension " + std::to_string(features.cols()) + " does not match center dimension " +
                     std::to_string(centers.dim()));
  }
}

LossEvaluation start(const Matrix& features, std::span<const int> labels, const ClassificationLoss& cls,
                     double alpha) {
  LossEvaluation out;
  out.grad = Matrix::Zero(features.rows(), features.cols());
  out.breakdown.alpha = alpha;
  out.breakdown.cls_term = cls.evaluate(features, labels, out.grad);
  return out;
}

}  // namespace

LossEvaluation mcl(const Matrix& features, std::span<const int> labels, std::span<const CenterRef> assigned,
                   const CenterSet& centers, const ClassificationLoss& cls, double alpha) {
  check_batch(features, labels, assigned, centers, alpha);
  LossEvaluation out = start(features, labels, cls, alpha);
  double ifl = 0.0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const Vector diff = features.row(i).transpose() - centers.at(assigned[static_cast<std::size_t>(i)]).vector;
    const double dist = diff.norm();
    ifl += dist;
    if (dist >= kNormEpsilon && alpha != 0.0) out.grad.row(i) += (alpha / dist) * diff.transpose();
  }
  out.breakdown.ifl_term = ifl;
  out.breakdown.total = out.breakdown.cls_term + alpha * ifl;
  return out;
}

LossEvaluation mctl(const Matrix& features, std::span<const int> labels, std::span<const CenterRef> assigned,
                    const CenterSet& centers, const ClassificationLoss& cls, double alpha, double margin) {
  check_batch(features, labels, assigned, centers, alpha);
  if (centers.class_count() < 2) throw InputError("triplet loss needs centers from at least two classes");
  LossEvaluation out = start(features, labels, cls, alpha);
  double ifl = 0.0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const Vector f = features.row(i).transpose();
    const Vector to_pos = f - centers.at(assigned[k]).vector;
    const double dp = to_pos.norm();

    const Vector* negative = nullptr;
    double dn = std::numeric_limits<double>::infinity();
    for (const auto& [label, list] : centers.by_class()) {
      if (label == labels[k]) continue;
      for (const auto& c : list) {
        const double d = (f - c.vector).norm();
        if (d < dn) {
          dn = d;
          negative = &c.vector;
        }
      }
    }
    if (!negative) throw InputError("no center of another class for sample " + std::to_string(k));

    const double hinge = dp - dn + margin;
    if (hinge <= 0.0) continue;
    ifl += hinge;
    if (alpha == 0.0) continue;
    if (dp >= kNormEpsilon) out.grad.row(i) += (alpha / dp) * to_pos.transpose();
    const Vector to_neg = f - *negative;
    if (dn >= kNormEpsilon) out.grad.row(i) -= (alpha / dn) * to_neg.transpose();
  }
  out.breakdown.ifl_term = ifl;
  out.breakdown.total = out.breakdown.cls_term + alpha * ifl;
  return out;
}

std::string centers_to_json(const CenterSet& centers, std::span<const std::string> ids_by_row) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [label, list] : centers.by_class()) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : list) {
      nlohmann::ordered_json entry;
      entry["tree_root_id"] = c.tree_root;
      entry["prototype"] = c.prototype;
      if (c.prototype < ids_by_row.size()) entry["prototype_id"] = ids_by_row[c.prototype];
      entry["vector"] = std::vector<double>(c.vector.data(), c.vector.data() + c.vector.size());
      arr.push_back(std::move(entry));
    }
    doc[std::to_string(label)] = std::move(arr);
  }
  return doc.dump(2);
}

}  // namespace cogforest
