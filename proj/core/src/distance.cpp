#include "cogforest/distance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>

namespace cogforest {

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::kEuclidean:
      return "euclidean";
    case Metric::kCosine:
      return "cosine";
    case Metric::kManhattan:
      return "manhattan";
  }
  return "euclidean";
}

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::kEuclidean;
  if (name == "cosine" || name == "cosine-distance") return Metric::kCosine;
  if (name == "manhattan") return Metric::kManhattan;
  throw InputError("unknown metric '" + std::string(name) + "'");
}

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> values, Metric metric)
    : n_(n), d_(std::move(values)), metric_(metric) {
  if (d_.size() != n_ * n_) throw InputError("distance matrix storage does not match N x N");
}

double distance(Metric metric, std::span<const double> a, std::span<const double> b) {
  const std::size_t dim = a.size();
  switch (metric) {
    case Metric::kEuclidean: {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double t = a[k] - b[k];
        s += t * t;
      }
      return std::sqrt(s);
    }
    case Metric::kManhattan: {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += std::abs(a[k] - b[k]);
      return s;
    }
    case Metric::kCosine: {
      double dot = 0.0, na = 0.0, nb = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
      }
      // A zero vector has no direction; treat it as orthogonal to everything.
      if (na == 0.0 || nb == 0.0) return 1.0;
      const double c = dot / (std::sqrt(na) * std::sqrt(nb));
      return std::clamp(1.0 - c, 0.0, 2.0);
    }
  }
  return 0.0;
}

std::size_t worker_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("COGFOREST_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return n;
}

DistanceMatrix pairwise_distances(const Matrix& features, std::span<const std::size_t> rows,
                                  Metric metric) {
  const std::size_t n = rows.size();
  const std::size_t dim = static_cast<std::size_t>(features.cols());
  std::vector<double> d(n * n, 0.0);

  auto fill_rows = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < n; i += stride) {
      std::span<const double> a(features.row(static_cast<Eigen::Index>(rows[i])).data(), dim);
      for (std::size_t j = i + 1; j < n; ++j) {
        std::span<const double> b(features.row(static_cast<Eigen::Index>(rows[j])).data(), dim);
        d[i * n + j] = distance(metric, a, b);
      }
    }
  };

  // Each upper-triangle cell is written by exactly one worker, so the result
  // does not depend on the thread count.
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(1, n / 64));
  if (workers <= 1) {
    fill_rows(0, 1);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(fill_rows, w, workers);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d[j * n + i] = d[i * n + j];
  }
  return DistanceMatrix(n, std::move(d), metric);
}

DistanceMatrix pairwise_distances(const FeatureMatrix& x, Metric metric) {
  std::vector<std::size_t> rows(x.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return pairwise_distances(x.features(), rows, metric);
}

double base_distance(const DistanceMatrix& d) {
  const std::size_t n = d.size();
  if (n < 2) throw InputError("base distance needs at least two samples");
  const std::size_t k = std::min<std::size_t>(3, n - 1);
  std::vector<double> scratch;
  scratch.reserve(n - 1);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    scratch.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) scratch.push_back(d(i, j));
    }
    std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k), scratch.end());
    double s = 0.0;
    for (std::size_t t = 0; t < k; ++t) s += scratch[t];
    total += s / static_cast<double>(k);
  }
  return total / static_cast<double>(n);
}

ClfParams resolve_params(const ClfParams& p, double base) {
  p.validate();
  ClfParams out = p;
  if (p.d_rd.is_multiple) out.d_rd = Radius::absolute(p.d_rd.value * base);
  if (p.d_rn.is_multiple) out.d_rn = Radius::absolute(p.d_rn.value * base);
  return out;
}

ClfParams resolve_params(const ClfParams& p, const DistanceMatrix& d) {
  p.validate();
  if (p.resolved()) return p;
  return resolve_params(p, base_distance(d));
}

}  // namespace cogforest
