#include "cogforest/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cogforest {

std::vector<std::size_t> DensityVector::ranks() const {
  std::vector<std::size_t> r(ordering.size());
  for (std::size_t pos = 0; pos < ordering.size(); ++pos) r[ordering[pos]] = pos;
  return r;
}

DensityVector compute_density(const DistanceMatrix& d, double d_rd) {
  if (!(d_rd > 0.0)) throw InputError("density radius must be > 0");
  const std::size_t n = d.size();
  DensityVector out;
  out.rho.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = d.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || row[j] > d_rd) continue;
      const double r = row[j] / d_rd;
      s += std::exp(-r * r);
    }
    out.rho[i] = s;
  }
  out.ordering.resize(n);
  std::iota(out.ordering.begin(), out.ordering.end(), std::size_t{0});
  std::stable_sort(out.ordering.begin(), out.ordering.end(),
                   [&](std::size_t a, std::size_t b) { return out.rho[a] > out.rho[b]; });
  return out;
}

}  // namespace cogforest
