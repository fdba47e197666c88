#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "cogforest/types.hpp"

namespace cogforest {

// CSV layout: header `id,label,f0,...,f{D-1}`; an empty label cell means
// unlabeled. Binary layout ("CGF1", little-endian):
//   char[4] magic, u32 N, u32 D,
//   N x { u32 byte length, id bytes },
//   N x i32 label (-1 = unlabeled),
//   N*D x f64 features, row-major.

FeatureMatrix read_features_csv(std::istream& in);
void write_features_csv(std::ostream& out, const FeatureMatrix& x);

FeatureMatrix read_features_binary(std::istream& in);
void write_features_binary(std::ostream& out, const FeatureMatrix& x);

/// Detects the format from the leading magic bytes.
FeatureMatrix read_features(const std::filesystem::path& path);
/// Writes binary when the extension is .cgf, CSV otherwise.
void write_features(const std::filesystem::path& path, const FeatureMatrix& x);

/// Fixed 17-significant-digit rendering; round-trips every finite double.
std::string format_real(double v);

}  // namespace cogforest
