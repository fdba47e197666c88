#include "cogforest/feature_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace cogforest {
namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  for (auto& c : cells) {
    while (!c.empty() && (c.front() == ' ' || c.front() == '\t')) c.remove_prefix(1);
    while (!c.empty() && (c.back() == ' ' || c.back() == '\t' || c.back() == '\r')) c.remove_suffix(1);
  }
  return cells;
}

double parse_double(std::string_view cell, std::size_t line_no, std::size_t col) {
  double v = 0.0;
  const char* first = cell.data();
  if (!cell.empty() && cell.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw InputError("line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) +
                     ": cannot parse '" + std::string(cell) + "' as a number");
  }
  return v;
}

int parse_label(std::string_view cell, std::size_t line_no) {
  if (cell.empty()) return kNoLabel;
  int v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || v < 0) {
    throw InputError("line " + std::to_string(line_no) + ": label '" + std::string(cell) +
                     "' is not a non-negative integer");
  }
  return v;
}

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const char* what) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), sizeof(T))) throw InputError(std::string("truncated binary input reading ") + what);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

constexpr std::array<char, 4> kMagic = {'C', 'G', 'F', '1'};

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

FeatureMatrix read_features_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line != "\r") {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw InputError("empty feature file");

  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "id" || header[1] != "label") {
    throw InputError("line " + std::to_string(line_no) + ": header must be id,label,f0,...");
  }
  const std::size_t dim = header.size() - 2;

  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " columns, found " + std::to_string(cells.size()));
    }
    if (cells[0].empty()) throw InputError("line " + std::to_string(line_no) + ": empty sample id");
    ids.emplace_back(cells[0]);
    labels.push_back(parse_label(cells[1], line_no));
    for (std::size_t c = 2; c < cells.size(); ++c) values.push_back(parse_double(cells[c], line_no, c));
  }
  if (ids.empty()) throw InputError("feature file has a header but no samples");

  Matrix features(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(dim));
  std::copy(values.begin(), values.end(), features.data());
  return FeatureMatrix(std::move(ids), std::move(features), std::move(labels));
}

void write_features_csv(std::ostream& out, const FeatureMatrix& x) {
  out << "id,label";
  for (std::size_t j = 0; j < x.dim(); ++j) out << ",f" << j;
  out << '\n';
  for (std::size_t i = 0; i < x.size(); ++i) {
    out << x.id(i) << ',';
    if (x.has_labels()) out << x.label(i);
    for (std::size_t j = 0; j < x.dim(); ++j) {
      out << ',' << format_real(x.features()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
}

FeatureMatrix read_features_binary(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kMagic) throw InputError("binary input does not start with CGF1");
  const auto n = get_le<std::uint32_t>(in, "N");
  const auto d = get_le<std::uint32_t>(in, "D");
  if (n == 0 || d == 0) throw InputError("binary input declares an empty matrix");

  std::vector<std::string> ids(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto len = get_le<std::uint32_t>(in, "id length");
    ids[i].resize(len);
    if (len > 0 && !in.read(ids[i].data(), len)) throw InputError("truncated binary input reading id");
  }
  std::vector<int> labels(n);
  for (auto& l : labels) l = get_le<std::int32_t>(in, "label");
  Matrix features(n, d);
  for (Eigen::Index k = 0; k < features.size(); ++k) features.data()[k] = get_le<double>(in, "features");
  return FeatureMatrix(std::move(ids), std::move(features), std::move(labels));
}

void write_features_binary(std::ostream& out, const FeatureMatrix& x) {
  out.write(kMagic.data(), 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(x.size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(x.dim()));
  for (const auto& id : x.ids()) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    put_le<std::int32_t>(out, x.has_labels() ? x.label(i) : kNoLabel);
  }
  const Matrix& f = x.features();
  for (Eigen::Index k = 0; k < f.size(); ++k) put_le<double>(out, f.data()[k]);
}

FeatureMatrix read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::array<char, 4> head{};
  in.read(head.data(), 4);
  const bool binary = in.gcount() == 4 && head == kMagic;
  in.clear();
  in.seekg(0);
  return binary ? read_features_binary(in) : read_features_csv(in);
}

void write_features(const std::filesystem::path& path, const FeatureMatrix& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  if (path.extension() == ".cgf") {
    write_features_binary(out, x);
  } else {
    write_features_csv(out, x);
  }
}

}  // namespace cogforest
