#include "sparsecp/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace sparsecp::io {

namespace {

constexpr int kDigits = std::numeric_limits<double>::max_digits10;

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void check_written(std::ostream& os, const std::string& path) {
  os.flush();
  if (!os) throw IoError("write failed for '" + path + "'");
}

template <typename T>
T read_value(std::istream& is, const std::string& source, const char* what) {
  T v;
  if (!(is >> v)) throw IoError(source + ": expected " + what);
  return v;
}

}  // namespace

void write_tensor(std::ostream& os, const Tensor3d& t) {
  const auto& d = t.dims();
  os << d[0] << ' ' << d[1] << ' ' << d[2] << '\n' << std::setprecision(kDigits);
  for (Index e = 0; e < t.size(); ++e) os << t.values()[e] << (e + 1 == t.size() || (e + 1) % d[0] == 0 ? '\n' : ' ');
}

Tensor3d read_tensor(std::istream& is, const std::string& source) {
  Dims d;
  for (auto& n : d) n = read_value<Index>(is, source, "tensor dimension");
  if (d[0] <= 0 || d[1] <= 0 || d[2] <= 0) throw IoError(source + ": tensor dims must be positive");
  Tensor3d t(d);
  for (Index e = 0; e < t.size(); ++e) t.values()[e] = read_value<double>(is, source, "tensor value");
  return t;
}

void save_tensor(const std::string& path, const Tensor3d& t) {
  auto out = open_out(path);
  write_tensor(out, t);
  check_written(out, path);
}

Tensor3d load_tensor(const std::string& path) {
  auto in = open_in(path);
  return read_tensor(in, path);
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  os << m.rows() << ' ' << m.cols() << '\n' << std::setprecision(kDigits);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) os << m(r, c) << (c + 1 == m.cols() ? '\n' : ' ');
  }
}

Eigen::MatrixXd read_matrix(std::istream& is, const std::string& source) {
  const auto rows = read_value<Index>(is, source, "row count");
  const auto cols = read_value<Index>(is, source, "column count");
  if (rows <= 0 || cols <= 0) throw IoError(source + ": matrix shape must be positive");
  Eigen::MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = read_value<double>(is, source, "matrix value");
  return m;
}

void save_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  auto out = open_out(path);
  write_matrix(out, m);
  check_written(out, path);
}

Eigen::MatrixXd load_matrix(const std::string& path) {
  auto in = open_in(path);
  return read_matrix(in, path);
}

void save_factors(const std::string& prefix, const CPFactorsd& f) {
  save_matrix(prefix + "_A.txt", f.a);
  save_matrix(prefix + "_B.txt", f.b);
  save_matrix(prefix + "_C.txt", f.c);
}

CPFactorsd load_factors(const std::string& prefix) {
  return CPFactorsd(load_matrix(prefix + "_A.txt"), load_matrix(prefix + "_B.txt"), load_matrix(prefix + "_C.txt"));
}

void write_observations(std::ostream& os, const Observations& obs) {
  const auto& d = obs.dims();
  os << std::setprecision(kDigits) << d[0] << ' ' << d[1] << ' ' << d[2] << ' ' << obs.sigma << '\n';
  const auto& idx = obs.samples.indices();
  for (std::size_t t = 0; t < idx.size(); ++t) {
    os << idx[t][0] << ' ' << idx[t][1] << ' ' << idx[t][2] << ' ' << obs.values[t] << '\n';
  }
}

Observations read_observations(std::istream& is, const std::string& source) {
  Dims d;
  for (auto& n : d) n = read_value<Index>(is, source, "dimension");
  const auto sigma = read_value<double>(is, source, "sigma");
  std::vector<std::pair<Index, std::pair<Triple, double>>> rows;
  Index i;
  while (is >> i) {
    const auto j = read_value<Index>(is, source, "j index");
    const auto k = read_value<Index>(is, source, "k index");
    const auto y = read_value<double>(is, source, "observed value");
    if (i < 0 || i >= d[0] || j < 0 || j >= d[1] || k < 0 || k >= d[2]) {
      throw IoError(source + ": sample (" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) +
                    ") outside dims " + to_string(d));
    }
    rows.push_back({i + d[0] * (j + d[1] * k), {{i, j, k}, y}});
  }
  if (!is.eof()) throw IoError(source + ": malformed sample line");
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Triple> idx;
  std::vector<double> values;
  idx.reserve(rows.size());
  values.reserve(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (t > 0 && rows[t].first == rows[t - 1].first) throw IoError(source + ": duplicate sample index");
    idx.push_back(rows[t].second.first);
    values.push_back(rows[t].second.second);
  }
  try {
    return Observations(SampleSet(d, std::move(idx)), std::move(values), sigma);
  } catch (const std::invalid_argument& e) {
    throw IoError(source + ": " + e.what());
  }
}

void save_observations(const std::string& path, const Observations& obs) {
  auto out = open_out(path);
  write_observations(out, obs);
  check_written(out, path);
}

Observations load_observations(const std::string& path) {
  auto in = open_in(path);
  return read_observations(in, path);
}

}  // namespace sparsecp::io
