#pragma once

// Plain-text formats.
//
//   tensor:        "n1 n2 n3" then n1*n2*n3 values in storage order (i fastest)
//   factor matrix: "rows F" then rows*F values, row-major
//   observations:  "n1 n2 n3 sigma" then one "i j k y" line per sample
//
// Values are written with 17 significant digits so a write/read cycle is exact.

#include <iosfwd>
#include <string>

#include "sparsecp/sampling.hpp"
#include "sparsecp/tensor.hpp"

namespace sparsecp::io {

void write_tensor(std::ostream& os, const Tensor3d& t);
Tensor3d read_tensor(std::istream& is, const std::string& source = "<stream>");
void save_tensor(const std::string& path, const Tensor3d& t);
Tensor3d load_tensor(const std::string& path);

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(std::istream& is, const std::string& source = "<stream>");
void save_matrix(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_matrix(const std::string& path);

/// Writes prefix + "_A.txt", "_B.txt", "_C.txt".
void save_factors(const std::string& prefix, const CPFactorsd& f);
CPFactorsd load_factors(const std::string& prefix);

void write_observations(std::ostream& os, const Observations& obs);
/// Samples may appear in any order; they are sorted on read. Duplicates are rejected.
Observations read_observations(std::istream& is, const std::string& source = "<stream>");
void save_observations(const std::string& path, const Observations& obs);
Observations load_observations(const std::string& path);

}  // namespace sparsecp::io
