#include "ipm/reference/orthogonal.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ipm/error.hpp"

namespace ipm::reference {

Eigen::MatrixXd sample_orthogonal(int dim, engine::StreamKey key) {
  if (dim < 1) throw ConfigError("sample_orthogonal: dimension must be positive");
  const auto n = static_cast<std::size_t>(dim);
  std::vector<double> draws(n * n);
  engine::fill_gaussians(key, engine::Domain::orthogonal, n, dim, draws);
  const Eigen::MatrixXd z =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          draws.data(), dim, dim);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

double orthogonality_defect(const Eigen::MatrixXd& q) {
  if (q.rows() != q.cols()) return std::numeric_limits<double>::infinity();
  return (q.transpose() * q - Eigen::MatrixXd::Identity(q.rows(), q.cols())).cwiseAbs().maxCoeff();
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# seed=" << seed << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("malformed number '" + cell + "' in " + path.string());
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("ragged matrix in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("empty matrix in " + path.string());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace ipm::reference
