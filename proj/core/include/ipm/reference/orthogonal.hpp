#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Dense>

#include "ipm/engine/rng.hpp"

namespace ipm::reference {

/// Haar-distributed orthogonal matrix: QR of a standard Gaussian matrix with
/// the columns of Q multiplied by sign(R_ii).
[[nodiscard]] Eigen::MatrixXd sample_orthogonal(int dim, engine::StreamKey key);

/// max |Q^T Q - I| entry.
[[nodiscard]] double orthogonality_defect(const Eigen::MatrixXd& q);

/// CSV with a `# seed=<seed>` comment line followed by one row per matrix row.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      std::uint64_t seed);
[[nodiscard]] Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

}  // namespace ipm::reference
