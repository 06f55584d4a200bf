#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <doctest.h>

#include "helpers.hpp"
#include "ipm/error.hpp"
#include "ipm/model/builtin.hpp"
#include "ipm/reference/entropy_production.hpp"
#include "ipm/reference/limits.hpp"
#include "ipm/reference/orthogonal.hpp"
#include "ipm/reference/riccati.hpp"

using namespace ipm;
using namespace ipm::reference;
using Eigen::MatrixXd;

namespace {

/// Every real symmetric solution of the equation written as
///   0 = X^2 - (1 - 2a)/2 (J^T X + X J) - M^2/4 - a(1 - a) J^T J + (J^T M + M J)/4
/// obtained from n-dimensional invariant subspaces of the Hamiltonian matrix
/// [[A, -I], [-C, -A^T]] with A = (1 - 2a) J / 2 and C the constant term
/// negated. Subsets are enumerated by bitmask over the 2n eigenvalues.
std::vector<MatrixXd> all_symmetric_solutions(const MatrixXd& m, const MatrixXd& j, double a) {
  const Eigen::Index n = m.rows();
  const MatrixXd A = 0.5 * (1.0 - 2.0 * a) * j;
  const MatrixXd C = 0.25 * m * m + a * (1.0 - a) * j.transpose() * j - 0.25 * (j.transpose() * m + m * j);
  MatrixXd H(2 * n, 2 * n);
  H << A, -MatrixXd::Identity(n, n), -C, -A.transpose();
  Eigen::EigenSolver<MatrixXd> es(H);
  const Eigen::MatrixXcd V = es.eigenvectors();
  std::vector<MatrixXd> out;
  for (unsigned mask = 0; mask < (1u << (2 * n)); ++mask) {
    if (__builtin_popcount(mask) != n) continue;
    Eigen::MatrixXcd U(2 * n, n);
    int c = 0;
    for (Eigen::Index k = 0; k < 2 * n; ++k) {
      if (mask & (1u << k)) U.col(c++) = V.col(k);
    }
    const Eigen::MatrixXcd U1 = U.topRows(n), U2 = U.bottomRows(n);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(U1);
    if (!lu.isInvertible()) continue;
    const Eigen::MatrixXcd X = U2 * lu.inverse();
    if (X.imag().norm() > 1e-8 * (1.0 + X.norm())) continue;
    const MatrixXd Xr = X.real();
    if ((Xr - Xr.transpose()).norm() > 1e-8 * (1.0 + Xr.norm())) continue;
    out.push_back(0.5 * (Xr + Xr.transpose()));
  }
  return out;
}

/// Stable-subspace solution: the maximal one.
MatrixXd hamiltonian_solution(const MatrixXd& m, const MatrixXd& j, double a) {
  const Eigen::Index n = m.rows();
  const MatrixXd A = 0.5 * (1.0 - 2.0 * a) * j;
  const MatrixXd C = 0.25 * m * m + a * (1.0 - a) * j.transpose() * j - 0.25 * (j.transpose() * m + m * j);
  MatrixXd H(2 * n, 2 * n);
  H << A, -MatrixXd::Identity(n, n), -C, -A.transpose();
  Eigen::EigenSolver<MatrixXd> es(H);
  Eigen::MatrixXcd U(2 * n, n);
  int c = 0;
  for (Eigen::Index k = 0; k < 2 * n; ++k) {
    if (es.eigenvalues()(k).real() < 0.0) U.col(c++) = es.eigenvectors().col(k);
  }
  REQUIRE(c == n);
  return (U.bottomRows(n) * U.topRows(n).inverse()).real();
}

LinearProblemData random_linear_data(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  MatrixXd r(n, n), j(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      r(i, k) = g(rng);
      j(i, k) = g(rng);
    }
  return {r * r.transpose() + 0.5 * MatrixXd::Identity(n, n), j};
}

bool has_imaginary_axis_eigenvalue(const LinearProblemData& d, double a) {
  const Eigen::Index n = d.hessian.rows();
  const MatrixXd& m = d.hessian;
  const MatrixXd& j = d.drift_jacobian;
  const MatrixXd A = 0.5 * (1.0 - 2.0 * a) * j;
  const MatrixXd C = 0.25 * m * m + a * (1.0 - a) * j.transpose() * j - 0.25 * (j.transpose() * m + m * j);
  MatrixXd H(2 * n, 2 * n);
  H << A, -MatrixXd::Identity(n, n), -C, -A.transpose();
  return (Eigen::EigenSolver<MatrixXd>(H, false).eigenvalues().real().cwiseAbs().minCoeff() < 1e-6);
}

}  // namespace

TEST_SUITE("reference") {

TEST_CASE("LE1 Riccati value equals the closed form") {
  const LinearProblemData le1{MatrixXd::Identity(2, 2), (MatrixXd(2, 2) << 0, 1, -1, 0).finished()};
  for (int k = 0; k <= 20; ++k) {
    const double a = k / 20.0;
    const auto sol = solve_riccati(le1, a);
    CHECK(sol.lambda_value == doctest::Approx(1.0 - std::sqrt(1.0 + 4.0 * a * (1.0 - a))).epsilon(1e-10).scale(1.0));
    CHECK(sol.residual_norm < 1e-10);
    CHECK(sol.symmetry_defect < 1e-12);
    CHECK(sol.closed_loop_abscissa < 0.0);
    CHECK(limit_eigenvalue_E1(a) == doctest::Approx(sol.lambda_value).epsilon(1e-10).scale(1.0));
  }
  CHECK_THROWS_AS((void)limit_eigenvalue_E1(2.0), DomainError);
}

TEST_CASE("Newton-Kleinman matches the Hamiltonian stable subspace") {
  std::mt19937_64 rng(17);
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 3;
    const auto data = random_linear_data(rng, n);
    for (double a : {-0.1, 0.0, 0.3, 0.5, 0.8, 1.0, 1.1}) {
      if (has_imaginary_axis_eigenvalue(data, a)) continue;
      const auto sol = solve_riccati(data, a);
      const MatrixXd ref = hamiltonian_solution(data.hessian, data.drift_jacobian, a);
      CHECK((sol.X - ref).norm() < 1e-8 * (1.0 + ref.norm()));
      CHECK(riccati_residual(data, a, ref).norm() < 1e-8 * (1.0 + data.hessian.squaredNorm()));
      ++compared;
    }
  }
  CHECK(compared > 300);
}

TEST_CASE("the returned solution dominates every other symmetric solution") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const auto data = random_linear_data(rng, 2);
    const double a = std::uniform_real_distribution<double>(-0.1, 1.1)(rng);
    if (has_imaginary_axis_eigenvalue(data, a)) continue;
    const auto sol = solve_riccati(data, a);
    const auto all = all_symmetric_solutions(data.hessian, data.drift_jacobian, a);
    REQUIRE_FALSE(all.empty());
    for (const auto& x : all) {
      CHECK(riccati_residual(data, a, x).norm() < 1e-7 * (1.0 + x.squaredNorm()));
      const double min_eig = Eigen::SelfAdjointEigenSolver<MatrixXd>(sol.X - x).eigenvalues().minCoeff();
      CHECK(min_eig > -1e-8 * (1.0 + x.norm()));
    }
  }
}

TEST_CASE("residuals on E2 and E3 instances") {
  for (double a : {0.4, 1.0}) {
    for (int sign : {-1, 1}) {
      for (int k = 0; k <= 24; ++k) {
        const double alpha = -0.1 + 1.2 * k / 24.0;
        const auto sol = solve_riccati(double_well_data(a, sign), alpha);
        CHECK(sol.residual_norm <= 1e-10);
      }
    }
  }
  model::ProblemOptions opts;
  opts.e3_seed = 1;
  const auto p = model::builtin_problem("E3", opts);
  const auto& e3 = dynamic_cast<const model::CoupledProblem&>(*p);
  for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const auto sol = solve_riccati({e3.curvature(), e3.rotation()}, alpha);
    CHECK(sol.residual_norm <= 1e-10);
    CHECK(sol.closed_loop_abscissa < 0.0);
  }
}

TEST_CASE("limits vanish at alpha = 0 and 1 and are symmetric about 1/2") {
  model::ProblemOptions opts;
  opts.e3_dim = 8;
  for (const char* name : {"E1", "E2", "E3", "LE1", "LE2"}) {
    CAPTURE(name);
    const auto p = model::builtin_problem(name, opts);
    CHECK(std::abs(*reference_eigenvalue(*p, opts, 0.0)) < 1e-9);
    CHECK(std::abs(*reference_eigenvalue(*p, opts, 1.0)) < 1e-9);
    for (double a : {-0.1, 0.1, 0.3, 0.45}) {
      CHECK(*reference_eigenvalue(*p, opts, a) ==
            doctest::Approx(*reference_eigenvalue(*p, opts, 1.0 - a)).epsilon(1e-9).scale(1.0));
    }
  }
  const auto e4 = model::builtin_problem("E4");
  CHECK_FALSE(reference_eigenvalue(*e4, {}, 0.5).has_value());
}

TEST_CASE("LE2 reference does not depend on a") {
  for (int k = 0; k <= 12; ++k) {
    const double alpha = -0.1 + 0.1 * k;
    const double at04 = well_eigenvalue_E2(alpha, 0.4, +1);
    const double at1 = well_eigenvalue_E2(alpha, 1.0, +1);
    CHECK(std::abs(at04 - at1) < 1e-8);
    CHECK(std::abs(exact_eigenvalue_LE2(alpha) - at04) < 1e-8);
    CHECK(limit_eigenvalue_E2(alpha, 0.4) ==
          doctest::Approx(std::max(at04, well_eigenvalue_E2(alpha, 0.4, -1))).epsilon(1e-12));
  }
}

TEST_CASE("Lyapunov solver") {
  std::mt19937_64 rng(4);
  const auto d = random_linear_data(rng, 4);
  const MatrixXd F = -d.hessian + 0.3 * d.drift_jacobian;  // Hurwitz-ish
  const MatrixXd Q = d.hessian;
  const MatrixXd Y = solve_lyapunov(F, Q);
  CHECK((F.transpose() * Y + Y * F - Q).norm() < 1e-10 * (1.0 + Q.norm()));
}

TEST_CASE("invalid linear data") {
  LinearProblemData bad{(MatrixXd(2, 2) << 1, 2, 0, 1).finished(), MatrixXd::Zero(2, 2)};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.hessian = -MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.hessian = MatrixXd::Identity(2, 2);
  bad.drift_jacobian = MatrixXd::Zero(3, 3);
  CHECK_THROWS_AS((void)solve_riccati(bad, 0.5), ConfigError);
}

TEST_CASE("Haar orthogonal matrices") {
  const int d = 3, samples = 6000;
  std::vector<double> q11, q12, det_neg;
  for (int s = 0; s < samples; ++s) {
    const MatrixXd q = sample_orthogonal(d, {static_cast<std::uint64_t>(s), 0});
    CHECK(orthogonality_defect(q) < 1e-13);
    q11.push_back(q(0, 0));
    q12.push_back(q(0, 1));
    det_neg.push_back(q.determinant() < 0 ? 1.0 : 0.0);
  }
  // Haar: every entry has mean 0 and second moment 1/d; both determinants occur equally often.
  const double se = std::sqrt(1.0 / d / samples);
  CHECK(std::abs(ipm_test::mean(q11)) < 4.0 * se);
  CHECK(std::abs(ipm_test::mean(q12)) < 4.0 * se);
  double m2 = 0.0;
  for (double v : q11) m2 += v * v;
  CHECK(std::abs(m2 / samples - 1.0 / d) < 0.02);
  CHECK(std::abs(ipm_test::mean(det_neg) - 0.5) < 4.0 * std::sqrt(0.25 / samples));

  const MatrixXd a = sample_orthogonal(16, {9, 0});
  const MatrixXd b = sample_orthogonal(16, {9, 0});
  CHECK((a - b).norm() == 0.0);
  ipm_test::TempDir dir("orth");
  write_matrix_csv(dir / "q.csv", a, 9);
  CHECK((read_matrix_csv(dir / "q.csv") - a).norm() == 0.0);
}

TEST_CASE("direct entropy production of LE1") {
  const auto p = model::builtin_problem("LE1");
  const auto est = direct_entropy_production(*p, 0.1, 0.0078125, 128.0, 32, 3);
  CHECK(est.num_paths == 32);
  CAPTURE(est.rate);
  CAPTURE(est.standard_error);
  CHECK(std::abs(est.rate - 2.0) < 4.0 * est.standard_error + 0.05);
  CHECK_THROWS_AS((void)direct_entropy_production(*p, 0.0, 0.01, 1.0, 1, 0), ConfigError);
}

}  // TEST_SUITE
