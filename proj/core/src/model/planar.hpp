#pragma once

// Pointwise formulas of the planar built-in problems, shared by the strict
// per-point evaluators and the vectorized batch kernels.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>

namespace ipm::model::planar {

struct Planar {
  double b1, b2;     // drift
  double g1, g2;     // grad V
  double laplacian;  // Delta V
  double divergence;
};

struct StdTrig {
  static double sin(double x) { return std::sin(x); }
  static double cos(double x) { return std::cos(x); }
};

/// sin through cos of a shifted argument: GCC fuses sin(x) and cos(x) into a
/// scalar sincos call that blocks vectorization.
struct VecTrig {
  static double sin(double x) { return std::cos(x - 0.5 * std::numbers::pi); }
  static double cos(double x) { return std::cos(x); }
};

struct LinearSingleWell {
  static double potential(double x1, double x2) { return 0.5 * (x1 * x1 + x2 * x2); }
  template <class Trig = StdTrig>
  static Planar local(double x1, double x2) { return {x2, -x1, x1, x2, 2.0, 0.0}; }
  static void jacobian(double, double, std::span<double> j) {
    j[0] = 0.0; j[1] = 1.0;
    j[2] = -1.0; j[3] = 0.0;
  }
};

struct LinearDoubleWell {
  static double potential(double x1, double x2) {
    return -1.0 + 4.0 * (x1 - 1.0) * (x1 - 1.0) + x2 * x2;
  }
  template <class Trig = StdTrig>
  static Planar local(double x1, double x2) {
    return {-x2, x1 - 1.0, 8.0 * (x1 - 1.0), 2.0 * x2, 10.0, 0.0};
  }
  static void jacobian(double, double, std::span<double> j) {
    j[0] = 0.0; j[1] = -1.0;
    j[2] = 1.0; j[3] = 0.0;
  }
};

// pi^{-1} (cos(pi x1) sin(pi x2), -sin(pi x1) cos(pi x2))
struct CellularFlow {
  double b1, b2, j11, j12, j21, j22;

  template <class Trig = StdTrig>
  static CellularFlow at(double x1, double x2) {
    constexpr double pi = std::numbers::pi;
    const double s1 = Trig::sin(pi * x1), c1 = Trig::cos(pi * x1);
    const double s2 = Trig::sin(pi * x2), c2 = Trig::cos(pi * x2);
    return {c1 * s2 / pi, -s1 * c2 / pi, -s1 * s2, c1 * c2, -c1 * c2, s1 * s2};
  }
};

struct SingleWell {
  static double potential(double x1, double x2) {
    return 0.5 * (x1 * x1 + x2 * x2) + 0.125 * (x1 * x1 * x1 * x1 + x2 * x2 * x2 * x2);
  }
  template <class Trig = StdTrig>
  static Planar local(double x1, double x2) {
    const CellularFlow f = CellularFlow::at<Trig>(x1, x2);
    return {f.b1,
            f.b2,
            x1 + 0.5 * x1 * x1 * x1,
            x2 + 0.5 * x2 * x2 * x2,
            2.0 + 1.5 * (x1 * x1 + x2 * x2),
            f.j11 + f.j22};
  }
  static void jacobian(double x1, double x2, std::span<double> j) {
    const CellularFlow f = CellularFlow::at(x1, x2);
    j[0] = f.j11; j[1] = f.j12;
    j[2] = f.j21; j[3] = f.j22;
  }
};

struct DoubleWell {
  double a = 0.4;

  double potential(double x1, double x2) const {
    const double s = x1 - 1.0;
    return x1 * x1 * x1 * x1 - 2.0 * x1 * x1 + (1.0 + a * s * s) * x2 * x2 + x2 * x2 * x2 * x2;
  }
  template <class Trig = StdTrig>
  Planar local(double x1, double x2) const {
    const CellularFlow f = CellularFlow::at<Trig>(x1, x2);
    const double s = x1 - 1.0;
    const double q = 1.0 + a * s * s;
    return {f.b1,
            f.b2,
            4.0 * x1 * x1 * x1 - 4.0 * x1 + 2.0 * a * s * x2 * x2,
            2.0 * q * x2 + 4.0 * x2 * x2 * x2,
            12.0 * x1 * x1 - 4.0 + 2.0 * a * x2 * x2 + 2.0 * q + 12.0 * x2 * x2,
            f.j11 + f.j22};
  }
  static void jacobian(double x1, double x2, std::span<double> j) {
    SingleWell::jacobian(x1, x2, j);
  }
};

// V = -|x|^2/4 + |x|^4/8 has a circle of minima; b = (cos x1 sin x2, -sin x1 cos x2).
struct CircleWell {
  static double potential(double x1, double x2) {
    const double r2 = x1 * x1 + x2 * x2;
    return -0.25 * r2 + 0.125 * r2 * r2;
  }
  template <class Trig = StdTrig>
  static Planar local(double x1, double x2) {
    const double r2 = x1 * x1 + x2 * x2;
    const double s1 = Trig::sin(x1), c1 = Trig::cos(x1);
    const double s2 = Trig::sin(x2), c2 = Trig::cos(x2);
    const double k = 0.5 * (r2 - 1.0);
    return {c1 * s2, -s1 * c2, k * x1, k * x2, 2.0 * r2 - 1.0, -s1 * s2 + s1 * s2};
  }
  static void jacobian(double x1, double x2, std::span<double> j) {
    const double s1 = std::sin(x1), c1 = std::cos(x1);
    const double s2 = std::sin(x2), c2 = std::cos(x2);
    j[0] = -s1 * s2; j[1] = c1 * c2;
    j[2] = -c1 * c2; j[3] = s1 * s2;
  }
};

/// Fused drift and weight potential over n points (row-major n x 2).
/// Compiled with -ffast-math; the caller checks finiteness.
template <class Formulas>
void evaluate_batch(const Formulas& f, const double* points, std::size_t n, double epsilon,
                    double alpha, double* drift, double* weight);

}  // namespace ipm::model::planar
