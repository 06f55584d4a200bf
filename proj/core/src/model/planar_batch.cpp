#include "model/planar.hpp"

namespace ipm::model::planar {

template <class Formulas>
void evaluate_batch(const Formulas& f, const double* points, std::size_t n, double epsilon,
                    double alpha, double* drift, double* weight) {
  const double* __restrict xs = points;
  double* __restrict bs = drift;
  double* __restrict us = weight;
  const double inv_eps = 1.0 / epsilon;
  const double c_grad = -0.25 * inv_eps;
  const double c_cross = 0.5 * inv_eps;
  const double c_drift = -alpha * (1.0 - alpha) * inv_eps;
  const double c_div = -alpha;
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) {
    const Planar p = f.template local<VecTrig>(xs[2 * i], xs[2 * i + 1]);
    bs[2 * i] = p.b1;
    bs[2 * i + 1] = p.b2;
    us[i] = c_grad * (p.g1 * p.g1 + p.g2 * p.g2) + c_cross * (p.b1 * p.g1 + p.b2 * p.g2) +
            c_drift * (p.b1 * p.b1 + p.b2 * p.b2) + 0.5 * p.laplacian + c_div * p.divergence;
  }
}

template void evaluate_batch(const LinearSingleWell&, const double*, std::size_t, double, double, double*, double*);
template void evaluate_batch(const LinearDoubleWell&, const double*, std::size_t, double, double, double*, double*);
template void evaluate_batch(const SingleWell&, const double*, std::size_t, double, double, double*, double*);
template void evaluate_batch(const DoubleWell&, const double*, std::size_t, double, double, double*, double*);
template void evaluate_batch(const CircleWell&, const double*, std::size_t, double, double, double*, double*);

}  // namespace ipm::model::planar
