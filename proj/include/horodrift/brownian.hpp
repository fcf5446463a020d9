#ifndef HORODRIFT_BROWNIAN_HPP
#define HORODRIFT_BROWNIAN_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "horodrift/geometry.hpp"
#include "horodrift/rng.hpp"

namespace horodrift::brownian {

using geometry::ModelSpace;
using geometry::Point;

enum class Scheme { Exact, Euler };

/// One Brownian trajectory under the convention du/dt = Lap u (Euclidean
/// increments have variance 2t per coordinate). Reproducible bit-exactly
/// from (space, start, T, scheme, dt, seed).
struct Path {
  ModelSpace space;
  Point start;
  std::vector<std::pair<double, Point>> checkpoints;  // (time, point); t=0 first, t=T last
  Scheme scheme = Scheme::Euler;
  double dt = 0.0;  // 0 for the exact scheme
  RngSeed seed;

  double horizon() const { return checkpoints.back().first; }
  const Point& end() const { return checkpoints.back().second; }
};

/// Geometric checkpoint grid {0} u {T 2^-k, k=12..1} u {T}.
std::vector<double> checkpoint_times(double T);

/// Samples one path. Exact scheme is available on flat spaces only; the
/// Euler scheme refuses dt > 0.1 (weak-error guard). On the half-plane each
/// step solves the Y geometric SDE exactly and gives X a trapezoidal
/// quadratic variation; products run independent factor paths.
Path sample_path(const ModelSpace& space, const Point& start, double T, Scheme scheme,
                 double dt, RngSeed seed);

/// Batch sampling: path i uses stream i; results are identical for any
/// thread count. threads = 0 picks the OpenMP default, 1 forces serial.
std::vector<Path> sample_paths(const ModelSpace& space, const Point& start, double T,
                               Scheme scheme, double dt, std::uint64_t master_seed,
                               std::size_t n, int threads = 0);
/// Plain-loop reference used to pin down the parallel version in tests.
std::vector<Path> sample_paths_serial(const ModelSpace& space, const Point& start,
                                      double T, Scheme scheme, double dt,
                                      std::uint64_t master_seed, std::size_t n);

/// Heat kernel for du/dt = Lap u. Euclidean closed form; half-plane by
/// adaptive Gauss-Kronrod quadrature of the classical integral formula
/// (endpoint singularity removed by u = sqrt(cosh s - cosh r)); products
/// multiply factor kernels. Symmetric in (p, q) by construction.
double heat_kernel(const ModelSpace& space, double t, const Point& p, const Point& q);
double log_heat_kernel(const ModelSpace& space, double t, const Point& p,
                       const Point& q);
/// Radial forms (kernels depend only on distance).
double log_heat_kernel_radial(const ModelSpace& space, double t, double d);

struct SemigroupResult {
  double lhs = 0.0;         // estimate of int p(s,p,y) p(t,y,q) dy
  double rhs = 0.0;         // heat_kernel(s+t, p, q)
  double lhs_stderr = 0.0;  // 0 for closed forms
  std::uint64_t n = 0;
  std::string method;
};

/// Importance-sampled MC on the half-plane (proposal approximates the
/// s-kernel; both kernel factors are evaluated in the weight), closed form on
/// Euclidean spaces, factor-wise product on products. kernel_scale is a test
/// hook multiplying every kernel evaluation.
SemigroupResult semigroup_check(const ModelSpace& space, double s, double t,
                                const Point& p, const Point& q, std::uint64_t n_mc,
                                RngSeed seed = {}, double kernel_scale = 1.0);

struct GaussianBoundReport {
  double t = 0.0;
  double C = 0.0;       // certified constant
  double margin = 0.0;  // min over samples of ln C - (d/C)^2 - ln p(t,d)
  bool holds = false;
  std::size_t n = 0;
};

/// Finds a constant C with p(t,d) <= C exp(-(d/C)^2) over the sampled
/// distances; vacuously true on an empty sample.
GaussianBoundReport gaussian_bound_check(const ModelSpace& space, double t,
                                         std::span<const double> distances);

}  // namespace horodrift::brownian

#endif
