#ifndef HORODRIFT_ESTIMATORS_HPP
#define HORODRIFT_ESTIMATORS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "horodrift/brownian.hpp"
#include "horodrift/geometry.hpp"
#include "horodrift/horofield.hpp"

namespace horodrift::estimators {

using brownian::Path;
using geometry::ModelSpace;
using geometry::Point;
using horofield::Horofunction;
using horofield::ScalarField;

/// Universal estimator return type.
struct EstimateWithCI {
  double value = 0.0;
  double stderr_ = 0.0;
  std::uint64_t n = 0;
  double horizon = 0.0;
  std::string method;
  bool exact = false;
};

/// The four invariants of one cover.
struct InvariantSet {
  EstimateWithCI ell;     // linear drift
  EstimateWithCI h;       // stochastic entropy
  EstimateWithCI v;       // volume entropy
  EstimateWithCI lambda;  // bottom of the spectrum
};

struct DriftEstimate {
  EstimateWithCI est;
  /// (t, mean of d(X_0, X_t)/t) along the geometric checkpoint grid.
  std::vector<std::pair<double, double>> checkpoints;
};

/// Mean of d(X_0, X_T)/T over a shared-horizon path set.
DriftEstimate estimate_drift(const ModelSpace& space, std::span<const Path> paths,
                             int threads = 0);

struct DriftKernelEstimate {
  EstimateWithCI est;  // at the last grid horizon
  std::vector<std::pair<double, double>> sequence;
};

/// Kernel-form drift: E[d(x, X_T)]/T per grid horizon, sampling X_T from the
/// simulator (equivalent to integrating the heat kernel).
DriftKernelEstimate estimate_drift_kernel(const ModelSpace& space,
                                          std::span<const double> T_grid,
                                          std::size_t n_mc, double dt,
                                          std::uint64_t master_seed, int threads = 0);

/// Mean of -ln p(T, X_0, X_T)/T; kernel evaluated in log space.
EstimateWithCI estimate_entropy(const ModelSpace& space, std::span<const Path> paths,
                                int threads = 0);

/// Horospherical displacement L(T) = xi(X_T) - xi(X_0) of one path.
double horospherical_displacement(const Path& path, const Horofunction& xi);
/// Harmonic kernel K(T) = ln k(X_0) - ln k(X_T) of one path.
double transverse_kernel(const Path& path, const ScalarField& k);

struct LmKmEstimate {
  EstimateWithCI lm;      // mean L/T
  EstimateWithCI km;      // mean K/T
  EstimateWithCI h;       // mean -ln p/T on the same samples
  EstimateWithCI hprime;  // h - km, exact in arithmetic; stderr from per-path values
};

LmKmEstimate estimate_lm_km(const ModelSpace& space, const Horofunction& xi,
                            const ScalarField& k, std::span<const Path> paths,
                            int threads = 0);

/// Least-squares slope of ln vol B(R) over the top half of the grid; exact
/// closed-form overrides for Euclidean (0) and H2 (1); Monte Carlo volumes
/// for products.
EstimateWithCI estimate_volume_entropy(const ModelSpace& space,
                                       std::span<const double> R_grid,
                                       std::uint64_t mc_samples = 400000,
                                       std::uint64_t seed = 0);

/// The same least-squares machinery on closed-form volumes, for convergence
/// displays and tests.
double volume_entropy_slope(const ModelSpace& space, std::span<const double> R_grid,
                            std::uint64_t mc_samples = 400000, std::uint64_t seed = 0,
                            double* slope_stderr = nullptr);

struct LambdaEstimate {
  EstimateWithCI upper;  // min Rayleigh quotient over the s grid (upper bound)
  double best_s = 0.0;
  bool has_exact = false;
  double exact = 0.0;
};

/// Rayleigh quotient of f = e^{-s r} cutoff(r; R) by radial quadrature,
/// minimized over the s grid and refined by golden section to 1e-4.
LambdaEstimate estimate_lambda(const ModelSpace& space, double R,
                               std::span<const double> s_grid);

struct HarmonicSample {
  Point x;           // uniform on the fundamental square [0,1)^2
  Point y;           // kernel sample at time t from x
  Horofunction xi;   // grid-sampled xi_y on the probe grid
  double sup_linear_fit = 0.0;  // sup probe distance to the best linear horofunction
};

struct CesaroResult {
  std::vector<HarmonicSample> samples;
  double median_sup_linear_fit = 0.0;
  EstimateWithCI drift_functional;  // E[xi(X_tau) - xi(X_0)]/tau
};

/// Harmonic-measure sampler on the flat cover of the square torus:
/// x uniform on [0,1)^2, y Gaussian at time t (Cesaro mode draws t uniform
/// in [0, t] first). Probe grid defaults to a 9x9 grid on [-1,1]^2.
CesaroResult harmonic_measure_sample(const ModelSpace& space, double t, std::size_t n,
                                     std::span<const Point> probe_grid, double tau,
                                     RngSeed seed, bool cesaro = false,
                                     int threads = 0);

std::vector<Point> default_probe_grid();

/// Declared finite-horizon bias allowances used by the inequality verdicts;
/// exact scaling for flat factors, O(1/T) (log-corrected for entropy)
/// allowances for hyperbolic ones.
double drift_bias_budget(const ModelSpace& space, double T);
double entropy_bias_budget(const ModelSpace& space, double T);
double volume_bias_budget(const ModelSpace& space, std::span<const double> R_grid);

}  // namespace horodrift::estimators

#endif
