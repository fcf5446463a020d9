#ifndef HORODRIFT_GEOMETRY_HPP
#define HORODRIFT_GEOMETRY_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "horodrift/rng.hpp"

namespace horodrift::geometry {

using Vec = std::vector<double>;

/// Chart coordinates of a point. Half-plane charts store (x, y) with y > 0;
/// products concatenate factor coordinates.
struct Point {
  Vec coords;
  double operator[](std::size_t i) const { return coords[i]; }
  std::size_t dim() const { return coords.size(); }
};

/// Catalog cover: Euclidean(n), the hyperbolic half-plane, or a product of
/// two of those (nesting depth <= 2). Immutable value type.
class ModelSpace {
 public:
  enum class Kind { Euclidean, HalfPlane, Product };

  ModelSpace() = default;  // euclidean:1

  static ModelSpace euclidean(int dim);
  static ModelSpace half_plane();
  static ModelSpace product(ModelSpace left, ModelSpace right);

  /// Parses `euclidean:<n>`, `h2`, and products joined by `x`
  /// (`h2xh2`, `euclidean:<n>xh2`, ...).
  static ModelSpace parse(std::string_view name);
  std::string name() const;

  Kind kind() const { return kind_; }
  bool is_product() const { return kind_ == Kind::Product; }
  bool is_flat() const;  // no hyperbolic factor
  int dim() const { return dim_; }
  const ModelSpace& left() const { return factors_[0]; }
  const ModelSpace& right() const { return factors_[1]; }

  Point basepoint() const;
  /// Throws invalid_point on chart violations (dimension, y <= 0).
  void validate(const Point& p) const;
  bool chart_valid(const Point& p) const;

  /// Exact linear drift of Brownian motion on this space (0 flat, 1 on H2,
  /// sqrt of sum of squares for products).
  double known_drift() const;
  /// Exact bottom of the spectrum (0 flat, 1/4 on H2, additive on products).
  double known_lambda() const;
  /// Exact volume entropy (0 flat, 1 on H2, sqrt of sum of squares).
  double known_volume_entropy() const;
  /// Exact stochastic entropy (0 flat, 1 on H2, additive on products).
  double known_entropy() const;

  bool operator==(const ModelSpace& o) const { return name() == o.name(); }

 private:
  Kind kind_ = Kind::Euclidean;
  int dim_ = 1;
  std::vector<ModelSpace> factors_;  // size 2 for products
};

/// arccosh via ln(x + sqrt(x^2-1)), with a series for x-1 < 1e-8 so nearby
/// points keep full precision (the FD operators depend on this).
double acosh_stable(double x);

/// Riemannian distance; closed forms per catalog space.
double distance(const ModelSpace& space, const Point& p, const Point& q);

/// Chart realization of the metric at a point. Diagonal for every catalog
/// chart: Euclidean identity, half-plane y^-2 I, products block-diagonal.
struct MetricTensor {
  Vec g_diag;
  Vec g_inv_diag;
  double sqrt_det = 1.0;
};
MetricTensor metric_tensor(const ModelSpace& space, const Point& p);

/// Per-coordinate chart scale (1 for Euclidean coordinates, y on the
/// half-plane); used to size FD steps.
Vec chart_scale(const ModelSpace& space, const Point& p);

/// Riemannian norm of a chart-coordinate (covariant-free) tangent vector.
double tangent_norm(const ModelSpace& space, const Point& p, const Vec& v);

/// Riemannian inner product of two contravariant tangent vectors.
double inner(const ModelSpace& space, const Point& p, const Vec& a, const Vec& b);

/// Unit-speed geodesic from p with unit initial velocity `direction`
/// (chart components, unit in the metric at p). Throws contract_error if the
/// direction norm deviates from 1 by more than 1e-9.
Point geodesic_ray(const ModelSpace& space, const Point& p, const Vec& direction,
                   double t);

struct VolumeEstimate {
  double value = 0.0;
  double stderr_ = 0.0;  // 0 for closed forms
  std::uint64_t n = 0;   // MC sample count (0 for closed forms)
  bool exact = true;
};

/// Ball volume about the basepoint. Closed form for Euclidean and H2;
/// Monte Carlo (factor-ball rejection) for products, with its standard error.
VolumeEstimate ball_volume(const ModelSpace& space, double R,
                           std::uint64_t mc_samples = 400000, RngSeed seed = {});

/// i.i.d. uniform sample w.r.t. Riemannian volume on B(x0, R).
std::vector<Point> sample_uniform_ball(const ModelSpace& space, double R,
                                       std::size_t count, RngSeed seed);

/// Surface area of the metric sphere of radius r about the basepoint.
/// Closed form for Euclidean and H2, 1-D quadrature for products.
double sphere_area(const ModelSpace& space, double r);

double euclidean_ball_volume(int n, double R);

}  // namespace horodrift::geometry

#endif
