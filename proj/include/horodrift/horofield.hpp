#ifndef HORODRIFT_HOROFIELD_HPP
#define HORODRIFT_HOROFIELD_HPP

#include <functional>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "horodrift/geometry.hpp"

namespace horodrift::horofield {

using geometry::ModelSpace;
using geometry::Point;
using geometry::Vec;

/// Boundary parameters per catalog space.
struct EuclideanDir {
  Vec v;  // unit direction
};
struct HalfPlanePoint {
  double q = 0.0;        // boundary point on the real axis
  bool at_infinity = true;
};
using FactorBoundary = std::variant<EuclideanDir, HalfPlanePoint>;
struct ProductBoundary {
  FactorBoundary left;
  FactorBoundary right;
  double theta = 0.0;  // [0, pi/2]; (l,r,theta) ~ (r,l,pi/2-theta)
};
using BoundaryForm = std::variant<EuclideanDir, HalfPlanePoint, ProductBoundary>;

double busemann_from_point(const ModelSpace& space, const Point& x, const Point& z);
double busemann_boundary(const ModelSpace& space, const BoundaryForm& params,
                         const Point& z);

/// Unit tangent at the basepoint whose geodesic ray converges to the given
/// boundary form (used by the convergence tests).
Vec boundary_ray_direction(const ModelSpace& space, const BoundaryForm& params);

/// A horofunction evaluator, normalized to 0 at the basepoint by construction.
class Horofunction {
 public:
  enum class Form { FinitePoint, Boundary, GridSampled };

  Horofunction() : space_(ModelSpace::euclidean(1)), x_{{0.0}} {}

  static Horofunction finite_point(ModelSpace space, Point x);
  static Horofunction boundary(ModelSpace space, BoundaryForm params);
  /// Values must be pre-normalized (0 at the basepoint if it is a probe);
  /// supports evaluation only at its probe points.
  static Horofunction grid_sampled(ModelSpace space, std::vector<Point> probes,
                                   std::vector<double> values);
  /// Config grammar: `dir:<v1,v2,...>` | `q:inf` | `q:<real>` |
  /// `prod:<left>,<right>,theta=<real>`.
  static Horofunction parse(const ModelSpace& space, std::string_view spec);

  double operator()(const Point& z) const;

  Form form() const { return form_; }
  const ModelSpace& space() const { return space_; }
  const Point& defining_point() const { return x_; }
  const BoundaryForm& boundary_params() const { return boundary_; }
  const std::vector<Point>& probes() const { return probes_; }
  const std::vector<double>& values() const { return values_; }

 private:
  Horofunction(ModelSpace space) : space_(std::move(space)) {}
  ModelSpace space_;
  Form form_ = Form::FinitePoint;
  Point x_;
  BoundaryForm boundary_;
  std::vector<Point> probes_;
  std::vector<double> values_;
};

/// Deck transformation action of the lattice Z^n on Euclidean horofunctions:
/// (g.xi)(z) = xi(z - g) - xi(x0 - g). Boundary forms are fixed points;
/// finite-point forms shift their defining point.
Horofunction deck_action(const ModelSpace& space, const std::vector<long long>& g,
                         const Horofunction& xi);

/// Scalar field on a catalog space with optional analytic derivative data.
/// grad closures return contravariant components.
struct ScalarField {
  ModelSpace space;
  std::function<double(const Point&)> eval;
  std::function<double(const Point&)> log_eval;       // optional, for tiny values
  std::function<Vec(const Point&)> grad_analytic;     // optional
  std::function<double(const Point&)> lap_analytic;   // optional
  std::optional<Point> singular_at;                   // FinitePoint singularity
};

/// xi as a differentiable field, with analytic gradient/Laplacian registered
/// for the boundary closed forms.
ScalarField horofunction_field(const ModelSpace& space, const Horofunction& xi);

/// 4th-order central differences in chart coordinates with metric correction;
/// step h_i = 1e-4 * max(1, chart scale). Returns the contravariant gradient.
Vec gradient_fd(const ScalarField& f, const Point& p);
/// Laplace-Beltrami in divergence form, nested 4th-order stencils.
double laplacian_fd(const ScalarField& f, const Point& p);

/// Prefer the registered analytic override, falling back to FD.
Vec gradient(const ScalarField& f, const Point& p);
double laplacian(const ScalarField& f, const Point& p);

/// (1/sqrt g) d_i (sqrt g Y^i) for a contravariant vector field Y.
double divergence_fd(const ModelSpace& space,
                     const std::function<Vec(const Point&)>& Y, const Point& p);

/// Riemannian norm of a contravariant gradient.
double grad_norm(const ModelSpace& space, const Point& p, const Vec& grad);

/// The minimal harmonic density of the equality case: k = exp(-l * xi) with
/// l the space's known drift; k(x0) = 1. Euclidean spaces return the constant
/// field 1. Requires a boundary-form xi.
ScalarField minimal_harmonic(const ModelSpace& space, const Horofunction& xi);
/// ln k as a field (exact, no underflow for large |xi|).
ScalarField log_minimal_harmonic(const ModelSpace& space, const Horofunction& xi);

}  // namespace horodrift::horofield

#endif
