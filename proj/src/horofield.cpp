#include "horodrift/horofield.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "horodrift/error.hpp"

namespace horodrift::horofield {

namespace {

Vec slice(const Vec& v, std::size_t begin, std::size_t len) {
  return Vec(v.begin() + static_cast<std::ptrdiff_t>(begin),
             v.begin() + static_cast<std::ptrdiff_t>(begin + len));
}

void append(Vec& dst, const Vec& src) { dst.insert(dst.end(), src.begin(), src.end()); }

void validate_factor_boundary(const ModelSpace& space, const FactorBoundary& fb) {
  if (std::holds_alternative<EuclideanDir>(fb)) {
    if (space.kind() != ModelSpace::Kind::Euclidean)
      throw Error("parse_error", "dir: boundary only valid on euclidean factors");
    const auto& d = std::get<EuclideanDir>(fb);
    if (d.v.size() != static_cast<std::size_t>(space.dim()))
      throw Error("parse_error", "boundary direction dimension mismatch");
    double n2 = 0.0;
    for (double c : d.v) n2 += c * c;
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-9)
      throw Error("parse_error", "boundary direction must be a unit vector");
  } else {
    if (space.kind() != ModelSpace::Kind::HalfPlane)
      throw Error("parse_error", "q: boundary only valid on h2 factors");
  }
}

void validate_boundary(const ModelSpace& space, const BoundaryForm& form) {
  if (std::holds_alternative<ProductBoundary>(form)) {
    if (!space.is_product())
      throw Error("parse_error", "prod: boundary needs a product space");
    const auto& pb = std::get<ProductBoundary>(form);
    validate_factor_boundary(space.left(), pb.left);
    validate_factor_boundary(space.right(), pb.right);
    if (!(pb.theta >= 0.0 && pb.theta <= 1.5707963267948966 + 1e-12))
      throw Error("parse_error", "theta must lie in [0, pi/2]");
  } else {
    if (space.is_product())
      throw Error("parse_error", "product space needs a prod: boundary");
    if (std::holds_alternative<EuclideanDir>(form))
      validate_factor_boundary(space, FactorBoundary{std::get<EuclideanDir>(form)});
    else
      validate_factor_boundary(space, FactorBoundary{std::get<HalfPlanePoint>(form)});
  }
}

double factor_boundary_eval(const ModelSpace& space, const FactorBoundary& fb,
                            const Point& z) {
  const Point x0 = space.basepoint();
  if (std::holds_alternative<EuclideanDir>(fb)) {
    const auto& v = std::get<EuclideanDir>(fb).v;
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += (z[i] - x0[i]) * v[i];
    return -s;
  }
  const auto& hp = std::get<HalfPlanePoint>(fb);
  if (hp.at_infinity) return -std::log(z[1]) + std::log(x0[1]);
  // conjugate q to infinity by w -> -1/(w - q): Im = y / |w-q|^2
  auto b = [&](const Point& w) {
    const double dx = w[0] - hp.q;
    return -std::log(w[1] / (dx * dx + w[1] * w[1]));
  };
  return b(z) - b(x0);
}

}  // namespace

double busemann_from_point(const ModelSpace& space, const Point& x, const Point& z) {
  const Point x0 = space.basepoint();
  return geometry::distance(space, x, z) - geometry::distance(space, x, x0);
}

double busemann_boundary(const ModelSpace& space, const BoundaryForm& params,
                         const Point& z) {
  space.validate(z);
  if (std::holds_alternative<ProductBoundary>(params)) {
    const auto& pb = std::get<ProductBoundary>(params);
    const auto nl = static_cast<std::size_t>(space.left().dim());
    const Point zl{slice(z.coords, 0, nl)};
    const Point zr{slice(z.coords, nl, z.dim() - nl)};
    return std::cos(pb.theta) * factor_boundary_eval(space.left(), pb.left, zl) +
           std::sin(pb.theta) * factor_boundary_eval(space.right(), pb.right, zr);
  }
  if (std::holds_alternative<EuclideanDir>(params))
    return factor_boundary_eval(space, FactorBoundary{std::get<EuclideanDir>(params)}, z);
  return factor_boundary_eval(space, FactorBoundary{std::get<HalfPlanePoint>(params)}, z);
}

namespace {

Vec factor_ray_direction(const ModelSpace& space, const FactorBoundary& fb) {
  const Point x0 = space.basepoint();
  if (std::holds_alternative<EuclideanDir>(fb)) return std::get<EuclideanDir>(fb).v;
  const auto& hp = std::get<HalfPlanePoint>(fb);
  const double x = x0[0], y = x0[1];
  if (hp.at_infinity) return {0.0, y};
  if (hp.q == x) return {0.0, -y};
  // semicircle through x0 with foot q: center c on the axis
  const double c = (hp.q * hp.q - x * x - y * y) / (2.0 * (hp.q - x));
  const double rho = std::hypot(x - c, y);
  const double sgn = hp.q > x ? 1.0 : -1.0;
  return {sgn * y * y / rho, sgn * y * (c - x) / rho};
}

}  // namespace

Vec boundary_ray_direction(const ModelSpace& space, const BoundaryForm& params) {
  validate_boundary(space, params);
  if (std::holds_alternative<ProductBoundary>(params)) {
    const auto& pb = std::get<ProductBoundary>(params);
    Vec v = factor_ray_direction(space.left(), pb.left);
    for (auto& c : v) c *= std::cos(pb.theta);
    Vec w = factor_ray_direction(space.right(), pb.right);
    for (auto& c : w) c *= std::sin(pb.theta);
    append(v, w);
    return v;
  }
  if (std::holds_alternative<EuclideanDir>(params))
    return factor_ray_direction(space, FactorBoundary{std::get<EuclideanDir>(params)});
  return factor_ray_direction(space, FactorBoundary{std::get<HalfPlanePoint>(params)});
}

Horofunction Horofunction::finite_point(ModelSpace space, Point x) {
  space.validate(x);
  Horofunction h(std::move(space));
  h.form_ = Form::FinitePoint;
  h.x_ = std::move(x);
  return h;
}

Horofunction Horofunction::boundary(ModelSpace space, BoundaryForm params) {
  validate_boundary(space, params);
  Horofunction h(std::move(space));
  h.form_ = Form::Boundary;
  h.boundary_ = std::move(params);
  return h;
}

Horofunction Horofunction::grid_sampled(ModelSpace space, std::vector<Point> probes,
                                        std::vector<double> values) {
  if (probes.size() != values.size())
    throw Error("contract_error", "grid_sampled probes/values size mismatch");
  Horofunction h(std::move(space));
  h.form_ = Form::GridSampled;
  h.probes_ = std::move(probes);
  h.values_ = std::move(values);
  return h;
}

double Horofunction::operator()(const Point& z) const {
  switch (form_) {
    case Form::FinitePoint:
      return busemann_from_point(space_, x_, z);
    case Form::Boundary:
      return busemann_boundary(space_, boundary_, z);
    case Form::GridSampled: {
      for (std::size_t i = 0; i < probes_.size(); ++i) {
        if (probes_[i].dim() != z.dim()) continue;
        double diff = 0.0;
        for (std::size_t j = 0; j < z.dim(); ++j)
          diff = std::max(diff, std::abs(probes_[i][j] - z[j]));
        if (diff < 1e-12) return values_[i];
      }
      throw Error("unsupported", "grid-sampled horofunction evaluated off its probes");
    }
  }
  return 0.0;
}

namespace {

// split "prod:<left>,<right>,theta=<t>" respecting commas inside dir: vectors
std::pair<std::string_view, std::string_view> split_prod_factors(std::string_view body) {
  for (std::size_t i = body.size(); i-- > 0;) {
    if (body[i] != ',') continue;
    std::string_view tail = body.substr(i + 1);
    if (tail.substr(0, 2) == "q:" || tail.substr(0, 4) == "dir:")
      return {body.substr(0, i), tail};
  }
  throw Error("parse_error", "cannot split product horofunction factors");
}

FactorBoundary parse_factor(const ModelSpace& space, std::string_view spec) {
  if (spec.substr(0, 2) == "q:") {
    std::string_view val = spec.substr(2);
    HalfPlanePoint hp;
    if (val == "inf") {
      hp.at_infinity = true;
    } else {
      hp.at_infinity = false;
      try {
        hp.q = std::stod(std::string(val));
      } catch (const std::exception&) {
        throw Error("parse_error", "bad q: value in horofunction spec");
      }
    }
    validate_factor_boundary(space, FactorBoundary{hp});
    return hp;
  }
  if (spec.substr(0, 4) == "dir:") {
    std::string body(spec.substr(4));
    EuclideanDir d;
    std::size_t pos = 0;
    while (pos <= body.size()) {
      std::size_t comma = body.find(',', pos);
      std::string tok = body.substr(pos, comma == std::string::npos ? std::string::npos
                                                                    : comma - pos);
      try {
        d.v.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw Error("parse_error", "bad dir: component in horofunction spec");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    validate_factor_boundary(space, FactorBoundary{d});
    return d;
  }
  throw Error("parse_error", "unknown horofunction factor spec: " + std::string(spec));
}

}  // namespace

Horofunction Horofunction::parse(const ModelSpace& space, std::string_view spec) {
  if (spec.substr(0, 5) == "prod:") {
    if (!space.is_product())
      throw Error("parse_error", "prod: horofunction needs a product space");
    std::string_view body = spec.substr(5);
    const std::size_t tpos = body.rfind(",theta=");
    if (tpos == std::string_view::npos)
      throw Error("parse_error", "prod: horofunction needs theta=<real>");
    double theta = 0.0;
    try {
      theta = std::stod(std::string(body.substr(tpos + 7)));
    } catch (const std::exception&) {
      throw Error("parse_error", "bad theta value in horofunction spec");
    }
    auto [l, r] = split_prod_factors(body.substr(0, tpos));
    ProductBoundary pb{parse_factor(space.left(), l), parse_factor(space.right(), r),
                       theta};
    return boundary(space, BoundaryForm{pb});
  }
  if (spec.substr(0, 2) == "q:" || spec.substr(0, 4) == "dir:") {
    FactorBoundary fb = parse_factor(space, spec);
    if (std::holds_alternative<EuclideanDir>(fb))
      return boundary(space, BoundaryForm{std::get<EuclideanDir>(fb)});
    return boundary(space, BoundaryForm{std::get<HalfPlanePoint>(fb)});
  }
  throw Error("parse_error", "unknown horofunction spec: " + std::string(spec));
}

Horofunction deck_action(const ModelSpace& space, const std::vector<long long>& g,
                         const Horofunction& xi) {
  if (space.kind() != ModelSpace::Kind::Euclidean)
    throw Error("unsupported", "deck_action is only defined on euclidean lattices");
  if (g.size() != static_cast<std::size_t>(space.dim()))
    throw Error("contract_error", "lattice vector dimension mismatch");
  switch (xi.form()) {
    case Horofunction::Form::FinitePoint: {
      Point x = xi.defining_point();
      for (std::size_t i = 0; i < g.size(); ++i) x.coords[i] += static_cast<double>(g[i]);
      return Horofunction::finite_point(space, std::move(x));
    }
    case Horofunction::Form::Boundary:
      // z -> xi(z-g) - xi(x0-g) fixes every linear horofunction
      return xi;
    case Horofunction::Form::GridSampled:
      throw Error("unsupported",
                  "deck_action on a grid-sampled horofunction: shifted probe values "
                  "are not available");
  }
  return xi;
}

// ---------------------------------------------------------------------------
// differential operators
// ---------------------------------------------------------------------------

namespace {

constexpr double kFdRel = 1e-4;

Vec fd_steps(const ModelSpace& space, const Point& p) {
  Vec scale = geometry::chart_scale(space, p);
  for (auto& s : scale) s = kFdRel * std::max(1.0, s);
  return scale;
}

double partial_fd(const std::function<double(const Point&)>& f, const Point& p,
                  std::size_t i, double h) {
  Point q = p;
  auto at = [&](double off) {
    q.coords[i] = p[i] + off;
    return f(q);
  };
  return (at(-2 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2 * h)) / (12.0 * h);
}

void check_singularity(const ScalarField& f, const Point& p, const Vec& h) {
  if (!f.singular_at) return;
  double dist = 0.0, span = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    dist = std::max(dist, std::abs(p[i] - (*f.singular_at)[i]));
    span = std::max(span, h[i]);
  }
  if (dist < 8.0 * span)
    throw Error("singularity", "differential operator at a finite-point horofunction's "
                               "singular point");
}

}  // namespace

Vec gradient_fd(const ScalarField& f, const Point& p) {
  f.space.validate(p);
  const Vec h = fd_steps(f.space, p);
  check_singularity(f, p, h);
  const auto m = geometry::metric_tensor(f.space, p);
  Vec g(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i)
    g[i] = m.g_inv_diag[i] * partial_fd(f.eval, p, i, h[i]);
  return g;
}

double laplacian_fd(const ScalarField& f, const Point& p) {
  f.space.validate(p);
  const Vec h = fd_steps(f.space, p);
  check_singularity(f, p, h);
  // divergence form: (1/sqrt g) d_i ( sqrt g g^{ii} d_i f ), with the inner
  // derivative evaluated by the same 4th-order stencil at each outer node
  auto flux = [&](const Point& q, std::size_t i) {
    const auto mq = geometry::metric_tensor(f.space, q);
    return mq.sqrt_det * mq.g_inv_diag[i] * partial_fd(f.eval, q, i, h[i]);
  };
  const auto mp = geometry::metric_tensor(f.space, p);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    Point q = p;
    auto at = [&](double off) {
      q.coords[i] = p[i] + off;
      return flux(q, i);
    };
    sum += (at(-2 * h[i]) - 8.0 * at(-h[i]) + 8.0 * at(h[i]) - at(2 * h[i])) /
           (12.0 * h[i]);
  }
  return sum / mp.sqrt_det;
}

Vec gradient(const ScalarField& f, const Point& p) {
  if (f.grad_analytic) return f.grad_analytic(p);
  return gradient_fd(f, p);
}

double laplacian(const ScalarField& f, const Point& p) {
  if (f.lap_analytic) return f.lap_analytic(p);
  return laplacian_fd(f, p);
}

double divergence_fd(const ModelSpace& space,
                     const std::function<Vec(const Point&)>& Y, const Point& p) {
  space.validate(p);
  Vec scale = geometry::chart_scale(space, p);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    const double h = kFdRel * std::max(1.0, scale[i]);
    Point q = p;
    auto at = [&](double off) {
      q.coords[i] = p[i] + off;
      const auto mq = geometry::metric_tensor(space, q);
      return mq.sqrt_det * Y(q)[i];
    };
    sum += (at(-2 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2 * h)) / (12.0 * h);
  }
  return sum / geometry::metric_tensor(space, p).sqrt_det;
}

double grad_norm(const ModelSpace& space, const Point& p, const Vec& grad) {
  return std::sqrt(geometry::inner(space, p, grad, grad));
}

// ---------------------------------------------------------------------------
// fields
// ---------------------------------------------------------------------------

namespace {

// analytic data for a factor boundary horofunction; gradients contravariant
Vec factor_boundary_grad(const ModelSpace& /*space*/, const FactorBoundary& fb,
                         const Point& z) {
  if (std::holds_alternative<EuclideanDir>(fb)) {
    Vec g = std::get<EuclideanDir>(fb).v;
    for (auto& c : g) c = -c;
    return g;
  }
  const auto& hp = std::get<HalfPlanePoint>(fb);
  const double y = z[1];
  if (hp.at_infinity) return {0.0, -y};
  const double dx = z[0] - hp.q;
  const double rho2 = dx * dx + y * y;
  // d/dx ln(rho^2/y) = 2 dx / rho2 ; d/dy = 2y/rho2 - 1/y ; raise with y^2
  return {y * y * 2.0 * dx / rho2, y * y * (2.0 * y / rho2 - 1.0 / y)};
}

double factor_boundary_lap(const ModelSpace& space, const FactorBoundary&) {
  // Busemann functions have constant Laplacian on catalog factors:
  // 0 on Euclidean, 1 on the half-plane (asymptotic harmonicity)
  return space.kind() == ModelSpace::Kind::HalfPlane ? 1.0 : 0.0;
}

}  // namespace

ScalarField horofunction_field(const ModelSpace& space, const Horofunction& xi) {
  ScalarField f;
  f.space = space;
  f.eval = [space, xi](const Point& z) { return xi(z); };
  if (xi.form() == Horofunction::Form::FinitePoint) {
    f.singular_at = xi.defining_point();
    return f;
  }
  if (xi.form() != Horofunction::Form::Boundary) return f;
  const BoundaryForm params = xi.boundary_params();
  if (std::holds_alternative<ProductBoundary>(params)) {
    const auto pb = std::get<ProductBoundary>(params);
    const ModelSpace l = space.left(), r = space.right();
    const auto nl = static_cast<std::size_t>(l.dim());
    f.grad_analytic = [=](const Point& z) {
      Vec gl = factor_boundary_grad(l, pb.left, Point{slice(z.coords, 0, nl)});
      for (auto& c : gl) c *= std::cos(pb.theta);
      Vec gr = factor_boundary_grad(r, pb.right, Point{slice(z.coords, nl, z.dim() - nl)});
      for (auto& c : gr) c *= std::sin(pb.theta);
      append(gl, gr);
      return gl;
    };
    const double lap = std::cos(pb.theta) * factor_boundary_lap(l, pb.left) +
                       std::sin(pb.theta) * factor_boundary_lap(r, pb.right);
    f.lap_analytic = [lap](const Point&) { return lap; };
    return f;
  }
  FactorBoundary fb = std::holds_alternative<EuclideanDir>(params)
                          ? FactorBoundary{std::get<EuclideanDir>(params)}
                          : FactorBoundary{std::get<HalfPlanePoint>(params)};
  f.grad_analytic = [space, fb](const Point& z) {
    return factor_boundary_grad(space, fb, z);
  };
  const double lap = factor_boundary_lap(space, fb);
  f.lap_analytic = [lap](const Point&) { return lap; };
  return f;
}

namespace {

ScalarField exp_scaled_horofunction(const ModelSpace& space, const Horofunction& xi,
                                    double ell, bool log_form) {
  ScalarField base = horofunction_field(space, xi);
  ScalarField f;
  f.space = space;
  if (log_form) {
    f.eval = [base, ell](const Point& z) { return -ell * base.eval(z); };
    if (base.grad_analytic) {
      auto g0 = base.grad_analytic;
      f.grad_analytic = [g0, ell](const Point& z) {
        Vec g = g0(z);
        for (auto& c : g) c *= -ell;
        return g;
      };
    }
    if (base.lap_analytic) {
      auto l0 = base.lap_analytic;
      f.lap_analytic = [l0, ell](const Point& z) { return -ell * l0(z); };
    }
    return f;
  }
  f.eval = [base, ell](const Point& z) { return std::exp(-ell * base.eval(z)); };
  f.log_eval = [base, ell](const Point& z) { return -ell * base.eval(z); };
  if (base.grad_analytic) {
    auto g0 = base.grad_analytic;
    auto e0 = base.eval;
    f.grad_analytic = [g0, e0, ell](const Point& z) {
      const double k = std::exp(-ell * e0(z));
      Vec g = g0(z);
      for (auto& c : g) c *= -ell * k;
      return g;
    };
  }
  if (base.grad_analytic && base.lap_analytic) {
    auto g0 = base.grad_analytic;
    auto l0 = base.lap_analytic;
    auto e0 = base.eval;
    f.lap_analytic = [space, g0, l0, e0, ell](const Point& z) {
      const double k = std::exp(-ell * e0(z));
      const Vec g = g0(z);
      const double gn2 = geometry::inner(space, z, g, g);
      return k * (ell * ell * gn2 - ell * l0(z));
    };
  }
  return f;
}

}  // namespace

ScalarField minimal_harmonic(const ModelSpace& space, const Horofunction& xi) {
  if (space.is_flat()) {
    // positive harmonic functions on compact-quotient flat covers are constant
    ScalarField f;
    f.space = space;
    f.eval = [](const Point&) { return 1.0; };
    f.log_eval = [](const Point&) { return 0.0; };
    f.grad_analytic = [space](const Point& p) { return Vec(p.dim(), 0.0); };
    f.lap_analytic = [](const Point&) { return 0.0; };
    return f;
  }
  if (xi.form() != Horofunction::Form::Boundary)
    throw Error("contract_error", "minimal_harmonic needs a boundary-form horofunction");
  return exp_scaled_horofunction(space, xi, space.known_drift(), false);
}

ScalarField log_minimal_harmonic(const ModelSpace& space, const Horofunction& xi) {
  if (space.is_flat()) {
    ScalarField f;
    f.space = space;
    f.eval = [](const Point&) { return 0.0; };
    f.grad_analytic = [space](const Point& p) { return Vec(p.dim(), 0.0); };
    f.lap_analytic = [](const Point&) { return 0.0; };
    return f;
  }
  if (xi.form() != Horofunction::Form::Boundary)
    throw Error("contract_error", "minimal_harmonic needs a boundary-form horofunction");
  return exp_scaled_horofunction(space, xi, space.known_drift(), true);
}

}  // namespace horodrift::horofield
