#include "horodrift/geometry.hpp"

#include <cmath>
#include <numbers>

#include "horodrift/error.hpp"
#include "horodrift/quadrature.hpp"

namespace horodrift::geometry {

namespace {
constexpr double kPi = std::numbers::pi;

void append(Vec& dst, const Vec& src) { dst.insert(dst.end(), src.begin(), src.end()); }

Vec slice(const Vec& v, std::size_t begin, std::size_t len) {
  return Vec(v.begin() + static_cast<std::ptrdiff_t>(begin),
             v.begin() + static_cast<std::ptrdiff_t>(begin + len));
}
}  // namespace

ModelSpace ModelSpace::euclidean(int dim) {
  if (dim < 1 || dim > 8) throw Error("unknown_space", "euclidean dimension must be in [1,8]");
  ModelSpace s;
  s.kind_ = Kind::Euclidean;
  s.dim_ = dim;
  return s;
}

ModelSpace ModelSpace::half_plane() {
  ModelSpace s;
  s.kind_ = Kind::HalfPlane;
  s.dim_ = 2;
  return s;
}

ModelSpace ModelSpace::product(ModelSpace left, ModelSpace right) {
  if (left.is_product() || right.is_product())
    throw Error("unknown_space", "product nesting depth must be <= 2");
  ModelSpace s;
  s.kind_ = Kind::Product;
  s.dim_ = left.dim_ + right.dim_;
  s.factors_.push_back(std::move(left));
  s.factors_.push_back(std::move(right));
  return s;
}

ModelSpace ModelSpace::parse(std::string_view name) {
  // factor names joined by 'x'; factor = "h2" or "euclidean:<n>"
  auto parse_factor = [](std::string_view f) -> ModelSpace {
    if (f == "h2") return half_plane();
    constexpr std::string_view prefix = "euclidean:";
    if (f.substr(0, prefix.size()) == prefix) {
      int n = 0;
      const std::string digits(f.substr(prefix.size()));
      try {
        std::size_t used = 0;
        n = std::stoi(digits, &used);
        if (used != digits.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error("unknown_space", "bad euclidean dimension in space id");
      }
      return euclidean(n);
    }
    throw Error("unknown_space", "unknown space id: " + std::string(f));
  };

  // split on 'x' except inside "euclidean:<n>" (digits contain no 'x')
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (name[i] == 'x') {
      // "euclidean:..." never contains 'x'; "h2xh2" splits at this 'x'
      std::string_view head = name.substr(start, i - start);
      if (head == "h2" || head.substr(0, 10) == "euclidean:") {
        parts.push_back(head);
        start = i + 1;
      }
    }
  }
  parts.push_back(name.substr(start));
  if (parts.size() == 1) return parse_factor(parts[0]);
  if (parts.size() == 2) return product(parse_factor(parts[0]), parse_factor(parts[1]));
  throw Error("unknown_space", "at most two factors supported: " + std::string(name));
}

std::string ModelSpace::name() const {
  switch (kind_) {
    case Kind::Euclidean:
      return "euclidean:" + std::to_string(dim_);
    case Kind::HalfPlane:
      return "h2";
    case Kind::Product:
      return factors_[0].name() + "x" + factors_[1].name();
  }
  return "?";
}

bool ModelSpace::is_flat() const {
  if (kind_ == Kind::Euclidean) return true;
  if (kind_ == Kind::HalfPlane) return false;
  return factors_[0].is_flat() && factors_[1].is_flat();
}

Point ModelSpace::basepoint() const {
  switch (kind_) {
    case Kind::Euclidean:
      return Point{Vec(static_cast<std::size_t>(dim_), 0.0)};
    case Kind::HalfPlane:
      return Point{{0.0, 1.0}};
    case Kind::Product: {
      Point p = factors_[0].basepoint();
      append(p.coords, factors_[1].basepoint().coords);
      return p;
    }
  }
  return {};
}

bool ModelSpace::chart_valid(const Point& p) const {
  if (p.dim() != static_cast<std::size_t>(dim_)) return false;
  for (double c : p.coords)
    if (!std::isfinite(c)) return false;
  switch (kind_) {
    case Kind::Euclidean:
      return true;
    case Kind::HalfPlane:
      return p.coords[1] > 0.0;
    case Kind::Product: {
      const auto nl = static_cast<std::size_t>(factors_[0].dim());
      return factors_[0].chart_valid(Point{slice(p.coords, 0, nl)}) &&
             factors_[1].chart_valid(Point{slice(p.coords, nl, p.dim() - nl)});
    }
  }
  return false;
}

void ModelSpace::validate(const Point& p) const {
  if (!chart_valid(p))
    throw Error("invalid_point", "point violates chart constraints of " + name());
}

double ModelSpace::known_drift() const {
  switch (kind_) {
    case Kind::Euclidean:
      return 0.0;
    case Kind::HalfPlane:
      return 1.0;
    case Kind::Product: {
      const double a = factors_[0].known_drift(), b = factors_[1].known_drift();
      return std::sqrt(a * a + b * b);
    }
  }
  return 0.0;
}

double ModelSpace::known_lambda() const {
  switch (kind_) {
    case Kind::Euclidean:
      return 0.0;
    case Kind::HalfPlane:
      return 0.25;
    case Kind::Product:
      return factors_[0].known_lambda() + factors_[1].known_lambda();
  }
  return 0.0;
}

double ModelSpace::known_volume_entropy() const {
  switch (kind_) {
    case Kind::Euclidean:
      return 0.0;
    case Kind::HalfPlane:
      return 1.0;
    case Kind::Product: {
      const double a = factors_[0].known_volume_entropy();
      const double b = factors_[1].known_volume_entropy();
      return std::sqrt(a * a + b * b);
    }
  }
  return 0.0;
}

double ModelSpace::known_entropy() const {
  switch (kind_) {
    case Kind::Euclidean:
      return 0.0;
    case Kind::HalfPlane:
      return 1.0;
    case Kind::Product:
      return factors_[0].known_entropy() + factors_[1].known_entropy();
  }
  return 0.0;
}

double acosh_stable(double x) {
  if (x < 1.0) {
    if (x > 1.0 - 1e-12) return 0.0;  // roundoff below the branch point
    throw Error("domain_error", "acosh argument < 1");
  }
  const double e = x - 1.0;
  if (e < 1e-8) {
    // acosh(1+e) = sqrt(2e) * (1 - e/12 + 3e^2/160 - ...)
    return std::sqrt(2.0 * e) * (1.0 - e / 12.0 + 3.0 * e * e / 160.0);
  }
  if (x > 1e8) return std::log(2.0) + std::log(x);  // x^2 would overflow past 1e154
  return std::log(x + std::sqrt(x * x - 1.0));
}

namespace {

double distance_euclidean(const Point& p, const Point& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    const double d = p[i] - q[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double distance_half_plane(const Point& p, const Point& q) {
  const double dx = p[0] - q[0], dy = p[1] - q[1];
  return acosh_stable(1.0 + (dx * dx + dy * dy) / (2.0 * p[1] * q[1]));
}

}  // namespace

double distance(const ModelSpace& space, const Point& p, const Point& q) {
  space.validate(p);
  space.validate(q);
  switch (space.kind()) {
    case ModelSpace::Kind::Euclidean:
      return distance_euclidean(p, q);
    case ModelSpace::Kind::HalfPlane:
      return distance_half_plane(p, q);
    case ModelSpace::Kind::Product: {
      const auto nl = static_cast<std::size_t>(space.left().dim());
      const double dl = distance(space.left(), Point{slice(p.coords, 0, nl)},
                                 Point{slice(q.coords, 0, nl)});
      const double dr = distance(space.right(), Point{slice(p.coords, nl, p.dim() - nl)},
                                 Point{slice(q.coords, nl, q.dim() - nl)});
      return std::sqrt(dl * dl + dr * dr);
    }
  }
  return 0.0;
}

MetricTensor metric_tensor(const ModelSpace& space, const Point& p) {
  space.validate(p);
  MetricTensor m;
  m.g_diag.reserve(p.dim());
  switch (space.kind()) {
    case ModelSpace::Kind::Euclidean:
      m.g_diag.assign(p.dim(), 1.0);
      m.g_inv_diag.assign(p.dim(), 1.0);
      m.sqrt_det = 1.0;
      return m;
    case ModelSpace::Kind::HalfPlane: {
      const double y = p[1];
      m.g_diag = {1.0 / (y * y), 1.0 / (y * y)};
      m.g_inv_diag = {y * y, y * y};
      m.sqrt_det = 1.0 / (y * y);
      return m;
    }
    case ModelSpace::Kind::Product: {
      const auto nl = static_cast<std::size_t>(space.left().dim());
      MetricTensor a = metric_tensor(space.left(), Point{slice(p.coords, 0, nl)});
      MetricTensor b =
          metric_tensor(space.right(), Point{slice(p.coords, nl, p.dim() - nl)});
      m = std::move(a);
      append(m.g_diag, b.g_diag);
      append(m.g_inv_diag, b.g_inv_diag);
      m.sqrt_det *= b.sqrt_det;
      return m;
    }
  }
  return m;
}

Vec chart_scale(const ModelSpace& space, const Point& p) {
  switch (space.kind()) {
    case ModelSpace::Kind::Euclidean:
      return Vec(p.dim(), 1.0);
    case ModelSpace::Kind::HalfPlane:
      return {p[1], p[1]};
    case ModelSpace::Kind::Product: {
      const auto nl = static_cast<std::size_t>(space.left().dim());
      Vec s = chart_scale(space.left(), Point{slice(p.coords, 0, nl)});
      append(s, chart_scale(space.right(), Point{slice(p.coords, nl, p.dim() - nl)}));
      return s;
    }
  }
  return {};
}

double tangent_norm(const ModelSpace& space, const Point& p, const Vec& v) {
  const MetricTensor m = metric_tensor(space, p);
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += m.g_diag[i] * v[i] * v[i];
  return std::sqrt(s);
}

double inner(const ModelSpace& space, const Point& p, const Vec& a, const Vec& b) {
  const MetricTensor m = metric_tensor(space, p);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += m.g_diag[i] * a[i] * b[i];
  return s;
}

namespace {

// Unit-speed geodesic on the half-plane. Vertical lines are t -> (x, y e^t);
// everything else is a semicircle centered on the axis, parametrized by
// (c + rho tanh s, rho sech s), which has unit hyperbolic speed.
Point half_plane_ray(const Point& p, const Vec& v, double t) {
  const double px = p[0], py = p[1];
  const double vx = v[0], vy = v[1];
  if (std::abs(vx) <= 1e-14 * std::hypot(vx, vy)) {
    return Point{{px, py * std::exp(vy > 0 ? t : -t)}};
  }
  const double c = px + py * vy / vx;
  const double rho = std::hypot(px - c, py);
  const double s0 = std::asinh((px - c) / py);  // tanh s0 = (px-c)/rho
  const double s = s0 + (vx > 0 ? t : -t);
  // sech/tanh via exp to stay stable for |s| up to ~700
  const double ch = std::cosh(s);
  return Point{{c + rho * std::tanh(s), rho / ch}};
}

}  // namespace

Point geodesic_ray(const ModelSpace& space, const Point& p, const Vec& direction,
                   double t) {
  space.validate(p);
  if (direction.size() != p.dim())
    throw Error("contract_error", "direction dimension mismatch");
  const double norm = tangent_norm(space, p, direction);
  if (std::abs(norm - 1.0) > 1e-9)
    throw Error("contract_error",
                "geodesic_ray direction must be unit length (got " + std::to_string(norm) + ")");
  if (t == 0.0) return p;
  switch (space.kind()) {
    case ModelSpace::Kind::Euclidean: {
      Point q = p;
      for (std::size_t i = 0; i < q.dim(); ++i) q.coords[i] += t * direction[i];
      return q;
    }
    case ModelSpace::Kind::HalfPlane:
      return half_plane_ray(p, direction, t);
    case ModelSpace::Kind::Product: {
      const auto nl = static_cast<std::size_t>(space.left().dim());
      const Point pl{slice(p.coords, 0, nl)};
      const Point pr{slice(p.coords, nl, p.dim() - nl)};
      Vec vl = slice(direction, 0, nl);
      Vec vr = slice(direction, nl, p.dim() - nl);
      const double sl = tangent_norm(space.left(), pl, vl);
      const double sr = tangent_norm(space.right(), pr, vr);
      Point ql = pl, qr = pr;
      if (sl > 0) {
        for (auto& c : vl) c /= sl;
        ql = geodesic_ray(space.left(), pl, vl, sl * t);
      }
      if (sr > 0) {
        for (auto& c : vr) c /= sr;
        qr = geodesic_ray(space.right(), pr, vr, sr * t);
      }
      Point q = ql;
      append(q.coords, qr.coords);
      return q;
    }
  }
  return p;
}

double euclidean_ball_volume(int n, double R) {
  const double omega = std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
  return omega * std::pow(R, n);
}

namespace {

std::vector<Point> sample_euclidean_ball(int n, double R, std::size_t count, Rng& rng) {
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vec g(static_cast<std::size_t>(n));
    double norm2 = 0.0;
    for (auto& c : g) {
      c = rng.normal();
      norm2 += c * c;
    }
    const double norm = std::sqrt(norm2);
    const double r = R * std::pow(rng.uniform(), 1.0 / n);
    for (auto& c : g) c *= (norm > 0 ? r / norm : 0.0);
    out.push_back(Point{std::move(g)});
  }
  return out;
}

// Radial density on H2 is proportional to sinh r; invert the CDF.
std::vector<Point> sample_half_plane_ball(const ModelSpace& space, double R,
                                          std::size_t count, Rng& rng) {
  std::vector<Point> out;
  out.reserve(count);
  const Point x0 = space.basepoint();
  const double z = std::cosh(R) - 1.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double r = acosh_stable(1.0 + rng.uniform() * z);
    const double phi = 2.0 * kPi * rng.uniform();
    // unit tangent at (0,1): euclidean components on the unit circle
    out.push_back(geodesic_ray(space, x0, {std::sin(phi), std::cos(phi)}, r));
  }
  return out;
}

}  // namespace

std::vector<Point> sample_uniform_ball(const ModelSpace& space, double R,
                                       std::size_t count, RngSeed seed) {
  if (count == 0) return {};
  if (R <= 0) throw Error("domain_error", "ball radius must be positive");
  Rng rng(seed);
  switch (space.kind()) {
    case ModelSpace::Kind::Euclidean:
      return sample_euclidean_ball(space.dim(), R, count, rng);
    case ModelSpace::Kind::HalfPlane:
      return sample_half_plane_ball(space, R, count, rng);
    case ModelSpace::Kind::Product: {
      // rejection from the product of factor balls
      std::vector<Point> out;
      out.reserve(count);
      const Point x0 = space.basepoint();
      std::uint64_t sub = 0;
      std::size_t guard = 0;
      while (out.size() < count) {
        RngSeed s{derive_seed(seed.master, 0xba11u), seed.stream * 1000003u + sub++};
        const std::size_t batch = count;
        auto ls = sample_uniform_ball(space.left(), R, batch, s);
        RngSeed s2{derive_seed(seed.master, 0xba12u), seed.stream * 1000003u + sub++};
        auto rs = sample_uniform_ball(space.right(), R, batch, s2);
        for (std::size_t i = 0; i < batch && out.size() < count; ++i) {
          Point p = ls[i];
          append(p.coords, rs[i].coords);
          if (distance(space, x0, p) <= R) out.push_back(std::move(p));
        }
        if (++guard > 10000)
          throw Error("numerical_error", "ball rejection sampling stalled");
      }
      return out;
    }
  }
  return {};
}

VolumeEstimate ball_volume(const ModelSpace& space, double R, std::uint64_t mc_samples,
                           RngSeed seed) {
  if (R < 0) throw Error("domain_error", "ball radius must be nonnegative");
  switch (space.kind()) {
    case ModelSpace::Kind::Euclidean:
      return {euclidean_ball_volume(space.dim(), R), 0.0, 0, true};
    case ModelSpace::Kind::HalfPlane:
      return {2.0 * kPi * (std::cosh(R) - 1.0), 0.0, 0, true};
    case ModelSpace::Kind::Product: {
      if (R == 0.0) return {0.0, 0.0, 0, true};
      // acceptance rate of the product-ball inside the factor-ball box
      const double vl = ball_volume(space.left(), R).value;
      const double vr = ball_volume(space.right(), R).value;
      const Point x0 = space.basepoint();
      std::uint64_t hits = 0;
      RngSeed sl{derive_seed(seed.master, 0x101u), seed.stream};
      RngSeed sr{derive_seed(seed.master, 0x102u), seed.stream};
      auto lpts = sample_uniform_ball(space.left(), R, mc_samples, sl);
      auto rpts = sample_uniform_ball(space.right(), R, mc_samples, sr);
      for (std::uint64_t i = 0; i < mc_samples; ++i) {
        Point p = lpts[i];
        append(p.coords, rpts[i].coords);
        if (distance(space, x0, p) <= R) ++hits;
      }
      const double phat = static_cast<double>(hits) / static_cast<double>(mc_samples);
      const double se =
          std::sqrt(phat * (1.0 - phat) / static_cast<double>(mc_samples));
      return {vl * vr * phat, vl * vr * se, mc_samples, false};
    }
  }
  return {};
}

double sphere_area(const ModelSpace& space, double r) {
  if (r < 0) throw Error("domain_error", "sphere radius must be nonnegative");
  switch (space.kind()) {
    case ModelSpace::Kind::Euclidean: {
      const int n = space.dim();
      const double omega = std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
      return n * omega * std::pow(r, n - 1);
    }
    case ModelSpace::Kind::HalfPlane:
      return 2.0 * kPi * std::sinh(r);
    case ModelSpace::Kind::Product: {
      // A(R) = R * int_0^{pi/2} A1(R cos a) A2(R sin a) da
      const auto& l = space.left();
      const auto& rr = space.right();
      if (r == 0.0) return 0.0;
      return r * integrate_adaptive(
                     [&](double a) {
                       return sphere_area(l, r * std::cos(a)) *
                              sphere_area(rr, r * std::sin(a));
                     },
                     0.0, 0.5 * kPi, 1e-10);
    }
  }
  return 0.0;
}

}  // namespace horodrift::geometry
