#include "horodrift/brownian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "horodrift/error.hpp"
#include "horodrift/parallel.hpp"
#include "horodrift/quadrature.hpp"

namespace horodrift::brownian {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kCheckpointLevels = 12;
constexpr double kMaxEulerStep = 0.1;

using geometry::Vec;

Vec slice(const Vec& v, std::size_t begin, std::size_t len) {
  return Vec(v.begin() + static_cast<std::ptrdiff_t>(begin),
             v.begin() + static_cast<std::ptrdiff_t>(begin + len));
}

}  // namespace

std::vector<double> checkpoint_times(double T) {
  std::vector<double> ts{0.0};
  for (int k = kCheckpointLevels; k >= 1; --k) ts.push_back(T * std::ldexp(1.0, -k));
  ts.push_back(T);
  return ts;
}

namespace {

// advance the chart state by delta; one Euler (half-plane) or exact
// (Euclidean) step, coordinates in place
void step_euclidean(Vec& x, double delta, Rng& rng) {
  const double s = std::sqrt(2.0 * delta);
  for (auto& c : x) c += s * rng.normal();
}

void step_half_plane(Vec& zx, double delta, Rng& rng) {
  // dX = sqrt(2) Y dB1, dY = sqrt(2) Y dB2; Y solved exactly per step,
  // X gets the trapezoidal quadratic variation
  const double zx_noise = rng.normal();
  const double zy_noise = rng.normal();
  const double y0 = zx[1];
  const double y1 = y0 * std::exp(std::sqrt(2.0 * delta) * zy_noise - delta);
  zx[0] += zx_noise * std::sqrt(delta * (y0 * y0 + y1 * y1));
  zx[1] = y1;
}

struct FactorSim {
  ModelSpace space;
  std::size_t offset;
  std::size_t dim;
  Rng rng;
};

}  // namespace

Path sample_path(const ModelSpace& space, const Point& start, double T, Scheme scheme,
                 double dt, RngSeed seed) {
  space.validate(start);
  if (T <= 0.0) throw Error("domain_error", "path horizon T must be positive");
  if (scheme == Scheme::Exact && !space.is_flat())
    throw Error("unsupported", "exact scheme is only available on flat spaces");
  if (scheme == Scheme::Euler) {
    if (dt <= 0.0 || dt > T) throw Error("contract_error", "euler scheme needs 0 < dt <= T");
    if (dt > kMaxEulerStep)
      throw Error("contract_error", "euler step refused: dt > 0.1 breaks the weak-error budget");
  }

  // independent per-factor generators so product factors are independent
  std::vector<FactorSim> sims;
  if (space.is_product()) {
    sims.push_back({space.left(), 0, static_cast<std::size_t>(space.left().dim()),
                    Rng(RngSeed{derive_seed(seed.master, 0xFAC0), seed.stream})});
    sims.push_back({space.right(), sims[0].dim,
                    static_cast<std::size_t>(space.right().dim()),
                    Rng(RngSeed{derive_seed(seed.master, 0xFAC1), seed.stream})});
  } else {
    sims.push_back({space, 0, start.dim(), Rng(seed)});
  }

  Path path;
  path.space = space;
  path.start = start;
  path.scheme = scheme;
  path.dt = scheme == Scheme::Euler ? dt : 0.0;
  path.seed = seed;

  Vec state = start.coords;
  const auto times = checkpoint_times(T);
  path.checkpoints.reserve(times.size());
  path.checkpoints.emplace_back(0.0, start);

  double t_cur = 0.0;
  for (std::size_t ci = 1; ci < times.size(); ++ci) {
    const double target = times[ci];
    while (t_cur < target) {
      const double remaining = target - t_cur;
      const double delta =
          scheme == Scheme::Exact ? remaining : std::min(dt, remaining);
      for (auto& sim : sims) {
        Vec local = slice(state, sim.offset, sim.dim);
        if (sim.space.kind() == ModelSpace::Kind::HalfPlane)
          step_half_plane(local, delta, sim.rng);
        else
          step_euclidean(local, delta, sim.rng);
        std::copy(local.begin(), local.end(),
                  state.begin() + static_cast<std::ptrdiff_t>(sim.offset));
      }
      t_cur += delta;
      if (remaining - delta < 1e-15 * T) t_cur = target;
    }
    path.checkpoints.emplace_back(target, Point{state});
  }
  return path;
}

std::vector<Path> sample_paths(const ModelSpace& space, const Point& start, double T,
                               Scheme scheme, double dt, std::uint64_t master_seed,
                               std::size_t n, int threads) {
  std::vector<Path> out(n);
  const int nt = resolve_threads(threads);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    out[static_cast<std::size_t>(i)] =
        sample_path(space, start, T, scheme, dt,
                    RngSeed{master_seed, static_cast<std::uint64_t>(i)});
  }
  return out;
}

std::vector<Path> sample_paths_serial(const ModelSpace& space, const Point& start,
                                      double T, Scheme scheme, double dt,
                                      std::uint64_t master_seed, std::size_t n) {
  std::vector<Path> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(sample_path(space, start, T, scheme, dt, RngSeed{master_seed, i}));
  return out;
}

// ---------------------------------------------------------------------------
// heat kernels
// ---------------------------------------------------------------------------

namespace {

// ln p for the half-plane kernel of du/dt = Lap u:
//   p(t,r) = sqrt(2) (4 pi t)^{-3/2} e^{-t/4} int_r^inf s e^{-s^2/4t}
//            (cosh s - cosh r)^{-1/2} ds,
// computed as 2 int_0^umax s(u) e^{-s(u)^2/4t} / sinh s(u) du with
// u = sqrt(cosh s - cosh r), rescaled by e^K against underflow.
double log_heat_kernel_h2(double t, double r) {
  if (t <= 0.0) throw Error("domain_error", "heat kernel needs t > 0");
  if (r < 0.0) throw Error("domain_error", "negative distance");
  if (r > 650.0)
    throw Error("numerical_error", "half-plane kernel distance out of supported range");
  const double K = r * r / (4.0 * t) + std::max(0.0, r - 5.0);
  const double cosh_r = std::cosh(r);
  auto integrand = [&](double u) {
    const double s = geometry::acosh_stable(cosh_r + u * u);
    if (s < 1e-12) return 2.0 * std::exp(K);
    return 2.0 * s * std::exp(-s * s / (4.0 * t) + K) / std::sinh(s);
  };
  const double smax = std::min(r + 40.0 + 20.0 * std::sqrt(t), 700.0);
  const double umax = std::sqrt(std::cosh(smax) - cosh_r);
  const auto brks = geometric_breakpoints(0.0, umax, 1e-3, 4.0);
  const double I = integrate_adaptive(integrand, brks, 1e-8, 0.0, 6000);
  if (!(I > 0.0)) throw Error("numerical_error", "half-plane kernel quadrature collapsed");
  return std::log(I) - K + 0.5 * std::log(2.0) - 1.5 * std::log(4.0 * kPi * t) -
         t / 4.0;
}

}  // namespace

double log_heat_kernel_radial(const ModelSpace& space, double t, double d) {
  if (t <= 0.0) throw Error("domain_error", "heat kernel needs t > 0");
  switch (space.kind()) {
    case ModelSpace::Kind::Euclidean:
      return -0.5 * space.dim() * std::log(4.0 * kPi * t) - d * d / (4.0 * t);
    case ModelSpace::Kind::HalfPlane:
      return log_heat_kernel_h2(t, d);
    case ModelSpace::Kind::Product:
      throw Error("contract_error",
                  "product kernels are not radial; use log_heat_kernel(points)");
  }
  return 0.0;
}

double log_heat_kernel(const ModelSpace& space, double t, const Point& p,
                       const Point& q) {
  if (space.is_product()) {
    const auto nl = static_cast<std::size_t>(space.left().dim());
    const Point pl{slice(p.coords, 0, nl)}, ql{slice(q.coords, 0, nl)};
    const Point pr{slice(p.coords, nl, p.dim() - nl)},
        qr{slice(q.coords, nl, q.dim() - nl)};
    return log_heat_kernel(space.left(), t, pl, ql) +
           log_heat_kernel(space.right(), t, pr, qr);
  }
  return log_heat_kernel_radial(space, t, geometry::distance(space, p, q));
}

double heat_kernel(const ModelSpace& space, double t, const Point& p, const Point& q) {
  return std::exp(log_heat_kernel(space, t, p, q));
}

// ---------------------------------------------------------------------------
// semigroup check
// ---------------------------------------------------------------------------

SemigroupResult semigroup_check(const ModelSpace& space, double s, double t,
                                const Point& p, const Point& q, std::uint64_t n_mc,
                                RngSeed seed, double kernel_scale) {
  if (s <= 0.0 || t <= 0.0) throw Error("domain_error", "semigroup check needs s,t > 0");
  space.validate(p);
  space.validate(q);
  SemigroupResult res;
  res.rhs = kernel_scale * heat_kernel(space, s + t, p, q);
  switch (space.kind()) {
    case ModelSpace::Kind::Euclidean: {
      // Gaussian convolution in closed form; both kernel factors carry the hook
      const double d = geometry::distance(space, p, q);
      res.lhs = kernel_scale * kernel_scale *
                std::exp(log_heat_kernel_radial(space, s + t, d));
      res.method = "closed-form-convolution";
      return res;
    }
    case ModelSpace::Kind::HalfPlane: {
      // polar proposal around p: r folded-normal about s, angle uniform;
      // weight = p(s,r) p(t, d(y,q)) (2 pi sinh r) / q_r(r)
      const double D = geometry::distance(space, p, q);
      const double sigma = 1.5 * std::sqrt(2.0 * s) + 0.5 + 0.25 * D;
      const double mu = s;
      auto lpdf_folded = [&](double r) {
        const double a = (r - mu) / sigma, b = (r + mu) / sigma;
        return std::log((std::exp(-0.5 * a * a) + std::exp(-0.5 * b * b)) /
                        (sigma * std::sqrt(2.0 * kPi)));
      };
      Rng rng(seed);
      std::vector<double> w(n_mc);
      for (std::uint64_t i = 0; i < n_mc; ++i) {
        double r = mu + sigma * rng.normal();
        r = std::abs(r);
        if (r < 1e-12) r = 1e-12;
        const double phi = 2.0 * kPi * rng.uniform();
        const Point y =
            geometry::geodesic_ray(space, p, {p[1] * std::sin(phi), p[1] * std::cos(phi)}, r);
        const double dyq = geometry::distance(space, y, q);
        const double logw = log_heat_kernel_radial(space, s, r) +
                            log_heat_kernel_radial(space, t, dyq) +
                            std::log(2.0 * kPi * std::sinh(r)) - lpdf_folded(r);
        w[i] = std::exp(logw);
      }
      auto ms = mean_stderr(w);
      res.lhs = kernel_scale * kernel_scale * ms.mean;
      res.lhs_stderr = kernel_scale * kernel_scale * ms.stderr_;
      res.n = n_mc;
      res.method = "importance-mc";
      return res;
    }
    case ModelSpace::Kind::Product: {
      const auto nl = static_cast<std::size_t>(space.left().dim());
      const Point pl{slice(p.coords, 0, nl)}, ql{slice(q.coords, 0, nl)};
      const Point pr{slice(p.coords, nl, p.dim() - nl)},
          qr{slice(q.coords, nl, q.dim() - nl)};
      auto a = semigroup_check(space.left(), s, t, pl, ql, n_mc,
                               RngSeed{derive_seed(seed.master, 0x51), seed.stream},
                               kernel_scale);
      auto b = semigroup_check(space.right(), s, t, pr, qr, n_mc,
                               RngSeed{derive_seed(seed.master, 0x52), seed.stream},
                               kernel_scale);
      res.lhs = a.lhs * b.lhs / (kernel_scale * kernel_scale);  // scale enters once per factor pair
      const double rel = std::hypot(a.lhs_stderr / std::max(a.lhs, 1e-300),
                                    b.lhs_stderr / std::max(b.lhs, 1e-300));
      res.lhs_stderr = std::abs(res.lhs) * rel;
      res.n = std::max(a.n, b.n);
      res.method = "factorwise(" + a.method + "," + b.method + ")";
      return res;
    }
  }
  return res;
}

GaussianBoundReport gaussian_bound_check(const ModelSpace& space, double t,
                                         std::span<const double> distances) {
  GaussianBoundReport rep;
  rep.t = t;
  rep.n = distances.size();
  if (distances.empty()) {
    rep.holds = true;
    rep.C = 1.0;
    rep.margin = std::numeric_limits<double>::infinity();
    return rep;
  }
  std::vector<double> logp(distances.size());
  for (std::size_t i = 0; i < distances.size(); ++i)
    logp[i] = log_heat_kernel_radial(space, t, distances[i]);
  auto margin_for = [&](double C) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < distances.size(); ++i) {
      const double d = distances[i];
      m = std::min(m, std::log(C) - (d / C) * (d / C) - logp[i]);
    }
    return m;
  };
  double lo = 0.25, hi = 0.25;
  for (int k = 0; k < 40; ++k) {
    if (margin_for(hi) >= 0.0) break;
    lo = hi;
    hi *= 2.0;
  }
  if (margin_for(hi) < 0.0) {
    rep.holds = false;
    rep.C = hi;
    rep.margin = margin_for(hi);
    return rep;
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (margin_for(mid) >= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  rep.C = hi;
  rep.margin = margin_for(hi);
  rep.holds = rep.margin >= 0.0;
  return rep;
}

}  // namespace horodrift::brownian
