#ifndef HORODRIFT_QUADRATURE_HPP
#define HORODRIFT_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "horodrift/error.hpp"

namespace horodrift {

// 15-point Kronrod / 7-point Gauss pair on [-1, 1].
namespace gk15_detail {
inline constexpr double xk[8] = {
    0.0,
    0.2077849550078984676006894037732449,
    0.4058451513773971669066064120769615,
    0.5860872354676911302941448382587296,
    0.7415311855993944398638647732807884,
    0.8648644233597690727897127886409262,
    0.9491079123427585245261896840478513,
    0.9914553711208126392068546975263285};
inline constexpr double wk[8] = {
    0.2094821410847278280129991748917143,
    0.2044329400752988924141619992346491,
    0.1903505780647854099132564024210137,
    0.1690047266392679028265834265985503,
    0.1406532597155259187451895905102379,
    0.1047900103222501838398763225415180,
    0.0630920926299785532907006631892043,
    0.0229353220105292249637320080589696};
// Gauss weights attach to the even-indexed Kronrod nodes (xk[1], xk[3], ...).
inline constexpr double wg[4] = {
    0.4179591836734693877551020408163265,
    0.3818300505051189449503697754889751,
    0.2797053914892766679014677714237796,
    0.1294849661688696932706114326790820};
}  // namespace gk15_detail

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // |K15 - G7| based estimate
};

template <typename F>
QuadResult gk15(F&& f, double a, double b) {
  using namespace gk15_detail;
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = wk[0] * fc;
  double gauss = wg[0] * fc;
  for (int j = 1; j < 8; ++j) {
    const double lo = f(c - h * xk[j]);
    const double hi = f(c + h * xk[j]);
    kron += wk[j] * (lo + hi);
    if (j % 2 == 0) gauss += wg[j / 2] * (lo + hi);
  }
  kron *= h;
  gauss *= h;
  return {kron, std::abs(kron - gauss)};
}

// Adaptive bisection over an initial partition; refines the worst interval
// until the summed error estimate meets rel_tol (or abs_tol as a floor).
template <typename F>
double integrate_adaptive(F&& f, const std::vector<double>& breakpoints,
                          double rel_tol = 1e-8, double abs_tol = 0.0,
                          std::size_t max_intervals = 4000) {
  struct Interval {
    double a, b, value, error;
  };
  std::vector<Interval> ivs;
  ivs.reserve(breakpoints.size() + 64);
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    auto r = gk15(f, breakpoints[i], breakpoints[i + 1]);
    ivs.push_back({breakpoints[i], breakpoints[i + 1], r.value, r.error});
  }
  for (;;) {
    double total = 0.0, err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < ivs.size(); ++i) {
      total += ivs[i].value;
      err += ivs[i].error;
      if (ivs[i].error > ivs[worst].error) worst = i;
    }
    if (err <= std::max(abs_tol, rel_tol * std::abs(total))) return total;
    if (ivs.size() >= max_intervals || ivs[worst].error == 0.0)
      throw Error("numerical_error",
                  "adaptive quadrature did not converge: error=" + std::to_string(err) +
                      " value=" + std::to_string(total) +
                      " intervals=" + std::to_string(ivs.size()));
    Interval w = ivs[worst];
    const double m = 0.5 * (w.a + w.b);
    auto r1 = gk15(f, w.a, m);
    auto r2 = gk15(f, m, w.b);
    ivs[worst] = {w.a, m, r1.value, r1.error};
    ivs.push_back({m, w.b, r2.value, r2.error});
  }
}

template <typename F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-8,
                          double abs_tol = 0.0, std::size_t max_intervals = 4000) {
  return integrate_adaptive(std::forward<F>(f), std::vector<double>{a, b}, rel_tol,
                            abs_tol, max_intervals);
}

// Geometric breakpoints a, a+h0, a+4*h0, ... capped at b; suits integrands
// whose support spans many scales.
inline std::vector<double> geometric_breakpoints(double a, double b, double h0 = 1e-3,
                                                 double factor = 4.0) {
  std::vector<double> pts{a};
  double step = h0;
  while (a + step < b) {
    pts.push_back(a + step);
    step *= factor;
  }
  pts.push_back(b);
  return pts;
}

}  // namespace horodrift

#endif
