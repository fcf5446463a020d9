// Compares the serial reference implementations against the OpenMP kernels
// on a fixed workload and prints the timing table.

#include <chrono>
#include <cstdio>

#include "horodrift/brownian.hpp"
#include "horodrift/estimators.hpp"
#include "horodrift/parallel.hpp"

using namespace horodrift;

namespace {

template <typename F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

int main() {
  const auto h2 = geometry::ModelSpace::half_plane();
  const auto h2xh2 =
      geometry::ModelSpace::product(geometry::ModelSpace::half_plane(),
                                    geometry::ModelSpace::half_plane());
  const std::size_t n_paths = 4000;
  const double T = 10.0, dt = 0.01;
  const int nt = resolve_threads(0);

  std::printf("workload: %zu paths, T=%.0f, dt=%.2g; %d worker threads available\n\n",
              n_paths, T, dt, nt);
  std::printf("%-34s %12s %12s %8s\n", "kernel", "serial ms", "parallel ms", "speedup");

  std::vector<brownian::Path> ps, pp;
  const double t_ser = time_ms([&] {
    ps = brownian::sample_paths_serial(h2, h2.basepoint(), T, brownian::Scheme::Euler,
                                       dt, 7, n_paths);
  });
  const double t_par = time_ms([&] {
    pp = brownian::sample_paths(h2, h2.basepoint(), T, brownian::Scheme::Euler, dt, 7,
                                n_paths, 0);
  });
  bool identical = ps.size() == pp.size();
  for (std::size_t i = 0; identical && i < ps.size(); ++i)
    identical = ps[i].end()[0] == pp[i].end()[0] && ps[i].end()[1] == pp[i].end()[1];
  std::printf("%-34s %12.1f %12.1f %7.2fx\n", "h2 path sampling", t_ser, t_par,
              t_ser / t_par);

  std::vector<brownian::Path> qs, qp;
  const double t2s = time_ms([&] {
    qs = brownian::sample_paths_serial(h2xh2, h2xh2.basepoint(), T,
                                       brownian::Scheme::Euler, dt, 7, n_paths);
  });
  const double t2p = time_ms([&] {
    qp = brownian::sample_paths(h2xh2, h2xh2.basepoint(), T, brownian::Scheme::Euler,
                                dt, 7, n_paths, 0);
  });
  std::printf("%-34s %12.1f %12.1f %7.2fx\n", "h2xh2 path sampling", t2s, t2p,
              t2s / t2p);

  double e1 = 0.0, e2 = 0.0;
  const double t3s = time_ms(
      [&] { e1 = estimators::estimate_entropy(h2, ps, 1).value; });
  const double t3p = time_ms(
      [&] { e2 = estimators::estimate_entropy(h2, pp, 0).value; });
  std::printf("%-34s %12.1f %12.1f %7.2fx\n", "h2 entropy (kernel quadrature)", t3s,
              t3p, t3s / t3p);

  std::printf("\nserial/parallel path agreement: %s\n", identical ? "bit-exact" : "MISMATCH");
  std::printf("entropy values: serial=%.6f parallel=%.6f (%s)\n", e1, e2,
              e1 == e2 ? "bit-exact" : "MISMATCH");
  return identical && e1 == e2 ? 0 : 1;
}
