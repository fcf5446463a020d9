// Acceptance suite: one runnable criterion per invocation (--criterion N),
// printing one PASS/FAIL line per sub-check and a final verdict line.
//
// Criteria 1-3 encode finite-horizon windows that the exact values of the
// pinned estimators provably exceed (see README, "Acceptance status"): they
// are asserted exactly as stated and allowed to fail, with clearly labelled
// supplements at longer horizons demonstrating the limits at the stated
// tolerances. Nothing here is loosened to force green.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "horodrift/brownian.hpp"
#include "horodrift/error.hpp"
#include "horodrift/estimators.hpp"
#include "horodrift/geometry.hpp"
#include "horodrift/group_walks.hpp"
#include "horodrift/harness.hpp"
#include "horodrift/horofield.hpp"
#include "horodrift/parallel.hpp"
#include "oracles.hpp"

using namespace horodrift;
using brownian::Scheme;
using geometry::ModelSpace;
using geometry::Point;

namespace {

int g_checks = 0, g_failures = 0;

bool record(const std::string& name, bool pass, const std::string& info = "") {
  ++g_checks;
  if (!pass) ++g_failures;
  std::printf("  [%s] %s%s%s\n", pass ? "PASS" : "FAIL", name.c_str(),
              info.empty() ? "" : " :: ", info.c_str());
  return pass;
}

void note(const std::string& text) { std::printf("  note: %s\n", text.c_str()); }

std::string win(double value, double lo, double hi) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "value=%.6f window=[%.6f, %.6f]", value, lo, hi);
  return buf;
}

std::vector<brownian::Path> simulate(const ModelSpace& space, double T, std::size_t n,
                                     std::uint64_t seed, double dt = 0.01) {
  const auto scheme = space.is_flat() ? Scheme::Exact : Scheme::Euler;
  return brownian::sample_paths(space, space.basepoint(), T, scheme, dt, seed, n);
}

const ModelSpace r2 = ModelSpace::euclidean(2);
const ModelSpace h2 = ModelSpace::half_plane();
const ModelSpace h2xh2 =
    ModelSpace::product(ModelSpace::half_plane(), ModelSpace::half_plane());
const ModelSpace r1xh2 =
    ModelSpace::product(ModelSpace::euclidean(1), ModelSpace::half_plane());

// ---------------------------------------------------------------------------

void criterion1() {
  std::printf("criterion 1: h2xh2 equality case (T=50, 10^4 paths)\n");
  const auto t0 = std::chrono::steady_clock::now();
  auto paths = simulate(h2xh2, 50.0, 10000, 7);
  auto d = estimators::estimate_drift(h2xh2, paths);
  auto h = estimators::estimate_entropy(h2xh2, paths);

  const double sq2 = std::sqrt(2.0);
  const double dw = std::max(3.0 * d.est.stderr_, 0.05);
  record("drift in [sqrt2 +/- max(3se, 0.05)]", std::abs(d.est.value - sq2) <= dw,
         win(d.est.value, sq2 - dw, sq2 + dw));
  const double hw = std::max(3.0 * h.stderr_, 0.1);
  record("entropy in [2 +/- max(3se, 0.1)]", std::abs(h.value - 2.0) <= hw,
         win(h.value, 2.0 - hw, 2.0 + hw));

  estimators::InvariantSet inv;
  inv.ell = d.est;
  inv.h = h;
  inv.v = estimators::estimate_volume_entropy(h2xh2, harness::default_R_grid(h2xh2),
                                              400000, 7001);
  inv.lambda = {h2xh2.known_lambda(), 0.0, 0, 0.0, "closed-form", true};
  const auto verdicts =
      harness::inequality_verdicts(h2xh2, inv, 50.0, harness::default_R_grid(h2xh2));
  record("ell^2<=h verdict is equality-within-tolerance",
         verdicts[0].verdict == "equality-within-tolerance", verdicts[0].verdict);

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  record("runtime <= 5 min", secs <= 300.0, std::to_string(secs) + " s");

  note("exact finite-horizon values at T=50 are E[d]/T = 1.46677 and E[-ln p]/T = "
       "2.24943 (kernel quadrature); the stated windows cannot contain them.");
  std::printf("  supplement (not part of the verdict): same estimators at T=400\n");
  auto paths4 = simulate(h2xh2, 400.0, 10000, 7);
  auto d4 = estimators::estimate_drift(h2xh2, paths4);
  auto h4 = estimators::estimate_entropy(h2xh2, paths4);
  const double dw4 = std::max(3.0 * d4.est.stderr_, 0.05);
  const double hw4 = std::max(3.0 * h4.stderr_, 0.1);
  std::printf("    [%s] supplement drift T=400 :: %s\n",
              std::abs(d4.est.value - sq2) <= dw4 ? "PASS" : "FAIL",
              win(d4.est.value, sq2 - dw4, sq2 + dw4).c_str());
  std::printf("    [%s] supplement entropy T=400 :: %s\n",
              std::abs(h4.value - 2.0) <= hw4 ? "PASS" : "FAIL",
              win(h4.value, 2.0 - hw4, 2.0 + hw4).c_str());
}

void criterion2() {
  std::printf("criterion 2: h2 symmetric-space chain (T=50, 10^4 paths)\n");
  const auto t0 = std::chrono::steady_clock::now();
  auto paths = simulate(h2, 50.0, 10000, 7);
  auto d = estimators::estimate_drift(h2, paths);
  auto h = estimators::estimate_entropy(h2, paths);
  const auto R_grid = harness::default_R_grid(h2);
  auto v = estimators::estimate_volume_entropy(h2, R_grid);
  auto lam = estimators::estimate_lambda(h2, 40.0, harness::default_s_grid(h2));

  const double dw = std::max(3.0 * d.est.stderr_, 0.05);
  record("drift = 1 within declared slack", std::abs(d.est.value - 1.0) <= dw,
         win(d.est.value, 1.0 - dw, 1.0 + dw));
  const double hw = std::max(3.0 * h.stderr_, 0.05);
  record("entropy = 1 within declared slack", std::abs(h.value - 1.0) <= hw,
         win(h.value, 1.0 - hw, 1.0 + hw));
  record("volume entropy = 1 within 0.02", std::abs(v.value - 1.0) <= 0.02,
         win(v.value, 0.98, 1.02));
  const double slope = estimators::volume_entropy_slope(h2, R_grid);
  record("ln-volume slope to R=20 matches", std::abs(slope - 1.0) <= 0.02,
         win(slope, 0.98, 1.02));
  record("4*lambda = 1 (exact closed form)", 4.0 * lam.exact == 1.0);
  record("rayleigh upper bound brackets lambda",
         lam.upper.value >= 0.25 && lam.upper.value <= 0.26,
         win(lam.upper.value, 0.25, 0.26));

  estimators::InvariantSet inv;
  inv.ell = d.est;
  inv.h = h;
  inv.v = v;
  inv.lambda = {lam.exact, 0.0, 0, 0.0, "closed-form", true};
  const auto verdicts = harness::inequality_verdicts(h2, inv, 50.0, R_grid);
  bool all_eq = true;
  std::string detail;
  for (const auto& vd : verdicts) {
    all_eq = all_eq && vd.verdict == "equality-within-tolerance";
    detail += vd.name + "=" + (vd.verdict == "equality-within-tolerance" ? "eq" : vd.verdict) + " ";
  }
  record("all six verdicts equality-within-tolerance", all_eq, detail);

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  record("runtime <= 5 min", secs <= 300.0, std::to_string(secs) + " s");

  note("exact finite-horizon entropy at T=50 is 1.12472 (kernel quadrature); the "
       "0.05 slack declared for T=50 cannot contain it.");
  std::printf("  supplement (not part of the verdict): T=400\n");
  auto paths4 = simulate(h2, 400.0, 10000, 7);
  auto d4 = estimators::estimate_drift(h2, paths4);
  auto h4 = estimators::estimate_entropy(h2, paths4);
  std::printf("    [%s] supplement drift T=400 :: %s\n",
              std::abs(d4.est.value - 1.0) <= 0.05 ? "PASS" : "FAIL",
              win(d4.est.value, 0.95, 1.05).c_str());
  std::printf("    [%s] supplement entropy T=400 :: %s\n",
              std::abs(h4.value - 1.0) <= 0.05 ? "PASS" : "FAIL",
              win(h4.value, 0.95, 1.05).c_str());
}

void criterion3() {
  std::printf("criterion 3: flat/Liouville case (euclidean:2, T=100)\n");
  auto paths = simulate(r2, 100.0, 10000, 7);
  auto d = estimators::estimate_drift(r2, paths);
  auto h = estimators::estimate_entropy(r2, paths);
  record("drift <= 0.05 at T=100", d.est.value <= 0.05,
         win(d.est.value, 0.0, 0.05));
  record("entropy <= 0.05 at T=100", h.value <= 0.05, win(h.value, 0.0, 0.05));
  note("exact values at T=100 are sqrt(pi/T) = 0.17725 and (ln(4 pi T)+1)/T = "
       "0.08136; both exceed 0.05 for every estimator the contract admits.");
  std::printf("  supplement (not part of the verdict): T=1300\n");
  auto paths13 = simulate(r2, 1300.0, 10000, 7);
  auto d13 = estimators::estimate_drift(r2, paths13);
  auto h13 = estimators::estimate_entropy(r2, paths13);
  std::printf("    [%s] supplement drift T=1300 :: %s\n",
              d13.est.value <= 0.05 ? "PASS" : "FAIL", win(d13.est.value, 0.0, 0.05).c_str());
  std::printf("    [%s] supplement entropy T=1300 :: %s\n",
              h13.value <= 0.05 ? "PASS" : "FAIL", win(h13.value, 0.0, 0.05).c_str());
}

void criterion4() {
  std::printf("criterion 4: eigenvalue identity sweep on h2xh2\n");
  Rng rng(RngSeed{401, 0});
  bool match = true, zero_only_at_pi4 = true;
  double worst = 0.0;
  for (double theta : {0.0, oracles::kPi / 8, oracles::kPi / 4, 3 * oracles::kPi / 8,
                       oracles::kPi / 2}) {
    const horofield::ProductBoundary pb{horofield::HalfPlanePoint{0, true},
                                        horofield::HalfPlanePoint{0, true}, theta};
    const auto k =
        horofield::minimal_harmonic(h2xh2, horofield::Horofunction::boundary(h2xh2, pb));
    const double want = 2.0 - std::sqrt(2.0) * (std::cos(theta) + std::sin(theta));
    for (int i = 0; i < 20; ++i) {
      const Point p{{2.0 * rng.uniform() - 1.0, 0.5 + 1.5 * rng.uniform(),
                     2.0 * rng.uniform() - 1.0, 0.5 + 1.5 * rng.uniform()}};
      horofield::ScalarField plain{h2xh2, k.eval, nullptr, nullptr, nullptr, std::nullopt};
      const double got = horofield::laplacian_fd(plain, p) / k.eval(p);
      worst = std::max(worst, std::abs(got - want));
      match = match && std::abs(got - want) <= 1e-4;
      if (std::abs(theta - oracles::kPi / 4) < 1e-12)
        zero_only_at_pi4 = zero_only_at_pi4 && std::abs(got) <= 1e-4;
      else
        zero_only_at_pi4 = zero_only_at_pi4 && std::abs(got) >= 0.08 - 1e-4;
    }
  }
  record("FD ratio matches 2 - sqrt2 (cos+sin) within 1e-4 at 5 angles x 20 points",
         match, "worst |err| = " + std::to_string(worst));
  record("ratio vanishes only at theta = pi/4 (floor 0.08 elsewhere)", zero_only_at_pi4);
}

void criterion5() {
  std::printf("criterion 5: harmonic-measure integrand identities\n");
  struct Case {
    ModelSpace space;
    const char* spec;
  };
  for (const auto& [space, spec] :
       {Case{h2, "q:inf"}, Case{h2xh2, "prod:q:inf,q:inf,theta=0.7853981633974483"}}) {
    const auto xi = horofield::Horofunction::parse(space, spec);
    const auto xif = horofield::horofunction_field(space, xi);
    const auto lnk = horofield::log_minimal_harmonic(space, xi);
    const double ell = space.known_drift();
    Rng rng(RngSeed{501, 0});
    bool ok_k = true, ok_l = true;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      geometry::Vec c;
      for (int dim = 0; dim < space.dim(); ++dim)
        c.push_back(dim % 2 == 1 ? 0.4 + 2.0 * rng.uniform()
                                 : 3.0 * rng.uniform() - 1.5);
      const Point p{c};
      horofield::ScalarField pk{space, lnk.eval, nullptr, nullptr, nullptr, std::nullopt};
      horofield::ScalarField px{space, xif.eval, nullptr, nullptr, nullptr, std::nullopt};
      const auto gk = horofield::gradient_fd(pk, p);
      const auto gx = horofield::gradient_fd(px, p);
      const double k2 = geometry::inner(space, p, gk, gk);
      const double lm = -geometry::inner(space, p, gx, gk);
      worst = std::max({worst, std::abs(k2 - ell * ell), std::abs(lm - ell)});
      ok_k = ok_k && std::abs(k2 - ell * ell) <= 1e-5;
      ok_l = ok_l && std::abs(lm - ell) <= 1e-5;
    }
    record(std::string("|grad ln k|^2 = ell^2 on ") + space.name() + " (100 points)",
           ok_k, "worst = " + std::to_string(worst));
    record(std::string("-<grad xi, grad ln k> = ell on ") + space.name(), ok_l);
  }
}

void criterion6() {
  std::printf("criterion 6: horospherical functional inequalities on the catalog\n");
  struct Case {
    ModelSpace space;
    double T;
  };
  for (const auto& [space, T] :
       {Case{r2, 100.0}, Case{h2, 50.0}, Case{h2xh2, 50.0}, Case{r1xh2, 50.0}}) {
    const auto spec = harness::default_horofunction(space);
    const auto xi = horofield::Horofunction::parse(space, spec);
    const auto k = horofield::minimal_harmonic(space, xi);
    auto paths = simulate(space, T, 10000, 7);
    auto r = estimators::estimate_lm_km(space, xi, k, paths);
    auto d = estimators::estimate_drift(space, paths);
    record(space.name() + ": ell(m) <= ell within CI slack",
           r.lm.value <= d.est.value + 3.0 * (r.lm.stderr_ + d.est.stderr_),
           "lm=" + std::to_string(r.lm.value) + " ell=" + std::to_string(d.est.value));
    record(space.name() + ": k(m) <= h within CI slack",
           r.km.value <= r.h.value + 3.0 * (r.km.stderr_ + r.h.stderr_),
           "km=" + std::to_string(r.km.value) + " h=" + std::to_string(r.h.value));
    record(space.name() + ": h'(m) >= -3 stderr",
           r.hprime.value >= -3.0 * r.hprime.stderr_,
           "h'=" + std::to_string(r.hprime.value));
    record(space.name() + ": h' = h - k(m) exactly in arithmetic",
           r.hprime.value == r.h.value - r.km.value);
  }
}

void criterion7() {
  std::printf("criterion 7: Cesaro harmonic-measure demo on the flat torus cover\n");
  const auto probes = estimators::default_probe_grid();
  auto c = estimators::harmonic_measure_sample(r2, 1e4, 10000, probes, 1.0,
                                               RngSeed{7, 0});
  record("median sup-distance to linear fits <= 0.01 at t=10^4",
         c.median_sup_linear_fit <= 0.01,
         "median=" + std::to_string(c.median_sup_linear_fit));
  record("drift functional of the sampled measure = 0 within 3 stderr",
         std::abs(c.drift_functional.value) <= 3.0 * c.drift_functional.stderr_,
         "value=" + std::to_string(c.drift_functional.value) +
             " stderr=" + std::to_string(c.drift_functional.stderr_));
}

void criterion8() {
  std::printf("criterion 8: heat-kernel analytics\n");
  const Point p = h2.basepoint();
  const Point q{{0.0, std::exp(1.0)}};
  auto sg = brownian::semigroup_check(h2, 1.0, 1.0, p, q, 100000, RngSeed{8, 0});
  record("semigroup identity within 2% (10^5 MC samples)",
         std::abs(sg.lhs - sg.rhs) / sg.rhs <= 0.02,
         "lhs=" + std::to_string(sg.lhs) + " rhs=" + std::to_string(sg.rhs));

  bool sym = true;
  Rng rng(RngSeed{801, 0});
  for (int i = 0; i < 20; ++i) {
    const Point a{{3.0 * rng.uniform() - 1.5, 0.3 + 2.0 * rng.uniform()}};
    const Point b{{3.0 * rng.uniform() - 1.5, 0.3 + 2.0 * rng.uniform()}};
    for (double t : {0.5, 1.0, 2.0}) {
      const double ka = brownian::heat_kernel(h2, t, a, b);
      const double kb = brownian::heat_kernel(h2, t, b, a);
      sym = sym && std::abs(ka - kb) <= 1e-12 * std::max(ka, kb);
    }
  }
  record("kernel symmetry to 1e-12", sym);

  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(0.2 * i);  // distances to 20
  bool bound = true;
  std::string cs;
  for (double t : {0.5, 1.0, 2.0}) {
    const auto rep = brownian::gaussian_bound_check(h2, t, grid);
    bound = bound && rep.holds && rep.margin >= 0.0;
    cs += "t=" + std::to_string(t) + ":C=" + std::to_string(rep.C) + " ";
  }
  record("gaussian upper bound certified on distances to r=20", bound, cs);
}

void criterion9() {
  std::printf("criterion 9: discrete free-group analog\n");
  const auto f2 = group_walks::GroupSpec::free_group(2);
  const int grid[] = {10, 25, 50, 100, 200};
  const auto drifts = group_walks::word_drift(f2, grid);
  const double d100 = drifts[3].second;
  record("F2 drift at n=100 equals 0.5 within 0.01 (exact computation)",
         std::abs(d100 - 0.5) <= 0.01, "drift=" + std::to_string(d100));

  const auto ents = group_walks::word_entropy(f2, grid);
  bool mono = true;
  for (std::size_t i = 1; i < ents.h_over_n.size(); ++i)
    mono = mono && ents.h_over_n[i].second <= ents.h_over_n[i - 1].second + 1e-12;
  record("H(mu*n)/n non-increasing", mono);
  record("limit estimate at n=200 equals 0.549 within 0.02 (Richardson)",
         std::abs(ents.richardson_limit - 0.549) <= 0.02,
         "estimate=" + std::to_string(ents.richardson_limit) +
             " ln3/2=" + std::to_string(std::log(3.0) / 2.0));

  bool brute_ok = true;
  for (int n = 1; n <= 8; ++n) {
    const auto chain = group_walks::convolve_n(f2, n);
    const auto brute = oracles::free_walk_brute_force(2, n);
    for (int l = 0; l <= n; ++l)
      brute_ok = brute_ok &&
                 std::abs(chain.prob_length(l) - brute.by_length[static_cast<std::size_t>(l)]) <=
                     1e-15;
  }
  record("radial chain equals brute-force enumeration exactly for n <= 8", brute_ok);

  // the report must carry the discrete-case caveat verbatim
  namespace fs = std::filesystem;
  const auto tmp = fs::temp_directory_path() / "horodrift_acceptance_c9.jsonl";
  std::error_code ec;
  fs::remove(tmp, ec);
  harness::ResultStore store(tmp.string());
  harness::ExperimentConfig cfg;
  cfg.space = "free:2";
  cfg.quantity = "group_report";
  (void)harness::run(cfg, &store);
  const auto md = harness::report(store, "");
  record("report prints the discrete caveat verbatim",
         md.find("A precise result similar to (1) is not known for discrete random "
                 "walks") != std::string::npos);
  fs::remove(tmp, ec);
}

void criterion10() {
  std::printf("criterion 10: reproducibility and selftest\n");
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = harness::selftest(0, 0, false);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool all = res.all_pass;
  for (const auto& item : res.items)
    if (!item.pass) note("selftest item failed: " + item.name + " " + item.info);
  record("full selftest passes", all, std::to_string(res.items.size()) + " items");
  record("selftest runtime <= 60 s", secs <= 60.0, std::to_string(secs) + " s");

  // byte-identical estimates across worker counts for a fixed seed
  auto p1 = brownian::sample_paths(h2xh2, h2xh2.basepoint(), 5.0, Scheme::Euler, 0.01,
                                   99, 512, 1);
  auto p2 = brownian::sample_paths(h2xh2, h2xh2.basepoint(), 5.0, Scheme::Euler, 0.01,
                                   99, 512, 2);
  auto d1 = estimators::estimate_drift(h2xh2, p1, 1);
  auto d2 = estimators::estimate_drift(h2xh2, p2, 2);
  auto e1 = estimators::estimate_entropy(h2xh2, p1, 1);
  auto e2 = estimators::estimate_entropy(h2xh2, p2, 2);
  record("byte-identical estimates across worker counts",
         d1.est.value == d2.est.value && d1.est.stderr_ == d2.est.stderr_ &&
             e1.value == e2.value,
         "drift=" + std::to_string(d1.est.value));

  // the pass-set is independent of the master seed
  const auto quick1 = harness::selftest(1, 0, true);
  const auto quick2 = harness::selftest(31337, 0, true);
  bool same = quick1.items.size() == quick2.items.size();
  for (std::size_t i = 0; same && i < quick1.items.size(); ++i)
    same = quick1.items[i].name == quick2.items[i].name &&
           quick1.items[i].pass == quick2.items[i].pass;
  record("seed sweep leaves the selftest pass-set unchanged", same);
}

}  // namespace

int main(int argc, char** argv) {
  int criterion = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
      criterion = std::atoi(argv[i + 1]);
  }
  if (criterion < 1 || criterion > 10) {
    std::printf("usage: acceptance --criterion <1..10>\n");
    return 2;
  }
  try {
    switch (criterion) {
      case 1: criterion1(); break;
      case 2: criterion2(); break;
      case 3: criterion3(); break;
      case 4: criterion4(); break;
      case 5: criterion5(); break;
      case 6: criterion6(); break;
      case 7: criterion7(); break;
      case 8: criterion8(); break;
      case 9: criterion9(); break;
      case 10: criterion10(); break;
    }
  } catch (const std::exception& e) {
    std::printf("  [FAIL] unhandled exception :: %s\n", e.what());
    ++g_failures;
  }
  std::printf("criterion %d: %s (%d checks, %d failures)\n", criterion,
              g_failures == 0 ? "PASS" : "FAIL", g_checks, g_failures);
  return g_failures == 0 ? 0 : 1;
}
