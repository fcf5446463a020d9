#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "horodrift/error.hpp"
#include "horodrift/geometry.hpp"
#include "oracles.hpp"

using namespace horodrift;
using geometry::ModelSpace;
using geometry::Point;

namespace {
const ModelSpace r1 = ModelSpace::euclidean(1);
const ModelSpace r2 = ModelSpace::euclidean(2);
const ModelSpace h2 = ModelSpace::half_plane();
const ModelSpace h2xh2 = ModelSpace::product(ModelSpace::half_plane(), ModelSpace::half_plane());
const ModelSpace r1xh2 = ModelSpace::product(ModelSpace::euclidean(1), ModelSpace::half_plane());
}  // namespace

TEST_CASE("space parsing and names") {
  CHECK(ModelSpace::parse("h2").name() == "h2");
  CHECK(ModelSpace::parse("euclidean:3").name() == "euclidean:3");
  CHECK(ModelSpace::parse("h2xh2").name() == "h2xh2");
  CHECK(ModelSpace::parse("euclidean:2xh2").name() == "euclidean:2xh2");
  CHECK(ModelSpace::parse("euclidean:8").dim() == 8);
  CHECK_THROWS_AS(ModelSpace::parse("nosuch"), Error);
  CHECK_THROWS_AS(ModelSpace::parse("euclidean:9"), Error);
  CHECK_THROWS_AS(ModelSpace::parse("euclidean:0"), Error);
  CHECK_THROWS_AS(ModelSpace::parse("h2xh2xh2"), Error);
}

TEST_CASE("chart validation") {
  CHECK_THROWS_AS(geometry::distance(h2, Point{{0.0, 0.0}}, Point{{0.0, 1.0}}), Error);
  CHECK_THROWS_AS(geometry::distance(h2, Point{{0.0, -1.0}}, Point{{0.0, 1.0}}), Error);
  CHECK_THROWS_AS(geometry::distance(r2, Point{{0.0}}, Point{{0.0, 1.0}}), Error);
  try {
    geometry::distance(h2, Point{{0.0, 0.0}}, Point{{0.0, 1.0}});
  } catch (const Error& e) {
    CHECK(e.code() == "invalid_point");
  }
}

TEST_CASE("distance closed forms") {
  CHECK(geometry::distance(r2, Point{{0, 0}}, Point{{3, 4}}) == doctest::Approx(5.0).epsilon(1e-15));
  // vertical half-plane segment: arccosh(1 + 1/4) = ln 2
  CHECK(geometry::distance(h2, Point{{0, 1}}, Point{{0, 2}}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
  // product combines factor distances in quadrature
  CHECK(geometry::distance(h2xh2, Point{{0, 1, 0, 1}}, Point{{0, 2, 0, 2}}) ==
        doctest::Approx(std::sqrt(2.0) * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("distance axioms on random triples") {
  for (const auto& space : {r2, h2, h2xh2, r1xh2}) {
    auto pts = geometry::sample_uniform_ball(space, 3.0, 30000, RngSeed{11, 0});
    for (std::size_t i = 0; i + 2 < pts.size(); i += 3) {
      const auto &a = pts[i], &b = pts[i + 1], &c = pts[i + 2];
      const double dab = geometry::distance(space, a, b);
      const double dba = geometry::distance(space, b, a);
      const double dac = geometry::distance(space, a, c);
      const double dcb = geometry::distance(space, c, b);
      REQUIRE(std::abs(dab - dba) <= 1e-12);
      REQUIRE(dab <= dac + dcb + 1e-12);
      REQUIRE(dab >= 0.0);
    }
    const auto& p = pts[0];
    CHECK(geometry::distance(space, p, p) == 0.0);
  }
}

TEST_CASE("product distance identity is exact") {
  auto ls = geometry::sample_uniform_ball(h2, 4.0, 400, RngSeed{12, 0});
  auto rs = geometry::sample_uniform_ball(h2, 4.0, 400, RngSeed{13, 0});
  for (std::size_t i = 0; i + 1 < ls.size(); i += 2) {
    Point a{{ls[i][0], ls[i][1], rs[i][0], rs[i][1]}};
    Point b{{ls[i + 1][0], ls[i + 1][1], rs[i + 1][0], rs[i + 1][1]}};
    const double dl = geometry::distance(h2, ls[i], ls[i + 1]);
    const double dr = geometry::distance(h2, rs[i], rs[i + 1]);
    CHECK(geometry::distance(h2xh2, a, b) == doctest::Approx(std::hypot(dl, dr)).epsilon(1e-15));
  }
}

TEST_CASE("geodesic rays") {
  // vertical ray through the basepoint is unit speed: t=1 lands on (0, e)
  const Point p = geometry::geodesic_ray(h2, Point{{0, 1}}, {0, 1}, 1.0);
  CHECK(p[0] == doctest::Approx(0.0));
  CHECK(p[1] == doctest::Approx(std::exp(1.0)).epsilon(1e-12));

  const Point q = geometry::geodesic_ray(r2, Point{{0, 0}}, {1, 0}, 2.5);
  CHECK(q[0] == doctest::Approx(2.5));
  CHECK(q[1] == doctest::Approx(0.0));

  // t = 0 returns the start point on any space
  for (const auto& space : {r2, h2, h2xh2}) {
    const Point x0 = space.basepoint();
    geometry::Vec dir(x0.dim(), 0.0);
    dir[0] = space.kind() == ModelSpace::Kind::HalfPlane ? x0[1] : 1.0;
    if (space.is_product()) dir = {x0[1], 0.0, 0.0, 0.0};  // left-factor direction
    const Point r = geometry::geodesic_ray(space, x0, dir, 0.0);
    for (std::size_t i = 0; i < r.dim(); ++i) CHECK(r[i] == x0[i]);
  }

  CHECK_THROWS_AS(geometry::geodesic_ray(h2, Point{{0, 1}}, {0, 1.1}, 1.0), Error);
}

TEST_CASE("geodesic rays are unit speed and additive") {
  Rng rng(RngSeed{21, 0});
  for (int i = 0; i < 1000; ++i) {
    const Point p{{4.0 * rng.uniform() - 2.0, 0.2 + 3.0 * rng.uniform()}};
    const double a = 2.0 * oracles::kPi * rng.uniform();
    const geometry::Vec v{p[1] * std::sin(a), p[1] * std::cos(a)};
    const double s = 4.0 * rng.uniform(), t = 4.0 * rng.uniform();
    const Point q1 = geometry::geodesic_ray(h2, p, v, s);
    const Point q2 = geometry::geodesic_ray(h2, p, v, s + t);
    REQUIRE(geometry::distance(h2, p, q1) == doctest::Approx(s).epsilon(1e-9));
    REQUIRE(geometry::distance(h2, q1, q2) == doctest::Approx(t).epsilon(1e-9));
  }
  // product rays: distance from start equals the parameter
  Rng rng2(RngSeed{22, 0});
  for (int i = 0; i < 200; ++i) {
    const Point x0 = h2xh2.basepoint();
    const double a = 2.0 * oracles::kPi * rng2.uniform();
    const double c = std::cos(a), s = std::sin(a);
    // unit vector splitting speed c : s between the factors
    const geometry::Vec dir{c * std::sin(a), c * std::cos(a), s * std::cos(a),
                            -s * std::sin(a)};
    const double t = 5.0 * rng2.uniform();
    const Point q = geometry::geodesic_ray(h2xh2, x0, dir, t);
    REQUIRE(geometry::distance(h2xh2, x0, q) == doctest::Approx(t).epsilon(1e-9));
  }
}

TEST_CASE("metric tensor charts") {
  const auto mh = geometry::metric_tensor(h2, Point{{2.0, 0.5}});
  CHECK(mh.g_diag[0] == doctest::Approx(4.0));
  CHECK(mh.g_diag[1] == doctest::Approx(4.0));
  CHECK(mh.sqrt_det == doctest::Approx(4.0));
  const auto me = geometry::metric_tensor(r2, Point{{5.0, -1.0}});
  CHECK(me.g_diag[0] == 1.0);
  CHECK(me.sqrt_det == 1.0);
  const auto mp = geometry::metric_tensor(r1xh2, Point{{7.0, 0.0, 2.0}});
  CHECK(mp.g_diag[0] == 1.0);
  CHECK(mp.g_diag[1] == doctest::Approx(0.25));
  CHECK(mp.sqrt_det == doctest::Approx(0.25));
}

TEST_CASE("ball volumes") {
  CHECK(geometry::ball_volume(r2, 1.0).value == doctest::Approx(oracles::kPi).epsilon(1e-14));
  CHECK(geometry::ball_volume(h2, 2.0).value ==
        doctest::Approx(2.0 * oracles::kPi * (std::cosh(2.0) - 1.0)).epsilon(1e-14));
  // product: Monte Carlo against the 1-D quadrature oracle
  const auto v = geometry::ball_volume(h2xh2, 6.0, 400000, RngSeed{31, 0});
  CHECK_FALSE(v.exact);
  CHECK(v.stderr_ > 0.0);
  const double want = oracles::h2xh2_ball_volume(6.0);
  CHECK(want == doctest::Approx(1.5252092637e5).epsilon(1e-6));
  CHECK(std::abs(v.value - want) <= 3.0 * v.stderr_);
  // monotone in R
  double prev = 0.0;
  for (double R : {2.0, 4.0, 6.0}) {
    const double val = geometry::ball_volume(h2xh2, R, 100000, RngSeed{32, 0}).value;
    CHECK(val > prev);
    prev = val;
  }
  // half-plane log-volume growth rate reaches 1 (d/dR ln vol = coth(R/2))
  const double s =
      (std::log(geometry::ball_volume(h2, 20.0).value) -
       std::log(geometry::ball_volume(h2, 10.0).value)) / 10.0;
  CHECK(s == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("uniform ball sampling") {
  CHECK(geometry::sample_uniform_ball(h2, 1.0, 0, RngSeed{}).empty());

  // euclidean symmetry: coordinate mean vanishes
  auto e = geometry::sample_uniform_ball(r1, 1.0, 40000, RngSeed{41, 0});
  double mean = 0.0;
  for (const auto& p : e) mean += p[0];
  mean /= static_cast<double>(e.size());
  const double se = 0.5 / std::sqrt(static_cast<double>(e.size()));
  CHECK(std::abs(mean) <= 3.0 * se);

  // h2 radial law: mean distance to the center matches the sinh-density oracle
  auto pts = geometry::sample_uniform_ball(h2, 3.0, 40000, RngSeed{42, 0});
  const Point x0 = h2.basepoint();
  double mr = 0.0, m2 = 0.0;
  for (const auto& p : pts) {
    REQUIRE(p[1] > 0.0);
    const double r = geometry::distance(h2, x0, p);
    REQUIRE(r <= 3.0 + 1e-12);
    mr += r;
    m2 += r * r;
  }
  mr /= static_cast<double>(pts.size());
  m2 /= static_cast<double>(pts.size());
  const double want = oracles::h2_ball_mean_radius(3.0);
  CHECK(want == doctest::Approx(2.226054640030).epsilon(1e-9));
  const double sd = std::sqrt(m2 - mr * mr);
  CHECK(std::abs(mr - want) <= 3.0 * sd / std::sqrt(static_cast<double>(pts.size())));

  // product rejection sampler stays inside the product ball
  auto pp = geometry::sample_uniform_ball(h2xh2, 4.0, 2000, RngSeed{43, 0});
  const Point c = h2xh2.basepoint();
  for (const auto& p : pp) REQUIRE(geometry::distance(h2xh2, c, p) <= 4.0 + 1e-12);
}

TEST_CASE("sphere areas") {
  CHECK(geometry::sphere_area(r2, 2.0) == doctest::Approx(4.0 * oracles::kPi));
  CHECK(geometry::sphere_area(h2, 2.0) ==
        doctest::Approx(2.0 * oracles::kPi * std::sinh(2.0)));
  // product area is the derivative of the quadrature volume
  const double h = 1e-4;
  const double dv = (oracles::h2xh2_ball_volume(5.0 + h) - oracles::h2xh2_ball_volume(5.0 - h)) /
                    (2.0 * h);
  CHECK(geometry::sphere_area(h2xh2, 5.0) == doctest::Approx(dv).epsilon(1e-5));
}

TEST_CASE("stable arccosh") {
  for (double x : {1.0 + 1e-12, 1.0 + 1e-9, 1.0 + 1e-8, 1.5, 10.0, 1e6}) {
    CHECK(geometry::acosh_stable(x) == doctest::Approx(std::acosh(x)).epsilon(1e-13));
  }
  CHECK(geometry::acosh_stable(1e200) == doctest::Approx(std::log(2.0) + std::log(1e200)));
  CHECK(geometry::acosh_stable(1.0) == 0.0);
  CHECK_THROWS_AS(geometry::acosh_stable(0.5), Error);
}

TEST_CASE("known invariants of catalog spaces") {
  CHECK(r2.known_drift() == 0.0);
  CHECK(h2.known_drift() == 1.0);
  CHECK(h2xh2.known_drift() == doctest::Approx(std::sqrt(2.0)));
  CHECK(r1xh2.known_drift() == doctest::Approx(1.0));
  CHECK(h2.known_lambda() == doctest::Approx(0.25));
  CHECK(h2xh2.known_lambda() == doctest::Approx(0.5));
  CHECK(h2xh2.known_volume_entropy() == doctest::Approx(std::sqrt(2.0)));
  CHECK(h2xh2.known_entropy() == doctest::Approx(2.0));
}
