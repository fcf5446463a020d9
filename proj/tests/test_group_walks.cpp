#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "horodrift/error.hpp"
#include "horodrift/group_walks.hpp"
#include "oracles.hpp"

using namespace horodrift;
using namespace horodrift::group_walks;

TEST_CASE("group parsing") {
  CHECK(GroupSpec::parse("z:1").name() == "z:1");
  CHECK(GroupSpec::parse("z:2").name() == "z:2");
  CHECK(GroupSpec::parse("free:2").name() == "free:2");
  CHECK(GroupSpec::parse("free:4").generator_count() == 8);
  CHECK_THROWS_AS(GroupSpec::parse("z:3"), Error);
  CHECK_THROWS_AS(GroupSpec::parse("free:1"), Error);
  CHECK_THROWS_AS(GroupSpec::parse("sym:5"), Error);
}

TEST_CASE("two fair steps on Z") {
  const auto d = convolve_n(GroupSpec::lattice(1), 2);
  CHECK(d.prob_at(std::vector<int>{-2}) == 0.25);
  CHECK(d.prob_at(std::vector<int>{0}) == 0.5);
  CHECK(d.prob_at(std::vector<int>{2}) == 0.25);
  CHECK(d.prob_at(std::vector<int>{1}) == 0.0);
  CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("free group small-n distributions") {
  const auto g = GroupSpec::free_group(2);
  const auto d1 = convolve_n(g, 1);
  CHECK(d1.prob_length(1) == 1.0);
  CHECK(d1.prob_length(0) == 0.0);
  // three steps put mass 7/16 on length 1 and 9/16 on length 3
  const auto d3 = convolve_n(g, 3);
  CHECK(d3.prob_length(1) == doctest::Approx(7.0 / 16.0).epsilon(1e-15));
  CHECK(d3.prob_length(3) == doctest::Approx(9.0 / 16.0).epsilon(1e-15));
  CHECK(d3.prob_length(0) == 0.0);
  CHECK(d3.prob_length(2) == 0.0);
  CHECK(d3.mass() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("radial chain equals brute-force word enumeration up to n = 8") {
  const auto g = GroupSpec::free_group(2);
  for (int n : {2, 5, 8}) {
    const auto chain = convolve_n(g, n);
    const auto brute = oracles::free_walk_brute_force(2, n);
    // exact equality of the length marginals (all arithmetic is dyadic)
    for (int l = 0; l <= n; ++l)
      REQUIRE(std::abs(chain.prob_length(l) - brute.by_length[static_cast<std::size_t>(l)]) <=
              1e-15);
    // spherical symmetry: words of equal length are equiprobable
    std::map<std::size_t, double> rep;
    for (const auto& [w, p] : brute.words) {
      auto it = rep.find(w.size());
      if (it == rep.end())
        rep[w.size()] = p;
      else
        REQUIRE(std::abs(it->second - p) <= 1e-18);
    }
    // entropy decomposition H(length) + E[ln #sphere] equals the element entropy
    REQUIRE(chain.entropy() == doctest::Approx(brute.element_entropy).epsilon(1e-12));
  }
}

TEST_CASE("word drift sequences") {
  // one step always lands on a generator
  for (const auto& g : {GroupSpec::lattice(2), GroupSpec::free_group(2)}) {
    const int grid1[] = {1};
    CHECK(word_drift(g, grid1).front().second == 1.0);
  }
  // Z^2: exact values against the independent convolution oracle, decreasing
  const int grid[] = {16, 32, 64};
  const auto seq = word_drift(GroupSpec::lattice(2), grid);
  CHECK(seq[0].second == doctest::Approx(0.279899868182838).epsilon(1e-12));
  CHECK(seq[1].second == doctest::Approx(0.198693507495934).epsilon(1e-12));
  CHECK(seq[2].second == doctest::Approx(oracles::kZ2Drift64).epsilon(1e-12));
  CHECK(seq[1].second < seq[0].second);
  CHECK(seq[2].second < seq[1].second);

  // F_2: exact value at n = 100 sits within 0.01 of the limit 1/2, and the
  // 1/n approach has a bounded constant
  const int fgrid[] = {10, 25, 50, 100};
  const auto fseq = word_drift(GroupSpec::free_group(2), fgrid);
  CHECK(fseq.back().second == doctest::Approx(oracles::kF2Drift100).epsilon(1e-12));
  CHECK(std::abs(fseq.back().second - 0.5) <= 0.01);
  double C = 0.0;
  for (const auto& [n, v] : fseq) C = std::max(C, std::abs(v - 0.5) * n);
  CHECK(C <= 1.0);
}

TEST_CASE("word entropy sequences") {
  // Z^1: H/n at 64 under 0.06 and decreasing toward the Liouville value 0
  const int zgrid[] = {16, 32, 64};
  const auto ze = word_entropy(GroupSpec::lattice(1), zgrid);
  CHECK(ze.h_over_n.back().second == doctest::Approx(oracles::kZ1EntropyOverN64).epsilon(1e-12));
  CHECK(ze.h_over_n.back().second <= 0.06);
  for (std::size_t i = 1; i < ze.h_over_n.size(); ++i)
    REQUIRE(ze.h_over_n[i].second <= ze.h_over_n[i - 1].second + 1e-12);

  // F_2: H(mu*1)/1 = ln 4 (uniform on the four generators)
  const int one[] = {1};
  CHECK(word_entropy(GroupSpec::free_group(2), one).h_over_n.front().second ==
        doctest::Approx(std::log(4.0)).epsilon(1e-14));

  // F_2 long grid: certified non-increasing bounds, Richardson limit near ln3/2
  const int fgrid[] = {10, 25, 50, 100, 200};
  const auto fe = word_entropy(GroupSpec::free_group(2), fgrid);
  for (std::size_t i = 1; i < fe.h_over_n.size(); ++i)
    REQUIRE(fe.h_over_n[i].second <= fe.h_over_n[i - 1].second + 1e-12);
  CHECK(fe.h_over_n.back().second ==
        doctest::Approx(oracles::kF2EntropyOverN200).epsilon(1e-12));
  CHECK(fe.richardson_limit ==
        doctest::Approx(oracles::kF2EntropyRichardson).epsilon(1e-12));
  const double limit = std::log(3.0) / 2.0;
  CHECK(std::abs(fe.richardson_limit - limit) <= 0.02);
  // H/n upper-bounds the Avez entropy at every n
  for (const auto& [n, v] : fe.h_over_n) REQUIRE(v >= limit - 1e-12);
}

TEST_CASE("normalization stays within 1e-12 along the whole run") {
  auto d = WordDistribution::initial(GroupSpec::lattice(2), 64);
  for (int n = 1; n <= 64; ++n) {
    d.step();
    REQUIRE(std::abs(d.mass() - 1.0) <= 1e-12);
  }
  auto f = WordDistribution::initial(GroupSpec::free_group(3), 512);
  for (int n = 1; n <= 512; ++n) {
    f.step();
    REQUIRE(std::abs(f.mass() - 1.0) <= 1e-12);
  }
}

TEST_CASE("drift-entropy report") {
  const std::vector<GroupSpec> gs{GroupSpec::lattice(2), GroupSpec::free_group(2)};
  const auto rows = drift_entropy_report(gs);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].group == "z:2");
  CHECK(rows[0].verdict == "consistent");
  CHECK(rows[0].drift == doctest::Approx(oracles::kZ2Drift64).epsilon(1e-12));
  CHECK(rows[0].drift_sq <= 0.01);  // extrapolates toward 0
  CHECK(rows[1].group == "free:2");
  CHECK(rows[1].verdict == "consistent");
  CHECK(rows[1].drift == doctest::Approx(0.50375).epsilon(1e-9));  // exact at n=200
  CHECK(rows[1].entropy_ub == doctest::Approx(oracles::kF2EntropyOverN200).epsilon(1e-12));
  CHECK(std::abs(rows[1].entropy_limit - std::log(3.0) / 2.0) <= 0.02);
  // empty input gives an empty table
  CHECK(drift_entropy_report({}).empty());
}

TEST_CASE("box limits are enforced") {
  CHECK_THROWS_AS(convolve_n(GroupSpec::lattice(2), 300), Error);
  CHECK_THROWS_AS(convolve_n(GroupSpec::free_group(2), 20000), Error);
  CHECK_THROWS_AS(convolve_n(GroupSpec::free_group(2), 0), Error);
}
