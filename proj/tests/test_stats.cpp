#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nsm/error.hpp"
#include "nsm/stats.hpp"

using namespace nsm;

TEST_CASE("binary entropy")
{
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(binary_entropy(0.11) == doctest::Approx(0.499915958164528).epsilon(1e-12));
  for (double p = 0.01; p < 0.5; p += 0.01)
    CHECK(binary_entropy(p) == doctest::Approx(binary_entropy(1 - p)).epsilon(1e-12));
  CHECK_THROWS_AS(binary_entropy(-0.1), DomainError);
  CHECK_THROWS_AS(binary_entropy(1.1), DomainError);
}

TEST_CASE("chernoff half-width")
{
  CHECK(chernoff_halfwidth(1e6, 1e-6) == doctest::Approx(0.0026933861344527097).epsilon(1e-12));
  CHECK(chernoff_halfwidth(4e6, 1e-6) == doctest::Approx(0.0013466930672263548).epsilon(1e-12));
  CHECK(chernoff_halfwidth(1e6, 1e-6) / chernoff_halfwidth(4e6, 1e-6) == doctest::Approx(2.0));
  CHECK(chernoff_halfwidth(100, 1e-3, Tail::one_sided) < chernoff_halfwidth(100, 1e-3));
  CHECK(chernoff_halfwidth(1, 2.0) == 0.0);
  CHECK_THROWS_AS(chernoff_halfwidth(0, 0.1), DomainError);
  CHECK_THROWS_AS(chernoff_halfwidth(10, 0.0), DomainError);
  CHECK_THROWS_AS(chernoff_halfwidth(10, -1.0), DomainError);
  CHECK_THROWS_AS(chernoff_halfwidth(10, 2.5), DomainError);
}

TEST_CASE("interval membership is inclusive")
{
  CHECK(interval_contains(40, 0.5, 0.1, 100));
  CHECK(interval_contains(60, 0.5, 0.1, 100));
  CHECK(!interval_contains(39, 0.5, 0.1, 100));
  CHECK(!interval_contains(61, 0.5, 0.1, 100));
  const auto ci = chernoff_interval(0.3, 1e4, 1e-3);
  CHECK(ci.lo() < 0.3);
  CHECK(ci.hi() > 0.3);
}

TEST_CASE("interval coverage over repeated Bernoulli experiments")
{
  std::mt19937_64 rng(7);
  const double eps = 1e-3;
  const std::uint64_t M = 10000;
  for (double p : {0.05, 0.3, 0.81}) {
    const double zeta = chernoff_halfwidth(double(M), eps);
    std::binomial_distribution<std::uint64_t> draw(M, p);
    int outside = 0;
    for (int rep = 0; rep < 1000; ++rep)
      outside += !interval_contains(draw(rng), p, zeta, M);
    // Expected at most eps * 1000 = 1; the bound is loose so this is nearly always 0.
    CHECK(outside <= 5);
  }
}
