#include <catch_amalgamated.hpp>

#include <cmath>

#include "latvar/lattice_count.hpp"
#include "latvar/oracle.hpp"

using namespace latvar;

TEST_CASE("square stats closed forms", "[oracle]") {
  const auto a = square_stats(SquareVariant::A, 3, 0.125);
  CHECK(a.mean == Rational(3));
  CHECK(a.variance == Rational(63, 2));
  const auto b = square_stats(SquareVariant::B, 3, 0.125);
  CHECK(b.mean == Rational(49, 16));
  CHECK(b.variance == Rational(3759, 256));
  CHECK(b.variance_value() == 14.68359375);
}

TEST_CASE("square stats distributions are consistent", "[oracle]") {
  for (auto variant : {SquareVariant::A, SquareVariant::B}) {
    for (std::int64_t n : {1, 2, 3, 7, 40}) {
      for (double t : {0.5 / 64, 0.125, 0.25, 0.375, 0.4375}) {
        const auto s = square_stats(variant, n, t);
        Rational total = 0;
        for (const auto& vm : s.distribution) {
          CHECK(vm.measure >= 0);
          total += vm.measure;
        }
        CHECK(total == 1);
        const auto [mean, var] = distribution_moments(s);
        CHECK(mean == s.mean);
        CHECK(var == s.variance);
      }
    }
  }
}

TEST_CASE("square stats domain", "[oracle]") {
  CHECK_THROWS_AS(square_stats(SquareVariant::A, 0, 0.1), DomainError);
  CHECK_THROWS_AS(square_stats(SquareVariant::A, 3, 0.0), DomainError);
  CHECK_THROWS_AS(square_stats(SquareVariant::B, 3, 0.5), DomainError);
}

TEST_CASE("variance dwarfs the mean for thin square annuli", "[oracle]") {
  double previous = 0.0;
  for (double t : {0.125, 0.0625, 1.0 / 1024, 1.0 / 65536}) {
    const auto s = square_stats(SquareVariant::A, 3, t);
    const double ratio = s.variance_value() / s.mean_value();
    CHECK(ratio > previous);
    CHECK(ratio < 12.0);
    previous = ratio;
  }
  CHECK(previous == Catch::Approx(12.0).epsilon(1e-4));
}

TEST_CASE("lattice counts reproduce the square distribution", "[oracle]") {
  for (auto variant : {SquareVariant::A, SquareVariant::B}) {
    const auto s = square_stats(variant, 3, 0.125);
    const auto set = sample_counts(s.annulus(), SamplingScheme::grid(256));
    std::map<std::int64_t, Rational> found;
    for (auto c : set.counts) found[c] += Rational(1, 256 * 256);
    std::map<std::int64_t, Rational> expected;
    for (const auto& vm : s.distribution) expected[vm.value] += vm.measure;
    // dyadic t and a power-of-two offset grid make the measures exact
    CHECK(found == expected);
  }
}

TEST_CASE("brute force matches the fast grid variance", "[oracle]") {
  const auto box = square_stats(SquareVariant::A, 3, 0.125);
  const double brute = brute_force_variance(box.annulus(), 1024);
  CHECK(brute == Catch::Approx(31.5).epsilon(0.02));
  CHECK(brute == sample_moments(box.annulus(), SamplingScheme::grid(1024)).variance);

  const Annulus disk(ConvexBody::ball(2, 1.0), 2.5, 0.5);
  const double disk_brute = brute_force_variance(disk, 256);
  CHECK(disk_brute == Catch::Approx(sample_moments(disk, SamplingScheme::grid(256)).variance).epsilon(1e-12));

  const Annulus ellipsoid(ConvexBody::ellipsoid({1.5, 0.7, 1.2}), 3.0, 0.4);
  CHECK(brute_force_variance(ellipsoid, 12) ==
        Catch::Approx(sample_moments(ellipsoid, SamplingScheme::grid(12)).variance).epsilon(1e-12));
}
