#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "latvar/fourier.hpp"

using namespace latvar;

namespace {

Vec random_direction(std::mt19937_64& gen, int d) {
  std::normal_distribution<double> g;
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = g(gen);
  return normalized(v);
}

ConvexBody wobbly_disk() { return ConvexBody::perturbed_disk(1.0, {{3, 0.05, 0.0}, {2, 0.05, 0.3}}); }

}  // namespace

TEST_CASE("ball transform examples", "[fourier]") {
  CHECK(ft_ball(3, 1.0, Vec{0.5, 0.0, 0.0}).real() == Catch::Approx(4.0 / kPi).margin(1e-10));
  const double rho = 0.5;
  const double z = 2.0 * kPi * rho;
  const double closed = (std::sin(z) - z * std::cos(z)) / (2.0 * kPi * kPi * rho * rho * rho);
  CHECK(ft_ball(3, 1.0, Vec{0.0, 0.3, 0.4}).real() == Catch::Approx(closed).margin(1e-12));
  CHECK(ft_ball(2, 1.0, Vec{0.0, 0.0}).real() == Catch::Approx(kPi).epsilon(1e-15));
  CHECK(ft_ball(2, 1.0, Vec{1.0, 0.0}).real() == Catch::Approx(bessel_j(1.0, 2.0 * kPi)).margin(1e-15));
  CHECK(ft_ball(3, 2.0, Vec{0.0, 0.0, 0.0}).real() == Catch::Approx(32.0 * kPi / 3.0).epsilon(1e-14));
  CHECK(ft_ball(5, 1.0, Vec{0.0, 0.0, 0.0, 0.0, 0.0}).real() == Catch::Approx(unit_ball_volume(5)).epsilon(1e-14));
  CHECK(ft_ball(3, 1.0, Vec{0.0, 0.0, 0.0}).imag() == 0.0);
}

TEST_CASE("box transform examples", "[fourier]") {
  CHECK(ft_box(Vec{1.5, 0.25}, Vec{0.0, 0.0}) == Catch::Approx(1.5));
  CHECK(ft_box(Vec{0.5, 0.5}, Vec{1.0, 0.0}) == Catch::Approx(0.0).margin(1e-15));
  CHECK(ft_box(Vec{3.05, 3.05}, Vec{1.0, 0.0}) == Catch::Approx(std::sin(6.1 * kPi) / kPi * 6.1).epsilon(1e-13));
  // product of 1-D integrals checked by quadrature
  const double s = 0.7;
  const double x = 1.3;
  const auto q = integrate_adaptive([&](double y) { return std::cos(2.0 * kPi * x * y); }, -s, s, 1e-14);
  CHECK(ft_interval(s, x) == Catch::Approx(q.value).margin(1e-12));
}

TEST_CASE("scaling identity through closed forms", "[fourier]") {
  std::mt19937_64 gen(3);
  for (int d : {2, 3}) {
    for (double lambda : {0.5, 2.0, 10.0}) {
      const Vec xi = 1.7 * random_direction(gen, d);
      const double lhs = ft_ball(d, lambda, xi).real();
      const double rhs = std::pow(lambda, d) * ft_ball(d, 1.0, lambda * xi).real();
      CHECK(lhs == Catch::Approx(rhs).epsilon(1e-13));
    }
  }
}

TEST_CASE("affine identity for the ellipse", "[fourier]") {
  const Vec xi{0.0, 1.0};
  const Vec axes{2.0, 1.0};
  CHECK(ft_ellipsoid(axes, xi).real() == Catch::Approx(2.0 * ft_ball(2, 1.0, Vec{0.0, 1.0}).real()));
  const auto q = ft_body_quadrature(ConvexBody::ellipsoid({2.0, 1.0}), xi);
  CHECK(std::abs(q.value - 2.0 * ft_ball(2, 1.0, Vec{0.0, 1.0})) < 1e-10);
}

TEST_CASE("quadrature matches closed forms", "[fourier]") {
  std::mt19937_64 gen(11);
  const std::vector<ConvexBody> bodies = {ConvexBody::ball(2, 1.0), ConvexBody::ball(3, 1.0),
                                          ConvexBody::ellipsoid({2.0, 1.0}), ConvexBody::ellipsoid({2.0, 1.0, 1.0}),
                                          ConvexBody::ellipsoid({1.5, 0.7, 1.2})};
  for (const auto& body : bodies) {
    const int d = body.dim();
    for (double rho : {0.1, 0.5, 1.0, 2.5, 5.0, 10.0}) {
      const Vec xi = rho * random_direction(gen, d);
      const auto q = ft_body_quadrature(body, xi);
      const auto exact = ft_body(body, xi);
      INFO(body.kind_name() << " d=" << d << " xi=" << xi.str());
      CHECK(exact.method == CoefficientMethod::closed_form);
      CHECK(std::abs(q.value - exact.value) < 1e-8);
      CHECK(q.error < 1e-6);
    }
  }
}

TEST_CASE("coefficients of real indicators are conjugate symmetric", "[fourier]") {
  std::mt19937_64 gen(5);
  const auto body = wobbly_disk();
  for (double rho : {0.7, 3.0, 12.0}) {
    const Vec xi = rho * random_direction(gen, 2);
    const auto plus = ft_body_quadrature(body, xi).value;
    const auto minus = ft_body_quadrature(body, -xi).value;
    CHECK(std::abs(plus - std::conj(minus)) < 1e-12);
    CHECK(std::abs(plus.imag()) > 1e-6);  // asymmetric body, genuinely complex
  }
  const Annulus ann(body, 5.0, 0.2);
  const auto c1 = ft_annulus(ann, Vec{3.0, -2.0}).value;
  const auto c2 = ft_annulus(ann, Vec{-3.0, 2.0}).value;
  CHECK(std::abs(c1 - std::conj(c2)) < 1e-12);
}

TEST_CASE("quadrature rejects non-smooth bodies and enforces the node budget", "[fourier]") {
  CHECK_THROWS_AS(ft_body_quadrature(ConvexBody::box({1.0, 1.0}), Vec{1.0, 0.0}), UnsupportedKind);
  CHECK_THROWS_AS(ft_body_quadrature(wobbly_disk(), Vec{400.0, 0.0}, 0, 1024), TruncationError);
  CHECK_THROWS_AS(ft_body_quadrature(ConvexBody::ball(2, 1.0), Vec{0.0, 0.0}), DomainError);
}

TEST_CASE("annulus transform examples", "[fourier]") {
  const auto disk = ConvexBody::ball(2, 1.0);
  CHECK(std::abs(ft_annulus(Annulus(disk, 3.0, 0.0), Vec{1.0, 2.0}).value) == 0.0);
  const Annulus ann(disk, 10.0, 0.1);
  CHECK(ft_annulus(ann, Vec{0.0, 0.0}).value.real() == Catch::Approx(annulus_volume(ann)).epsilon(1e-14));
  const Vec xi{3.0, 0.0};
  const double rel = std::abs(ft_annulus(ann, xi).value - asymptotic_A(ann, xi)) / std::abs(ft_annulus(ann, xi).value);
  CHECK(rel <= 1.0 / (10.0 * 3.0));
  // quadrature route agrees with the closed form route
  const Annulus wob(wobbly_disk(), 4.0, 0.3);
  const auto direct = ft_annulus(wob, Vec{2.0, 1.0}).value;
  const double a = wob.outer();
  const double b = wob.inner();
  const auto by_scaling = a * a * ft_body_quadrature(wob.body, a * Vec{2.0, 1.0}).value -
                          b * b * ft_body_quadrature(wob.body, b * Vec{2.0, 1.0}).value;
  CHECK(std::abs(direct - by_scaling) < 1e-10);
}

TEST_CASE("amplitude examples", "[fourier]") {
  // ellipse (2,1) at xi = (1,0): sigma(+-xi) = (+-2, 0), K = 2
  const Vec xi{1.0, 0.0};
  const Complex expected = (std::polar(1.0 / std::sqrt(2.0), 4.0 * kPi - kPi / 4.0) -
                            std::polar(1.0 / std::sqrt(2.0), -4.0 * kPi + kPi / 4.0)) /
                           Complex(0.0, 2.0 * kPi);
  CHECK(std::abs(asymptotic_a(ConvexBody::ellipsoid({2.0, 1.0}), xi) - expected) < 1e-12);
  // symmetric bodies: a(-xi) = conj a(xi)
  std::mt19937_64 gen(2);
  for (const auto& body : {ConvexBody::ellipsoid({2.0, 1.0}), ConvexBody::ellipsoid({1.5, 0.7, 1.2})}) {
    const Vec v = 3.3 * random_direction(gen, body.dim());
    CHECK(std::abs(asymptotic_a(body, -v) - std::conj(asymptotic_a(body, v))) < 1e-12);
  }
  // bounded by max K^{-1/2} / pi
  const auto body = wobbly_disk();
  const double bound = std::sqrt(sphere_extremes(body).max_inverse_curvature) / kPi;
  for (int i = 0; i < 50; ++i) CHECK(std::abs(asymptotic_a(body, 7.0 * random_direction(gen, 2))) <= bound);
}

TEST_CASE("stationary-phase remainder decays", "[fourier]") {
  // |chi^ - a |xi|^{-(d+1)/2}| |xi|^{(d+3)/2} stays bounded over |xi| in [2, 1000]
  std::mt19937_64 gen(8);
  const std::vector<ConvexBody> bodies = {ConvexBody::ball(2, 1.0), ConvexBody::ball(3, 1.0),
                                          ConvexBody::ellipsoid({2.0, 1.0}), ConvexBody::ellipsoid({1.5, 0.7, 1.2})};
  for (const auto& body : bodies) {
    const int d = body.dim();
    double worst = 0.0;
    for (double rho = 2.0; rho <= 1000.0; rho *= 1.1) {
      const Vec xi = rho * random_direction(gen, d);
      const auto exact = ft_body(body, xi).value;
      const auto main = asymptotic_a(body, xi) * std::pow(rho, -0.5 * (d + 1));
      worst = std::max(worst, std::abs(exact - main) * std::pow(rho, 0.5 * (d + 3)));
    }
    INFO(body.kind_name() << " d=" << d << " worst " << worst);
    CHECK(worst < 1.0);
  }
}

TEST_CASE("main term reduces to the shell expansion for the disk", "[fourier]") {
  const Annulus ann(ConvexBody::ball(2, 1.0), 7.0, 0.3);
  for (double rho : {0.5, 2.0, 9.0}) {
    const Vec xi{0.6 * rho, 0.8 * rho};
    const double shell = 2.0 / kPi * std::sqrt(ann.r) * std::pow(rho, -1.5) *
                         std::cos(2.0 * kPi * ann.r * rho - kPi / 4.0) * std::sin(kPi * ann.t * rho);
    const auto a = asymptotic_A(ann, xi);
    CHECK(a.real() == Catch::Approx(shell).epsilon(1e-12).margin(1e-15));
    CHECK(std::abs(a.imag()) < 1e-14);
  }
  CHECK(std::abs(asymptotic_A(Annulus(ConvexBody::ball(2, 1.0), 7.0, 0.0), Vec{1.0, 1.0})) == 0.0);
}

TEST_CASE("normalised remainder B stays bounded for the unit ball", "[fourier]") {
  std::mt19937_64 gen(4);
  for (int d : {2, 3}) {
    double worst = 0.0;
    for (double r : {4.0, 32.0}) {
      const Annulus ann(ConvexBody::ball(d, 1.0), r, 0.05);
      for (double rxi = 1.0; rxi <= 1000.0; rxi *= 1.25) {
        worst = std::max(worst, remainder_ratio(ann, (rxi / r) * random_direction(gen, d)));
      }
    }
    INFO("d=" << d << " worst " << worst);
    CHECK(worst < 10.0);
  }
}

TEST_CASE("shell enumeration covers each lattice point once in order", "[fourier]") {
  for (int d : {2, 3}) {
    const double cutoff = 7.5;
    const auto plan = shell_plan(cutoff);
    std::set<std::vector<std::int64_t>> seen;
    for (std::int64_t k = 1; k <= plan.shells; ++k) {
      std::vector<std::int64_t> previous;
      for_each_in_shell(d, k, plan.max_norm2, [&](const IVec& n) {
        std::vector<std::int64_t> v(n.dim());
        for (int i = 0; i < n.dim(); ++i) v[i] = n[i];
        CHECK(n.norm2() > (k - 1) * (k - 1));
        CHECK(n.norm2() <= k * k);
        if (!previous.empty()) CHECK(previous < v);
        previous = v;
        CHECK(seen.insert(v).second);
      });
    }
    std::size_t expected = 0;
    const int reach = 8;
    std::vector<int> k(d, -reach);
    while (true) {
      long s = 0;
      for (int x : k) s += x * x;
      if (s > 0 && s <= 56) ++expected;  // floor(7.5^2) = 56
      int axis = d - 1;
      while (axis >= 0 && ++k[axis] > reach) k[axis--] = -reach;
      if (axis < 0) break;
    }
    CHECK(seen.size() == expected);
  }
}

TEST_CASE("lattice tail sum dominates the explicit sum", "[fourier]") {
  for (int d : {2, 3}) {
    for (double t : {0.01, 0.2, 1.0}) {
      for (double cutoff : {3.0, 10.0, 25.0}) {
        const double bound = lattice_tail_sum(d, cutoff, t);
        // explicit partial tail out to 6N
        const auto reach = static_cast<int>(6 * cutoff);
        double partial = 0.0;
        std::vector<int> k(d, -reach);
        while (true) {
          long s = 0;
          for (int x : k) s += static_cast<long>(x) * x;
          const double u = std::sqrt(static_cast<double>(s));
          if (u > cutoff && u <= 6 * cutoff) partial += std::pow(std::min(1.0, t * u), 2) * std::pow(u, -(d + 1));
          int axis = d - 1;
          while (axis >= 0 && ++k[axis] > reach) k[axis--] = -reach;
          if (axis < 0) break;
        }
        INFO("d=" << d << " t=" << t << " N=" << cutoff);
        CHECK(bound >= partial);
        CHECK(bound <= 4.0 * partial + 4.0 * unit_sphere_area(d) / (6 * cutoff));
      }
    }
  }
  CHECK(lattice_tail_sum(2, 10.0, 0.0) == 0.0);
  CHECK(lattice_tail_sum(2, 20.0, 0.1) < lattice_tail_sum(2, 10.0, 0.1));
}

TEST_CASE("Parseval on the square annulus converges to the exact variance", "[fourier]") {
  const Annulus ann(ConvexBody::box({1.0, 1.0}), 3.0, 0.125);
  CHECK(parseval_variance(Annulus(ConvexBody::box({1.0, 1.0}), 3.0, 0.0), 16).variance == 0.0);
  double previous_gap = 1e300;
  for (double cutoff : {16.0, 64.0, 256.0, 512.0}) {
    const auto p = parseval_variance(ann, cutoff);
    const double gap = 31.5 - p.variance;
    INFO("N=" << cutoff << " variance " << p.variance << " tail " << p.tail.bound);
    CHECK(gap >= 0.0);
    CHECK(gap <= p.tail.bound);
    CHECK(gap < previous_gap);
    CHECK(p.tail.method == "box-product-majorant");
    previous_gap = gap;
  }
  CHECK(parseval_variance(ann, 512).variance == Catch::Approx(31.5).epsilon(0.005));
}

TEST_CASE("Parseval agrees with grid sampling for smooth bodies", "[fourier]") {
  const std::vector<Annulus> cases = {Annulus(ConvexBody::ellipsoid({2.0, 1.0}), 3.0, 0.3),
                                      Annulus(wobbly_disk(), 4.0, 0.2)};
  for (const auto& ann : cases) {
    const auto p = parseval_variance(ann, 48);
    const auto m = sample_moments(ann, SamplingScheme::grid(256));
    INFO(ann.body.kind_name() << " parseval " << p.variance << " tail " << p.tail.bound << " grid " << m.variance);
    CHECK(std::abs(p.variance - m.variance) <= p.tail.bound + 0.02 * m.variance);
    CHECK(p.variance <= m.variance + 0.02 * m.variance);
    CHECK_FALSE(p.flagged);
  }
}

TEST_CASE("envelope constant does not grow with r", "[fourier]") {
  const int d = 2;
  for (double t : {0.02, 0.2, 0.6}) {
    std::vector<double> worst;
    for (double r : {4.0, 16.0, 64.0}) {
      const Annulus ann(ConvexBody::ball(2, 1.0), r, t);
      const AnnulusTransform ft(ann);
      double w = 0.0;
      const auto plan = shell_plan(60.0);
      for (std::int64_t k = 1; k <= plan.shells; ++k) {
        for_each_in_shell(d, k, plan.max_norm2, [&](const IVec& n) {
          const double rho = std::sqrt(static_cast<double>(n.norm2()));
          w = std::max(w, std::abs(ft.evaluate(n).value) / envelope(d, r, t, rho));
        });
      }
      worst.push_back(w);
    }
    INFO("t=" << t << " C(r) = " << worst[0] << ", " << worst[1] << ", " << worst[2]);
    CHECK(worst[2] < 1.5 * worst[0] + 0.1);
    CHECK(worst[2] < 3.0);
  }
}

TEST_CASE("Parseval tail is nonincreasing in N and dominates doubling", "[fourier]") {
  const Annulus ann(ConvexBody::ball(2, 1.0), 8.0, 0.05);
  const auto p1 = parseval_variance(ann, 40);
  const auto p2 = parseval_variance(ann, 80);
  const auto p3 = parseval_variance(ann, 160);
  CHECK(p2.tail.bound <= p1.tail.bound);
  CHECK(p3.tail.bound <= p2.tail.bound);
  CHECK(p2.variance - p1.variance <= p1.tail.bound);
  CHECK(p3.variance - p2.variance <= p2.tail.bound);
  CHECK(p2.tail.envelope_constant > 0.0);
}

TEST_CASE("Parseval is identical across worker counts", "[fourier]") {
  const Annulus ann(wobbly_disk(), 3.0, 0.2);
  const auto a = parseval_variance(ann, 24, ExecPolicy{1});
  const auto b = parseval_variance(ann, 24, ExecPolicy{3});
  CHECK(a.variance == b.variance);
  CHECK(a.tail.bound == b.tail.bound);
  CHECK(a.terms == b.terms);
  const auto coeffs = annulus_coefficients(ann, 5);
  CHECK(coeffs.size() == a.terms - (a.terms - coeffs.size()));
  CHECK(coeffs.front().frequency.norm2() == 1);
  CHECK(coeffs.front().method == CoefficientMethod::quadrature);
}
