// oracle.hpp
//
// Ground truth for the acceptance suite.
//
// Square annuli (axis-parallel, Chebyshev gauge) in the plane:
//   variant A  n - t/2 < max|x_i| <= n + t/2
//   variant B  n       < max|x_i| <= n + t
// The count over translations takes three values with known measures, so
// mean and variance are exact. Arithmetic is done in exact rationals; any
// double t is a dyadic rational, so the golden values carry no rounding.
//
// brute_force_variance() is the naive reference: every translation of an
// offset grid, every lattice point of a bounding cube, a direct gauge test.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "latvar/convex_body.hpp"
#include "latvar/lattice_count.hpp"
#include "latvar/numeric.hpp"

namespace latvar {

using Rational = boost::multiprecision::cpp_rational;

enum class SquareVariant { A, B };

inline std::string to_string(SquareVariant v) { return v == SquareVariant::A ? "A" : "B"; }

struct ValueMeasure {
  std::int64_t value = 0;
  Rational measure;
};

struct SquareAnnulusStats {
  SquareVariant variant = SquareVariant::A;
  std::int64_t n = 1;
  double t = 0.0;
  Rational mean;
  Rational variance;
  std::vector<ValueMeasure> distribution;  // includes the zero value

  [[nodiscard]] double mean_value() const { return static_cast<double>(mean); }
  [[nodiscard]] double variance_value() const { return static_cast<double>(variance); }

  /// The annulus realising this variant with the unit-halfside box.
  [[nodiscard]] Annulus annulus() const {
    const auto square = ConvexBody::box({1.0, 1.0});
    const double nn = static_cast<double>(n);
    return variant == SquareVariant::A ? Annulus(square, nn, t) : Annulus(square, nn + 0.5 * t, t);
  }
};

inline SquareAnnulusStats square_stats(SquareVariant variant, std::int64_t n, double t) {
  if (n < 1) throw DomainError("square_stats: n must be >= 1");
  if (!(t > 0.0 && t < 0.5)) throw DomainError("square_stats: t must lie in (0, 1/2)");
  const Rational tt(t);
  const Rational nn(n);
  SquareAnnulusStats s;
  s.variant = variant;
  s.n = n;
  s.t = t;
  if (variant == SquareVariant::A) {
    s.distribution = {{8 * n, tt * tt}, {4 * n, 2 * tt - 2 * tt * tt}, {0, 1 - 2 * tt + tt * tt}};
    s.mean = 8 * nn * tt;
    s.variance = 32 * nn * nn * tt - 32 * nn * nn * tt * tt;
  } else {
    s.distribution = {{4 * n + 1, 4 * tt * tt}, {2 * n, 4 * tt - 8 * tt * tt}, {0, 1 - 4 * tt + 4 * tt * tt}};
    s.mean = 8 * nn * tt + 4 * tt * tt;
    s.variance = 16 * nn * nn * tt - 32 * nn * nn * tt * tt + 32 * nn * tt * tt - 64 * nn * tt * tt * tt +
                 4 * tt * tt - 16 * tt * tt * tt * tt;
  }
  return s;
}

/// Mean and variance recomputed from the value distribution, exactly.
inline std::pair<Rational, Rational> distribution_moments(const SquareAnnulusStats& s) {
  Rational mean = 0;
  for (const auto& vm : s.distribution) mean += vm.measure * vm.value;
  Rational var = 0;
  for (const auto& vm : s.distribution) {
    const Rational dev = Rational(vm.value) - mean;
    var += vm.measure * dev * dev;
  }
  return {mean, var};
}

/// Variance of the shell count over the offset M^d grid, by exhaustive
/// membership tests. Single-threaded.
inline double brute_force_variance(const Annulus& ann, std::uint64_t m) {
  if (m < 2) throw DomainError("brute_force_variance: M must be >= 2");
  const int d = ann.dim();
  const auto ext = sphere_extremes(ann.body);
  const auto reach = static_cast<std::int64_t>(std::ceil(ann.outer() * ext.max_support)) + 2;
  const double outer = ann.outer();
  const double inner = ann.inner();

  std::uint64_t total_nodes = 1;
  for (int i = 0; i < d; ++i) total_nodes *= m;

  std::vector<std::int64_t> counts(total_nodes);
  std::vector<std::int64_t> k(d);
  for (std::uint64_t node = 0; node < total_nodes; ++node) {
    Vec x(d);
    std::uint64_t rest = node;
    for (int axis = d - 1; axis >= 0; --axis) {
      x[axis] = (static_cast<double>(rest % m) + 0.5) / static_cast<double>(m);
      rest /= m;
    }
    std::int64_t count = 0;
    std::fill(k.begin(), k.end(), -reach);
    while (true) {
      Vec y(d);
      for (int i = 0; i < d; ++i) y[i] = static_cast<double>(k[i]) + x[i];
      const double g = gauge(ann.body, y);
      if (g > inner && g <= outer) ++count;
      int axis = d - 1;
      while (axis >= 0 && ++k[axis] > reach) {
        k[axis] = -reach;
        --axis;
      }
      if (axis < 0) break;
    }
    counts[node] = count;
  }
  long double sum = 0.0L;
  for (auto c : counts) sum += c;
  const long double mean = sum / static_cast<long double>(total_nodes);
  long double var = 0.0L;
  for (auto c : counts) var += (c - mean) * (c - mean);
  return static_cast<double>(var / static_cast<long double>(total_nodes));
}

}  // namespace latvar
