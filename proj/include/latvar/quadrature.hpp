// quadrature.hpp
//
// Quadrature rules used across the library:
//   - Gauss-Legendre nodes on [-1, 1] (Newton iteration on P_n)
//   - adaptive Gauss-Kronrod (7/15) on finite intervals
//   - sphere rules: trapezoid on the circle (d = 2), Gauss-Legendre in the
//     polar cosine times trapezoid in azimuth (d = 3), with an optional
//     polar axis so integrands symmetric about a direction converge fast.

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "latvar/numeric.hpp"
#include "latvar/vec.hpp"

namespace latvar {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
inline GaussRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod.

struct IntegralResult {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

// Kronrod 15-point abscissae (positive half) and weights; Gauss 7 weights
// for the embedded odd-indexed nodes.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline IntegralResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double fsum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * fsum;
    if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

inline void adaptive_recurse(const std::function<double(double)>& f, double a, double b,
                             double tol, int depth, IntegralResult& acc, CompensatedSum& sum) {
  const IntegralResult whole = gk15(f, a, b);
  if (whole.error <= tol || depth >= 40 || b - a < 1e-14 * (1.0 + std::abs(a))) {
    sum.add(whole.value);
    acc.error += whole.error;
    return;
  }
  const double mid = 0.5 * (a + b);
  adaptive_recurse(f, a, mid, 0.5 * tol, depth + 1, acc, sum);
  adaptive_recurse(f, mid, b, 0.5 * tol, depth + 1, acc, sum);
}

}  // namespace detail

/// Adaptive 7/15 Gauss-Kronrod with bisection until the local error estimate
/// falls below the share of abs_tol assigned to each panel.
inline IntegralResult integrate_adaptive(const std::function<double(double)>& f, double a,
                                         double b, double abs_tol) {
  IntegralResult acc;
  CompensatedSum sum;
  detail::adaptive_recurse(f, a, b, abs_tol, 0, acc, sum);
  acc.value = sum.value();
  return acc;
}

// ---------------------------------------------------------------------------
// Sphere rules.

struct SphereNode {
  Vec direction;
  double weight = 0.0;
};

/// Trapezoid rule on the unit circle with m equispaced angles, starting at
/// angle `phase`. Exact for trigonometric polynomials of degree < m.
inline std::vector<SphereNode> circle_rule(int m, double phase = 0.0) {
  std::vector<SphereNode> out;
  out.reserve(m);
  const double w = 2.0 * kPi / m;
  for (int j = 0; j < m; ++j) {
    const double a = phase + w * j;
    out.push_back({Vec{std::cos(a), std::sin(a)}, w});
  }
  return out;
}

/// Product rule on S^2: Gauss-Legendre in cos(polar) x trapezoid in azimuth,
/// with polar axis `axis` (unit vector).
inline std::vector<SphereNode> sphere_rule(int polar_nodes, int azimuth_nodes,
                                           const Vec& axis = Vec{0.0, 0.0, 1.0}) {
  const auto [e1, e2] = orthonormal_complement(axis);
  const GaussRule gl = gauss_legendre(polar_nodes);
  std::vector<SphereNode> out;
  out.reserve(static_cast<std::size_t>(polar_nodes) * azimuth_nodes);
  const double wa = 2.0 * kPi / azimuth_nodes;
  for (int i = 0; i < polar_nodes; ++i) {
    const double c = gl.nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int j = 0; j < azimuth_nodes; ++j) {
      const double a = wa * j;
      const Vec u = c * axis + (s * std::cos(a)) * e1 + (s * std::sin(a)) * e2;
      out.push_back({u, gl.weights[i] * wa});
    }
  }
  return out;
}

/// Default rule on S^{d-1} for smooth integrands (d = 2 or 3).
inline std::vector<SphereNode> default_sphere_rule(int d, int resolution = 256) {
  if (d == 2) return circle_rule(resolution);
  if (d == 3) return sphere_rule(resolution / 2, resolution);
  throw DomainError("sphere rules are provided for d = 2 and d = 3 only");
}

}  // namespace latvar
