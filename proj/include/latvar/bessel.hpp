// bessel.hpp
//
// Bessel functions of the first kind J_nu(z) for integer and half-integer
// orders nu >= 0 and real z >= 0, the only orders the ball transforms need
// (nu = d/2).
//
//   small z          power series of J_nu(z) / z^nu
//   half-integer     spherical Bessel closed forms, upward recurrence (z > m)
//   integer, mid z   Miller backward recurrence normalised by J_0 + 2 sum J_2k = 1
//   integer, large z Hankel asymptotic expansion
//
// The integer-order crossover between Miller and Hankel sits at z = 30, where
// the smallest Hankel term is far below double epsilon for the orders in use.

#pragma once

#include <cmath>
#include <string>

#include "latvar/numeric.hpp"

namespace latvar {

namespace detail {

inline constexpr double kBesselSeriesMaxZ = 2.0;
inline constexpr double kBesselHankelMinZ = 30.0;

inline int twice_order(double nu) {
  const double two_nu = 2.0 * nu;
  const double rounded = std::round(two_nu);
  if (nu < 0.0 || std::abs(two_nu - rounded) > 1e-12 || rounded > 400.0) {
    throw DomainError("bessel_j: order must be a nonnegative integer or half-integer, got " +
                      std::to_string(nu));
  }
  return static_cast<int>(rounded);
}

// sum_k (-z^2/4)^k / (k! Gamma(nu+k+1)) / 2^nu  ==  J_nu(z) / z^nu
inline double bessel_scaled_series(double nu, double z) {
  const double q = -0.25 * z * z;
  double term = 1.0 / (std::tgamma(nu + 1.0) * std::pow(2.0, nu));
  CompensatedSum sum;
  sum.add(term);
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * (nu + k));
    sum.add(term);
    if (std::abs(term) < 1e-18 * std::abs(sum.value())) break;
  }
  return sum.value();
}

inline double bessel_hankel(double nu, double z) {
  const double mu = 4.0 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double last = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * 8.0 * z);
    if (term == 0.0) break;
    if (std::abs(term) > last && k > 2) break;  // asymptotic series started diverging
    last = std::abs(term);
    // a_k / z^k contributes to P (even k) or Q (odd k) with sign (-1)^{floor(k/2)}
    const double signed_term = ((k / 2) % 2 == 0) ? term : -term;
    if (k % 2 == 0) {
      p += signed_term;
    } else {
      q += signed_term;
    }
    if (std::abs(term) < 1e-17) break;
  }
  const double chi = z - (0.5 * nu + 0.25) * kPi;
  return std::sqrt(2.0 / (kPi * z)) * (p * std::cos(chi) - q * std::sin(chi));
}

inline double bessel_miller(int n, double z) {
  const double top = std::max(static_cast<double>(n), z);
  int start = static_cast<int>(top + 20.0 + std::sqrt(40.0 * top));
  if (start % 2 != 0) ++start;
  double above = 0.0;
  double current = 1e-30;
  double wanted = 0.0;
  double norm = 0.0;
  for (int k = start; k > 0; --k) {
    const double below = (2.0 * k / z) * current - above;
    above = current;
    current = below;  // now holds J_{k-1} (unnormalised)
    if (k - 1 == n) wanted = current;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * current;
    if (std::abs(current) > 1e250) {
      above *= 1e-250;
      current *= 1e-250;
      wanted *= 1e-250;
      norm *= 1e-250;
    }
  }
  norm += current;  // J_0
  return wanted / norm;
}

// J_{m+1/2}(z) for z > m via spherical Bessel upward recurrence.
inline double bessel_half_integer(int m, double z) {
  const double s = std::sin(z);
  const double c = std::cos(z);
  double j_prev = s / z;
  if (m == 0) return std::sqrt(2.0 * z / kPi) * j_prev;
  double j_cur = s / (z * z) - c / z;
  for (int l = 1; l < m; ++l) {
    const double j_next = (2.0 * l + 1.0) / z * j_cur - j_prev;
    j_prev = j_cur;
    j_cur = j_next;
  }
  return std::sqrt(2.0 * z / kPi) * j_cur;
}

}  // namespace detail

/// J_nu(z) for nu in {0, 1/2, 1, 3/2, ...} and z >= 0.
inline double bessel_j(double nu, double z) {
  const int two_nu = detail::twice_order(nu);
  if (!(z >= 0.0)) throw DomainError("bessel_j: argument must be nonnegative");
  if (z == 0.0) return two_nu == 0 ? 1.0 : 0.0;
  if (two_nu % 2 == 1) {
    const int m = two_nu / 2;
    if (z <= std::max(detail::kBesselSeriesMaxZ, static_cast<double>(m) + 1.0)) {
      return detail::bessel_scaled_series(nu, z) * std::pow(z, nu);
    }
    return detail::bessel_half_integer(m, z);
  }
  const int n = two_nu / 2;
  if (z <= detail::kBesselSeriesMaxZ) return detail::bessel_scaled_series(nu, z) * std::pow(z, nu);
  if (z < detail::kBesselHankelMinZ || z < 2.0 * n * n) return detail::bessel_miller(n, z);
  return detail::bessel_hankel(nu, z);
}

/// J_nu(z) / z^nu, continuous at z = 0 where it equals 1 / (2^nu Gamma(nu + 1)).
inline double bessel_j_scaled(double nu, double z) {
  detail::twice_order(nu);
  if (!(z >= 0.0)) throw DomainError("bessel_j_scaled: argument must be nonnegative");
  if (z <= detail::kBesselSeriesMaxZ) return detail::bessel_scaled_series(nu, z);
  return bessel_j(nu, z) / std::pow(z, nu);
}

}  // namespace latvar
