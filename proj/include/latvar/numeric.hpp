// numeric.hpp
//
// Shared numerical plumbing: error types, compensated accumulation, a
// counter-based random generator and a fixed-chunk parallel runner.
//
// Every parallel loop in the library goes through for_each_chunk(): work is
// split into chunks whose boundaries depend only on the problem size, each
// chunk writes its own slot, and the caller reduces the slots in index order.
// Results are therefore bit-identical for any worker count.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace latvar {

inline constexpr double kPi = std::numbers::pi;

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Operation not defined for this body kind (e.g. curvature of a box).
class UnsupportedKind : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input failed a validation gate (bad body coefficients, bad config).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrature or series could not reach the requested accuracy within budget.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  void merge(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Sums in index order with compensation.
inline double ordered_sum(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

// ---------------------------------------------------------------------------
// Counter-based generator: the i-th draw of a stream depends only on
// (seed, i), never on which worker produced it.

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : key_(splitmix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

  [[nodiscard]] constexpr std::uint64_t bits(std::uint64_t counter) const {
    return splitmix64(key_ ^ splitmix64(counter));
  }

  /// Uniform double in [0, 1) with 53 random bits.
  [[nodiscard]] constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
};

// ---------------------------------------------------------------------------
// Parallel execution.

struct ExecPolicy {
  int workers = 1;
};

/// Runs body(chunk_index) for chunk_index in [0, chunks). Chunks may run in
/// any order on any thread; each must write only its own output slot.
inline void for_each_chunk(std::size_t chunks, const ExecPolicy& policy,
                           const std::function<void(std::size_t)>& body) {
#ifdef _OPENMP
  const int workers = policy.workers < 1 ? 1 : policy.workers;
  if (workers > 1 && chunks > 1) {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
      try {
        body(static_cast<std::size_t>(c));
      } catch (...) {
#pragma omp critical(latvar_chunk_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
    return;
  }
#endif
  (void)policy;
  for (std::size_t c = 0; c < chunks; ++c) body(c);
}

/// Fixed chunk size: depends on the problem size only.
inline std::size_t chunk_count(std::size_t n, std::size_t chunk) {
  return n == 0 ? 0 : (n + chunk - 1) / chunk;
}

/// Relative difference |a - b| / max(|a|, |b|, floor).
inline double rel_diff(double a, double b, double floor = 1e-300) {
  const double scale = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / scale;
}

/// Surface area of the unit sphere S^{d-1}.
inline double unit_sphere_area(int d) {
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

/// Volume of the unit ball in R^d.
inline double unit_ball_volume(int d) {
  return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

}  // namespace latvar
