// vec.hpp
//
// Small fixed-capacity real/integer vectors. The hot loops evaluate support
// functions hundreds of millions of times, so vectors live on the stack.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>

#include "latvar/numeric.hpp"

namespace latvar {

inline constexpr int kMaxDim = 8;

class Vec {
 public:
  Vec() = default;
  explicit Vec(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw DomainError("Vec: dimension out of range");
  }
  Vec(std::initializer_list<double> xs) : dim_(static_cast<int>(xs.size())) {
    if (dim_ < 1 || dim_ > kMaxDim) throw DomainError("Vec: dimension out of range");
    int i = 0;
    for (double x : xs) data_[i++] = x;
  }

  [[nodiscard]] int dim() const { return dim_; }
  double& operator[](int i) { return data_[i]; }
  double operator[](int i) const { return data_[i]; }
  [[nodiscard]] const double* begin() const { return data_.data(); }
  [[nodiscard]] const double* end() const { return data_.data() + dim_; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < dim_; ++i) data_[i] += o.data_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < dim_; ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < dim_; ++i) data_[i] *= s;
    return *this;
  }
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator-(Vec a) { return a *= -1.0; }

  [[nodiscard]] std::string str() const {
    std::string s = "(";
    for (int i = 0; i < dim_; ++i) {
      if (i) s += ", ";
      s += std::to_string(data_[i]);
    }
    return s + ")";
  }

 private:
  std::array<double, kMaxDim> data_{};
  int dim_ = 0;
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec normalized(const Vec& a) {
  const double n = norm(a);
  if (n == 0.0) throw DomainError("cannot normalise the zero vector");
  return (1.0 / n) * a;
}

inline Vec basis_vector(int dim, int axis) {
  Vec e(dim);
  e[axis] = 1.0;
  return e;
}

/// Two unit vectors completing `axis` (unit, d = 3) to an orthonormal frame.
inline std::pair<Vec, Vec> orthonormal_complement(const Vec& axis) {
  const Vec helper = std::abs(axis[0]) < 0.9 ? Vec{1.0, 0.0, 0.0} : Vec{0.0, 1.0, 0.0};
  Vec e1 = helper - dot(helper, axis) * axis;
  e1 = normalized(e1);
  const Vec e2{axis[1] * e1[2] - axis[2] * e1[1], axis[2] * e1[0] - axis[0] * e1[2],
               axis[0] * e1[1] - axis[1] * e1[0]};
  return {e1, e2};
}

/// Integer frequency / lattice vector.
class IVec {
 public:
  IVec() = default;
  explicit IVec(int dim) : dim_(dim) {}
  IVec(std::initializer_list<std::int64_t> xs) : dim_(static_cast<int>(xs.size())) {
    int i = 0;
    for (auto x : xs) data_[i++] = x;
  }
  [[nodiscard]] int dim() const { return dim_; }
  std::int64_t& operator[](int i) { return data_[i]; }
  std::int64_t operator[](int i) const { return data_[i]; }
  [[nodiscard]] std::int64_t norm2() const {
    std::int64_t s = 0;
    for (int i = 0; i < dim_; ++i) s += data_[i] * data_[i];
    return s;
  }
  [[nodiscard]] Vec real() const {
    Vec v(dim_);
    for (int i = 0; i < dim_; ++i) v[i] = static_cast<double>(data_[i]);
    return v;
  }
  [[nodiscard]] IVec operator-() const {
    IVec o(dim_);
    for (int i = 0; i < dim_; ++i) o[i] = -data_[i];
    return o;
  }

 private:
  std::array<std::int64_t, kMaxDim> data_{};
  int dim_ = 0;
};

}  // namespace latvar
