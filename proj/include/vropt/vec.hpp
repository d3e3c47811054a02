#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace vropt {

using DenseVec = std::vector<double>;

inline DenseVec zeros(std::size_t d) { return DenseVec(d, 0.0); }

inline double dot(const DenseVec& a, const DenseVec& b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
  return acc;
}

inline double squared_norm(const DenseVec& a) { return dot(a, a); }

inline double norm(const DenseVec& a) { return std::sqrt(squared_norm(a)); }

inline double l1_norm(const DenseVec& a) {
  double acc = 0.0;
  for (double v : a) acc += std::abs(v);
  return acc;
}

// y += a * x
inline void axpy(double a, const DenseVec& x, DenseVec& y) {
  for (std::size_t j = 0; j < x.size(); ++j) y[j] += a * x[j];
}

inline void scale(DenseVec& x, double a) {
  for (double& v : x) v *= a;
}

inline double squared_distance(const DenseVec& a, const DenseVec& b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double dj = a[j] - b[j];
    acc += dj * dj;
  }
  return acc;
}

inline double max_abs_diff(const DenseVec& a, const DenseVec& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

}  // namespace vropt
