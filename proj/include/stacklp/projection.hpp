#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "stacklp/types.hpp"

namespace stacklp {

// Euclidean projection onto the probability simplex {w >= 0, sum w = 1}.
// Sort-and-threshold: with u sorted descending, rho is the last index where
// u_rho - (sum_{i<=rho} u_i - 1) / rho > 0 and w = max(v - theta, 0).
template <typename Derived>
VectorX<typename Derived::Scalar> project_simplex(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const VectorX<Scalar> values = v;
  const Index k = values.size();
  if (k == 0) return {};
  std::vector<Scalar> u(values.data(), values.data() + k);
  std::sort(u.begin(), u.end(), std::greater<>());
  Scalar cumulative = 0;
  Scalar theta = 0;
  for (Index i = 0; i < k; ++i) {
    cumulative += u[static_cast<std::size_t>(i)];
    const Scalar t = (cumulative - Scalar(1)) / static_cast<Scalar>(i + 1);
    if (u[static_cast<std::size_t>(i)] - t > Scalar(0)) theta = t;
  }
  VectorX<Scalar> w = (values.array() - theta).max(Scalar(0)).matrix();
  // Absorb rounding so the coordinates sum to one.
  const Scalar total = w.sum();
  if (total > Scalar(0)) w /= total;
  return w;
}

}  // namespace stacklp
