#pragma once

#include <cassert>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "lagwall/algebra.hpp"

namespace lagwall {

// 1D node sets and quadrature on the unit interval [0,1], plus nodal
// Lagrange bases and their tensor products on the unit cell [0,1]^d.

namespace detail {

// Legendre P_n and P_n' on [-1,1].
inline void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace detail

struct Rule1D {
  std::vector<double> point;   // on [0,1]
  std::vector<double> weight;  // sums to 1
  int size() const { return static_cast<int>(point.size()); }
};

// n-point Gauss-Legendre rule, exact for degree 2n-1.
inline Rule1D gauss_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_rule: n must be positive");
  Rule1D r;
  r.point.resize(n);
  r.weight.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p = 0, dp = 0;
    for (int it = 0; it < 100; ++it) {
      detail::legendre(n, x, p, dp);
      double dx = -p / dp;
      x += dx;
      if (std::abs(dx) < 1e-16) break;
    }
    detail::legendre(n, x, p, dp);
    r.point[n - 1 - i] = 0.5 * (x + 1.0);
    r.weight[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

// Gauss-Legendre points alone (thermodynamic node placement).
inline std::vector<double> gauss_points(int n) { return gauss_rule(n).point; }

// p+1 Gauss-Lobatto points including both endpoints (kinematic nodes).
inline std::vector<double> lobatto_points(int degree) {
  if (degree < 1) throw std::invalid_argument("lobatto_points: degree >= 1");
  int n = degree + 1;
  std::vector<double> pts(n);
  pts.front() = 0.0;
  pts.back() = 1.0;
  // Interior points are the roots of P'_degree.
  for (int i = 1; i < degree; ++i) {
    double x = std::cos(M_PI * i / degree);
    for (int it = 0; it < 100; ++it) {
      double p = 0, dp = 0;
      detail::legendre(degree, x, p, dp);
      double ddp = (2.0 * x * dp - degree * (degree + 1) * p) / (1.0 - x * x);
      double dx = -dp / ddp;
      x += dx;
      if (std::abs(dx) < 1e-16) break;
    }
    pts[n - 1 - i] = 0.5 * (x + 1.0);
  }
  return pts;
}

// Nodal Lagrange basis on a strictly increasing 1D node set. Evaluation
// uses running products, exact at the nodes themselves (no division by
// x - x_j), so face traces hit Kronecker values bitwise.
class Lagrange1D {
 public:
  Lagrange1D() = default;
  explicit Lagrange1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    int n = size();
    baryw_.assign(n, 1.0);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (i != j) baryw_[j] /= nodes_[j] - nodes_[i];
  }

  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }

  void eval(double x, std::span<double> values,
            std::span<double> derivs = {}) const {
    int n = size();
    for (int j = 0; j < n; ++j) {
      double p = 1.0, dp = 0.0;
      for (int i = 0; i < n; ++i) {
        if (i == j) continue;
        double f = x - nodes_[i];
        dp = dp * f + p;
        p *= f;
      }
      values[j] = baryw_[j] * p;
      if (!derivs.empty()) derivs[j] = baryw_[j] * dp;
    }
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> baryw_;
};

// All n^D tensor-product values (and optionally reference gradients) at a
// point of the unit cell. Index ordering is lexicographic, first reference
// coordinate fastest.
template <int D>
inline void tensor_eval(const Lagrange1D& basis, const Vec<D>& xi,
                        std::span<double> values,
                        std::span<Vec<D>> grads = {}) {
  int n = basis.size();
  std::array<std::vector<double>, D> v, g;
  for (int d = 0; d < D; ++d) {
    v[d].resize(n);
    g[d].resize(n);
    basis.eval(xi[d], v[d], g[d]);
  }
  int total = 1;
  for (int d = 0; d < D; ++d) total *= n;
  for (int m = 0; m < total; ++m) {
    int rem = m;
    std::array<int, D> idx;
    for (int d = 0; d < D; ++d) {
      idx[d] = rem % n;
      rem /= n;
    }
    double val = 1.0;
    for (int d = 0; d < D; ++d) val *= v[d][idx[d]];
    values[m] = val;
    if (!grads.empty()) {
      for (int d = 0; d < D; ++d) {
        double gd = g[d][idx[d]];
        for (int e = 0; e < D; ++e)
          if (e != d) gd *= v[e][idx[e]];
        grads[m][d] = gd;
      }
    }
  }
}

// Tensor quadrature over [0,1]^D built from a 1D rule.
template <int D>
struct TensorRule {
  std::vector<Vec<D>> point;
  std::vector<double> weight;
  int size() const { return static_cast<int>(point.size()); }
};

template <int D>
inline TensorRule<D> tensor_rule(const Rule1D& r1) {
  TensorRule<D> r;
  int n = r1.size();
  int total = 1;
  for (int d = 0; d < D; ++d) total *= n;
  r.point.resize(total);
  r.weight.resize(total);
  for (int m = 0; m < total; ++m) {
    int rem = m;
    double w = 1.0;
    for (int d = 0; d < D; ++d) {
      int i = rem % n;
      rem /= n;
      r.point[m][d] = r1.point[i];
      w *= r1.weight[i];
    }
    r.weight[m] = w;
  }
  return r;
}

}  // namespace lagwall
