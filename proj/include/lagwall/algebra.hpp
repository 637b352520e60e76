#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace lagwall {

// Fixed-size point/matrix types for d in {2,3}. Dof vectors are plain
// std::vector<double>; kinematic fields interleave components (node*D + i).

template <int D>
struct Vec {
  std::array<double, D> a{};

  double& operator[](int i) { return a[i]; }
  double operator[](int i) const { return a[i]; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < D; ++i) a[i] += o.a[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < D; ++i) a[i] -= o.a[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < D; ++i) a[i] *= s;
    return *this;
  }

  friend Vec operator+(Vec x, const Vec& y) { return x += y; }
  friend Vec operator-(Vec x, const Vec& y) { return x -= y; }
  friend Vec operator*(double s, Vec x) { return x *= s; }
  friend Vec operator*(Vec x, double s) { return x *= s; }

  friend double dot(const Vec& x, const Vec& y) {
    double s = 0;
    for (int i = 0; i < D; ++i) s += x.a[i] * y.a[i];
    return s;
  }
  friend double norm(const Vec& x) { return std::sqrt(dot(x, x)); }
};

template <int D>
inline Vec<D> normalized(Vec<D> v) {
  double n = norm(v);
  if (n > 0) v *= 1.0 / n;
  return v;
}

// Row-major d x d matrix.
template <int D>
struct Mat {
  std::array<double, D * D> a{};

  double& operator()(int i, int j) { return a[i * D + j]; }
  double operator()(int i, int j) const { return a[i * D + j]; }

  static Mat identity() {
    Mat m;
    for (int i = 0; i < D; ++i) m(i, i) = 1.0;
    return m;
  }

  Mat& operator+=(const Mat& o) {
    for (int i = 0; i < D * D; ++i) a[i] += o.a[i];
    return *this;
  }
  Mat& operator*=(double s) {
    for (int i = 0; i < D * D; ++i) a[i] *= s;
    return *this;
  }
  friend Mat operator+(Mat x, const Mat& y) { return x += y; }
  friend Mat operator*(double s, Mat x) { return x *= s; }

  friend Vec<D> operator*(const Mat& m, const Vec<D>& v) {
    Vec<D> r;
    for (int i = 0; i < D; ++i) {
      double s = 0;
      for (int j = 0; j < D; ++j) s += m(i, j) * v[j];
      r[i] = s;
    }
    return r;
  }
  friend Mat operator*(const Mat& x, const Mat& y) {
    Mat r;
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) {
        double s = 0;
        for (int k = 0; k < D; ++k) s += x(i, k) * y(k, j);
        r(i, j) = s;
      }
    return r;
  }
};

template <int D>
inline Mat<D> transposed(const Mat<D>& m) {
  Mat<D> t;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) t(i, j) = m(j, i);
  return t;
}

template <int D>
inline double trace(const Mat<D>& m) {
  double s = 0;
  for (int i = 0; i < D; ++i) s += m(i, i);
  return s;
}

template <int D>
inline double frobenius_norm(const Mat<D>& m) {
  double s = 0;
  for (double v : m.a) s += v * v;
  return std::sqrt(s);
}

// a : b = sum_ij a_ij b_ij
template <int D>
inline double ddot(const Mat<D>& x, const Mat<D>& y) {
  double s = 0;
  for (int i = 0; i < D * D; ++i) s += x.a[i] * y.a[i];
  return s;
}

inline double det(const Mat<2>& m) { return m.a[0] * m.a[3] - m.a[1] * m.a[2]; }

inline double det(const Mat<3>& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

inline Mat<2> inverse(const Mat<2>& m) {
  double d = det(m);
  Mat<2> r;
  r.a = {m.a[3] / d, -m.a[1] / d, -m.a[2] / d, m.a[0] / d};
  return r;
}

inline Mat<3> inverse(const Mat<3>& m) {
  double d = det(m);
  Mat<3> r;
  r(0, 0) = (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) / d;
  r(0, 1) = (m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2)) / d;
  r(0, 2) = (m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1)) / d;
  r(1, 0) = (m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2)) / d;
  r(1, 1) = (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) / d;
  r(1, 2) = (m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2)) / d;
  r(2, 0) = (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)) / d;
  r(2, 1) = (m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1)) / d;
  r(2, 2) = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) / d;
  return r;
}

// Eigen-decomposition of a symmetric matrix. Returns eigenvalues in
// ascending order with matching unit eigenvectors.
template <int D>
struct SymEig {
  std::array<double, D> value{};
  std::array<Vec<D>, D> vector{};
};

inline SymEig<2> sym_eig(const Mat<2>& m) {
  SymEig<2> r;
  double a = m(0, 0), b = 0.5 * (m(0, 1) + m(1, 0)), c = m(1, 1);
  double mean = 0.5 * (a + c);
  double disc = std::sqrt(std::fmax(0.25 * (a - c) * (a - c) + b * b, 0.0));
  r.value = {mean - disc, mean + disc};
  if (disc == 0.0) {
    r.vector[0] = {1.0, 0.0};
    r.vector[1] = {0.0, 1.0};
    return r;
  }
  // Eigenvector from the numerically larger residual row.
  Vec<2> v0;
  if (std::abs(a - r.value[0]) > std::abs(c - r.value[0]))
    v0 = normalized(Vec<2>{-b, a - r.value[0]});
  else
    v0 = normalized(Vec<2>{c - r.value[0], -b});
  r.vector[0] = v0;
  r.vector[1] = {-v0[1], v0[0]};
  return r;
}

// Cyclic Jacobi sweeps; exact enough for viscosity directions and unit tests.
inline SymEig<3> sym_eig(const Mat<3>& m) {
  Mat<3> a = m;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      double s = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = a(j, i) = s;
    }
  Mat<3> q = Mat<3>::identity();
  for (int sweep = 0; sweep < 32; ++sweep) {
    double off = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30 * (1.0 + frobenius_norm(a))) break;
    for (int p = 0; p < 3; ++p)
      for (int qi = p + 1; qi < 3; ++qi) {
        if (a(p, qi) == 0.0) continue;
        double theta = (a(qi, qi) - a(p, p)) / (2.0 * a(p, qi));
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        Mat<3> g = Mat<3>::identity();
        g(p, p) = c;
        g(qi, qi) = c;
        g(p, qi) = s;
        g(qi, p) = -s;
        a = transposed(g) * a * g;
        q = q * g;
      }
  }
  SymEig<3> r;
  std::array<int, 3> ord = {0, 1, 2};
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (a(ord[j], ord[j]) < a(ord[i], ord[i])) std::swap(ord[i], ord[j]);
  for (int i = 0; i < 3; ++i) {
    r.value[i] = a(ord[i], ord[i]);
    for (int k = 0; k < 3; ++k) r.vector[i][k] = q(k, ord[i]);
  }
  return r;
}

// Smallest singular value, used as a directional mesh length scale.
inline double min_singular_value(const Mat<2>& m) {
  Mat<2> g = transposed(m) * m;
  return std::sqrt(std::fmax(sym_eig(g).value[0], 0.0));
}

inline double min_singular_value(const Mat<3>& m) {
  Mat<3> g = transposed(m) * m;
  return std::sqrt(std::fmax(sym_eig(g).value[0], 0.0));
}

// Dof-vector helpers.
inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline double max_abs(std::span<const double> x) {
  double m = 0;
  for (double v : x) m = std::fmax(m, std::abs(v));
  return m;
}

}  // namespace lagwall
