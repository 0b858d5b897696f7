#pragma once

// Small dense complex linear algebra for fixed dimensions 2, 4 and 8.
// Everything the simulator needs fits in these sizes: single qubits (2),
// the two-OAM-qubit channel and one photon carrying two DoFs (4), and the
// composite input-qubit x channel space (8).

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>

namespace qst {

using cplx = std::complex<double>;

inline constexpr double kNormTol = 1e-9;   // unit-norm / trace checks
inline constexpr double kPruneTol = 1e-12; // amplitudes below this are dropped

template <std::size_t N>
using Vec = std::array<cplx, N>;

using Vec2 = Vec<2>;
using Vec4 = Vec<4>;
using Vec8 = Vec<8>;

// <x|y>, conjugate-linear in the first argument.
template <std::size_t N>
inline cplx inner(const Vec<N>& x, const Vec<N>& y) {
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < N; ++i) s += std::conj(x[i]) * y[i];
  return s;
}

template <std::size_t N>
inline double norm(const Vec<N>& x) {
  return std::sqrt(inner(x, x).real());
}

template <std::size_t N>
inline Vec<N> normalized(Vec<N> x) {
  const double n = norm(x);
  if (n < kPruneTol) throw std::invalid_argument("normalized: zero vector");
  for (auto& c : x) c /= n;
  return x;
}

template <std::size_t N>
inline Vec<N> scaled(Vec<N> x, cplx s) {
  for (auto& c : x) c *= s;
  return x;
}

template <std::size_t N>
inline Vec<N> add(Vec<N> x, const Vec<N>& y) {
  for (std::size_t i = 0; i < N; ++i) x[i] += y[i];
  return x;
}

// |<x|y>| for equality checks that must ignore a global phase.
template <std::size_t N>
inline double overlap_magnitude(const Vec<N>& x, const Vec<N>& y) {
  return std::abs(inner(x, y)) / (norm(x) * norm(y));
}

template <std::size_t N>
class SquareMatrix {
 public:
  SquareMatrix() : a_{} {}

  static SquareMatrix zero() { return SquareMatrix(); }

  static SquareMatrix identity() {
    SquareMatrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
    return m;
  }

  cplx& operator()(std::size_t r, std::size_t c) { return a_[r * N + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return a_[r * N + c]; }

  SquareMatrix& operator+=(const SquareMatrix& o) {
    for (std::size_t i = 0; i < N * N; ++i) a_[i] += o.a_[i];
    return *this;
  }

  SquareMatrix& operator*=(cplx s) {
    for (auto& v : a_) v *= s;
    return *this;
  }

  friend SquareMatrix operator+(SquareMatrix x, const SquareMatrix& y) { return x += y; }
  friend SquareMatrix operator*(cplx s, SquareMatrix m) { return m *= s; }

  friend SquareMatrix operator*(const SquareMatrix& x, const SquareMatrix& y) {
    SquareMatrix r;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < N; ++k) {
        const cplx xik = x(i, k);
        if (xik == cplx{}) continue;
        for (std::size_t j = 0; j < N; ++j) r(i, j) += xik * y(k, j);
      }
    return r;
  }

  SquareMatrix adjoint() const {
    SquareMatrix r;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) r(i, j) = std::conj((*this)(j, i));
    return r;
  }

  cplx trace() const {
    cplx t{};
    for (std::size_t i = 0; i < N; ++i) t += (*this)(i, i);
    return t;
  }

  Vec<N> apply(const Vec<N>& v) const {
    Vec<N> r{};
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) r[i] += (*this)(i, j) * v[j];
    return r;
  }

  double max_abs_diff(const SquareMatrix& o) const {
    double d = 0.0;
    for (std::size_t i = 0; i < N * N; ++i) d = std::max(d, std::abs(a_[i] - o.a_[i]));
    return d;
  }

 private:
  std::array<cplx, N * N> a_;
};

using Mat2 = SquareMatrix<2>;
using Mat4 = SquareMatrix<4>;
using Mat8 = SquareMatrix<8>;

// |x><x|
template <std::size_t N>
inline SquareMatrix<N> outer(const Vec<N>& x) {
  SquareMatrix<N> m;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) m(i, j) = x[i] * std::conj(x[j]);
  return m;
}

// <x|M|x>
template <std::size_t N>
inline cplx quadratic_form(const Vec<N>& x, const SquareMatrix<N>& m) {
  return inner(x, m.apply(x));
}

template <std::size_t NA, std::size_t NB>
inline SquareMatrix<NA * NB> kron(const SquareMatrix<NA>& a, const SquareMatrix<NB>& b) {
  SquareMatrix<NA * NB> r;
  for (std::size_t i = 0; i < NA; ++i)
    for (std::size_t j = 0; j < NA; ++j)
      for (std::size_t k = 0; k < NB; ++k)
        for (std::size_t l = 0; l < NB; ++l)
          r(i * NB + k, j * NB + l) = a(i, j) * b(k, l);
  return r;
}

template <std::size_t NA, std::size_t NB>
inline Vec<NA * NB> kron(const Vec<NA>& a, const Vec<NB>& b) {
  Vec<NA * NB> r{};
  for (std::size_t i = 0; i < NA; ++i)
    for (std::size_t k = 0; k < NB; ++k) r[i * NB + k] = a[i] * b[k];
  return r;
}

template <std::size_t N>
inline bool is_hermitian(const SquareMatrix<N>& m, double tol = kNormTol) {
  return m.max_abs_diff(m.adjoint()) <= tol;
}

// Eigenvalues of a 2x2 Hermitian matrix, ascending.
inline std::array<double, 2> hermitian_eigenvalues(const Mat2& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const double mean = 0.5 * (a + d);
  const double r = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(m(0, 1)));
  return {mean - r, mean + r};
}

// (1/2) * sum |eig(A - B)| for 2x2 Hermitian A, B.
inline double trace_distance(const Mat2& a, const Mat2& b) {
  Mat2 d = a + (cplx{-1.0, 0.0} * b);
  const auto eig = hermitian_eigenvalues(d);
  return 0.5 * (std::abs(eig[0]) + std::abs(eig[1]));
}

}  // namespace qst
