// Copyright 2026 The oqsonic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense complex operators, states and the Hermitian eigensolver contract.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oqsonic/errors.hpp"

namespace oqs {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

namespace tol {
inline constexpr double kHermiticity = 1e-10;
inline constexpr double kTrace = 1e-8;
inline constexpr double kPositivity = 1e-8;
inline constexpr double kNorm = 1e-10;
inline constexpr double kUnitarity = 1e-8;
}  // namespace tol

inline constexpr Index kDefaultMaxDim = 4096;

inline double max_norm(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_residue(const Matrix& m) {
  return max_norm(m - m.adjoint());
}

// Square complex matrix, dim >= 1.
class Operator {
 public:
  explicit Operator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols()) {
      throw DimensionError("operator must be square with dim >= 1, got " +
                           std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
    }
  }

  static Operator identity(Index dim) { return Operator(Matrix::Identity(dim, dim)); }
  static Operator zero(Index dim) { return Operator(Matrix::Zero(dim, dim)); }
  static Operator diagonal(const Eigen::VectorXd& d) {
    return Operator(Matrix(d.cast<Complex>().asDiagonal()));
  }

  Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  Complex operator()(Index i, Index j) const { return m_(i, j); }

  bool is_hermitian(double tolerance = tol::kHermiticity) const {
    return hermiticity_residue(m_) <= tolerance;
  }

  Operator& operator+=(const Operator& o) {
    check_same(o);
    m_ += o.m_;
    return *this;
  }
  Operator& operator-=(const Operator& o) {
    check_same(o);
    m_ -= o.m_;
    return *this;
  }
  Operator& operator*=(Complex s) {
    m_ *= s;
    return *this;
  }

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(Operator a, Complex s) { return a *= s; }
  friend Operator operator*(Complex s, Operator a) { return a *= s; }
  friend Operator operator*(const Operator& a, const Operator& b) {
    a.check_same(b);
    return Operator(a.m_ * b.m_);
  }
  friend bool operator==(const Operator& a, const Operator& b) {
    return a.dim() == b.dim() && a.m_ == b.m_;
  }

  void check_same(const Operator& o) const {
    if (o.dim() != dim()) {
      throw DimensionError("dimension mismatch: " + std::to_string(dim()) + " vs " +
                           std::to_string(o.dim()));
    }
  }

 private:
  Matrix m_;
};

inline Operator dagger(const Operator& a) { return Operator(a.matrix().adjoint()); }

inline Operator kron(const Operator& a, const Operator& b, Index max_dim = kDefaultMaxDim) {
  const Index da = a.dim();
  const Index db = b.dim();
  if (da > max_dim / db) {
    throw ModelTooLarge("kron dimension " + std::to_string(da) + "*" + std::to_string(db) +
                        " exceeds dense limit " + std::to_string(max_dim));
  }
  Matrix out(da * db, da * db);
  for (Index i = 0; i < da; ++i) {
    for (Index j = 0; j < da; ++j) {
      out.block(i * db, j * db, db, db) = a(i, j) * b.matrix();
    }
  }
  return Operator(std::move(out));
}

inline Operator commutator(const Operator& a, const Operator& b) {
  a.check_same(b);
  return Operator(a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

inline Operator anticommutator(const Operator& a, const Operator& b) {
  a.check_same(b);
  return Operator(a.matrix() * b.matrix() + b.matrix() * a.matrix());
}

inline Complex trace(const Operator& a) { return a.matrix().trace(); }

// Ascending spectrum of a Hermitian operator. `vectors` keeps all columns;
// `rank` marks how many of the lowest levels are in use.
struct EnergyBasis {
  Eigen::VectorXd energies;
  Matrix vectors;
  Index rank = 0;

  Index dim() const noexcept { return vectors.rows(); }
  Matrix truncated() const { return vectors.leftCols(rank); }
  Eigen::VectorXd truncated_energies() const { return energies.head(rank); }

  EnergyBasis with_rank(Index r) const {
    if (r < 1 || r > dim()) {
      throw InvalidParameter("basis rank " + std::to_string(r) + " outside [1, " +
                             std::to_string(dim()) + "]");
    }
    EnergyBasis b = *this;
    b.rank = r;
    return b;
  }
};

namespace detail {

// Rotates the column so that its largest-modulus entry is real and >= 0.
inline void fix_gauge(Eigen::Ref<Vector> v) {
  Index best = 0;
  double best_abs = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best_abs * (1.0 + 1e-12)) {
      best_abs = a;
      best = i;
    }
  }
  if (best_abs > 0.0) v *= std::conj(v(best)) / best_abs;
}

inline bool lex_less(const Vector& a, const Vector& b, double eps) {
  for (Index i = 0; i < a.size(); ++i) {
    if (std::abs(a(i).real() - b(i).real()) > eps) return a(i).real() < b(i).real();
    if (std::abs(a(i).imag() - b(i).imag()) > eps) return a(i).imag() < b(i).imag();
  }
  return false;
}

}  // namespace detail

// Eigen-decomposes a Hermitian operator. Eigenvalues ascend; within a
// degenerate cluster columns are ordered lexicographically after gauge fixing.
inline EnergyBasis hermitian_eig(const Operator& h) {
  const double residue = hermiticity_residue(h.matrix());
  if (residue > tol::kHermiticity) {
    throw HermiticityError("hermitian_eig requires a Hermitian operator", residue);
  }
  const Matrix sym = 0.5 * (h.matrix() + h.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericalFailure("eigensolver did not converge");

  EnergyBasis out;
  out.energies = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  out.rank = h.dim();
  for (Index c = 0; c < out.vectors.cols(); ++c) detail::fix_gauge(out.vectors.col(c));

  const double scale = std::max(1.0, max_norm(sym));
  const double degenerate = 1e-12 * scale;
  const Index n = out.energies.size();
  Index start = 0;
  while (start < n) {
    Index end = start + 1;
    while (end < n && out.energies(end) - out.energies(end - 1) <= degenerate) ++end;
    if (end - start > 1) {
      std::vector<Index> order(static_cast<std::size_t>(end - start));
      std::iota(order.begin(), order.end(), start);
      std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return detail::lex_less(out.vectors.col(a), out.vectors.col(b), 1e-12);
      });
      Matrix cols(n, end - start);
      Eigen::VectorXd vals(end - start);
      for (Index k = 0; k < end - start; ++k) {
        cols.col(k) = out.vectors.col(order[static_cast<std::size_t>(k)]);
        vals(k) = out.energies(order[static_cast<std::size_t>(k)]);
      }
      out.vectors.middleCols(start, end - start) = cols;
      out.energies.segment(start, end - start) = vals;
    }
    start = end;
  }
  return out;
}

inline double min_eigenvalue(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (hermitian + hermitian.adjoint()),
                                               Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

// Pure state |psi>, normalized to 1.
class StateVector {
 public:
  explicit StateVector(Vector amplitudes) : a_(std::move(amplitudes)) {
    if (a_.size() < 1) throw DimensionError("state vector must have dim >= 1");
    normalize();
  }

  Index dim() const noexcept { return a_.size(); }
  const Vector& amplitudes() const noexcept { return a_; }
  double norm() const { return a_.norm(); }

  static StateVector basis(Index dim, Index k) {
    if (k < 0 || k >= dim) throw DimensionError("basis index out of range");
    Vector v = Vector::Zero(dim);
    v(k) = 1.0;
    return StateVector(std::move(v));
  }

 private:
  void normalize() {
    const double n = a_.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericalFailure("cannot normalize zero state");
    a_ /= n;
  }

  Vector a_;
};

struct DensityCheck {
  double hermiticity = 0.0;
  double trace_error = 0.0;
  double min_eigenvalue = 0.0;

  bool ok() const {
    return hermiticity <= tol::kHermiticity && trace_error <= tol::kTrace &&
           min_eigenvalue >= -tol::kPositivity;
  }
};

inline DensityCheck check_density(const Matrix& m) {
  DensityCheck c;
  c.hermiticity = hermiticity_residue(m);
  c.trace_error = std::abs(m.trace() - Complex(1.0, 0.0));
  c.min_eigenvalue = min_eigenvalue(m);
  return c;
}

// Hermitian, unit-trace, positive semidefinite operator.
class DensityMatrix {
 public:
  explicit DensityMatrix(Operator op) : op_(std::move(op)) {
    const DensityCheck c = check_density(op_.matrix());
    if (c.hermiticity > tol::kHermiticity) {
      throw HermiticityError("density matrix is not Hermitian", c.hermiticity);
    }
    if (c.trace_error > tol::kTrace) {
      throw NumericalFailure("density matrix trace deviates from 1 by " +
                             std::to_string(c.trace_error));
    }
    if (c.min_eigenvalue < -tol::kPositivity) {
      throw NumericalFailure("density matrix has negative eigenvalue " +
                             std::to_string(c.min_eigenvalue));
    }
  }

  static DensityMatrix pure(const StateVector& psi) {
    const Vector& a = psi.amplitudes();
    return DensityMatrix(Operator(a * a.adjoint()));
  }

  static DensityMatrix maximally_mixed(Index dim) {
    return DensityMatrix(Operator(Matrix::Identity(dim, dim) / static_cast<double>(dim)));
  }

  Index dim() const noexcept { return op_.dim(); }
  const Operator& op() const noexcept { return op_; }
  const Matrix& matrix() const noexcept { return op_.matrix(); }
  Complex operator()(Index i, Index j) const { return op_(i, j); }

 private:
  Operator op_;
};

// Tr(rho A).
inline Complex expectation(const DensityMatrix& rho, const Operator& a) {
  rho.op().check_same(a);
  // Tr(rho A) = sum_ij rho_ij A_ji
  return (rho.matrix().transpose().cwiseProduct(a.matrix())).sum();
}

inline Complex expectation(const StateVector& psi, const Operator& a) {
  if (psi.dim() != a.dim()) throw DimensionError("state/operator dimension mismatch");
  return psi.amplitudes().dot(a.matrix() * psi.amplitudes());
}

inline double purity(const Matrix& rho) {
  return (rho.transpose().cwiseProduct(rho)).sum().real();
}
inline double purity(const DensityMatrix& rho) { return purity(rho.matrix()); }

// (1/2) sum |eigenvalues of (a - b)|.
inline double trace_distance(const Matrix& a, const Matrix& b) {
  const Matrix d = a - b;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace oqs
