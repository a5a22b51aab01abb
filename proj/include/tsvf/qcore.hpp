// Copyright 2026 The tsvf-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tsvf {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

namespace tol {
/// Normalization and hermiticity checks on stored values.
inline constexpr double kStructural = 1e-12;
/// Max-entry defect of U^dagger U - I for built unitaries.
inline constexpr double kUnitarity = 1e-10;
/// Expectation values whose imaginary residue exceeds this are rejected.
inline constexpr double kRealResidue = 1e-10;
}  // namespace tol

/// Largest joint-space dimension the dense routines accept.
inline constexpr std::size_t kMaxJointDim = 4096;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NotHermitianError : public Error {
 public:
  using Error::Error;
};

/// Complex amplitude vector. `is_normalized()` is a checked tag: construction
/// with `normalized = true` fails unless the norm is 1 to kStructural.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(CVector amps, bool normalized = false);

  static StateVector basis(std::size_t dim, std::size_t index);
  /// Rescales to unit norm; throws on a zero vector.
  static StateVector normalize(const CVector& amps);

  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  const CVector& amps() const { return amps_; }
  Complex operator[](std::size_t i) const { return amps_[static_cast<Eigen::Index>(i)]; }
  bool is_normalized() const { return normalized_; }
  double norm() const { return amps_.norm(); }
  double squared_norm() const { return amps_.squaredNorm(); }

 private:
  CVector amps_;
  bool normalized_ = false;
};

/// Dense square complex matrix. The hermitian tag is derived from the entries.
class LinearOperator {
 public:
  LinearOperator() = default;
  explicit LinearOperator(CMatrix entries);

  static LinearOperator identity(std::size_t dim);
  static LinearOperator zero(std::size_t dim);
  static LinearOperator pauli_x();
  static LinearOperator pauli_y();
  static LinearOperator pauli_z();
  /// |v><v| for the (not necessarily normalized) vector v.
  static LinearOperator projector(const StateVector& v);

  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
  const CMatrix& entries() const { return entries_; }
  bool is_hermitian() const { return hermitian_; }
  /// max |A - A^dagger| entry.
  double hermiticity_defect() const;

  StateVector apply(const StateVector& v) const;
  LinearOperator adjoint() const { return LinearOperator(entries_.adjoint()); }

  friend LinearOperator operator+(const LinearOperator& a, const LinearOperator& b);
  friend LinearOperator operator-(const LinearOperator& a, const LinearOperator& b);
  friend LinearOperator operator*(const LinearOperator& a, const LinearOperator& b);
  friend LinearOperator operator*(Complex s, const LinearOperator& a);
  friend LinearOperator operator*(const LinearOperator& a, Complex s) { return s * a; }
  friend LinearOperator operator/(const LinearOperator& a, Complex s) { return (1.0 / s) * a; }

 private:
  CMatrix entries_;
  bool hermitian_ = false;
};

/// System (x) pointer state. Joint index is system-major: k = i * ptr_dim + j.
struct JointState {
  std::size_t sys_dim = 0;
  std::size_t ptr_dim = 0;
  StateVector state;

  Complex at(std::size_t i, std::size_t j) const { return state[i * ptr_dim + j]; }
};

JointState tensor_product(const StateVector& a, const StateVector& b);
LinearOperator kron(const LinearOperator& a, const LinearOperator& b);

/// <a|b>, conjugate-linear in a.
Complex inner(const StateVector& a, const StateVector& b);
double distance(const StateVector& a, const StateVector& b);

/// Real <v|H|v> for hermitian H (no normalization).
double expectation_raw(const StateVector& v, const LinearOperator& h);

/// Reduced vector (<bra| (x) I) psi on the pointer factor.
StateVector project_system(const JointState& psi, const StateVector& bra);

struct Eigensystem {
  RVector values;
  CMatrix vectors;  // columns are orthonormal eigenvectors
};

/// Eigendecomposition of a hermitian operator.
Eigensystem eigensystem(const LinearOperator& h);

/// max |U^dagger U - I| entry.
double unitarity_defect(const LinearOperator& u);

/// exp(-i g S (x) P) evaluated in the product eigenbasis of S and P, so the
/// joint generator is never diagonalized as a whole.
class CouplingGenerator {
 public:
  CouplingGenerator(const LinearOperator& system_op, const LinearOperator& pointer_op);
  CouplingGenerator(Eigensystem system_eigen, Eigensystem pointer_eigen);

  std::size_t sys_dim() const { return static_cast<std::size_t>(sys_.values.size()); }
  std::size_t ptr_dim() const { return static_cast<std::size_t>(ptr_.values.size()); }

  /// U(g) psi.
  JointState apply(double g, const JointState& psi) const;
  /// (U(g) - I) psi, accurate for small g.
  JointState apply_increment(double g, const JointState& psi) const;
  /// Dense U(g).
  LinearOperator unitary(double g) const;

 private:
  template <typename PhaseFn>
  JointState transform(const JointState& psi, PhaseFn phase) const;

  Eigensystem sys_;
  Eigensystem ptr_;
};

/// exp(-i g S (x) P) as a dense operator.
LinearOperator coupling_unitary(const LinearOperator& s, const LinearOperator& p, double g);

/// |in>(x)|m> - i g S|in> (x) P|m>.
JointState first_order_state(const StateVector& in, const StateVector& m, const LinearOperator& s,
                             const LinearOperator& p, double g);

/// exp(-i theta) - 1 without cancellation at small theta.
Complex phase_increment(double theta);

}  // namespace tsvf
