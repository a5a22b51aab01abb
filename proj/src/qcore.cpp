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

#include "tsvf/qcore.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace tsvf {

namespace {

bool all_finite(const CVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return false;
  }
  return true;
}

bool all_finite(const CMatrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (!all_finite(CVector(m.col(c)))) return false;
  }
  return true;
}

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionError(msg.str());
  }
}

}  // namespace

StateVector::StateVector(CVector amps, bool normalized) : amps_(std::move(amps)), normalized_(normalized) {
  if (amps_.size() == 0) throw DimensionError("state vector must have positive dimension");
  if (!all_finite(amps_)) throw Error("state vector has non-finite amplitudes");
  if (normalized_ && std::abs(amps_.squaredNorm() - 1.0) > tol::kStructural) {
    std::ostringstream msg;
    msg << "state tagged normalized has squared norm " << amps_.squaredNorm();
    throw Error(msg.str());
  }
}

StateVector StateVector::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) throw DimensionError("basis index out of range");
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
  v[static_cast<Eigen::Index>(index)] = 1.0;
  return StateVector(std::move(v), true);
}

StateVector StateVector::normalize(const CVector& amps) {
  const double n = amps.norm();
  if (!(n > 0.0)) throw Error("cannot normalize a zero vector");
  return StateVector(amps / n, true);
}

LinearOperator::LinearOperator(CMatrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    throw DimensionError("operator must be a non-empty square matrix");
  }
  if (!all_finite(entries_)) throw Error("operator has non-finite entries");
  hermitian_ = hermiticity_defect() <= tol::kStructural;
}

double LinearOperator::hermiticity_defect() const {
  return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

LinearOperator LinearOperator::identity(std::size_t dim) {
  return LinearOperator(CMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

LinearOperator LinearOperator::zero(std::size_t dim) {
  return LinearOperator(CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

LinearOperator LinearOperator::pauli_x() {
  CMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return LinearOperator(m);
}

LinearOperator LinearOperator::pauli_y() {
  CMatrix m(2, 2);
  m << 0.0, -kI, kI, 0.0;
  return LinearOperator(m);
}

LinearOperator LinearOperator::pauli_z() {
  CMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return LinearOperator(m);
}

LinearOperator LinearOperator::projector(const StateVector& v) {
  return LinearOperator(v.amps() * v.amps().adjoint());
}

StateVector LinearOperator::apply(const StateVector& v) const {
  require_same_dim(dim(), v.dim(), "operator apply");
  return StateVector(entries_ * v.amps());
}

LinearOperator operator+(const LinearOperator& a, const LinearOperator& b) {
  require_same_dim(a.dim(), b.dim(), "operator sum");
  return LinearOperator(a.entries_ + b.entries_);
}

LinearOperator operator-(const LinearOperator& a, const LinearOperator& b) {
  require_same_dim(a.dim(), b.dim(), "operator difference");
  return LinearOperator(a.entries_ - b.entries_);
}

LinearOperator operator*(const LinearOperator& a, const LinearOperator& b) {
  require_same_dim(a.dim(), b.dim(), "operator product");
  return LinearOperator(a.entries_ * b.entries_);
}

LinearOperator operator*(Complex s, const LinearOperator& a) { return LinearOperator(s * a.entries_); }

JointState tensor_product(const StateVector& a, const StateVector& b) {
  const auto na = static_cast<Eigen::Index>(a.dim());
  const auto nb = static_cast<Eigen::Index>(b.dim());
  CVector out(na * nb);
  for (Eigen::Index i = 0; i < na; ++i) out.segment(i * nb, nb) = a.amps()[i] * b.amps();
  return JointState{a.dim(), b.dim(), StateVector(std::move(out))};
}

LinearOperator kron(const LinearOperator& a, const LinearOperator& b) {
  const auto na = static_cast<Eigen::Index>(a.dim());
  const auto nb = static_cast<Eigen::Index>(b.dim());
  CMatrix out(na * nb, na * nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    for (Eigen::Index k = 0; k < na; ++k) out.block(i * nb, k * nb, nb, nb) = a.entries()(i, k) * b.entries();
  }
  return LinearOperator(std::move(out));
}

Complex inner(const StateVector& a, const StateVector& b) {
  require_same_dim(a.dim(), b.dim(), "inner product");
  return a.amps().dot(b.amps());
}

double distance(const StateVector& a, const StateVector& b) {
  require_same_dim(a.dim(), b.dim(), "distance");
  return (a.amps() - b.amps()).norm();
}

double expectation_raw(const StateVector& v, const LinearOperator& h) {
  if (!h.is_hermitian()) throw NotHermitianError("expectation requires a hermitian operator");
  require_same_dim(v.dim(), h.dim(), "expectation");
  const Complex e = v.amps().dot(h.entries() * v.amps());
  const double scale = std::max(1.0, v.squared_norm() * h.entries().cwiseAbs().maxCoeff());
  if (std::abs(e.imag()) > tol::kRealResidue * scale) {
    std::ostringstream msg;
    msg << "expectation has imaginary residue " << e.imag();
    throw Error(msg.str());
  }
  return e.real();
}

StateVector project_system(const JointState& psi, const StateVector& bra) {
  require_same_dim(psi.sys_dim, bra.dim(), "system projection");
  const auto np = static_cast<Eigen::Index>(psi.ptr_dim);
  CVector out = CVector::Zero(np);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(psi.sys_dim); ++i) {
    out += std::conj(bra.amps()[i]) * psi.state.amps().segment(i * np, np);
  }
  return StateVector(std::move(out));
}

Eigensystem eigensystem(const LinearOperator& h) {
  if (!h.is_hermitian()) throw NotHermitianError("eigensystem requires a hermitian operator");
  // Symmetrize so the solver sees an exactly hermitian matrix.
  const CMatrix sym = 0.5 * (h.entries() + h.entries().adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
  if (solver.info() != Eigen::Success) throw Error("hermitian eigensolver failed to converge");
  return Eigensystem{solver.eigenvalues(), solver.eigenvectors()};
}

double unitarity_defect(const LinearOperator& u) {
  const auto n = static_cast<Eigen::Index>(u.dim());
  return (u.entries().adjoint() * u.entries() - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

Complex phase_increment(double theta) {
  const double s = std::sin(0.5 * theta);
  return {-2.0 * s * s, -std::sin(theta)};
}

CouplingGenerator::CouplingGenerator(const LinearOperator& system_op, const LinearOperator& pointer_op)
    : CouplingGenerator(eigensystem(system_op), eigensystem(pointer_op)) {}

CouplingGenerator::CouplingGenerator(Eigensystem system_eigen, Eigensystem pointer_eigen)
    : sys_(std::move(system_eigen)), ptr_(std::move(pointer_eigen)) {
  if (sys_dim() * ptr_dim() > kMaxJointDim) {
    std::ostringstream msg;
    msg << "joint dimension " << sys_dim() * ptr_dim() << " exceeds supported maximum " << kMaxJointDim;
    throw DimensionError(msg.str());
  }
}

template <typename PhaseFn>
JointState CouplingGenerator::transform(const JointState& psi, PhaseFn phase) const {
  require_same_dim(psi.sys_dim, sys_dim(), "coupling (system factor)");
  require_same_dim(psi.ptr_dim, ptr_dim(), "coupling (pointer factor)");
  const auto ns = static_cast<Eigen::Index>(sys_dim());
  const auto np = static_cast<Eigen::Index>(ptr_dim());
  // Column-major view: x(j, i) = psi[i * np + j], so (A (x) B) psi <-> B x A^T.
  const Eigen::Map<const CMatrix> x(psi.state.amps().data(), np, ns);
  CMatrix y = ptr_.vectors.adjoint() * x * sys_.vectors.conjugate();
  for (Eigen::Index i = 0; i < ns; ++i) {
    for (Eigen::Index j = 0; j < np; ++j) y(j, i) *= phase(sys_.values[i] * ptr_.values[j]);
  }
  const CMatrix z = ptr_.vectors * y * sys_.vectors.transpose();
  return JointState{psi.sys_dim, psi.ptr_dim, StateVector(Eigen::Map<const CVector>(z.data(), ns * np))};
}

JointState CouplingGenerator::apply(double g, const JointState& psi) const {
  return transform(psi, [g](double ev) { return std::exp(-kI * (g * ev)); });
}

JointState CouplingGenerator::apply_increment(double g, const JointState& psi) const {
  return transform(psi, [g](double ev) { return phase_increment(g * ev); });
}

LinearOperator CouplingGenerator::unitary(double g) const {
  const auto ns = static_cast<Eigen::Index>(sys_dim());
  const auto np = static_cast<Eigen::Index>(ptr_dim());
  const Eigen::Index n = ns * np;
  CMatrix v(n, n);
  CVector phases(n);
  for (Eigen::Index i = 0; i < ns; ++i) {
    for (Eigen::Index k = 0; k < ns; ++k) v.block(i * np, k * np, np, np) = sys_.vectors(i, k) * ptr_.vectors;
    for (Eigen::Index j = 0; j < np; ++j) phases[i * np + j] = std::exp(-kI * (g * sys_.values[i] * ptr_.values[j]));
  }
  return LinearOperator(v * phases.asDiagonal() * v.adjoint());
}

LinearOperator coupling_unitary(const LinearOperator& s, const LinearOperator& p, double g) {
  if (!s.is_hermitian()) throw NotHermitianError("coupling: system operator is not hermitian");
  if (!p.is_hermitian()) throw NotHermitianError("coupling: pointer operator is not hermitian");
  if (!std::isfinite(g)) throw Error("coupling strength must be finite");
  return CouplingGenerator(s, p).unitary(g);
}

JointState first_order_state(const StateVector& in, const StateVector& m, const LinearOperator& s,
                             const LinearOperator& p, double g) {
  require_same_dim(in.dim(), s.dim(), "first-order state (system)");
  require_same_dim(m.dim(), p.dim(), "first-order state (pointer)");
  JointState base = tensor_product(in, m);
  const JointState kick = tensor_product(s.apply(in), p.apply(m));
  return JointState{base.sys_dim, base.ptr_dim,
                    StateVector(base.state.amps() - kI * g * kick.state.amps())};
}

}  // namespace tsvf
