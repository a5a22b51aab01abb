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

#include "tsvf/pointer.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace tsvf {

namespace {

PauliAxis next_axis(PauliAxis a) {
  switch (a) {
    case PauliAxis::x:
      return PauliAxis::y;
    case PauliAxis::y:
      return PauliAxis::z;
    case PauliAxis::z:
      return PauliAxis::x;
  }
  return PauliAxis::x;
}

StateVector plus_eigenstate(PauliAxis axis) {
  const double r = 1.0 / std::numbers::sqrt2;
  CVector v(2);
  switch (axis) {
    case PauliAxis::x:
      v << r, r;
      break;
    case PauliAxis::y:
      v << r, kI * r;
      break;
    case PauliAxis::z:
      v << 1.0, 0.0;
      break;
  }
  return StateVector::normalize(v);
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Angular wavenumbers of the DFT modes; the Nyquist mode is assigned 0 so the
// spectral derivative stays hermitian.
RVector wavenumbers(const PointerModel& model) {
  const auto n = static_cast<Eigen::Index>(model.n_points);
  const double span = 2.0 * model.half_width;
  RVector k(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Index signed_j = j < n / 2 ? j : j - n;
    if (j == n / 2) signed_j = 0;
    k[j] = 2.0 * std::numbers::pi * static_cast<double>(signed_j) / span;
  }
  return k;
}

// Columns are e^{2 pi i k j / n} / sqrt(n).
CMatrix fourier_modes(std::size_t n_points) {
  const auto n = static_cast<Eigen::Index>(n_points);
  CMatrix f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto phase = 2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
      f(j, k) = scale * Complex(std::cos(phase), std::sin(phase));
    }
  }
  return f;
}

}  // namespace

std::string to_string(PointerKind kind) { return kind == PointerKind::gaussian_grid ? "gaussian_grid" : "qubit"; }

std::string to_string(PauliAxis axis) {
  switch (axis) {
    case PauliAxis::x:
      return "x";
    case PauliAxis::y:
      return "y";
    case PauliAxis::z:
      return "z";
  }
  return "?";
}

LinearOperator pauli(PauliAxis axis) {
  switch (axis) {
    case PauliAxis::x:
      return LinearOperator::pauli_x();
    case PauliAxis::y:
      return LinearOperator::pauli_y();
    case PauliAxis::z:
      return LinearOperator::pauli_z();
  }
  return LinearOperator::pauli_z();
}

PointerModel PointerModel::gaussian(double spread) { return gaussian(spread, 12.0 * spread, 256); }

PointerModel PointerModel::gaussian(double spread, double half_width, std::size_t n_points) {
  PointerModel m;
  m.kind = PointerKind::gaussian_grid;
  m.spread = spread;
  m.half_width = half_width;
  m.n_points = n_points;
  return m;
}

PointerModel PointerModel::qubit(PauliAxis generator) {
  PointerModel m;
  m.kind = PointerKind::qubit;
  m.generator_axis = generator;
  return m;
}

PauliAxis PointerModel::readout_axis() const { return next_axis(generator_axis); }
PauliAxis PointerModel::ready_axis() const { return next_axis(next_axis(generator_axis)); }

double boundary_amplitude(const PointerModel& model) {
  const double d = model.spread;
  return std::pow(2.0 * std::numbers::pi * d * d, -0.25) * std::sqrt(model.grid_spacing()) *
         std::exp(-model.half_width * model.half_width / (4.0 * d * d));
}

void PointerModel::validate() const {
  if (kind == PointerKind::qubit) return;
  std::ostringstream msg;
  if (!(spread > 0.0) || !std::isfinite(spread)) {
    msg << "gaussian pointer spread must be positive, got " << spread;
  } else if (!is_power_of_two(n_points) || n_points < 64) {
    msg << "gaussian pointer n_points must be a power of two >= 64, got " << n_points;
  } else if (!std::isfinite(half_width) || half_width < 8.0 * spread) {
    msg << "gaussian pointer half_width " << half_width << " must be at least 8 * spread = " << 8.0 * spread;
  } else if (grid_spacing() > spread / 4.0) {
    msg << "gaussian pointer grid spacing " << grid_spacing() << " exceeds spread / 4 = " << spread / 4.0;
  } else if (boundary_amplitude(*this) >= 1e-12) {
    msg << "gaussian pointer boundary amplitude " << boundary_amplitude(*this) << " is not below 1e-12";
  } else if (static_cast<std::size_t>(n_points) > kMaxJointDim) {
    msg << "gaussian pointer n_points exceeds " << kMaxJointDim;
  } else {
    return;
  }
  throw Error(msg.str());
}

RVector grid_points(const PointerModel& model) {
  const auto n = static_cast<Eigen::Index>(model.n_points);
  RVector q(n);
  for (Eigen::Index j = 0; j < n; ++j) q[j] = -model.half_width + static_cast<double>(j) * model.grid_spacing();
  return q;
}

StateVector initial_state(const PointerModel& model) {
  model.validate();
  if (model.kind == PointerKind::qubit) return plus_eigenstate(model.ready_axis());
  const RVector q = grid_points(model);
  CVector amps(q.size());
  const double d2 = model.spread * model.spread;
  for (Eigen::Index j = 0; j < q.size(); ++j) amps[j] = std::exp(-q[j] * q[j] / (4.0 * d2));
  return StateVector::normalize(amps);
}

LinearOperator position_operator(const PointerModel& model) {
  model.validate();
  if (model.kind == PointerKind::qubit) return pauli(model.readout_axis());
  return LinearOperator(CVector(grid_points(model).cast<Complex>()).asDiagonal());
}

Eigensystem translation_eigensystem(const PointerModel& model) {
  model.validate();
  if (model.kind == PointerKind::qubit) return eigensystem(pauli(model.generator_axis));
  return Eigensystem{wavenumbers(model), fourier_modes(model.n_points)};
}

LinearOperator translation_generator(const PointerModel& model) {
  const Eigensystem es = translation_eigensystem(model);
  if (model.kind == PointerKind::qubit) return pauli(model.generator_axis);
  CMatrix p = es.vectors * es.values.cast<Complex>().asDiagonal() * es.vectors.adjoint();
  // Remove rounding asymmetry; the exact operator is hermitian.
  p = 0.5 * (p + p.adjoint()).eval();
  return LinearOperator(std::move(p));
}

double moments(const StateVector& state, const LinearOperator& op) {
  const double n2 = state.squared_norm();
  if (!(n2 > 0.0)) throw Error("moments of a zero-norm state are undefined");
  if (!op.is_hermitian()) throw NotHermitianError("moments require a hermitian operator");
  if (op.dim() != state.dim()) throw DimensionError("moments: dimension mismatch");
  const Complex e = state.amps().dot(op.entries() * state.amps()) / n2;
  const double scale = std::max(1.0, op.entries().cwiseAbs().maxCoeff());
  if (std::abs(e.imag()) > tol::kRealResidue * scale) {
    std::ostringstream msg;
    msg << "moment has imaginary residue " << e.imag();
    throw Error(msg.str());
  }
  return e.real();
}

Pointer::Pointer(PointerModel model)
    : model_(model),
      ready_(initial_state(model_)),
      readout_(position_operator(model_)),
      generator_(translation_generator(model_)),
      generator_eigen_(translation_eigensystem(model_)) {
  readout_baseline_ = moments(ready_, readout_);
  generator_baseline_ = moments(ready_, generator_);
  generator_variance_ = moments(ready_, generator_ * generator_) - generator_baseline_ * generator_baseline_;
}

double Pointer::readout_gain() const {
  // i[P, Q] = 1 on the continuum; for Paulis i[s_a, s_b] = -2 s_c with c the ready axis.
  return model_.kind == PointerKind::gaussian_grid ? 1.0 : -2.0;
}

StateVector Pointer::translate(const StateVector& v, double theta) const {
  const CVector c = generator_eigen_.vectors.adjoint() * v.amps();
  CVector phased(c.size());
  for (Eigen::Index k = 0; k < c.size(); ++k) phased[k] = std::exp(-kI * (theta * generator_eigen_.values[k])) * c[k];
  return StateVector(generator_eigen_.vectors * phased);
}

StateVector Pointer::translate_increment(const StateVector& v, double theta) const {
  const CVector c = generator_eigen_.vectors.adjoint() * v.amps();
  CVector phased(c.size());
  for (Eigen::Index k = 0; k < c.size(); ++k) phased[k] = phase_increment(theta * generator_eigen_.values[k]) * c[k];
  return StateVector(generator_eigen_.vectors * phased);
}

}  // namespace tsvf
