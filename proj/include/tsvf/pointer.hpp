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

#include <cstddef>
#include <string>

#include "tsvf/qcore.hpp"

namespace tsvf {

// Units: hbar = 1. A Gaussian pointer's position is measured in the same units
// as its spread; g then carries units of position per eigenvalue of S.

enum class PointerKind { gaussian_grid, qubit };
enum class PauliAxis { x, y, z };

std::string to_string(PointerKind kind);
std::string to_string(PauliAxis axis);
LinearOperator pauli(PauliAxis axis);

/// Measuring-device description. Gaussian grids are periodic with
/// n_points samples on [-half_width, half_width); the ready state has
/// amplitude proportional to exp(-q^2 / (4 spread^2)), so `spread` is the
/// standard deviation of the position distribution.
///
/// A qubit pointer couples through `generator_axis`, is read out along the
/// next axis in cyclic order (x -> y -> z -> x) and starts in the +1
/// eigenstate of the remaining axis. The default generator y gives readout z
/// and ready state |+x>.
struct PointerModel {
  PointerKind kind = PointerKind::gaussian_grid;
  std::size_t n_points = 256;
  double half_width = 24.0;
  double spread = 2.0;
  PauliAxis generator_axis = PauliAxis::y;

  /// Grid with n_points = 256 and half_width = 12 * spread.
  static PointerModel gaussian(double spread);
  static PointerModel gaussian(double spread, double half_width, std::size_t n_points);
  static PointerModel qubit(PauliAxis generator = PauliAxis::y);

  double grid_spacing() const { return 2.0 * half_width / static_cast<double>(n_points); }
  PauliAxis readout_axis() const;
  PauliAxis ready_axis() const;

  /// Throws tsvf::Error describing the first violated constraint.
  void validate() const;

  friend bool operator==(const PointerModel&, const PointerModel&) = default;
};

/// Amplitude of the normalized ready state at |q| = half_width.
double boundary_amplitude(const PointerModel& model);

StateVector initial_state(const PointerModel& model);
/// Q on the grid, or the readout Pauli for a qubit.
LinearOperator position_operator(const PointerModel& model);
/// P_M: spectral -i d/dq on the periodic grid, or the generator Pauli.
LinearOperator translation_generator(const PointerModel& model);
/// Closed-form eigensystem of translation_generator (Fourier modes on a grid).
Eigensystem translation_eigensystem(const PointerModel& model);

/// Grid coordinates -L + j h.
RVector grid_points(const PointerModel& model);

/// <psi|op|psi> / <psi|psi>. Throws on zero norm or an imaginary residue.
double moments(const StateVector& state, const LinearOperator& op);

/// A pointer model with its operators built once.
class Pointer {
 public:
  explicit Pointer(PointerModel model);

  const PointerModel& model() const { return model_; }
  std::size_t dim() const { return ready_.dim(); }
  const StateVector& ready() const { return ready_; }
  const LinearOperator& readout() const { return readout_; }
  const LinearOperator& generator() const { return generator_; }
  const Eigensystem& generator_eigen() const { return generator_eigen_; }

  /// <m| i[G, R] |m>: first-order readout shift per unit g * Re(weak value).
  double readout_gain() const;
  double readout_baseline() const { return readout_baseline_; }
  double generator_baseline() const { return generator_baseline_; }
  double generator_variance() const { return generator_variance_; }

  /// exp(-i theta G) |v>.
  StateVector translate(const StateVector& v, double theta) const;
  /// (exp(-i theta G) - I) |v>, accurate for small theta.
  StateVector translate_increment(const StateVector& v, double theta) const;

 private:
  PointerModel model_;
  StateVector ready_;
  LinearOperator readout_;
  LinearOperator generator_;
  Eigensystem generator_eigen_;
  double readout_baseline_ = 0.0;
  double generator_baseline_ = 0.0;
  double generator_variance_ = 0.0;
};

}  // namespace tsvf
