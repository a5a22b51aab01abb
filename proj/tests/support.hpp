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

#include <random>

#include "tsvf/qcore.hpp"

namespace tsvf::testing {

inline CVector random_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  CVector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = Complex(n(rng), n(rng));
  return v;
}

inline StateVector random_state(std::mt19937_64& rng, std::size_t dim) {
  return StateVector::normalize(random_vector(rng, dim));
}

/// (A + A^dagger) / 2 for a Gaussian random A.
inline LinearOperator random_hermitian(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = Complex(n(rng), n(rng));
  }
  CMatrix h = (a + a.adjoint()) / 2.0;
  return LinearOperator(h);
}

inline StateVector up_x() { return StateVector::normalize(CVector::Ones(2)); }
inline StateVector up_z() { return StateVector::basis(2, 0); }

}  // namespace tsvf::testing
