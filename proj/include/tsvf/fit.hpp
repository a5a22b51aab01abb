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

#include <span>

namespace tsvf {

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  /// max |y_i - (intercept + slope x_i)|
  double max_residual = 0.0;
};

/// Ordinary least-squares line through (x_i, y_i). Needs >= 2 points with
/// distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace tsvf
