// Copyright 2026 The diqkd-mc Authors
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

#ifndef DIQKD_ENTROPY_HPP
#define DIQKD_ENTROPY_HPP

#include <array>
#include <span>

#include "diqkd/quantum.hpp"

namespace diqkd {

// All information quantities are in bits.

/// -sum x log2 x with 0 log 0 = 0. Throws std::invalid_argument unless normalized (1e-9).
double shannon(std::span<const double> weights);

/// h(p). Throws std::domain_error outside [0,1].
double binary(double p);

/// The p in [0, 1/2] with h(p) = y, to 1e-10.
double binary_inverse(double y);

struct HolevoExtrema {
    std::array<double, 3> chi{};
    double chi_max = 0.0;
};

/// chi^(k) = H(Lambda) - h(Lambda_+^(k)) at the three stationary measurement directions of
/// Alice's key measurement.
HolevoExtrema holevo_extrema(const BellDiagonalState &state);

/// Holevo quantity with Alice's measurement fixed along z (the k = 1 extremum).
double holevo_bb84(const BellDiagonalState &state);

}  // namespace diqkd

#endif  // DIQKD_ENTROPY_HPP
