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

#ifndef DIQKD_KERNELS_SEESAW_HPP
#define DIQKD_KERNELS_SEESAW_HPP

#include <cstdint>
#include <string_view>

// Batched see-saw over Bell-diagonal states.
//
// For rho = (1 + sum_k t_k sigma_k (x) sigma_k)/4 and projectors (1 + n.sigma)/2, the
// measurement-dependent part of any two-output Bell expression is
//
//   corr = 1/4 sum_ij J_ij a_i . (t o b_j),
//
// and the effective operator of each setting is c*1 + w.sigma, so the optimal rank-1 update
// of a_i is w_i / |w_i| with w_i = sum_j J_ij (t o b_j), and symmetrically for b_j. Each lane
// of a batch holds one state. Lanes that meet the tolerance are frozen, so every variant
// produces the same per-lane result as running that lane alone.
//
// The scalar and SIMD variants perform the same IEEE operations in the same order (no FMA),
// so their outputs are bit-identical.

namespace diqkd::kernels {

inline constexpr int kLanes = 4;
inline constexpr int kMaxSettings = 8;

struct alignas(32) SeesawBatch {
    // Inputs.
    int settings_a = 0;
    int settings_b = 0;
    int max_iters = 200;
    double tol = 1e-10;
    double joint[kMaxSettings * kMaxSettings] = {};  // row-major settings_a x settings_b
    alignas(32) double t[3][kLanes] = {};            // correlation diagonal per lane
    alignas(32) double bob[kMaxSettings][3][kLanes] = {};  // in: start, out: final

    // Outputs.
    alignas(32) double alice[kMaxSettings][3][kLanes] = {};
    alignas(32) double value[kLanes] = {};  // corr after the last full iteration
    std::int32_t iterations[kLanes] = {};
    bool converged[kLanes] = {};
};

/// Reference implementation, one lane at a time.
void seesaw_scalar(SeesawBatch &batch);

/// AVX2 implementation. Only call when avx2_available() is true.
void seesaw_avx2(SeesawBatch &batch);

bool avx2_compiled();
bool avx2_available();

enum class Isa { kScalar, kAvx2 };

using SeesawFn = void (*)(SeesawBatch &);

/// Best available variant. The environment variable DIQKD_ISA=scalar forces the reference.
Isa active_isa();
SeesawFn seesaw_for(Isa isa);
std::string_view isa_name(Isa isa);

}  // namespace diqkd::kernels

#endif  // DIQKD_KERNELS_SEESAW_HPP
