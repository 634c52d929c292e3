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

#include <cstdlib>
#include <string>

#include "diqkd/kernels/seesaw.hpp"

namespace diqkd::kernels {

bool avx2_compiled() {
#if defined(DIQKD_HAVE_AVX2)
    return true;
#else
    return false;
#endif
}

bool avx2_available() {
#if defined(DIQKD_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa active_isa() {
    if (const char *forced = std::getenv("DIQKD_ISA"); forced != nullptr && std::string(forced) == "scalar") {
        return Isa::kScalar;
    }
    return avx2_available() ? Isa::kAvx2 : Isa::kScalar;
}

SeesawFn seesaw_for(Isa isa) {
#if defined(DIQKD_HAVE_AVX2)
    if (isa == Isa::kAvx2) return &seesaw_avx2;
#endif
    (void)isa;
    return &seesaw_scalar;
}

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

}  // namespace diqkd::kernels
