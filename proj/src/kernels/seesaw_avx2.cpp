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

#include <immintrin.h>

#include <limits>

#include "diqkd/kernels/seesaw.hpp"

namespace diqkd::kernels {

namespace {

struct Vec3 {
    __m256d x, y, z;
};

inline __m256d norm(const Vec3 &w) {
    return _mm256_sqrt_pd(_mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(w.x, w.x), _mm256_mul_pd(w.y, w.y)),
                                        _mm256_mul_pd(w.z, w.z)));
}

// dst <- w / n in lanes where (mask && n > 0).
inline void store_normalized(double (&dst)[3][kLanes], const Vec3 &w, __m256d n, __m256d mask) {
    const __m256d ok = _mm256_and_pd(mask, _mm256_cmp_pd(n, _mm256_setzero_pd(), _CMP_GT_OQ));
    _mm256_store_pd(dst[0], _mm256_blendv_pd(_mm256_load_pd(dst[0]), _mm256_div_pd(w.x, n), ok));
    _mm256_store_pd(dst[1], _mm256_blendv_pd(_mm256_load_pd(dst[1]), _mm256_div_pd(w.y, n), ok));
    _mm256_store_pd(dst[2], _mm256_blendv_pd(_mm256_load_pd(dst[2]), _mm256_div_pd(w.z, n), ok));
}

}  // namespace

void seesaw_avx2(SeesawBatch &s) {
    const int ma = s.settings_a;
    const int mb = s.settings_b;
    const __m256d t0 = _mm256_load_pd(s.t[0]);
    const __m256d t1 = _mm256_load_pd(s.t[1]);
    const __m256d t2 = _mm256_load_pd(s.t[2]);
    const __m256d tol = _mm256_set1_pd(s.tol);
    __m256d prev = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
    __m256d active = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
    __m256d converged = _mm256_setzero_pd();
    __m256d value = _mm256_setzero_pd();
    alignas(32) double iters[kLanes] = {0.0, 0.0, 0.0, 0.0};
    __m256d iterations = _mm256_setzero_pd();

    for (int it = 1; it <= s.max_iters && _mm256_movemask_pd(active) != 0; ++it) {
        for (int i = 0; i < ma; ++i) {
            Vec3 w{_mm256_setzero_pd(), _mm256_setzero_pd(), _mm256_setzero_pd()};
            for (int j = 0; j < mb; ++j) {
                const __m256d c = _mm256_set1_pd(s.joint[i * mb + j]);
                w.x = _mm256_add_pd(w.x, _mm256_mul_pd(c, _mm256_mul_pd(t0, _mm256_load_pd(s.bob[j][0]))));
                w.y = _mm256_add_pd(w.y, _mm256_mul_pd(c, _mm256_mul_pd(t1, _mm256_load_pd(s.bob[j][1]))));
                w.z = _mm256_add_pd(w.z, _mm256_mul_pd(c, _mm256_mul_pd(t2, _mm256_load_pd(s.bob[j][2]))));
            }
            store_normalized(s.alice[i], w, norm(w), active);
        }
        __m256d val = _mm256_setzero_pd();
        for (int j = 0; j < mb; ++j) {
            Vec3 acc{_mm256_setzero_pd(), _mm256_setzero_pd(), _mm256_setzero_pd()};
            for (int i = 0; i < ma; ++i) {
                const __m256d c = _mm256_set1_pd(s.joint[i * mb + j]);
                acc.x = _mm256_add_pd(acc.x, _mm256_mul_pd(c, _mm256_load_pd(s.alice[i][0])));
                acc.y = _mm256_add_pd(acc.y, _mm256_mul_pd(c, _mm256_load_pd(s.alice[i][1])));
                acc.z = _mm256_add_pd(acc.z, _mm256_mul_pd(c, _mm256_load_pd(s.alice[i][2])));
            }
            const Vec3 w{_mm256_mul_pd(t0, acc.x), _mm256_mul_pd(t1, acc.y), _mm256_mul_pd(t2, acc.z)};
            const __m256d n = norm(w);
            store_normalized(s.bob[j], w, n, active);
            val = _mm256_add_pd(val, n);
        }
        val = _mm256_mul_pd(_mm256_set1_pd(0.25), val);
        value = _mm256_blendv_pd(value, val, active);
        iterations = _mm256_blendv_pd(iterations, _mm256_set1_pd(static_cast<double>(it)), active);
        const __m256d done = _mm256_and_pd(active, _mm256_cmp_pd(_mm256_sub_pd(val, prev), tol, _CMP_LE_OQ));
        prev = _mm256_blendv_pd(prev, val, active);
        converged = _mm256_or_pd(converged, done);
        active = _mm256_andnot_pd(done, active);
    }

    _mm256_store_pd(s.value, value);
    _mm256_store_pd(iters, iterations);
    const int conv_bits = _mm256_movemask_pd(converged);
    for (int lane = 0; lane < kLanes; ++lane) {
        s.iterations[lane] = static_cast<std::int32_t>(iters[lane]);
        s.converged[lane] = (conv_bits >> lane) & 1;
    }
}

}  // namespace diqkd::kernels
