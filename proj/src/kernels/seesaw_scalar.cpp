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

#include <cmath>
#include <limits>

#include "diqkd/kernels/seesaw.hpp"

namespace diqkd::kernels {

namespace {

void run_lane(SeesawBatch &s, int lane) {
    const int ma = s.settings_a;
    const int mb = s.settings_b;
    const double t0 = s.t[0][lane];
    const double t1 = s.t[1][lane];
    const double t2 = s.t[2][lane];
    double prev = -std::numeric_limits<double>::infinity();
    s.converged[lane] = false;
    s.iterations[lane] = 0;
    for (int it = 1; it <= s.max_iters; ++it) {
        for (int i = 0; i < ma; ++i) {
            double w0 = 0.0, w1 = 0.0, w2 = 0.0;
            for (int j = 0; j < mb; ++j) {
                const double c = s.joint[i * mb + j];
                w0 = w0 + c * (t0 * s.bob[j][0][lane]);
                w1 = w1 + c * (t1 * s.bob[j][1][lane]);
                w2 = w2 + c * (t2 * s.bob[j][2][lane]);
            }
            const double n = std::sqrt((w0 * w0 + w1 * w1) + w2 * w2);
            if (n > 0.0) {
                s.alice[i][0][lane] = w0 / n;
                s.alice[i][1][lane] = w1 / n;
                s.alice[i][2][lane] = w2 / n;
            }
        }
        double val = 0.0;
        for (int j = 0; j < mb; ++j) {
            double s0 = 0.0, s1 = 0.0, s2 = 0.0;
            for (int i = 0; i < ma; ++i) {
                const double c = s.joint[i * mb + j];
                s0 = s0 + c * s.alice[i][0][lane];
                s1 = s1 + c * s.alice[i][1][lane];
                s2 = s2 + c * s.alice[i][2][lane];
            }
            const double w0 = t0 * s0;
            const double w1 = t1 * s1;
            const double w2 = t2 * s2;
            const double n = std::sqrt((w0 * w0 + w1 * w1) + w2 * w2);
            if (n > 0.0) {
                s.bob[j][0][lane] = w0 / n;
                s.bob[j][1][lane] = w1 / n;
                s.bob[j][2][lane] = w2 / n;
            }
            val = val + n;
        }
        val = 0.25 * val;
        s.value[lane] = val;
        s.iterations[lane] = it;
        if (val - prev <= s.tol) {
            s.converged[lane] = true;
            return;
        }
        prev = val;
    }
}

}  // namespace

void seesaw_scalar(SeesawBatch &batch) {
    for (int lane = 0; lane < kLanes; ++lane) run_lane(batch, lane);
}

}  // namespace diqkd::kernels
