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
#include <cstring>
#include <vector>

#include <gtest/gtest.h>

#include "diqkd/bell.hpp"
#include "diqkd/kernels/seesaw.hpp"
#include "diqkd/montecarlo.hpp"
#include "diqkd/optimize.hpp"
#include "diqkd/random.hpp"

namespace diqkd {
namespace {

using kernels::Isa;
using kernels::SeesawBatch;

SeesawBatch make_batch(const BellInequality &ineq, std::uint64_t seed) {
    SeesawBatch b;
    b.settings_a = ineq.settings_a;
    b.settings_b = ineq.settings_b;
    std::copy(ineq.joint.begin(), ineq.joint.end(), b.joint);
    SplitMix64 rng(seed);
    for (int lane = 0; lane < kernels::kLanes; ++lane) {
        const Bloch t = sample_state(seed, static_cast<std::uint64_t>(lane), false).correlations();
        for (int k = 0; k < 3; ++k) b.t[k][lane] = t[static_cast<std::size_t>(k)];
        for (int j = 0; j < ineq.settings_b; ++j) {
            const Bloch d = rng.direction();
            for (int k = 0; k < 3; ++k) b.bob[j][k][lane] = d[static_cast<std::size_t>(k)];
        }
    }
    return b;
}

bool same_bits(const SeesawBatch &x, const SeesawBatch &y) {
    return std::memcmp(x.value, y.value, sizeof x.value) == 0 && std::memcmp(x.alice, y.alice, sizeof x.alice) == 0 &&
           std::memcmp(x.bob, y.bob, sizeof x.bob) == 0 && std::memcmp(x.iterations, y.iterations, sizeof x.iterations) == 0 &&
           std::memcmp(x.converged, y.converged, sizeof x.converged) == 0;
}

TEST(SeesawKernel, ScalarIsDefaultWhenForced) {
    EXPECT_EQ(kernels::seesaw_for(Isa::kScalar), &kernels::seesaw_scalar);
    EXPECT_EQ(kernels::isa_name(Isa::kScalar), "scalar");
}

TEST(SeesawKernel, Avx2BitIdenticalToScalar) {
    if (!kernels::avx2_available()) GTEST_SKIP() << "AVX2 not available on this machine";
    for (const auto &name : catalog_names()) {
        const BellInequality ineq = catalog_get(name);
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            SeesawBatch a = make_batch(ineq, seed);
            SeesawBatch b = a;
            kernels::seesaw_scalar(a);
            kernels::seesaw_avx2(b);
            ASSERT_TRUE(same_bits(a, b)) << name << " seed " << seed;
        }
    }
}

// Lanes are independent: a lane's result does not depend on its neighbours.
TEST(SeesawKernel, LanesAreIndependent) {
    const BellInequality ineq = catalog_get("I3322");
    for (Isa isa : {Isa::kScalar, kernels::active_isa()}) {
        const auto run = kernels::seesaw_for(isa);
        SeesawBatch full = make_batch(ineq, 42);
        SeesawBatch solo = full;
        for (int lane = 1; lane < kernels::kLanes; ++lane) {
            for (int k = 0; k < 3; ++k) {
                solo.t[k][lane] = solo.t[k][0];
                for (int j = 0; j < ineq.settings_b; ++j) solo.bob[j][k][lane] = solo.bob[j][k][0];
            }
        }
        run(full);
        run(solo);
        EXPECT_EQ(full.value[0], solo.value[0]);
        EXPECT_EQ(full.iterations[0], solo.iterations[0]);
    }
}

TEST(SeesawKernel, ValueNeverDecreasesWithMoreIterations) {
    const BellInequality ineq = catalog_get("AS2");
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        double prev = -1e300;
        for (int iters = 1; iters <= 30; ++iters) {
            SeesawBatch b = make_batch(ineq, seed);
            b.max_iters = iters;
            b.tol = 1e-300;
            kernels::seesaw_scalar(b);
            EXPECT_GE(b.value[0], prev - 1e-15);
            prev = b.value[0];
        }
    }
}

TEST(SeesawKernel, BatchMatchesSingleStateBitForBit) {
    const BellInequality ineq = catalog_get("A6");
    OptimizerConfig cfg;
    cfg.restarts = 5;
    std::vector<BellDiagonalState> states;
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t k = 0; k < 23; ++k) {
        states.push_back(sample_state(3, k, false));
        seeds.push_back(restart_seed(3, k));
    }
    for (Isa isa : {Isa::kScalar, kernels::active_isa()}) {
        std::vector<double> corr(states.size());
        std::vector<std::uint8_t> conv(states.size());
        optimize_correlation_batch(ineq, states, seeds, cfg, corr, conv, isa);
        for (std::size_t k = 0; k < states.size(); ++k) {
            const CorrelationOptimum single = optimize_correlation(ineq, states[k], cfg, seeds[k], isa);
            EXPECT_EQ(corr[k], single.corr) << k;
            EXPECT_EQ(conv[k] != 0, single.converged) << k;
        }
    }
}

}  // namespace
}  // namespace diqkd
