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

#ifndef DIQKD_OPTIMIZE_HPP
#define DIQKD_OPTIMIZE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "diqkd/bell.hpp"
#include "diqkd/kernels/seesaw.hpp"
#include "diqkd/quantum.hpp"

namespace diqkd {

struct OptimizerConfig {
    int restarts = 20;
    int max_iters = 200;
    double tol = 1e-10;

    void validate() const;
};

struct ViolationResult {
    double q = 0.0;
    MeasurementScenario scenario;
    bool converged = false;
};

enum class Party { kAlice, kBob };

/// Measurement-independent part of the Bell value for a Bell-diagonal state, whose marginals
/// are 1/2 for every projector. The full value is offset(eff) + eff.product() * corr.
double efficiency_offset(const BellInequality &ineq, const EfficiencySetup &eff);

/// Best see-saw value of the measurement-dependent part corr (see kernels/seesaw.hpp) for one
/// state, over `cfg.restarts` random starts drawn from `seed`.
struct CorrelationOptimum {
    double corr = 0.0;
    bool converged = false;
    std::vector<Bloch> alice;
    std::vector<Bloch> bob;
};

CorrelationOptimum optimize_correlation(const BellInequality &ineq, const BellDiagonalState &state,
                                        const OptimizerConfig &cfg, std::uint64_t seed,
                                        kernels::Isa isa = kernels::active_isa());

/// Same as optimize_correlation for many states, four per kernel call. State k draws its
/// restarts from seeds[k]. Only corr and converged are filled.
void optimize_correlation_batch(const BellInequality &ineq, std::span<const BellDiagonalState> states,
                                std::span<const std::uint64_t> seeds, const OptimizerConfig &cfg,
                                std::span<double> corr, std::span<std::uint8_t> converged,
                                kernels::Isa isa = kernels::active_isa());

/// Maximal observed Bell value over rank-1 qubit measurements, with the efficiency map inside
/// the objective. A lower bound on the true maximum; values <= 0 are returned as found.
ViolationResult max_violation(const BellInequality &ineq, const BellDiagonalState &state, const EfficiencySetup &eff,
                              const OptimizerConfig &cfg, std::uint64_t seed);

/// Replaces one party's projectors by the top eigenvectors of their effective operators.
/// The observed Bell value does not decrease.
MeasurementScenario seesaw_step(const BellInequality &ineq, const BellDiagonalState &state, const EfficiencySetup &eff,
                                const MeasurementScenario &scenario, Party party);

/// evaluate(ineq, apply_efficiency(joint_table(state, scenario), eff)).
double observed_value(const BellInequality &ineq, const BellDiagonalState &state, const EfficiencySetup &eff,
                      const MeasurementScenario &scenario);

}  // namespace diqkd

#endif  // DIQKD_OPTIMIZE_HPP
