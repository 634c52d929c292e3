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
#include "diqkd/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "diqkd/random.hpp"

namespace diqkd {

namespace {

void check_size(const BellInequality &ineq) {
    ineq.validate();
    if (ineq.settings_a > kernels::kMaxSettings || ineq.settings_b > kernels::kMaxSettings) {
        throw std::invalid_argument("inequality '" + ineq.name + "' exceeds " +
                                    std::to_string(kernels::kMaxSettings) + " settings per party");
    }
}

void load_problem(kernels::SeesawBatch &batch, const BellInequality &ineq, const OptimizerConfig &cfg) {
    batch.settings_a = ineq.settings_a;
    batch.settings_b = ineq.settings_b;
    batch.max_iters = cfg.max_iters;
    batch.tol = cfg.tol;
    std::copy(ineq.joint.begin(), ineq.joint.end(), batch.joint);
}

void load_state(kernels::SeesawBatch &batch, int lane, const BellDiagonalState &state) {
    const Bloch t = state.correlations();
    for (int k = 0; k < 3; ++k) batch.t[k][lane] = t[static_cast<std::size_t>(k)];
}

void load_start(kernels::SeesawBatch &batch, int lane, int settings_b, SplitMix64 &rng) {
    for (int j = 0; j < settings_b; ++j) {
        const Bloch d = rng.direction();
        for (int k = 0; k < 3; ++k) batch.bob[j][k][lane] = d[static_cast<std::size_t>(k)];
    }
    for (int i = 0; i < kernels::kMaxSettings; ++i) {
        for (int k = 0; k < 3; ++k) batch.alice[i][k][lane] = 0.0;
    }
}

Bloch normalized_or(const Bloch &w, const Bloch &fallback) {
    const double n = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
    if (!(n > 0.0)) return fallback;
    return {w[0] / n, w[1] / n, w[2] / n};
}

}  // namespace

void OptimizerConfig::validate() const {
    if (restarts < 1) throw std::invalid_argument("optimizer needs at least one restart");
    if (max_iters < 1) throw std::invalid_argument("optimizer needs at least one iteration");
    if (!(tol > 0.0)) throw std::invalid_argument("optimizer tolerance must be positive");
}

double efficiency_offset(const BellInequality &ineq, const EfficiencySetup &eff) {
    eff.validate();
    const double ea = eff.eta_a;
    const double eb = eff.eta_b;
    double joint_sum = 0.0;
    for (double c : ineq.joint) joint_sum += c;
    double alice_sum = 0.0;
    for (double c : ineq.alice_marg) alice_sum += c;
    double bob_sum = 0.0;
    for (double c : ineq.bob_marg) bob_sum += c;
    const double p00 = ea * eb / 4.0 + (1.0 - ea) * eb / 2.0 + ea * (1.0 - eb) / 2.0 + (1.0 - ea) * (1.0 - eb);
    return joint_sum * p00 + alice_sum * (1.0 - ea / 2.0) + bob_sum * (1.0 - eb / 2.0);
}

CorrelationOptimum optimize_correlation(const BellInequality &ineq, const BellDiagonalState &state,
                                        const OptimizerConfig &cfg, std::uint64_t seed, kernels::Isa isa) {
    check_size(ineq);
    cfg.validate();
    const auto run = kernels::seesaw_for(isa);
    kernels::SeesawBatch batch;
    load_problem(batch, ineq, cfg);
    for (int lane = 0; lane < kernels::kLanes; ++lane) load_state(batch, lane, state);

    SplitMix64 rng(seed);
    CorrelationOptimum best;
    bool have = false;
    for (int r = 0; r < cfg.restarts; ++r) {
        load_start(batch, 0, ineq.settings_b, rng);
        for (int lane = 1; lane < kernels::kLanes; ++lane) {
            for (int j = 0; j < ineq.settings_b; ++j) {
                for (int k = 0; k < 3; ++k) batch.bob[j][k][lane] = batch.bob[j][k][0];
            }
        }
        run(batch);
        if (!have || batch.value[0] > best.corr) {
            have = true;
            best.corr = batch.value[0];
            best.converged = batch.converged[0];
            best.alice.assign(static_cast<std::size_t>(ineq.settings_a), Bloch{});
            best.bob.assign(static_cast<std::size_t>(ineq.settings_b), Bloch{});
            for (int i = 0; i < ineq.settings_a; ++i) {
                for (int k = 0; k < 3; ++k) best.alice[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = batch.alice[i][k][0];
            }
            for (int j = 0; j < ineq.settings_b; ++j) {
                for (int k = 0; k < 3; ++k) best.bob[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = batch.bob[j][k][0];
            }
        }
    }
    return best;
}

void optimize_correlation_batch(const BellInequality &ineq, std::span<const BellDiagonalState> states,
                                std::span<const std::uint64_t> seeds, const OptimizerConfig &cfg,
                                std::span<double> corr, std::span<std::uint8_t> converged, kernels::Isa isa) {
    check_size(ineq);
    cfg.validate();
    if (seeds.size() != states.size() || corr.size() != states.size() || converged.size() != states.size()) {
        throw std::invalid_argument("batch spans must have equal length");
    }
    const auto run = kernels::seesaw_for(isa);
    kernels::SeesawBatch batch;
    load_problem(batch, ineq, cfg);

    for (std::size_t base = 0; base < states.size(); base += kernels::kLanes) {
        const std::size_t count = std::min<std::size_t>(kernels::kLanes, states.size() - base);
        std::vector<SplitMix64> rngs;
        rngs.reserve(count);
        for (int lane = 0; lane < kernels::kLanes; ++lane) {
            // Padding lanes repeat the last state; their results are dropped.
            const std::size_t k = base + std::min<std::size_t>(static_cast<std::size_t>(lane), count - 1);
            load_state(batch, lane, states[k]);
            if (static_cast<std::size_t>(lane) < count) rngs.emplace_back(seeds[k]);
        }
        double best[kernels::kLanes];
        bool best_conv[kernels::kLanes] = {};
        std::fill(std::begin(best), std::end(best), 0.0);
        for (int r = 0; r < cfg.restarts; ++r) {
            for (int lane = 0; lane < kernels::kLanes; ++lane) {
                if (static_cast<std::size_t>(lane) < count) {
                    load_start(batch, lane, ineq.settings_b, rngs[static_cast<std::size_t>(lane)]);
                } else {
                    for (int j = 0; j < ineq.settings_b; ++j) {
                        for (int k = 0; k < 3; ++k) batch.bob[j][k][lane] = batch.bob[j][k][0];
                    }
                }
            }
            run(batch);
            for (int lane = 0; lane < kernels::kLanes; ++lane) {
                if (r == 0 || batch.value[lane] > best[lane]) {
                    best[lane] = batch.value[lane];
                    best_conv[lane] = batch.converged[lane];
                }
            }
        }
        for (std::size_t lane = 0; lane < count; ++lane) {
            corr[base + lane] = best[lane];
            converged[base + lane] = best_conv[lane] ? 1 : 0;
        }
    }
}

ViolationResult max_violation(const BellInequality &ineq, const BellDiagonalState &state, const EfficiencySetup &eff,
                              const OptimizerConfig &cfg, std::uint64_t seed) {
    eff.validate();
    const CorrelationOptimum opt = optimize_correlation(ineq, state, cfg, seed);
    ViolationResult out;
    out.q = efficiency_offset(ineq, eff) + eff.product() * opt.corr;
    out.converged = opt.converged;
    for (const auto &a : opt.alice) out.scenario.alice.push_back(QubitProjector::from_bloch(a));
    for (const auto &b : opt.bob) out.scenario.bob.push_back(QubitProjector::from_bloch(b));
    return out;
}

MeasurementScenario seesaw_step(const BellInequality &ineq, const BellDiagonalState &state, const EfficiencySetup &eff,
                                const MeasurementScenario &scenario, Party party) {
    ineq.validate();
    eff.validate();
    if (static_cast<int>(scenario.alice.size()) != ineq.settings_a ||
        static_cast<int>(scenario.bob.size()) != ineq.settings_b) {
        throw std::invalid_argument("scenario does not match the inequality's setting counts");
    }
    MeasurementScenario out = scenario;
    // The traceless part of every effective operator carries the factor eta_A eta_B / 4.
    if (!(eff.product() > 0.0)) return out;
    const Bloch t = state.correlations();
    if (party == Party::kAlice) {
        for (int i = 0; i < ineq.settings_a; ++i) {
            Bloch w{};
            for (int j = 0; j < ineq.settings_b; ++j) {
                const Bloch b = scenario.bob[static_cast<std::size_t>(j)].bloch();
                for (std::size_t k = 0; k < 3; ++k) w[k] += ineq.joint_at(i, j) * t[k] * b[k];
            }
            const Bloch cur = scenario.alice[static_cast<std::size_t>(i)].bloch();
            if (std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]) > 0.0) {
                out.alice[static_cast<std::size_t>(i)] = QubitProjector::from_bloch(normalized_or(w, cur));
            }
        }
    } else {
        for (int j = 0; j < ineq.settings_b; ++j) {
            Bloch w{};
            for (int i = 0; i < ineq.settings_a; ++i) {
                const Bloch a = scenario.alice[static_cast<std::size_t>(i)].bloch();
                for (std::size_t k = 0; k < 3; ++k) w[k] += ineq.joint_at(i, j) * t[k] * a[k];
            }
            const Bloch cur = scenario.bob[static_cast<std::size_t>(j)].bloch();
            if (std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]) > 0.0) {
                out.bob[static_cast<std::size_t>(j)] = QubitProjector::from_bloch(normalized_or(w, cur));
            }
        }
    }
    return out;
}

double observed_value(const BellInequality &ineq, const BellDiagonalState &state, const EfficiencySetup &eff,
                      const MeasurementScenario &scenario) {
    return evaluate(ineq, apply_efficiency(joint_table(state, scenario), eff));
}

}  // namespace diqkd
