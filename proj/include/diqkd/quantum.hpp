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

#ifndef DIQKD_QUANTUM_HPP
#define DIQKD_QUANTUM_HPP

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "diqkd/bell.hpp"

namespace diqkd {

using Bloch = std::array<double, 3>;

/// rho = sum_k lambda[k] |Phi_k><Phi_k| with
///   Phi_0 = (|00>+|11>)/sqrt2, Phi_1 = (|00>-|11>)/sqrt2,
///   Phi_2 = (|01>+|10>)/sqrt2, Phi_3 = (|01>-|10>)/sqrt2.
class BellDiagonalState {
   public:
    /// Throws std::invalid_argument unless the weights are nonnegative and sum to 1 (1e-12).
    explicit BellDiagonalState(std::array<double, 4> lambda);

    static BellDiagonalState phi0() { return BellDiagonalState({1.0, 0.0, 0.0, 0.0}); }
    static BellDiagonalState maximally_mixed() { return BellDiagonalState({0.25, 0.25, 0.25, 0.25}); }

    const std::array<double, 4> &lambda() const { return lambda_; }
    double operator[](int k) const { return lambda_[static_cast<std::size_t>(k)]; }

    /// Diagonal of the correlation matrix T_kl = tr[rho sigma_k (x) sigma_l]; the local Bloch
    /// vectors are zero, so rho = (1 + sum_k t_k sigma_k (x) sigma_k) / 4.
    Bloch correlations() const;

    /// 4x4 density matrix in the |ab> basis, a the more significant bit.
    Eigen::Matrix4cd density() const;

   private:
    std::array<double, 4> lambda_;
};

/// Outcome 0 projects on |+n> = cos(theta/2)|0> + sin(theta/2) e^{i phi}|1>, outcome 1 on |-n>.
struct QubitProjector {
    double theta = 0.0;  // [0, pi]
    double phi = 0.0;    // [0, 2pi)

    Bloch bloch() const;
    static QubitProjector from_bloch(const Bloch &n);
    /// |+n> when outcome == 0, |-n> when outcome == 1.
    Eigen::Vector2cd ket(int outcome) const;
};

struct MeasurementScenario {
    std::vector<QubitProjector> alice;
    std::vector<QubitProjector> bob;
};

struct EfficiencySetup {
    double eta_a = 1.0;
    double eta_b = 1.0;

    static EfficiencySetup ideal() { return {1.0, 1.0}; }
    static EfficiencySetup symmetric(double eta) { return {eta, eta}; }
    static EfficiencySetup asymmetric(double eta) { return {1.0, eta}; }

    /// Throws std::invalid_argument when an efficiency is outside [0,1].
    void validate() const;
    double product() const { return eta_a * eta_b; }
};

/// P(a,b|i,j) = tr[(p_a (x) p_b) rho] with rank-1 qubit projectors.
ProbabilityTable joint_table(const BellDiagonalState &state, const MeasurementScenario &scenario);

/// Undetected events are assigned outcome 0:
///   P -> eA eB P + d_a0 (1-eA) eB P_B(b|j) + d_b0 eA (1-eB) P_A(a|i) + d_a0 d_b0 (1-eA)(1-eB).
ProbabilityTable apply_efficiency(const ProbabilityTable &table, const EfficiencySetup &eff);

/// QBER of the z-basis key pair, Lambda2 + Lambda3, after the two-efficiency map.
double qber(const BellDiagonalState &state, const EfficiencySetup &eff);

/// Affine efficiency map applied to an ideal error rate.
double degrade_qber(double ideal, const EfficiencySetup &eff);

}  // namespace diqkd

#endif  // DIQKD_QUANTUM_HPP
