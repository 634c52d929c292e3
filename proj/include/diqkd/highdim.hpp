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
#ifndef DIQKD_HIGHDIM_HPP
#define DIQKD_HIGHDIM_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "diqkd/analysis.hpp"
#include "diqkd/bell.hpp"
#include "diqkd/optimize.hpp"
#include "diqkd/quantum.hpp"

namespace diqkd {

// Dichotomized measurements on d x d systems (d = 2, 3, 4). The outcome-0 projector of a
// setting with split xi and unitary U is sum_{t<xi} U|t><t|U^dagger.

inline constexpr int kMinDim = 2;
inline constexpr int kMaxDim = 4;

struct HighDimState {
    int d = 2;
    Eigen::MatrixXcd density;  // d^2 x d^2, index a*d + b
    std::string family;

    /// Throws std::invalid_argument unless Hermitian, PSD and unit trace (1e-10).
    void validate() const;

    static HighDimState pure(int d, const Eigen::VectorXcd &psi, std::string family);
    static HighDimState maximally_entangled(int d);            // sum |ii> / sqrt(d)
    static HighDimState corner_pair(int d);                    // (|00> + |d-1,d-1>) / sqrt2
    static HighDimState skew_pair(int d);                      // (|00> + |1,d-1>) / sqrt2
    static HighDimState embed(const BellDiagonalState &state);  // d = 2
    static HighDimState mixture(const std::vector<std::pair<double, HighDimState>> &parts, std::string family);
};

struct PartitionedProjector {
    int xi = 1;
    Eigen::MatrixXcd unitary;
    Eigen::MatrixXcd p0;
    Eigen::MatrixXcd p1;
};

/// Throws std::invalid_argument unless 1 <= xi <= d-1 and unitary is d x d.
PartitionedProjector partition_projectors(int xi, const Eigen::MatrixXcd &unitary, int d);

/// Haar-random d x d unitary (QR of a complex Gaussian matrix with phase fix).
Eigen::MatrixXcd haar_unitary(int d, std::uint64_t seed);

/// Unitary whose first column is |+n> and second |-n>.
Eigen::MatrixXcd qubit_unitary(const QubitProjector &p);

struct HighDimViolation {
    double q = 0.0;
    bool converged = false;
    std::vector<Eigen::MatrixXcd> alice;  // per-setting unitaries
    std::vector<Eigen::MatrixXcd> bob;
};

/// Observed Bell value for given per-setting unitaries.
double highdim_value(const BellInequality &ineq, const HighDimState &state, int xi,
                     const std::vector<Eigen::MatrixXcd> &alice, const std::vector<Eigen::MatrixXcd> &bob,
                     const EfficiencySetup &eff = EfficiencySetup::ideal());

/// See-saw over per-setting unitaries: each update keeps the top-xi eigenspace of the
/// setting's effective operator as outcome 0. Best over cfg.restarts Haar starts.
HighDimViolation violation_highdim(const BellInequality &ineq, const HighDimState &state, int xi,
                                   const OptimizerConfig &cfg, std::uint64_t seed,
                                   const EfficiencySetup &eff = EfficiencySetup::ideal());

/// Probability that the computational-basis partition outcomes differ, degraded by eff.
double qber_highdim(const HighDimState &state, int xi, const EfficiencySetup &eff = EfficiencySetup::ideal());
double gamma_highdim(const HighDimState &state, int xi, const EfficiencySetup &eff = EfficiencySetup::ideal());

struct EveWeights {
    std::vector<double> q;

    /// Throws std::invalid_argument unless nonnegative with both halves summing to 1/2 (1e-9).
    void validate(int xi) const;
};

/// All weight vectors on the grid of step 1/denominator (denominator even) for split xi.
std::vector<EveWeights> weight_grid(int d, int xi, int denominator);

/// von Neumann entropy in bits.
double von_neumann(const Eigen::MatrixXcd &rho);

/// Eve's state of the purification built from the eigendecomposition of the density.
Eigen::MatrixXcd eve_state(const HighDimState &state);

/// Unnormalized Eve states conditioned on Alice's rank-1 outcomes U|a><a|U^dagger.
std::vector<Eigen::MatrixXcd> eve_conditional_states(const HighDimState &state, const Eigen::MatrixXcd &alice_unitary);

/// S(rho_E) - sum_a q_a S(rho_E|a). Throws std::domain_error when an outcome with q_a > 0
/// has zero probability.
double holevo_highdim(const HighDimState &state, int xi, const Eigen::MatrixXcd &alice_unitary,
                      const EveWeights &weights);

struct HighDimGrid {
    int weight_denominator = 8;     // EveWeights step 1/8
    int mix_denominator = 4;        // convex-combination step of the pure family
    double bin_half_width = 0.0025; // Q window around the target
    int unitary_samples = 48;       // Haar candidates for Alice's key measurement (d >= 3)
    int sphere_theta = 19;          // Bloch grid for d = 2
    int sphere_phi = 36;
    std::size_t qubit_samples = 20000;  // Bell-diagonal states for d = 2
    std::uint64_t seed = 1;
    OptimizerConfig optimizer;
    int threads = 0;
};

/// States considered for dimension d: sampled Bell-diagonal states for d = 2; convex
/// combinations of the three pure examples for d >= 3.
std::vector<HighDimState> family_states(int d, const HighDimGrid &grid);

struct IeHighDim {
    double chi = 0.0;  // lower bound on Eve's information
    std::size_t states_in_bin = 0;
    std::string best_family;
    EveWeights best_weights;
};

/// Maximal chi over family states whose ideal Q^(xi) lies within bin_half_width of q_value,
/// Alice unitary candidates and the weights grid. Throws NumericalError for an empty bin.
IeHighDim ie_highdim(const BellInequality &ineq, int d, int xi, double q_value, const HighDimGrid &grid);

struct KeyRateTerm {
    int d = 2;
    int xi = 1;
    std::optional<double> iab;
    std::optional<double> ie;
    std::optional<double> rate;  // empty when no family state falls in the bin
};

struct KeyRateMin {
    double rate = 0.0;
    int d = 2;
    int xi = 1;
    std::vector<KeyRateTerm> terms;
};

/// min over d = 2..d_max and xi = 1..d-1 of I_AB^(xi) - I_E^(xi) at q_value. The d = 2 term
/// is the base pipeline's rate in the bin containing q_value. Terms with an empty bin are
/// skipped. Throws NumericalError when the base report has no rate there.
KeyRateMin key_rate_min(const BellInequality &ineq, int d_max, double q_value, const KeyRateReport &base,
                        const HighDimGrid &grid);
KeyRateMin key_rate_min(const BellInequality &ineq, int d_max, double q_value, const EfficiencySetup &eff,
                        const McParams &params, const HighDimGrid &grid);

}  // namespace diqkd

#endif  // DIQKD_HIGHDIM_HPP
