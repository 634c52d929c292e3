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

#ifndef DIQKD_ANALYSIS_HPP
#define DIQKD_ANALYSIS_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "diqkd/bell.hpp"
#include "diqkd/montecarlo.hpp"
#include "diqkd/optimize.hpp"
#include "diqkd/quantum.hpp"

namespace diqkd {

/// A required numerical result does not exist (no crossing, threshold outside the search range).
class NumericalError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct McParams {
    std::size_t samples = 200000;
    std::uint64_t seed = 1;
    int bins = 200;
    int gamma_bins = 200;
    OptimizerConfig optimizer;
    int threads = 0;
    bool constrain_sym_mutual = true;
    bool constrain_sym_eaves = false;
    double margin = 0.0;
    double eta_tol = 1e-3;
};

/// Independent substreams of the run seed for the two clouds.
std::uint64_t eaves_seed(std::uint64_t seed);
std::uint64_t mutual_seed(std::uint64_t seed);

struct Crossing {
    double q = 0.0;
    double i = 0.0;
};

/// Asymptotic key rate R = I_AB - I_E (bits per raw key symbol) on a shared bin grid.
struct KeyRateReport {
    std::vector<double> q_grid;  // bin midpoints
    std::vector<std::optional<double>> ie;
    std::vector<std::optional<double>> iab;
    std::vector<std::optional<double>> rate;
    std::vector<bool> ie_interpolated;  // interior empty bins filled linearly
    std::vector<bool> iab_interpolated;
    std::optional<Crossing> crossing;
    bool crossing_at_range_end = false;  // rate still positive in the lowest shared bin
    std::optional<double> eps_cr;
    EfficiencySetup eff;
};

/// Fills interior empty bins by linear interpolation between occupied neighbours; `filled`
/// flags the bins that were filled.
std::vector<std::optional<double>> interpolate_gaps(const BoundaryCurve &curve, std::vector<bool> &filled);

/// Differences on bins where both curves have a value (occupied or interpolated). The
/// crossing is the first positive -> non-positive change of (iab - ie) scanning from high Q
/// down, refined linearly; eps_cr = binary_inverse(1 - i*). When the rate stays positive down
/// to the lowest shared bin, the crossing is placed at that bin's lower edge with i* = iab
/// there. Throws std::invalid_argument when the grids differ or the curves share no bin.
KeyRateReport key_rate(const BoundaryCurve &ie, const BoundaryCurve &iab, const EfficiencySetup &eff);

inline constexpr double kChshQuantumMax = 0.20710678118654752;  // (sqrt2 - 1)/2

/// Closed-form CHSH curves for Bell-diagonal states in probability form; domain [0, (sqrt2-1)/2].
double analytic_chsh_ie(double q);
double analytic_chsh_iab(double q);

/// Analytic curves sampled at the bin midpoints of `bins` bins over [0, (sqrt2-1)/2].
BoundaryCurve analytic_chsh_curve(CurveKind kind, int bins);

/// Efficiency lower bound (m_A + m_B - 2)/(m_A m_B - 1) for Bell tests; comparison only.
double mp_lower_bound(int settings_a, int settings_b);

enum class SetupMode { kSymmetric, kAsymmetric };

EfficiencySetup setup_for(SetupMode mode, double eta);

struct ThresholdResult {
    double eta_min = 1.0;    // bracket midpoint
    double bracket_lo = 0.5; // predicate false
    double bracket_hi = 1.0; // predicate true
    int evaluations = 0;
    double margin = 0.0;
    std::string caveat;
};

/// The Monte Carlo protocol model of one inequality: the EAVES survey (ideal efficiency) and
/// the MUTUAL survey, both computed once. Clouds at any efficiency reuse the MUTUAL survey,
/// so every efficiency sees the same states.
class ProtocolModel {
   public:
    ProtocolModel(BellInequality ineq, McParams params);

    const BellInequality &inequality() const { return ineq_; }
    const McParams &params() const { return params_; }
    const StateSurvey &eaves_survey() const { return eaves_; }
    const StateSurvey &mutual_survey() const { return mutual_; }
    const SampleCloud &eaves_cloud() const { return eaves_cloud_; }
    const BoundaryCurve &ie_curve() const { return ie_curve_; }

    SampleCloud mutual_cloud(const EfficiencySetup &eff) const;
    BoundaryCurve iab_curve(const EfficiencySetup &eff) const;
    KeyRateReport key_rate(const EfficiencySetup &eff) const;

    /// Some occupied bin has iab > ie + margin.
    bool secure(const EfficiencySetup &eff) const;

    /// Bisection on eta in [0.5, 1] to width eta_tol. Throws NumericalError when the predicate
    /// holds at 0.5 or fails at 1.
    ThresholdResult threshold(SetupMode mode) const;

   private:
    BellInequality ineq_;
    McParams params_;
    StateSurvey eaves_;
    StateSurvey mutual_;
    SampleCloud eaves_cloud_;
    BoundaryCurve ie_curve_;
};

ThresholdResult threshold_efficiency(const BellInequality &ineq, SetupMode mode, const McParams &params);

struct Table2Row {
    std::string inequality;
    std::optional<double> eps_cr_ideal;
    std::optional<double> eps_cr_sym;
    std::optional<double> eps_cr_asym;
    double eta_min_sym = 1.0;
    double eta_min_asym = 1.0;
    std::optional<Crossing> crossing_ideal;
    std::optional<Crossing> crossing_sym;
    std::optional<Crossing> crossing_asym;
};

/// Runs the pipeline at eta = 1 and at both thresholds. The eps_cr columns at the thresholds
/// are evaluated at the upper end of each bisection bracket.
Table2Row table2_row(const BellInequality &ineq, const McParams &params);
Table2Row table2_row(const ProtocolModel &model);

struct Bb84Result {
    KeyRateReport report;
    SampleCloud eaves;                  // (Q, chi') with Alice's measurement fixed along z
    SampleCloud mutual;                 // (Q, Gamma) from the same states
    std::vector<CloudPoint> rate_cloud; // (eps, Gamma - chi_max) for every state
};

/// BB84 reduction of the CHSH protocol on given states (ideal efficiency).
Bb84Result bb84_from_survey(const StateSurvey &survey, int bins);

/// Samples states with Lambda1 = Lambda2 and runs bb84_from_survey.
Bb84Result bb84_analysis(const McParams &params);

}  // namespace diqkd

#endif  // DIQKD_ANALYSIS_HPP
