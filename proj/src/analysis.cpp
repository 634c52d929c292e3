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
#include "diqkd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "diqkd/entropy.hpp"
#include "diqkd/random.hpp"

namespace diqkd {

std::uint64_t eaves_seed(std::uint64_t seed) { return derive_seed(seed, 0x45415645ULL); }
std::uint64_t mutual_seed(std::uint64_t seed) { return derive_seed(seed, 0x4d555455ULL); }

std::vector<std::optional<double>> interpolate_gaps(const BoundaryCurve &curve, std::vector<bool> &filled) {
    std::vector<std::optional<double>> out = curve.values;
    filled.assign(out.size(), false);
    std::optional<std::size_t> prev;
    for (std::size_t b = 0; b < out.size(); ++b) {
        if (!curve.values[b]) continue;
        if (prev && b > *prev + 1) {
            const double x0 = curve.mid(*prev);
            const double x1 = curve.mid(b);
            const double y0 = *curve.values[*prev];
            const double y1 = *curve.values[b];
            for (std::size_t g = *prev + 1; g < b; ++g) {
                out[g] = y0 + (y1 - y0) * (curve.mid(g) - x0) / (x1 - x0);
                filled[g] = true;
            }
        }
        prev = b;
    }
    return out;
}

KeyRateReport key_rate(const BoundaryCurve &ie, const BoundaryCurve &iab, const EfficiencySetup &eff) {
    if (ie.bin_edges != iab.bin_edges) throw std::invalid_argument("key rate needs curves on the same bin grid");
    KeyRateReport report;
    report.eff = eff;
    const std::size_t n = ie.bins();
    report.q_grid.resize(n);
    for (std::size_t b = 0; b < n; ++b) report.q_grid[b] = ie.mid(b);
    report.ie = interpolate_gaps(ie, report.ie_interpolated);
    report.iab = interpolate_gaps(iab, report.iab_interpolated);
    report.rate.assign(n, std::nullopt);
    std::vector<std::size_t> shared;
    for (std::size_t b = 0; b < n; ++b) {
        if (report.ie[b] && report.iab[b]) {
            report.rate[b] = *report.iab[b] - *report.ie[b];
            shared.push_back(b);
        }
    }
    if (shared.empty()) throw std::invalid_argument("I_E and I_AB curves do not overlap");

    for (std::size_t k = shared.size() - 1; k > 0; --k) {
        const std::size_t upper = shared[k];
        const std::size_t lower = shared[k - 1];
        const double du = *report.rate[upper];
        const double dl = *report.rate[lower];
        if (du > 0.0 && dl <= 0.0) {
            const double t = du / (du - dl);
            Crossing c;
            c.q = report.q_grid[upper] + t * (report.q_grid[lower] - report.q_grid[upper]);
            c.i = *report.ie[upper] + t * (*report.ie[lower] - *report.ie[upper]);
            report.crossing = c;
            report.eps_cr = binary_inverse(std::clamp(1.0 - c.i, 0.0, 1.0));
            break;
        }
    }
    if (!report.crossing && *report.rate[shared.front()] > 0.0) {
        const std::size_t lowest = shared.front();
        Crossing c;
        c.q = ie.lo(lowest);
        c.i = *report.iab[lowest];
        report.crossing = c;
        report.crossing_at_range_end = true;
        report.eps_cr = binary_inverse(std::clamp(1.0 - c.i, 0.0, 1.0));
    }
    return report;
}

namespace {

void check_chsh_domain(double q) {
    if (!(q >= -1e-12 && q <= kChshQuantumMax + 1e-12)) {
        throw std::domain_error("CHSH violation must lie in [0, (sqrt2-1)/2]");
    }
}

}  // namespace

double analytic_chsh_ie(double q) {
    check_chsh_domain(q);
    const double s = std::min(2.0 * q + 1.0, std::numbers::sqrt2);
    const double root = std::sqrt(std::max(0.0, s * s - 1.0));
    return binary(std::min(1.0, 0.5 * (1.0 + root)));
}

double analytic_chsh_iab(double q) {
    check_chsh_domain(q);
    const double s = std::min(2.0 * q + 1.0, std::numbers::sqrt2);
    return 1.0 - binary(std::max(0.0, 0.5 * (1.0 - s / std::numbers::sqrt2)));
}

BoundaryCurve analytic_chsh_curve(CurveKind kind, int bins) {
    BoundaryCurve curve;
    curve.kind = kind;
    curve.bin_edges = uniform_edges(0.0, kChshQuantumMax, bins);
    curve.values.resize(static_cast<std::size_t>(bins));
    for (std::size_t b = 0; b < curve.values.size(); ++b) {
        curve.values[b] = kind == CurveKind::kIe ? analytic_chsh_ie(curve.mid(b)) : analytic_chsh_iab(curve.mid(b));
    }
    return curve;
}

double mp_lower_bound(int settings_a, int settings_b) {
    if (settings_a < 2 || settings_b < 2) throw std::invalid_argument("need at least two settings per party");
    return static_cast<double>(settings_a + settings_b - 2) / static_cast<double>(settings_a * settings_b - 1);
}

EfficiencySetup setup_for(SetupMode mode, double eta) {
    return mode == SetupMode::kSymmetric ? EfficiencySetup::symmetric(eta) : EfficiencySetup::asymmetric(eta);
}

ProtocolModel::ProtocolModel(BellInequality ineq, McParams params) : ineq_(std::move(ineq)), params_(params) {
    ineq_.validate();
    params_.optimizer.validate();
    if (params_.samples < 1) throw std::invalid_argument("need at least one sample");
    if (params_.bins < 2) throw std::invalid_argument("need at least two bins");
    eaves_ = survey_sampled(ineq_, params_.samples, eaves_seed(params_.seed), params_.constrain_sym_eaves,
                            params_.optimizer, params_.threads);
    mutual_ = survey_sampled(ineq_, params_.samples, mutual_seed(params_.seed), params_.constrain_sym_mutual,
                             params_.optimizer, params_.threads);
    eaves_cloud_ = diqkd::eaves_cloud(ineq_, eaves_, eaves_seed(params_.seed));
    if (eaves_cloud_.points.empty()) {
        throw NumericalError("no sampled state violates '" + ineq_.name + "'; cannot build I_E");
    }
    ie_curve_ = upper_boundary(eaves_cloud_, params_.bins);
}

SampleCloud ProtocolModel::mutual_cloud(const EfficiencySetup &eff) const {
    return diqkd::mutual_cloud(ineq_, mutual_, eff, mutual_seed(params_.seed));
}

BoundaryCurve ProtocolModel::iab_curve(const EfficiencySetup &eff) const {
    return mutual_curve(mutual_cloud(eff), ie_curve_, params_.gamma_bins);
}

KeyRateReport ProtocolModel::key_rate(const EfficiencySetup &eff) const {
    return diqkd::key_rate(ie_curve_, iab_curve(eff), eff);
}

bool ProtocolModel::secure(const EfficiencySetup &eff) const {
    const SampleCloud cloud = mutual_cloud(eff);
    bool overlaps = false;
    for (const auto &p : cloud.points) {
        if (auto b = ie_curve_.bin_of(p.q); b && ie_curve_.occupied(*b)) {
            overlaps = true;
            break;
        }
    }
    if (!overlaps) return false;
    const BoundaryCurve iab = mutual_curve(cloud, ie_curve_, params_.gamma_bins);
    for (std::size_t b = 0; b < iab.bins(); ++b) {
        if (iab.values[b] && ie_curve_.values[b] && *iab.values[b] > *ie_curve_.values[b] + params_.margin) return true;
    }
    return false;
}

ThresholdResult ProtocolModel::threshold(SetupMode mode) const {
    ThresholdResult r;
    r.margin = params_.margin;
    r.caveat = "predicate compares per-bin sample maxima; eta_min carries Monte Carlo error of order the bin width";
    double lo = 0.5;
    double hi = 1.0;
    r.evaluations = 2;
    if (!secure(setup_for(mode, hi))) {
        throw NumericalError("no positive key rate at eta = 1 for '" + ineq_.name + "'");
    }
    if (secure(setup_for(mode, lo))) {
        throw NumericalError("positive key rate already at eta = 0.5 for '" + ineq_.name + "'");
    }
    while (hi - lo > params_.eta_tol) {
        const double mid = 0.5 * (lo + hi);
        ++r.evaluations;
        if (secure(setup_for(mode, mid))) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    r.bracket_lo = lo;
    r.bracket_hi = hi;
    r.eta_min = 0.5 * (lo + hi);
    return r;
}

ThresholdResult threshold_efficiency(const BellInequality &ineq, SetupMode mode, const McParams &params) {
    return ProtocolModel(ineq, params).threshold(mode);
}

Table2Row table2_row(const ProtocolModel &model) {
    Table2Row row;
    row.inequality = model.inequality().name;
    const KeyRateReport ideal = model.key_rate(EfficiencySetup::ideal());
    row.eps_cr_ideal = ideal.eps_cr;
    row.crossing_ideal = ideal.crossing;

    const ThresholdResult sym = model.threshold(SetupMode::kSymmetric);
    row.eta_min_sym = sym.eta_min;
    const KeyRateReport at_sym = model.key_rate(setup_for(SetupMode::kSymmetric, sym.bracket_hi));
    row.eps_cr_sym = at_sym.eps_cr;
    row.crossing_sym = at_sym.crossing;

    const ThresholdResult asym = model.threshold(SetupMode::kAsymmetric);
    row.eta_min_asym = asym.eta_min;
    const KeyRateReport at_asym = model.key_rate(setup_for(SetupMode::kAsymmetric, asym.bracket_hi));
    row.eps_cr_asym = at_asym.eps_cr;
    row.crossing_asym = at_asym.crossing;
    return row;
}

Table2Row table2_row(const BellInequality &ineq, const McParams &params) {
    return table2_row(ProtocolModel(ineq, params));
}

Bb84Result bb84_from_survey(const StateSurvey &survey, int bins) {
    const BellInequality chsh = catalog_get("CHSH");
    const double offset = efficiency_offset(chsh, EfficiencySetup::ideal());
    Bb84Result out;
    out.eaves.kind = CloudKind::kEaves;
    out.mutual.kind = CloudKind::kMutual;
    for (std::size_t k = 0; k < survey.size(); ++k) {
        const BellDiagonalState &s = survey.states[k];
        const double eps = qber(s, EfficiencySetup::ideal());
        const double gamma = 1.0 - binary(eps);
        out.rate_cloud.push_back({eps, gamma - holevo_extrema(s).chi_max});
        const double q = offset + survey.corr[k];
        if (q > 0.0) {
            out.eaves.points.push_back({q, holevo_bb84(s)});
            out.mutual.points.push_back({q, gamma});
        }
    }
    if (out.eaves.points.empty()) throw NumericalError("no sampled state violates CHSH");
    const BoundaryCurve ie = upper_boundary(out.eaves, bins);
    const BoundaryCurve iab = mutual_curve(out.mutual, ie, bins);
    out.report = key_rate(ie, iab, EfficiencySetup::ideal());
    return out;
}

Bb84Result bb84_analysis(const McParams &params) {
    const BellInequality chsh = catalog_get("CHSH");
    const StateSurvey survey =
        survey_sampled(chsh, params.samples, mutual_seed(params.seed), params.constrain_sym_mutual,
                       params.optimizer, params.threads);
    Bb84Result out = bb84_from_survey(survey, params.bins);
    out.eaves.seed = out.mutual.seed = mutual_seed(params.seed);
    return out;
}

}  // namespace diqkd
