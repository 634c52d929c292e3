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
#include "diqkd/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "diqkd/entropy.hpp"
#include "diqkd/random.hpp"

namespace diqkd {

namespace {

constexpr double kCornerConcentration = 0.3;

std::array<double, 4> dirichlet(SplitMix64 &rng, double alpha) {
    std::gamma_distribution<double> gamma(alpha, 1.0);
    for (;;) {
        std::array<double, 4> g{};
        double sum = 0.0;
        for (double &x : g) {
            x = gamma(rng);
            sum += x;
        }
        if (sum > 0.0) {
            for (double &x : g) x /= sum;
            return g;
        }
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

int resolve_threads(int requested) {
    if (const char *env = std::getenv("DIQKD_THREADS"); env != nullptr && *env != '\0') {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
        throw std::invalid_argument("DIQKD_THREADS must be a positive integer");
    }
    if (requested > 0) return requested;
    return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

BellDiagonalState sample_state(std::uint64_t seed, std::uint64_t index, bool constrain_sym) {
    SplitMix64 rng(derive_seed(derive_seed(seed, index), 0));
    const bool flat = rng.uniform() < 0.5;
    std::array<double, 4> l = dirichlet(rng, flat ? 1.0 : kCornerConcentration);
    if (constrain_sym) {
        const double m = 0.5 * (l[1] + l[2]);
        l[1] = m;
        l[2] = m;
        const double sum = l[0] + l[1] + l[2] + l[3];
        for (double &x : l) x /= sum;
    }
    return BellDiagonalState(l);
}

std::vector<BellDiagonalState> sample_states(std::size_t n, std::uint64_t seed, bool constrain_sym) {
    std::vector<BellDiagonalState> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) out.push_back(sample_state(seed, k, constrain_sym));
    return out;
}

std::uint64_t restart_seed(std::uint64_t seed, std::uint64_t index) {
    return derive_seed(derive_seed(seed, index), 1);
}

StateSurvey survey_states(const BellInequality &ineq, std::vector<BellDiagonalState> states, std::uint64_t seed,
                          const OptimizerConfig &cfg, int threads) {
    StateSurvey survey;
    survey.states = std::move(states);
    const std::size_t n = survey.states.size();
    survey.corr.assign(n, 0.0);
    survey.converged.assign(n, 0);
    std::vector<std::uint64_t> seeds(n);
    for (std::size_t k = 0; k < n; ++k) seeds[k] = restart_seed(seed, k);
    const kernels::Isa isa = kernels::active_isa();
    const std::span<const BellDiagonalState> all_states(survey.states);
    parallel_for(n, kernels::kLanes * 64, resolve_threads(threads), [&](std::size_t begin, std::size_t end) {
        const std::size_t len = end - begin;
        optimize_correlation_batch(ineq, all_states.subspan(begin, len), std::span<const std::uint64_t>(seeds).subspan(begin, len),
                                   cfg, std::span<double>(survey.corr).subspan(begin, len),
                                   std::span<std::uint8_t>(survey.converged).subspan(begin, len), isa);
    });
    return survey;
}

StateSurvey survey_sampled(const BellInequality &ineq, std::size_t n, std::uint64_t seed, bool constrain_sym,
                           const OptimizerConfig &cfg, int threads) {
    std::vector<BellDiagonalState> states(n, BellDiagonalState::phi0());
    parallel_for(n, 1024, resolve_threads(threads), [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) states[k] = sample_state(seed, k, constrain_sym);
    });
    return survey_states(ineq, std::move(states), seed, cfg, threads);
}

SampleCloud eaves_cloud(const BellInequality &ineq, const StateSurvey &survey, std::uint64_t seed) {
    SampleCloud cloud;
    cloud.kind = CloudKind::kEaves;
    cloud.eff = EfficiencySetup::ideal();
    cloud.seed = seed;
    const double offset = efficiency_offset(ineq, cloud.eff);
    for (std::size_t k = 0; k < survey.size(); ++k) {
        const double q = offset + survey.corr[k];
        if (q > 0.0) cloud.points.push_back({q, holevo_extrema(survey.states[k]).chi_max});
    }
    return cloud;
}

SampleCloud mutual_cloud(const BellInequality &ineq, const StateSurvey &survey, const EfficiencySetup &eff,
                         std::uint64_t seed) {
    eff.validate();
    SampleCloud cloud;
    cloud.kind = CloudKind::kMutual;
    cloud.eff = eff;
    cloud.seed = seed;
    const double offset = efficiency_offset(ineq, eff);
    const double scale = eff.product();
    for (std::size_t k = 0; k < survey.size(); ++k) {
        const double q = offset + scale * survey.corr[k];
        if (q > 0.0) cloud.points.push_back({q, 1.0 - binary(qber(survey.states[k], eff))});
    }
    return cloud;
}

SampleCloud collect_eaves_cloud(const BellInequality &ineq, std::size_t n, std::uint64_t seed,
                                const OptimizerConfig &cfg, int threads) {
    return eaves_cloud(ineq, survey_sampled(ineq, n, seed, false, cfg, threads), seed);
}

SampleCloud collect_mutual_cloud(const BellInequality &ineq, std::size_t n, std::uint64_t seed,
                                 const OptimizerConfig &cfg, const EfficiencySetup &eff, bool constrain_sym,
                                 int threads) {
    return mutual_cloud(ineq, survey_sampled(ineq, n, seed, constrain_sym, cfg, threads), eff, seed);
}

std::size_t BoundaryCurve::occupied_count() const {
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](const auto &v) { return v.has_value(); }));
}

std::optional<std::size_t> BoundaryCurve::bin_of(double q) const {
    const std::size_t n = bins();
    if (n == 0 || !(q >= bin_edges.front() && q <= bin_edges.back())) return std::nullopt;
    const double lo = bin_edges.front();
    const double width = (bin_edges.back() - lo) / static_cast<double>(n);
    auto b = static_cast<std::size_t>(std::min<double>(static_cast<double>(n - 1), std::floor((q - lo) / width)));
    // Snap to the stored edges so membership agrees with lo(b) <= q < hi(b).
    while (b > 0 && q < bin_edges[b]) --b;
    while (b + 1 < n && q >= bin_edges[b + 1]) ++b;
    return b;
}

std::vector<double> uniform_edges(double lo, double hi, int bins) {
    if (bins < 1) throw std::invalid_argument("need at least one bin");
    if (!(hi > lo)) hi = lo + 1e-9;
    std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
    edges.back() = hi;
    return edges;
}

BoundaryCurve upper_boundary_on(const SampleCloud &cloud, std::span<const double> edges) {
    if (edges.size() < 2) throw std::invalid_argument("boundary grid needs at least one bin");
    BoundaryCurve curve;
    curve.kind = cloud.kind == CloudKind::kEaves ? CurveKind::kIe : CurveKind::kIab;
    curve.bin_edges.assign(edges.begin(), edges.end());
    curve.values.assign(edges.size() - 1, std::nullopt);
    for (const auto &p : cloud.points) {
        if (auto b = curve.bin_of(p.q)) {
            auto &v = curve.values[*b];
            if (!v || p.y > *v) v = p.y;
        }
    }
    return curve;
}

BoundaryCurve upper_boundary(const SampleCloud &cloud, int bins) {
    if (cloud.points.empty()) throw std::invalid_argument("cannot take the boundary of an empty cloud");
    if (bins < 2) throw std::invalid_argument("boundary needs at least two bins");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto &p : cloud.points) {
        lo = std::min(lo, p.q);
        hi = std::max(hi, p.q);
    }
    const auto edges = uniform_edges(lo, hi, bins);
    return upper_boundary_on(cloud, edges);
}

bool is_monotone_decreasing(const BoundaryCurve &curve, double slack) {
    std::optional<double> prev;
    for (const auto &v : curve.values) {
        if (!v) continue;
        if (prev && *v > *prev + slack) return false;
        prev = v;
    }
    return true;
}

BoundaryCurve mutual_curve_general(const SampleCloud &iab_cloud, const BoundaryCurve &ie_curve, int gamma_bins) {
    if (gamma_bins < 1) throw std::invalid_argument("need at least one Gamma level");
    BoundaryCurve out;
    out.kind = CurveKind::kIab;
    out.bin_edges = ie_curve.bin_edges;
    out.values.assign(ie_curve.bins(), std::nullopt);

    struct Located {
        std::size_t bin;
        double y;
    };
    std::vector<Located> pts;
    double ylo = std::numeric_limits<double>::infinity();
    double yhi = -std::numeric_limits<double>::infinity();
    for (const auto &p : iab_cloud.points) {
        const auto b = ie_curve.bin_of(p.q);
        if (!b || !ie_curve.occupied(*b)) continue;
        pts.push_back({*b, p.y});
        ylo = std::min(ylo, p.y);
        yhi = std::max(yhi, p.y);
    }
    if (pts.empty()) throw std::invalid_argument("Gamma cloud does not overlap the I_E curve");

    const auto levels = uniform_edges(ylo, yhi, gamma_bins);
    const BoundaryCurve level_grid{CurveKind::kIab, levels, std::vector<std::optional<double>>(levels.size() - 1)};
    // Per level: the bin maximizing I_E (lowest Q on ties) and the largest Gamma there.
    std::vector<std::optional<std::size_t>> arg(level_grid.bins());
    std::vector<double> best_y(level_grid.bins(), -std::numeric_limits<double>::infinity());
    for (const auto &p : pts) {
        const std::size_t lv = *level_grid.bin_of(p.y);
        auto &a = arg[lv];
        const double ie = *ie_curve.values[p.bin];
        if (!a || ie > *ie_curve.values[*a] || (ie == *ie_curve.values[*a] && p.bin < *a)) {
            a = p.bin;
            best_y[lv] = p.y;
        } else if (p.bin == *a) {
            best_y[lv] = std::max(best_y[lv], p.y);
        }
    }
    for (std::size_t lv = 0; lv < arg.size(); ++lv) {
        if (!arg[lv]) continue;
        auto &v = out.values[*arg[lv]];
        if (!v || best_y[lv] > *v) v = best_y[lv];
    }
    return out;
}

BoundaryCurve mutual_curve(const SampleCloud &iab_cloud, const BoundaryCurve &ie_curve, int gamma_bins) {
    if (is_monotone_decreasing(ie_curve)) {
        BoundaryCurve out = upper_boundary_on(iab_cloud, ie_curve.bin_edges);
        out.kind = CurveKind::kIab;
        if (out.occupied_count() == 0) throw std::invalid_argument("Gamma cloud does not overlap the I_E curve");
        return out;
    }
    return mutual_curve_general(iab_cloud, ie_curve, gamma_bins);
}

std::string_view to_string(CloudKind kind) { return kind == CloudKind::kEaves ? "eaves" : "mutual"; }
std::string_view to_string(CurveKind kind) { return kind == CurveKind::kIe ? "ie" : "iab"; }

void write_cloud_csv(std::ostream &out, const SampleCloud &cloud) {
    out << "q,value,kind\n";
    const std::string kind(to_string(cloud.kind));
    for (const auto &p : cloud.points) out << format_double(p.q) << ',' << format_double(p.y) << ',' << kind << '\n';
}

void write_boundary_csv(std::ostream &out, const BoundaryCurve &curve) {
    out << "bin_lo,bin_hi,value,occupied\n";
    for (std::size_t b = 0; b < curve.bins(); ++b) {
        out << format_double(curve.lo(b)) << ',' << format_double(curve.hi(b)) << ',';
        if (curve.values[b]) out << format_double(*curve.values[b]);
        out << ',' << (curve.values[b] ? 1 : 0) << '\n';
    }
}

namespace {

std::vector<std::string> split_csv(const std::string &line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

SampleCloud read_cloud_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line) || line != "q,value,kind") throw std::invalid_argument("cloud CSV header must be 'q,value,kind'");
    SampleCloud cloud;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 3) throw std::invalid_argument("malformed cloud CSV row '" + line + "'");
        CloudKind kind;
        if (cells[2] == "eaves") {
            kind = CloudKind::kEaves;
        } else if (cells[2] == "mutual") {
            kind = CloudKind::kMutual;
        } else {
            throw std::invalid_argument("unknown cloud kind '" + cells[2] + "'");
        }
        if (first) cloud.kind = kind;
        first = false;
        cloud.points.push_back({std::stod(cells[0]), std::stod(cells[1])});
    }
    return cloud;
}

BoundaryCurve read_boundary_csv(std::istream &in, CurveKind kind) {
    std::string line;
    if (!std::getline(in, line) || line != "bin_lo,bin_hi,value,occupied") {
        throw std::invalid_argument("boundary CSV header must be 'bin_lo,bin_hi,value,occupied'");
    }
    BoundaryCurve curve;
    curve.kind = kind;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 4) throw std::invalid_argument("malformed boundary CSV row '" + line + "'");
        if (curve.bin_edges.empty()) curve.bin_edges.push_back(std::stod(cells[0]));
        curve.bin_edges.push_back(std::stod(cells[1]));
        curve.values.push_back(cells[3] == "1" ? std::optional<double>(std::stod(cells[2])) : std::nullopt);
    }
    return curve;
}

}  // namespace diqkd
