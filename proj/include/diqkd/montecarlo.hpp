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

#ifndef DIQKD_MONTECARLO_HPP
#define DIQKD_MONTECARLO_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "diqkd/bell.hpp"
#include "diqkd/optimize.hpp"
#include "diqkd/quantum.hpp"

namespace diqkd {

/// Worker count: DIQKD_THREADS if set, else `requested` if positive, else the hardware count.
int resolve_threads(int requested = 0);

/// Calls fn(begin, end) over a partition of [0, n) into at most `threads` contiguous chunks
/// whose boundaries are multiples of `grain`.
template <class Fn>
void parallel_for(std::size_t n, std::size_t grain, int threads, Fn &&fn);

// ---------------------------------------------------------------------------------------
// Sampling

/// State `index` of the stream `seed`: with probability 1/2 flat Dirichlet on the simplex,
/// otherwise Dirichlet(0.3,0.3,0.3,0.3). constrain_sym replaces Lambda1, Lambda2 by their mean.
BellDiagonalState sample_state(std::uint64_t seed, std::uint64_t index, bool constrain_sym);

std::vector<BellDiagonalState> sample_states(std::size_t n, std::uint64_t seed, bool constrain_sym);

/// Seed of the optimizer restarts for state `index` of the stream `seed`.
std::uint64_t restart_seed(std::uint64_t seed, std::uint64_t index);

/// Measurement-optimized correlation part for each state (see optimize.hpp). The Bell value at
/// any efficiency is efficiency_offset(ineq, eff) + eff.product() * corr[k].
struct StateSurvey {
    std::vector<BellDiagonalState> states;
    std::vector<double> corr;
    std::vector<std::uint8_t> converged;

    std::size_t size() const { return states.size(); }
};

/// States k = 0..n-1 of `seed`, optimized with restart_seed(seed, k).
StateSurvey survey_sampled(const BellInequality &ineq, std::size_t n, std::uint64_t seed, bool constrain_sym,
                           const OptimizerConfig &cfg, int threads = 0);

/// Explicit states; state k uses restart_seed(seed, k).
StateSurvey survey_states(const BellInequality &ineq, std::vector<BellDiagonalState> states, std::uint64_t seed,
                          const OptimizerConfig &cfg, int threads = 0);

// ---------------------------------------------------------------------------------------
// Clouds and boundaries

enum class CloudKind { kEaves, kMutual };

struct CloudPoint {
    double q = 0.0;
    double y = 0.0;

    bool operator==(const CloudPoint &) const = default;
};

struct SampleCloud {
    CloudKind kind = CloudKind::kEaves;
    std::vector<CloudPoint> points;
    EfficiencySetup eff;
    std::uint64_t seed = 0;
};

/// (Q, chi_max) at ideal efficiency, keeping Q > 0.
SampleCloud eaves_cloud(const BellInequality &ineq, const StateSurvey &survey, std::uint64_t seed = 0);

/// (Q, 1 - h(qber)) at `eff`, keeping Q > 0.
SampleCloud mutual_cloud(const BellInequality &ineq, const StateSurvey &survey, const EfficiencySetup &eff,
                         std::uint64_t seed = 0);

SampleCloud collect_eaves_cloud(const BellInequality &ineq, std::size_t n, std::uint64_t seed,
                                const OptimizerConfig &cfg, int threads = 0);

SampleCloud collect_mutual_cloud(const BellInequality &ineq, std::size_t n, std::uint64_t seed,
                                 const OptimizerConfig &cfg, const EfficiencySetup &eff, bool constrain_sym = true,
                                 int threads = 0);

enum class CurveKind { kIe, kIab };

/// Per-bin values over equal-width bins; empty bins hold std::nullopt.
struct BoundaryCurve {
    CurveKind kind = CurveKind::kIe;
    std::vector<double> bin_edges;
    std::vector<std::optional<double>> values;

    std::size_t bins() const { return values.size(); }
    double lo(std::size_t b) const { return bin_edges[b]; }
    double hi(std::size_t b) const { return bin_edges[b + 1]; }
    double mid(std::size_t b) const { return 0.5 * (bin_edges[b] + bin_edges[b + 1]); }
    bool occupied(std::size_t b) const { return values[b].has_value(); }
    std::size_t occupied_count() const;

    /// Bin containing q (the last bin is closed), or nullopt outside the grid.
    std::optional<std::size_t> bin_of(double q) const;
};

/// Equal-width edges over [lo, hi]; a degenerate range is widened to [lo, lo + 1e-9].
std::vector<double> uniform_edges(double lo, double hi, int bins);

/// Per-bin maximum of y over `bins` bins spanning the observed q range. Throws
/// std::invalid_argument for an empty cloud or bins < 2.
BoundaryCurve upper_boundary(const SampleCloud &cloud, int bins);

/// Per-bin maximum of y on given edges; points outside the grid are ignored.
BoundaryCurve upper_boundary_on(const SampleCloud &cloud, std::span<const double> edges);

/// True when occupied values never rise by more than `slack` from one occupied bin to the next.
bool is_monotone_decreasing(const BoundaryCurve &curve, double slack = 1e-2);

/// Q-dependent mutual information on ie_curve's grid. For each Gamma level (gamma_bins equal
/// levels over the observed Gamma range), the bin with the largest I_E among the level's points
/// receives the level's largest Gamma there. When ie_curve is monotone decreasing this is the
/// upper boundary of the cloud, which is returned directly. Throws std::invalid_argument when no
/// cloud point falls on ie_curve's grid.
BoundaryCurve mutual_curve(const SampleCloud &iab_cloud, const BoundaryCurve &ie_curve, int gamma_bins = 200);

/// Same without the monotone shortcut.
BoundaryCurve mutual_curve_general(const SampleCloud &iab_cloud, const BoundaryCurve &ie_curve, int gamma_bins = 200);

// CSV: cloud "q,value,kind"; boundary "bin_lo,bin_hi,value,occupied" (value empty when unoccupied).
void write_cloud_csv(std::ostream &out, const SampleCloud &cloud);
void write_boundary_csv(std::ostream &out, const BoundaryCurve &curve);
SampleCloud read_cloud_csv(std::istream &in);
BoundaryCurve read_boundary_csv(std::istream &in, CurveKind kind);

std::string_view to_string(CloudKind kind);
std::string_view to_string(CurveKind kind);

}  // namespace diqkd

#include "diqkd/detail/parallel.hpp"

#endif  // DIQKD_MONTECARLO_HPP
