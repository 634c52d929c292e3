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

#include "diqkd/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

namespace diqkd {

namespace {

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

}  // namespace

double shannon(std::span<const double> weights) {
    double sum = 0.0;
    double h = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("entropy weights must be nonnegative");
        sum += w;
        h -= xlog2x(w);
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("entropy weights must sum to 1");
    return h;
}

double binary(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binary entropy argument outside [0,1]");
    return -xlog2x(p) - xlog2x(1.0 - p);
}

double binary_inverse(double y) {
    if (!(y >= 0.0 && y <= 1.0)) throw std::domain_error("binary entropy value outside [0,1]");
    if (y == 0.0) return 0.0;
    if (y == 1.0) return 0.5;
    auto f = [y](double p) { return binary(p) - y; };
    auto close = [](double lo, double hi) { return hi - lo < 1e-12; };
    auto [lo, hi] = boost::math::tools::bisect(f, 0.0, 0.5, close);
    return 0.5 * (lo + hi);
}

HolevoExtrema holevo_extrema(const BellDiagonalState &state) {
    const auto &l = state.lambda();
    const double total = shannon(l);
    const std::array<double, 3> gaps = {
        std::abs(l[0] + l[1] - l[2] - l[3]),
        std::abs(l[0] - l[1] + l[2] - l[3]),
        std::abs(l[0] - l[1] - l[2] + l[3]),
    };
    HolevoExtrema out;
    for (std::size_t k = 0; k < 3; ++k) {
        const double plus = std::min(1.0, 0.5 * (1.0 + gaps[k]));
        out.chi[k] = std::max(0.0, total - binary(plus));
    }
    out.chi_max = *std::max_element(out.chi.begin(), out.chi.end());
    return out;
}

double holevo_bb84(const BellDiagonalState &state) { return holevo_extrema(state).chi[0]; }

}  // namespace diqkd
