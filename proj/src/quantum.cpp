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

#include "diqkd/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace diqkd {

BellDiagonalState::BellDiagonalState(std::array<double, 4> lambda) : lambda_(lambda) {
    double sum = 0.0;
    for (double l : lambda_) {
        if (!(l >= 0.0)) throw std::invalid_argument("Bell-diagonal weight must be nonnegative");
        sum += l;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("Bell-diagonal weights must sum to 1");
}

Bloch BellDiagonalState::correlations() const {
    const auto &l = lambda_;
    return {l[0] - l[1] + l[2] - l[3], -l[0] + l[1] + l[2] - l[3], l[0] + l[1] - l[2] - l[3]};
}

Eigen::Matrix4cd BellDiagonalState::density() const {
    const double r = std::numbers::sqrt2 / 2.0;
    std::array<Eigen::Vector4cd, 4> bell;
    bell[0] << r, 0, 0, r;
    bell[1] << r, 0, 0, -r;
    bell[2] << 0, r, r, 0;
    bell[3] << 0, r, -r, 0;
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    for (int k = 0; k < 4; ++k) rho += lambda_[static_cast<std::size_t>(k)] * bell[static_cast<std::size_t>(k)] * bell[static_cast<std::size_t>(k)].adjoint();
    return rho;
}

Bloch QubitProjector::bloch() const {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

QubitProjector QubitProjector::from_bloch(const Bloch &n) {
    double norm = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    if (norm == 0.0) return {};
    double z = std::clamp(n[2] / norm, -1.0, 1.0);
    double phi = std::atan2(n[1], n[0]);
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    if (phi >= 2.0 * std::numbers::pi) phi = 0.0;
    return {std::acos(z), phi};
}

Eigen::Vector2cd QubitProjector::ket(int outcome) const {
    const std::complex<double> phase = std::polar(1.0, phi);
    Eigen::Vector2cd v;
    if (outcome == 0) {
        v << std::cos(theta / 2.0), std::sin(theta / 2.0) * phase;
    } else {
        v << std::sin(theta / 2.0), -std::cos(theta / 2.0) * phase;
    }
    return v;
}

void EfficiencySetup::validate() const {
    if (!(eta_a >= 0.0 && eta_a <= 1.0) || !(eta_b >= 0.0 && eta_b <= 1.0)) {
        throw std::invalid_argument("detection efficiencies must lie in [0,1]");
    }
}

ProbabilityTable joint_table(const BellDiagonalState &state, const MeasurementScenario &scenario) {
    const int ma = static_cast<int>(scenario.alice.size());
    const int mb = static_cast<int>(scenario.bob.size());
    ProbabilityTable table(ma, mb);
    const Eigen::Matrix4cd rho = state.density();
    for (int i = 0; i < ma; ++i) {
        for (int j = 0; j < mb; ++j) {
            for (int a = 0; a < 2; ++a) {
                const Eigen::Vector2cd u = scenario.alice[static_cast<std::size_t>(i)].ket(a);
                for (int b = 0; b < 2; ++b) {
                    const Eigen::Vector2cd v = scenario.bob[static_cast<std::size_t>(j)].ket(b);
                    Eigen::Vector4cd uv;
                    uv << u(0) * v(0), u(0) * v(1), u(1) * v(0), u(1) * v(1);
                    table(a, b, i, j) = (uv.adjoint() * rho * uv)(0, 0).real();
                }
            }
        }
    }
    return table;
}

ProbabilityTable apply_efficiency(const ProbabilityTable &table, const EfficiencySetup &eff) {
    eff.validate();
    const double ea = eff.eta_a;
    const double eb = eff.eta_b;
    ProbabilityTable out(table.settings_a(), table.settings_b());
    for (int i = 0; i < table.settings_a(); ++i) {
        for (int j = 0; j < table.settings_b(); ++j) {
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                    // Per-(i,j) marginals; equal to the averaged ones for no-signaling tables.
                    const double pa = table(a, 0, i, j) + table(a, 1, i, j);
                    const double pb = table(0, b, i, j) + table(1, b, i, j);
                    double v = ea * eb * table(a, b, i, j);
                    if (a == 0) v += (1.0 - ea) * eb * pb;
                    if (b == 0) v += ea * (1.0 - eb) * pa;
                    if (a == 0 && b == 0) v += (1.0 - ea) * (1.0 - eb);
                    out(a, b, i, j) = v;
                }
            }
        }
    }
    return out;
}

double degrade_qber(double ideal, const EfficiencySetup &eff) {
    eff.validate();
    const double ea = eff.eta_a;
    const double eb = eff.eta_b;
    return ea * eb * ideal + (ea * (1.0 - eb) + eb * (1.0 - ea)) / 2.0;
}

double qber(const BellDiagonalState &state, const EfficiencySetup &eff) {
    return degrade_qber(state[2] + state[3], eff);
}

}  // namespace diqkd
