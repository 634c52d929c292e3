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
#include "diqkd/highdim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "diqkd/entropy.hpp"
#include "diqkd/montecarlo.hpp"
#include "diqkd/random.hpp"

namespace diqkd {

namespace {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

constexpr double kTol = 1e-10;

void check_dim(int d) {
    if (d < kMinDim || d > kMaxDim) throw std::invalid_argument("dimension must be in 2..4");
}

void check_xi(int xi, int d) {
    if (xi < 1 || xi > d - 1) throw std::invalid_argument("split xi must be in 1..d-1");
}

Vector product_ket(int d, int a, int b) {
    Vector v = Vector::Zero(d * d);
    v(a * d + b) = 1.0;
    return v;
}

// tr_B[rho (1 (x) op)]
Matrix reduce_bob(const Matrix &rho, const Matrix &op, int d) {
    Matrix out = Matrix::Zero(d, d);
    for (int a = 0; a < d; ++a)
        for (int ap = 0; ap < d; ++ap)
            for (int b = 0; b < d; ++b)
                for (int bp = 0; bp < d; ++bp) out(a, ap) += rho(a * d + b, ap * d + bp) * op(bp, b);
    return out;
}

// tr_A[rho (op (x) 1)]
Matrix reduce_alice(const Matrix &rho, const Matrix &op, int d) {
    Matrix out = Matrix::Zero(d, d);
    for (int b = 0; b < d; ++b)
        for (int bp = 0; bp < d; ++bp)
            for (int a = 0; a < d; ++a)
                for (int ap = 0; ap < d; ++ap) out(b, bp) += rho(a * d + b, ap * d + bp) * op(ap, a);
    return out;
}

Matrix outcome0(const Matrix &u, int xi) {
    const Matrix cols = u.leftCols(xi);
    return cols * cols.adjoint();
}

double re_trace(const Matrix &a, const Matrix &b) { return (a * b).trace().real(); }

// Columns ordered by decreasing eigenvalue, so the first xi span the top-xi eigenspace of w; `fallback` when w vanishes.
Matrix top_unitary(const Matrix &w, const Matrix &fallback) {
    if (w.norm() < 1e-14) return fallback;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (w + w.adjoint()));
    const int d = static_cast<int>(w.rows());
    Matrix u(d, d);
    for (int c = 0; c < d; ++c) u.col(c) = es.eigenvectors().col(d - 1 - c);
    return u;
}

struct Reduced {
    Matrix rho_a;
    Matrix rho_b;
};

Reduced reduce(const HighDimState &s) {
    const Matrix id = Matrix::Identity(s.d, s.d);
    return {reduce_bob(s.density, id, s.d), reduce_alice(s.density, id, s.d)};
}

double value_with(const BellInequality &ineq, const HighDimState &s, const Reduced &red, int xi,
                  const std::vector<Matrix> &alice, const std::vector<Matrix> &bob, const EfficiencySetup &eff) {
    const double ea = eff.eta_a;
    const double eb = eff.eta_b;
    std::vector<Matrix> pa;
    std::vector<Matrix> pb;
    for (const auto &u : alice) pa.push_back(outcome0(u, xi));
    for (const auto &u : bob) pb.push_back(outcome0(u, xi));
    double value = 0.0;
    for (int j = 0; j < ineq.settings_b; ++j) {
        const Matrix x = reduce_bob(s.density, pb[static_cast<std::size_t>(j)], s.d);
        const double mb = re_trace(red.rho_b, pb[static_cast<std::size_t>(j)]);
        for (int i = 0; i < ineq.settings_a; ++i) {
            const double c = ineq.joint_at(i, j);
            if (c == 0.0) continue;
            const double ma = re_trace(red.rho_a, pa[static_cast<std::size_t>(i)]);
            const double p = re_trace(pa[static_cast<std::size_t>(i)], x);
            value += c * (ea * eb * p + (1.0 - ea) * eb * mb + ea * (1.0 - eb) * ma + (1.0 - ea) * (1.0 - eb));
        }
    }
    for (int i = 0; i < ineq.settings_a; ++i) {
        const double ma = re_trace(red.rho_a, pa[static_cast<std::size_t>(i)]);
        value += ineq.alice_marg[static_cast<std::size_t>(i)] * (ea * ma + 1.0 - ea);
    }
    for (int j = 0; j < ineq.settings_b; ++j) {
        const double mb = re_trace(red.rho_b, pb[static_cast<std::size_t>(j)]);
        value += ineq.bob_marg[static_cast<std::size_t>(j)] * (eb * mb + 1.0 - eb);
    }
    return value;
}

}  // namespace

// ---------------------------------------------------------------------------------------
// States and projectors

void HighDimState::validate() const {
    check_dim(d);
    const int n = d * d;
    if (density.rows() != n || density.cols() != n) throw std::invalid_argument("density must be d^2 x d^2");
    if ((density - density.adjoint()).norm() > kTol) throw std::invalid_argument("density is not Hermitian");
    if (std::abs(density.trace() - std::complex<double>(1.0)) > kTol) {
        throw std::invalid_argument("density must have unit trace");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(density, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kTol) throw std::invalid_argument("density is not positive semidefinite");
}

HighDimState HighDimState::pure(int d, const Vector &psi, std::string family) {
    check_dim(d);
    if (psi.size() != d * d) throw std::invalid_argument("state vector must have d^2 entries");
    const double norm = psi.norm();
    if (norm == 0.0) throw std::invalid_argument("zero state vector");
    const Vector v = psi / norm;
    HighDimState s{d, v * v.adjoint(), std::move(family)};
    return s;
}

HighDimState HighDimState::maximally_entangled(int d) {
    check_dim(d);
    Vector v = Vector::Zero(d * d);
    for (int i = 0; i < d; ++i) v += product_ket(d, i, i);
    return pure(d, v, "max-entangled");
}

HighDimState HighDimState::corner_pair(int d) {
    check_dim(d);
    return pure(d, product_ket(d, 0, 0) + product_ket(d, d - 1, d - 1), "corner-pair");
}

HighDimState HighDimState::skew_pair(int d) {
    check_dim(d);
    return pure(d, product_ket(d, 0, 0) + product_ket(d, 1, d - 1), "skew-pair");
}

HighDimState HighDimState::embed(const BellDiagonalState &state) {
    return HighDimState{2, Matrix(state.density()), "bell-diagonal"};
}

HighDimState HighDimState::mixture(const std::vector<std::pair<double, HighDimState>> &parts, std::string family) {
    if (parts.empty()) throw std::invalid_argument("empty mixture");
    const int d = parts.front().second.d;
    double total = 0.0;
    Matrix rho = Matrix::Zero(d * d, d * d);
    for (const auto &[w, s] : parts) {
        if (s.d != d) throw std::invalid_argument("mixture parts must share a dimension");
        if (w < 0.0) throw std::invalid_argument("mixture weights must be nonnegative");
        rho += w * s.density;
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture weights must sum to 1");
    return HighDimState{d, rho, std::move(family)};
}

PartitionedProjector partition_projectors(int xi, const Matrix &unitary, int d) {
    check_dim(d);
    check_xi(xi, d);
    if (unitary.rows() != d || unitary.cols() != d) throw std::invalid_argument("unitary must be d x d");
    PartitionedProjector p;
    p.xi = xi;
    p.unitary = unitary;
    p.p0 = outcome0(unitary, xi);
    const Matrix rest = unitary.rightCols(d - xi);
    p.p1 = rest * rest.adjoint();
    return p;
}

Matrix haar_unitary(int d, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix z(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
            const double re = normal(rng);
            const double im = normal(rng);
            z(r, c) = std::complex<double>(re, im) / std::numbers::sqrt2;
        }
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ() * Matrix::Identity(d, d);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < d; ++c) {
        const double mag = std::abs(r(c, c));
        if (mag > 0.0) q.col(c) *= r(c, c) / mag;
    }
    return q;
}

Matrix qubit_unitary(const QubitProjector &p) {
    Matrix u(2, 2);
    u.col(0) = p.ket(0);
    u.col(1) = p.ket(1);
    return u;
}

// ---------------------------------------------------------------------------------------
// Violation

double highdim_value(const BellInequality &ineq, const HighDimState &state, int xi, const std::vector<Matrix> &alice,
                     const std::vector<Matrix> &bob, const EfficiencySetup &eff) {
    ineq.validate();
    eff.validate();
    check_xi(xi, state.d);
    if (static_cast<int>(alice.size()) != ineq.settings_a || static_cast<int>(bob.size()) != ineq.settings_b) {
        throw std::invalid_argument("one unitary per setting is required");
    }
    return value_with(ineq, state, reduce(state), xi, alice, bob, eff);
}

HighDimViolation violation_highdim(const BellInequality &ineq, const HighDimState &state, int xi,
                                   const OptimizerConfig &cfg, std::uint64_t seed, const EfficiencySetup &eff) {
    ineq.validate();
    cfg.validate();
    eff.validate();
    state.validate();
    const int d = state.d;
    check_xi(xi, d);
    const Reduced red = reduce(state);
    const double ea = eff.eta_a;
    const double eb = eff.eta_b;
    const auto ma = static_cast<std::size_t>(ineq.settings_a);
    const auto mb = static_cast<std::size_t>(ineq.settings_b);

    HighDimViolation best;
    best.q = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < cfg.restarts; ++r) {
        const std::uint64_t rs = derive_seed(seed, static_cast<std::uint64_t>(r));
        std::vector<Matrix> bob(mb);
        for (std::size_t j = 0; j < mb; ++j) bob[j] = haar_unitary(d, derive_seed(rs, j));
        std::vector<Matrix> alice(ma, Matrix::Identity(d, d));

        double prev = -std::numeric_limits<double>::infinity();
        double val = prev;
        bool converged = false;
        for (int it = 0; it < cfg.max_iters; ++it) {
            std::vector<Matrix> xb(mb);
            for (std::size_t j = 0; j < mb; ++j) xb[j] = reduce_bob(state.density, outcome0(bob[j], xi), d);
            for (std::size_t i = 0; i < ma; ++i) {
                Matrix w = Matrix::Zero(d, d);
                double marg = ineq.alice_marg[i] * ea;
                for (std::size_t j = 0; j < mb; ++j) {
                    const double c = ineq.joint_at(static_cast<int>(i), static_cast<int>(j));
                    w += (c * ea * eb) * xb[j];
                    marg += c * ea * (1.0 - eb);
                }
                w += marg * red.rho_a;
                alice[i] = top_unitary(w, alice[i]);
            }
            std::vector<Matrix> ya(ma);
            for (std::size_t i = 0; i < ma; ++i) ya[i] = reduce_alice(state.density, outcome0(alice[i], xi), d);
            for (std::size_t j = 0; j < mb; ++j) {
                Matrix w = Matrix::Zero(d, d);
                double marg = ineq.bob_marg[j] * eb;
                for (std::size_t i = 0; i < ma; ++i) {
                    const double c = ineq.joint_at(static_cast<int>(i), static_cast<int>(j));
                    w += (c * ea * eb) * ya[i];
                    marg += c * (1.0 - ea) * eb;
                }
                w += marg * red.rho_b;
                bob[j] = top_unitary(w, bob[j]);
            }
            val = value_with(ineq, state, red, xi, alice, bob, eff);
            if (val - prev <= cfg.tol) {
                converged = true;
                break;
            }
            prev = val;
        }
        if (val > best.q) {
            best.q = val;
            best.converged = converged;
            best.alice = alice;
            best.bob = bob;
        }
    }
    return best;
}

double qber_highdim(const HighDimState &state, int xi, const EfficiencySetup &eff) {
    check_dim(state.d);
    check_xi(xi, state.d);
    const int d = state.d;
    double eps = 0.0;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            if ((a < xi) != (b < xi)) eps += state.density(a * d + b, a * d + b).real();
    return degrade_qber(std::clamp(eps, 0.0, 1.0), eff);
}

double gamma_highdim(const HighDimState &state, int xi, const EfficiencySetup &eff) {
    return 1.0 - binary(qber_highdim(state, xi, eff));
}

// ---------------------------------------------------------------------------------------
// Eve

void EveWeights::validate(int xi) const {
    const int d = static_cast<int>(q.size());
    check_dim(d);
    check_xi(xi, d);
    double lo = 0.0;
    double hi = 0.0;
    for (int a = 0; a < d; ++a) {
        if (q[static_cast<std::size_t>(a)] < 0.0) throw std::invalid_argument("weights must be nonnegative");
        (a < xi ? lo : hi) += q[static_cast<std::size_t>(a)];
    }
    if (std::abs(lo - 0.5) > 1e-9 || std::abs(hi - 0.5) > 1e-9) {
        throw std::invalid_argument("each half of the weights must sum to 1/2");
    }
}

namespace {

// All vectors of `n` nonnegative integers summing to `total`.
void compositions(int n, int total, std::vector<int> &cur, std::vector<std::vector<int>> &out) {
    if (n == 1) {
        cur.push_back(total);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int k = total; k >= 0; --k) {
        cur.push_back(k);
        compositions(n - 1, total - k, cur, out);
        cur.pop_back();
    }
}

std::vector<std::vector<int>> compositions(int n, int total) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    compositions(n, total, cur, out);
    return out;
}

}  // namespace

std::vector<EveWeights> weight_grid(int d, int xi, int denominator) {
    check_dim(d);
    check_xi(xi, d);
    if (denominator < 2 || denominator % 2 != 0) throw std::invalid_argument("weight denominator must be even");
    const int half = denominator / 2;
    std::vector<EveWeights> out;
    for (const auto &lo : compositions(xi, half)) {
        for (const auto &hi : compositions(d - xi, half)) {
            EveWeights w;
            for (int k : lo) w.q.push_back(static_cast<double>(k) / denominator);
            for (int k : hi) w.q.push_back(static_cast<double>(k) / denominator);
            out.push_back(std::move(w));
        }
    }
    return out;
}

double von_neumann(const Matrix &rho) {
    if (rho.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (int k = 0; k < es.eigenvalues().size(); ++k) {
        const double l = es.eigenvalues()(k);
        if (l > 1e-15) s -= l * std::log2(l);
    }
    return std::max(0.0, s);
}

namespace {

// Columns sqrt(lambda_k) |phi_k> for the nonzero eigenvalues.
Matrix purification_factor(const HighDimState &state) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (state.density + state.density.adjoint()));
    std::vector<int> keep;
    for (int k = 0; k < es.eigenvalues().size(); ++k)
        if (es.eigenvalues()(k) > 1e-14) keep.push_back(k);
    Matrix phi(state.density.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        phi.col(static_cast<Eigen::Index>(c)) = std::sqrt(es.eigenvalues()(keep[c])) * es.eigenvectors().col(keep[c]);
    }
    return phi;
}

}  // namespace

Matrix eve_state(const HighDimState &state) {
    const Matrix phi = purification_factor(state);
    return (phi.adjoint() * phi).transpose();
}

std::vector<Matrix> eve_conditional_states(const HighDimState &state, const Matrix &alice_unitary) {
    const int d = state.d;
    if (alice_unitary.rows() != d || alice_unitary.cols() != d) throw std::invalid_argument("unitary must be d x d");
    const Matrix phi = purification_factor(state);
    std::vector<Matrix> out;
    for (int a = 0; a < d; ++a) {
        const Vector u = alice_unitary.col(a);
        // (|u><u| (x) 1) phi, row block by row block.
        Matrix proj = Matrix::Zero(phi.rows(), phi.cols());
        for (int b = 0; b < d; ++b) {
            Eigen::RowVectorXcd overlap = Eigen::RowVectorXcd::Zero(phi.cols());
            for (int ap = 0; ap < d; ++ap) overlap += std::conj(u(ap)) * phi.row(ap * d + b);
            for (int ap = 0; ap < d; ++ap) proj.row(ap * d + b) = u(ap) * overlap;
        }
        out.push_back((phi.adjoint() * proj).transpose());
    }
    return out;
}

double holevo_highdim(const HighDimState &state, int xi, const Matrix &alice_unitary, const EveWeights &weights) {
    state.validate();
    if (static_cast<int>(weights.q.size()) != state.d) throw std::invalid_argument("one weight per outcome");
    weights.validate(xi);
    const std::vector<Matrix> cond = eve_conditional_states(state, alice_unitary);
    double chi = von_neumann(eve_state(state));
    for (std::size_t a = 0; a < cond.size(); ++a) {
        if (weights.q[a] == 0.0) continue;
        const double p = cond[a].trace().real();
        if (p < 1e-12) throw std::domain_error("conditioning on an outcome of zero probability");
        chi -= weights.q[a] * von_neumann(cond[a] / p);
    }
    return chi;
}

// ---------------------------------------------------------------------------------------
// Families and key rate

std::vector<HighDimState> family_states(int d, const HighDimGrid &grid) {
    check_dim(d);
    std::vector<HighDimState> out;
    if (d == 2) {
        out.push_back(HighDimState::embed(BellDiagonalState::phi0()));
        for (const auto &s : sample_states(grid.qubit_samples, grid.seed, false)) out.push_back(HighDimState::embed(s));
        return out;
    }
    if (grid.mix_denominator < 1) throw std::invalid_argument("mix denominator must be positive");
    const HighDimState parts[3] = {HighDimState::maximally_entangled(d), HighDimState::corner_pair(d),
                                   HighDimState::skew_pair(d)};
    for (const auto &w : compositions(3, grid.mix_denominator)) {
        std::vector<std::pair<double, HighDimState>> mix;
        std::string tag = "mix";
        for (int k = 0; k < 3; ++k) {
            tag += (k == 0 ? "(" : ",") + std::to_string(w[static_cast<std::size_t>(k)]);
            if (w[static_cast<std::size_t>(k)] > 0) {
                mix.emplace_back(static_cast<double>(w[static_cast<std::size_t>(k)]) / grid.mix_denominator, parts[k]);
            }
        }
        tag += ")/" + std::to_string(grid.mix_denominator);
        if (mix.size() == 1) {
            out.push_back(mix.front().second);
        } else {
            out.push_back(HighDimState::mixture(mix, tag));
        }
    }
    return out;
}

namespace {

std::vector<double> family_values(const BellInequality &ineq, int d, int xi, const std::vector<HighDimState> &family,
                                  const HighDimGrid &grid, const EfficiencySetup &eff,
                                  std::vector<HighDimViolation> *details) {
    std::vector<double> q(family.size());
    if (d == 2) {
        // Bell-diagonal embedding: the batched qubit optimizer gives the same see-saw maximum.
        std::vector<BellDiagonalState> qubits;
        for (const auto &s : family) {
            const Matrix &rho = s.density;
            const double l0 = 0.5 * (rho(0, 0) + rho(0, 3) + rho(3, 0) + rho(3, 3)).real();
            const double l1 = 0.5 * (rho(0, 0) - rho(0, 3) - rho(3, 0) + rho(3, 3)).real();
            const double l2 = 0.5 * (rho(1, 1) + rho(1, 2) + rho(2, 1) + rho(2, 2)).real();
            const double l3 = 0.5 * (rho(1, 1) - rho(1, 2) - rho(2, 1) + rho(2, 2)).real();
            const double sum = l0 + l1 + l2 + l3;
            qubits.emplace_back(std::array<double, 4>{l0 / sum, l1 / sum, l2 / sum, l3 / sum});
        }
        const StateSurvey survey =
            survey_states(ineq, std::move(qubits), derive_seed(grid.seed, 2), grid.optimizer, grid.threads);
        const double offset = efficiency_offset(ineq, eff);
        for (std::size_t k = 0; k < family.size(); ++k) q[k] = offset + eff.product() * survey.corr[k];
        return q;
    }
    if (details) details->resize(family.size());
    const std::uint64_t base = derive_seed(grid.seed, static_cast<std::uint64_t>(100 * d + xi));
    parallel_for(family.size(), 1, resolve_threads(grid.threads), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
            HighDimViolation v = violation_highdim(ineq, family[k], xi, grid.optimizer, derive_seed(base, k), eff);
            q[k] = v.q;
            if (details) (*details)[k] = std::move(v);
        }
    });
    return q;
}

std::vector<Matrix> alice_candidates(int d, const HighDimGrid &grid) {
    std::vector<Matrix> out;
    if (d == 2) {
        for (int it = 0; it < grid.sphere_theta; ++it) {
            const double theta = std::numbers::pi * it / std::max(1, grid.sphere_theta - 1);
            const int nphi = (it == 0 || it == grid.sphere_theta - 1) ? 1 : grid.sphere_phi;
            for (int ip = 0; ip < nphi; ++ip) {
                out.push_back(qubit_unitary(QubitProjector{theta, 2.0 * std::numbers::pi * ip / grid.sphere_phi}));
            }
        }
        return out;
    }
    out.push_back(Matrix::Identity(d, d));
    Matrix dft(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
            dft(r, c) = std::polar(1.0 / std::sqrt(static_cast<double>(d)), 2.0 * std::numbers::pi * r * c / d);
    out.push_back(dft);
    for (int k = 0; k < grid.unitary_samples; ++k) {
        out.push_back(haar_unitary(d, derive_seed(derive_seed(grid.seed, 3), static_cast<std::uint64_t>(k))));
    }
    return out;
}

}  // namespace

IeHighDim ie_highdim(const BellInequality &ineq, int d, int xi, double q_value, const HighDimGrid &grid) {
    check_dim(d);
    check_xi(xi, d);
    const std::vector<HighDimState> family = family_states(d, grid);
    std::vector<HighDimViolation> details;
    const std::vector<double> q = family_values(ineq, d, xi, family, grid, EfficiencySetup::ideal(), &details);
    const std::vector<EveWeights> weights = weight_grid(d, xi, grid.weight_denominator);
    const std::vector<Matrix> shared = alice_candidates(d, grid);

    IeHighDim best;
    best.chi = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < family.size(); ++k) {
        if (std::abs(q[k] - q_value) > grid.bin_half_width) continue;
        ++best.states_in_bin;
        std::vector<Matrix> candidates = shared;
        if (!details.empty()) {
            for (const auto &u : details[k].alice) candidates.push_back(u);
        }
        const double s_e = von_neumann(eve_state(family[k]));
        for (const auto &u : candidates) {
            const std::vector<Matrix> cond = eve_conditional_states(family[k], u);
            std::vector<double> p(cond.size());
            std::vector<double> s(cond.size());
            for (std::size_t a = 0; a < cond.size(); ++a) {
                p[a] = cond[a].trace().real();
                s[a] = p[a] > 1e-12 ? von_neumann(cond[a] / p[a]) : 0.0;
            }
            for (const auto &w : weights) {
                double chi = s_e;
                bool feasible = true;
                for (std::size_t a = 0; a < cond.size(); ++a) {
                    if (w.q[a] == 0.0) continue;
                    if (p[a] <= 1e-12) {
                        feasible = false;
                        break;
                    }
                    chi -= w.q[a] * s[a];
                }
                if (feasible && chi > best.chi) {
                    best.chi = chi;
                    best.best_family = family[k].family;
                    best.best_weights = w;
                }
            }
        }
    }
    if (best.states_in_bin == 0) {
        throw NumericalError("no family state of dimension " + std::to_string(d) + " has Q within " +
                             std::to_string(grid.bin_half_width) + " of " + std::to_string(q_value));
    }
    if (!std::isfinite(best.chi)) throw NumericalError("no feasible Eve weights for the states in the bin");
    return best;
}

KeyRateMin key_rate_min(const BellInequality &ineq, int d_max, double q_value, const KeyRateReport &base,
                        const HighDimGrid &grid) {
    check_dim(d_max);
    if (base.q_grid.size() < 2) throw std::invalid_argument("base report needs at least two bins");
    const double width = base.q_grid[1] - base.q_grid[0];
    const double pos = (q_value - base.q_grid.front()) / width;
    const long b = std::lround(pos);
    if (b < 0 || b >= static_cast<long>(base.q_grid.size())) {
        throw NumericalError("Q = " + std::to_string(q_value) + " lies outside the base grid");
    }
    const auto bin = static_cast<std::size_t>(b);
    if (!base.rate[bin]) throw NumericalError("the base pipeline has no rate at Q = " + std::to_string(q_value));

    KeyRateMin out;
    KeyRateTerm first;
    first.iab = base.iab[bin];
    first.ie = base.ie[bin];
    first.rate = base.rate[bin];
    out.terms.push_back(first);
    out.rate = *first.rate;

    for (int d = 3; d <= d_max; ++d) {
        const std::vector<HighDimState> family = family_states(d, grid);
        for (int xi = 1; xi < d; ++xi) {
            KeyRateTerm term;
            term.d = d;
            term.xi = xi;
            try {
                term.ie = ie_highdim(ineq, d, xi, q_value, grid).chi;
            } catch (const NumericalError &) {
            }
            const std::vector<double> q = family_values(ineq, d, xi, family, grid, base.eff, nullptr);
            for (std::size_t k = 0; k < family.size(); ++k) {
                if (std::abs(q[k] - q_value) > grid.bin_half_width) continue;
                const double g = gamma_highdim(family[k], xi, base.eff);
                if (!term.iab || g > *term.iab) term.iab = g;
            }
            if (term.ie && term.iab) {
                term.rate = *term.iab - *term.ie;
                if (*term.rate < out.rate) {
                    out.rate = *term.rate;
                    out.d = d;
                    out.xi = xi;
                }
            }
            out.terms.push_back(term);
        }
    }
    return out;
}

KeyRateMin key_rate_min(const BellInequality &ineq, int d_max, double q_value, const EfficiencySetup &eff,
                        const McParams &params, const HighDimGrid &grid) {
    const KeyRateReport base = ProtocolModel(ineq, params).key_rate(eff);
    return key_rate_min(ineq, d_max, q_value, base, grid);
}

}  // namespace diqkd
