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

#ifndef DIQKD_BELL_HPP
#define DIQKD_BELL_HPP

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace diqkd {

/// Two-output Bell inequality in Clauser-Horne (probability) form:
///
///   P = sum_ij joint(i,j) P(0,0|i,j) + sum_i alice_marg[i] P_A(0|i) + sum_j bob_marg[j] P_B(0|j) <= bound
///
/// Settings are indexed from 0 in code and from 1 in expressions and files.
struct BellInequality {
    std::string name;
    int settings_a = 0;
    int settings_b = 0;
    std::vector<double> joint;  // row-major, settings_a x settings_b
    std::vector<double> alice_marg;
    std::vector<double> bob_marg;
    double classical_bound = 0.0;

    double joint_at(int i, int j) const { return joint[static_cast<std::size_t>(i * settings_b + j)]; }

    /// Throws std::invalid_argument when the record is malformed.
    void validate() const;
};

/// Joint outcome table P(a,b|i,j), a,b in {0,1}.
class ProbabilityTable {
   public:
    ProbabilityTable() = default;
    ProbabilityTable(int settings_a, int settings_b);

    int settings_a() const { return settings_a_; }
    int settings_b() const { return settings_b_; }

    double &operator()(int a, int b, int i, int j) { return p_[index(a, b, i, j)]; }
    double operator()(int a, int b, int i, int j) const { return p_[index(a, b, i, j)]; }

    /// P_A(a|i), averaged over Bob's settings.
    double marginal_a(int a, int i) const;
    /// P_B(b|j), averaged over Alice's settings.
    double marginal_b(int b, int j) const;

    /// Checks range, per-block normalization and no-signaling. Throws std::invalid_argument.
    void validate(double tol = 1e-9) const;

   private:
    std::size_t index(int a, int b, int i, int j) const {
        return static_cast<std::size_t>(((i * settings_b_ + j) * 2 + a) * 2 + b);
    }

    int settings_a_ = 0;
    int settings_b_ = 0;
    std::vector<double> p_;
};

/// Parses an expression such as "P11+P12+P21-P22-P10-P01" (braces and spaces allowed,
/// e.g. "2 P_{11} - P_{20}"). P_{i0} is Alice's marginal, P_{0j} Bob's.
BellInequality parse_expression(std::string_view name, std::string_view expression);

/// Reads the plain-text coefficient format, one term per line:
///   joint i j c
///   amarg i c
///   bmarg j c
/// '#' starts a comment. Indices are 1-based. Optional "name <id>" and "bound <c>" lines.
BellInequality parse_coefficient_file(std::istream &in, std::string_view default_name);
BellInequality load_coefficient_file(const std::filesystem::path &path);

/// Writes `ineq` in the coefficient format accepted by parse_coefficient_file.
std::string to_coefficient_text(const BellInequality &ineq);

const std::vector<std::string> &catalog_names();

/// Returns a catalog inequality. Throws std::invalid_argument listing valid names.
BellInequality catalog_get(std::string_view name);

/// Catalog name, or otherwise a path to a coefficient file.
BellInequality resolve_inequality(std::string_view name_or_path);

/// Evaluates the Bell expression on a table. Throws std::invalid_argument on a dimension
/// mismatch or an invalid table.
double evaluate(const BellInequality &ineq, const ProbabilityTable &table);

}  // namespace diqkd

#endif  // DIQKD_BELL_HPP
