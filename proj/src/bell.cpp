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

#include "diqkd/bell.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace diqkd {

namespace {

struct Term {
    int i;
    int j;
    double c;
};

BellInequality from_terms(std::string_view name, const std::vector<Term> &terms, double bound) {
    int ma = 0;
    int mb = 0;
    for (const auto &t : terms) {
        ma = std::max(ma, t.i);
        mb = std::max(mb, t.j);
    }
    BellInequality ineq;
    ineq.name = std::string(name);
    ineq.settings_a = ma;
    ineq.settings_b = mb;
    ineq.joint.assign(static_cast<std::size_t>(ma * mb), 0.0);
    ineq.alice_marg.assign(static_cast<std::size_t>(ma), 0.0);
    ineq.bob_marg.assign(static_cast<std::size_t>(mb), 0.0);
    ineq.classical_bound = bound;
    for (const auto &t : terms) {
        if (t.i > 0 && t.j > 0) {
            ineq.joint[static_cast<std::size_t>((t.i - 1) * mb + (t.j - 1))] += t.c;
        } else if (t.i > 0) {
            ineq.alice_marg[static_cast<std::size_t>(t.i - 1)] += t.c;
        } else if (t.j > 0) {
            ineq.bob_marg[static_cast<std::size_t>(t.j - 1)] += t.c;
        } else {
            throw std::invalid_argument("term P00 is not a valid probability term");
        }
    }
    ineq.validate();
    return ineq;
}

// Table of multi-setting inequalities, transcribed term by term.
const std::vector<std::pair<std::string, std::string>> &catalog_table() {
    static const std::vector<std::pair<std::string, std::string>> table = {
        {"CHSH", "P11+P12+P21-P22-P10-P01"},
        {"I3322", "P11+P12+P13+P21+P22-P23+P31-P32-2P10-P20-P01"},
        {"I4322_3",
         "2P11+P12+P13-P21+P22+P23+P32-P33+P41-P42-P43-2P10-P20-P01-P02"},
        {"A6",
         "P11+P12+P14+P21+P23-P24+P32-P33-P34+P41-P42-P43-P44-P10-P20-P01-P02"},
        {"AS1",
         "P11+P12+P13+P14+P21+P22+P23-P24+P31+P32-2P33+P41-P42-2P10-P20-2P01-P02"},
        {"AS2",
         "P11+P12+2P13+2P14+P21+2P22+P23-2P24+2P31+P32-2P33+P34+2P41-2P42+P43-P44"
         "-3P10-P20-P30-3P01-P02-P03"},
        {"AII2",
         "2P11+P12+P13-P14+P21+2P22-P23+P24+P31-P32-P33+P34+P41-P42-P10-P20-3P01-P02-P04"},
        {"I4422_5",
         "P11+P13+P21+P22-P23+P24+P31-P32+P41+P42-P43-P44-P10-P20-2P01-P02"},
        {"I4422_6",
         "P11-P12+P13+P14+P21+P22-P23+P24+P31-P32+P33-P34+P41+P42-P43-P44"
         "-P10-P20-2P01-P02-P03"},
        {"I4422_13",
         "P12+P13+P14+P21-2P22+P23+P24+P31+P32-P33+P34+P41+P42+P43-P44"
         "-2P10-P20-P30-2P01-P02-P03"},
        {"I4422_15",
         "2P11+P12+P13+P14+P21-P22-P23+P24+P31-P32-P34+P41+P42-P43-P44-2P10-P20-2P01-P02"},
        {"I4422_19",
         "2P11+2P12+P13+2P14+2P21-P22+2P23-2P24+P31+2P32-P33-P34+2P41-2P42-P43"
         "-3P10-2P20-3P01-2P02"},
    };
    return table;
}

std::string join_names() {
    std::string out;
    for (const auto &n : catalog_names()) {
        if (!out.empty()) out += ", ";
        out += n;
    }
    return out;
}

}  // namespace

void BellInequality::validate() const {
    if (settings_a < 1 || settings_b < 1) throw std::invalid_argument("inequality '" + name + "' has no settings");
    if (joint.size() != static_cast<std::size_t>(settings_a * settings_b) ||
        alice_marg.size() != static_cast<std::size_t>(settings_a) ||
        bob_marg.size() != static_cast<std::size_t>(settings_b)) {
        throw std::invalid_argument("inequality '" + name + "' has inconsistent coefficient sizes");
    }
    if (std::none_of(joint.begin(), joint.end(), [](double c) { return c != 0.0; })) {
        throw std::invalid_argument("inequality '" + name + "' has no joint terms");
    }
}

ProbabilityTable::ProbabilityTable(int settings_a, int settings_b)
    : settings_a_(settings_a), settings_b_(settings_b), p_(static_cast<std::size_t>(settings_a * settings_b * 4), 0.0) {
    if (settings_a < 1 || settings_b < 1) throw std::invalid_argument("probability table needs at least one setting");
}

double ProbabilityTable::marginal_a(int a, int i) const {
    double s = 0.0;
    for (int j = 0; j < settings_b_; ++j) s += (*this)(a, 0, i, j) + (*this)(a, 1, i, j);
    return s / settings_b_;
}

double ProbabilityTable::marginal_b(int b, int j) const {
    double s = 0.0;
    for (int i = 0; i < settings_a_; ++i) s += (*this)(0, b, i, j) + (*this)(1, b, i, j);
    return s / settings_a_;
}

void ProbabilityTable::validate(double tol) const {
    for (int i = 0; i < settings_a_; ++i) {
        for (int j = 0; j < settings_b_; ++j) {
            double sum = 0.0;
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) {
                    double p = (*this)(a, b, i, j);
                    if (!(p >= -tol && p <= 1.0 + tol)) throw std::invalid_argument("probability out of [0,1]");
                    sum += p;
                }
            }
            if (std::abs(sum - 1.0) > tol) throw std::invalid_argument("probability block not normalized");
        }
    }
    for (int i = 0; i < settings_a_; ++i) {
        double ref = (*this)(0, 0, i, 0) + (*this)(0, 1, i, 0);
        for (int j = 1; j < settings_b_; ++j) {
            if (std::abs((*this)(0, 0, i, j) + (*this)(0, 1, i, j) - ref) > tol) {
                throw std::invalid_argument("table violates no-signaling on Alice's side");
            }
        }
    }
    for (int j = 0; j < settings_b_; ++j) {
        double ref = (*this)(0, 0, 0, j) + (*this)(1, 0, 0, j);
        for (int i = 1; i < settings_a_; ++i) {
            if (std::abs((*this)(0, 0, i, j) + (*this)(1, 0, i, j) - ref) > tol) {
                throw std::invalid_argument("table violates no-signaling on Bob's side");
            }
        }
    }
}

BellInequality parse_expression(std::string_view name, std::string_view expression) {
    std::string compact;
    for (char ch : expression) {
        if (ch == ' ' || ch == '\t' || ch == '_' || ch == '{' || ch == '}') continue;
        compact.push_back(ch);
    }
    static const std::regex term_re(R"(([+-]?)(\d*(?:\.\d+)?)P(\d)(\d))");
    std::vector<Term> terms;
    std::size_t consumed = 0;
    for (auto it = std::sregex_iterator(compact.begin(), compact.end(), term_re); it != std::sregex_iterator(); ++it) {
        const auto &m = *it;
        if (static_cast<std::size_t>(m.position(0)) != consumed) break;
        consumed += static_cast<std::size_t>(m.length(0));
        double c = m[2].length() > 0 ? std::stod(m[2].str()) : 1.0;
        if (m[1].str() == "-") c = -c;
        terms.push_back({std::stoi(m[3].str()), std::stoi(m[4].str()), c});
    }
    if (consumed != compact.size() || terms.empty()) {
        throw std::invalid_argument("cannot parse Bell expression '" + std::string(expression) + "'");
    }
    return from_terms(name, terms, 0.0);
}

BellInequality parse_coefficient_file(std::istream &in, std::string_view default_name) {
    std::string name(default_name);
    double bound = 0.0;
    std::vector<Term> terms;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind)) continue;
        auto fail = [&] {
            throw std::invalid_argument("coefficient file line " + std::to_string(line_no) + ": malformed '" + line + "'");
        };
        Term t{0, 0, 0.0};
        if (kind == "joint") {
            if (!(ls >> t.i >> t.j >> t.c) || t.i < 1 || t.j < 1) fail();
        } else if (kind == "amarg") {
            if (!(ls >> t.i >> t.c) || t.i < 1) fail();
        } else if (kind == "bmarg") {
            if (!(ls >> t.j >> t.c) || t.j < 1) fail();
        } else if (kind == "name") {
            if (!(ls >> name)) fail();
            continue;
        } else if (kind == "bound") {
            if (!(ls >> bound)) fail();
            continue;
        } else {
            fail();
        }
        std::string extra;
        if (ls >> extra) fail();
        terms.push_back(t);
    }
    if (terms.empty()) throw std::invalid_argument("coefficient file has no terms");
    return from_terms(name, terms, bound);
}

BellInequality load_coefficient_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open coefficient file '" + path.string() + "'");
    return parse_coefficient_file(in, path.stem().string());
}

std::string to_coefficient_text(const BellInequality &ineq) {
    std::ostringstream out;
    out.precision(17);
    out << "name " << ineq.name << "\n";
    if (ineq.classical_bound != 0.0) out << "bound " << ineq.classical_bound << "\n";
    for (int i = 0; i < ineq.settings_a; ++i) {
        for (int j = 0; j < ineq.settings_b; ++j) {
            if (ineq.joint_at(i, j) != 0.0) out << "joint " << i + 1 << " " << j + 1 << " " << ineq.joint_at(i, j) << "\n";
        }
    }
    for (int i = 0; i < ineq.settings_a; ++i) {
        if (ineq.alice_marg[static_cast<std::size_t>(i)] != 0.0) {
            out << "amarg " << i + 1 << " " << ineq.alice_marg[static_cast<std::size_t>(i)] << "\n";
        }
    }
    for (int j = 0; j < ineq.settings_b; ++j) {
        if (ineq.bob_marg[static_cast<std::size_t>(j)] != 0.0) {
            out << "bmarg " << j + 1 << " " << ineq.bob_marg[static_cast<std::size_t>(j)] << "\n";
        }
    }
    return out.str();
}

const std::vector<std::string> &catalog_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto &[n, _] : catalog_table()) out.push_back(n);
        return out;
    }();
    return names;
}

BellInequality catalog_get(std::string_view name) {
    for (const auto &[n, expr] : catalog_table()) {
        if (n == name) return parse_expression(n, expr);
    }
    throw std::invalid_argument("unknown inequality '" + std::string(name) + "'; valid names: " + join_names());
}

BellInequality resolve_inequality(std::string_view name_or_path) {
    const auto &names = catalog_names();
    if (std::find(names.begin(), names.end(), name_or_path) != names.end()) return catalog_get(name_or_path);
    std::filesystem::path p{std::string(name_or_path)};
    if (std::filesystem::exists(p)) return load_coefficient_file(p);
    return catalog_get(name_or_path);  // throws with the list of valid names
}

double evaluate(const BellInequality &ineq, const ProbabilityTable &table) {
    if (table.settings_a() != ineq.settings_a || table.settings_b() != ineq.settings_b) {
        throw std::invalid_argument("table is " + std::to_string(table.settings_a()) + "x" +
                                    std::to_string(table.settings_b()) + " but inequality '" + ineq.name + "' is " +
                                    std::to_string(ineq.settings_a) + "x" + std::to_string(ineq.settings_b));
    }
    table.validate();
    double value = 0.0;
    for (int i = 0; i < ineq.settings_a; ++i) {
        for (int j = 0; j < ineq.settings_b; ++j) value += ineq.joint_at(i, j) * table(0, 0, i, j);
    }
    for (int i = 0; i < ineq.settings_a; ++i) value += ineq.alice_marg[static_cast<std::size_t>(i)] * table.marginal_a(0, i);
    for (int j = 0; j < ineq.settings_b; ++j) value += ineq.bob_marg[static_cast<std::size_t>(j)] * table.marginal_b(0, j);
    return value;
}

}  // namespace diqkd
