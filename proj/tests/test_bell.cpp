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
#include <sstream>

#include <gtest/gtest.h>

#include "diqkd/bell.hpp"

namespace diqkd {
namespace {

ProbabilityTable deterministic_table(int ma, int mb, unsigned alice_bits, unsigned bob_bits) {
    ProbabilityTable t(ma, mb);
    for (int i = 0; i < ma; ++i)
        for (int j = 0; j < mb; ++j) t(static_cast<int>((alice_bits >> i) & 1u), static_cast<int>((bob_bits >> j) & 1u), i, j) = 1.0;
    return t;
}

ProbabilityTable uniform_table(int ma, int mb) {
    ProbabilityTable t(ma, mb);
    for (int i = 0; i < ma; ++i)
        for (int j = 0; j < mb; ++j)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) t(a, b, i, j) = 0.25;
    return t;
}

TEST(Catalog, ChshCoefficients) {
    const BellInequality chsh = catalog_get("CHSH");
    EXPECT_EQ(chsh.settings_a, 2);
    EXPECT_EQ(chsh.settings_b, 2);
    EXPECT_EQ(chsh.joint, (std::vector<double>{1, 1, 1, -1}));
    EXPECT_EQ(chsh.alice_marg, (std::vector<double>{-1, 0}));
    EXPECT_EQ(chsh.bob_marg, (std::vector<double>{-1, 0}));
    EXPECT_EQ(chsh.classical_bound, 0.0);
}

TEST(Catalog, I3322Coefficients) {
    const BellInequality i3322 = catalog_get("I3322");
    EXPECT_EQ(i3322.joint, (std::vector<double>{1, 1, 1, 1, 1, -1, 1, -1, 0}));
    EXPECT_EQ(i3322.alice_marg, (std::vector<double>{-2, -1, 0}));
    EXPECT_EQ(i3322.bob_marg, (std::vector<double>{-1, 0, 0}));
}

TEST(Catalog, UnknownNameListsValidOnes) {
    try {
        (void)catalog_get("XYZ");
        FAIL() << "expected an error";
    } catch (const std::invalid_argument &e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("CHSH"), std::string::npos);
        EXPECT_NE(msg.find("I4422_19"), std::string::npos);
    }
}

TEST(Catalog, HasTwelveEntriesWithZeroBound) {
    EXPECT_EQ(catalog_names().size(), 12u);
    for (const auto &name : catalog_names()) {
        const BellInequality ineq = catalog_get(name);
        EXPECT_NO_THROW(ineq.validate()) << name;
        EXPECT_EQ(ineq.classical_bound, 0.0) << name;
    }
}

// Every deterministic local strategy stays at or below the classical bound.
TEST(Catalog, ClassicalBoundHoldsForAllDeterministicStrategies) {
    for (const auto &name : catalog_names()) {
        const BellInequality ineq = catalog_get(name);
        double best = -1e300;
        for (unsigned a = 0; a < (1u << ineq.settings_a); ++a)
            for (unsigned b = 0; b < (1u << ineq.settings_b); ++b)
                best = std::max(best, evaluate(ineq, deterministic_table(ineq.settings_a, ineq.settings_b, a, b)));
        EXPECT_LE(best, 1e-12) << name;
        EXPECT_NEAR(best, 0.0, 1e-12) << name << " bound should be tight";
    }
}

TEST(Evaluate, ChshExamples) {
    const BellInequality chsh = catalog_get("CHSH");
    EXPECT_DOUBLE_EQ(evaluate(chsh, deterministic_table(2, 2, 0, 0)), 0.0);
    EXPECT_DOUBLE_EQ(evaluate(chsh, uniform_table(2, 2)), -0.5);
}

TEST(Evaluate, DimensionMismatchThrows) {
    EXPECT_THROW((void)evaluate(catalog_get("CHSH"), uniform_table(3, 3)), std::invalid_argument);
}

TEST(Evaluate, LinearInTable) {
    const BellInequality ineq = catalog_get("I3322");
    const ProbabilityTable t1 = deterministic_table(3, 3, 5, 2);
    const ProbabilityTable t2 = uniform_table(3, 3);
    for (double lambda : {0.0, 0.3, 0.7, 1.0}) {
        ProbabilityTable mix(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) mix(a, b, i, j) = lambda * t1(a, b, i, j) + (1 - lambda) * t2(a, b, i, j);
        EXPECT_NEAR(evaluate(ineq, mix), lambda * evaluate(ineq, t1) + (1 - lambda) * evaluate(ineq, t2), 1e-12);
    }
}

TEST(ProbabilityTable, ValidateRejectsSignaling) {
    ProbabilityTable t(2, 2);
    t(0, 0, 0, 0) = 1.0;
    t(0, 0, 0, 1) = 1.0;
    t(0, 0, 1, 0) = 1.0;
    t(1, 0, 1, 1) = 1.0;  // Alice's marginal for setting 1 depends on Bob's setting
    EXPECT_THROW(t.validate(), std::invalid_argument);
}

TEST(ProbabilityTable, ValidateRejectsUnnormalized) {
    ProbabilityTable t = uniform_table(2, 2);
    t(0, 0, 1, 1) = 0.3;
    EXPECT_THROW(t.validate(), std::invalid_argument);
}

TEST(Parse, ExpressionMatchesCatalog) {
    const BellInequality parsed = parse_expression("chsh", "P11+P12+P21-P22-P10-P01");
    const BellInequality chsh = catalog_get("CHSH");
    EXPECT_EQ(parsed.joint, chsh.joint);
    EXPECT_EQ(parsed.alice_marg, chsh.alice_marg);
    EXPECT_EQ(parsed.bob_marg, chsh.bob_marg);
}

TEST(Parse, CoefficientFileRoundTrip) {
    for (const auto &name : catalog_names()) {
        const BellInequality ineq = catalog_get(name);
        std::istringstream in(to_coefficient_text(ineq));
        const BellInequality back = parse_coefficient_file(in, "x");
        EXPECT_EQ(back.name, ineq.name);
        EXPECT_EQ(back.joint, ineq.joint);
        EXPECT_EQ(back.alice_marg, ineq.alice_marg);
        EXPECT_EQ(back.bob_marg, ineq.bob_marg);
    }
}

TEST(Parse, CoefficientFileByHand) {
    std::istringstream in("# chsh by hand\njoint 1 1 1\njoint 1 2 1\njoint 2 1 1\njoint 2 2 -1\namarg 1 -1\nbmarg 1 -1\n");
    const BellInequality ineq = parse_coefficient_file(in, "hand");
    EXPECT_EQ(ineq.name, "hand");
    EXPECT_EQ(ineq.joint, catalog_get("CHSH").joint);
    EXPECT_DOUBLE_EQ(evaluate(ineq, uniform_table(2, 2)), -0.5);
}

TEST(Parse, MalformedLineThrows) {
    std::istringstream in("joint 1 x 1\n");
    EXPECT_THROW((void)parse_coefficient_file(in, "bad"), std::invalid_argument);
}

}  // namespace
}  // namespace diqkd
