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
#ifndef DIQKD_CLI_HPP
#define DIQKD_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "diqkd/quantum.hpp"

namespace diqkd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Invalid or inconsistent command-line configuration.
class ConfigError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

enum class Mode { kCurves, kKeyrate, kThreshold, kQber, kBb84, kTable2, kHighdim };

struct RunConfig {
    Mode mode = Mode::kKeyrate;
    std::string inequality = "CHSH";
    std::string setup = "symmetric";  // symmetric | asymmetric | custom
    std::optional<double> eta;
    std::optional<double> eta_a;
    std::optional<double> eta_b;
    std::size_t samples = 200000;
    std::uint64_t seed = 1;
    int bins = 200;
    int restarts = 20;
    std::filesystem::path out = ".";
    std::string format = "csv";  // csv | json
    bool constrain_sym = true;         // Lambda1 = Lambda2 on the Gamma sampling
    bool constrain_sym_eaves = false;  // same on the I_E sampling
    int d_max = 2;
    std::optional<double> q;     // operating violation for highdim
    bool clouds = false;         // also write the raw sample clouds
    bool record_runtime = false;
    int threads = 0;

    /// Throws ConfigError when an invariant fails.
    void validate() const;

    /// Efficiency pair for modes evaluated at one efficiency.
    EfficiencySetup efficiency() const;
};

Mode parse_mode(const std::string &name);
std::string mode_name(Mode mode);

/// Parses argv. Returns nullopt when help was requested (already printed to out).
/// Throws ConfigError on malformed or inconsistent input.
std::optional<RunConfig> parse_args(int argc, const char *const *argv, std::ostream &out);

/// Executes one run: writes the files under config.out, prints headline numbers to out and
/// diagnostics to err. Returns the process exit status.
int run(const RunConfig &config, std::ostream &out, std::ostream &err);

/// parse_args + run with exit status mapping.
int main_entry(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace diqkd::cli

#endif  // DIQKD_CLI_HPP
