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
#include "diqkd/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diqkd/analysis.hpp"
#include "diqkd/bell.hpp"
#include "diqkd/highdim.hpp"
#include "diqkd/montecarlo.hpp"

namespace diqkd::cli {

namespace {

using nlohmann::ordered_json;

struct ModeName {
    Mode mode;
    const char *name;
};

constexpr ModeName kModes[] = {{Mode::kCurves, "curves"}, {Mode::kKeyrate, "keyrate"}, {Mode::kThreshold, "threshold"},
                               {Mode::kQber, "qber"},     {Mode::kBb84, "bb84"},       {Mode::kTable2, "table2"},
                               {Mode::kHighdim, "highdim"}};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

ordered_json opt(const std::optional<double> &v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

struct Summary {
    std::string inequality;
    Mode mode = Mode::kKeyrate;
    EfficiencySetup eff;
    std::optional<Crossing> crossing;
    std::optional<double> eps_cr;
    std::optional<double> eta_min;
};

ordered_json to_json(const Summary &s, const RunConfig &cfg, std::optional<double> runtime) {
    ordered_json j;
    j["inequality"] = s.inequality;
    j["mode"] = mode_name(s.mode);
    j["eta_a"] = s.eff.eta_a;
    j["eta_b"] = s.eff.eta_b;
    j["samples"] = cfg.samples;
    j["seed"] = cfg.seed;
    j["crossing_q"] = s.crossing ? ordered_json(s.crossing->q) : ordered_json(nullptr);
    j["crossing_i"] = s.crossing ? ordered_json(s.crossing->i) : ordered_json(nullptr);
    j["eps_cr"] = opt(s.eps_cr);
    j["eta_min"] = opt(s.eta_min);
    j["runtime_s"] = opt(runtime);
    return j;
}

std::ofstream open_out(const RunConfig &cfg, const std::string &name) {
    std::ofstream f(cfg.out / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (cfg.out / name).string());
    return f;
}

void write_json(const RunConfig &cfg, const std::string &name, const ordered_json &j) {
    auto f = open_out(cfg, name);
    f << j.dump(2) << '\n';
}

void write_boundary(const RunConfig &cfg, const std::string &name, const BoundaryCurve &curve) {
    if (cfg.format != "csv") return;
    auto f = open_out(cfg, name);
    write_boundary_csv(f, curve);
}

void write_cloud(const RunConfig &cfg, const std::string &name, const SampleCloud &cloud) {
    if (cfg.format != "csv") return;
    auto f = open_out(cfg, name);
    write_cloud_csv(f, cloud);
}

McParams mc_params(const RunConfig &cfg) {
    McParams p;
    p.samples = cfg.samples;
    p.seed = cfg.seed;
    p.bins = cfg.bins;
    p.gamma_bins = cfg.bins;
    p.optimizer.restarts = cfg.restarts;
    p.threads = cfg.threads;
    p.constrain_sym_mutual = cfg.constrain_sym;
    p.constrain_sym_eaves = cfg.constrain_sym_eaves;
    return p;
}

SetupMode setup_mode(const RunConfig &cfg) {
    if (cfg.setup == "symmetric") return SetupMode::kSymmetric;
    if (cfg.setup == "asymmetric") return SetupMode::kAsymmetric;
    throw ConfigError("threshold searches need --setup symmetric or asymmetric");
}

void print_crossing(std::ostream &out, const KeyRateReport &r) {
    if (r.crossing) {
        out << "crossing: Q = " << fmt(r.crossing->q) << ", I = " << fmt(r.crossing->i) << '\n';
        out << "eps_cr = " << fmt(*r.eps_cr) << '\n';
    } else {
        out << "crossing: none\n";
    }
}

void require_crossing(const KeyRateReport &r) {
    if (!r.crossing) throw NumericalError("I_E and I_AB do not cross on the sampled range");
}

std::vector<Summary> run_mode(const RunConfig &cfg, std::ostream &out) {
    const McParams params = mc_params(cfg);
    std::vector<Summary> summaries;

    if (cfg.mode == Mode::kBb84) {
        const Bb84Result r = bb84_analysis(params);
        write_boundary(cfg, "ie.csv", upper_boundary(r.eaves, cfg.bins));
        write_boundary(cfg, "iab.csv", mutual_curve(r.mutual, upper_boundary(r.eaves, cfg.bins), cfg.bins));
        if (cfg.clouds) {
            write_cloud(cfg, "eaves_cloud.csv", r.eaves);
            write_cloud(cfg, "mutual_cloud.csv", r.mutual);
        }
        print_crossing(out, r.report);
        require_crossing(r.report);
        summaries.push_back({"CHSH", cfg.mode, EfficiencySetup::ideal(), r.report.crossing, r.report.eps_cr, {}});
        return summaries;
    }

    std::vector<BellInequality> targets;
    if (cfg.mode == Mode::kTable2 && cfg.inequality == "all") {
        for (const auto &name : catalog_names()) targets.push_back(catalog_get(name));
    } else {
        targets.push_back(resolve_inequality(cfg.inequality));
    }

    for (const auto &ineq : targets) {
        const ProtocolModel model(ineq, params);
        switch (cfg.mode) {
            case Mode::kCurves:
            case Mode::kKeyrate:
            case Mode::kQber: {
                const EfficiencySetup eff = cfg.efficiency();
                const SampleCloud mutual = model.mutual_cloud(eff);
                const BoundaryCurve iab = mutual_curve(mutual, model.ie_curve(), params.gamma_bins);
                const KeyRateReport r = diqkd::key_rate(model.ie_curve(), iab, eff);
                if (cfg.mode != Mode::kQber) write_boundary(cfg, "ie.csv", model.ie_curve());
                write_boundary(cfg, "iab.csv", iab);
                if (cfg.clouds || cfg.mode == Mode::kQber) write_cloud(cfg, "mutual_cloud.csv", mutual);
                if (cfg.clouds && cfg.mode != Mode::kQber) write_cloud(cfg, "eaves_cloud.csv", model.eaves_cloud());
                print_crossing(out, r);
                if (cfg.mode != Mode::kCurves) require_crossing(r);
                summaries.push_back({ineq.name, cfg.mode, eff, r.crossing, r.eps_cr, {}});
                break;
            }
            case Mode::kThreshold: {
                const SetupMode sm = setup_mode(cfg);
                const ThresholdResult t = model.threshold(sm);
                const KeyRateReport r = model.key_rate(setup_for(sm, t.bracket_hi));
                out << "eta_min = " << fmt(t.eta_min) << " (bracket [" << fmt(t.bracket_lo) << ", "
                    << fmt(t.bracket_hi) << "])\n";
                print_crossing(out, r);
                summaries.push_back({ineq.name, cfg.mode, setup_for(sm, t.eta_min), r.crossing, r.eps_cr, t.eta_min});
                break;
            }
            case Mode::kTable2: {
                const Table2Row row = table2_row(model);
                auto show = [](const std::optional<double> &v) { return v ? fmt(*v) : std::string("-"); };
                out << row.inequality << ": eps_cr " << show(row.eps_cr_ideal) << " / " << show(row.eps_cr_sym)
                    << " / " << show(row.eps_cr_asym) << ", eta_min " << fmt(row.eta_min_sym) << " / "
                    << fmt(row.eta_min_asym) << '\n';
                summaries.push_back(
                    {ineq.name, cfg.mode, EfficiencySetup::ideal(), row.crossing_ideal, row.eps_cr_ideal, {}});
                summaries.push_back({ineq.name, cfg.mode, EfficiencySetup::symmetric(row.eta_min_sym),
                                     row.crossing_sym, row.eps_cr_sym, row.eta_min_sym});
                summaries.push_back({ineq.name, cfg.mode, EfficiencySetup::asymmetric(row.eta_min_asym),
                                     row.crossing_asym, row.eps_cr_asym, row.eta_min_asym});
                break;
            }
            case Mode::kHighdim: {
                const EfficiencySetup eff = cfg.efficiency();
                const KeyRateReport base = model.key_rate(eff);
                double q = 0.0;
                if (cfg.q) {
                    q = *cfg.q;
                } else {
                    require_crossing(base);
                    q = base.crossing->q;
                }
                HighDimGrid grid;
                grid.seed = cfg.seed;
                grid.optimizer.restarts = cfg.restarts;
                grid.threads = cfg.threads;
                const KeyRateMin k = key_rate_min(ineq, cfg.d_max, q, base, grid);
                if (cfg.format == "csv") {
                    auto f = open_out(cfg, "highdim.csv");
                    f << "d,xi,iab,ie,rate\n";
                    char buf[128];
                    auto cell = [&](const std::optional<double> &v) {
                        if (!v) return std::string();
                        std::snprintf(buf, sizeof buf, "%.17g", *v);
                        return std::string(buf);
                    };
                    for (const auto &t : k.terms) {
                        f << t.d << ',' << t.xi << ',' << cell(t.iab) << ',' << cell(t.ie) << ',' << cell(t.rate)
                          << '\n';
                    }
                }
                out << "Q = " << fmt(q) << ": min rate " << fmt(k.rate) << " at d = " << k.d << ", xi = " << k.xi
                    << '\n';
                summaries.push_back({ineq.name, cfg.mode, eff, base.crossing, base.eps_cr, {}});
                break;
            }
            case Mode::kBb84:
                break;
        }
    }
    return summaries;
}

}  // namespace

Mode parse_mode(const std::string &name) {
    for (const auto &m : kModes)
        if (name == m.name) return m.mode;
    throw ConfigError("unknown mode '" + name + "'");
}

std::string mode_name(Mode mode) {
    for (const auto &m : kModes)
        if (mode == m.mode) return m.name;
    return "unknown";
}

void RunConfig::validate() const {
    if (setup != "symmetric" && setup != "asymmetric" && setup != "custom") {
        throw ConfigError("--setup must be symmetric, asymmetric or custom");
    }
    auto in_range = [](const std::optional<double> &v, const char *flag) {
        if (v && !(*v >= 0.0 && *v <= 1.0)) {
            throw ConfigError(std::string(flag) + " = " + std::to_string(*v) + " is outside [0, 1]");
        }
    };
    in_range(eta, "--eta");
    in_range(eta_a, "--eta-a");
    in_range(eta_b, "--eta-b");
    if (setup == "custom") {
        if (!eta_a || !eta_b) throw ConfigError("--setup custom requires both --eta-a and --eta-b");
        if (eta) throw ConfigError("--setup custom takes --eta-a and --eta-b, not --eta");
    } else if (setup == "symmetric") {
        std::optional<double> common = eta;
        for (const auto &v : {eta_a, eta_b}) {
            if (!v) continue;
            if (common && *common != *v) throw ConfigError("--setup symmetric forbids distinct efficiencies");
            common = v;
        }
    } else if (eta_a && *eta_a != 1.0) {
        throw ConfigError("--setup asymmetric fixes eta_a = 1");
    } else if (eta && eta_b && *eta != *eta_b) {
        throw ConfigError("--eta and --eta-b disagree");
    }
    if (samples < 1) throw ConfigError("--samples must be positive");
    if (bins < 2) throw ConfigError("--bins must be at least 2");
    if (restarts < 1) throw ConfigError("--restarts must be positive");
    if (format != "csv" && format != "json") throw ConfigError("--format must be csv or json");
    if (d_max < kMinDim || d_max > kMaxDim) throw ConfigError("--d-max must be in 2..4");
    if (mode != Mode::kHighdim && d_max != 2) throw ConfigError("--d-max applies to highdim mode only");
    if (threads < 0) throw ConfigError("--threads must be nonnegative");
}

EfficiencySetup RunConfig::efficiency() const {
    if (setup == "custom") return {*eta_a, *eta_b};
    if (setup == "asymmetric") return EfficiencySetup::asymmetric(eta_b ? *eta_b : eta.value_or(1.0));
    return EfficiencySetup::symmetric(eta ? *eta : (eta_a ? *eta_a : eta_b.value_or(1.0)));
}

std::optional<RunConfig> parse_args(int argc, const char *const *argv, std::ostream &out) {
    RunConfig cfg;
    CLI::App app{"Monte Carlo key rates and threshold efficiencies for device-independent QKD"};
    std::string mode;
    std::string out_dir = ".";
    double eta = 0.0;
    double eta_a = 0.0;
    double eta_b = 0.0;
    double q = 0.0;
    app.add_option("--mode", mode, "curves|keyrate|threshold|qber|bb84|table2|highdim")->required();
    app.add_option("--inequality", cfg.inequality, "catalog name or coefficient file (table2 also takes 'all')");
    app.add_option("--setup", cfg.setup, "symmetric|asymmetric|custom");
    auto *o_eta = app.add_option("--eta", eta, "detection efficiency");
    auto *o_eta_a = app.add_option("--eta-a", eta_a, "Alice's detection efficiency");
    auto *o_eta_b = app.add_option("--eta-b", eta_b, "Bob's detection efficiency");
    app.add_option("--samples", cfg.samples, "Monte Carlo states per cloud");
    app.add_option("--seed", cfg.seed, "64-bit seed");
    app.add_option("--bins", cfg.bins, "violation bins");
    app.add_option("--restarts", cfg.restarts, "see-saw restarts per state");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", cfg.format, "csv|json");
    app.add_flag("--constrain-sym", cfg.constrain_sym, "Lambda1 = Lambda2 on the Gamma sampling (default true)");
    app.add_flag("--constrain-sym-eaves", cfg.constrain_sym_eaves, "Lambda1 = Lambda2 on the I_E sampling too");
    app.add_option("--d-max", cfg.d_max, "largest local dimension (highdim)");
    auto *o_q = app.add_option("--q", q, "operating violation for highdim (default: the crossing)");
    app.add_option("--threads", cfg.threads, "worker threads (DIQKD_THREADS overrides)");
    app.add_flag("--clouds", cfg.clouds, "also write the sample clouds");
    app.add_flag("--record-runtime", cfg.record_runtime, "store wall time in the summary");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return std::nullopt;
    } catch (const CLI::ParseError &e) {
        throw ConfigError(e.what());
    }
    cfg.mode = parse_mode(mode);
    cfg.out = out_dir;
    if (*o_eta) cfg.eta = eta;
    if (*o_eta_a) cfg.eta_a = eta_a;
    if (*o_eta_b) cfg.eta_b = eta_b;
    if (*o_q) cfg.q = q;
    cfg.validate();
    return cfg;
}

int run(const RunConfig &config, std::ostream &out, std::ostream &err) {
    try {
        config.validate();
        if (config.mode != Mode::kBb84 && !(config.mode == Mode::kTable2 && config.inequality == "all")) {
            (void)resolve_inequality(config.inequality);
        }
        std::filesystem::create_directories(config.out);
    } catch (const std::exception &e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    try {
        const auto start = std::chrono::steady_clock::now();
        const std::vector<Summary> summaries = run_mode(config, out);
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out << "runtime: " << fmt(elapsed) << " s\n";
        std::optional<double> runtime;
        if (config.record_runtime) runtime = elapsed;
        if (config.mode == Mode::kTable2) {
            ordered_json rows = ordered_json::array();
            for (const auto &s : summaries) rows.push_back(to_json(s, config, runtime));
            write_json(config, "table2.json", rows);
        } else {
            write_json(config, "summary.json", to_json(summaries.front(), config, runtime));
        }
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception &e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

int main_entry(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    std::optional<RunConfig> cfg;
    try {
        cfg = parse_args(argc, argv, out);
    } catch (const std::exception &e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    if (!cfg) return kExitOk;
    return run(*cfg, out, err);
}

}  // namespace diqkd::cli
