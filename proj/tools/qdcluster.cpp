// Copyright 2026 The qdcluster Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// qdcluster: run cluster-state scenarios and analyse measured data.
//
//   qdcluster simulate --config configs/baseline.json --out out/baseline
//   qdcluster sweep    --config configs/baseline.json --jobs 4
//   qdcluster fit-dcp  --input trace.csv
//   qdcluster gfactor  --input larmor.csv
//   qdcluster fidelity --input counts.csv
//
// Exit codes: 0 success, 2 configuration or input error, 3 numerical error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qdcluster/analysis.hpp"
#include "qdcluster/protocol.hpp"
#include "qdcluster/scenario.hpp"
#include "qdcluster/trion.hpp"

namespace {

namespace fs = std::filesystem;
using namespace qdcluster;
using nlohmann::json;
using scenario::fmt;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

/// Input problems that are the caller's fault rather than a numerical failure.
class InputError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string config;
    std::string out;
    std::string input;
    int jobs = 1;
    std::optional<std::uint64_t> seed;
};

struct Loaded {
    scenario::ScenarioConfig config;
    std::string hash;
    fs::path out_dir;
};

Loaded load(const Common& opt) {
    if (opt.config.empty()) throw scenario::ConfigError({"--config: a scenario file is required"});
    std::string text;
    try {
        text = scenario::read_text(opt.config);
    } catch (const Error& e) {
        throw scenario::ConfigError({std::string("--config: ") + e.what()});
    }
    Loaded l{scenario::parse_config(text), scenario::git_blob_hash(text), {}};
    if (opt.seed) l.config.seed = *opt.seed;
    l.out_dir = opt.out.empty() ? fs::path(l.config.output_dir) : fs::path(opt.out);
    return l;
}

json derived_json(const scenario::ScenarioConfig& c) {
    const auto p = c.device();
    const double fg = trion::ground_larmor(p), fe = trion::excited_larmor(p);
    return {{"b_field_T", p.b_field},
            {"ground_larmor_GHz", fg},
            {"excited_larmor_GHz", fe},
            {"ground_period_ns", fg > 0.0 ? json(1.0 / fg) : json("inf")},
            {"excited_period_ns", fe > 0.0 ? json(1.0 / fe) : json("inf")},
            {"pulse_gap_ns", c.gap()},
            {"cycle_capture", trion::capture_probability(p)},
            {"params_hash", protocol::params_hash(p)}};
}

json metadata(const std::string& command, const Loaded& l) {
    return {{"tool", "qdcluster"},
            {"version", scenario::kToolVersion},
            {"command", command},
            {"scenario", l.config.scenario},
            {"config_hash", l.hash},
            {"config", scenario::config_to_json(l.config)},
            {"seed", l.config.seed},
            {"epsilon_mapping", protocol::kEpsilonMapping},
            {"derived", derived_json(l.config)}};
}

void echo(const scenario::ScenarioConfig& c) {
    const auto p = c.device();
    const double fg = trion::ground_larmor(p), fe = trion::excited_larmor(p);
    std::fprintf(stderr, "scenario %s\n", c.scenario.c_str());
    std::fprintf(stderr, "  b_field = %s mT%s\n", fmt(p.b_field * 1e3).c_str(), c.b_field_mT ? "" : " (derived)");
    std::fprintf(stderr, "  hole Larmor %s GHz, period %s ns\n", fmt(fg).c_str(), fg > 0 ? fmt(1.0 / fg).c_str() : "inf");
    std::fprintf(stderr, "  electron Larmor %s GHz, period %s ns\n", fmt(fe).c_str(),
                 fe > 0 ? fmt(1.0 / fe).c_str() : "inf");
    std::fprintf(stderr, "  pulse gap %s ns, window %s ns, t_rad %s ns\n", fmt(c.gap()).c_str(), fmt(p.window).c_str(),
                 fmt(p.t_rad).c_str());
    std::fprintf(stderr, "  T2* hole %s ns, electron %s ns\n", fmt(p.t2_ground).c_str(), fmt(p.t2_excited).c_str());
}

void write_json(const fs::path& path, const json& j) { scenario::write_file(path, j.dump(2) + "\n"); }

int run_simulate(const Common& opt) {
    const auto l = load(opt);
    const auto& c = l.config;
    echo(c);
    const auto p = c.device();
    const auto engine = c.engine(opt.jobs);
    const double gap = c.gap();

    const auto curve = protocol::fidelity_curve(c.scenario, p, p, c.k_max, gap, engine);
    std::string capture = std::string(scenario::kCaptureHeader) + "\n";
    for (int k = 1; k <= c.k_max; ++k) {
        const auto seq = protocol::k_photon_state(p, k, protocol::PulseSchedule::uniform(gap, k + 1), engine);
        capture += std::to_string(k + 1) + "," + fmt(trion::capture_probability(p)) + "," +
                   fmt(seq.herald_probability) + "\n";
    }
    std::vector<std::pair<protocol::TruthTableMode, protocol::TruthTable>> tables;
    for (auto mode : {protocol::TruthTableMode::kT23EqualsT12, protocol::TruthTableMode::kT23EqualsTwiceT12}) {
        tables.emplace_back(mode, protocol::truth_table(p, mode, gap, engine));
    }

    scenario::write_file(l.out_dir / "fidelity_curve.csv", scenario::fidelity_curves_csv({curve}));
    scenario::write_file(l.out_dir / "truth_tables.csv", scenario::truth_tables_csv(tables));
    scenario::write_file(l.out_dir / "capture.csv", capture);
    json meta = metadata("simulate", l);
    meta["outputs"] = {"fidelity_curve.csv", "truth_tables.csv", "capture.csv"};
    write_json(l.out_dir / "metadata.json", meta);

    for (const auto& e : curve.entries) {
        std::printf("total_qubits=%d fidelity=%s\n", e.total_qubits, fmt(e.fidelity).c_str());
    }
    return 0;
}

int run_sweep(const Common& opt) {
    const auto l = load(opt);
    const auto& c = l.config;
    if (c.epsilons.empty()) throw scenario::ConfigError({"sweep.epsilons: must be a non-empty list for sweep"});
    echo(c);
    const auto p = c.device();
    const auto curves = protocol::error_sweep(p, c.epsilons, c.k_max, c.gap(), c.engine(opt.jobs));
    const bool monotone = protocol::sweep_is_monotone(c.epsilons, curves);

    scenario::write_file(l.out_dir / "band.csv", scenario::band_csv(c.epsilons, curves));
    scenario::write_file(l.out_dir / "fidelity_curves.csv", scenario::fidelity_curves_csv(curves));
    json meta = metadata("sweep", l);
    meta["monotone_in_epsilon"] = monotone;
    meta["outputs"] = {"band.csv", "fidelity_curves.csv"};
    write_json(l.out_dir / "metadata.json", meta);

    std::printf("monotone_in_epsilon=%s\n", monotone ? "true" : "false");
    if (!monotone) std::fprintf(stderr, "warning: sweep curves are not pointwise ordered in epsilon\n");
    return 0;
}

std::ifstream open_input(const std::string& path) {
    if (path.empty()) throw InputError("--input: a data file is required");
    std::ifstream in(path);
    if (!in) throw InputError("--input: cannot open '" + path + "'");
    return in;
}

/// Parses an input file, reporting format problems as input errors.
template <typename Fn>
auto parse_input(const std::string& path, Fn&& fn) {
    auto in = open_input(path);
    try {
        return fn(in);
    } catch (const Error& e) {
        throw InputError(std::string("--input: ") + e.what());
    }
}

fs::path out_dir(const Common& opt) { return opt.out.empty() ? fs::path(".") : fs::path(opt.out); }

int run_fit_dcp(const Common& opt, bool fix_frequency) {
    const auto series = parse_input(opt.input, [](std::istream& in) { return analysis::read_time_series(in); });
    analysis::FitOptions fo;
    fo.fix_frequency = fix_frequency;
    const auto fit = analysis::fit_dcp(series, fo);
    const json j = {{"p0", fit.p0},         {"p0_err", fit.p0_err()},
                    {"t2_star_ns", fit.t2_star}, {"t2_star_err_ns", fit.t2_err()},
                    {"f_l_GHz", fit.f_l},    {"f_l_err_GHz", fit.f_err()},
                    {"frequency_fixed", fix_frequency}, {"residual_rms", fit.residual_rms},
                    {"iterations", fit.iterations}};
    write_json(out_dir(opt) / "dcp_fit.json", j);
    std::printf("p0=%s t2_star_ns=%s f_l_GHz=%s residual_rms=%s\n", fmt(fit.p0).c_str(), fmt(fit.t2_star).c_str(),
                fmt(fit.f_l).c_str(), fmt(fit.residual_rms).c_str());
    return 0;
}

int run_gfactor(const Common& opt) {
    const auto pts = parse_input(opt.input, [](std::istream& in) { return analysis::read_larmor_points(in); });
    const auto g = analysis::fit_gfactor(pts);
    write_json(out_dir(opt) / "gfactor.json", {{"g", g.g}, {"g_err", g.g_err}, {"points", pts.size()}});
    std::printf("g=%s g_err=%s\n", fmt(g.g).c_str(), fmt(g.g_err).c_str());
    return 0;
}

int run_fidelity(const Common& opt, int mc_samples) {
    const auto tables = parse_input(opt.input, [](std::istream& in) { return analysis::read_counts(in); });
    const analysis::CoincidenceCounts* circ = nullptr;
    const analysis::CoincidenceCounts* lin = nullptr;
    for (const auto& t : tables) {
        if (t.basis2 == protocol::Basis::kRL && t.basis3 == protocol::Basis::kRL) circ = &t;
        if (t.basis2 == protocol::Basis::kHV && t.basis3 == protocol::Basis::kRL) lin = &t;
    }
    if (!circ || !lin) throw InputError("--input: need RL,RL and HV,RL coincidence tables");
    analysis::FidelityReport rep;
    try {
        rep = mc_samples > 0 ? analysis::fidelity_bounds_mc(*circ, *lin, mc_samples, opt.seed.value_or(1))
                             : analysis::fidelity_bounds(analysis::conditional_probs(*circ),
                                                         analysis::conditional_probs(*lin));
    } catch (const Error& e) {
        throw InputError(std::string("--input: ") + e.what());
    }
    const std::vector<std::pair<const char*, analysis::Estimate>> rows{
        {"f1", rep.f1}, {"f2", rep.f2}, {"f_sp", rep.f_sp}, {"eta", rep.eta}, {"f_spp", rep.f_spp}};
    std::string csv = "quantity,value,error\n";
    json j = {{"error_method", mc_samples > 0 ? "monte_carlo" : "delta_method"},
              {"eta_formula", "(P(L2|R3)+P(R2|L3))/2, inferred"},
              {"f1_error_note", "first-order propagation includes the square-root cross term"}};
    if (mc_samples > 0) j["mc_samples"] = mc_samples, j["seed"] = opt.seed.value_or(1);
    for (const auto& [name, e] : rows) {
        csv += std::string(name) + "," + fmt(e.value) + "," + fmt(e.error) + "\n";
        j[name] = {{"value", e.value}, {"error", e.error}};
        std::printf("%s=%s +- %s\n", name, fmt(e.value).c_str(), fmt(e.error).c_str());
    }
    scenario::write_file(out_dir(opt) / "fidelity_report.csv", csv);
    write_json(out_dir(opt) / "fidelity_report.json", j);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-dot cluster-state simulator and analysis tool"};
    app.require_subcommand(1);
    Common opt;
    bool fix_frequency = false;
    int mc_samples = 0;

    auto add_common = [&](CLI::App* sub, bool config) {
        if (config) sub->add_option("--config", opt.config, "scenario JSON file")->required();
        else sub->add_option("--input", opt.input, "input CSV file")->required();
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--jobs", opt.jobs, "worker threads")->check(CLI::Range(1, 1024));
        sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { opt.seed = s; },
                                                 "random seed");
    };
    auto* simulate = app.add_subcommand("simulate", "fidelity curve, truth tables and capture for a scenario");
    add_common(simulate, true);
    auto* sweep = app.add_subcommand("sweep", "fidelity curves under systematic errors");
    add_common(sweep, true);
    auto* fit = app.add_subcommand("fit-dcp", "fit a damped cosine to a DCP trace (time_ns,dcp[,err])");
    add_common(fit, false);
    fit->add_flag("--fix-frequency", fix_frequency, "fit a pure Gaussian decay (f = 0)");
    auto* gfac = app.add_subcommand("gfactor", "g-factor from Larmor frequencies (b_tesla,f_ghz[,f_err_ghz])");
    add_common(gfac, false);
    auto* fid = app.add_subcommand("fidelity", "fidelity bounds from coincidence counts");
    add_common(fid, false);
    fid->add_option("--mc-samples", mc_samples, "Monte Carlo error estimate with this many resamples")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*simulate) return run_simulate(opt);
        if (*sweep) return run_sweep(opt);
        if (*fit) return run_fit_dcp(opt, fix_frequency);
        if (*gfac) return run_gfactor(opt);
        if (*fid) return run_fidelity(opt, mc_samples);
    } catch (const scenario::ConfigError& e) {
        for (const auto& p : e.problems()) std::fprintf(stderr, "error: %s\n", p.c_str());
        return kExitConfig;
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const Error& e) {
        const bool input = e.kind() == ErrorKind::kInvalidArgument || e.kind() == ErrorKind::kConfig ||
                           e.kind() == ErrorKind::kIo || e.kind() == ErrorKind::kUnknownLabel;
        std::fprintf(stderr, "error: %s%s\n", input ? "" : "numerical: ", e.what());
        return input ? kExitConfig : kExitNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: numerical: %s\n", e.what());
        return kExitNumerical;
    }
    return 0;
}
