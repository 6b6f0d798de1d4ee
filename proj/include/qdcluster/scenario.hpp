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

// Scenario configuration files and the result files written by the
// command-line tool. Needs json.hpp on the include path and libcrypto.
//
// Field names carry their units. Example:
//
//   {
//     "scenario": "baseline",
//     "device": {
//       "g_ground": 0.229, "g_excited": 0.096,
//       "t2_ground_ns": 4.8, "t2_excited_ns": 0.8,
//       "t_rad_ns": 0.8, "window_ns": 0.3,
//       "pulse_polarization": {"linear_angle_deg": 0.0},
//       "p0": 1.0
//     },
//     "schedule": {"mode": "quarter_period", "t12_ns": 2.08},
//     "simulation": {"k_max": 3, "overhauser_nodes": 32,
//                    "emission_quadrature_steps": 64, "dephasing_model": "markovian"},
//     "sweep": {"epsilons": [0.1, 0.2, 0.3, 0.4]},
//     "seed": 1,
//     "outputs": {"dir": "out/baseline"}
//   }
//
// Times may be the string "inf". b_field_mT is optional; when absent the
// field is chosen so that t12_ns is a quarter hole period.

#pragma once

#include <openssl/sha.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdcluster/error.hpp"
#include "qdcluster/protocol.hpp"
#include "qdcluster/trion.hpp"

namespace qdcluster::scenario {

using nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

/// Field-level configuration problems; each message starts with the field path.
class ConfigError : public Error {
   public:
    explicit ConfigError(std::vector<std::string> problems)
        : Error(ErrorKind::kConfig, join(problems)), problems_(std::move(problems)) {}
    const std::vector<std::string>& problems() const noexcept { return problems_; }

   private:
    static std::string join(const std::vector<std::string>& ps) {
        std::string s;
        for (const auto& p : ps) s += (s.empty() ? "" : "; ") + p;
        return s;
    }
    std::vector<std::string> problems_;
};

enum class ScheduleMode { kQuarterPeriod, kFixed };

struct Polarization {
    std::optional<double> linear_angle_deg;
    std::optional<std::array<qmath::Complex, 2>> jones_rl;
};

struct ScenarioConfig {
    std::string scenario = "baseline";
    double g_ground = 0.229;
    double g_excited = 0.096;
    double t2_ground_ns = 4.8;
    double t2_excited_ns = 0.8;
    double t_rad_ns = 0.8;
    double window_ns = 0.3;
    std::optional<double> b_field_mT;
    Polarization polarization{0.0, std::nullopt};
    double p0 = 1.0;
    ScheduleMode schedule_mode = ScheduleMode::kQuarterPeriod;
    std::optional<double> t12_ns = protocol::kDefaultT12;
    int k_max = 3;
    int overhauser_nodes = 32;
    int emission_quadrature_steps = 64;
    trion::DephasingModel dephasing = trion::DephasingModel::kMarkovian;
    std::vector<double> epsilons;
    std::uint64_t seed = 1;
    std::string output_dir = "out";

    trion::DeviceParams device() const {
        trion::DeviceParams p;
        p.g_ground = g_ground;
        p.g_excited = g_excited;
        p.t2_ground = t2_ground_ns;
        p.t2_excited = t2_excited_ns;
        p.t_rad = t_rad_ns;
        p.window = window_ns;
        p.p0 = p0;
        if (polarization.jones_rl) {
            p.pulse_polarization = {(*polarization.jones_rl)[0], (*polarization.jones_rl)[1]};
        } else {
            p.pulse_polarization = trion::JonesVector::linear(polarization.linear_angle_deg.value_or(0.0) *
                                                              std::numbers::pi / 180.0);
        }
        p.b_field = b_field_mT ? *b_field_mT * 1e-3 : trion::quarter_period_field(g_ground, *t12_ns);
        return p;
    }

    /// Gap between pulses in ns.
    double gap() const {
        if (schedule_mode == ScheduleMode::kFixed) return *t12_ns;
        return trion::ground_quarter_period(device());
    }

    protocol::EngineOptions engine(int jobs) const {
        protocol::EngineOptions o;
        o.emission_steps = emission_quadrature_steps;
        o.overhauser_nodes = overhauser_nodes;
        o.dephasing = dephasing;
        o.jobs = jobs;
        return o;
    }
};

namespace detail {

inline json time_to_json(double t) { return std::isinf(t) ? json("inf") : json(t); }

class Reader {
   public:
    explicit Reader(std::vector<std::string>& problems) : problems_(problems) {}

    void fail(const std::string& path, const std::string& what) { problems_.push_back(path + ": " + what); }

    /// Rejects keys outside the allowed set.
    void only(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool ok = false;
            for (const char* k : keys) ok = ok || it.key() == k;
            if (!ok) fail(path + it.key(), "unknown field");
        }
    }

    const json* object(const json& parent, const std::string& key, const std::string& path, bool required) {
        if (!parent.contains(key)) {
            if (required) fail(path + key, "missing required object");
            return nullptr;
        }
        if (!parent[key].is_object()) {
            fail(path + key, "must be an object");
            return nullptr;
        }
        return &parent[key];
    }

    void number(const json& obj, const std::string& key, const std::string& path, double& out, bool required,
                bool allow_inf = false) {
        if (!obj.contains(key)) {
            if (required) fail(path + key, "missing required field");
            return;
        }
        const json& v = obj[key];
        if (allow_inf && v.is_string() && v.get<std::string>() == "inf") {
            out = trion::kInf;
        } else if (v.is_number()) {
            out = v.get<double>();
            if (!std::isfinite(out)) fail(path + key, "must be finite");
        } else {
            fail(path + key, allow_inf ? "must be a number or \"inf\"" : "must be a number");
        }
    }

    void integer(const json& obj, const std::string& key, const std::string& path, int& out, int lo, int hi) {
        if (!obj.contains(key)) return;
        const json& v = obj[key];
        if (!v.is_number_integer()) {
            fail(path + key, "must be an integer");
            return;
        }
        const auto x = v.get<long long>();
        if (x < lo || x > hi) {
            fail(path + key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            return;
        }
        out = static_cast<int>(x);
    }

   private:
    std::vector<std::string>& problems_;
};

}  // namespace detail

inline ScenarioConfig config_from_json(const json& j) {
    std::vector<std::string> problems;
    detail::Reader rd(problems);
    ScenarioConfig c;
    if (!j.is_object()) throw ConfigError({"$: configuration must be a JSON object"});
    rd.only(j, "", {"scenario", "device", "schedule", "simulation", "sweep", "seed", "outputs"});

    if (j.contains("scenario")) {
        if (j["scenario"].is_string() && !j["scenario"].get<std::string>().empty()) c.scenario = j["scenario"];
        else rd.fail("scenario", "must be a non-empty string");
    }

    if (const json* d = rd.object(j, "device", "", true)) {
        rd.only(*d, "device.", {"g_ground", "g_excited", "t2_ground_ns", "t2_excited_ns", "t_rad_ns", "window_ns",
                                "b_field_mT", "pulse_polarization", "p0"});
        rd.number(*d, "g_ground", "device.", c.g_ground, true);
        rd.number(*d, "g_excited", "device.", c.g_excited, true);
        rd.number(*d, "t2_ground_ns", "device.", c.t2_ground_ns, true, true);
        rd.number(*d, "t2_excited_ns", "device.", c.t2_excited_ns, true, true);
        rd.number(*d, "t_rad_ns", "device.", c.t_rad_ns, true);
        rd.number(*d, "window_ns", "device.", c.window_ns, true, true);
        if (d->contains("b_field_mT")) {
            double b = 0.0;
            rd.number(*d, "b_field_mT", "device.", b, true);
            c.b_field_mT = b;
            if (b < 0.0) rd.fail("device.b_field_mT", "must be >= 0");
        }
        rd.number(*d, "p0", "device.", c.p0, false);
        if (c.t2_ground_ns <= 0.0) rd.fail("device.t2_ground_ns", "must be > 0");
        if (c.t2_excited_ns <= 0.0) rd.fail("device.t2_excited_ns", "must be > 0");
        if (!(c.t_rad_ns > 0.0)) rd.fail("device.t_rad_ns", "must be > 0");
        if (!(c.window_ns > 0.0)) rd.fail("device.window_ns", "must be > 0");
        if (!(c.p0 > 0.0 && c.p0 <= 1.0)) rd.fail("device.p0", "must lie in (0, 1]");
        if (const json* pol = rd.object(*d, "pulse_polarization", "device.", false)) {
            rd.only(*pol, "device.pulse_polarization.", {"linear_angle_deg", "jones_rl"});
            const bool lin = pol->contains("linear_angle_deg"), jon = pol->contains("jones_rl");
            if (lin == jon) {
                rd.fail("device.pulse_polarization", "give exactly one of linear_angle_deg, jones_rl");
            } else if (lin) {
                double a = 0.0;
                rd.number(*pol, "linear_angle_deg", "device.pulse_polarization.", a, true);
                c.polarization = {a, std::nullopt};
            } else {
                const json& v = (*pol)["jones_rl"];
                auto is_pair = [](const json& x) {
                    return x.is_array() && x.size() == 2 && x[0].is_number() && x[1].is_number();
                };
                if (!(v.is_array() && v.size() == 2 && is_pair(v[0]) && is_pair(v[1]))) {
                    rd.fail("device.pulse_polarization.jones_rl", "must be [[re, im], [re, im]] for (R, L)");
                } else {
                    const qmath::Complex r(v[0][0].get<double>(), v[0][1].get<double>());
                    const qmath::Complex l(v[1][0].get<double>(), v[1][1].get<double>());
                    if (std::abs(std::norm(r) + std::norm(l) - 1.0) > 1e-10) {
                        rd.fail("device.pulse_polarization.jones_rl", "must have unit norm");
                    }
                    c.polarization = {std::nullopt, std::array<qmath::Complex, 2>{r, l}};
                }
            }
        }
    }

    if (const json* s = rd.object(j, "schedule", "", false)) {
        rd.only(*s, "schedule.", {"mode", "t12_ns"});
        if (s->contains("mode")) {
            const auto& m = (*s)["mode"];
            if (m == "quarter_period") c.schedule_mode = ScheduleMode::kQuarterPeriod;
            else if (m == "fixed") c.schedule_mode = ScheduleMode::kFixed;
            else rd.fail("schedule.mode", "must be \"quarter_period\" or \"fixed\"");
        }
        if (s->contains("t12_ns")) {
            double t = 0.0;
            rd.number(*s, "t12_ns", "schedule.", t, true);
            c.t12_ns = t;
            if (!(t > 0.0)) rd.fail("schedule.t12_ns", "must be > 0");
        } else {
            c.t12_ns.reset();
        }
    }
    if (!c.t12_ns && !c.b_field_mT) rd.fail("schedule.t12_ns", "required when device.b_field_mT is absent");
    if (!c.t12_ns && c.schedule_mode == ScheduleMode::kFixed) rd.fail("schedule.t12_ns", "required in fixed mode");

    if (const json* sim = rd.object(j, "simulation", "", false)) {
        rd.only(*sim, "simulation.", {"k_max", "overhauser_nodes", "emission_quadrature_steps", "dephasing_model"});
        rd.integer(*sim, "k_max", "simulation.", c.k_max, 1, protocol::kMaxPhotons);
        rd.integer(*sim, "overhauser_nodes", "simulation.", c.overhauser_nodes, 1, 256);
        rd.integer(*sim, "emission_quadrature_steps", "simulation.", c.emission_quadrature_steps, 2, 100000);
        if (sim->contains("dephasing_model")) {
            const auto& m = (*sim)["dephasing_model"];
            if (m == "markovian") c.dephasing = trion::DephasingModel::kMarkovian;
            else if (m == "quasi_static") c.dephasing = trion::DephasingModel::kQuasiStatic;
            else rd.fail("simulation.dephasing_model", "must be \"markovian\" or \"quasi_static\"");
        }
    }

    if (const json* sw = rd.object(j, "sweep", "", false)) {
        rd.only(*sw, "sweep.", {"epsilons"});
        if (sw->contains("epsilons")) {
            const auto& e = (*sw)["epsilons"];
            if (!e.is_array()) {
                rd.fail("sweep.epsilons", "must be an array");
            } else {
                for (std::size_t i = 0; i < e.size(); ++i) {
                    const std::string path = "sweep.epsilons[" + std::to_string(i) + "]";
                    if (!e[i].is_number()) {
                        rd.fail(path, "must be a number");
                    } else if (!(e[i].get<double>() >= 0.0 && e[i].get<double>() < 1.0)) {
                        rd.fail(path, "must lie in [0, 1)");
                    } else {
                        c.epsilons.push_back(e[i].get<double>());
                    }
                }
            }
        }
    }

    if (j.contains("seed")) {
        if (j["seed"].is_number_unsigned() || (j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0)) {
            c.seed = j["seed"].get<std::uint64_t>();
        } else {
            rd.fail("seed", "must be a non-negative integer");
        }
    }

    if (const json* o = rd.object(j, "outputs", "", false)) {
        rd.only(*o, "outputs.", {"dir"});
        if (o->contains("dir")) {
            if ((*o)["dir"].is_string()) c.output_dir = (*o)["dir"];
            else rd.fail("outputs.dir", "must be a string");
        }
    }

    if (problems.empty()) {
        try {
            const auto p = c.device();
            p.validate();
            const double gap = c.gap();
            if (std::isfinite(c.window_ns) && gap < c.window_ns) {
                rd.fail("schedule", "pulse gap " + std::to_string(gap) + " ns is shorter than device.window_ns");
            }
        } catch (const Error& e) {
            rd.fail("device", e.what());
        }
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return c;
}

inline json config_to_json(const ScenarioConfig& c) {
    json d = {{"g_ground", c.g_ground},
              {"g_excited", c.g_excited},
              {"t2_ground_ns", detail::time_to_json(c.t2_ground_ns)},
              {"t2_excited_ns", detail::time_to_json(c.t2_excited_ns)},
              {"t_rad_ns", c.t_rad_ns},
              {"window_ns", detail::time_to_json(c.window_ns)},
              {"p0", c.p0}};
    if (c.b_field_mT) d["b_field_mT"] = *c.b_field_mT;
    if (c.polarization.jones_rl) {
        const auto& v = *c.polarization.jones_rl;
        d["pulse_polarization"] = {{"jones_rl", {{v[0].real(), v[0].imag()}, {v[1].real(), v[1].imag()}}}};
    } else {
        d["pulse_polarization"] = {{"linear_angle_deg", c.polarization.linear_angle_deg.value_or(0.0)}};
    }
    json s = {{"mode", c.schedule_mode == ScheduleMode::kFixed ? "fixed" : "quarter_period"}};
    if (c.t12_ns) s["t12_ns"] = *c.t12_ns;
    return {{"scenario", c.scenario},
            {"device", d},
            {"schedule", s},
            {"simulation",
             {{"k_max", c.k_max},
              {"overhauser_nodes", c.overhauser_nodes},
              {"emission_quadrature_steps", c.emission_quadrature_steps},
              {"dephasing_model", c.dephasing == trion::DephasingModel::kMarkovian ? "markovian" : "quasi_static"}}},
            {"sweep", {{"epsilons", c.epsilons}}},
            {"seed", c.seed},
            {"outputs", {{"dir", c.output_dir}}}};
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ScenarioConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("$: invalid JSON (") + e.what() + ")"});
    }
    return config_from_json(j);
}

/// Git blob id: SHA-1 of "blob <size>\0" followed by the bytes.
inline std::string git_blob_hash(const std::string& bytes) {
    const std::string data = "blob " + std::to_string(bytes.size()) + std::string(1, '\0') + bytes;
    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
    std::string hex;
    char buf[3];
    for (unsigned char b : digest) {
        std::snprintf(buf, sizeof buf, "%02x", b);
        hex += buf;
    }
    return hex;
}

// ---------------------------------------------------------------------------
// Output files
// ---------------------------------------------------------------------------

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

inline const char* kFidelityCurveHeader = "scenario,total_qubits,fidelity,params_hash";
inline const char* kTruthTableHeader = "mode,basis2,basis3,outcome2,outcome3,probability";
inline const char* kCaptureHeader = "total_qubits,cycle_capture,herald_probability";
inline const char* kBandHeader = "epsilon,total_qubits,fidelity";

inline std::string fidelity_curves_csv(const std::vector<protocol::FidelityCurve>& curves) {
    std::string s = std::string(kFidelityCurveHeader) + "\n";
    for (const auto& c : curves)
        for (const auto& e : c.entries)
            s += c.scenario + "," + std::to_string(e.total_qubits) + "," + fmt(e.fidelity) + "," + e.params_hash + "\n";
    return s;
}

inline const char* mode_name(protocol::TruthTableMode m) {
    return m == protocol::TruthTableMode::kT23EqualsT12 ? "t23=t12" : "t23=2t12";
}

inline std::string truth_tables_csv(const std::vector<std::pair<protocol::TruthTableMode, protocol::TruthTable>>& ts) {
    std::string s = std::string(kTruthTableHeader) + "\n";
    for (const auto& [mode, t] : ts)
        for (int o3 = 0; o3 < 2; ++o3)
            for (int o2 = 0; o2 < 2; ++o2)
                s += std::string(mode_name(mode)) + "," + protocol::basis_name(t.basis2) + "," +
                     protocol::basis_name(t.basis3) + "," + protocol::outcome_name(t.basis2, o2) + "," +
                     protocol::outcome_name(t.basis3, o3) + "," + fmt(t.p(o2, o3)) + "\n";
    return s;
}

inline std::string band_csv(const std::vector<double>& epsilons, const std::vector<protocol::FidelityCurve>& curves) {
    std::string s = std::string(kBandHeader) + "\n";
    for (std::size_t i = 0; i < curves.size(); ++i)
        for (const auto& e : curves[i].entries)
            s += fmt(epsilons[i]) + "," + std::to_string(e.total_qubits) + "," + fmt(e.fidelity) + "\n";
    return s;
}

}  // namespace qdcluster::scenario
