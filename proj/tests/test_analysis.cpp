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

#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "qdcluster/analysis.hpp"

using namespace qdcluster;
using namespace qdcluster::analysis;
using Catch::Approx;
using protocol::Basis;

namespace {

TimeSeries synthetic(double p0, double t2, double f, double t_max, double dt) {
    DcpFit truth;
    truth.p0 = p0;
    truth.t2_star = t2;
    truth.f_l = f;
    TimeSeries s;
    for (double t = 0.0; t <= t_max + 1e-12; t += dt) {
        s.times.push_back(t);
        s.values.push_back(truth.model(t));
    }
    return s;
}

CoincidenceCounts counts(Basis b2, long long n00, long long n01, long long n10, long long n11) {
    CoincidenceCounts c{b2, Basis::kRL, {}};
    c.counts = {{{n00, n01}, {n10, n11}}};
    return c;
}

// Measured tables scaled x100, indexed [outcome2][outcome3] with outcome3 R, L.
CoincidenceCounts measured_circular() { return counts(Basis::kRL, 5, 82, 95, 18); }
CoincidenceCounts measured_linear() { return counts(Basis::kHV, 28, 68, 72, 32); }

TruthTable table(Basis b2, double p00, double p01) {
    TruthTable t{b2, Basis::kRL, {}, std::nullopt};
    t.probability = {{{p00, p01}, {1.0 - p00, 1.0 - p01}}};
    return t;
}

}  // namespace

TEST_CASE("simulated DCP traces", "[analysis]") {
    DeviceParams p;
    SECTION("zero field freezes the spin") {
        p.t2_excited = trion::kInf;
        const auto s = simulate_dcp(p, 0.0, 5.0, 0.05);
        for (double v : s.values) REQUIRE(v == Approx(1.0).margin(1e-12));
    }
    SECTION("oscillation frequency is the Larmor frequency") {
        p.g_excited = 0.229;
        p.t2_excited = trion::kInf;
        const auto s = simulate_dcp(p, 0.5, 20.0, 0.01);
        REQUIRE(dominant_frequency(s) == Approx(1.603).margin(1e-3));
        REQUIRE(dominant_frequency(s) == Approx(trion::larmor_frequency(0.229, 0.5)).margin(1e-3));
    }
    SECTION("Gaussian envelope") {
        p.g_excited = 0.229;
        p.t2_excited = 4.8;
        const double f = trion::larmor_frequency(0.229, 0.5);
        const auto s = simulate_dcp(p, 0.5, 5.0, 0.005);
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double t = s.times[i];
            const double expected = std::exp(-(t / 4.8) * (t / 4.8)) * std::cos(2.0 * std::numbers::pi * f * t);
            REQUIRE(s.values[i] == Approx(expected).margin(1e-3));
        }
    }
    REQUIRE_THROWS_AS(simulate_dcp(p, 0.1, 1.0, 0.0), Error);
}

TEST_CASE("DCP fit recovers noiseless parameters", "[analysis]") {
    const auto s = synthetic(0.9, 4.8, 1.6, 10.0, 0.01);
    const auto fit = fit_dcp(s);
    REQUIRE(fit.p0 == Approx(0.9).epsilon(1e-6));
    REQUIRE(fit.t2_star == Approx(4.8).epsilon(1e-6));
    REQUIRE(fit.f_l == Approx(1.6).epsilon(1e-6));
    REQUIRE(fit.residual_rms < 1e-8);
}

TEST_CASE("DCP fit with the frequency fixed at zero", "[analysis]") {
    const auto s = synthetic(0.7, 2.5, 0.0, 6.0, 0.02);
    DcpFit init;
    init.p0 = 0.5;
    init.t2_star = 1.0;
    init.f_l = 0.0;
    FitOptions opts;
    opts.fix_frequency = true;
    const auto fit = fit_dcp(s, init, opts);
    REQUIRE(fit.p0 == Approx(0.7).epsilon(1e-6));
    REQUIRE(fit.t2_star == Approx(2.5).epsilon(1e-6));
    REQUIRE(fit.f_l == 0.0);
}

TEST_CASE("DCP fit errors are calibrated", "[analysis][property]") {
    const auto clean = synthetic(0.9, 4.8, 1.6, 10.0, 0.02);
    int covered = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::mt19937_64 rng(1000 + trial);
        std::normal_distribution<double> noise(0.0, 0.02);
        auto s = clean;
        for (double& v : s.values) v += noise(rng);
        const auto fit = fit_dcp(s);
        const bool ok = std::abs(fit.p0 - 0.9) <= 3.0 * fit.p0_err() &&
                        std::abs(fit.t2_star - 4.8) <= 3.0 * fit.t2_err() &&
                        std::abs(fit.f_l - 1.6) <= 3.0 * fit.f_err();
        covered += ok;
    }
    REQUIRE(covered >= 95);
}

TEST_CASE("DCP fit rejects short series", "[analysis]") {
    TimeSeries s{{0.0}, {1.0}, {}};
    REQUIRE_THROWS_AS(fit_dcp(s), Error);
    TimeSeries bad{{0.0, 0.0, 1.0}, {1.0, 1.0, 1.0}, {}};
    REQUIRE_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("simulated traces close the loop with the fit", "[analysis]") {
    DeviceParams p;
    p.g_excited = 0.229;
    p.t2_excited = 4.8;
    for (double b : {0.1, 0.25, 0.5}) {
        const auto s = simulate_dcp(p, b, 10.0, 0.01);
        const auto fit = fit_dcp(s);
        const double f = trion::larmor_frequency(0.229, b);
        REQUIRE(std::abs(fit.f_l - f) <= 0.005 * f);
    }
}

TEST_CASE("g-factor regression", "[analysis]") {
    std::vector<LarmorPoint> exact;
    for (double b : {0.1, 0.2, 0.3, 0.4, 0.5}) exact.push_back({b, trion::larmor_frequency(0.096, b), 0.0});
    REQUIRE(fit_gfactor(exact).g == Approx(0.096).margin(1e-10));

    REQUIRE(fit_gfactor({{0.5, 1.603, 0.0}}).g == Approx(0.229).margin(1e-3));

    std::vector<LarmorPoint> noisy{{0.1, 0.33, 0.0}, {0.3, 0.95, 0.0}, {0.5, 1.62, 0.0}};
    const auto unweighted = fit_gfactor(noisy);
    for (auto& pt : noisy) pt.f_err = 0.01;  // equal errors weight every point the same
    REQUIRE(fit_gfactor(noisy).g == Approx(unweighted.g).margin(1e-12));
    REQUIRE(fit_gfactor(noisy).g_err > 0.0);

    REQUIRE_THROWS_AS(fit_gfactor({}), Error);
    REQUIRE_THROWS_AS(fit_gfactor({{0.0, 0.0, 0.0}, {0.0, 0.1, 0.0}}), Error);
}

TEST_CASE("conditional probabilities from counts", "[analysis]") {
    const auto t = conditional_probs(measured_linear());
    REQUIRE(t.at("V", "L") == Approx(0.32));
    REQUIRE(t.at("V", "R") == Approx(0.72));
    REQUIRE(t.at("H", "L") == Approx(0.68));
    REQUIRE(t.at("H", "R") == Approx(0.28));
    REQUIRE(t.error_at("V", "R") == Approx(std::sqrt(0.72 * 0.28 / 100.0)));
    for (int o3 = 0; o3 < 2; ++o3) REQUIRE(t.p(0, o3) + t.p(1, o3) == 1.0);

    const auto one = conditional_probs(counts(Basis::kRL, 0, 7, 9, 0));
    REQUIRE(one.at("L", "R") == 1.0);
    REQUIRE(one.at("R", "L") == 1.0);

    REQUIRE_THROWS_AS(conditional_probs(counts(Basis::kRL, 0, 3, 0, 4)), Error);
    REQUIRE_THROWS_AS(conditional_probs(counts(Basis::kRL, -1, 3, 2, 4)), Error);
}

TEST_CASE("fidelity bounds on the measured tables", "[analysis]") {
    const auto rep = fidelity_bounds(conditional_probs(measured_circular()), conditional_probs(measured_linear()));
    REQUIRE(rep.f1.value == Approx(0.790).margin(5e-4));
    REQUIRE(rep.f2.value == Approx(0.400).margin(5e-4));
    REQUIRE(rep.f_sp.value == Approx(0.595).margin(5e-4));
    REQUIRE(rep.eta.value == Approx(0.885).margin(5e-4));
    REQUIRE(rep.f_spp.value == Approx(0.527).margin(5e-4));
    REQUIRE(rep.f_sp.value == 0.5 * (rep.f1.value + rep.f2.value));
    REQUIRE(rep.f_spp.value == rep.f_sp.value * rep.eta.value);
    for (const auto* e : {&rep.f1, &rep.f2, &rep.f_sp, &rep.eta, &rep.f_spp}) REQUIRE(e->error > 0.0);
}

TEST_CASE("fidelity bounds of the ideal tables are one", "[analysis]") {
    const auto rep = fidelity_bounds(table(Basis::kRL, 0.0, 1.0), table(Basis::kHV, 0.0, 1.0));
    for (const auto* e : {&rep.f1, &rep.f2, &rep.f_sp, &rep.eta, &rep.f_spp}) REQUIRE(e->value == Approx(1.0));
}

TEST_CASE("fidelity bounds are monotone in the correct outcomes", "[analysis][property]") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        // Correct outcomes: L2|R3 and R2|L3 (circular), V2|R3 and H2|L3 (linear).
        double c_lr = u(rng), c_rl = u(rng), l_vr = u(rng), l_hl = u(rng);
        auto f_sp = [](double lr, double rl, double vr, double hl) {
            return fidelity_bounds(table(Basis::kRL, 1.0 - lr, rl), table(Basis::kHV, 1.0 - vr, hl)).f_sp.value;
        };
        const double base = f_sp(c_lr, c_rl, l_vr, l_hl);
        const double d = 0.5 * u(rng);
        REQUIRE(f_sp(c_lr * (1 - d), c_rl, l_vr, l_hl) <= base + 1e-12);
        REQUIRE(f_sp(c_lr, c_rl * (1 - d), l_vr, l_hl) <= base + 1e-12);
        REQUIRE(f_sp(c_lr, c_rl, l_vr * (1 - d), l_hl) <= base + 1e-12);
        REQUIRE(f_sp(c_lr, c_rl, l_vr, l_hl * (1 - d)) <= base + 1e-12);
    }
}

TEST_CASE("fidelity bounds reject mismatched bases", "[analysis]") {
    const auto circ = table(Basis::kRL, 0.05, 0.82);
    const auto lin = table(Basis::kHV, 0.28, 0.68);
    REQUIRE_THROWS_AS(fidelity_bounds(lin, lin), Error);
    REQUIRE_THROWS_AS(fidelity_bounds(circ, circ), Error);
    REQUIRE_NOTHROW(fidelity_bounds(circ, lin));
}

TEST_CASE("Monte Carlo fidelity errors", "[analysis]") {
    const auto a = fidelity_bounds_mc(measured_circular(), measured_linear(), 2000, 7);
    const auto b = fidelity_bounds_mc(measured_circular(), measured_linear(), 2000, 7);
    REQUIRE(a.f_sp.value == Approx(0.595).margin(5e-4));
    REQUIRE(a.f_sp.error == b.f_sp.error);
    const auto delta = fidelity_bounds(conditional_probs(measured_circular()), conditional_probs(measured_linear()));
    REQUIRE(a.f2.error == Approx(delta.f2.error).epsilon(0.15));
}

TEST_CASE("CSV readers", "[analysis]") {
    std::istringstream ts("time_ns,dcp,err\n0,1,0.1\n0.5, 0.5 ,0.1\n");
    const auto s = read_time_series(ts);
    REQUIRE(s.size() == 2);
    REQUIRE(s.values[1] == 0.5);
    REQUIRE(s.errors.size() == 2);

    std::istringstream lp("b_tesla,f_ghz\n0.5,1.603\n");
    REQUIRE(read_larmor_points(lp).front().f == 1.603);

    std::istringstream bad("time_ns,dcp\n0,abc\n");
    try {
        read_time_series(bad);
        FAIL("expected an error");
    } catch (const Error& e) {
        REQUIRE(e.kind() == ErrorKind::kIo);
    }

    std::ifstream in(std::string(QDCLUSTER_TEST_DATA) + "/measured_counts.csv");
    REQUIRE(in.good());
    const auto tables = read_counts(in);
    REQUIRE(tables.size() == 2);
    const auto& circ = tables[0].basis2 == Basis::kRL ? tables[0] : tables[1];
    const auto& lin = tables[0].basis2 == Basis::kRL ? tables[1] : tables[0];
    const auto rep = fidelity_bounds(conditional_probs(circ), conditional_probs(lin));
    REQUIRE(rep.f_spp.value == Approx(0.527).margin(5e-4));
}
