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

// Data-side analysis: time-resolved DCP traces and their fits, g-factor
// regression, conditional probabilities from coincidence counts and the
// entanglement fidelity bounds built from two truth tables.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdcluster/error.hpp"
#include "qdcluster/protocol.hpp"
#include "qdcluster/trion.hpp"

namespace qdcluster::analysis {

using protocol::Basis;
using protocol::TruthTable;
using trion::DeviceParams;

// ---------------------------------------------------------------------------
// Time series
// ---------------------------------------------------------------------------

struct TimeSeries {
    std::vector<double> times;   // ns
    std::vector<double> values;
    std::vector<double> errors;  // empty or one per sample

    std::size_t size() const noexcept { return times.size(); }

    void validate() const {
        if (values.size() != times.size()) throw Error(ErrorKind::kDimensionMismatch, "times and values differ in length");
        if (!errors.empty() && errors.size() != times.size()) {
            throw Error(ErrorKind::kDimensionMismatch, "errors and times differ in length");
        }
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!std::isfinite(times[i]) || !std::isfinite(values[i])) {
                throw Error(ErrorKind::kInvalidArgument, "sample " + std::to_string(i) + " is not finite");
            }
            if (i > 0 && !(times[i] > times[i - 1])) {
                throw Error(ErrorKind::kInvalidArgument, "times must be strictly increasing");
            }
        }
    }
};

/// DCP trace after an R pulse prepares the trion with its unpaired spin up.
/// The unpaired spin (g_excited, t2_excited of p) precesses in field b
/// with a quasi-static Gaussian bath; I_R and I_L are the populations that
/// decay through T_up and T_down. The radiative decay cancels in the ratio.
inline TimeSeries simulate_dcp(const DeviceParams& p, double b, double t_max, double dt, int overhauser_nodes = 32) {
    if (!(dt > 0.0)) throw Error(ErrorKind::kInvalidArgument, "dt must be > 0");
    if (!(t_max >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "t_max must be >= 0");
    const double f = trion::larmor_frequency(p.g_excited, b);
    const auto grid = std::isinf(p.t2_excited) ? trion::OverhauserGrid{{0.0}, {1.0}}
                                               : trion::sample_overhauser(p.t2_excited, overhauser_nodes);
    // R pulse on a spin-up hole: |up> -> |T_up>.
    DeviceParams pulse = p;
    pulse.pulse_polarization = trion::JonesVector::right();
    const auto excite = trion::excitation_map(pulse);
    qmath::ComplexMatrix rho = qmath::ComplexMatrix::Zero(4, 4);
    rho(trion::kUp, trion::kUp) = 1.0;
    rho = excite.apply(rho);
    const qmath::ComplexMatrix trion_block = rho.bottomRightCorner(2, 2);

    TimeSeries s;
    const auto n = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = dt * static_cast<double>(i);
        double ir = 0.0, il = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const auto u = trion::doublet_unitary({f, grid.detunings[j], 0.0}, t);
            const qmath::ComplexMatrix r = u * trion_block * u.adjoint();
            ir += grid.weights[j] * r(0, 0).real();
            il += grid.weights[j] * r(1, 1).real();
        }
        s.times.push_back(t);
        s.values.push_back(p.p0 * (ir - il) / (ir + il));
    }
    return s;
}

/// Frequency (GHz) of the largest discrete-time Fourier magnitude, scanned
/// up to the Nyquist frequency of the mean sample spacing and refined by
/// golden-section search.
inline double dominant_frequency(const TimeSeries& s) {
    s.validate();
    if (s.size() < 3) throw Error(ErrorKind::kInvalidArgument, "need at least 3 samples for a spectrum");
    const double span = s.times.back() - s.times.front();
    const double nyquist = 0.5 * static_cast<double>(s.size() - 1) / span;
    auto power = [&](double f) {
        double c = 0.0, sn = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double ph = 2.0 * std::numbers::pi * f * s.times[i];
            c += s.values[i] * std::cos(ph);
            sn += s.values[i] * std::sin(ph);
        }
        return c * c + sn * sn;
    };
    const double step = 1.0 / (8.0 * span);
    double best_f = 0.0, best_p = -1.0;
    for (double f = 0.0; f <= nyquist; f += step) {
        const double pw = power(f);
        if (pw > best_p) best_p = pw, best_f = f;
    }
    double lo = std::max(0.0, best_f - step), hi = best_f + step;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
        const double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
        if (power(a) > power(b)) hi = b;
        else lo = a;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// DCP fit
// ---------------------------------------------------------------------------

struct DcpFit {
    double p0 = 1.0;
    double t2_star = 1.0;  // ns
    double f_l = 0.0;      // GHz
    double residual_rms = 0.0;
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
    int iterations = 0;

    double model(double t) const {
        return p0 * std::exp(-(t / t2_star) * (t / t2_star)) * std::cos(2.0 * std::numbers::pi * f_l * t);
    }
    double p0_err() const { return std::sqrt(covariance(0, 0)); }
    double t2_err() const { return std::sqrt(covariance(1, 1)); }
    double f_err() const { return std::sqrt(covariance(2, 2)); }
};

/// Raised when the fit stops without meeting the step criterion.
class FitError : public Error {
   public:
    FitError(const std::string& msg, DcpFit last) : Error(ErrorKind::kNonConvergence, msg), last_(last) {}
    const DcpFit& last_iterate() const noexcept { return last_; }

   private:
    DcpFit last_;
};

struct FitOptions {
    bool fix_frequency = false;
    int max_iterations = 200;
    double step_tolerance = 1e-8;
};

/// Starting point: P0 from the first sample, f from the spectral peak and T2*
/// from the first time the envelope falls below P0 e^-2.
inline DcpFit guess_dcp(const TimeSeries& s) {
    s.validate();
    if (s.size() < 2) throw Error(ErrorKind::kInvalidArgument, "need at least 2 samples");
    DcpFit g;
    g.p0 = std::clamp(std::abs(s.values.front()), 1e-3, 1.0);
    g.f_l = dominant_frequency(s);
    const double span = s.times.back() - s.times.front();
    const double period = g.f_l > 0.0 ? 1.0 / g.f_l : 0.0;
    const double threshold = g.p0 * std::exp(-2.0);
    g.t2_star = span;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double env = 0.0;
        bool any = false;
        for (std::size_t j = i; j < s.size() && s.times[j] <= s.times[i] + period; ++j) {
            if (std::abs(s.values[j]) > 1.0 + 1e-9) continue;
            env = std::max(env, std::abs(s.values[j]));
            any = true;
        }
        if (any && env < threshold) {
            g.t2_star = std::max(s.times[i] / std::numbers::sqrt2, 1e-6);
            break;
        }
    }
    return g;
}

/// Levenberg-Marquardt fit of P0 e^{-(t/T2*)^2} cos(2 pi f t). Points are
/// weighted by 1/err^2 when errors are present.
inline DcpFit fit_dcp(const TimeSeries& s, const DcpFit& initial, const FitOptions& opts = {}) {
    s.validate();
    if (s.size() < 10) throw Error(ErrorKind::kInvalidArgument, "fit_dcp needs at least 10 samples");
    const int np = opts.fix_frequency ? 2 : 3;
    const auto n = static_cast<Eigen::Index>(s.size());
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    if (!s.errors.empty())
        for (Eigen::Index i = 0; i < n; ++i) {
            const double e = s.errors[static_cast<std::size_t>(i)];
            if (!(e > 0.0)) throw Error(ErrorKind::kInvalidArgument, "errors must be > 0");
            w(i) = 1.0 / (e * e);
        }

    Eigen::Vector3d theta(initial.p0, initial.t2_star, initial.f_l);
    auto residuals = [&](const Eigen::Vector3d& th, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
        r.resize(n);
        if (jac) jac->resize(n, np);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double t = s.times[static_cast<std::size_t>(i)];
            const double x = t / th(1);
            const double e = std::exp(-x * x);
            const double ph = 2.0 * std::numbers::pi * th(2) * t;
            const double c = std::cos(ph);
            r(i) = th(0) * e * c - s.values[static_cast<std::size_t>(i)];
            if (jac) {
                (*jac)(i, 0) = e * c;
                (*jac)(i, 1) = th(0) * e * c * 2.0 * x * x / th(1);
                if (np == 3) (*jac)(i, 2) = -th(0) * e * std::sin(ph) * 2.0 * std::numbers::pi * t;
            }
        }
    };
    auto cost = [&](const Eigen::VectorXd& r) { return (w.array() * r.array().square()).sum(); };

    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    residuals(theta, r, &jac);
    double chi2 = cost(r);
    double lambda = 1e-3;
    bool converged = false;
    int it = 0;
    for (; it < opts.max_iterations && !converged; ++it) {
        const Eigen::MatrixXd jtw = jac.transpose() * w.asDiagonal();
        const Eigen::MatrixXd a = jtw * jac;
        const Eigen::VectorXd g = jtw * r;
        bool accepted = false;
        for (int tries = 0; tries < 60 && !accepted; ++tries) {
            Eigen::MatrixXd damped = a;
            for (int d = 0; d < np; ++d) damped(d, d) += lambda * std::max(a(d, d), 1e-300);
            const Eigen::VectorXd step = damped.ldlt().solve(-g);
            Eigen::Vector3d trial = theta;
            trial.head(np) += step;
            if (!(trial(1) > 0.0) || !trial.allFinite()) {
                lambda *= 10.0;
                continue;
            }
            Eigen::VectorXd rt;
            residuals(trial, rt, nullptr);
            const double c = cost(rt);
            if (c <= chi2) {
                double rel = 0.0;
                for (int d = 0; d < np; ++d) rel = std::max(rel, std::abs(step(d)) / std::max(std::abs(trial(d)), 1e-12));
                theta = trial;
                chi2 = c;
                residuals(theta, r, &jac);
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                converged = rel < opts.step_tolerance;
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted) converged = true;  // no downhill step left: at a minimum within precision
    }

    if (!theta.allFinite() || !std::isfinite(chi2)) throw Error(ErrorKind::kNumerical, "fit_dcp diverged");
    if (std::abs(theta(0)) < 1e-12) {
        throw Error(ErrorKind::kNumerical, "fit_dcp collapsed to zero amplitude; the trace carries no signal");
    }

    DcpFit fit;
    fit.p0 = theta(0);
    fit.t2_star = theta(1);
    fit.f_l = theta(2);
    fit.iterations = it;
    fit.residual_rms = std::sqrt(r.squaredNorm() / static_cast<double>(n));
    const Eigen::MatrixXd a = jac.transpose() * w.asDiagonal() * jac;
    const double dof = std::max<double>(1.0, static_cast<double>(n - np));
    const double scale = s.errors.empty() ? chi2 / dof : 1.0;
    const Eigen::MatrixXd cov = scale * a.completeOrthogonalDecomposition().pseudoInverse();
    fit.covariance.topLeftCorner(np, np) = cov;
    if (!converged) {
        throw FitError("fit_dcp did not converge in " + std::to_string(opts.max_iterations) +
                           " iterations (rms residual " + std::to_string(fit.residual_rms) + ")",
                       fit);
    }
    fit.f_l = std::abs(fit.f_l);  // the model is even in f
    return fit;
}

inline DcpFit fit_dcp(const TimeSeries& s, const FitOptions& opts = {}) {
    DcpFit g = guess_dcp(s);
    if (opts.fix_frequency) g.f_l = 0.0;
    return fit_dcp(s, g, opts);
}

// ---------------------------------------------------------------------------
// g-factor
// ---------------------------------------------------------------------------

struct LarmorPoint {
    double b = 0.0;      // T
    double f = 0.0;      // GHz
    double f_err = 0.0;  // GHz, 0 = unweighted
};

struct GFactor {
    double g = 0.0;
    double g_err = 0.0;
};

/// Regression of f = (mu_B / h) g b through the origin, weighted by 1/err^2
/// when every point carries an error.
inline GFactor fit_gfactor(const std::vector<LarmorPoint>& points) {
    if (points.empty()) throw Error(ErrorKind::kInvalidArgument, "fit_gfactor needs at least one point");
    const bool weighted = std::all_of(points.begin(), points.end(), [](const auto& pt) { return pt.f_err > 0.0; });
    double sbb = 0.0, sbf = 0.0;
    for (const auto& pt : points) {
        if (pt.b < 0.0) throw Error(ErrorKind::kInvalidArgument, "negative field in g-factor data");
        const double w = weighted ? 1.0 / (pt.f_err * pt.f_err) : 1.0;
        sbb += w * pt.b * pt.b;
        sbf += w * pt.b * pt.f;
    }
    if (!(sbb > 0.0)) throw Error(ErrorKind::kInvalidArgument, "all fields are zero");
    const double per_tesla = trion::larmor_frequency(1.0, 1.0);  // GHz per unit g per tesla
    const double slope = sbf / sbb;
    double slope_err = 0.0;
    if (weighted) {
        slope_err = std::sqrt(1.0 / sbb);
    } else if (points.size() > 1) {
        double ssr = 0.0;
        for (const auto& pt : points) ssr += (pt.f - slope * pt.b) * (pt.f - slope * pt.b);
        slope_err = std::sqrt(ssr / static_cast<double>(points.size() - 1) / sbb);
    }
    return {slope / per_tesla, slope_err / per_tesla};
}

// ---------------------------------------------------------------------------
// Coincidences and fidelity bounds
// ---------------------------------------------------------------------------

/// Threefold coincidences with photon 1 = R, indexed [outcome2][outcome3].
struct CoincidenceCounts {
    Basis basis2 = Basis::kRL;
    Basis basis3 = Basis::kRL;
    std::array<std::array<long long, 2>, 2> counts{};
};

inline TruthTable conditional_probs(const CoincidenceCounts& c) {
    TruthTable t{c.basis2, c.basis3, {}, std::array<std::array<double, 2>, 2>{}};
    for (int o3 = 0; o3 < 2; ++o3) {
        if (c.counts[0][o3] < 0 || c.counts[1][o3] < 0) throw Error(ErrorKind::kInvalidArgument, "negative count");
        const long long col = c.counts[0][o3] + c.counts[1][o3];
        if (col <= 0) {
            throw Error(ErrorKind::kInvalidArgument,
                        std::string("no coincidences for photon 3 outcome ") + protocol::outcome_name(c.basis3, o3));
        }
        for (int o2 = 0; o2 < 2; ++o2) {
            const double pr = static_cast<double>(c.counts[o2][o3]) / static_cast<double>(col);
            t.probability[o2][o3] = pr;
            (*t.uncertainty)[o2][o3] = std::sqrt(pr * (1.0 - pr) / static_cast<double>(col));
        }
    }
    return t;
}

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

struct FidelityReport {
    Estimate f1, f2, f_sp, eta, f_spp;
};

namespace detail {

struct BoundInputs {
    double u;  // P(L2 | R3)
    double v;  // P(R2 | L3)
    double a;  // P(V2 | R3)
    double c;  // P(H2 | L3)
    double u_other, v_other, a_other, c_other;  // complementary entries of each column
};

inline BoundInputs bound_inputs(const TruthTable& circ, const TruthTable& lin) {
    if (circ.basis2 != Basis::kRL || circ.basis3 != Basis::kRL) {
        throw Error(ErrorKind::kInvalidArgument, "circular table must be RL (photon 2) x RL (photon 3)");
    }
    if (lin.basis2 != Basis::kHV || lin.basis3 != Basis::kRL) {
        throw Error(ErrorKind::kInvalidArgument, "linear table must be HV (photon 2) x RL (photon 3)");
    }
    return {circ.at("L", "R"), circ.at("R", "L"), lin.at("V", "R"), lin.at("H", "L"),
            circ.at("R", "R"), circ.at("L", "L"), lin.at("V", "L"), lin.at("H", "R")};
}

}  // namespace detail

/// Spin-photon fidelity bounds with photon 3 standing in for the spin
/// (R3 -> up, L3 -> down) and rho_{ab,ab} = P(a|b) / 2. Errors are first order
/// in the table uncertainties, one free probability per column.
inline FidelityReport fidelity_bounds(const TruthTable& circular, const TruthTable& linear) {
    const auto in = detail::bound_inputs(circular, linear);
    FidelityReport rep;
    const double cross = std::sqrt(std::max(0.0, in.u_other * in.v_other));
    rep.f1.value = 0.5 * in.u + 0.5 * in.v - cross;
    rep.f2.value = 0.5 * (in.a + in.c - in.a_other - in.c_other);
    rep.f_sp.value = 0.5 * (rep.f1.value + rep.f2.value);
    rep.eta.value = 0.5 * (in.u + in.v);
    rep.f_spp.value = rep.f_sp.value * rep.eta.value;

    // Gradients with respect to (u, v, a, c); complements move oppositely.
    const double su = circular.error_at("L", "R"), sv = circular.error_at("R", "L");
    const double sa = linear.error_at("V", "R"), sc = linear.error_at("H", "L");
    const double du_cross = cross > 0.0 ? 0.5 * in.v_other / cross : 0.0;
    const double dv_cross = cross > 0.0 ? 0.5 * in.u_other / cross : 0.0;
    const Eigen::Vector4d sig(su, sv, sa, sc);
    const Eigen::Vector4d g1(0.5 + du_cross, 0.5 + dv_cross, 0.0, 0.0);
    const Eigen::Vector4d g2(0.0, 0.0, 1.0, 1.0);
    const Eigen::Vector4d gsp = 0.5 * (g1 + g2);
    const Eigen::Vector4d geta(0.5, 0.5, 0.0, 0.0);
    const Eigen::Vector4d gspp = gsp * rep.eta.value + geta * rep.f_sp.value;
    auto err = [&](const Eigen::Vector4d& g) { return std::sqrt((g.cwiseProduct(sig)).squaredNorm()); };
    rep.f1.error = err(g1);
    rep.f2.error = err(g2);
    rep.f_sp.error = err(gsp);
    rep.eta.error = err(geta);
    rep.f_spp.error = err(gspp);
    return rep;
}

/// Monte Carlo alternative: columns are resampled binomially from the counts
/// and the spread of the recomputed values is reported. Central values are
/// those of the counts themselves.
inline FidelityReport fidelity_bounds_mc(const CoincidenceCounts& circular, const CoincidenceCounts& linear,
                                         int samples, std::uint64_t seed) {
    if (samples < 2) throw Error(ErrorKind::kInvalidArgument, "need at least 2 Monte Carlo samples");
    FidelityReport central = fidelity_bounds(conditional_probs(circular), conditional_probs(linear));
    std::mt19937_64 rng(seed);
    auto resample = [&](const CoincidenceCounts& c) {
        CoincidenceCounts out = c;
        for (int o3 = 0; o3 < 2; ++o3) {
            const long long n = c.counts[0][o3] + c.counts[1][o3];
            std::binomial_distribution<long long> dist(n, static_cast<double>(c.counts[0][o3]) / static_cast<double>(n));
            out.counts[0][o3] = dist(rng);
            out.counts[1][o3] = n - out.counts[0][o3];
        }
        return out;
    };
    std::array<double, 5> sum{}, sum2{};
    for (int i = 0; i < samples; ++i) {
        const auto a = resample(circular);
        const auto b = resample(linear);
        const auto r = fidelity_bounds(conditional_probs(a), conditional_probs(b));
        const std::array<double, 5> v{r.f1.value, r.f2.value, r.f_sp.value, r.eta.value, r.f_spp.value};
        for (int j = 0; j < 5; ++j) sum[j] += v[j], sum2[j] += v[j] * v[j];
    }
    std::array<Estimate*, 5> out{&central.f1, &central.f2, &central.f_sp, &central.eta, &central.f_spp};
    for (int j = 0; j < 5; ++j) {
        const double mean = sum[j] / samples;
        out[j]->error = std::sqrt(std::max(0.0, (sum2[j] - samples * mean * mean) / (samples - 1)));
    }
    return central;
}

// ---------------------------------------------------------------------------
// CSV input
// ---------------------------------------------------------------------------

namespace csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw Error(ErrorKind::kIo, "missing CSV column '" + name + "'");
    }
    bool has(const std::string& name) const { return std::find(header.begin(), header.end(), name) != header.end(); }
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

inline Table parse(std::istream& in) {
    Table t;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        if (t.header.empty()) {
            t.header = std::move(cells);
        } else {
            if (cells.size() != t.header.size()) {
                throw Error(ErrorKind::kIo, "CSV row " + std::to_string(t.rows.size() + 2) + " has " +
                                                std::to_string(cells.size()) + " cells, header has " +
                                                std::to_string(t.header.size()));
            }
            t.rows.push_back(std::move(cells));
        }
    }
    if (t.header.empty()) throw Error(ErrorKind::kIo, "empty CSV input");
    return t;
}

inline Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path + "'");
    return parse(in);
}

inline double number(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw Error(ErrorKind::kIo, "not a number: '" + s + "'");
    return v;
}

}  // namespace csv

/// Columns time_ns, dcp and optionally err.
inline TimeSeries read_time_series(std::istream& in) {
    const auto t = csv::parse(in);
    const auto ct = t.column("time_ns"), cv = t.column("dcp");
    const bool has_err = t.has("err");
    TimeSeries s;
    for (const auto& row : t.rows) {
        s.times.push_back(csv::number(row[ct]));
        s.values.push_back(csv::number(row[cv]));
        if (has_err) s.errors.push_back(csv::number(row[t.column("err")]));
    }
    s.validate();
    return s;
}

/// Columns b_tesla, f_ghz and optionally f_err_ghz.
inline std::vector<LarmorPoint> read_larmor_points(std::istream& in) {
    const auto t = csv::parse(in);
    const auto cb = t.column("b_tesla"), cf = t.column("f_ghz");
    const bool has_err = t.has("f_err_ghz");
    std::vector<LarmorPoint> pts;
    for (const auto& row : t.rows) {
        pts.push_back({csv::number(row[cb]), csv::number(row[cf]), has_err ? csv::number(row[t.column("f_err_ghz")]) : 0.0});
    }
    return pts;
}

/// Columns basis2, basis3, outcome2, outcome3, count; one table per basis pair,
/// in order of first appearance.
inline std::vector<CoincidenceCounts> read_counts(std::istream& in) {
    const auto t = csv::parse(in);
    const auto cb2 = t.column("basis2"), cb3 = t.column("basis3"), co2 = t.column("outcome2"),
               co3 = t.column("outcome3"), cc = t.column("count");
    std::vector<CoincidenceCounts> out;
    for (const auto& row : t.rows) {
        const Basis b2 = protocol::parse_basis(row[cb2]);
        const Basis b3 = protocol::parse_basis(row[cb3]);
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& c) { return c.basis2 == b2 && c.basis3 == b3; });
        if (it == out.end()) {
            out.push_back({b2, b3, {}});
            it = std::prev(out.end());
        }
        const double count = csv::number(row[cc]);
        if (count < 0.0 || count != std::floor(count)) throw Error(ErrorKind::kIo, "count must be a non-negative integer");
        it->counts[protocol::parse_outcome(b2, row[co2])][protocol::parse_outcome(b3, row[co3])] +=
            static_cast<long long>(count);
    }
    return out;
}

}  // namespace qdcluster::analysis
