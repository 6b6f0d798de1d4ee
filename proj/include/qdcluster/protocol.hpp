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

// Sequential photon emission: excitation, windowed emission and ground-state
// precession composed into repeated cycles.
//
// A cycle is stored as a 16x4 row-major superoperator taking a spin density
// matrix to a spin kron photon density matrix. Sequences start from a
// maximally mixed spin; the first photon is projected onto R (heralding
// |up>) and discarded, later photons are appended after the spin in emission
// order. The last emission of a sequence is not followed by precession.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qdcluster/error.hpp"
#include "qdcluster/qmath.hpp"
#include "qdcluster/trion.hpp"

namespace qdcluster::protocol {

using qmath::Complex;
using qmath::ComplexMatrix;
using qmath::ComplexVector;
using trion::DeviceParams;

inline constexpr int kMaxPhotons = 7;
inline constexpr double kDefaultT12 = 2.08;  // ns

// ---------------------------------------------------------------------------
// Schedules and bases
// ---------------------------------------------------------------------------

struct PulseSchedule {
    std::vector<double> pulse_times;  // ns

    static PulseSchedule from_gaps(const std::vector<double>& gaps) {
        PulseSchedule s{{0.0}};
        for (double g : gaps) s.pulse_times.push_back(s.pulse_times.back() + g);
        return s;
    }

    static PulseSchedule uniform(double gap, int n_pulses) {
        return from_gaps(std::vector<double>(static_cast<std::size_t>(std::max(0, n_pulses - 1)), gap));
    }

    std::vector<double> gaps() const {
        std::vector<double> g;
        for (std::size_t i = 1; i < pulse_times.size(); ++i) g.push_back(pulse_times[i] - pulse_times[i - 1]);
        return g;
    }

    void validate(double window) const {
        if (pulse_times.empty()) throw Error(ErrorKind::kInvalidArgument, "schedule has no pulses");
        for (double g : gaps()) {
            if (!(g > 0.0)) throw Error(ErrorKind::kInvalidArgument, "pulse times must be strictly increasing");
            if (std::isfinite(window) && g < window) {
                throw Error(ErrorKind::kInvalidArgument, "pulse gap shorter than the post-selection window");
            }
        }
    }
};

enum class Basis { kRL, kHV, kDA };

inline const char* basis_name(Basis b) {
    switch (b) {
        case Basis::kRL: return "RL";
        case Basis::kHV: return "HV";
        case Basis::kDA: return "DA";
    }
    return "?";
}

inline Basis parse_basis(const std::string& s) {
    if (s == "RL") return Basis::kRL;
    if (s == "HV") return Basis::kHV;
    if (s == "DA") return Basis::kDA;
    throw Error(ErrorKind::kUnknownLabel, "unknown measurement basis '" + s + "'");
}

inline const char* outcome_name(Basis b, int outcome) {
    static constexpr const char* kNames[3][2] = {{"R", "L"}, {"H", "V"}, {"D", "A"}};
    return kNames[static_cast<int>(b)][outcome ? 1 : 0];
}

inline int parse_outcome(Basis b, const std::string& s) {
    for (int o = 0; o < 2; ++o)
        if (s == outcome_name(b, o)) return o;
    throw Error(ErrorKind::kUnknownLabel, std::string("outcome '") + s + "' is not in basis " + basis_name(b));
}

/// Photon state for outcome 0 or 1 of a basis, in R/L components.
inline ComplexVector basis_vector(Basis b, int outcome) {
    const double h = 1.0 / std::numbers::sqrt2;
    const ComplexVector hv = (ComplexVector(2) << h, h).finished();
    const ComplexVector vv = (ComplexVector(2) << Complex(0, -h), Complex(0, h)).finished();
    ComplexVector v(2);
    switch (b) {
        case Basis::kRL:
            v << (outcome ? 0.0 : 1.0), (outcome ? 1.0 : 0.0);
            return v;
        case Basis::kHV: return outcome ? vv : hv;
        case Basis::kDA: return outcome ? ComplexVector(h * (hv - vv)) : ComplexVector(h * (hv + vv));
    }
    return v;
}

// ---------------------------------------------------------------------------
// Result types
// ---------------------------------------------------------------------------

/// P(photon 2 outcome | photon 3 outcome), indexed [o2][o3].
struct TruthTable {
    Basis basis2 = Basis::kRL;
    Basis basis3 = Basis::kRL;
    std::array<std::array<double, 2>, 2> probability{};
    std::optional<std::array<std::array<double, 2>, 2>> uncertainty;

    double p(int o2, int o3) const { return probability[o2][o3]; }

    /// P(o2 | o3) by outcome names, e.g. at("V", "L").
    double at(const std::string& o2, const std::string& o3) const {
        return probability[parse_outcome(basis2, o2)][parse_outcome(basis3, o3)];
    }
    double error_at(const std::string& o2, const std::string& o3) const {
        if (!uncertainty) return 0.0;
        return (*uncertainty)[parse_outcome(basis2, o2)][parse_outcome(basis3, o3)];
    }
};

enum class TruthTableMode { kT23EqualsT12, kT23EqualsTwiceT12 };

struct FidelityPoint {
    int total_qubits = 0;
    double fidelity = 0.0;
    std::string params_hash;
};

struct FidelityCurve {
    std::string scenario;
    std::vector<FidelityPoint> entries;
};

// ---------------------------------------------------------------------------
// Engine options
// ---------------------------------------------------------------------------

enum class EmissionMode { kWindowed, kInstantaneous };

struct EngineOptions {
    int emission_steps = 64;
    int overhauser_nodes = 32;
    trion::DephasingModel dephasing = trion::DephasingModel::kMarkovian;
    EmissionMode emission = EmissionMode::kWindowed;
    int jobs = 1;
};

/// Frozen bath detunings (rad/ns) for one shot.
struct BathNode {
    double ground = 0.0;
    double excited = 0.0;
};

/// 64-bit FNV-1a digest of the physical parameters, as 16 hex digits.
inline std::string params_hash(const DeviceParams& p) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g,%.17g,%.17g,%.17g|%.17g", p.g_ground,
                  p.g_excited, p.t2_ground, p.t2_excited, p.t_rad, p.b_field, p.window, p.pulse_polarization.r.real(),
                  p.pulse_polarization.r.imag(), p.pulse_polarization.l.real(), p.pulse_polarization.l.imag(), p.p0);
    std::uint64_t h = 1469598103934665603ULL;
    for (const char* c = buf; *c; ++c) {
        h ^= static_cast<unsigned char>(*c);
        h *= 1099511628211ULL;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

/// Baseline device with the field tuned so that t12 is a quarter hole period.
inline DeviceParams baseline_params(double t12 = kDefaultT12) {
    DeviceParams p;
    p.b_field = trion::quarter_period_field(p.g_ground, t12);
    return p;
}

/// Settings that generate the target state: no dephasing, frozen excited
/// spin, no window.
inline DeviceParams ideal_params(const DeviceParams& p) {
    DeviceParams q = p;
    q.t2_ground = trion::kInf;
    q.t2_excited = trion::kInf;
    q.g_excited = 0.0;
    q.window = trion::kInf;
    return q;
}

inline EngineOptions ideal_options(EngineOptions opts) {
    opts.emission = EmissionMode::kInstantaneous;
    opts.dephasing = trion::DephasingModel::kMarkovian;
    return opts;
}

namespace detail {

/// Runs fn(i) for i in [0, n) on up to jobs threads.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Applies a 4x4 spin superoperator to the spin factor of a (spin, photon)
/// superoperator column block X (16 x m).
inline ComplexMatrix apply_on_spin(const ComplexMatrix& spin_sup, const ComplexMatrix& x) {
    ComplexMatrix y = ComplexMatrix::Zero(16, x.cols());
    for (int a = 0; a < 2; ++a)
        for (int ap = 0; ap < 2; ++ap)
            for (int s = 0; s < 2; ++s)
                for (int sp = 0; sp < 2; ++sp) {
                    const Complex c = spin_sup(a * 2 + ap, s * 2 + sp);
                    if (c == Complex(0.0)) continue;
                    for (int ph = 0; ph < 2; ++ph)
                        for (int php = 0; php < 2; ++php)
                            y.row((a * 2 + ph) * 4 + ap * 2 + php) += c * x.row((s * 2 + ph) * 4 + sp * 2 + php);
                }
    return y;
}

/// out[(a,r,p),(a',r',p')] = sum S[(a p),(a' p')][(s, s')] rho[(s,r),(s',r')]
/// for rho on spin kron rest (rest of dimension d).
inline ComplexMatrix apply_cycle(const ComplexMatrix& sup, const ComplexMatrix& rho) {
    const Eigen::Index d = rho.rows() / 2;
    ComplexMatrix out = ComplexMatrix::Zero(4 * d, 4 * d);
    for (int s = 0; s < 2; ++s)
        for (int sp = 0; sp < 2; ++sp) {
            const auto block = rho.block(s * d, sp * d, d, d);
            for (int a = 0; a < 2; ++a)
                for (int p = 0; p < 2; ++p)
                    for (int ap = 0; ap < 2; ++ap)
                        for (int pp = 0; pp < 2; ++pp) {
                            const Complex c = sup((a * 2 + p) * 4 + ap * 2 + pp, s * 2 + sp);
                            if (c == Complex(0.0)) continue;
                            for (Eigen::Index r = 0; r < d; ++r)
                                for (Eigen::Index rp = 0; rp < d; ++rp)
                                    out((a * d + r) * 2 + p, (ap * d + rp) * 2 + pp) += c * block(r, rp);
                        }
        }
    return out;
}

inline std::vector<std::pair<BathNode, double>> bath_nodes(const DeviceParams& p, const EngineOptions& opts) {
    if (opts.dephasing == trion::DephasingModel::kMarkovian) return {{BathNode{}, 1.0}};
    auto grid_for = [&](double t2) {
        if (std::isinf(t2)) return trion::OverhauserGrid{{0.0}, {1.0}};
        return trion::sample_overhauser(t2, opts.overhauser_nodes);
    };
    const auto g = grid_for(p.t2_ground);
    const auto e = grid_for(p.t2_excited);
    std::vector<std::pair<BathNode, double>> nodes;
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < e.size(); ++j)
            nodes.push_back({{g.detunings[i], e.detunings[j]}, g.weights[i] * e.weights[j]});
    return nodes;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Cycle
// ---------------------------------------------------------------------------

inline trion::EmissionQuadrature cycle_quadrature(const DeviceParams& p, const EngineOptions& opts) {
    return opts.emission == EmissionMode::kInstantaneous ? trion::instantaneous_emission()
                                                         : trion::emission_quadrature(p, opts.emission_steps);
}

/// One excitation / emission / precession cycle as a 16x4 superoperator,
/// spin -> spin kron photon. For emission time tau the trion precesses for
/// tau, decays, and the ground spin precesses for gap - tau. Without trailing
/// precession the gap is ignored.
inline ComplexMatrix cycle_superoperator(const DeviceParams& p, double gap, const BathNode& node,
                                         const EngineOptions& opts, bool trailing = true) {
    p.validate();
    const auto q = cycle_quadrature(p, opts);
    if (trailing && !(gap >= q.times.back())) {
        throw Error(ErrorKind::kInvalidArgument, "cycle gap shorter than the emission window");
    }
    const auto [a, b] = trion::excitation_amplitudes(p.pulse_polarization);
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    const ComplexMatrix msup = qmath::kron(m, ComplexMatrix(m.conjugate()));
    const ComplexMatrix d = trion::decay_isometry();
    const ComplexMatrix dsup = qmath::kron(d, ComplexMatrix(d.conjugate()));
    const auto edyn = trion::excited_dynamics(p, opts.dephasing, node.excited);
    const auto gdyn = trion::ground_dynamics(p, opts.dephasing, node.ground);

    ComplexMatrix total = ComplexMatrix::Zero(16, 4);
    for (std::size_t j = 0; j < q.times.size(); ++j) {
        const double tau = q.times[j];
        ComplexMatrix x = dsup * (trion::doublet_superoperator(edyn, tau) * msup);
        if (trailing) x = detail::apply_on_spin(trion::doublet_superoperator(gdyn, gap - tau), x);
        total += q.weights[j] * x;
    }
    return total;
}

inline qmath::HilbertSpace spin_space() { return qmath::HilbertSpace::qubits({"spin"}); }

/// Cycle for one bath node as a trace-non-increasing channel spin -> (spin, photon).
inline qmath::QuantumChannel cycle_channel(const DeviceParams& p, double gap, const BathNode& node = {},
                                           const EngineOptions& opts = {}, bool trailing = true) {
    return qmath::QuantumChannel::from_superoperator(spin_space(), qmath::HilbertSpace::qubits({"spin", "photon"}),
                                                     cycle_superoperator(p, gap, node, opts, trailing),
                                                     qmath::TraceCondition::kNonIncreasing);
}

// ---------------------------------------------------------------------------
// Sequences
// ---------------------------------------------------------------------------

struct SequenceResult {
    qmath::DensityMatrix state;
    double herald_probability;  // P(every photon inside its window, photon 1 = R) from a mixed spin
};

namespace detail {

inline ComplexMatrix run_sequence(const DeviceParams& p, int k, const std::vector<double>& gaps, const BathNode& node,
                                  const EngineOptions& opts) {
    ComplexMatrix rho = 0.5 * qmath::identity(2);
    const ComplexMatrix first = apply_cycle(cycle_superoperator(p, k > 0 ? gaps[0] : 0.0, node, opts, k > 0), rho);
    for (int s = 0; s < 2; ++s)
        for (int sp = 0; sp < 2; ++sp) rho(s, sp) = first(s * 2, sp * 2);
    for (int i = 1; i <= k; ++i) {
        const bool trailing = i < k;
        rho = apply_cycle(cycle_superoperator(p, trailing ? gaps[static_cast<std::size_t>(i)] : 0.0, node, opts, trailing),
                          rho);
    }
    return rho;
}

}  // namespace detail

inline qmath::HilbertSpace sequence_space(int k) {
    std::vector<std::string> labels{"spin"};
    for (int i = 0; i < k; ++i) labels.push_back("photon" + std::to_string(i + 2));
    return qmath::HilbertSpace::qubits(labels);
}

/// Bath-averaged spin kron k photon state after heralding, renormalized once.
inline SequenceResult k_photon_state(const DeviceParams& p, int k, const PulseSchedule& schedule,
                                     const EngineOptions& opts = {}) {
    if (k < 0) throw Error(ErrorKind::kInvalidArgument, "k must be >= 0");
    if (k > kMaxPhotons) {
        throw Error(ErrorKind::kInvalidArgument,
                    "k = " + std::to_string(k) + " exceeds the memory budget (k <= " + std::to_string(kMaxPhotons) + ")");
    }
    p.validate();
    schedule.validate(p.window);
    const auto gaps = schedule.gaps();
    if (gaps.size() < static_cast<std::size_t>(k)) {
        throw Error(ErrorKind::kInvalidArgument, "schedule needs " + std::to_string(k + 1) + " pulses for k = " +
                                                     std::to_string(k));
    }
    const auto nodes = detail::bath_nodes(p, opts);
    std::vector<ComplexMatrix> partial(nodes.size());
    detail::parallel_for(nodes.size(), opts.jobs, [&](std::size_t i) {
        partial[i] = nodes[i].second * detail::run_sequence(p, k, gaps, nodes[i].first, opts);
    });
    ComplexMatrix acc = partial.front();
    for (std::size_t i = 1; i < partial.size(); ++i) acc += partial[i];
    acc = 0.5 * (acc + acc.adjoint());
    const double tr = acc.trace().real();
    if (!(tr > 0.0)) throw Error(ErrorKind::kNumerical, "post-selected sequence has zero probability");
    return {qmath::DensityMatrix(sequence_space(k), acc / tr), tr};
}

/// Pure target state of the ideal engine for the same schedule.
inline ComplexVector target_state(const DeviceParams& nominal, int k, const PulseSchedule& schedule,
                                  const EngineOptions& opts = {}) {
    const auto ideal = k_photon_state(ideal_params(nominal), k, schedule, ideal_options(opts));
    const double purity = ideal.state.purity();
    if (std::abs(purity - 1.0) > 1e-9) {
        throw Error(ErrorKind::kNumerical, "ideal target is not pure (purity " + std::to_string(purity) + ")");
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(ideal.state.matrix());
    ComplexVector psi = solver.eigenvectors().col(solver.eigenvalues().size() - 1);
    // Fix the global phase on the largest component for reproducible output.
    Eigen::Index imax = 0;
    psi.cwiseAbs().maxCoeff(&imax);
    psi *= std::polar(1.0, -std::arg(psi(imax)));
    return psi;
}

/// Fidelity of the state generated with actual against the ideal state of
/// nominal. Pulse timing follows schedule in both.
inline double cluster_fidelity(const DeviceParams& actual, const DeviceParams& nominal, int k,
                               const PulseSchedule& schedule, const EngineOptions& opts = {}) {
    const auto state = k_photon_state(actual, k, schedule, opts);
    return std::clamp(qmath::state_fidelity(state.state, target_state(nominal, k, schedule, opts)), 0.0, 1.0);
}

inline double cluster_fidelity(const DeviceParams& p, int k, const EngineOptions& opts = {}) {
    return cluster_fidelity(p, p, k, PulseSchedule::uniform(trion::ground_quarter_period(p), k + 1), opts);
}

inline FidelityCurve fidelity_curve(const std::string& scenario, const DeviceParams& actual,
                                    const DeviceParams& nominal, int k_max, double gap,
                                    const EngineOptions& opts = {}) {
    FidelityCurve curve{scenario, {}};
    const std::string hash = params_hash(actual);
    for (int k = 1; k <= k_max; ++k) {
        const double f = cluster_fidelity(actual, nominal, k, PulseSchedule::uniform(gap, k + 1), opts);
        curve.entries.push_back({k + 1, f, hash});
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Truth tables
// ---------------------------------------------------------------------------

/// Three-pulse measurement: photon 1 heralded R, photon 2 in HV (t23 = t12)
/// or RL (t23 = 2 t12), photon 3 in RL, spin discarded.
inline TruthTable truth_table(const DeviceParams& p, TruthTableMode mode, double t12, const EngineOptions& opts = {}) {
    const double t23 = mode == TruthTableMode::kT23EqualsT12 ? t12 : 2.0 * t12;
    const Basis b2 = mode == TruthTableMode::kT23EqualsT12 ? Basis::kHV : Basis::kRL;
    const auto seq = k_photon_state(p, 2, PulseSchedule::from_gaps({t12, t23}), opts);
    const auto photons = qmath::partial_trace(seq.state, {"photon2", "photon3"});
    TruthTable t{b2, Basis::kRL, {}, std::nullopt};
    std::array<std::array<double, 2>, 2> joint{};
    for (int o2 = 0; o2 < 2; ++o2)
        for (int o3 = 0; o3 < 2; ++o3) {
            const ComplexVector v = qmath::kron(basis_vector(b2, o2), basis_vector(Basis::kRL, o3));
            joint[o2][o3] = std::max(0.0, v.dot(photons.matrix() * v).real());
        }
    for (int o3 = 0; o3 < 2; ++o3) {
        const double col = joint[0][o3] + joint[1][o3];
        if (!(col > 0.0)) throw Error(ErrorKind::kNumerical, "photon 3 outcome has zero probability");
        for (int o2 = 0; o2 < 2; ++o2) t.probability[o2][o3] = joint[o2][o3] / col;
    }
    return t;
}

inline TruthTable truth_table(const DeviceParams& p, TruthTableMode mode, const EngineOptions& opts = {}) {
    return truth_table(p, mode, trion::ground_quarter_period(p), opts);
}

// ---------------------------------------------------------------------------
// Cycle PTM
// ---------------------------------------------------------------------------

/// Two-qubit PTM of one cycle on (spin, fresh photon). The fresh photon slot
/// enters in |R>; the |L> input is defined by flipping the emitted photon, so
/// the ideal cycle is a unitary. The map is divided by the capture
/// probability and averaged over bath nodes.
inline qmath::PauliTransferMatrix cycle_ptm(const DeviceParams& p, double gap, const EngineOptions& opts = {}) {
    const auto nodes = detail::bath_nodes(p, opts);
    const double capture = cycle_quadrature(p, opts).total_weight();
    const ComplexMatrix flip = qmath::kron(qmath::identity(2), qmath::sigma_x());
    std::vector<ComplexMatrix> kraus;
    for (const auto& [node, w] : nodes) {
        const auto ch = cycle_channel(p, gap, node, opts);
        for (const auto& k : ch.kraus()) {
            ComplexMatrix e(4, 4);
            for (int s = 0; s < 2; ++s) {
                e.col(s * 2 + 0) = k.col(s);
                e.col(s * 2 + 1) = flip * k.col(s);
            }
            kraus.push_back(std::sqrt(w / capture) * e);
        }
    }
    const auto space = qmath::HilbertSpace::qubits({"spin", "photon"});
    ComplexMatrix sum = ComplexMatrix::Zero(4, 4);
    for (const auto& k : kraus) sum += k.adjoint() * k;
    const bool tp = (sum - qmath::identity(4)).cwiseAbs().maxCoeff() <= qmath::kKrausTol;
    return qmath::channel_to_ptm(qmath::QuantumChannel(
        space, space, std::move(kraus), tp ? qmath::TraceCondition::kPreserving : qmath::TraceCondition::kNonIncreasing));
}

// ---------------------------------------------------------------------------
// Systematic errors
// ---------------------------------------------------------------------------

/// Simultaneous systematic error of relative size eps: pulse polarization
/// rotated by eps * 45 degrees, field scaled by (1 + eps), both T2* scaled by
/// (1 - eps).
inline DeviceParams perturbed(const DeviceParams& p, double eps) {
    if (!(eps >= 0.0 && eps < 1.0)) throw Error(ErrorKind::kInvalidArgument, "epsilon must lie in [0, 1)");
    DeviceParams q = p;
    q.pulse_polarization = p.pulse_polarization.rotated(eps * std::numbers::pi / 4.0);
    q.b_field = p.b_field * (1.0 + eps);
    q.t2_ground = p.t2_ground * (1.0 - eps);
    q.t2_excited = p.t2_excited * (1.0 - eps);
    return q;
}

inline constexpr const char* kEpsilonMapping = "polarization-rotation-45deg+field-scale+t2-scale/v1";

inline std::string epsilon_label(double eps) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "eps=%.6g", eps);
    return buf;
}

/// One fidelity curve per epsilon (total qubits 2 .. k_max + 1); target and
/// pulse timing stay at the nominal values.
inline std::vector<FidelityCurve> error_sweep(const DeviceParams& p, const std::vector<double>& epsilons, int k_max,
                                              double gap, const EngineOptions& opts = {}) {
    std::vector<FidelityCurve> curves(epsilons.size());
    EngineOptions inner = opts;
    inner.jobs = 1;
    detail::parallel_for(epsilons.size(), opts.jobs, [&](std::size_t i) {
        curves[i] = fidelity_curve(epsilon_label(epsilons[i]), perturbed(p, epsilons[i]), p, k_max, gap, inner);
    });
    return curves;
}

inline std::vector<FidelityCurve> error_sweep(const DeviceParams& p, const std::vector<double>& epsilons, int k_max,
                                              const EngineOptions& opts = {}) {
    return error_sweep(p, epsilons, k_max, trion::ground_quarter_period(p), opts);
}

/// True when every curve is pointwise <= the previous one (curves sorted by epsilon).
inline bool sweep_is_monotone(const std::vector<double>& epsilons, const std::vector<FidelityCurve>& curves,
                              double tol = 1e-12) {
    std::vector<std::size_t> order(epsilons.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return epsilons[a] < epsilons[b]; });
    for (std::size_t n = 1; n < order.size(); ++n) {
        const auto& lo = curves[order[n - 1]].entries;
        const auto& hi = curves[order[n]].entries;
        for (std::size_t j = 0; j < std::min(lo.size(), hi.size()); ++j)
            if (hi[j].fidelity > lo[j].fidelity + tol) return false;
    }
    return true;
}

}  // namespace qdcluster::protocol
