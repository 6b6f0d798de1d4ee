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

// Four-level model of a positively charged trion (X+): resident hole spin
// {up, down} and the trion doublet {T_up, T_down} whose unpaired carrier is
// an electron. Time is in ns, frequencies in GHz, angular frequencies and
// Hamiltonians in rad/ns (hbar = 1).
//
// Conventions:
//  - the in-plane (Voigt) field points along the y axis of the spin basis, so
//    both Zeeman Hamiltonians are (omega / 2) sigma_y and a quarter period of
//    ground precession maps |up> -> (|up> + |down>)/sqrt(2);
//  - photon qubit basis is circular, |R> = |0>, |L> = |1>, with
//    |H> = (|R> + |L>)/sqrt(2) and |V> = -i(|R> - |L>)/sqrt(2);
//  - selection rules T_up -> |up, R>, T_down -> |down, L>.

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "qdcluster/error.hpp"
#include "qdcluster/qmath.hpp"

namespace qdcluster::trion {

using qmath::Complex;
using qmath::ComplexMatrix;
using qmath::ComplexVector;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// CODATA-2018 values. Every numeric result in the project derives from these.
struct PhysicalConstants {
    static constexpr double kBohrMagneton = 9.2740100783e-24;  // J/T
    static constexpr double kPlanck = 6.62607015e-34;          // J s
    static constexpr double kReducedPlanck = kPlanck / (2.0 * std::numbers::pi);
};

/// Level indices of the four-level basis.
enum Level : int { kUp = 0, kDown = 1, kTrionUp = 2, kTrionDown = 3 };

inline qmath::HilbertSpace level_space() { return qmath::HilbertSpace({{"level", 4}}); }
inline qmath::HilbertSpace photon_space(const std::string& label = "photon") {
    return qmath::HilbertSpace({{label, 2}});
}

// ---------------------------------------------------------------------------
// Polarization
// ---------------------------------------------------------------------------

/// Jones vector in the circular (R, L) basis.
struct JonesVector {
    Complex r{1.0 / std::numbers::sqrt2, 0.0};
    Complex l{1.0 / std::numbers::sqrt2, 0.0};

    static JonesVector horizontal() { return {}; }
    static JonesVector vertical() {
        return {Complex(0, -1.0 / std::numbers::sqrt2), Complex(0, 1.0 / std::numbers::sqrt2)};
    }
    static JonesVector right() { return {1.0, 0.0}; }
    static JonesVector left() { return {0.0, 1.0}; }

    /// Linear polarization at angle theta (rad) from H towards V.
    static JonesVector linear(double theta) { return horizontal().rotated(theta); }

    /// Rotation of the polarization plane by theta: diag(e^{-i theta}, e^{i theta}) in the R/L basis.
    JonesVector rotated(double theta) const {
        return {r * std::polar(1.0, -theta), l * std::polar(1.0, theta)};
    }

    double norm() const { return std::sqrt(std::norm(r) + std::norm(l)); }
};

// ---------------------------------------------------------------------------
// Device parameters
// ---------------------------------------------------------------------------

struct DeviceParams {
    double g_ground = 0.229;      // resident hole
    double g_excited = 0.096;     // unpaired electron of the trion
    double t2_ground = 4.8;       // ns, kInf disables dephasing
    double t2_excited = 0.8;      // ns
    double t_rad = 0.8;           // ns
    double b_field = 0.04;        // T
    double window = 0.3;          // ns, kInf accepts every emission time
    JonesVector pulse_polarization = JonesVector::horizontal();
    double p0 = 1.0;

    void validate() const {
        auto require = [](bool ok, const char* field, const std::string& what) {
            if (!ok) throw Error(ErrorKind::kInvalidArgument, std::string(field) + ": " + what);
        };
        require(t2_ground > 0.0, "t2_ground", "must be > 0");
        require(t2_excited > 0.0, "t2_excited", "must be > 0");
        require(t_rad > 0.0 && std::isfinite(t_rad), "t_rad", "must be finite and > 0");
        require(window > 0.0, "window", "must be > 0");
        require(b_field >= 0.0 && std::isfinite(b_field), "b_field", "must be finite and >= 0");
        require(std::isfinite(g_ground) && std::isfinite(g_excited), "g", "g-factors must be finite");
        require(std::abs(pulse_polarization.norm() - 1.0) <= 1e-10, "pulse_polarization", "must have unit norm");
        require(p0 > 0.0 && p0 <= 1.0, "p0", "must lie in (0, 1]");
    }
};

inline double larmor_frequency(double g, double b_tesla) {
    if (b_tesla < 0.0) throw Error(ErrorKind::kInvalidArgument, "larmor_frequency: negative field");
    return g * PhysicalConstants::kBohrMagneton * b_tesla / PhysicalConstants::kPlanck * 1e-9;
}

/// Field (T) for which a spin with factor g completes a quarter turn in t_quarter ns.
inline double quarter_period_field(double g, double t_quarter) {
    if (!(g > 0.0) || !(t_quarter > 0.0)) {
        throw Error(ErrorKind::kInvalidArgument, "quarter_period_field needs g > 0 and t > 0");
    }
    return PhysicalConstants::kPlanck / (4.0 * g * PhysicalConstants::kBohrMagneton * t_quarter * 1e-9);
}

inline double ground_larmor(const DeviceParams& p) { return larmor_frequency(p.g_ground, p.b_field); }
inline double excited_larmor(const DeviceParams& p) { return larmor_frequency(p.g_excited, p.b_field); }

inline double ground_quarter_period(const DeviceParams& p) {
    const double f = ground_larmor(p);
    if (!(f > 0.0)) throw Error(ErrorKind::kInvalidArgument, "ground Larmor frequency is zero");
    return 0.25 / f;
}

/// Dephasing rate giving coherence decay e^{-t / t2}.
inline double dephasing_rate(double t2) { return std::isinf(t2) ? 0.0 : 1.0 / t2; }

// ---------------------------------------------------------------------------
// Hamiltonians and doublet propagators
// ---------------------------------------------------------------------------

struct ZeemanHamiltonians {
    ComplexMatrix ground;   // on {up, down}, rad/ns
    ComplexMatrix excited;  // on {T_up, T_down}, rad/ns
};

inline ZeemanHamiltonians build_hamiltonians(const DeviceParams& p) {
    const double wg = 2.0 * std::numbers::pi * ground_larmor(p);
    const double we = 2.0 * std::numbers::pi * excited_larmor(p);
    return {0.5 * wg * qmath::sigma_y(), 0.5 * we * qmath::sigma_y()};
}

/// Dynamics of one spin doublet: precession at 2 pi larmor + detuning
/// (rad/ns) about the field axis plus Markovian dephasing along the same axis
/// at the given rate.
struct DoubletDynamics {
    double larmor_ghz = 0.0;
    double detuning = 0.0;
    double rate = 0.0;

    double angular_frequency() const { return 2.0 * std::numbers::pi * larmor_ghz + detuning; }
};

inline ComplexMatrix doublet_unitary(const DoubletDynamics& dyn, double t) {
    const double half = 0.5 * dyn.angular_frequency() * t;
    ComplexMatrix u(2, 2);
    u << std::cos(half), -std::sin(half), std::sin(half), std::cos(half);
    return u;
}

/// 4x4 row-major superoperator of the doublet over duration t.
inline ComplexMatrix doublet_superoperator(const DoubletDynamics& dyn, double t) {
    if (dyn.rate == 0.0) {
        const ComplexMatrix u = doublet_unitary(dyn, t);
        return qmath::kron(u, ComplexMatrix(u.conjugate()));
    }
    const ComplexMatrix h = 0.5 * dyn.angular_frequency() * qmath::sigma_y();
    const ComplexMatrix id = qmath::identity(2);
    const ComplexMatrix sy = qmath::sigma_y();
    const ComplexMatrix generator = Complex(0, -1) * (qmath::kron(h, id) - qmath::kron(id, ComplexMatrix(h.transpose()))) +
                                    0.5 * dyn.rate * (qmath::kron(sy, ComplexMatrix(sy.transpose())) - qmath::identity(4));
    return qmath::matrix_exp(generator, t);
}

// ---------------------------------------------------------------------------
// Overhauser grid
// ---------------------------------------------------------------------------

/// Quasi-static bath: angular-frequency detunings (rad/ns) with probabilities.
struct OverhauserGrid {
    std::vector<double> detunings;
    std::vector<double> weights;

    std::size_t size() const noexcept { return detunings.size(); }

    double second_moment() const {
        double m = 0.0;
        for (std::size_t i = 0; i < size(); ++i) m += weights[i] * detunings[i] * detunings[i];
        return m;
    }

    OverhauserGrid scaled(double factor) const {
        OverhauserGrid g = *this;
        for (auto& d : g.detunings) d *= factor;
        return g;
    }
};

/// Gauss-Hermite rule for a zero-mean Gaussian detuning with standard
/// deviation sqrt(2) / t2, so that <cos(delta t)> = exp(-(t / t2)^2).
/// Nodes come from the Golub-Welsch eigenproblem of the Hermite Jacobi matrix.
inline OverhauserGrid sample_overhauser(double t2, int n_nodes) {
    if (n_nodes < 1) throw Error(ErrorKind::kInvalidArgument, "sample_overhauser: n_nodes must be >= 1");
    if (!(t2 > 0.0)) throw Error(ErrorKind::kInvalidArgument, "sample_overhauser: t2 must be > 0");
    const auto n = static_cast<Eigen::Index>(n_nodes);
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) {
        jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k) / 2.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
        w[static_cast<std::size_t>(i)] = solver.eigenvectors()(0, i) * solver.eigenvectors()(0, i);
    }
    // Symmetrize and renormalize; eigenvalues are ascending.
    const double sigma = std::isinf(t2) ? 0.0 : std::numbers::sqrt2 / t2;
    OverhauserGrid grid;
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t mirror = x.size() - 1 - i;
        const double xi = 0.5 * (x[i] - x[mirror]);
        const double wi = 0.5 * (w[i] + w[mirror]);
        grid.detunings.push_back(std::numbers::sqrt2 * sigma * xi);
        grid.weights.push_back(wi);
        total += wi;
    }
    for (auto& wi : grid.weights) wi /= total;
    return grid;
}

// ---------------------------------------------------------------------------
// Excitation
// ---------------------------------------------------------------------------

/// Ground -> trion amplitudes (a for up -> T_up, b for down -> T_down).
/// The dominant circular component saturates the transition.
inline std::pair<Complex, Complex> excitation_amplitudes(const JonesVector& pol) {
    const double m = std::max(std::abs(pol.r), std::abs(pol.l));
    if (!(m > 0.0)) throw Error(ErrorKind::kInvalidArgument, "pulse polarization is zero");
    return {pol.r / m, pol.l / m};
}

/// Instantaneous excitation pulse on the four-level system. Each {ground,
/// trion} pair is rotated so that ground -> a T + sqrt(1-|a|^2) ground.
inline qmath::QuantumChannel excitation_map(const DeviceParams& p) {
    const auto [a, b] = excitation_amplitudes(p.pulse_polarization);
    ComplexMatrix u = ComplexMatrix::Zero(4, 4);
    auto fill = [&u](int g, int t, Complex amp) {
        const double c = std::sqrt(std::max(0.0, 1.0 - std::norm(amp)));
        u(g, g) = c;
        u(t, g) = amp;
        u(g, t) = -std::conj(amp);
        u(t, t) = c;
    };
    fill(kUp, kTrionUp, a);
    fill(kDown, kTrionDown, b);
    return qmath::QuantumChannel::unitary(level_space(), u);
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

/// Emission-time quadrature over [0, window]: composite Simpson nodes with the
/// exponential decay density folded into the weights. The range is cut at
/// 60 t_rad where the remaining weight is below 1e-26, and the step never
/// exceeds t_rad / 32 so long windows keep their accuracy. Weights are
/// rescaled to sum to the exact integral of the decay density.
struct EmissionQuadrature {
    std::vector<double> times;
    std::vector<double> weights;

    double total_weight() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

inline EmissionQuadrature emission_quadrature(const DeviceParams& p, int steps) {
    if (!(p.window > 0.0)) throw Error(ErrorKind::kInvalidArgument, "emission window must be > 0");
    if (steps < 2) throw Error(ErrorKind::kInvalidArgument, "emission quadrature needs >= 2 steps");
    const double upper = std::min(p.window, 60.0 * p.t_rad);
    steps = std::max(steps, static_cast<int>(std::ceil(32.0 * upper / p.t_rad)));
    if (steps % 2) ++steps;
    const double h = upper / steps;
    EmissionQuadrature q;
    for (int i = 0; i <= steps; ++i) {
        const double t = h * i;
        const double simpson = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        q.times.push_back(t);
        q.weights.push_back(simpson * h / 3.0 * std::exp(-t / p.t_rad) / p.t_rad);
    }
    // Pin the total to the exact captured fraction so the map never gains trace.
    const double scale = -std::expm1(-upper / p.t_rad) / q.total_weight();
    for (double& w : q.weights) w *= scale;
    return q;
}

/// Single node at tau = 0 with unit weight: emission with no delay.
inline EmissionQuadrature instantaneous_emission() { return {{0.0}, {1.0}}; }

inline double capture_probability(const DeviceParams& p) {
    return std::isinf(p.window) ? 1.0 : -std::expm1(-p.window / p.t_rad);
}

/// Selection-rule decay isometry on the trion doublet: {T_up, T_down} ->
/// spin kron photon, T_up -> |up, R>, T_down -> |down, L>.
inline ComplexMatrix decay_isometry() {
    ComplexMatrix d = ComplexMatrix::Zero(4, 2);
    d(0, 0) = 1.0;  // |up, R>
    d(3, 1) = 1.0;  // |down, L>
    return d;
}

enum class DephasingModel { kMarkovian, kQuasiStatic };

/// How the excited doublet evolves before emission.
struct EmissionOptions {
    int steps = 64;
    DephasingModel dephasing = DephasingModel::kMarkovian;
    double excited_detuning = 0.0;  // rad/ns, quasi-static node
};

inline DoubletDynamics excited_dynamics(const DeviceParams& p, DephasingModel model, double detuning) {
    if (model == DephasingModel::kMarkovian) return {excited_larmor(p), 0.0, dephasing_rate(p.t2_excited)};
    return {excited_larmor(p), detuning, 0.0};
}

inline DoubletDynamics ground_dynamics(const DeviceParams& p, DephasingModel model, double detuning) {
    if (model == DephasingModel::kMarkovian) return {ground_larmor(p), 0.0, dephasing_rate(p.t2_ground)};
    return {ground_larmor(p), detuning, 0.0};
}

/// Conditional map "photon emitted inside the window": level -> level kron
/// photon. Trion population precesses for tau under the excited Zeeman term,
/// then decays through the selection rules; the tau integral is taken with
/// the emission quadrature. Ground levels emit nothing and pass into the
/// photon slot's fiducial |H> state.
inline qmath::QuantumChannel emission_map(const DeviceParams& p, const EmissionOptions& opts = {}) {
    const EmissionQuadrature q = emission_quadrature(p, opts.steps);
    const DoubletDynamics dyn = excited_dynamics(p, opts.dephasing, opts.excited_detuning);

    // Trion doublet (2) -> spin kron photon (4), accumulated as a 16x4 superoperator.
    const ComplexMatrix d = decay_isometry();
    const ComplexMatrix dsup = qmath::kron(d, ComplexMatrix(d.conjugate()));
    ComplexMatrix doublet_sup = ComplexMatrix::Zero(16, 4);
    for (std::size_t j = 0; j < q.times.size(); ++j) {
        doublet_sup += q.weights[j] * (dsup * doublet_superoperator(dyn, q.times[j]));
    }
    const auto emitted = qmath::QuantumChannel::from_superoperator(
        qmath::HilbertSpace::qubits({"trion"}), qmath::HilbertSpace::qubits({"spin", "photon"}), doublet_sup,
        qmath::TraceCondition::kNonIncreasing);

    // Embed into level (4) -> level kron photon (8).
    auto embed_out = [](const ComplexMatrix& k) {  // (spin, photon) x trion -> (level, photon) x level
        ComplexMatrix e = ComplexMatrix::Zero(8, 4);
        for (int s = 0; s < 2; ++s)
            for (int ph = 0; ph < 2; ++ph)
                for (int t = 0; t < 2; ++t) e(s * 2 + ph, kTrionUp + t) = k(s * 2 + ph, t);
        return e;
    };
    std::vector<ComplexMatrix> kraus;
    for (const auto& k : emitted.kraus()) kraus.push_back(embed_out(k));
    ComplexMatrix passthrough = ComplexMatrix::Zero(8, 4);
    const double h = 1.0 / std::numbers::sqrt2;
    for (int g = 0; g < 2; ++g) {
        passthrough(g * 2 + 0, g) = h;
        passthrough(g * 2 + 1, g) = h;
    }
    kraus.push_back(passthrough);
    return qmath::QuantumChannel(level_space(), level_space().tensor(photon_space()), std::move(kraus),
                                 qmath::TraceCondition::kNonIncreasing);
}

// ---------------------------------------------------------------------------
// Precession
// ---------------------------------------------------------------------------

/// Free evolution of both doublets for duration, averaged over the
/// quasi-static grid. Ground nodes are used as given; the excited doublet
/// sees the same standard-normal quantiles rescaled by t2_ground / t2_excited.
inline qmath::QuantumChannel ground_precession_map(const DeviceParams& p, double duration, const OverhauserGrid& grid) {
    if (duration < 0.0) throw Error(ErrorKind::kInvalidArgument, "precession duration must be >= 0");
    if (grid.size() == 0) throw Error(ErrorKind::kInvalidArgument, "empty Overhauser grid");
    const double excited_scale =
        std::isinf(p.t2_excited) ? 0.0 : (std::isinf(p.t2_ground) ? 0.0 : p.t2_ground / p.t2_excited);
    std::vector<ComplexMatrix> kraus;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const ComplexMatrix ug = doublet_unitary({ground_larmor(p), grid.detunings[i], 0.0}, duration);
        const ComplexMatrix ue =
            doublet_unitary({excited_larmor(p), grid.detunings[i] * excited_scale, 0.0}, duration);
        ComplexMatrix u = ComplexMatrix::Zero(4, 4);
        u.topLeftCorner(2, 2) = ug;
        u.bottomRightCorner(2, 2) = ue;
        kraus.push_back(std::sqrt(grid.weights[i]) * u);
    }
    return qmath::QuantumChannel(level_space(), level_space(), std::move(kraus), qmath::TraceCondition::kPreserving);
}

/// Lindblad counterpart of ground_precession_map: both doublets precess and
/// dephase at rates 1/t2_ground and 1/t2_excited.
inline qmath::QuantumChannel markovian_precession_map(const DeviceParams& p, double duration) {
    if (duration < 0.0) throw Error(ErrorKind::kInvalidArgument, "precession duration must be >= 0");
    const ComplexMatrix sg = doublet_superoperator(ground_dynamics(p, DephasingModel::kMarkovian, 0.0), duration);
    const ComplexMatrix se = doublet_superoperator(excited_dynamics(p, DephasingModel::kMarkovian, 0.0), duration);
    // Block-diagonal superoperator on the 4-level space; no coherence between
    // ground and trion survives because neither block couples to it here.
    ComplexMatrix sup = ComplexMatrix::Zero(16, 16);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    sup(a * 4 + b, i * 4 + j) = sg(a * 2 + b, i * 2 + j);
                    sup((a + 2) * 4 + (b + 2), (i + 2) * 4 + (j + 2)) = se(a * 2 + b, i * 2 + j);
                }
    // Ground-trion coherences: plain phase evolution damped by both rates.
    const ComplexMatrix ug = doublet_unitary({ground_larmor(p), 0.0, 0.0}, duration);
    const ComplexMatrix ue = doublet_unitary({excited_larmor(p), 0.0, 0.0}, duration);
    const double damp = std::exp(-0.5 * (dephasing_rate(p.t2_ground) + dephasing_rate(p.t2_excited)) * duration);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    const Complex v = damp * ug(a, i) * std::conj(ue(b, j));
                    sup(a * 4 + (b + 2), i * 4 + (j + 2)) = v;
                    sup((b + 2) * 4 + a, (j + 2) * 4 + i) = std::conj(v);
                }
    return qmath::QuantumChannel::from_superoperator(level_space(), level_space(), sup,
                                                     qmath::TraceCondition::kPreserving);
}

}  // namespace qdcluster::trion
