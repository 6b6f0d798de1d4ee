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

// Dense complex linear algebra for small Hilbert spaces (dimension <= 256):
// tensor-product bookkeeping, density matrices, Kraus channels and their
// superoperator / Choi / Pauli-transfer-matrix representations.
//
// Vectorization convention used throughout: row-major, vec(rho)[i*d + j] =
// rho(i, j). Under it vec(A rho B) = (A kron B^T) vec(rho), so the
// superoperator of a Kraus channel is sum_k K_k kron conj(K_k).

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "qdcluster/error.hpp"

namespace qdcluster::qmath {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdFloor = -1e-9;
inline constexpr double kKrausTol = 1e-9;

// ---------------------------------------------------------------------------
// Small helpers
// ---------------------------------------------------------------------------

inline ComplexMatrix identity(std::size_t dim) {
    return ComplexMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

inline ComplexMatrix pauli(int index) {
    ComplexMatrix p(2, 2);
    switch (index) {
        case 0: p << 1, 0, 0, 1; break;
        case 1: p << 0, 1, 1, 0; break;
        case 2: p << 0, Complex(0, -1), Complex(0, 1), 0; break;
        case 3: p << 1, 0, 0, -1; break;
        default: throw Error(ErrorKind::kInvalidArgument, "pauli index must be 0..3");
    }
    return p;
}

inline ComplexMatrix sigma_x() { return pauli(1); }
inline ComplexMatrix sigma_y() { return pauli(2); }
inline ComplexMatrix sigma_z() { return pauli(3); }

/// Largest absolute entry of m - m^dagger.
inline double hermiticity_defect(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTol) {
    return hermiticity_defect(m) <= tol;
}

/// Eigenvalues of the Hermitian part of m, ascending.
inline Eigen::VectorXd hermitian_eigenvalues(const ComplexMatrix& m) {
    const ComplexMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

inline double min_eigenvalue(const ComplexMatrix& m) {
    if (m.size() == 0) return 0.0;
    return hermitian_eigenvalues(m).minCoeff();
}

// ---------------------------------------------------------------------------
// kron / matrix_exp
// ---------------------------------------------------------------------------

/// Kronecker product a kron b.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline ComplexVector kron(const ComplexVector& a, const ComplexVector& b) {
    ComplexVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

/// exp(scale * m), Pade scaling-and-squaring.
inline ComplexMatrix matrix_exp(const ComplexMatrix& m, Complex scale) {
    if (m.rows() != m.cols()) {
        throw Error(ErrorKind::kNotSquare, "matrix_exp needs a square matrix, got " +
                                               std::to_string(m.rows()) + "x" +
                                               std::to_string(m.cols()));
    }
    if (m.size() == 0) return m;
    const ComplexMatrix scaled = scale * m;
    return scaled.exp();
}

// ---------------------------------------------------------------------------
// HilbertSpace
// ---------------------------------------------------------------------------

struct Factor {
    std::string label;
    std::size_t dim = 2;

    bool operator==(const Factor&) const = default;
};

/// Ordered tensor product of labeled factors. The first factor is the most
/// significant one in the flattened index.
class HilbertSpace {
   public:
    HilbertSpace() = default;

    explicit HilbertSpace(std::vector<Factor> factors) : factors_(std::move(factors)) {
        std::set<std::string> seen;
        for (const auto& f : factors_) {
            if (f.dim == 0) throw Error(ErrorKind::kInvalidArgument, "factor '" + f.label + "' has dimension 0");
            if (!seen.insert(f.label).second) {
                throw Error(ErrorKind::kInvalidArgument, "duplicate factor label '" + f.label + "'");
            }
        }
    }

    static HilbertSpace qubits(const std::vector<std::string>& labels) {
        std::vector<Factor> fs;
        fs.reserve(labels.size());
        for (const auto& l : labels) fs.push_back({l, 2});
        return HilbertSpace(std::move(fs));
    }

    const std::vector<Factor>& factors() const noexcept { return factors_; }
    std::size_t num_factors() const noexcept { return factors_.size(); }

    std::size_t dim() const noexcept {
        std::size_t d = 1;
        for (const auto& f : factors_) d *= f.dim;
        return d;
    }

    std::optional<std::size_t> index_of(std::string_view label) const {
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            if (factors_[i].label == label) return i;
        }
        return std::nullopt;
    }

    bool contains(std::string_view label) const { return index_of(label).has_value(); }

    /// this kron other; labels must stay unique.
    HilbertSpace tensor(const HilbertSpace& other) const {
        std::vector<Factor> fs = factors_;
        fs.insert(fs.end(), other.factors_.begin(), other.factors_.end());
        return HilbertSpace(std::move(fs));
    }

    /// Factors whose labels are in keep, in their original order.
    HilbertSpace restricted_to(const std::set<std::string>& keep) const {
        std::vector<Factor> fs;
        for (const auto& f : factors_) {
            if (keep.count(f.label)) fs.push_back(f);
        }
        return HilbertSpace(std::move(fs));
    }

    bool is_qubit_register() const {
        return std::all_of(factors_.begin(), factors_.end(), [](const Factor& f) { return f.dim == 2; });
    }

    bool operator==(const HilbertSpace&) const = default;

   private:
    std::vector<Factor> factors_;
};

// ---------------------------------------------------------------------------
// DensityMatrix
// ---------------------------------------------------------------------------

enum class Normalization { kNormalized, kConditioned };

/// Hermitian PSD operator on a labeled space. Validated on construction.
/// Conditioned states carry the sub-unit trace of a post-selected branch.
class DensityMatrix {
   public:
    DensityMatrix(HilbertSpace space, ComplexMatrix matrix,
                  Normalization normalization = Normalization::kNormalized)
        : space_(std::move(space)), matrix_(std::move(matrix)), normalization_(normalization) {
        validate();
    }

    static DensityMatrix pure(HilbertSpace space, const ComplexVector& psi) {
        return DensityMatrix(std::move(space), psi * psi.adjoint());
    }

    static DensityMatrix maximally_mixed(HilbertSpace space) {
        const auto d = space.dim();
        return DensityMatrix(std::move(space), identity(d) / static_cast<double>(d));
    }

    const HilbertSpace& space() const noexcept { return space_; }
    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    Normalization normalization() const noexcept { return normalization_; }
    std::size_t dim() const noexcept { return space_.dim(); }

    double trace() const { return matrix_.trace().real(); }

    DensityMatrix renormalized() const {
        const double t = trace();
        if (!(t > 0.0)) throw Error(ErrorKind::kNumerical, "cannot renormalize a state with trace " + std::to_string(t));
        return DensityMatrix(space_, matrix_ / t, Normalization::kNormalized);
    }

    /// Eigenvalues with values in (kPsdFloor, 0) clamped to zero. Reporting only.
    Eigen::VectorXd reported_eigenvalues() const {
        Eigen::VectorXd ev = hermitian_eigenvalues(matrix_);
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            if (ev(i) < 0.0 && ev(i) >= kPsdFloor) ev(i) = 0.0;
        }
        return ev;
    }

    double purity() const { return (matrix_ * matrix_).trace().real(); }

   private:
    void validate() const {
        const auto d = static_cast<Eigen::Index>(space_.dim());
        if (matrix_.rows() != d || matrix_.cols() != d) {
            throw Error(ErrorKind::kDimensionMismatch,
                        "density matrix is " + std::to_string(matrix_.rows()) + "x" +
                            std::to_string(matrix_.cols()) + " but space dimension is " + std::to_string(d));
        }
        if (!is_hermitian(matrix_)) {
            throw Error(ErrorKind::kInvalidState,
                        "density matrix not Hermitian (defect " + std::to_string(hermiticity_defect(matrix_)) + ")");
        }
        const double ev = min_eigenvalue(matrix_);
        if (ev < kPsdFloor) {
            throw Error(ErrorKind::kInvalidState, "density matrix has eigenvalue " + std::to_string(ev));
        }
        const double t = trace();
        if (normalization_ == Normalization::kNormalized) {
            if (std::abs(t - 1.0) > kTraceTol) {
                throw Error(ErrorKind::kInvalidState, "normalized state has trace " + std::to_string(t));
            }
        } else if (!(t > 0.0) || t > 1.0 + kTraceTol) {
            throw Error(ErrorKind::kInvalidState, "conditioned state has trace " + std::to_string(t));
        }
    }

    HilbertSpace space_;
    ComplexMatrix matrix_;
    Normalization normalization_;
};

// ---------------------------------------------------------------------------
// Tensor-structure operations
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::size_t> strides_of(const HilbertSpace& space) {
    const auto& fs = space.factors();
    std::vector<std::size_t> strides(fs.size(), 1);
    for (std::size_t i = fs.size(); i-- > 1;) strides[i - 1] = strides[i] * fs[i].dim;
    return strides;
}

}  // namespace detail

/// Reduced operator on the factors named in keep (original order retained).
/// Works on raw matrices so that conditioned and intermediate operators can
/// be marginalised too.
inline ComplexMatrix partial_trace(const ComplexMatrix& rho, const HilbertSpace& space,
                                   const std::set<std::string>& keep) {
    for (const auto& label : keep) {
        if (!space.contains(label)) throw Error(ErrorKind::kUnknownLabel, "no factor labeled '" + label + "'");
    }
    const auto d = space.dim();
    if (static_cast<std::size_t>(rho.rows()) != d || static_cast<std::size_t>(rho.cols()) != d) {
        throw Error(ErrorKind::kDimensionMismatch, "operator does not match space dimension");
    }
    const auto& fs = space.factors();
    const auto strides = detail::strides_of(space);

    std::size_t kept_dim = 1, traced_dim = 1;
    for (const auto& f : fs) (keep.count(f.label) ? kept_dim : traced_dim) *= f.dim;

    // Split every flat index into its (kept, traced) coordinates.
    std::vector<std::size_t> kept_idx(d), traced_idx(d);
    for (std::size_t flat = 0; flat < d; ++flat) {
        std::size_t k = 0, t = 0;
        for (std::size_t f = 0; f < fs.size(); ++f) {
            const std::size_t digit = (flat / strides[f]) % fs[f].dim;
            if (keep.count(fs[f].label)) {
                k = k * fs[f].dim + digit;
            } else {
                t = t * fs[f].dim + digit;
            }
        }
        kept_idx[flat] = k;
        traced_idx[flat] = t;
    }
    std::vector<std::vector<std::size_t>> groups(traced_dim);
    for (std::size_t flat = 0; flat < d; ++flat) groups[traced_idx[flat]].push_back(flat);

    ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(kept_dim), static_cast<Eigen::Index>(kept_dim));
    for (const auto& g : groups) {
        for (auto i : g) {
            for (auto j : g) {
                out(static_cast<Eigen::Index>(kept_idx[i]), static_cast<Eigen::Index>(kept_idx[j])) +=
                    rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
        }
    }
    return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::set<std::string>& keep) {
    ComplexMatrix reduced = partial_trace(rho.matrix(), rho.space(), keep);
    return DensityMatrix(rho.space().restricted_to(keep), std::move(reduced), rho.normalization());
}

/// Reorders tensor factors; order lists the labels in the new order.
inline ComplexMatrix permute_factors(const ComplexMatrix& rho, const HilbertSpace& space,
                                     const std::vector<std::string>& order) {
    if (order.size() != space.num_factors()) {
        throw Error(ErrorKind::kDimensionMismatch, "permutation must name every factor exactly once");
    }
    std::vector<Factor> new_factors;
    std::vector<std::size_t> source;
    for (const auto& label : order) {
        const auto idx = space.index_of(label);
        if (!idx) throw Error(ErrorKind::kUnknownLabel, "no factor labeled '" + label + "'");
        source.push_back(*idx);
        new_factors.push_back(space.factors()[*idx]);
    }
    const HilbertSpace target(new_factors);
    const auto old_strides = detail::strides_of(space);
    const auto d = space.dim();
    std::vector<Eigen::Index> map(d);
    for (std::size_t flat = 0; flat < d; ++flat) {
        std::size_t rem = flat, old_flat = 0;
        for (std::size_t f = 0; f < new_factors.size(); ++f) {
            std::size_t block = 1;
            for (std::size_t g = f + 1; g < new_factors.size(); ++g) block *= new_factors[g].dim;
            const std::size_t digit = rem / block;
            rem %= block;
            old_flat += digit * old_strides[source[f]];
        }
        map[flat] = static_cast<Eigen::Index>(old_flat);
    }
    ComplexMatrix out(rho.rows(), rho.cols());
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rho(map[i], map[j]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// QuantumChannel
// ---------------------------------------------------------------------------

enum class TraceCondition { kPreserving, kNonIncreasing };

/// Completely positive map in Kraus form, input_space -> output_space.
class QuantumChannel {
   public:
    QuantumChannel(HilbertSpace input, HilbertSpace output, std::vector<ComplexMatrix> kraus,
                   TraceCondition condition)
        : input_(std::move(input)), output_(std::move(output)), kraus_(std::move(kraus)), condition_(condition) {
        validate();
    }

    static QuantumChannel identity_channel(const HilbertSpace& space) {
        return QuantumChannel(space, space, {identity(space.dim())}, TraceCondition::kPreserving);
    }

    static QuantumChannel unitary(const HilbertSpace& space, const ComplexMatrix& u) {
        return QuantumChannel(space, space, {u}, TraceCondition::kPreserving);
    }

    /// Kraus form recovered from a row-major superoperator through the
    /// eigendecomposition of its Choi matrix.
    static QuantumChannel from_superoperator(HilbertSpace input, HilbertSpace output, const ComplexMatrix& superop,
                                             TraceCondition condition) {
        const auto din = static_cast<Eigen::Index>(input.dim());
        const auto dout = static_cast<Eigen::Index>(output.dim());
        if (superop.rows() != dout * dout || superop.cols() != din * din) {
            throw Error(ErrorKind::kDimensionMismatch, "superoperator shape does not match spaces");
        }
        ComplexMatrix choi(din * dout, din * dout);
        for (Eigen::Index i = 0; i < din; ++i)
            for (Eigen::Index j = 0; j < din; ++j)
                for (Eigen::Index a = 0; a < dout; ++a)
                    for (Eigen::Index b = 0; b < dout; ++b)
                        choi(i * dout + a, j * dout + b) = superop(a * dout + b, i * din + j);
        const ComplexMatrix herm = 0.5 * (choi + choi.adjoint());
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm);
        const Eigen::VectorXd& ev = solver.eigenvalues();
        const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
        std::vector<ComplexMatrix> kraus;
        for (Eigen::Index n = ev.size(); n-- > 0;) {
            if (ev(n) < kPsdFloor * scale) {
                throw Error(ErrorKind::kInvalidChannel,
                            "superoperator is not completely positive (Choi eigenvalue " + std::to_string(ev(n)) + ")");
            }
            if (ev(n) <= 1e-14 * scale) continue;
            ComplexMatrix k(dout, din);
            const double s = std::sqrt(ev(n));
            for (Eigen::Index i = 0; i < din; ++i)
                for (Eigen::Index a = 0; a < dout; ++a) k(a, i) = s * solver.eigenvectors()(i * dout + a, n);
            kraus.push_back(std::move(k));
        }
        if (kraus.empty()) kraus.push_back(ComplexMatrix::Zero(dout, din));
        return QuantumChannel(std::move(input), std::move(output), std::move(kraus), condition);
    }

    const HilbertSpace& input_space() const noexcept { return input_; }
    const HilbertSpace& output_space() const noexcept { return output_; }
    const std::vector<ComplexMatrix>& kraus() const noexcept { return kraus_; }
    TraceCondition trace_condition() const noexcept { return condition_; }

    /// sum_k K^dagger K.
    ComplexMatrix kraus_sum() const {
        ComplexMatrix s = ComplexMatrix::Zero(static_cast<Eigen::Index>(input_.dim()),
                                              static_cast<Eigen::Index>(input_.dim()));
        for (const auto& k : kraus_) s.noalias() += k.adjoint() * k;
        return s;
    }

    /// I - sum_k K^dagger K.
    ComplexMatrix deficit() const { return identity(input_.dim()) - kraus_sum(); }

    ComplexMatrix apply(const ComplexMatrix& rho) const {
        if (static_cast<std::size_t>(rho.rows()) != input_.dim() || static_cast<std::size_t>(rho.cols()) != input_.dim()) {
            throw Error(ErrorKind::kDimensionMismatch, "channel input dimension mismatch");
        }
        ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(output_.dim()),
                                                static_cast<Eigen::Index>(output_.dim()));
        for (const auto& k : kraus_) out.noalias() += k * rho * k.adjoint();
        return out;
    }

    DensityMatrix apply(const DensityMatrix& rho) const {
        if (!(rho.space() == input_)) {
            throw Error(ErrorKind::kDimensionMismatch, "state space does not match channel input space");
        }
        const auto norm = (condition_ == TraceCondition::kPreserving) ? rho.normalization() : Normalization::kConditioned;
        return DensityMatrix(output_, apply(rho.matrix()), norm);
    }

    ComplexMatrix superoperator() const {
        const auto din = static_cast<Eigen::Index>(input_.dim());
        const auto dout = static_cast<Eigen::Index>(output_.dim());
        ComplexMatrix s = ComplexMatrix::Zero(dout * dout, din * din);
        for (const auto& k : kraus_) s += kron(k, ComplexMatrix(k.conjugate()));
        return s;
    }

    /// this followed by next.
    QuantumChannel then(const QuantumChannel& next) const {
        if (!(next.input_ == output_)) throw Error(ErrorKind::kDimensionMismatch, "channel composition space mismatch");
        std::vector<ComplexMatrix> ks;
        ks.reserve(kraus_.size() * next.kraus_.size());
        for (const auto& b : next.kraus_)
            for (const auto& a : kraus_) ks.push_back(b * a);
        const bool tp = condition_ == TraceCondition::kPreserving && next.condition_ == TraceCondition::kPreserving;
        return QuantumChannel(input_, next.output_, std::move(ks),
                              tp ? TraceCondition::kPreserving : TraceCondition::kNonIncreasing);
    }

    /// K kron I on (input kron spectator) -> (output kron spectator).
    QuantumChannel extended(const HilbertSpace& spectator) const {
        std::vector<ComplexMatrix> ks;
        const ComplexMatrix id = identity(spectator.dim());
        for (const auto& k : kraus_) ks.push_back(kron(k, id));
        return QuantumChannel(input_.tensor(spectator), output_.tensor(spectator), std::move(ks), condition_);
    }

    /// Same map with every Kraus operator scaled by factor (factor^2 on the output).
    QuantumChannel scaled(double factor) const {
        std::vector<ComplexMatrix> ks;
        for (const auto& k : kraus_) ks.push_back(std::sqrt(factor) * k);
        return QuantumChannel(input_, output_, std::move(ks), TraceCondition::kNonIncreasing);
    }

   private:
    void validate() const {
        const auto din = static_cast<Eigen::Index>(input_.dim());
        const auto dout = static_cast<Eigen::Index>(output_.dim());
        if (kraus_.empty()) throw Error(ErrorKind::kInvalidChannel, "channel needs at least one Kraus operator");
        for (const auto& k : kraus_) {
            if (k.rows() != dout || k.cols() != din) {
                throw Error(ErrorKind::kDimensionMismatch, "Kraus operator shape does not match channel spaces");
            }
        }
        const ComplexMatrix d = deficit();
        if (condition_ == TraceCondition::kPreserving) {
            const double err = d.cwiseAbs().maxCoeff();
            if (err > kKrausTol) {
                throw Error(ErrorKind::kInvalidChannel, "sum K^dagger K deviates from identity by " + std::to_string(err));
            }
        } else {
            const double ev = min_eigenvalue(d);
            if (ev < -kKrausTol) {
                throw Error(ErrorKind::kInvalidChannel,
                            "trace-increasing channel (deficit eigenvalue " + std::to_string(ev) + ")");
            }
        }
    }

    HilbertSpace input_;
    HilbertSpace output_;
    std::vector<ComplexMatrix> kraus_;
    TraceCondition condition_;
};

// ---------------------------------------------------------------------------
// Channel representations
// ---------------------------------------------------------------------------

/// Choi matrix (I kron ch)(|Omega><Omega|), |Omega> = sum_i |i>|i> unnormalized.
/// Index order (input, output).
inline ComplexMatrix channel_to_choi(const QuantumChannel& ch) {
    const auto din = static_cast<Eigen::Index>(ch.input_space().dim());
    const auto dout = static_cast<Eigen::Index>(ch.output_space().dim());
    ComplexMatrix choi = ComplexMatrix::Zero(din * dout, din * dout);
    ComplexVector v(din * dout);
    for (const auto& k : ch.kraus()) {
        for (Eigen::Index i = 0; i < din; ++i)
            for (Eigen::Index a = 0; a < dout; ++a) v(i * dout + a) = k(a, i);
        choi.noalias() += v * v.adjoint();
    }
    return choi;
}

/// n-qubit Pauli string for the base-4 digits of index (most significant digit
/// is the first qubit); digit order I, X, Y, Z.
inline ComplexMatrix pauli_string(std::size_t index, std::size_t n_qubits) {
    ComplexMatrix out = identity(1);
    std::vector<int> digits(n_qubits);
    for (std::size_t q = n_qubits; q-- > 0;) {
        digits[q] = static_cast<int>(index % 4);
        index /= 4;
    }
    for (int d : digits) out = kron(out, pauli(d));
    return out;
}

/// Real matrix R(i, j) = tr(P_i ch(P_j)) / dim with lexicographic Pauli order.
struct PauliTransferMatrix {
    std::size_t n_qubits = 0;
    RealMatrix matrix;

    /// Applies the PTM to a state through its Pauli expansion.
    ComplexMatrix apply(const ComplexMatrix& rho) const {
        const std::size_t n = std::size_t{1} << (2 * n_qubits);
        const double d = static_cast<double>(std::size_t{1} << n_qubits);
        Eigen::VectorXd coeffs(static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j) {
            coeffs(static_cast<Eigen::Index>(j)) = (pauli_string(j, n_qubits) * rho).trace().real();
        }
        const Eigen::VectorXd out_coeffs = matrix * coeffs;
        ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
        for (std::size_t i = 0; i < n; ++i) {
            out += out_coeffs(static_cast<Eigen::Index>(i)) / d * pauli_string(i, n_qubits);
        }
        return out;
    }
};

inline PauliTransferMatrix channel_to_ptm(const QuantumChannel& ch) {
    const auto din = ch.input_space().dim();
    const auto dout = ch.output_space().dim();
    if (din != dout) {
        throw Error(ErrorKind::kDimensionMismatch,
                    "PTM needs equal input/output dimension (got " + std::to_string(din) + " -> " + std::to_string(dout) +
                        "); embed register-growing channels first");
    }
    std::size_t n = 0;
    while ((std::size_t{1} << n) < din) ++n;
    if ((std::size_t{1} << n) != din) throw Error(ErrorKind::kDimensionMismatch, "PTM needs a qubit register");
    const std::size_t np = std::size_t{1} << (2 * n);
    std::vector<ComplexMatrix> paulis;
    paulis.reserve(np);
    for (std::size_t i = 0; i < np; ++i) paulis.push_back(pauli_string(i, n));
    PauliTransferMatrix ptm{n, RealMatrix(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(np))};
    for (std::size_t j = 0; j < np; ++j) {
        const ComplexMatrix image = ch.apply(paulis[j]);
        for (std::size_t i = 0; i < np; ++i) {
            ptm.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (paulis[i] * image).trace().real() / static_cast<double>(din);
        }
    }
    return ptm;
}

/// <psi| rho |psi>.
inline double state_fidelity(const DensityMatrix& rho, const ComplexVector& psi) {
    if (static_cast<std::size_t>(psi.size()) != rho.dim()) {
        throw Error(ErrorKind::kDimensionMismatch, "state vector has dimension " + std::to_string(psi.size()) +
                                                       ", density matrix " + std::to_string(rho.dim()));
    }
    if (std::abs(psi.squaredNorm() - 1.0) > 1e-9) {
        throw Error(ErrorKind::kInvalidArgument, "target state vector is not normalized");
    }
    const Complex f = psi.dot(rho.matrix() * psi);
    return f.real();
}

}  // namespace qdcluster::qmath
