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

#pragma once

#include <random>
#include <vector>

#include "qdcluster/qmath.hpp"

namespace qdcluster::testing {

using qmath::Complex;
using qmath::ComplexMatrix;
using qmath::ComplexVector;

inline ComplexMatrix ginibre(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    ComplexMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
    return m;
}

inline ComplexMatrix random_density(Eigen::Index d, std::mt19937_64& rng) {
    const ComplexMatrix g = ginibre(d, d, rng);
    ComplexMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return 0.5 * (rho + rho.adjoint());
}

inline ComplexVector random_pure(Eigen::Index d, std::mt19937_64& rng) {
    ComplexVector v = ginibre(d, 1, rng).col(0);
    return v / v.norm();
}

/// Kraus operators of a random trace-preserving channel, cut from a random isometry.
inline std::vector<ComplexMatrix> random_kraus(Eigen::Index din, Eigen::Index dout, int n, std::mt19937_64& rng) {
    const ComplexMatrix g = ginibre(dout * n, din, rng);
    const Eigen::HouseholderQR<ComplexMatrix> qr(g);
    const ComplexMatrix v = qr.householderQ() * ComplexMatrix::Identity(dout * n, din);
    std::vector<ComplexMatrix> ks;
    for (int k = 0; k < n; ++k) ks.push_back(v.middleRows(k * dout, dout));
    return ks;
}

inline double max_abs(const ComplexMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace qdcluster::testing
