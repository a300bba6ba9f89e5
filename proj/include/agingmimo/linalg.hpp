// SPDX-License-Identifier: Apache-2.0
//
// agingmimo: pilot spacing analysis for MU-MIMO uplink over aging channels
// Copyright (C) 2026 The agingmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef AGINGMIMO_LINALG_HPP
#define AGINGMIMO_LINALG_HPP

#include "errors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>

namespace agingmimo
{
    using cd = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    using RVector = Eigen::VectorXd;

    namespace linalg
    {
        // Solves whose reciprocal condition estimate falls below 1 / kMaxCondition are rejected.
        inline constexpr double kMaxCondition = 1e14;

        inline CMatrix hermitian_part(const CMatrix &a)
        {
            return 0.5 * (a + a.adjoint());
        }

        inline bool all_finite(const CMatrix &a)
        {
            return a.allFinite();
        }

        inline double real_trace(const CMatrix &a)
        {
            return a.trace().real();
        }

        // Eigenvalues (ascending) of the Hermitian part of `a`.
        inline RVector hermitian_eigenvalues(const CMatrix &a)
        {
            Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
            return es.eigenvalues();
        }

        inline double min_eigenvalue(const CMatrix &a)
        {
            return hermitian_eigenvalues(a).minCoeff();
        }

        inline double max_abs_eigenvalue(const CMatrix &a)
        {
            return hermitian_eigenvalues(a).cwiseAbs().maxCoeff();
        }

        inline double spectral_norm(const CMatrix &a)
        {
            if (a.size() == 0)
                return 0.0;
            Eigen::JacobiSVD<CMatrix> svd(a);
            return svd.singularValues()(0);
        }

        // PSD test relative to the matrix scale: min eigenvalue >= -rel_tol * max(|lambda|).
        inline bool is_psd(const CMatrix &a, double rel_tol = 1e-10)
        {
            RVector ev = hermitian_eigenvalues(a);
            double scale = std::max(ev.cwiseAbs().maxCoeff(), 0.0);
            return ev.minCoeff() >= -rel_tol * scale;
        }

        inline bool is_hermitian(const CMatrix &a, double rel_tol = 1e-12)
        {
            if (a.rows() != a.cols())
                return false;
            double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
            return (a - a.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
        }

        // Spectral positive part V max(Lambda, 0) V^H of the Hermitian part of `a`.
        inline CMatrix psd_part(const CMatrix &a)
        {
            Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
            RVector clipped = es.eigenvalues().cwiseMax(0.0);
            return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
        }

        // Returns true and writes the scale when `a` equals scale * I exactly (up to rel_tol).
        inline bool is_scaled_identity(const CMatrix &a, double *scale = nullptr, double rel_tol = 0.0)
        {
            if (a.rows() != a.cols() || a.rows() == 0)
                return false;
            const cd s = a(0, 0);
            if (s.imag() != 0.0)
                return false;
            const double tol = rel_tol * std::abs(s);
            for (Eigen::Index j = 0; j < a.cols(); ++j)
                for (Eigen::Index i = 0; i < a.rows(); ++i)
                {
                    const cd expected = (i == j) ? s : cd(0.0, 0.0);
                    if (std::abs(a(i, j) - expected) > tol)
                        return false;
                }
            if (scale)
                *scale = s.real();
            return true;
        }

        // Solves A X = B for Hermitian positive definite A (symmetrized first).
        // Cholesky factor of a Hermitian positive definite matrix, checked once and reused across solves.
        class HermitianFactor
        {
        public:
            explicit HermitianFactor(const CMatrix &a) : llt_(hermitian_part(a))
            {
                if (!all_finite(a))
                    throw IllConditionedError("HermitianFactor: non-finite input");
                if (llt_.info() != Eigen::Success)
                    throw IllConditionedError("HermitianFactor: matrix is not positive definite");
                if (llt_.rcond() < 1.0 / kMaxCondition)
                    throw IllConditionedError("HermitianFactor: condition number exceeds 1e14");
            }

            CMatrix solve(const CMatrix &b) const
            {
                CMatrix x = llt_.solve(b);
                if (!all_finite(x))
                    throw IllConditionedError("HermitianFactor: non-finite solution");
                return x;
            }

        private:
            Eigen::LLT<CMatrix> llt_;
        };

        inline CMatrix hermitian_solve(const CMatrix &a, const CMatrix &b)
        {
            if (a.rows() != a.cols() || a.rows() != b.rows())
                throw std::invalid_argument("hermitian_solve: dimension mismatch");
            const CMatrix ah = hermitian_part(a);
            if (!all_finite(ah) || !all_finite(b))
                throw IllConditionedError("hermitian_solve: non-finite input");

            Eigen::LLT<CMatrix> llt(ah);
            if (llt.info() == Eigen::Success)
            {
                if (llt.rcond() < 1.0 / kMaxCondition)
                    throw IllConditionedError("hermitian_solve: condition number exceeds 1e14");
                CMatrix x = llt.solve(b);
                if (!all_finite(x))
                    throw IllConditionedError("hermitian_solve: non-finite solution");
                return x;
            }

            // Not positive definite: fall back to an eigen solve with an explicit condition check.
            Eigen::SelfAdjointEigenSolver<CMatrix> es(ah);
            const RVector &ev = es.eigenvalues();
            const double largest = ev.cwiseAbs().maxCoeff();
            const double smallest = ev.cwiseAbs().minCoeff();
            if (!(largest > 0.0) || smallest * kMaxCondition < largest)
                throw IllConditionedError("hermitian_solve: condition number exceeds 1e14");
            RVector inv = ev.cwiseInverse();
            return es.eigenvectors() * inv.asDiagonal() * (es.eigenvectors().adjoint() * b);
        }

        inline CMatrix hermitian_inverse(const CMatrix &a)
        {
            return hermitian_part(hermitian_solve(a, CMatrix::Identity(a.rows(), a.cols())));
        }
    }
}

#endif
