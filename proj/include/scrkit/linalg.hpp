#pragma once

// Numerical primitives shared by every construction stage: operator norms,
// Hermitian PSD square roots, spectral decomposition of unitary matrices,
// and dense linear solves. The heavy decompositions are delegated to Eigen;
// everything here adapts them to the toolkit's ComplexMatrix value type and
// enforces the toolkit's tolerance contracts.
//
// Conventions fixed here and relied upon downstream:
//   * unitary_spectral returns U = S^* diag(omega) S with the eigenvalues
//     sorted by principal angle in [0, 2pi) and projected onto the unit
//     circle, and each eigenvector's phase fixed so that its first
//     non-negligible component is real positive. This keeps root-of-unity
//     bookkeeping and similarity constructions deterministic.
//   * psd_sqrt clamps eigenvalues in [-1e-10, 0) to zero; inputs at the
//     boundary of contractivity make I - W^*W exactly singular.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "scrkit/complex_matrix.hpp"
#include "scrkit/errors.hpp"

namespace scrkit {

inline Eigen::MatrixXcd to_eigen(const ComplexMatrix& a) {
    Eigen::MatrixXcd out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(i, j);
    return out;
}

inline ComplexMatrix from_eigen(const Eigen::MatrixXcd& a) {
    ComplexMatrix out(static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols()));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = a(i, j);
    return out;
}

// Largest singular value.
inline double operator_norm(const ComplexMatrix& a) {
    if (!a.is_finite()) throw InputError("operator_norm: non-finite entries");
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    const Eigen::MatrixXcd m = to_eigen(a);
    if (std::min(a.rows(), a.cols()) <= 16) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
        return svd.singularValues()(0);
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

// Hermitian square root of a Hermitian PSD matrix. Eigenvalues in
// [-1e-10, 0) are treated as roundoff and clamped to zero; anything more
// negative, or a significantly non-Hermitian input, is rejected.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& h) {
    if (!h.is_square()) throw InputError("psd_sqrt: matrix not square");
    if (!h.is_finite()) throw InputError("psd_sqrt: non-finite entries");
    const double scale = operator_norm(h);
    const double herm_defect = operator_norm(h - h.adjoint());
    if (herm_defect > 1e-10 * std::max(scale, 1e-300)) {
        throw InputError("psd_sqrt: input is not Hermitian within tolerance");
    }
    // Work on the Hermitian average so the solver sees an exactly Hermitian
    // matrix regardless of roundoff in the caller's product.
    Eigen::MatrixXcd hs = to_eigen(h);
    hs = Complex(0.5, 0.0) * (hs + hs.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hs);
    if (es.info() != Eigen::Success) throw InputError("psd_sqrt: eigendecomposition failed");
    Eigen::VectorXd lam = es.eigenvalues();
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) < -1e-10) {
            throw InputError("psd_sqrt: input has a negative eigenvalue beyond the clamp threshold");
        }
        lam(i) = std::sqrt(std::max(lam(i), 0.0));
    }
    const Eigen::MatrixXcd q = es.eigenvectors();
    return from_eigen(q * lam.asDiagonal() * q.adjoint());
}

inline double unitarity_residual(const ComplexMatrix& u) {
    return operator_norm(u.adjoint() * u - ComplexMatrix::identity(u.cols()));
}

struct SpectralDecomposition {
    ComplexMatrix s;      // unitary, U = s^* diag(omega) s
    ComplexVector omega;  // unimodular eigenvalues, sorted by angle in [0, 2pi)
};

namespace detail {

inline double principal_angle(const Complex& z) {
    double a = std::arg(z);
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    return a;
}

// Rotates the phase of each column so its first component of non-negligible
// magnitude is real positive.
inline void fix_column_phases(Eigen::MatrixXcd& q) {
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
            const double mag = std::abs(q(i, j));
            if (mag > 1e-10) {
                const Complex phase = std::conj(q(i, j)) / mag;
                q.col(j) *= phase;
                break;
            }
        }
    }
}

} // namespace detail

// Spectral decomposition of a unitary matrix via complex Schur form (which
// is diagonal for normal inputs up to roundoff). Eigenvalues are projected
// onto the unit circle on output.
inline SpectralDecomposition unitary_spectral(const ComplexMatrix& u) {
    if (!u.is_square()) throw InputError("unitary_spectral: matrix not square");
    if (!u.is_finite()) throw InputError("unitary_spectral: non-finite entries");
    if (unitarity_residual(u) > 1e-8) {
        throw InputError("unitary_spectral: input is not unitary within tolerance");
    }
    const std::size_t n = u.rows();
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(to_eigen(u));
    if (schur.info() != Eigen::Success) throw InputError("unitary_spectral: Schur iteration failed");
    Eigen::MatrixXcd q = schur.matrixU();
    const Eigen::MatrixXcd& t = schur.matrixT();

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::vector<double> angle(n);
    ComplexVector raw(n);
    for (std::size_t i = 0; i < n; ++i) {
        Complex w = t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        const double mag = std::abs(w);
        if (std::abs(mag - 1.0) > 1e-8) {
            throw InputError("unitary_spectral: eigenvalue off the unit circle beyond tolerance");
        }
        w /= mag;
        raw[i] = w;
        angle[i] = detail::principal_angle(w);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return angle[a] < angle[b]; });

    Eigen::MatrixXcd q_sorted(q.rows(), q.cols());
    ComplexVector omega(n);
    for (std::size_t k = 0; k < n; ++k) {
        q_sorted.col(static_cast<Eigen::Index>(k)) = q.col(static_cast<Eigen::Index>(order[k]));
        omega[k] = raw[order[k]];
    }
    detail::fix_column_phases(q_sorted);

    SpectralDecomposition out;
    out.s = from_eigen(q_sorted.adjoint());
    out.omega = std::move(omega);
    return out;
}

// Dense solve A X = B (square A, partial-pivoting LU).
inline ComplexMatrix solve(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (!a.is_square()) throw InputError("solve: matrix not square");
    if (a.rows() != b.rows()) throw InputError("solve: dimension mismatch");
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(to_eigen(a));
    return from_eigen(lu.solve(to_eigen(b)));
}

// A^k by binary powering.
inline ComplexMatrix matrix_power(const ComplexMatrix& a, std::size_t k) {
    if (!a.is_square()) throw InputError("matrix_power: matrix not square");
    ComplexMatrix result = ComplexMatrix::identity(a.rows());
    ComplexMatrix base = a;
    while (k > 0) {
        if (k & 1u) result = result * base;
        base = (k >>= 1) ? base * base : base;
    }
    return result;
}

} // namespace scrkit
