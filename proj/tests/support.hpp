#pragma once

// Shared fixtures for the test suites: seeded random matrices, unitaries and
// contractions, plus brute-force oracles kept independent of the library
// code paths they check.

#include <Eigen/QR>
#include <cmath>
#include <cstdint>

#include "scrkit/harness.hpp"
#include "scrkit/linalg.hpp"
#include "scrkit/reservoir.hpp"

namespace testsupport {

using scrkit::Complex;
using scrkit::ComplexMatrix;
using scrkit::ComplexVector;

inline ComplexMatrix random_matrix(scrkit::SeededRng& rng, std::size_t rows, std::size_t cols,
                                   double scale = 1.0) {
    ComplexMatrix out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out(i, j) = scale * rng.normal_complex();
    return out;
}

// Unitary factor of the QR decomposition of a random complex matrix.
inline ComplexMatrix random_unitary(scrkit::SeededRng& rng, std::size_t n) {
    const Eigen::MatrixXcd a = scrkit::to_eigen(random_matrix(rng, n, n));
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    Eigen::MatrixXcd q = qr.householderQ();
    return scrkit::from_eigen(q);
}

// Random matrix rescaled to the requested operator norm.
inline ComplexMatrix random_contraction(scrkit::SeededRng& rng, std::size_t n, double norm) {
    ComplexMatrix a = random_matrix(rng, n, n);
    const double cur = scrkit::operator_norm(a);
    return Complex(norm / cur, 0.0) * a;
}

inline double norm_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    return scrkit::operator_norm(a - b);
}

// Brute-force largest singular value: power iteration on A^* A, run to
// convergence from a fixed starting vector.
inline double power_iteration_norm(const ComplexMatrix& a) {
    const ComplexMatrix gram = a.adjoint() * a;
    ComplexVector v(gram.rows(), Complex(0.0, 0.0));
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = Complex(1.0 + static_cast<double>(i % 7), 0.3 * static_cast<double>(i % 5));
    }
    double prev = 0.0;
    for (int iter = 0; iter < 100000; ++iter) {
        const ComplexVector w = scrkit::matvec(gram, v);
        const double norm_w = scrkit::vec_norm(w);
        if (norm_w == 0.0) return 0.0;
        const double estimate = std::sqrt(norm_w / scrkit::vec_norm(v));
        v = scrkit::vec_scale(Complex(1.0 / norm_w, 0.0), w);
        if (iter > 4 && std::abs(estimate - prev) < 1e-13 * std::max(1.0, estimate)) {
            return estimate;
        }
        prev = estimate;
    }
    return prev;
}

} // namespace testsupport
