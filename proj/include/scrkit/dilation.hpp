#pragma once

// First approximation stage: embed a strict contraction into a finite
// unitary so that compressed powers reproduce powers of the contraction up
// to a horizon N, then rescale. The dilated system (lambda U, [V; 0],
// h o projection) tracks the original's projected states within delta on
// every M-bounded stream once N is chosen against the geometric tail.
//
// Block layout of the horizon-N dilation of a contraction W1 (N+1 block rows
// and columns of size n):
//
//       [ W1   0  ...  0  D_{W1*} ]
//       [ D_W1 0  ...  0  -W1^*   ]
//   U = [ 0    I       0   0      ]
//       [          ...            ]
//       [ 0    ...     I   0      ]
//
// with D_W1 = (I - W1^* W1)^{1/2} and D_{W1*} = (I - W1 W1^*)^{1/2}.
// For N = 1 this is exactly the classical one-step unitary dilation.

#include <cmath>
#include <cstddef>
#include <utility>

#include "scrkit/complex_matrix.hpp"
#include "scrkit/errors.hpp"
#include "scrkit/linalg.hpp"
#include "scrkit/reservoir.hpp"

namespace scrkit {

inline constexpr std::size_t kDefaultMaxStateDim = 200000;

// Smallest N >= 1 with 2 M ||V|| lambda^(N+1) / (1 - lambda) < delta.
inline std::size_t choose_dilation_horizon(double lambda, double norm_v, double bound_m,
                                           double delta) {
    if (!(lambda > 0.0) || lambda >= 1.0) {
        throw InputError("choose_dilation_horizon: lambda must lie in (0, 1)");
    }
    if (!(delta > 0.0)) throw InputError("choose_dilation_horizon: delta must be positive");
    std::size_t n = 1;
    while (truncation_tail_bound(lambda, norm_v, bound_m, n) >= delta) {
        ++n;
        if (n > 1000000) {
            throw InputError("choose_dilation_horizon: horizon exceeds 1e6; delta too small for lambda");
        }
    }
    return n;
}

// Both defect operators of a contraction from one SVD W1 = U S V^*:
//   D_W1   = (I - W1^* W1)^{1/2} = V f(S) V^*,
//   D_W1*  = (I - W1 W1^*)^{1/2} = U f(S) U^*,   f(s) = sqrt(max(0, 1 - s^2)).
// The shared factorization keeps the intertwining identity
// W1 D_W1 = D_W1* W1 at multiply roundoff even when ||W1|| = 1 makes the
// defects exactly singular; separate Gram-matrix square roots lose ~sqrt(eps)
// there because the root has unbounded slope at zero.
inline std::pair<ComplexMatrix, ComplexMatrix> defect_operators(const ComplexMatrix& w1) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(w1),
                                           Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::VectorXd f = svd.singularValues();
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        f(i) = std::sqrt(std::max(0.0, 1.0 - f(i) * f(i)));
    }
    const Eigen::MatrixXcd u = svd.matrixU();
    const Eigen::MatrixXcd v = svd.matrixV();
    return {from_eigen(v * f.asDiagonal() * v.adjoint()),
            from_eigen(u * f.asDiagonal() * u.adjoint())};
}

// Horizon-N unitary dilation of a contraction W1 (||W1|| <= 1), of size
// (N+1) n. The top-left n x n block of U^k equals W1^k for 1 <= k <= N.
inline ComplexMatrix egervary_unitary(const ComplexMatrix& w1, std::size_t horizon) {
    if (!w1.is_square()) throw InputError("egervary_unitary: W1 not square");
    if (horizon < 1) throw InputError("egervary_unitary: horizon must be >= 1");
    const double norm = operator_norm(w1);
    if (norm > 1.0 + 1e-10) {
        throw InputError("egervary_unitary: ||W1|| exceeds 1 beyond tolerance");
    }
    const std::size_t n = w1.rows();
    const ComplexMatrix eye = ComplexMatrix::identity(n);
    const ComplexMatrix w1_adj = w1.adjoint();
    const auto [defect, defect_adj] = defect_operators(w1);

    ComplexMatrix u((horizon + 1) * n, (horizon + 1) * n);
    u.set_block(0, 0, w1);
    u.set_block(0, horizon * n, defect_adj);
    u.set_block(n, 0, defect);
    u.set_block(n, horizon * n, -w1_adj);
    for (std::size_t j = 2; j <= horizon; ++j) {
        u.set_block(j * n, (j - 1) * n, eye);
    }
    return u;
}

struct DilationResult {
    LinearReservoirSystem system;
    std::size_t horizon = 0;  // N
    double tail_bound = 0.0;  // value of the tail inequality at N
    ComplexMatrix back_map;   // J^*: maps dilated states onto original ones
};

// Same construction with the horizon forced; used by the empirical pipeline
// mode, which shrinks N below the analytic choice.
inline DilationResult dilate_system_with_horizon(const LinearReservoirSystem& r, std::size_t horizon,
                                                 double bound_m,
                                                 std::size_t max_dim = kDefaultMaxStateDim) {
    const double lambda = r.lambda;
    if (!(lambda > 0.0)) throw InputError("dilate_system: coupling norm must be positive");
    if (lambda >= 1.0 - 1e-12) {
        throw InputError("dilate_system: coupling norm is within 1e-12 of 1; not a usable contraction");
    }
    const std::size_t n = r.state_dim();
    const std::size_t dim = (horizon + 1) * n;
    if (dim > max_dim) {
        throw ResourceError("dilate_system: dilation would need state dimension " + std::to_string(dim),
                            dim);
    }

    const ComplexMatrix u = egervary_unitary(Complex(1.0 / lambda, 0.0) * r.w, horizon);
    ComplexMatrix w_new = Complex(lambda, 0.0) * u;
    ComplexMatrix v_new = vstack(r.v, ComplexMatrix::zero(dim - n, r.input_dim()));

    // Projection onto the first n coordinates.
    ComplexMatrix proj(n, dim);
    for (std::size_t i = 0; i < n; ++i) proj(i, i) = Complex(1.0, 0.0);

    DilationResult out;
    out.horizon = horizon;
    out.tail_bound = truncation_tail_bound(lambda, operator_norm(r.v), bound_m, horizon);
    out.system = make_system_with_norm(std::move(w_new), std::move(v_new),
                                       r.readout.compose_linear(proj), lambda);
    out.back_map = std::move(proj);
    return out;
}

// Replaces (W, V, h) by (lambda U, [V; 0], h o J^*) with U the horizon-N
// dilation of W / lambda. The projection of the new states onto the first n
// coordinates stays within delta of the original states on every stream
// bounded by M.
inline DilationResult dilate_system(const LinearReservoirSystem& r, double delta, double bound_m,
                                    std::size_t max_dim = kDefaultMaxStateDim) {
    const double lambda = r.lambda;
    if (!(lambda > 0.0)) throw InputError("dilate_system: coupling norm must be positive");
    if (lambda >= 1.0 - 1e-12) {
        throw InputError("dilate_system: coupling norm is within 1e-12 of 1; not a usable contraction");
    }
    const std::size_t horizon = choose_dilation_horizon(lambda, operator_norm(r.v), bound_m, delta);
    return dilate_system_with_horizon(r, horizon, bound_m, max_dim);
}

} // namespace scrkit
