#pragma once

// Second approximation stage: perturb a unitary coupling so its spectrum
// becomes a complete set of roots of unity, which makes it unitarily
// equivalent to a full-cycle permutation, then realise that equivalence by
// an explicit similarity onto the canonical cyclic shift.
//
// Outline for a unitary U of size n and tolerance delta:
//   1. pick the smallest grid factor ell0 with |1 - e^{i pi / ell0}| < delta
//      and set n1 = ell0 * n;
//   2. round each eigenvalue angle a_j to a distinct grid fraction b_j / n1
//      with |a_j - b_j / n1| <= 1/(2 ell0), giving U1 with ||U - U1|| < delta;
//   3. append the diagonal of the unused roots of unity, so A = diag(U1, D)
//      has spectrum exactly the n1-th roots of unity;
//   4. build the unitary S2 matching A's eigenvectors (ordered by eigenvalue
//      angle, phases fixed) to the Fourier eigenvectors of the cyclic shift
//      P, so that S2 A S2^* = P.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "scrkit/complex_matrix.hpp"
#include "scrkit/dilation.hpp"
#include "scrkit/errors.hpp"
#include "scrkit/linalg.hpp"
#include "scrkit/permutation.hpp"
#include "scrkit/reservoir.hpp"

namespace scrkit {

// Chord length |1 - e^{i pi / ell}| = 2 sin(pi / (2 ell)).
inline double half_step_chord(std::size_t ell) {
    return 2.0 * std::sin(std::numbers::pi / (2.0 * static_cast<double>(ell)));
}

// Smallest ell0 >= 1 with |1 - e^{i pi / ell0}| < delta. The comparison
// carries a few-ulp margin so that chords which are exactly delta in exact
// arithmetic (e.g. delta = 1 against ell0 = 3) are rejected as the strict
// inequality demands, instead of slipping through rounding.
inline std::size_t choose_ell0(double delta) {
    if (!(delta > 0.0)) throw InputError("choose_ell0: delta must be positive");
    const double margin = 4.0 * std::numeric_limits<double>::epsilon() * delta;
    std::size_t ell = 1;
    while (!(half_step_chord(ell) < delta - margin)) {
        ++ell;
        if (ell > 100000000) {
            throw InputError("choose_ell0: grid factor exceeds 1e8; delta too small");
        }
    }
    return ell;
}

// Distinct integers b_j (mod n1 = ell0 * n), one per input angle, with
// |a_j - b_j / n1| <= 1/(2 ell0) in the circular metric.
struct RootAssignment {
    std::size_t ell0 = 0;
    std::size_t n1 = 0;
    std::vector<std::size_t> b; // aligned with the input angle order
};

// Greedy assignment: process angles in sorted order; each takes the nearest
// free grid point inside its closed window, scanning outward on collision.
// Every window holds at least n distinct grid residues, so with at most
// n - 1 points already taken the scan always succeeds.
inline RootAssignment assign_distinct_roots(const std::vector<double>& angles, std::size_t ell0) {
    if (ell0 < 1) throw InputError("assign_distinct_roots: ell0 must be >= 1");
    const std::size_t n = angles.size();
    const std::size_t n1 = ell0 * n;
    for (double a : angles) {
        if (!(a >= 0.0) || a >= 1.0) {
            throw InputError("assign_distinct_roots: angles must lie in [0, 1)");
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return angles[a] < angles[b]; });

    const double half_width = static_cast<double>(n) / 2.0 + 1e-9;
    std::vector<bool> taken(n1, false);
    std::vector<std::size_t> b(n, 0);
    for (std::size_t idx : order) {
        const double center = angles[idx] * static_cast<double>(n1);
        const long long nearest = static_cast<long long>(std::floor(center + 0.5));
        bool placed = false;
        for (long long dist = 0; dist <= static_cast<long long>(n) && !placed; ++dist) {
            for (const long long candidate : {nearest - dist, nearest + dist}) {
                if (std::abs(center - static_cast<double>(candidate)) > half_width) continue;
                const std::size_t residue =
                    static_cast<std::size_t>(((candidate % static_cast<long long>(n1)) +
                                              static_cast<long long>(n1)) %
                                             static_cast<long long>(n1));
                if (!taken[residue]) {
                    taken[residue] = true;
                    b[idx] = residue;
                    placed = true;
                    break;
                }
                if (dist == 0) break;
            }
        }
        if (!placed) {
            throw Error("assign_distinct_roots: no free grid point in window (unreachable)");
        }
    }

    RootAssignment out;
    out.ell0 = ell0;
    out.n1 = n1;
    out.b = std::move(b);
    return out;
}

struct CyclePerturbation {
    ComplexMatrix a;           // n1 x n1, spectrum = all n1-th roots of unity
    ComplexMatrix d_fill;      // (n1 - n) x (n1 - n) diagonal of missing roots
    ComplexMatrix s2;          // unitary with S2 A S2^* = matrix of p
    PermutationSpec p;         // canonical cyclic shift of size n1
    RootAssignment assignment;
    double perturbation_norm = 0.0; // ||A - diag(U, d_fill)||
};

// Same construction with the grid factor forced; used by the empirical mode
// which shrinks ell0 below the analytic choice.
inline CyclePerturbation perturb_to_cycle_with_grid(const ComplexMatrix& u, std::size_t ell0) {
    const SpectralDecomposition spec = unitary_spectral(u); // validates unitarity
    const std::size_t n = u.rows();

    std::vector<double> angles(n);
    for (std::size_t j = 0; j < n; ++j) {
        angles[j] = detail::principal_angle(spec.omega[j]) / (2.0 * std::numbers::pi);
        if (angles[j] >= 1.0) angles[j] = 0.0; // guard arg rounding at 2 pi
    }
    RootAssignment assignment = assign_distinct_roots(angles, ell0);
    const std::size_t n1 = assignment.n1;

    const auto grid_root = [n1](std::size_t b) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(b) / static_cast<double>(n1);
        return Complex(std::cos(theta), std::sin(theta));
    };

    // U1 = S^* D1 S with the rounded spectrum.
    ComplexVector rounded(n);
    for (std::size_t j = 0; j < n; ++j) rounded[j] = grid_root(assignment.b[j]);
    const ComplexMatrix s_adj = spec.s.adjoint();
    const ComplexMatrix u1 = s_adj * ComplexMatrix::diagonal(rounded) * spec.s;

    std::vector<bool> used(n1, false);
    for (std::size_t bj : assignment.b) used[bj] = true;
    std::vector<std::size_t> missing;
    for (std::size_t bb = 0; bb < n1; ++bb) {
        if (!used[bb]) missing.push_back(bb);
    }
    ComplexVector fill(missing.size());
    for (std::size_t t = 0; t < missing.size(); ++t) fill[t] = grid_root(missing[t]);

    CyclePerturbation out;
    out.assignment = assignment;
    out.d_fill = ComplexMatrix::diagonal(fill);
    out.a = block_diag(u1, out.d_fill);
    out.p = cyclic_shift_permutation(n1);
    out.perturbation_norm = operator_norm(u1 - u);

    // Eigenvector of A for root b_j is column j of S^* padded with zeros;
    // for a missing root it is the corresponding tail basis vector. Pairing
    // them with the Fourier eigenvectors of the shift, ordered by root,
    // gives S2 = sum_b w_b u_b^*, assembled as a single matrix product.
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // (root b, column source)
    for (std::size_t j = 0; j < n; ++j) pairs.emplace_back(assignment.b[j], j);
    for (std::size_t t = 0; t < missing.size(); ++t) pairs.emplace_back(missing[t], n + t);
    std::sort(pairs.begin(), pairs.end());

    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(n1));
    const Eigen::MatrixXcd s_adj_e = to_eigen(s_adj);
    Eigen::MatrixXcd fourier(n1, n1);    // column k: w for the k-th paired root
    Eigen::MatrixXcd eigvecs(n1, n1);    // column k: matching eigenvector of A
    eigvecs.setZero();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [root_b, source] = pairs[k];
        if (source < n) {
            eigvecs.block(0, static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n), 1) =
                s_adj_e.col(static_cast<Eigen::Index>(source));
        } else {
            eigvecs(static_cast<Eigen::Index>(source), static_cast<Eigen::Index>(k)) = Complex(1.0, 0.0);
        }
        // Fourier eigenvector of the shift for this root: w_r = root^{-r} / sqrt(n1).
        for (std::size_t row = 0; row < n1; ++row) {
            const double theta = -2.0 * std::numbers::pi * static_cast<double>(root_b) *
                                 static_cast<double>(row) / static_cast<double>(n1);
            fourier(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k)) =
                Complex(inv_sqrt * std::cos(theta), inv_sqrt * std::sin(theta));
        }
    }
    out.s2 = from_eigen(fourier * eigvecs.adjoint());
    return out;
}

// Rounds the spectrum of a unitary onto the coarsest roots-of-unity grid
// admissible for delta. ||A - diag(U, D)|| < delta is guaranteed.
inline CyclePerturbation perturb_to_cycle(const ComplexMatrix& u, double delta) {
    return perturb_to_cycle_with_grid(u, choose_ell0(delta));
}

// A delta0 > 0 with M ||V|| sum_{k=0}^{N} ((lambda + delta0)^k - lambda^k)
// < delta / 2, located by bisection and returned with a 1e-12 slack so the
// inequality holds strictly. Capped at 1.0.
inline double choose_delta0(double lambda, std::size_t horizon, double bound_m, double norm_v,
                            double delta) {
    if (!(lambda > 0.0) || lambda >= 1.0) throw InputError("choose_delta0: lambda must lie in (0, 1)");
    if (!(delta > 0.0)) throw InputError("choose_delta0: delta must be positive");
    if (truncation_tail_bound(lambda, norm_v, bound_m, horizon) >= delta / 2.0) {
        throw PreconditionError("choose_delta0: tail condition fails at the supplied horizon");
    }
    if (bound_m * norm_v == 0.0) return 1.0;

    const auto finite_sum = [&](double d0) {
        double acc = 0.0;
        double pow_pert = 1.0, pow_lam = 1.0;
        for (std::size_t k = 0; k <= horizon; ++k) {
            acc += pow_pert - pow_lam;
            pow_pert *= lambda + d0;
            pow_lam *= lambda;
        }
        return bound_m * norm_v * acc;
    };

    const double target = delta / 2.0 - 1e-12;
    if (!(target > 0.0)) {
        throw PreconditionError("choose_delta0: delta is below the 1e-12 safety margin");
    }
    if (finite_sum(1.0) < target) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (finite_sum(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (!(lo > 0.0)) throw PreconditionError("choose_delta0: bisection collapsed to zero");
    return lo;
}

struct CyclizationResult {
    LinearReservoirSystem system; // (lambda P, S2 [V; 0], h o proj o S2^*)
    std::size_t ell0 = 0;
    std::size_t n1 = 0;
    std::size_t tail_horizon = 0;   // N of the delta/2 tail condition
    double delta0 = 0.0;            // 0 when the grid factor was forced
    double perturbation_norm = 0.0; // ||A - diag(U, D)||
    ComplexMatrix back_map;         // Q_n S2^*: maps cyclized states onto input ones
};

namespace detail {

inline CyclizationResult cyclize_with_grid(const LinearReservoirSystem& r_u, std::size_t ell0,
                                           std::size_t max_dim) {
    const double lambda = r_u.lambda;
    if (!(lambda > 0.0) || lambda >= 1.0) {
        throw InputError("cyclize_system: coupling norm must lie in (0, 1)");
    }
    const std::size_t n = r_u.state_dim();
    const std::size_t n1 = ell0 * n;
    if (n1 > max_dim) {
        throw ResourceError("cyclize_system: cyclization would need state dimension " +
                                std::to_string(n1),
                            n1);
    }
    const ComplexMatrix u = Complex(1.0 / lambda, 0.0) * r_u.w;
    CyclePerturbation pert = perturb_to_cycle_with_grid(u, ell0);

    ComplexMatrix w_c = Complex(lambda, 0.0) * permutation_matrix(pert.p);
    const ComplexMatrix v0 = vstack(r_u.v, ComplexMatrix::zero(n1 - n, r_u.input_dim()));
    ComplexMatrix v_c = pert.s2 * v0;
    // h_c(x) = h(Q_n(S2^* x)): the first n rows of S2^* feed the old readout.
    const ComplexMatrix t = pert.s2.adjoint().block(0, 0, n, n1);

    CyclizationResult out;
    out.ell0 = ell0;
    out.n1 = n1;
    out.perturbation_norm = pert.perturbation_norm;
    out.system = make_system_with_norm(std::move(w_c), std::move(v_c),
                                       r_u.readout.compose_linear(t), lambda);
    out.back_map = t;
    return out;
}

} // namespace detail

// Full second stage for a system with W = lambda U, U unitary: choose the
// tail horizon N for delta/2, the matching delta0, round the spectrum on the
// grid admissible for min(delta, delta0) / lambda, and realise the result as
// an actual scaled cyclic shift. The output deviates from the input by less
// than delta at state level (through the readout's projection) on every
// M-bounded stream.
inline CyclizationResult cyclize_system(const LinearReservoirSystem& r_u, double delta, double bound_m,
                                        std::size_t max_dim = kDefaultMaxStateDim) {
    if (!(delta > 0.0)) throw InputError("cyclize_system: delta must be positive");
    const double lambda = r_u.lambda;
    if (!(lambda > 0.0) || lambda >= 1.0) {
        throw InputError("cyclize_system: coupling norm must lie in (0, 1)");
    }
    const double norm_v = operator_norm(r_u.v);
    const std::size_t tail_horizon = choose_dilation_horizon(lambda, norm_v, bound_m, delta / 2.0);
    const double delta0 = choose_delta0(lambda, tail_horizon, bound_m, norm_v, delta);
    const double grid_delta = std::min(delta, delta0) / lambda;

    CyclizationResult out = detail::cyclize_with_grid(r_u, choose_ell0(grid_delta), max_dim);
    out.tail_horizon = tail_horizon;
    out.delta0 = delta0;
    return out;
}

} // namespace scrkit
