#pragma once

// Terminal constructions on systems whose coupling is already a scaled
// full-cycle permutation W = lambda P:
//
//   * build_smcr:     exact re-expression as nm identical cycle blocks with
//                     a +/-1 input map (sign-basis expansion of V);
//   * rationalize_*:  V ~ (1/N) sum of k unit-entry sign matrices with
//                     gcd(k, n) = 1;
//   * block_cycle:    the nk x nk block arrangement of P that stays a single
//                     cycle when gcd(n, k) = 1;
//   * build_cscr:     epsilon-close single-cycle reservoir with V entries in
//                     {+,-1, +,-i};
//   * build_twin_scr: epsilon-close pair of cycle blocks with real +/-1
//                     input entries, real and imaginary parts split across
//                     the two blocks.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "scrkit/complex_matrix.hpp"
#include "scrkit/dilation.hpp"
#include "scrkit/errors.hpp"
#include "scrkit/linalg.hpp"
#include "scrkit/permutation.hpp"
#include "scrkit/reservoir.hpp"

namespace scrkit {

// Basis of the n x m matrix space in which every element has entries
// exactly +1 or -1. Construction:
//   nm = 1: {[1]};  nm = 2: the two Hadamard rows, reshaped;
//   else:   {J - 2 unit_k} with J the all-ones matrix, which is a basis
//           exactly when nm != 2 and admits a closed-form expansion.
struct SignBasis {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<ComplexMatrix> elements;
    double max_norm = 0.0; // L = max ||E_i||

    std::size_t size() const noexcept { return elements.size(); }
};

inline SignBasis sign_basis(std::size_t n, std::size_t m) {
    if (n < 1 || m < 1) throw InputError("sign_basis: dimensions must be positive");
    const std::size_t nm = n * m;
    SignBasis basis;
    basis.n = n;
    basis.m = m;
    basis.elements.reserve(nm);
    const auto reshape = [n, m](const std::vector<double>& flat) {
        ComplexMatrix e(n, m);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) e(i, j) = Complex(flat[i * m + j], 0.0);
        return e;
    };
    if (nm == 1) {
        basis.elements.push_back(reshape({1.0}));
    } else if (nm == 2) {
        basis.elements.push_back(reshape({1.0, 1.0}));
        basis.elements.push_back(reshape({1.0, -1.0}));
    } else {
        for (std::size_t k = 0; k < nm; ++k) {
            std::vector<double> flat(nm, 1.0);
            flat[k] = -1.0;
            basis.elements.push_back(reshape(flat));
        }
    }
    for (const ComplexMatrix& e : basis.elements) {
        basis.max_norm = std::max(basis.max_norm, operator_norm(e));
    }
    return basis;
}

// Coefficients a with V = sum a_i E_i, via the closed forms of the three
// basis cases (exact up to one rounding per entry).
inline ComplexVector expand_in_basis(const ComplexMatrix& v, const SignBasis& basis) {
    if (v.rows() != basis.n || v.cols() != basis.m) {
        throw InputError("expand_in_basis: dimensions disagree with basis");
    }
    const std::size_t nm = basis.n * basis.m;
    const std::vector<Complex>& flat = v.entries(); // row-major
    ComplexVector a(nm);
    if (nm == 1) {
        a[0] = flat[0];
    } else if (nm == 2) {
        a[0] = 0.5 * (flat[0] + flat[1]);
        a[1] = 0.5 * (flat[0] - flat[1]);
    } else {
        Complex total(0.0, 0.0);
        for (const Complex& z : flat) total += z;
        const Complex s = total / Complex(static_cast<double>(nm) - 2.0, 0.0);
        for (std::size_t k = 0; k < nm; ++k) a[k] = 0.5 * (s - flat[k]);
    }
    return a;
}

// V ~ (1/N) (F_1 + ... + F_k) with every F_j a +/-1 matrix (or i times one,
// in the complex variant) and gcd(k, n) = 1.
struct Rationalization {
    std::size_t denominator = 0; // N
    std::vector<ComplexMatrix> factors;
    std::size_t k = 0;
    double residual = 0.0; // ||V - (1/N) sum F_j||
};

namespace detail {

// Half-way values round toward zero so the integer choice is deterministic.
inline long long round_half_toward_zero(double x) {
    return static_cast<long long>(x >= 0.0 ? std::ceil(x - 0.5) : std::floor(x + 0.5));
}

inline std::size_t smallest_coprime_at_least(std::size_t k0, std::size_t n) {
    std::size_t k = std::max<std::size_t>(k0, 1);
    while (std::gcd(k, n) != 1) ++k;
    return k;
}

// Shared assembly: round N * a for the real part (and the imaginary part in
// complex mode), emit |b_i| signed copies of each E_i, pad with copies of
// E_1 until k is coprime to n.
inline Rationalization assemble_rationalization(const ComplexMatrix& v, const SignBasis& basis,
                                                std::size_t denom, bool complex_mode) {
    const ComplexVector a = expand_in_basis(v, basis);
    const std::size_t nm = basis.size();
    std::vector<long long> b_re(nm), b_im(nm, 0);
    for (std::size_t i = 0; i < nm; ++i) {
        b_re[i] = round_half_toward_zero(static_cast<double>(denom) * a[i].real());
        if (complex_mode) {
            b_im[i] = round_half_toward_zero(static_cast<double>(denom) * a[i].imag());
        }
    }
    std::size_t k0 = 0;
    for (std::size_t i = 0; i < nm; ++i) {
        k0 += static_cast<std::size_t>(std::llabs(b_re[i]) + std::llabs(b_im[i]));
    }
    const std::size_t k = smallest_coprime_at_least(k0, basis.n);

    Rationalization out;
    out.denominator = denom;
    out.k = k;
    out.factors.reserve(k);
    for (std::size_t i = 0; i < nm; ++i) {
        const double sign = b_re[i] >= 0 ? 1.0 : -1.0;
        for (long long c = 0; c < std::llabs(b_re[i]); ++c) {
            out.factors.push_back(Complex(sign, 0.0) * basis.elements[i]);
        }
    }
    for (std::size_t i = 0; i < nm; ++i) {
        const double sign = b_im[i] >= 0 ? 1.0 : -1.0;
        for (long long c = 0; c < std::llabs(b_im[i]); ++c) {
            out.factors.push_back(Complex(0.0, sign) * basis.elements[i]);
        }
    }
    for (std::size_t c = k0; c < k; ++c) out.factors.push_back(basis.elements[0]);

    ComplexMatrix sum = ComplexMatrix::zero(basis.n, basis.m);
    for (const ComplexMatrix& f : out.factors) sum = sum + f;
    out.residual = operator_norm(v - Complex(1.0 / static_cast<double>(denom), 0.0) * sum);
    return out;
}

inline std::size_t rationalization_denominator(const SignBasis& basis, double delta) {
    if (!(delta > 0.0)) throw InputError("rationalize: delta must be positive");
    const double nm = static_cast<double>(basis.size());
    // Smallest integer N with nm / N < delta / (2 L).
    const double threshold = 2.0 * basis.max_norm * nm / delta;
    return static_cast<std::size_t>(std::floor(threshold)) + 1;
}

} // namespace detail

// Real rationalization recipe: N from nm/N < delta/(2L),
// b_i = round(N a_i), k_0 = sum |b_i|, k the next integer coprime to n,
// padding with copies of E_1.
inline Rationalization rationalize_real(const ComplexMatrix& v, double delta) {
    for (const Complex& z : v.entries()) {
        if (z.imag() != 0.0) throw InputError("rationalize_real: V has imaginary entries");
    }
    const SignBasis basis = sign_basis(v.rows(), v.cols());
    const std::size_t denom = detail::rationalization_denominator(basis, delta);
    Rationalization out = detail::assemble_rationalization(v, basis, denom, false);
    if (out.residual >= delta) {
        throw Error("rationalize_real: residual bound violated (internal)");
    }
    return out;
}

// Complex variant: the real recipe applied to the real and imaginary parts
// with delta/2 each (they share the same denominator by construction), the
// imaginary factor copies multiplied by i, and a single final padding to a
// k coprime to n.
inline Rationalization rationalize_complex(const ComplexMatrix& v, double delta) {
    const SignBasis basis = sign_basis(v.rows(), v.cols());
    const std::size_t denom = detail::rationalization_denominator(basis, delta / 2.0);
    Rationalization out = detail::assemble_rationalization(v, basis, denom, true);
    if (out.residual >= delta) {
        throw Error("rationalize_complex: residual bound violated (internal)");
    }
    return out;
}

// Block arrangement of k copies of P on the subdiagonal with P in the
// top-right corner. No coprimality gate: callers that want the guarantee use
// block_cycle.
inline PermutationSpec block_cycle_layout(const PermutationSpec& p, std::size_t k) {
    if (k < 1) throw InputError("block_cycle_layout: k must be >= 1");
    const std::size_t n = p.size();
    std::vector<std::size_t> image(n * k);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t target_block = (j + k - 1) % k;
        for (std::size_t r = 0; r < n; ++r) {
            image[j * n + r] = target_block * n + p.image[r];
        }
    }
    return PermutationSpec(std::move(image));
}

// The nk x nk full-cycle permutation built from a full-cycle P; requires
// gcd(n, k) = 1, otherwise the arrangement splits into several cycles.
inline PermutationSpec block_cycle(const PermutationSpec& p, std::size_t k) {
    if (!is_full_cycle(p)) throw PreconditionError("block_cycle: P is not a full-cycle permutation");
    if (std::gcd(p.size(), k) != 1) {
        throw PreconditionError("block_cycle: gcd(n, k) != 1; result would not be a full cycle");
    }
    return block_cycle_layout(p, k);
}

namespace detail {

struct ScaledCycle {
    double lambda = 0.0;
    PermutationSpec p;
};

inline ScaledCycle require_scaled_full_cycle(const LinearReservoirSystem& r, const char* who) {
    ScaledCycle out;
    std::string problem;
    if (!try_scaled_permutation(r.w, out.lambda, out.p, problem)) {
        throw PreconditionError(std::string(who) + ": W is not a scaled permutation (" + problem + ")");
    }
    if (!is_full_cycle(out.p)) {
        throw PreconditionError(std::string(who) + ": W is not a scaled full-cycle permutation");
    }
    if (out.lambda >= 1.0) {
        throw PreconditionError(std::string(who) + ": W is not contractive");
    }
    return out;
}

// d x (d * count) tile [c_1 I, c_2 I, ..., c_count I].
inline ComplexMatrix mixing_map(const ComplexVector& coeffs, std::size_t dim) {
    ComplexMatrix t(dim, dim * coeffs.size());
    for (std::size_t b = 0; b < coeffs.size(); ++b) {
        for (std::size_t i = 0; i < dim; ++i) t(i, b * dim + i) = coeffs[b];
    }
    return t;
}

} // namespace detail

struct SmcrResult {
    LinearReservoirSystem system;
    ComplexVector coefficients; // sign-basis expansion of V
    ComplexMatrix back_map;     // mixing map: combined states reproduce the input system's
};

// Exact reconstruction as a Simple Multi-Cycle Reservoir: nm identical
// blocks of W, V' stacking the sign basis, readout mixing with the expansion
// coefficients. Output streams agree with the input system's exactly.
inline SmcrResult build_smcr(const LinearReservoirSystem& r,
                             std::size_t max_dim = kDefaultMaxStateDim) {
    const detail::ScaledCycle cycle = detail::require_scaled_full_cycle(r, "build_smcr");
    const std::size_t n = r.state_dim();
    const std::size_t m = r.input_dim();
    const std::size_t nm = n * m;
    const std::size_t dim = n * nm;
    if (dim > max_dim) {
        throw ResourceError("build_smcr: construction would need state dimension " + std::to_string(dim),
                            dim);
    }
    const SignBasis basis = sign_basis(n, m);
    ComplexVector coeffs = expand_in_basis(r.v, basis);

    ComplexMatrix w_new(dim, dim);
    ComplexMatrix v_new(dim, m);
    for (std::size_t b = 0; b < nm; ++b) {
        w_new.set_block(b * n, b * n, r.w);
        v_new.set_block(b * n, 0, basis.elements[b]);
    }
    ComplexMatrix mix = detail::mixing_map(coeffs, n);
    Readout h_new = r.readout.compose_linear(mix);

    SmcrResult out;
    out.system = make_system_with_norm(std::move(w_new), std::move(v_new), std::move(h_new), cycle.lambda);
    out.coefficients = std::move(coeffs);
    out.back_map = std::move(mix);
    return out;
}

namespace detail {

// Converts the caller's output tolerance into a state tolerance through the
// readout's Lipschitz constant on the reachable-state ball.
inline double state_delta_for(const LinearReservoirSystem& r, double epsilon, double bound_m,
                              const std::optional<double>& delta_override) {
    if (delta_override) {
        if (!(*delta_override > 0.0)) throw InputError("state delta override must be positive");
        return *delta_override;
    }
    const double lip = lipschitz_on_ball(r.readout, state_radius(r, bound_m));
    if (lip == 0.0) return 1.0; // constant readout: any state perturbation is invisible
    return epsilon / lip;
}

} // namespace detail

struct CscrResult {
    LinearReservoirSystem system;
    Rationalization rationalization;
    double state_delta = 0.0;
    ComplexMatrix back_map; // (1/N) block averaging map
};

namespace detail {

inline CscrResult build_cscr_from_rationalization(const LinearReservoirSystem& r,
                                                  const ScaledCycle& cycle, Rationalization rat,
                                                  double state_delta, std::size_t max_dim) {
    const std::size_t n = r.state_dim();
    const std::size_t dim = n * rat.k;
    if (dim > max_dim) {
        throw ResourceError("build_cscr: construction would need state dimension " + std::to_string(dim),
                            dim);
    }
    const PermutationSpec p1 = block_cycle(cycle.p, rat.k);
    ComplexMatrix w_new = Complex(cycle.lambda, 0.0) * permutation_matrix(p1);
    ComplexMatrix v_new(dim, r.input_dim());
    for (std::size_t j = 0; j < rat.k; ++j) v_new.set_block(j * n, 0, rat.factors[j]);
    const double inv_denom = 1.0 / static_cast<double>(rat.denominator);
    ComplexMatrix mix = mixing_map(ComplexVector(rat.k, Complex(inv_denom, 0.0)), n);
    Readout h_new = r.readout.compose_linear(mix);

    CscrResult out;
    out.system = make_system_with_norm(std::move(w_new), std::move(v_new), std::move(h_new), cycle.lambda);
    out.rationalization = std::move(rat);
    out.state_delta = state_delta;
    out.back_map = std::move(mix);
    return out;
}

} // namespace detail

// epsilon-close Complex Simple Cycle Reservoir for a system with W = lambda P,
// P full-cycle: rationalize V with tolerance (1 - lambda) delta / M, arrange
// k copies of P into the nk-cycle, stack the factors as V', and average the
// k block states in front of the readout.
inline CscrResult build_cscr(const LinearReservoirSystem& r, double epsilon, double bound_m,
                             std::optional<double> delta_override = std::nullopt,
                             std::size_t max_dim = kDefaultMaxStateDim) {
    const detail::ScaledCycle cycle = detail::require_scaled_full_cycle(r, "build_cscr");
    const double delta = detail::state_delta_for(r, epsilon, bound_m, delta_override);
    const double rat_delta = (1.0 - cycle.lambda) * delta / bound_m;
    Rationalization rat = rationalize_complex(r.v, rat_delta);
    return detail::build_cscr_from_rationalization(r, cycle, std::move(rat), delta, max_dim);
}

struct TwinScrResult {
    LinearReservoirSystem system;
    Rationalization real_part;
    Rationalization imag_part;
    double state_delta = 0.0;
    ComplexMatrix back_map; // (1/N_r) real-block average plus (i/N_i) imaginary-block average
};

namespace detail {

inline TwinScrResult build_twin_from_rationalizations(const LinearReservoirSystem& r,
                                                      const ScaledCycle& cycle, Rationalization rat_re,
                                                      Rationalization rat_im, double state_delta,
                                                      std::size_t max_dim) {
    const std::size_t n = r.state_dim();
    const std::size_t dim = n * (rat_re.k + rat_im.k);
    if (dim > max_dim) {
        throw ResourceError("build_twin_scr: construction would need state dimension " +
                                std::to_string(dim),
                            dim);
    }
    const ComplexMatrix p_r = permutation_matrix(block_cycle(cycle.p, rat_re.k));
    const ComplexMatrix p_i = permutation_matrix(block_cycle(cycle.p, rat_im.k));
    ComplexMatrix w_new = Complex(cycle.lambda, 0.0) * block_diag(p_r, p_i);
    ComplexMatrix v_new(dim, r.input_dim());
    for (std::size_t j = 0; j < rat_re.k; ++j) v_new.set_block(j * n, 0, rat_re.factors[j]);
    for (std::size_t j = 0; j < rat_im.k; ++j) {
        v_new.set_block((rat_re.k + j) * n, 0, rat_im.factors[j]);
    }
    // Readout mixes (1/N_r) sum of the first k_r blocks plus (i/N_i) times
    // the sum of the remaining k_i blocks.
    ComplexVector coeffs(rat_re.k + rat_im.k);
    for (std::size_t j = 0; j < rat_re.k; ++j) {
        coeffs[j] = Complex(1.0 / static_cast<double>(rat_re.denominator), 0.0);
    }
    for (std::size_t j = 0; j < rat_im.k; ++j) {
        coeffs[rat_re.k + j] = Complex(0.0, 1.0 / static_cast<double>(rat_im.denominator));
    }
    ComplexMatrix mix = mixing_map(coeffs, n);
    Readout h_new = r.readout.compose_linear(mix);

    TwinScrResult out;
    out.system = make_system_with_norm(std::move(w_new), std::move(v_new), std::move(h_new), cycle.lambda);
    out.real_part = std::move(rat_re);
    out.imag_part = std::move(rat_im);
    out.state_delta = state_delta;
    out.back_map = std::move(mix);
    return out;
}

} // namespace detail

// epsilon-close Twin Simple Cycle Reservoir: the real recipe applied to
// Re(V) and Im(V) with (1 - lambda) delta / (2 M) each, one cycle block per
// part, all V' entries real +/-1.
inline TwinScrResult build_twin_scr(const LinearReservoirSystem& r, double epsilon, double bound_m,
                                    std::optional<double> delta_override = std::nullopt,
                                    std::size_t max_dim = kDefaultMaxStateDim) {
    const detail::ScaledCycle cycle = detail::require_scaled_full_cycle(r, "build_twin_scr");
    const double delta = detail::state_delta_for(r, epsilon, bound_m, delta_override);
    const double rat_delta = (1.0 - cycle.lambda) * delta / (2.0 * bound_m);

    ComplexMatrix v_re(r.v.rows(), r.v.cols());
    ComplexMatrix v_im(r.v.rows(), r.v.cols());
    for (std::size_t i = 0; i < r.v.rows(); ++i) {
        for (std::size_t j = 0; j < r.v.cols(); ++j) {
            v_re(i, j) = Complex(r.v(i, j).real(), 0.0);
            v_im(i, j) = Complex(r.v(i, j).imag(), 0.0);
        }
    }
    Rationalization rat_re = rationalize_real(v_re, rat_delta);
    Rationalization rat_im = rationalize_real(v_im, rat_delta);
    return detail::build_twin_from_rationalizations(r, cycle, std::move(rat_re), std::move(rat_im),
                                                    delta, max_dim);
}

} // namespace scrkit
