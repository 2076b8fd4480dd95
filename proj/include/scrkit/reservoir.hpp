#pragma once

// Linear reservoir systems x_t = W x_{t-1} + V c_t, y_t = h(x_t), with a
// strictly contractive coupling W and uniformly bounded inputs. Left-infinite
// streams are represented by finite truncations started from the zero state;
// truncation_tail_bound quantifies what that truncation can hide.

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "scrkit/complex_matrix.hpp"
#include "scrkit/errors.hpp"
#include "scrkit/linalg.hpp"

namespace scrkit {

// Affine readout with optional polynomial terms and an optional pre-composed
// linear domain transform:
//
//   h(x) = linear * z + constant + poly(z),   z = pre_transform * x (if set).
//
// Every construction stage produces "h with linearly transformed domain";
// compose_linear folds the stage's transform into pre_transform so readouts
// stay closed under the whole pipeline.
struct Readout {
    struct PolyTerm {
        std::vector<unsigned> exponents; // one exponent per domain coordinate
        Complex coeff = Complex(0.0, 0.0);
        std::size_t output = 0;

        unsigned degree() const noexcept {
            unsigned d = 0;
            for (unsigned e : exponents) d += e;
            return d;
        }
    };

    std::optional<ComplexMatrix> pre_transform;
    ComplexMatrix linear;   // d x (inner dimension)
    ComplexVector constant; // length d
    std::vector<PolyTerm> poly_terms;

    // Dimension of the state vectors this readout accepts.
    std::size_t domain_dim() const { return pre_transform ? pre_transform->cols() : linear.cols(); }
    std::size_t inner_dim() const { return linear.cols(); }
    std::size_t output_dim() const { return linear.rows(); }

    static Readout identity(std::size_t n) {
        Readout h;
        h.linear = ComplexMatrix::identity(n);
        h.constant.assign(n, Complex(0.0, 0.0));
        return h;
    }

    static Readout linear_map(ComplexMatrix l) {
        Readout h;
        h.constant.assign(l.rows(), Complex(0.0, 0.0));
        h.linear = std::move(l);
        return h;
    }

    void validate() const {
        if (linear.rows() != constant.size()) {
            throw InputError("Readout: constant length disagrees with linear rows");
        }
        if (pre_transform && pre_transform->rows() != linear.cols()) {
            throw InputError("Readout: pre_transform rows disagree with linear cols");
        }
        for (const PolyTerm& term : poly_terms) {
            if (term.exponents.size() != inner_dim()) {
                throw InputError("Readout: poly term exponent count disagrees with domain dimension");
            }
            if (term.output >= output_dim()) {
                throw InputError("Readout: poly term output index out of range");
            }
        }
    }

    ComplexVector evaluate(const ComplexVector& x) const {
        const ComplexVector z = pre_transform ? matvec(*pre_transform, x) : x;
        ComplexVector y = matvec(linear, z);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += constant[i];
        for (const PolyTerm& term : poly_terms) {
            Complex v = term.coeff;
            for (std::size_t j = 0; j < z.size(); ++j) {
                for (unsigned e = 0; e < term.exponents[j]; ++e) v *= z[j];
            }
            y[term.output] += v;
        }
        return y;
    }

    // Readout acting on t-transformed states: returns h' with h'(x) = h(t x).
    Readout compose_linear(const ComplexMatrix& t) const {
        if (t.rows() != domain_dim()) {
            throw InputError("Readout::compose_linear: transform rows disagree with domain");
        }
        Readout out = *this;
        out.pre_transform = pre_transform ? (*pre_transform * t) : t;
        return out;
    }
};

struct LinearReservoirSystem {
    ComplexMatrix w;
    ComplexMatrix v;
    Readout readout;
    double lambda = 0.0; // cached operator norm of w

    std::size_t state_dim() const { return w.rows(); }
    std::size_t input_dim() const { return v.cols(); }
    std::size_t output_dim() const { return readout.output_dim(); }
};

inline LinearReservoirSystem make_system(ComplexMatrix w, ComplexMatrix v, Readout readout) {
    if (!w.is_square()) throw InputError("make_system: W not square");
    if (!w.is_finite() || !v.is_finite()) throw InputError("make_system: non-finite entries");
    if (v.rows() != w.rows()) throw InputError("make_system: V row count disagrees with W");
    readout.validate();
    if (readout.domain_dim() != w.rows()) {
        throw InputError("make_system: readout domain disagrees with state dimension");
    }
    LinearReservoirSystem r;
    r.lambda = operator_norm(w);
    if (r.lambda >= 1.0) throw InputError("make_system: W is not a strict contraction");
    r.w = std::move(w);
    r.v = std::move(v);
    r.readout = std::move(readout);
    return r;
}

// Constructors that scale a known-norm matrix (lambda * unitary, lambda *
// permutation) pass the exact norm instead of re-estimating it.
inline LinearReservoirSystem make_system_with_norm(ComplexMatrix w, ComplexMatrix v, Readout readout,
                                                   double lambda) {
    LinearReservoirSystem r = make_system(std::move(w), std::move(v), std::move(readout));
    r.lambda = lambda;
    return r;
}

// Finite right-truncation of a uniformly bounded left-infinite stream, most
// recent sample last.
struct InputStream {
    std::size_t m = 0;
    double bound = 0.0; // M
    std::vector<ComplexVector> samples;

    std::size_t length() const noexcept { return samples.size(); }
};

inline InputStream make_stream(std::size_t m, double bound, std::vector<ComplexVector> samples) {
    if (bound <= 0.0) throw InputError("make_stream: bound M must be positive");
    for (const ComplexVector& c : samples) {
        if (c.size() != m) throw InputError("make_stream: sample dimension disagrees with m");
        if (vec_norm(c) > bound * (1.0 + 1e-12)) {
            throw InputError("make_stream: sample norm exceeds the bound M");
        }
    }
    InputStream u;
    u.m = m;
    u.bound = bound;
    u.samples = std::move(samples);
    return u;
}

struct SimulationResult {
    std::vector<ComplexVector> states;  // x_1 .. x_L
    std::vector<ComplexVector> outputs; // y_1 .. y_L
};

// Runs the state recursion from x_0 = 0. Pure and deterministic; the matrix
// products go through Eigen so large couplings stay affordable.
inline SimulationResult run(const LinearReservoirSystem& r, const InputStream& u,
                            bool with_outputs = true) {
    if (u.m != r.input_dim()) throw InputError("run: stream dimension disagrees with system");
    const Eigen::MatrixXcd w = to_eigen(r.w);
    const Eigen::MatrixXcd v = to_eigen(r.v);
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(r.state_dim()));
    Eigen::VectorXcd c(static_cast<Eigen::Index>(u.m));

    SimulationResult out;
    out.states.reserve(u.length());
    if (with_outputs) out.outputs.reserve(u.length());
    for (const ComplexVector& sample : u.samples) {
        for (std::size_t j = 0; j < u.m; ++j) c(static_cast<Eigen::Index>(j)) = sample[j];
        x = (w * x + v * c).eval();
        ComplexVector state(r.state_dim());
        for (std::size_t j = 0; j < r.state_dim(); ++j) state[j] = x(static_cast<Eigen::Index>(j));
        if (with_outputs) out.outputs.push_back(r.readout.evaluate(state));
        out.states.push_back(std::move(state));
    }
    return out;
}

// Final state by the closed-form convolution sum
//   x_L = sum_{j=0}^{L-1} W^j V c_{L-j}.
// Deliberately computed power-by-power, as an oracle independent of run().
inline ComplexVector closed_form_state(const LinearReservoirSystem& r, const InputStream& u) {
    if (u.m != r.input_dim()) throw InputError("closed_form_state: stream dimension disagrees with system");
    const std::size_t len = u.length();
    ComplexVector acc(r.state_dim(), Complex(0.0, 0.0));
    ComplexMatrix w_pow = ComplexMatrix::identity(r.state_dim());
    for (std::size_t j = 0; j < len; ++j) {
        const ComplexVector vc = matvec(r.v, u.samples[len - 1 - j]);
        acc = vec_add(acc, matvec(w_pow, vc));
        if (j + 1 < len) w_pow = w_pow * r.w;
    }
    return acc;
}

// Bound on the state error from ignoring inputs older than L steps:
//   2 M ||V|| lambda^{L+1} / (1 - lambda).
inline double truncation_tail_bound(double lambda, double norm_v, double bound_m, std::size_t len) {
    if (!(lambda >= 0.0) || lambda >= 1.0) {
        throw InputError("truncation_tail_bound: lambda must lie in [0, 1)");
    }
    return 2.0 * bound_m * norm_v * std::pow(lambda, static_cast<double>(len) + 1.0) / (1.0 - lambda);
}

// A Lipschitz constant of the readout on the closed 2-norm ball of the given
// radius. Affine part: operator norm of linear composed with pre_transform.
// Polynomial terms: sum of |coeff| * degree * radius^(degree-1), evaluated at
// the transformed radius and chained through ||pre_transform||. Safe upper
// bound, not tight.
inline double lipschitz_on_ball(const Readout& h, double radius) {
    if (radius < 0.0) throw InputError("lipschitz_on_ball: negative radius");
    double pre_gain = 1.0;
    double inner_radius = radius;
    ComplexMatrix affine = h.linear;
    if (h.pre_transform) {
        pre_gain = operator_norm(*h.pre_transform);
        inner_radius = pre_gain * radius;
        affine = h.linear * (*h.pre_transform);
    }
    double lip = operator_norm(affine);
    for (const Readout::PolyTerm& term : h.poly_terms) {
        const unsigned deg = term.degree();
        if (deg == 0) continue;
        lip += std::abs(term.coeff) * static_cast<double>(deg) *
               std::pow(inner_radius, static_cast<double>(deg) - 1.0) * pre_gain;
    }
    return lip;
}

// Radius of the ball that contains every reachable state: M ||V|| / (1 - lambda).
inline double state_radius(const LinearReservoirSystem& r, double bound_m) {
    return bound_m * operator_norm(r.v) / (1.0 - r.lambda);
}

// Equivalent system (S^{-1} W S, S^{-1} V, h o S) for an invertible S whose
// transformed coupling is still a contraction.
inline LinearReservoirSystem similarity_transform(const LinearReservoirSystem& r, const ComplexMatrix& s) {
    if (!s.is_square() || s.rows() != r.state_dim()) {
        throw InputError("similarity_transform: S shape disagrees with state dimension");
    }
    ComplexMatrix w2 = solve(s, r.w * s);
    ComplexMatrix v2 = solve(s, r.v);
    Readout h2 = r.readout.compose_linear(s);
    return make_system(std::move(w2), std::move(v2), std::move(h2));
}

} // namespace scrkit
