#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "scrkit/complex_matrix.hpp"
#include "scrkit/errors.hpp"

namespace scrkit {

// A permutation sigma of {0, .., n-1}, stored as its image sequence.
// The matrix form follows the row convention p[i][sigma(i)] = 1, so the
// matrix acts on vectors by (P x)_i = x_{sigma(i)}.
struct PermutationSpec {
    std::vector<std::size_t> image;

    PermutationSpec() = default;

    explicit PermutationSpec(std::vector<std::size_t> img) : image(std::move(img)) {
        std::vector<bool> seen(image.size(), false);
        for (std::size_t v : image) {
            if (v >= image.size() || seen[v]) {
                throw InputError("PermutationSpec: image is not a bijection");
            }
            seen[v] = true;
        }
    }

    std::size_t size() const noexcept { return image.size(); }
};

inline PermutationSpec identity_permutation(std::size_t n) {
    std::vector<std::size_t> img(n);
    for (std::size_t i = 0; i < n; ++i) img[i] = i;
    return PermutationSpec(std::move(img));
}

// Circular shift sending e_j to e_{j+1 mod n}: ones on the subdiagonal plus
// a one in the top-right corner. Used as the canonical full-cycle target.
inline PermutationSpec cyclic_shift_permutation(std::size_t n) {
    std::vector<std::size_t> img(n);
    for (std::size_t i = 0; i < n; ++i) img[i] = (i + n - 1) % n;
    return PermutationSpec(std::move(img));
}

inline ComplexMatrix permutation_matrix(const PermutationSpec& p) {
    ComplexMatrix out(p.size(), p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out(i, p.image[i]) = Complex(1.0, 0.0);
    return out;
}

// Exact inverse of permutation_matrix: entries must be exactly 0 or 1.
inline PermutationSpec permutation_from_matrix(const ComplexMatrix& m) {
    if (!m.is_square()) throw InputError("permutation_from_matrix: matrix not square");
    const std::size_t n = m.rows();
    std::vector<std::size_t> img(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Complex z = m(i, j);
            if (z == Complex(1.0, 0.0)) {
                if (img[i] != n) throw InputError("permutation_from_matrix: duplicate 1 in a row");
                img[i] = j;
            } else if (z != Complex(0.0, 0.0)) {
                throw InputError("permutation_from_matrix: entry is neither exactly 0 nor 1");
            }
        }
        if (img[i] == n) throw InputError("permutation_from_matrix: row without a 1");
    }
    return PermutationSpec(std::move(img));
}

// Length of the orbit of `start` under repeated application of sigma.
inline std::size_t orbit_length(const PermutationSpec& p, std::size_t start) {
    std::size_t cur = p.image[start];
    std::size_t len = 1;
    while (cur != start) {
        cur = p.image[cur];
        ++len;
    }
    return len;
}

// True iff sigma is a single cycle of length n, checked via the orbit of the
// first index.
inline bool is_full_cycle(const PermutationSpec& p) {
    if (p.size() == 0) return false;
    return orbit_length(p, 0) == p.size();
}

// Splits W into lambda * (0/1 pattern) with a single shared positive value;
// the pattern must be bit-exact. Used for structural audits, constructor
// preconditions, and pipeline stage skipping.
inline bool try_scaled_permutation(const ComplexMatrix& w, double& lambda_out,
                                   PermutationSpec& spec_out, std::string& problem) {
    if (!w.is_square()) {
        problem = "W is not square";
        return false;
    }
    double lambda = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i) {
        for (std::size_t j = 0; j < w.cols(); ++j) {
            const Complex z = w(i, j);
            if (z == Complex(0.0, 0.0)) continue;
            if (z.imag() != 0.0 || z.real() <= 0.0) {
                problem = "W has a nonzero entry that is not a positive real";
                return false;
            }
            if (lambda == 0.0) {
                lambda = z.real();
            } else if (z.real() != lambda) {
                problem = "W carries more than one distinct nonzero value";
                return false;
            }
        }
    }
    if (lambda == 0.0) {
        problem = "W is identically zero";
        return false;
    }
    ComplexMatrix pattern(w.rows(), w.cols());
    for (std::size_t i = 0; i < w.rows(); ++i)
        for (std::size_t j = 0; j < w.cols(); ++j)
            pattern(i, j) = (w(i, j) == Complex(0.0, 0.0)) ? Complex(0.0, 0.0) : Complex(1.0, 0.0);
    try {
        spec_out = permutation_from_matrix(pattern);
    } catch (const InputError& e) {
        problem = std::string("W / lambda is not a permutation matrix: ") + e.what();
        return false;
    }
    lambda_out = lambda;
    return true;
}

// Cycle decomposition (each cycle listed from its smallest element, cycles
// ordered by that element). Used by the structural audit to recover block
// layout from a permutation coupling.
inline std::vector<std::vector<std::size_t>> cycle_decomposition(const PermutationSpec& p) {
    std::vector<std::vector<std::size_t>> cycles;
    std::vector<bool> visited(p.size(), false);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (visited[i]) continue;
        std::vector<std::size_t> cyc;
        std::size_t cur = i;
        do {
            visited[cur] = true;
            cyc.push_back(cur);
            cur = p.image[cur];
        } while (cur != i);
        cycles.push_back(std::move(cyc));
    }
    return cycles;
}

} // namespace scrkit
