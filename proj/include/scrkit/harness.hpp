#pragma once

// Empirical verification: seeded bounded stream generation, epsilon-closeness
// measurement between two systems, and structural audits of the constructed
// reservoir architectures.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "scrkit/complex_matrix.hpp"
#include "scrkit/errors.hpp"
#include "scrkit/permutation.hpp"
#include "scrkit/reservoir.hpp"

namespace scrkit {

// Deterministic double/normal generation on top of mt19937_64. The standard
// distributions are implementation-defined, so the mapping from raw bits to
// doubles is done by hand to keep streams reproducible across toolchains.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : eng_(seed) {}

    // Uniform on [0, 1).
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1].
    double uniform_pos() { return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53; }

    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    Complex normal_complex() {
        const double u1 = uniform_pos();
        const double u2 = uniform01();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        return Complex(rad * std::cos(2.0 * std::numbers::pi * u2),
                       rad * std::sin(2.0 * std::numbers::pi * u2));
    }

private:
    std::mt19937_64 eng_;
};

// Samples drawn uniformly on the radius-M ball of C^m: complex Gaussian
// direction times the ball radius law r = M * u^(1/(2m)).
inline std::vector<InputStream> random_streams(std::size_t m, double bound_m, std::size_t len,
                                               std::size_t count, std::uint64_t seed) {
    if (bound_m <= 0.0) throw InputError("random_streams: bound M must be positive");
    if (m == 0) throw InputError("random_streams: m must be positive");
    SeededRng rng(seed);
    std::vector<InputStream> streams;
    streams.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        std::vector<ComplexVector> samples;
        samples.reserve(len);
        for (std::size_t t = 0; t < len; ++t) {
            ComplexVector c(m);
            for (std::size_t j = 0; j < m; ++j) c[j] = rng.normal_complex();
            double norm = vec_norm(c);
            if (norm == 0.0) {
                c[0] = Complex(1.0, 0.0);
                norm = 1.0;
            }
            const double radius =
                bound_m * std::pow(rng.uniform_pos(), 1.0 / (2.0 * static_cast<double>(m)));
            Complex scale(radius / norm, 0.0);
            for (Complex& z : c) z *= scale;
            // Guard the invariant ||c|| <= M against the last rounding step.
            double out_norm = vec_norm(c);
            while (out_norm > bound_m) {
                const Complex fix(bound_m / out_norm, 0.0);
                for (Complex& z : c) z *= fix;
                out_norm = vec_norm(c);
            }
            samples.push_back(std::move(c));
        }
        streams.push_back(make_stream(m, bound_m, std::move(samples)));
    }
    return streams;
}

struct ClosenessReport {
    std::size_t stream_count = 0;
    std::size_t stream_length = 0;
    double bound_m = 0.0;
    double max_deviation = 0.0;
    std::size_t argmax_stream = 0;
    std::size_t argmax_time = 0; // 1-based step index
    double tail_bound = 0.0;     // combined truncation correction at output level
    double epsilon = 0.0;
    bool pass = false;
};

// Max over streams and time of ||y_t - y'_t||_2, plus a truncation
// correction routed through both readouts' Lipschitz constants, so a pass on
// finite truncations certifies the left-infinite-stream statement.
inline ClosenessReport measure_closeness(const LinearReservoirSystem& r1,
                                         const LinearReservoirSystem& r2,
                                         const std::vector<InputStream>& streams, double epsilon) {
    if (r1.input_dim() != r2.input_dim() || r1.output_dim() != r2.output_dim()) {
        throw InputError("measure_closeness: systems have different interface dimensions");
    }
    ClosenessReport report;
    report.epsilon = epsilon;
    report.stream_count = streams.size();
    for (std::size_t s = 0; s < streams.size(); ++s) {
        const InputStream& u = streams[s];
        report.stream_length = std::max(report.stream_length, u.length());
        report.bound_m = std::max(report.bound_m, u.bound);
        const SimulationResult out1 = run(r1, u);
        const SimulationResult out2 = run(r2, u);
        for (std::size_t t = 0; t < u.length(); ++t) {
            const double dev = vec_norm(vec_sub(out1.outputs[t], out2.outputs[t]));
            if (dev > report.max_deviation) {
                report.max_deviation = dev;
                report.argmax_stream = s;
                report.argmax_time = t + 1;
            }
        }
    }
    if (!streams.empty()) {
        const double m = report.bound_m;
        const std::size_t len = report.stream_length;
        const double tail1 = truncation_tail_bound(r1.lambda, operator_norm(r1.v), m, len);
        const double tail2 = truncation_tail_bound(r2.lambda, operator_norm(r2.v), m, len);
        report.tail_bound = lipschitz_on_ball(r1.readout, state_radius(r1, m)) * tail1 +
                            lipschitz_on_ball(r2.readout, state_radius(r2, m)) * tail2;
    }
    report.pass = report.max_deviation + report.tail_bound < epsilon;
    return report;
}

enum class ArchitectureClaim { scr, cscr, smcr, twin };

inline const char* to_string(ArchitectureClaim claim) {
    switch (claim) {
        case ArchitectureClaim::scr: return "scr";
        case ArchitectureClaim::cscr: return "cscr";
        case ArchitectureClaim::smcr: return "smcr";
        case ArchitectureClaim::twin: return "twin";
    }
    return "?";
}

struct AuditReport {
    ArchitectureClaim claim = ArchitectureClaim::scr;
    bool pass = false;
    double lambda = 0.0;                  // common nonzero entry value of W
    std::vector<std::size_t> block_sizes; // contiguous full-cycle blocks found
    std::vector<std::string> violations;
};

// Entrywise structural verification of a claimed architecture: W must be
// exactly lambda times the claimed permutation shape, V entries must come
// from the claimed alphabet, and block identity is checked where claimed.
inline AuditReport structural_audit(const LinearReservoirSystem& r, ArchitectureClaim claim) {
    AuditReport report;
    report.claim = claim;

    PermutationSpec spec;
    std::string problem;
    if (!try_scaled_permutation(r.w, report.lambda, spec, problem)) {
        report.violations.push_back(problem);
        report.pass = false;
        return report;
    }
    if (report.lambda >= 1.0) {
        report.violations.push_back("W is not contractive: lambda >= 1");
    }
    if (std::abs(report.lambda - r.lambda) > 1e-10 * std::max(1.0, report.lambda)) {
        report.violations.push_back("cached operator norm disagrees with the entry value of W");
    }

    // Cycles must occupy contiguous index ranges to form a block-diagonal
    // coupling in the stated basis.
    const auto cycles = cycle_decomposition(spec);
    std::vector<std::pair<std::size_t, std::size_t>> blocks; // (start, size)
    for (const auto& cyc : cycles) {
        const auto [lo_it, hi_it] = std::minmax_element(cyc.begin(), cyc.end());
        if (*hi_it - *lo_it + 1 != cyc.size()) {
            report.violations.push_back("a cycle of W does not occupy a contiguous block");
            report.pass = false;
            return report;
        }
        blocks.emplace_back(*lo_it, cyc.size());
    }
    std::sort(blocks.begin(), blocks.end());
    for (const auto& [start, size] : blocks) report.block_sizes.push_back(size);

    const std::size_t n_blocks = blocks.size();
    switch (claim) {
        case ArchitectureClaim::scr:
        case ArchitectureClaim::cscr:
            if (n_blocks != 1) {
                report.violations.push_back("W is not a single full-cycle permutation");
            }
            break;
        case ArchitectureClaim::twin:
            if (n_blocks != 2) {
                report.violations.push_back("W does not consist of exactly two full-cycle blocks");
            }
            break;
        case ArchitectureClaim::smcr: {
            if (n_blocks < 1) {
                report.violations.push_back("W has no blocks");
                break;
            }
            const std::size_t size0 = blocks[0].second;
            const ComplexMatrix first = r.w.block(blocks[0].first, blocks[0].first, size0, size0);
            for (std::size_t b = 1; b < n_blocks; ++b) {
                if (blocks[b].second != size0 ||
                    !(r.w.block(blocks[b].first, blocks[b].first, size0, size0) == first)) {
                    report.violations.push_back("SMCR blocks are not identical");
                    break;
                }
            }
            break;
        }
    }

    const bool allow_imaginary = (claim == ArchitectureClaim::cscr);
    for (std::size_t i = 0; i < r.v.rows(); ++i) {
        for (std::size_t j = 0; j < r.v.cols(); ++j) {
            const Complex z = r.v(i, j);
            const bool real_unit = (z == Complex(1.0, 0.0) || z == Complex(-1.0, 0.0));
            const bool imag_unit = (z == Complex(0.0, 1.0) || z == Complex(0.0, -1.0));
            if (!(real_unit || (allow_imaginary && imag_unit))) {
                report.violations.push_back("V entry (" + std::to_string(i) + "," + std::to_string(j) +
                                            ") outside the allowed alphabet");
            }
        }
    }

    report.pass = report.violations.empty();
    return report;
}

} // namespace scrkit
