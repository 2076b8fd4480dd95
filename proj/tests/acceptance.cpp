// Acceptance gate: one check per shipped guarantee, each printed as a
// PASS/FAIL line. Every criterion writes a deterministic report file; the
// last criterion re-runs the whole battery with the same seeds and demands
// byte-identical reports.
//
//  1  dilation power identity and unitarity at tight tolerances
//  2  the worked 6x6 block-cycle arrangement, exactly
//  3  spectrum rounding: perturbation bound, complete roots, full cycle
//  4  similarity equivalence is exact up to roundoff
//  5  multi-cycle rebuild is exact, with the documented dimension
//  6  rationalization: residual, coprimality, exact sign alphabets
//  7  complex single-cycle build meets epsilon end to end
//  8  twin build meets epsilon with real +/-1 inputs and two cycle blocks
//  9  full pipeline on the scalar demo with certificate accounting
// 10  every simulated state stays inside the reachable ball
// 11  bit-identical reports on re-run

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "scrkit/cyclization.hpp"
#include "scrkit/dilation.hpp"
#include "scrkit/harness.hpp"
#include "scrkit/io.hpp"
#include "scrkit/pipeline.hpp"
#include "scrkit/scr.hpp"

using namespace scrkit;

namespace {

// ---------------------------------------------------------------- fixtures

ComplexMatrix random_matrix(SeededRng& rng, std::size_t rows, std::size_t cols) {
    ComplexMatrix out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out(i, j) = rng.normal_complex();
    return out;
}

ComplexMatrix random_contraction(SeededRng& rng, std::size_t n, double norm) {
    ComplexMatrix a = random_matrix(rng, n, n);
    return Complex(norm / operator_norm(a), 0.0) * a;
}

ComplexMatrix random_unitary(SeededRng& rng, std::size_t n) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(to_eigen(random_matrix(rng, n, n)));
    return from_eigen(Eigen::MatrixXcd(qr.householderQ()));
}

PermutationSpec random_full_cycle(SeededRng& rng, std::size_t n) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(i));
        std::swap(order[i - 1], order[j]);
    }
    std::vector<std::size_t> image(n);
    for (std::size_t i = 0; i < n; ++i) image[order[i]] = order[(i + 1) % n];
    return PermutationSpec(std::move(image));
}

// ------------------------------------------------------------ bookkeeping

struct Criterion {
    int id = 0;
    std::string title;
    bool pass = true;
    Json report;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            report["violations"].push_back(what);
        }
    }
};

struct Battery {
    std::filesystem::path out_dir;
    std::vector<Criterion> results;
    double worst_state_ratio = 0.0; // criterion 10 accumulator

    // Runs both systems on the stream while checking the reachable-state
    // bound ||x_t|| <= M ||V|| / (1 - lambda) for each.
    double checked_output_deviation(const LinearReservoirSystem& a, const LinearReservoirSystem& b,
                                    const std::vector<InputStream>& streams) {
        double worst = 0.0;
        for (const InputStream& u : streams) {
            const SimulationResult ra = run(a, u);
            const SimulationResult rb = run(b, u);
            track_states(a, u, ra);
            track_states(b, u, rb);
            for (std::size_t t = 0; t < u.length(); ++t) {
                worst = std::max(worst, vec_norm(vec_sub(ra.outputs[t], rb.outputs[t])));
            }
        }
        return worst;
    }

    void track_states(const LinearReservoirSystem& r, const InputStream& u,
                      const SimulationResult& sim) {
        const double radius = state_radius(r, u.bound);
        for (const ComplexVector& x : sim.states) {
            if (radius > 0.0) worst_state_ratio = std::max(worst_state_ratio, vec_norm(x) / radius);
        }
    }

    void finish(Criterion c) {
        save_json(c.report, (out_dir / ("criterion_" + std::to_string(c.id) + ".json")).string());
        results.push_back(std::move(c));
    }
};

// ------------------------------------------------------------- criteria

void criterion_1_dilation(Battery& b) {
    Criterion c{1, "dilation power identity and unitarity"};
    SeededRng rng(1001);
    double worst_power = 0.0, worst_unitarity = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform01() * 4.0);
        const double lambda = 0.2 + 0.7 * rng.uniform01(); // <= 0.9
        const std::size_t horizon = 1 + static_cast<std::size_t>(rng.uniform01() * 12.0);
        const ComplexMatrix w = random_contraction(rng, n, lambda);
        const ComplexMatrix w1 = Complex(1.0 / lambda, 0.0) * w;
        const ComplexMatrix u = egervary_unitary(w1, std::min<std::size_t>(horizon, 12));

        worst_unitarity = std::max(worst_unitarity, unitarity_residual(u));
        ComplexMatrix u_pow = ComplexMatrix::identity(u.rows());
        ComplexMatrix w_pow = ComplexMatrix::identity(n);
        for (std::size_t k = 1; k <= std::min<std::size_t>(horizon, 12); ++k) {
            u_pow = u_pow * u;
            w_pow = w_pow * w1;
            worst_power = std::max(worst_power, operator_norm(u_pow.block(0, 0, n, n) - w_pow));
        }
    }
    c.report["max_power_residual"] = worst_power;
    c.report["max_unitarity_residual"] = worst_unitarity;
    c.require(worst_power < 1e-9, "power identity residual reached " + std::to_string(worst_power));
    c.require(worst_unitarity < 1e-10, "unitarity residual too large");
    b.finish(std::move(c));
}

void criterion_2_worked_example(Battery& b) {
    Criterion c{2, "worked 6x6 block-cycle arrangement"};
    const PermutationSpec swap({1, 0});
    const ComplexMatrix printed{{0, 0, 0, 0, 0, 1}, {0, 0, 0, 0, 1, 0}, {0, 1, 0, 0, 0, 0},
                                {1, 0, 0, 0, 0, 0}, {0, 0, 0, 1, 0, 0}, {0, 0, 1, 0, 0, 0}};
    const PermutationSpec p1 = block_cycle(swap, 3);
    c.require(permutation_matrix(p1) == printed, "matrix differs from the printed arrangement");
    c.require(is_full_cycle(p1), "k = 3 arrangement is not a full cycle");
    c.require(!is_full_cycle(block_cycle_layout(swap, 2)), "k = 2 arrangement must not be full-cycle");
    bool rejected = false;
    try {
        block_cycle(swap, 2);
    } catch (const PreconditionError&) {
        rejected = true;
    }
    c.require(rejected, "k = 2 must be rejected");
    c.report["full_cycle_k3"] = is_full_cycle(p1);
    b.finish(std::move(c));
}

void criterion_3_perturbation(Battery& b) {
    Criterion c{3, "spectrum rounding onto roots-of-unity grids"};
    SeededRng rng(3003);
    double worst_pert_ratio = 0.0, worst_root_dist = 0.0;
    bool cycles_ok = true, bijection_ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform01() * 4.0);
        const ComplexMatrix u = random_unitary(rng, n);
        for (const double delta : {0.1, 0.3}) {
            const CyclePerturbation pert = perturb_to_cycle(u, delta);
            const double bound = operator_norm(pert.a - block_diag(u, pert.d_fill));
            worst_pert_ratio = std::max(worst_pert_ratio, bound / delta);
            cycles_ok = cycles_ok && is_full_cycle(pert.p);

            // Eigenvalue multiset must match the complete grid bijectively.
            const std::size_t n1 = pert.a.rows();
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(to_eigen(pert.a));
            std::vector<bool> used(n1, false);
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
                const Complex w = es.eigenvalues()(i);
                double best = 1e9;
                std::size_t best_b = 0;
                for (std::size_t g = 0; g < n1; ++g) {
                    const double theta =
                        2.0 * std::numbers::pi * static_cast<double>(g) / static_cast<double>(n1);
                    const double dist = std::abs(w - Complex(std::cos(theta), std::sin(theta)));
                    if (dist < best) {
                        best = dist;
                        best_b = g;
                    }
                }
                worst_root_dist = std::max(worst_root_dist, best);
                if (used[best_b]) bijection_ok = false;
                used[best_b] = true;
            }
        }
    }
    c.report["max_perturbation_over_delta"] = worst_pert_ratio;
    c.report["max_root_distance"] = worst_root_dist;
    c.require(worst_pert_ratio < 1.0, "perturbation bound violated");
    c.require(worst_root_dist < 1e-7, "spectrum is not a complete set of roots of unity");
    c.require(bijection_ok, "eigenvalues do not pair bijectively with the grid");
    c.require(cycles_ok, "recovered permutation is not a full cycle");
    b.finish(std::move(c));
}

void criterion_4_similarity(Battery& b) {
    Criterion c{4, "similarity equivalence exactness"};
    SeededRng rng(4004);
    double worst = 0.0;
    int tested = 0;
    while (tested < 50) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform01() * 3.0);
        const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform01() * 2.0);
        const LinearReservoirSystem r =
            make_system(random_contraction(rng, n, 0.6), random_matrix(rng, n, m),
                        Readout::identity(n));
        const ComplexMatrix s =
            ComplexMatrix::identity(n) + Complex(0.15, 0.0) * random_matrix(rng, n, n);
        if (operator_norm(solve(s, r.w * s)) >= 0.999) continue; // keep the hypothesis
        ++tested;
        const LinearReservoirSystem r2 = similarity_transform(r, s);
        worst = std::max(worst, b.checked_output_deviation(
                                    r, r2, random_streams(m, 1.0, 50, 10, 4100 + tested)));
    }
    c.report["max_output_deviation"] = worst;
    c.require(worst < 1e-9, "similarity deviation reached " + std::to_string(worst));
    b.finish(std::move(c));
}

void criterion_5_smcr(Battery& b) {
    Criterion c{5, "exact multi-cycle rebuild"};
    SeededRng rng(5005);
    double worst = 0.0;
    bool dims_ok = true;
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform01() * 3.0);
        const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform01() * 2.0);
        const double lambda = 0.3 + 0.5 * rng.uniform01();
        const ComplexMatrix w =
            Complex(lambda, 0.0) * permutation_matrix(random_full_cycle(rng, n));
        const LinearReservoirSystem r =
            make_system_with_norm(w, random_matrix(rng, n, m), Readout::identity(n), lambda);
        const SmcrResult res = build_smcr(r);
        dims_ok = dims_ok && (res.system.state_dim() == n * n * m);
        worst = std::max(
            worst, b.checked_output_deviation(r, res.system,
                                              random_streams(m, 1.0, 50, 20, 5100 + trial)));
    }
    c.report["max_output_deviation"] = worst;
    c.require(worst < 1e-10, "rebuild deviation reached " + std::to_string(worst));
    c.require(dims_ok, "state dimension differs from n^2 m");
    b.finish(std::move(c));
}

void criterion_6_rationalization(Battery& b) {
    Criterion c{6, "rationalization residual, coprimality, sign alphabets"};
    SeededRng rng(6006);
    const double delta = 0.1;
    double worst_residual = 0.0;
    bool gcd_ok = true, alphabet_ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform01() * 3.0);
        const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform01() * 3.0);
        ComplexMatrix v = random_matrix(rng, n, m);
        Rationalization rat;
        if (trial % 2 == 0) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j) v(i, j) = Complex(v(i, j).real(), 0.0);
            rat = rationalize_real(v, delta);
        } else {
            rat = rationalize_complex(v, delta);
        }
        worst_residual = std::max(worst_residual, rat.residual);
        gcd_ok = gcd_ok && (std::gcd(rat.k, n) == 1) && (rat.factors.size() == rat.k);
        for (const ComplexMatrix& f : rat.factors) {
            bool all_real = true, all_imag = true;
            for (const Complex& z : f.entries()) {
                all_real = all_real && (z == Complex(1.0, 0.0) || z == Complex(-1.0, 0.0));
                all_imag = all_imag && (z == Complex(0.0, 1.0) || z == Complex(0.0, -1.0));
            }
            alphabet_ok = alphabet_ok && (all_real || all_imag);
        }
    }
    c.report["max_residual"] = worst_residual;
    c.require(worst_residual < delta, "residual bound violated");
    c.require(gcd_ok, "factor count not coprime to n");
    c.require(alphabet_ok, "factor entries outside the exact sign alphabets");
    b.finish(std::move(c));
}

void criterion_7_cscr(Battery& b) {
    Criterion c{7, "complex single-cycle build meets epsilon"};
    SeededRng rng(7007);
    const double epsilon = 0.2, lambda = 0.5;
    const ComplexMatrix w = Complex(lambda, 0.0) * permutation_matrix(cyclic_shift_permutation(2));
    const LinearReservoirSystem r =
        make_system_with_norm(w, random_matrix(rng, 2, 1), Readout::identity(2), lambda);
    const CscrResult res = build_cscr(r, epsilon, 1.0);

    const std::size_t length = 60;
    const double tail = truncation_tail_bound(lambda, operator_norm(r.v), 1.0, length);
    const double dev =
        b.checked_output_deviation(r, res.system, random_streams(1, 1.0, length, 100, 7100));
    const AuditReport audit = structural_audit(res.system, ArchitectureClaim::cscr);

    c.report["max_output_deviation"] = dev;
    c.report["tail_bound"] = tail;
    c.report["k"] = res.rationalization.k;
    c.report["state_dimension"] = res.system.state_dim();
    c.require(tail < 1e-5, "tail bound not below 1e-5 at the test length");
    c.require(dev < epsilon, "deviation reached " + std::to_string(dev));
    c.require(audit.pass, "structural audit failed");
    b.finish(std::move(c));
}

void criterion_8_twin(Battery& b) {
    Criterion c{8, "twin build meets epsilon with exactly two cycle blocks"};
    SeededRng rng(8008);
    const double epsilon = 0.2, lambda = 0.5;
    const ComplexMatrix w = Complex(lambda, 0.0) * permutation_matrix(cyclic_shift_permutation(2));
    const LinearReservoirSystem r =
        make_system_with_norm(w, random_matrix(rng, 2, 1), Readout::identity(2), lambda);
    const TwinScrResult res = build_twin_scr(r, epsilon, 1.0);

    const double dev =
        b.checked_output_deviation(r, res.system, random_streams(1, 1.0, 60, 100, 8100));
    const AuditReport audit = structural_audit(res.system, ArchitectureClaim::twin);
    bool alphabet_ok = true;
    for (const Complex& z : res.system.v.entries()) {
        alphabet_ok = alphabet_ok && (z == Complex(1.0, 0.0) || z == Complex(-1.0, 0.0));
    }

    c.report["max_output_deviation"] = dev;
    c.report["k_r"] = res.real_part.k;
    c.report["k_i"] = res.imag_part.k;
    c.report["state_dimension"] = res.system.state_dim();
    c.require(dev < epsilon, "deviation reached " + std::to_string(dev));
    c.require(alphabet_ok, "input entries are not all real +/-1");
    c.require(audit.pass && audit.block_sizes.size() == 2, "coupling is not two full-cycle blocks");
    b.finish(std::move(c));
}

void criterion_9_pipeline(Battery& b) {
    Criterion c{9, "full pipeline on the scalar demo with certificates"};
    ComplexMatrix w(1, 1), v(1, 1);
    w(0, 0) = Complex(0.5, 0.0);
    v(0, 0) = Complex(1.0, 0.0);
    const LinearReservoirSystem r = make_system(w, v, Readout::identity(1));
    const double epsilon = 0.5;
    const PipelineResult result = synthesize(r, epsilon, 1.0, TargetArchitecture::cscr);
    const ErrorBudget& budget = result.budget;

    c.report["certificate_total"] = result.certificate_total();
    c.report["stage_dimensions"] = budget.stage_dimensions;
    c.require(result.certificate_total() <= epsilon, "certificates exceed the total budget");

    bool dims_ok = true;
    for (const std::size_t dim : budget.stage_dimensions) dims_ok = dims_ok && dim <= 200000;
    c.require(dims_ok, "a stage dimension exceeds the 2e5 cap");

    // Stage inequalities at the chosen parameters. The scalar coupling is
    // already a scaled full cycle, so the first two stages must be skipped
    // identities and the terminal stage carries the whole construction.
    c.require(budget.per_stage[0].skipped && budget.per_stage[1].skipped,
              "structural skipping failed on the scalar demo");
    double eps_sum = 0.0;
    for (const StageBudget& s : budget.per_stage) eps_sum += s.epsilon;
    c.require(eps_sum <= epsilon + 1e-12, "per-stage allocations exceed epsilon");

    const double delta3 = budget.per_stage[2].delta;
    const double rat_delta = (1.0 - r.lambda) * delta3 / 1.0;
    const CscrResult rebuilt = build_cscr(r, budget.per_stage[2].epsilon, 1.0, delta3);
    c.require(rebuilt.rationalization.denominator == *budget.rational_denominator &&
                  rebuilt.rationalization.k == *budget.k,
              "pipeline parameters are not reproducible");
    c.require(rebuilt.rationalization.residual < rat_delta,
              "rationalization inequality fails at the chosen parameters");
    c.require(std::gcd(*budget.k, r.state_dim()) == 1, "k is not coprime to the cycle length");
    c.require(budget.stage_dimensions.back() == *budget.k * r.state_dim(),
              "dimension formula mismatch");

    const double dev =
        b.checked_output_deviation(r, result.system, random_streams(1, 1.0, 50, 64, 9100));
    c.report["max_output_deviation"] = dev;
    c.require(dev < epsilon, "measured deviation reached " + std::to_string(dev));
    c.require(dev <= result.certificate_total() + 1e-9, "measurement exceeds the certificates");
    b.finish(std::move(c));
}

void criterion_10_state_bound(Battery& b) {
    Criterion c{10, "states stay inside the reachable ball"};
    c.report["worst_state_ratio"] = b.worst_state_ratio;
    c.require(b.worst_state_ratio <= 1.0 + 1e-9,
              "a simulated state left the ball by ratio " + std::to_string(b.worst_state_ratio));
    b.finish(std::move(c));
}

std::vector<Criterion> run_battery(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    Battery b;
    b.out_dir = dir;
    criterion_1_dilation(b);
    criterion_2_worked_example(b);
    criterion_3_perturbation(b);
    criterion_4_similarity(b);
    criterion_5_smcr(b);
    criterion_6_rationalization(b);
    criterion_7_cscr(b);
    criterion_8_twin(b);
    criterion_9_pipeline(b);
    criterion_10_state_bound(b);
    return std::move(b.results);
}

} // namespace

int main(int argc, char** argv) {
    const std::filesystem::path base = argc > 1 ? argv[1] : "acceptance_reports";
    std::filesystem::remove_all(base);

    std::vector<Criterion> first = run_battery(base / "run1");
    std::vector<Criterion> second = run_battery(base / "run2");

    bool all_pass = true;
    for (const Criterion& c : first) {
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << "criterion " << c.id << ": " << c.title
                  << "\n";
        if (!c.pass) {
            all_pass = false;
            for (const auto& v : c.report["violations"]) {
                std::cout << "         " << v.get<std::string>() << "\n";
            }
        }
    }

    // Criterion 11: the re-run must have produced byte-identical reports.
    bool identical = second.size() == first.size();
    for (const Criterion& c : first) {
        const auto p1 = base / "run1" / ("criterion_" + std::to_string(c.id) + ".json");
        const auto p2 = base / "run2" / ("criterion_" + std::to_string(c.id) + ".json");
        std::ifstream a(p1), bb(p2);
        const std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
        const std::string sb((std::istreambuf_iterator<char>(bb)), std::istreambuf_iterator<char>());
        identical = identical && !sa.empty() && sa == sb;
    }
    std::cout << (identical ? "[PASS] " : "[FAIL] ")
              << "criterion 11: re-run reports are bit-identical\n";
    all_pass = all_pass && identical;

    std::cout << (all_pass ? "acceptance: all criteria passed\n"
                           : "acceptance: some criteria FAILED\n");
    return all_pass ? 0 : 1;
}
