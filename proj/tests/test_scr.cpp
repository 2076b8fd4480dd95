#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "scrkit/harness.hpp"
#include "scrkit/scr.hpp"
#include "support.hpp"

using namespace scrkit;
using testsupport::norm_diff;
using testsupport::random_matrix;

namespace {

ComplexMatrix reconstruct(const ComplexVector& coeffs, const SignBasis& basis) {
    ComplexMatrix acc = ComplexMatrix::zero(basis.n, basis.m);
    for (std::size_t i = 0; i < coeffs.size(); ++i) acc = acc + coeffs[i] * basis.elements[i];
    return acc;
}

bool entries_are_sign_units(const ComplexMatrix& f, bool imaginary) {
    for (const Complex& z : f.entries()) {
        const Complex unit = imaginary ? Complex(0.0, 1.0) : Complex(1.0, 0.0);
        if (z != unit && z != -unit) return false;
    }
    return true;
}

LinearReservoirSystem cycle_system(std::size_t n, const ComplexMatrix& v, double lambda) {
    const ComplexMatrix w = Complex(lambda, 0.0) * permutation_matrix(cyclic_shift_permutation(n));
    return make_system_with_norm(w, v, Readout::identity(n), lambda);
}

double max_output_deviation(const LinearReservoirSystem& a, const LinearReservoirSystem& b,
                            const std::vector<InputStream>& streams) {
    double worst = 0.0;
    for (const InputStream& u : streams) {
        const auto ya = run(a, u).outputs;
        const auto yb = run(b, u).outputs;
        for (std::size_t t = 0; t < u.length(); ++t) {
            worst = std::max(worst, vec_norm(vec_sub(ya[t], yb[t])));
        }
    }
    return worst;
}

} // namespace

TEST_CASE("sign_basis fixed shapes") {
    const SignBasis b1 = sign_basis(1, 1);
    REQUIRE(b1.size() == 1);
    CHECK(b1.elements[0](0, 0) == Complex(1.0, 0.0));

    const SignBasis b2 = sign_basis(1, 2);
    REQUIRE(b2.size() == 2);
    CHECK(b2.elements[0] == ComplexMatrix{{1, 1}});
    CHECK(b2.elements[1] == ComplexMatrix{{1, -1}});
}

TEST_CASE("sign_basis spans the matrix space") {
    const SignBasis basis = sign_basis(2, 3);
    REQUIRE(basis.size() == 6);
    for (const ComplexMatrix& e : basis.elements) {
        CHECK(entries_are_sign_units(e, false));
    }
    // Flattened rank must be full.
    Eigen::MatrixXcd flat(6, 6);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t k = 0; k < 6; ++k) {
            flat(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) =
                basis.elements[i].entries()[k];
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(flat);
    CHECK(lu.rank() == 6);
}

TEST_CASE("expand_in_basis closed forms") {
    const SignBasis basis = sign_basis(3, 2);
    {
        const ComplexVector a = expand_in_basis(basis.elements[0], basis);
        CHECK(std::abs(a[0] - Complex(1.0, 0.0)) < 1e-12);
        for (std::size_t i = 1; i < a.size(); ++i) CHECK(std::abs(a[i]) < 1e-12);
    }
    {
        const ComplexVector a = expand_in_basis(ComplexMatrix::zero(3, 2), basis);
        for (const Complex& c : a) CHECK(std::abs(c) == 0.0);
    }
    SeededRng rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        const ComplexMatrix v = random_matrix(rng, 3, 2);
        const ComplexVector a = expand_in_basis(v, basis);
        CHECK(norm_diff(reconstruct(a, basis), v) < 1e-10 * std::max(1.0, operator_norm(v)));
    }
}

TEST_CASE("build_smcr: scalar system absorbs the coefficient into the readout") {
    ComplexMatrix v(1, 1);
    v(0, 0) = Complex(0.7, -0.4);
    const LinearReservoirSystem r = cycle_system(1, v, 0.5);
    const SmcrResult res = build_smcr(r);
    CHECK(res.system.state_dim() == 1);
    CHECK(res.system.v(0, 0) == Complex(1.0, 0.0));
    CHECK(max_output_deviation(r, res.system, random_streams(1, 1.0, 30, 5, 11)) < 1e-13);
}

TEST_CASE("build_smcr is exactly output-equivalent") {
    SeededRng rng(72);
    for (const std::size_t n : {2ul, 3ul}) {
        for (const std::size_t m : {1ul, 2ul}) {
            const LinearReservoirSystem r = cycle_system(n, random_matrix(rng, n, m), 0.5);
            const SmcrResult res = build_smcr(r);
            CHECK(res.system.state_dim() == n * n * m);
            CHECK(std::abs(operator_norm(res.system.w) - 0.5) < 1e-12);
            CHECK(structural_audit(res.system, ArchitectureClaim::smcr).pass);
            CHECK(max_output_deviation(r, res.system, random_streams(m, 1.0, 50, 20, 13)) < 1e-11);
        }
    }
}

TEST_CASE("build_smcr rejects couplings that are not scaled full cycles") {
    SeededRng rng(73);
    const LinearReservoirSystem r = make_system(0.5 * ComplexMatrix::identity(2),
                                                random_matrix(rng, 2, 1), Readout::identity(2));
    CHECK_THROWS_AS(build_smcr(r), PreconditionError);
}

TEST_CASE("rationalize_real executes the recipe on a basis element") {
    const SignBasis basis = sign_basis(3, 1);
    const double delta = 0.5;
    const Rationalization rat = rationalize_real(basis.elements[0], delta);
    // N is the smallest integer with nm/N < delta/(2L), L = sqrt(3).
    CHECK(rat.denominator == 21);
    CHECK(rat.k == 22); // k0 = 21 shares a factor with n = 3, so k = 22
    CHECK(std::gcd(rat.k, static_cast<std::size_t>(3)) == 1);
    CHECK(rat.residual == Catch::Approx(std::sqrt(3.0) / 21.0).margin(1e-12));
    CHECK(rat.residual < delta);
    for (const ComplexMatrix& f : rat.factors) CHECK(entries_are_sign_units(f, false));
}

TEST_CASE("rationalize_real of the zero matrix pads with one basis element") {
    const Rationalization rat = rationalize_real(ComplexMatrix::zero(2, 2), 0.2);
    CHECK(rat.k == 1);
    REQUIRE(rat.factors.size() == 1);
    CHECK(rat.factors[0] == sign_basis(2, 2).elements[0]);
    CHECK(rat.residual == Catch::Approx(std::sqrt(2.0) / static_cast<double>(rat.denominator))
                              .margin(1e-12));
    CHECK(rat.residual < 0.2);
}

TEST_CASE("rationalize_real on random real matrices") {
    SeededRng rng(74);
    for (int trial = 0; trial < 20; ++trial) {
        ComplexMatrix v = random_matrix(rng, 3, 2);
        for (std::size_t i = 0; i < v.rows(); ++i)
            for (std::size_t j = 0; j < v.cols(); ++j) v(i, j) = Complex(v(i, j).real(), 0.0);
        const Rationalization rat = rationalize_real(v, 0.1);
        CHECK(rat.residual < 0.1);
        CHECK(std::gcd(rat.k, v.rows()) == 1);
        CHECK(rat.factors.size() == rat.k);
        for (const ComplexMatrix& f : rat.factors) CHECK(entries_are_sign_units(f, false));
    }
    CHECK_THROWS_AS(rationalize_real(random_matrix(rng, 2, 2), 0.1), InputError);
}

TEST_CASE("rationalize_complex reduces to the real case on real input") {
    SeededRng rng(75);
    ComplexMatrix v = random_matrix(rng, 2, 2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) v(i, j) = Complex(v(i, j).real(), 0.0);
    const Rationalization rat = rationalize_complex(v, 0.15);
    CHECK(rat.residual < 0.15);
    for (const ComplexMatrix& f : rat.factors) CHECK(entries_are_sign_units(f, false));
}

TEST_CASE("rationalize_complex mirrors on purely imaginary input") {
    const SignBasis basis = sign_basis(3, 1);
    const ComplexMatrix v = Complex(0.0, 1.0) * basis.elements[0];
    const Rationalization rat = rationalize_complex(v, 0.5);
    CHECK(rat.residual < 0.5);
    std::size_t imag_count = 0, real_count = 0;
    for (const ComplexMatrix& f : rat.factors) {
        if (entries_are_sign_units(f, true)) {
            ++imag_count;
        } else {
            REQUIRE(entries_are_sign_units(f, false));
            ++real_count; // padding copies only
        }
    }
    CHECK(imag_count >= rat.k - 3);
    CHECK(real_count <= 2); // at most n - 1 padding copies
}

TEST_CASE("rationalize_complex on random complex matrices") {
    SeededRng rng(76);
    for (int trial = 0; trial < 20; ++trial) {
        const ComplexMatrix v = random_matrix(rng, 2, 2);
        const Rationalization rat = rationalize_complex(v, 0.1);
        CHECK(rat.residual < 0.1);
        CHECK(std::gcd(rat.k, v.rows()) == 1);
        for (const ComplexMatrix& f : rat.factors) {
            CHECK((entries_are_sign_units(f, false) || entries_are_sign_units(f, true)));
        }
    }
}

TEST_CASE("block_cycle reproduces the worked 6x6 arrangement") {
    const PermutationSpec swap({1, 0});
    const PermutationSpec p1 = block_cycle(swap, 3);
    const ComplexMatrix expect{{0, 0, 0, 0, 0, 1},
                               {0, 0, 0, 0, 1, 0},
                               {0, 1, 0, 0, 0, 0},
                               {1, 0, 0, 0, 0, 0},
                               {0, 0, 0, 1, 0, 0},
                               {0, 0, 1, 0, 0, 0}};
    CHECK(permutation_matrix(p1) == expect);
    CHECK(is_full_cycle(p1));

    // Acting on basis vectors, the arrangement is the 6-cycle
    // e1 -> e4 -> e5 -> e2 -> e3 -> e6 -> e1.
    std::vector<std::size_t> inverse(6);
    for (std::size_t i = 0; i < 6; ++i) inverse[p1.image[i]] = i;
    std::vector<std::size_t> orbit{0};
    while (orbit.size() < 6) orbit.push_back(inverse[orbit.back()]);
    CHECK(orbit == std::vector<std::size_t>{0, 3, 4, 1, 2, 5});
}

TEST_CASE("block_cycle rejects k sharing a factor with n") {
    const PermutationSpec swap({1, 0});
    CHECK_THROWS_AS(block_cycle(swap, 2), PreconditionError);
    // The unchecked layout exists but is not a full cycle.
    CHECK_FALSE(is_full_cycle(block_cycle_layout(swap, 2)));
    // k = 1 returns the underlying cycle itself.
    CHECK(block_cycle(swap, 1).image == swap.image);
    CHECK(block_cycle(identity_permutation(1), 1).image == identity_permutation(1).image);
}

TEST_CASE("build_cscr with an exactly representable V has zero residual") {
    const SignBasis basis = sign_basis(3, 1);
    const LinearReservoirSystem r = cycle_system(3, basis.elements[0], 0.5);
    const CscrResult res = build_cscr(r, 40.0, 1.0);
    CHECK(res.rationalization.residual == 0.0);
    CHECK(structural_audit(res.system, ArchitectureClaim::cscr).pass);
    CHECK(max_output_deviation(r, res.system, random_streams(1, 1.0, 40, 10, 21)) < 1e-10);
}

TEST_CASE("build_cscr approximates a full-cycle system within epsilon") {
    SeededRng rng(77);
    const double epsilon = 0.2;
    const LinearReservoirSystem r = cycle_system(2, random_matrix(rng, 2, 1), 0.5);
    const CscrResult res = build_cscr(r, epsilon, 1.0);

    CHECK(res.system.state_dim() == 2 * res.rationalization.k);
    CHECK(std::abs(operator_norm(res.system.w) - 0.5) < 1e-12);
    const AuditReport audit = structural_audit(res.system, ArchitectureClaim::cscr);
    CHECK(audit.pass);

    const auto streams = random_streams(1, 1.0, 60, 30, 29);
    CHECK(max_output_deviation(r, res.system, streams) < epsilon);

    // State-level bound: the averaged block states track the original within
    // M * residual / (1 - lambda) on every stream.
    const double state_bound = 1.0 * res.rationalization.residual / (1.0 - 0.5);
    double worst = 0.0;
    for (const InputStream& u : streams) {
        const auto x1 = run(r, u, false).states;
        const auto x2 = run(res.system, u, false).states;
        for (std::size_t t = 0; t < u.length(); ++t) {
            worst = std::max(worst, vec_norm(vec_sub(x1[t], matvec(res.back_map, x2[t]))));
        }
    }
    CHECK(worst <= state_bound + 1e-12);
}

TEST_CASE("build_twin_scr branch behaviour on real and imaginary inputs") {
    SeededRng rng(78);
    ComplexMatrix v_real = random_matrix(rng, 2, 1);
    for (std::size_t i = 0; i < 2; ++i) v_real(i, 0) = Complex(v_real(i, 0).real(), 0.0);
    const LinearReservoirSystem r = cycle_system(2, v_real, 0.5);
    const TwinScrResult res = build_twin_scr(r, 0.3, 1.0);
    // The imaginary branch rationalizes the zero matrix: single padding copy.
    CHECK(res.imag_part.k == 1);
    CHECK(structural_audit(res.system, ArchitectureClaim::twin).pass);
    CHECK(max_output_deviation(r, res.system, random_streams(1, 1.0, 40, 10, 31)) < 0.3);

    // Purely imaginary input mirrors the roles.
    const LinearReservoirSystem ri = cycle_system(2, Complex(0.0, 1.0) * v_real, 0.5);
    const TwinScrResult res_i = build_twin_scr(ri, 0.3, 1.0);
    CHECK(res_i.real_part.k == 1);
    CHECK(max_output_deviation(ri, res_i.system, random_streams(1, 1.0, 40, 10, 32)) < 0.3);
}

TEST_CASE("build_twin_scr approximates a complex-input system within epsilon") {
    SeededRng rng(79);
    const double epsilon = 0.2;
    const LinearReservoirSystem r = cycle_system(2, random_matrix(rng, 2, 1), 0.5);
    const TwinScrResult res = build_twin_scr(r, epsilon, 1.0);

    CHECK(res.system.state_dim() == 2 * (res.real_part.k + res.imag_part.k));
    const AuditReport audit = structural_audit(res.system, ArchitectureClaim::twin);
    CHECK(audit.pass);
    REQUIRE(audit.block_sizes.size() == 2);
    CHECK(audit.block_sizes[0] == 2 * res.real_part.k);
    CHECK(audit.block_sizes[1] == 2 * res.imag_part.k);
    for (const Complex& z : res.system.v.entries()) {
        CHECK((z == Complex(1.0, 0.0) || z == Complex(-1.0, 0.0)));
    }
    CHECK(max_output_deviation(r, res.system, random_streams(1, 1.0, 50, 20, 33)) < epsilon);
}

TEST_CASE("block_cycle cycle length at four-digit scale") {
    // gcd(101, 99) = 1: the arrangement is one cycle of length 9999, so no
    // smaller power of the permutation can be the identity.
    const PermutationSpec p = block_cycle(cyclic_shift_permutation(101), 99);
    CHECK(p.size() == 9999);
    CHECK(orbit_length(p, 0) == 9999);
}

TEST_CASE("cycle constructors enforce the dimension cap") {
    SeededRng rng(80);
    const LinearReservoirSystem r = cycle_system(2, random_matrix(rng, 2, 1), 0.5);
    try {
        build_cscr(r, 0.2, 1.0, std::nullopt, 16);
        FAIL("expected ResourceError");
    } catch (const ResourceError& e) {
        CHECK(e.required_dimension() > 16);
    }
    CHECK_THROWS_AS(build_twin_scr(r, 0.2, 1.0, std::nullopt, 16), ResourceError);
    CHECK_THROWS_AS(build_smcr(cycle_system(3, random_matrix(rng, 3, 2), 0.5), 10), ResourceError);
}
