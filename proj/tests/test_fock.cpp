#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "zpc/fock.hpp"
#include "zpc/moments.hpp"
#include "zpc/pulsed.hpp"

using namespace zpc;
using namespace zpc::fock;

namespace {

OracleParams small_params(Interaction kind, double eta) {
    OracleParams op;
    op.rates.coupling = 1.0;
    op.rates.kappa_ex = 3.0;
    op.rates.gamma = 1.0;
    op.rates.bath_occupation = 1.0;
    op.eta = eta;
    op.kind = kind;
    return op;
}

} // namespace

TEST_CASE("thermal product state") {
    const auto s = thermal_product_state(0.5, 4, 30);
    CHECK(s.trace() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.optical_mean() == doctest::Approx(0.0));
    CHECK(s.mechanical_mean() == doctest::Approx(0.5).epsilon(1e-10));
    CHECK_NOTHROW(validate_state(s));
    SUBCASE("truncation guard") {
        CHECK_THROWS_AS(thermal_product_state(2.0, 4, 10), TruncationError);
    }
    SUBCASE("vacuum mechanics") {
        const auto v = thermal_product_state(0.0, 3, 3);
        CHECK(v.mechanical_mean() == 0.0);
    }
}

TEST_CASE("pulsed unitary") {
    SUBCASE("anti-Stokes conserves total excitation and trace") {
        auto s = thermal_product_state(0.5, 16, 22);
        const double before = s.optical_mean() + s.mechanical_mean();
        s = apply_pulsed_unitary(s, Interaction::antiStokes, 0.7);
        CHECK(s.trace() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.optical_mean() + s.mechanical_mean() ==
              doctest::Approx(before).epsilon(1e-12));
        CHECK_NOTHROW(validate_state(s));
    }
    SUBCASE("full swap at gtau = pi/2") {
        auto s = thermal_product_state(0.8, 26, 26);
        const double mech = s.mechanical_mean();
        s = apply_pulsed_unitary(s, Interaction::antiStokes,
                                 std::acos(-1.0) / 2.0);
        CHECK(s.optical_mean() == doctest::Approx(mech).epsilon(1e-10));
        CHECK(s.mechanical_mean() == doctest::Approx(0.0).epsilon(1e-10));
    }
    SUBCASE("Stokes matches the two-mode-squeezing occupation") {
        auto s = thermal_product_state(0.5, 24, 30);
        s = apply_pulsed_unitary(s, Interaction::stokes, 0.5);
        CHECK(s.mechanical_mean() ==
              doctest::Approx(pulsed::tms_occupation(0.5, 0.5)).epsilon(1e-7));
        CHECK(s.trace() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("loss channel and projection") {
    auto s = thermal_product_state(0.5, 16, 22);
    s = apply_pulsed_unitary(s, Interaction::antiStokes, 0.6);
    SUBCASE("loss scales the optical mean") {
        const double mean = s.optical_mean();
        const auto lossy = apply_loss(s, 0.4);
        CHECK(lossy.trace() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(lossy.optical_mean() == doctest::Approx(0.4 * mean).epsilon(1e-12));
    }
    SUBCASE("eta = 1 is the identity, eta = 0 empties the mode") {
        CHECK(apply_loss(s, 1.0).optical_mean() ==
              doctest::Approx(s.optical_mean()));
        CHECK(apply_loss(s, 0.0).optical_mean() ==
              doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("projection probabilities sum to one") {
        double tot = 0.0;
        for (int n = 0; n < s.d_opt; ++n)
            tot += project_photon_number(s, n).second;
        CHECK(tot == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("zero-click pipeline equals the closed form") {
        const double nbar = 0.5, gtau = 0.6, eta = 0.7;
        auto t = thermal_product_state(nbar, 20, 20);
        t = apply_pulsed_unitary(t, Interaction::antiStokes, gtau);
        t = apply_loss(t, eta);
        auto [cond, prob] = project_photon_number(t, 0);
        const auto cf = pulsed::as_zero_click(nbar, gtau, eta, 0);
        CHECK(prob == doctest::Approx(cf.probability).epsilon(1e-9));
        CHECK(cond.mechanical_mean() ==
              doctest::Approx(cf.occupation).epsilon(1e-9));
    }
}

TEST_CASE("second moments on a known state") {
    const auto s = thermal_product_state(0.7, 5, 25);
    const auto m = second_moments(s);
    CHECK(m.n_opt == doctest::Approx(0.0));
    // the truncated, renormalized thermal mean, not the nominal 0.7
    CHECK(m.n_mech == doctest::Approx(s.mechanical_mean()).epsilon(1e-12));
    CHECK(std::abs(m.adag_b) < 1e-14);
    CHECK(std::abs(m.ab) < 1e-14);
    CHECK(std::abs(m.aa) < 1e-14);
    CHECK(std::abs(m.bb) < 1e-14);
    CHECK(std::abs(m.a) < 1e-14);
    CHECK(std::abs(m.b) < 1e-14);
}

TEST_CASE("unconditional evolution") {
    SUBCASE("decoupled mechanical relaxation toward the bath") {
        auto op = small_params(Interaction::antiStokes, 0.0);
        op.rates.coupling = 0.0;
        op.rates.bath_occupation = 0.3;
        const auto s0 = thermal_product_state(1.2, 3, 36);
        const double t1 = 0.5;
        const auto s1 = evolve_unconditional(s0, op, t1, 1e-3);
        const double expected =
            0.3 + (1.2 - 0.3) * std::exp(-2.0 * op.rates.gamma * t1);
        CHECK(s1.mechanical_mean() == doctest::Approx(expected).epsilon(1e-7));
        CHECK(s1.trace() == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("moments track the Gaussian drift") {
        const auto op = small_params(Interaction::antiStokes, 0.0);
        const auto s0 = thermal_product_state(1.0, 8, 30);
        const double t1 = 0.3;
        const auto s1 = evolve_unconditional(s0, op, t1, 5e-4);
        const moments::MomentState g0{Interaction::antiStokes, 0.0, 0.0, 1.0};
        const auto series = moments::integrate(g0, op.rates, 0.0, 0.0, t1);
        CHECK(s1.mechanical_mean() ==
              doctest::Approx(series.back().n_mech).epsilon(2e-3));
        CHECK(s1.optical_mean() ==
              doctest::Approx(series.back().n_opt).epsilon(2e-2));
    }
}

TEST_CASE("conditioned no-click evolution") {
    const auto op = small_params(Interaction::antiStokes, 1.0);
    const auto s0 = thermal_product_state(1.0, 10, 30);
    auto [s1, log_p0] = evolve_conditioned_no_click(s0, op, 0.25, 5e-4);
    CHECK(log_p0 < 0.0);
    CHECK(s1.trace() == doctest::Approx(1.0).epsilon(1e-8));
    SUBCASE("record probability accumulates multiplicatively over chunks") {
        double acc = 0.0;
        auto state = s0;
        for (int c = 0; c < 5; ++c) {
            auto [next, lp] = evolve_conditioned_no_click(state, op, 0.05, 5e-4);
            acc += lp;
            state = next;
        }
        CHECK(std::exp(acc) == doctest::Approx(std::exp(log_p0)).epsilon(1e-7));
        CHECK((state.rho - s1.rho).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("click jump") {
    auto op = small_params(Interaction::antiStokes, 0.0);
    auto s = thermal_product_state(0.8, 12, 26);
    s = evolve_unconditional(s, op, 0.3, 5e-4);
    auto [jumped, rate] = apply_click_jump_exact(s);
    CHECK(rate == doctest::Approx(s.optical_mean()).epsilon(1e-12));
    CHECK(jumped.trace() == doctest::Approx(1.0).epsilon(1e-10));
    SUBCASE("zero rate on vacuum optics") {
        const auto v = thermal_product_state(0.5, 3, 20);
        CHECK_THROWS_AS(apply_click_jump_exact(v), ZeroRateError);
    }
}

TEST_CASE("state validation catches corruption") {
    auto s = thermal_product_state(0.5, 4, 20);
    SUBCASE("hermiticity") {
        s.rho(1, 2) += std::complex<double>(0.0, 1e-6);
        CHECK_THROWS_AS(validate_state(s), DomainError);
    }
    SUBCASE("trace") {
        s.rho *= 1.001;
        CHECK_THROWS_AS(validate_state(s), DomainError);
    }
    SUBCASE("positivity") {
        s.rho(0, 0) -= 1e-4;
        s.rho(5, 5) += 1e-4;
        s.rho(0, 5) = s.rho(5, 0) = 0.2;
        CHECK_THROWS_AS(validate_state(s), DomainError);
    }
}

TEST_CASE("binary round trip") {
    auto op = small_params(Interaction::stokes, 0.0);
    auto s = thermal_product_state(0.4, 10, 24);
    s = evolve_unconditional(s, op, 0.05, 5e-4);
    const std::string path = "fock_roundtrip.bin";
    write_binary(s, path);
    const auto r = read_binary(path);
    std::remove(path.c_str());
    CHECK(r.d_opt == s.d_opt);
    CHECK(r.d_mech == s.d_mech);
    CHECK((r.rho - s.rho).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}
