#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fkmc/errors.hpp"
#include "fkmc/kernels.hpp"
#include "fkmc/model.hpp"
#include "oracles.hpp"

using namespace fkmc;

namespace {
const double kPi = 3.14159265358979323846;
}

TEST_CASE("pair potential diagonal closed forms") {
    // d = 3: W(0,0) = (pi/eps) e^{-eps lambda^2}.
    for (auto [eps, lam] : {std::pair{1.0, 1.0}, {0.5, 2.0}, {2.0, 0.0}, {0.25, 0.5}}) {
        const double want = kPi / eps * std::exp(-eps * lam * lam);
        CHECK(pair_potential_w(3, eps, lam, 0.0, 0.0) ==
              doctest::Approx(want).epsilon(1e-10));
    }
    // d = 2: W(0,0) = pi sqrt(pi / (4 eps)) erfc(lambda sqrt(eps)).
    for (auto [eps, lam] : {std::pair{1.0, 0.0}, {1.0, 1.0}, {0.5, 2.0}}) {
        const double want =
            kPi * std::sqrt(kPi / (4.0 * eps)) * std::erfc(lam * std::sqrt(eps));
        CHECK(pair_potential_w(2, eps, lam, 0.0, 0.0) ==
              doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("rho diagonal: closed form in d = 2, divergences flagged") {
    // d = 2, eps = 0: pi ln((2 + lambda) / lambda).
    CHECK(rho_diag(2, 0.0, 1.0) == doctest::Approx(kPi * std::log(3.0)).epsilon(1e-10));
    CHECK(rho_diag(2, 0.0, 0.5) == doctest::Approx(kPi * std::log(5.0)).epsilon(1e-10));
    // rho_kernel at the origin agrees with rho_diag.
    CHECK(rho_kernel(2, 0.0, 1.0, 0.0, 0.0) ==
          doctest::Approx(rho_diag(2, 0.0, 1.0)).epsilon(1e-10));
    CHECK(rho_kernel(3, 0.5, 1.0, 0.0, 0.0) ==
          doctest::Approx(rho_diag(3, 0.5, 1.0)).epsilon(1e-10));
    // Logarithmic UV divergence in d = 3 at eps = 0; infrared at lambda = 0 in d = 2.
    CHECK_THROWS_AS(rho_diag(3, 0.0, 1.0), DivergenceError);
    CHECK_THROWS_AS(rho_diag(2, 0.5, 0.0), DivergenceError);
    CHECK_THROWS_AS(rho_kernel(2, 0.5, 0.0, 1.0, 0.0), DivergenceError);
}

TEST_CASE("polaron kernel closed forms") {
    // Full IR limit eps = lambda = 0: core(r) = pi^2 / r.
    for (double r : {0.25, 0.5, 2.0, 7.0})
        CHECK(polaron_core(0.0, 0.0, r) == doctest::Approx(kPi * kPi / r).epsilon(1e-12));
    // eps = 0, lambda > 0: (2 pi / r)(pi/2 - Si(lambda r)).
    for (auto [lam, r] : {std::pair{1.0, 1.0}, {0.5, 3.0}, {2.0, 0.4}}) {
        const double want =
            2.0 * kPi / r * (kPi / 2.0 - (double)oracle::ref_si((long double)(lam * r)));
        CHECK(polaron_core(0.0, lam, r) == doctest::Approx(want).epsilon(1e-10));
    }
    // r = 0, eps > 0: pi^{3/2} erfc(lambda sqrt(eps)) / sqrt(eps).
    for (auto [eps, lam] : {std::pair{1.0, 0.0}, {0.25, 1.0}}) {
        const double want =
            std::pow(kPi, 1.5) * std::erfc(lam * std::sqrt(eps)) / std::sqrt(eps);
        CHECK(polaron_core(eps, lam, 0.0) == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK_THROWS_AS(polaron_core(0.0, 1.0, 0.0), DivergenceError);
    // The time factor is exactly exponential.
    for (auto [r, t] : {std::pair{0.5, 0.7}, {2.0, -1.3}})
        CHECK(polaron_w(0.25, 0.5, r, t) ==
              std::exp(-std::abs(t)) * polaron_core(0.25, 0.5, r));
}

TEST_CASE("kernels are even in t and decay in |t|") {
    for (int d : {2, 3}) {
        CHECK(pair_potential_w(d, 0.5, 1.0, 0.7, 1.3) ==
              pair_potential_w(d, 0.5, 1.0, 0.7, -1.3));
        CHECK(rho_kernel(d, 0.5, 1.0, 0.7, 0.4) > rho_kernel(d, 0.5, 1.0, 0.7, 1.9));
        CHECK(pair_potential_w(d, 0.5, 1.0, 0.3, 0.0) >
              pair_potential_w(d, 0.5, 1.0, 0.3, 2.5));
    }
}

TEST_CASE("radial reduction agrees with the d-dimensional lattice integral") {
    // Fast spot check; the wide 20-probe version runs in acceptance.
    struct P {
        int d;
        double eps, lam, r, t;
    };
    for (const P& p : {P{3, 0.25, 1.0, 0.5, 0.3}, P{3, 0.5, 0.5, 2.0, 0.0},
                       P{2, 0.25, 1.0, 1.0, 0.7}, P{2, 0.5, 0.25, 0.2, 1.5}}) {
        const double lw = pair_potential_w(p.d, p.eps, p.lam, p.r, p.t);
        const double lo = oracle::lattice_kernel(p.d, p.eps, p.lam, p.r, p.t, false);
        CHECK(lw == doctest::Approx(lo).epsilon(1e-8));
        const double rw = rho_kernel(p.d, p.eps, p.lam, p.r, p.t);
        const double ro = oracle::lattice_kernel(p.d, p.eps, p.lam, p.r, p.t, true);
        CHECK(rw == doctest::Approx(ro).epsilon(1e-8));
    }
}

TEST_CASE("radial derivative of rho matches finite differences") {
    struct P {
        int d;
        double eps, lam, r, t;
    };
    for (const P& p : {P{3, 0.5, 1.0, 0.8, 0.5}, P{3, 0.0, 1.0, 1.5, 1.0},
                       P{2, 0.5, 1.0, 0.6, 0.2}, P{2, 0.0, 0.5, 2.0, 1.5}}) {
        auto rho_r = [&](double r) { return rho_kernel(p.d, p.eps, p.lam, r, p.t); };
        const double fd = oracle::fd_derivative(rho_r, p.r, 1e-4);
        CHECK(rho_radial_derivative(p.d, p.eps, p.lam, p.r, p.t) ==
              doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("counterterm energy is -g^2 rho(0,0)") {
    ModelParams params;
    params.d = 3;
    params.g = 0.5;
    params.lambda = 1.0;
    params.epsilon = 0.25;
    CHECK(counterterm_energy(params) ==
          doctest::Approx(-0.25 * rho_diag(3, 0.25, 1.0)).epsilon(1e-12));
    params.g = 0.0;
    CHECK(counterterm_energy(params) == 0.0);
}

TEST_CASE("argument validation") {
    CHECK_THROWS_AS(pair_potential_w(4, 1.0, 1.0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(pair_potential_w(3, -1.0, 1.0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(rho_kernel(3, 1.0, -0.5, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(polaron_core(0.5, 1.0, -2.0), std::invalid_argument);
}
