#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "fkmc/errors.hpp"
#include "fkmc/kernel_table.hpp"
#include "fkmc/kernels.hpp"
#include "fkmc/rng.hpp"

using namespace fkmc;

namespace {

ModelParams test_params() {
    ModelParams p;
    p.d = 3;
    p.epsilon = 0.5;
    p.lambda = 1.0;
    return p;
}

TableGridSpec small_spec() {
    TableGridSpec s;
    s.r_min = 0.01;
    s.r_max = 8.0;
    s.t_min = 0.01;
    s.t_max = 2.0;
    s.n_r = 256;
    s.n_t = 128;
    return s;
}

// Deterministic log-uniform probe points inside the hull.
double log_uniform(double lo, double hi, double u) {
    return lo * std::exp(u * std::log(hi / lo));
}

}  // namespace

TEST_CASE("table interpolation meets its measured error bound") {
    const auto params = test_params();
    const auto spec = small_spec();
    const KernelTable table = KernelTable::build(KernelId::pair_potential, params, spec);
    CHECK(table.interp_error_bound() <= spec.requested_error_bound);

    const auto direct = kernel_function(KernelId::pair_potential, params);
    double worst = 0.0;
    for (int i = 0; i < 60; ++i) {
        const PhiloxCounter ctr{(uint64_t)i, 17, 0, 0};
        const PhiloxKey key{99, 0};
        const auto bits = philox4x64(ctr, key);
        const double r = log_uniform(spec.r_min, spec.r_max, uniform_from_bits(bits[0]));
        const double t = log_uniform(spec.t_min, spec.t_max, uniform_from_bits(bits[1]));
        const double got = table(r, t), want = direct(r, t);
        worst = std::max(worst, std::abs(got - want) / std::max(1e-3, std::abs(want)));
    }
    // Fresh probes may land slightly past the measured bound; 2x headroom.
    CHECK(worst <= 2.0 * spec.requested_error_bound);
}

TEST_CASE("outside the hull the table falls back to direct quadrature") {
    const auto params = test_params();
    const KernelTable table = KernelTable::build(KernelId::rho, params, small_spec());
    const auto direct = kernel_function(KernelId::rho, params);
    CHECK(!table.in_hull(20.0, 1.0));
    CHECK(!table.in_hull(1.0, 5.0));
    CHECK(table(20.0, 1.0) == direct(20.0, 1.0));  // same code path, bit identical
    CHECK(table(1.0, 5.0) == direct(1.0, 5.0));
    CHECK(table.in_hull(0.5, 0.5));
}

TEST_CASE("t-stencil evaluation equals plain interpolation") {
    const auto params = test_params();
    const KernelTable table =
        KernelTable::build(KernelId::pair_potential, params, small_spec());
    for (double t : {0.02, 0.3, 1.7}) {
        const auto stencil = table.t_stencil(t);
        REQUIRE(stencil.inside);
        for (double r : {0.05, 0.9, 6.0})
            CHECK(table.interpolate_at(stencil, r) == table.interpolate(r, t));
    }
}

TEST_CASE("binary save/load round trip preserves values bit-exactly") {
    const auto params = test_params();
    const KernelTable table = KernelTable::build(KernelId::rho, params, small_spec());
    const auto path = std::filesystem::temp_directory_path() / "fkmc_table_rt.bin";
    table.save_binary(path.string());
    const KernelTable loaded = KernelTable::load_binary(path.string());
    std::filesystem::remove(path);
    for (double r : {0.02, 0.11, 0.9, 3.0, 7.5})
        for (double t : {0.015, 0.4, 1.9}) CHECK(loaded(r, t) == table(r, t));
    CHECK(loaded.interp_error_bound() == table.interp_error_bound());
}

TEST_CASE("an unattainable validation bound fails the build") {
    auto spec = small_spec();
    spec.n_r = 24;
    spec.n_t = 12;
    spec.requested_error_bound = 1e-12;
    CHECK_THROWS_AS(KernelTable::build(KernelId::pair_potential, test_params(), spec),
                    TableValidationError);
}

TEST_CASE("radial table interpolates the polaron core") {
    auto core = [](double r) { return polaron_core(0.25, 0.5, r); };
    const RadialTable table = RadialTable::build(core, 1e-3, 12.0, 512);
    CHECK(table.in_range(0.5));
    CHECK(!table.in_range(13.0));
    for (double r : {2e-3, 0.07, 0.5, 3.0, 11.0})
        CHECK(table.interpolate(r) == doctest::Approx(core(r)).epsilon(1e-6));
}
