#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fkmc/paths.hpp"

using namespace fkmc;

TEST_CASE("grids: node layout and pinning") {
    const TimeGrid two{1.0, 8, true};
    CHECK(two.dt() == 0.125);
    CHECK(two.n_steps() == 16);
    CHECK(two.n_nodes() == 17);
    CHECK(two.node(0) == -1.0);
    CHECK(two.node(two.zero_index()) == 0.0);
    CHECK(two.node(16) == doctest::Approx(1.0).epsilon(1e-15));

    const TimeGrid fwd{2.0, 8, false};
    CHECK(fwd.n_steps() == 8);
    CHECK(fwd.zero_index() == 0);
    CHECK(fwd.node(0) == 0.0);

    CHECK_THROWS_AS((TimeGrid{-1.0, 8, true}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((TimeGrid{1.0, 0, true}.validate()), std::invalid_argument);
}

TEST_CASE("paths are pinned at the time origin and deterministic") {
    const TimeGrid grid{1.0, 16, true};
    const BrownianPath a = sample_path(grid, 3, 42, 7);
    CHECK(a.positions.rows() == 3);
    CHECK(a.positions.cols() == grid.n_nodes());
    CHECK(a.positions.col(grid.zero_index()).norm() == 0.0);

    const BrownianPath b = sample_path(grid, 3, 42, 7);
    CHECK((a.positions - b.positions).norm() == 0.0);  // bit identical

    const BrownianPath c = sample_path(grid, 3, 42, 8);
    const BrownianPath d = sample_path(grid, 3, 43, 7);
    CHECK((a.positions - c.positions).norm() != 0.0);
    CHECK((a.positions - d.positions).norm() != 0.0);
}

TEST_CASE("refinement keeps coarse nodes bit-exactly") {
    const TimeGrid grid{1.0, 8, true};
    const BrownianPath coarse = sample_path(grid, 3, 5, 11);
    const BrownianPath fine = refine_path(coarse);
    CHECK(fine.level == coarse.level + 1);
    CHECK(fine.grid.n_half == 16);
    CHECK(fine.grid.dt() == coarse.grid.dt() / 2.0);
    CHECK(fine.positions.cols() == 2 * coarse.positions.cols() - 1);
    for (int i = 0; i < coarse.positions.cols(); ++i)
        CHECK((fine.positions.col(2 * i) - coarse.positions.col(i)).norm() == 0.0);
    CHECK((endpoint_increment(fine) - endpoint_increment(coarse)).norm() == 0.0);

    // Refining twice is deterministic too.
    const BrownianPath f2a = refine_path(refine_path(coarse));
    const BrownianPath f2b = refine_path(refine_path(sample_path(grid, 3, 5, 11)));
    CHECK((f2a.positions - f2b.positions).norm() == 0.0);
}

TEST_CASE("endpoint increments have the Brownian variance") {
    const TimeGrid grid{1.0, 32, true};  // span 2T = 2
    const int d = 3, n = 4000;
    double sum2 = 0.0, sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto db = endpoint_increment(sample_path(grid, d, 2024, (uint64_t)i));
        sum2 += db.squaredNorm();
        sum += db[0];
    }
    // E|dB|^2 = d * span; Var of the estimator ~ 2 d span^2 / n.
    const double span = 2.0;
    const double se2 = std::sqrt(2.0 * d * span * span / n);
    CHECK(std::abs(sum2 / n - d * span) < 3.0 * se2);
    // Mean of one component ~ N(0, span/n).
    CHECK(std::abs(sum / n) < 3.0 * std::sqrt(span / n));

    // Forward grids: B_T itself.
    const TimeGrid fwd{0.5, 16, false};
    double fsum2 = 0.0;
    for (int i = 0; i < n; ++i)
        fsum2 += endpoint_increment(sample_path(fwd, 3, 77, (uint64_t)i)).squaredNorm();
    CHECK(std::abs(fsum2 / n - 3 * 0.5) < 3.0 * std::sqrt(2.0 * 3 * 0.25 / n));
}

TEST_CASE("refinement midpoints are conditionally correct in law") {
    // Midpoint - mean of neighbors ~ N(0, dt_fine) per coordinate.
    const TimeGrid grid{1.0, 4, true};
    const int n = 4000;
    double s2 = 0.0;
    int count = 0;
    for (int i = 0; i < n; ++i) {
        const BrownianPath f = refine_path(sample_path(grid, 2, 9, (uint64_t)i));
        for (int j = 1; j < f.positions.cols(); j += 2) {
            const double mid =
                f.positions(0, j) - 0.5 * (f.positions(0, j - 1) + f.positions(0, j + 1));
            s2 += mid * mid;
            ++count;
        }
    }
    // Bridge midpoint over a coarse step h deviates from the endpoint
    // average by N(0, h/4).
    const double want = grid.dt() / 4.0;
    CHECK(std::abs(s2 / count - want) < 4.0 * std::sqrt(2.0 / count) * want);
}

TEST_CASE("csv dump has one row per node") {
    const TimeGrid grid{1.0, 4, true};
    std::ostringstream out;
    write_csv(sample_path(grid, 2, 1, 0), out);
    int lines = 0;
    for (char ch : out.str())
        if (ch == '\n') ++lines;
    CHECK(lines == grid.n_nodes() + 1);  // header + nodes
}
