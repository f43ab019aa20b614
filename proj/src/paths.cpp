#include "fkmc/paths.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "fkmc/rng.hpp"

namespace fkmc {

void TimeGrid::validate() const {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("time grid: horizon must be positive and finite");
    if (n_half < 1) throw std::invalid_argument("time grid: n_half must be >= 1");
}

BrownianPath sample_path(const TimeGrid& grid, int d, uint64_t master_seed,
                         uint64_t path_index) {
    grid.validate();
    if (d != 2 && d != 3) throw std::invalid_argument("sample_path: d must be 2 or 3");

    BrownianPath p;
    p.grid = grid;
    p.master_seed = master_seed;
    p.path_index = path_index;
    p.level = 0;
    p.positions = Eigen::MatrixXd::Zero(d, grid.n_nodes());

    const GaussianStream gauss(master_seed, path_index, 0);
    const double sd = std::sqrt(grid.dt());
    const int z = grid.zero_index();
    const int n_fwd = grid.n_steps() - z;

    uint64_t j = 0;
    for (int k = 0; k < n_fwd; ++k)
        for (int c = 0; c < d; ++c)
            p.positions(c, z + k + 1) = p.positions(c, z + k) + sd * gauss(j++);
    for (int k = 0; k < z; ++k)
        for (int c = 0; c < d; ++c)
            p.positions(c, z - k - 1) = p.positions(c, z - k) + sd * gauss(j++);
    return p;
}

BrownianPath refine_path(const BrownianPath& path) {
    const TimeGrid& g = path.grid;
    g.validate();
    const int d = path.dimension();
    if (path.positions.cols() != g.n_nodes())
        throw std::invalid_argument("refine_path: positions do not match the grid");

    BrownianPath fine;
    fine.grid = g;
    fine.grid.n_half = 2 * g.n_half;
    fine.master_seed = path.master_seed;
    fine.path_index = path.path_index;
    fine.level = path.level + 1;
    fine.positions.resize(d, fine.grid.n_nodes());

    // Midpoint of a Brownian segment of length dt: mean of the endpoints
    // plus an independent N(0, dt/4) kick per coordinate.
    const GaussianStream gauss(path.master_seed, path.path_index,
                               static_cast<uint64_t>(fine.level));
    const double sd = 0.5 * std::sqrt(g.dt());

    for (int k = 0; k < g.n_steps(); ++k) {
        fine.positions.col(2 * k) = path.positions.col(k);
        for (int c = 0; c < d; ++c)
            fine.positions(c, 2 * k + 1) =
                0.5 * (path.positions(c, k) + path.positions(c, k + 1)) +
                sd * gauss(static_cast<uint64_t>(k) * d + c);
    }
    fine.positions.col(fine.grid.n_steps()) = path.positions.col(g.n_steps());
    return fine;
}

Eigen::VectorXd endpoint_increment(const BrownianPath& path) {
    return path.positions.col(path.positions.cols() - 1) - path.positions.col(0);
}

void write_csv(const BrownianPath& path, std::ostream& out) {
    const int d = path.dimension();
    out << "t";
    for (int c = 0; c < d; ++c) out << ",x" << (c + 1);
    out << "\n";
    char buf[32];
    for (int i = 0; i < path.grid.n_nodes(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", path.grid.node(i));
        out << buf;
        for (int c = 0; c < d; ++c) {
            std::snprintf(buf, sizeof(buf), ",%.17g", path.positions(c, i));
            out << buf;
        }
        out << "\n";
    }
}

}  // namespace fkmc
