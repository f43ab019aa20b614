#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>

namespace fkmc {

// Uniform time grid for path sampling.  Two flavors share one struct:
//
//   two_sided = true   nodes t_i = -T + i dt, i = 0..2 n_half   (pair model)
//   two_sided = false  nodes t_i =      i dt, i = 0..n_half     (polaron)
//
// In both cases dt = T / n_half, so n_half is "steps per half-interval" for
// the two-sided grid and simply the step count for the forward grid.  The
// origin t = 0 is always a node; paths are pinned to zero there.
struct TimeGrid {
    double horizon = 1.0;  // T
    int n_half = 64;       // steps per half-interval; dt = T / n_half
    bool two_sided = true;

    double dt() const { return horizon / n_half; }
    int n_steps() const { return two_sided ? 2 * n_half : n_half; }
    int n_nodes() const { return n_steps() + 1; }
    int zero_index() const { return two_sided ? n_half : 0; }
    double node(int i) const { return (two_sided ? -horizon : 0.0) + i * dt(); }

    void validate() const;  // throws std::invalid_argument
};

// A sampled Brownian path: one position per grid node, column i of
// `positions` holding the d-vector at node i.  Immutable by convention once
// sampled; tests may also fill the fields directly to inject special paths.
//
// The sample identifier is the pair (master_seed, path_index): path i is
// bit-identical no matter how many paths a run draws, in what order, or on
// how many workers.  `level` counts dyadic refinements applied on top of
// the base sampling (see refine_path).
struct BrownianPath {
    TimeGrid grid;
    Eigen::MatrixXd positions;  // d x n_nodes
    uint64_t master_seed = 0;
    uint64_t path_index = 0;
    int level = 0;

    int dimension() const { return static_cast<int>(positions.rows()); }
};

// Draws the path by cumulative sums of i.i.d. N(0, dt) per-coordinate
// increments outward from the t = 0 node: forward increments consume
// Gaussian stream indices 0..d*n_fwd-1, backward increments the following
// block.  Deterministic given (grid, d, master_seed, path_index).
BrownianPath sample_path(const TimeGrid& grid, int d, uint64_t master_seed,
                         uint64_t path_index);

// Brownian-bridge refinement: halves dt by inserting conditionally-correct
// midpoints, drawn from the stream tagged with the new refinement level.
// Coarse nodes are carried over bit-exactly, which is what makes paired
// dt-convergence studies (same underlying path, finer sampling) possible.
BrownianPath refine_path(const BrownianPath& path);

// B_T - B_{-T} on a two-sided grid; B_T - B_0 = B_T on a forward grid.
Eigen::VectorXd endpoint_increment(const BrownianPath& path);

// Debug dump: header "t,x1,..,xd", one row per node, 17 significant digits.
void write_csv(const BrownianPath& path, std::ostream& out);

}  // namespace fkmc
