#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "fkmc/run_config.hpp"

namespace fkmc {

// Exit-code contract shared by every batch command:
//   0 success, 2 configuration error, 3 quadrature/table failure,
//   4 estimator failure (weight cap, noise-dominated energy, divergence).
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitQuadrature = 3;
inline constexpr int kExitEstimator = 4;

// Flags specific to the kernels command; everything else (params,
// quadrature, table spec, output) comes from the RunConfig.
struct KernelsOptions {
    std::string kernel = "w";  // w | rho | drho | polaron
    std::vector<std::array<double, 2>> at;  // (r, t) evaluation points
    bool write_grid_csv = false;            // sample the kernel on the table grid
    std::string table_path;                 // serialized KernelTable on request
};

// Prints the closed-form cross-checks and any requested point values,
// optionally writing a grid CSV (r, t, value) and a binary table.
int cmd_kernels(const RunConfig& cfg, const KernelsOptions& opts, std::ostream& out);

// Runs the configured estimate (or sweep) and writes one JSON summary per
// point plus a sweep CSV.  Momentum sweeps share one weight set and row
// format (the diamagnetic report).  On failure the summary JSON records
// the reason and the mapped exit code is returned.
int cmd_estimate(const RunConfig& cfg, std::ostream& out);

// Overlap ratio per sweep point with the analytic lower-bound column and a
// bound_satisfied flag (within three delta-method standard errors).
// Requires P = 0.
int cmd_gamma(const RunConfig& cfg, std::ostream& out);

}  // namespace fkmc
