#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fkmc/estimators.hpp"
#include "fkmc/kernel_table.hpp"
#include "fkmc/model.hpp"
#include "fkmc/paths.hpp"
#include "fkmc/quadrature.hpp"

namespace fkmc {

// One fully resolved run description: everything the batch commands need.
// Built from a JSON document (defaults overlaid with user keys, unknown
// keys rejected); the resolved document itself is kept for embedding in
// result summaries so a run can be reproduced from its own output.
struct RunConfig {
    ModelParams params;  // horizon mirrors grid.horizon
    TimeGrid grid;
    int64_t n_paths = 10000;
    uint64_t master_seed = 1;
    EstimatorOptions opts;  // mode, tau, log_weight_cap, n_workers, collision_floor
    QuadratureConfig quad;
    TableGridSpec table;  // hull edges 0 = derived from the grid

    std::string sweep_parameter = "none";  // none|epsilon|lambda|g|horizon|dt|momentum
    std::vector<double> sweep_values;
    std::vector<Eigen::VectorXd> sweep_momenta;  // momentum sweeps only
    bool common_random_numbers = true;

    std::string out_dir = ".";
    bool write_json = true;
    bool write_csv = true;

    nlohmann::json resolved;  // the document this config was built from
};

// The documented defaults (schema_version 1) as a JSON document.
nlohmann::json default_config_json();

// Overlay user keys on the defaults.  Any key absent from the defaults, or
// holding a JSON type other than the default's, throws ConfigError naming
// the dotted key path.  Arrays are replaced wholesale.
nlohmann::json merge_config(const nlohmann::json& user);

// Interpret a resolved document (as produced by merge_config) and validate
// the values.  Throws ConfigError on out-of-range entries.
RunConfig interpret_config(const nlohmann::json& resolved);

// merge + interpret in one step.
RunConfig load_config(const nlohmann::json& user);

// Deterministic JSON serialization: keys in stored (alphabetical) order,
// floating-point numbers at 17 significant digits so the document
// round-trips bit-exactly.
std::string write_json(const nlohmann::json& value, int indent = 2);

// One sweep point: the base config with the swept parameter applied.  For
// common_random_numbers the master seed is shared across points, otherwise
// it advances by the point index.
struct SweepPoint {
    std::string label;  // e.g. "epsilon=0.25"
    double value = 0.0; // scalar parameter value (0 for momentum sweeps)
    RunConfig config;
};

// Expand the sweep section into concrete run configurations (a single
// point labeled by the model when sweep_parameter is "none").  Momentum
// sweeps are not expanded here: they share one weight set and are handled
// by the diamagnetic driver.
std::vector<SweepPoint> expand_sweep(const RunConfig& base);

}  // namespace fkmc
