#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fkmc/model.hpp"
#include "fkmc/quadrature.hpp"

namespace fkmc {

enum class KernelId : uint32_t {
    pair_potential = 0,
    rho = 1,
    rho_radial_derivative = 2,
    polaron = 3,
};

// Direct evaluator (r, t) -> kernel value for the given id under params.
// Only d, epsilon, lambda of params matter here.
std::function<double(double, double)> kernel_function(KernelId id, const ModelParams& params,
                                                      const QuadratureConfig& quad = {});

struct TableGridSpec {
    // Requested hull: interpolation serves exactly r in [r_min, r_max],
    // t in [t_min, t_max].  All four must be > 0 (grids are logarithmic);
    // the builder pads one ghost node beyond each edge so the full hull is
    // interior to the cubic stencil.
    double r_min = 0.0, r_max = 0.0;
    double t_min = 0.0, t_max = 0.0;
    int n_r = 256;
    int n_t = 256;
    // Validation: measured max interpolation error (mixed relative metric,
    // see KernelTable::validate) over >= n_validation_probes random points
    // must not exceed requested_error_bound, else the build throws.
    double requested_error_bound = 1e-4;
    int n_validation_probes = 1000;
    uint64_t validation_seed = 0x7ab1e5eedu;
};

// Immutable bicubic interpolation table on a log-log (r, t) grid, with
// measured validation error and direct-quadrature fallback outside the
// hull.  Cubic Hermite with 4th-order slopes along r (where kernels
// oscillate), Catmull-Rom along t (monotone decay).  Thread-safe for
// concurrent reads.
class KernelTable {
  public:
    KernelTable() = default;

    // Fills the grid by direct quadrature, then validates against
    // n_validation_probes fresh random points inside the hull.  Throws
    // TableValidationError if the measured error bound exceeds
    // spec.requested_error_bound.
    static KernelTable build(KernelId id, const ModelParams& params, const TableGridSpec& spec,
                             const QuadratureConfig& quad = {});

    bool in_hull(double r, double t) const;

    // Bicubic interpolation; requires in_hull(r, t).
    double interpolate(double r, double t) const;

    // interpolate inside the hull, direct quadrature outside (bit-identical
    // to calling the kernel operation with the build-time QuadratureConfig).
    double operator()(double r, double t) const;

    // Hot-loop form: freeze the t-direction stencil once per time gap, then
    // sweep r.  stencil.inside is false when t lies outside [t_min, t_max].
    struct TStencil {
        int j = 0;
        double w0 = 0, w1 = 0, w2 = 0, w3 = 0;
        double t = 0;
        bool inside = false;
    };
    TStencil t_stencil(double t) const;
    double interpolate_at(const TStencil& s, double r) const;  // requires radial hull + s.inside

    // Re-measure the interpolation error on n fresh probes (max of
    // |interp - direct| / max(|direct|, 1e-3 * max_abs_value); the floor
    // keeps the metric finite where a sign-changing kernel crosses zero).
    double validate(int n_probes, uint64_t seed) const;

    // Grid introspection (node coordinates include the ghost nodes).
    int n_r() const { return spec_.n_r; }
    int n_t() const { return spec_.n_t; }
    double r_node(int i) const;
    double t_node(int j) const;
    double value_at(int i, int j) const { return values_[static_cast<size_t>(i) * spec_.n_t + j]; }

    KernelId id() const { return id_; }
    const ModelParams& params() const { return params_; }
    const TableGridSpec& spec() const { return spec_; }
    double interp_error_bound() const { return interp_error_bound_; }
    double max_abs_value() const { return max_abs_; }

    // Versioned little-endian binary image; load rebuilds the fallback
    // evaluator from the stored kernel id and parameters.
    void save_binary(const std::string& path) const;
    static KernelTable load_binary(const std::string& path, const QuadratureConfig& quad = {});

    // Human-readable dump: one "r,t,value" row per node.
    void write_csv(std::ostream& out) const;

  private:
    KernelId id_ = KernelId::pair_potential;
    ModelParams params_;
    TableGridSpec spec_;
    QuadratureConfig quad_;
    std::function<double(double, double)> direct_;
    std::vector<double> values_;  // row-major, values_[i_r * n_t + i_t]
    double u0_r_ = 0, du_r_ = 0;  // log-r grid: node_i = u0_r + i * du_r
    double u0_t_ = 0, du_t_ = 0;
    double interp_error_bound_ = 0;
    double max_abs_ = 0;

    void init_grid();
};

// One-dimensional log-radius analogue used where a kernel factorizes or is
// needed only along r (polaron core, coherent-state profile slices).
class RadialTable {
  public:
    RadialTable() = default;
    static RadialTable build(const std::function<double(double)>& fn, double r_min, double r_max,
                             int n_nodes);
    bool in_range(double r) const { return r >= r_min_ && r <= r_max_; }
    double interpolate(double r) const;  // requires in_range(r)
    double node(int i) const;
    double value_at(int i) const { return values_[i]; }
    int size() const { return static_cast<int>(values_.size()); }

  private:
    std::vector<double> values_;
    double r_min_ = 0, r_max_ = 0;
    double u0_ = 0, du_ = 0;
};

}  // namespace fkmc
