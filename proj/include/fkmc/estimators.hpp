#pragma once

#include <complex>
#include <map>
#include <optional>
#include <vector>

#include "fkmc/actions.hpp"
#include "fkmc/kernel_table.hpp"
#include "fkmc/model.hpp"
#include "fkmc/paths.hpp"
#include "fkmc/stats.hpp"

namespace fkmc {

// Which per-path action feeds the weight e^{(g^2/2) S}.
//   direct        S as summed from the pair potential (diagonal included
//                 for eps > 0, skipped at eps = 0)
//   renormalized  the tau-split form with the diagonal divergence removed
enum class ActionMode { direct, renormalized };

struct EstimatorOptions {
    ActionMode mode = ActionMode::renormalized;
    double tau = 0.0;              // window for renormalized mode; <= 0 means 2T
    double log_weight_cap = 700.0; // natural-log cap on per-path weights
    int n_workers = 1;             // path-range parallelism; result independent of it
    double collision_floor = -1.0; // polaron eps=0 distance floor; < 0 means 1e-6 sqrt(T)
};

// Per-estimate side counters (zero when not applicable).
struct RunCounters {
    int64_t weight_cap_hits = 0;
    int64_t collision_events = 0;
};

// Owns the kernel tables one estimate needs and hands out ActionKernel
// views over them.  Tables are built for the hull the grid can reach (time
// gaps [dt, 2T_span], radii up to excursion_multiple * sqrt(span)); any
// kernel not listed in table_ids is served by direct quadrature instead.
// For the polaron the time dependence factorizes, so a 1D radial table of
// the core replaces the 2D table.
class KernelBundle {
  public:
    KernelBundle(const ModelParams& params, const TimeGrid& grid,
                 const std::vector<KernelId>& table_ids,
                 const QuadratureConfig& quad = {}, const TableGridSpec& base = {},
                 double excursion_multiple = 8.0);

    ActionKernel kernel(KernelId id) const;       // table-backed if built, else direct
    std::function<double(double)> core() const;   // polaron core r -> W^pol(r, 0)

    const ModelParams& params() const { return params_; }
    const QuadratureConfig& quad() const { return quad_; }

  private:
    ModelParams params_;
    QuadratureConfig quad_;
    std::map<KernelId, KernelTable> tables_;
    std::optional<RadialTable> core_table_;
    std::function<double(double)> core_direct_;
};

// Canonical fingerprint of everything that determines an estimate's value
// besides the seed: model params, grid, quadrature tolerances, estimator
// options.  FNV-1a over a fixed text serialization.
std::string run_fingerprint(const ModelParams& params, const TimeGrid& grid,
                            const QuadratureConfig& quad, const EstimatorOptions& opts);

// MC mean of e^{iP.dB} e^{(g^2/2) S} over two-sided paths (Nelson pair
// model).  dB is the endpoint increment B_T - B_{-T}.  In direct mode S is
// the plain double Riemann sum; in renormalized mode it is the tau-split
// form whose eps -> 0 limit exists.  Per-path weights accumulate in log
// space; any path whose log-weight exceeds opts.log_weight_cap aborts the
// estimate with EstimatorError (cap hits counted inside the exception).
// counters, when given, receives the side counts on success.
MCEstimate vacuum_expectation(const ModelParams& params, const TimeGrid& grid,
                              int64_t n_paths, uint64_t master_seed,
                              const KernelBundle& kernels, const EstimatorOptions& opts,
                              RunCounters* counters = nullptr);

// Overlap ratio gamma(T): numerator weight removes the coupling between
// the two half-intervals (EXP of (g^2/2) S - g^2 X with X the cross
// rectangle), denominator is the vacuum weight; both run over the same
// path set and the error is the delta-method ratio error.  Requires P = 0
// (weights real and positive).  Returned MCEstimate holds the real ratio.
MCEstimate gamma_overlap(const ModelParams& params, const TimeGrid& grid, int64_t n_paths,
                         uint64_t master_seed, const KernelBundle& kernels,
                         const EstimatorOptions& opts, RunCounters* counters = nullptr);

// Analytic lower bound for gamma(T): exp(-g^2 I) with I the momentum
// integral of the squared form factor over omega^3 (d=2: 2 pi
// int_lambda^inf e^{-eps k^2} k^-2 dk, closed form 2 pi / lambda at
// eps = 0; d=3: 4 pi int_lambda^inf e^{-eps k^2} / k dk, requires
// eps > 0).  Throws DivergenceError when the integral is infinite.
double gamma_lower_bound(const ModelParams& params, const QuadratureConfig& quad = {});

// The finite-T energy estimate E(P, T) = -ln(Re mean) / time_span, where
// time_span is 2T for the two-sided pair model and T for the polaron.
// Throws EstimatorError when Re mean <= 0 (noise has overwhelmed the
// signal at this n_paths / T).
double energy(const ModelParams& params, const TimeGrid& grid, int64_t n_paths,
              uint64_t master_seed, const KernelBundle& kernels,
              const EstimatorOptions& opts, RunCounters* counters = nullptr);

// Diamagnetic sweep: one set of strictly positive weights w_j (drawn at
// the common seed) is shared by every P; the estimator modulus
// |sum_j e^{iP.dB_j} w_j| can then never exceed sum_j w_j, a pathwise
// triangle-inequality fact checked exactly, together with the implied
// E(0) <= E(P) ordering.  Works for both models (the polaron weight uses
// its own action and forward paths).
struct DiamagneticEntry {
    Eigen::VectorXd P;
    std::complex<double> mean;   // V(P)
    double std_error = 0.0;
    double modulus = 0.0;        // |V(P)|
    double energy = 0.0;         // -ln(Re V(P))/span; NaN when Re <= 0
    bool bounded = false;        // |V(P)| <= V(0)
    bool energy_ordered = false; // E(0) <= E(P) (true when energy is NaN)
};
struct DiamagneticReport {
    std::vector<DiamagneticEntry> entries;  // first entry is P = 0
    double v0 = 0.0;                        // V(0), real
    bool all_bounded = false;
    bool all_energy_ordered = false;
};
DiamagneticReport diamagnetic_check(const ModelParams& params,
                                    const std::vector<Eigen::VectorXd>& momenta,
                                    const TimeGrid& grid, int64_t n_paths,
                                    uint64_t master_seed, const KernelBundle& kernels,
                                    const EstimatorOptions& opts,
                                    RunCounters* counters = nullptr);

// Radial momentum profile rho_hat(k) for coherent-state matrix elements.
struct ProfileSpec {
    enum class Kind { gaussian, exponential } kind = Kind::gaussian;
    double scale = 1.0;  // rho_hat(k) = exp(-scale k^2) | exp(-scale k)

    double rho_hat(double k) const;
    void validate() const;  // scale > 0 and finite
};

// The quadratic form xi entering the coherent matrix element
// E[e^{iP.dB} e^{(g^2/2) S_ren + xi/4}] (d = 3, eps = 0):
//
//   xi = conj(a)^2 |rho1/sqrt(w)|^2 + b^2 |rho2/sqrt(w)|^2
//      + 2 conj(a) b (rho1/sqrt(w), e^{-2Tw} rho2/sqrt(w))
//      + 2 conj(a) g int_-T^T K1(|B_s|, |s-T|) ds
//      + 2 b g int_-T^T K2(|B_s|, |s+T|) ds
//
// with K_i(r, u) = (4 pi / r) int_lambda^inf sqrt(k) rho_i(k) e^{-uk}
// sin(kr) dk (r = 0: 4 pi int k^{3/2} rho_i e^{-uk} dk).  The s-integral
// is a left Riemann sum on the path grid.
struct CoherentState {
    std::complex<double> alpha{0.0, 0.0};
    std::complex<double> beta{0.0, 0.0};
    ProfileSpec rho1;
    ProfileSpec rho2;
};

// Profile norms (the path-independent pieces of xi), by quadrature.
double profile_norm2(const ProfileSpec& p, const ModelParams& params,
                     const QuadratureConfig& quad = {});
double profile_cross(const ProfileSpec& p1, const ProfileSpec& p2, const ModelParams& params,
                     const QuadratureConfig& quad = {});
double profile_field_kernel(const ProfileSpec& p, const ModelParams& params, double r,
                            double u, const QuadratureConfig& quad = {});

std::complex<double> coherent_xi(const BrownianPath& path, const CoherentState& state,
                                 const ModelParams& params,
                                 const QuadratureConfig& quad = {});

// MC mean of e^{iP.dB} e^{(g^2/2) S_ren + xi/4}; the field kernels are
// sliced into per-node radial tables once (the time arguments are grid
// constants), so the per-path cost stays at one interpolation per node.
MCEstimate coherent_expectation(const ModelParams& params, const TimeGrid& grid,
                                int64_t n_paths, uint64_t master_seed,
                                const KernelBundle& kernels, const CoherentState& state,
                                const EstimatorOptions& opts,
                                RunCounters* counters = nullptr);

}  // namespace fkmc
