#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fkmc/estimators.hpp"
#include "fkmc/model.hpp"
#include "fkmc/paths.hpp"
#include "fkmc/stats.hpp"

namespace fkmc {

// One polaron estimation setup: forward paths on [0, T] pinned at 0.
struct PolaronRun {
    ModelParams params;  // model = polaron, d = 3
    TimeGrid grid;       // two_sided = false
    int64_t n_paths = 0;
    uint64_t master_seed = 0;

    void validate() const;  // throws std::invalid_argument
};

// Direct double Riemann sum dt^2 sum_{i,j} e^{-|gap|} core(|B_i - B_j|)
// over [0,T]^2.  The time dependence of the polaron kernel factorizes
// exactly, so the sum multiplies the damping per pair; summing the full
// kernel W^pol(r, gap) term by term gives the bit-identical value.  The
// diagonal i = j (constant dt^2 n core(0)) enters only for eps > 0; at
// eps = 0 the kernel diverges at r = 0 and the diagonal carries no
// measure.  collision_floor > 0 clamps off-diagonal distances below the
// floor to the floor (each event counted in *collisions); with no floor a
// coincident off-diagonal pair propagates the kernel's divergence error.
double polaron_action(const BrownianPath& path, const ModelParams& params,
                      const std::function<double(double)>& core,
                      double collision_floor = 0.0, int64_t* collisions = nullptr);

// The i != j part of polaron_action; estimators add the constant diagonal
// term themselves so core(0) is derived once per run instead of per path.
double polaron_action_offdiagonal(const BrownianPath& path,
                                  const std::function<double(double)>& core,
                                  double collision_floor = 0.0, int64_t* collisions = nullptr);

// MC mean of e^{iP.B_T} e^{(g^2/2) S^pol} over forward paths.  No
// counterterm is applied in any mode: eps > 0, eps = 0 (lambda > 0), and
// the IR limit eps = lambda = 0 differ only through the kernel.  The
// collision floor from opts applies when eps = 0 (the only case where the
// kernel is singular at r = 0); events are reported via counters.
MCEstimate polaron_vacuum(const PolaronRun& run, const KernelBundle& kernels,
                          const EstimatorOptions& opts, RunCounters* counters = nullptr);

// Refinement stress test of the exponential moment
// E[e^{(g^2/2) S^pol}] in the IR-limit kernel (eps = lambda = 0,
// core = pi^2 / r): the same underlying paths are bridged to halved dt
// n_levels - 1 times, and the estimate sequence is reported with
// near-collision counts per level.  "stabilized" means the relative
// change between the two finest levels is below drift_threshold;
// "growing" flags a systematic increase with refinement (an estimator
// artifact near the 1/r singularity), which is reported, not thrown.
struct KatoLevel {
    double dt = 0.0;
    MCEstimate estimate;
    int64_t collision_events = 0;
};
struct KatoReport {
    std::vector<KatoLevel> levels;
    double final_rel_change = 0.0;
    double drift_threshold = 0.0;
    bool stabilized = false;
    bool growing = false;
};
KatoReport kato_moment_stress(const PolaronRun& run, int n_levels,
                              double drift_threshold, const EstimatorOptions& opts);

}  // namespace fkmc
