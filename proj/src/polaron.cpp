#include "fkmc/polaron.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "fkmc/errors.hpp"
#include "fkmc/kernels.hpp"
#include "fkmc/parallel.hpp"

namespace fkmc {

void PolaronRun::validate() const {
    params.validate();
    if (params.model != Model::polaron)
        throw std::invalid_argument("PolaronRun: params.model must be polaron");
    if (params.d != 3) throw std::invalid_argument("PolaronRun: the polaron lives in d = 3");
    grid.validate();
    if (grid.two_sided)
        throw std::invalid_argument("PolaronRun: grid must be forward (paths on [0, T])");
    if (n_paths < 2) throw std::invalid_argument("PolaronRun: n_paths must be >= 2");
}

double polaron_action_offdiagonal(const BrownianPath& path,
                                  const std::function<double(double)>& core,
                                  double collision_floor, int64_t* collisions) {
    if (path.grid.two_sided)
        throw std::invalid_argument("polaron_action: path must live on a forward grid");
    const int n = path.grid.n_steps();  // left-Riemann nodes 0..n-1
    const double dt = path.grid.dt();
    double acc = 0.0;
    int64_t near = 0;
    for (int m = 1; m <= n - 1; ++m) {
        const double damp = std::exp(-(m * dt));
        double row = 0.0;
        for (int i = 0; i + m <= n - 1; ++i) {
            double r = (path.positions.col(i + m) - path.positions.col(i)).norm();
            if (collision_floor > 0.0 && r < collision_floor) {
                ++near;
                r = collision_floor;
            }
            row += damp * core(r);
        }
        acc += row;
    }
    if (collisions) *collisions += near;
    return 2.0 * dt * dt * acc;
}

double polaron_action(const BrownianPath& path, const ModelParams& params,
                      const std::function<double(double)>& core, double collision_floor,
                      int64_t* collisions) {
    double acc = polaron_action_offdiagonal(path, core, collision_floor, collisions);
    if (params.epsilon > 0.0) {
        const double dt = path.grid.dt();
        acc += dt * dt * path.grid.n_steps() * core(0.0);
    }
    return acc;
}

namespace {

double effective_floor(const EstimatorOptions& opts, double horizon) {
    return opts.collision_floor < 0.0 ? 1e-6 * std::sqrt(horizon) : opts.collision_floor;
}

}  // namespace

MCEstimate polaron_vacuum(const PolaronRun& run, const KernelBundle& kernels,
                          const EstimatorOptions& opts, RunCounters* counters) {
    run.validate();
    const auto core = kernels.core();
    const double half_g2 = 0.5 * run.params.g * run.params.g;
    // The kernel is singular at r = 0 only when eps = 0; elsewhere the floor
    // would silently bias the action, so it stays off.
    const double floor = run.params.epsilon == 0.0 ? effective_floor(opts, run.grid.horizon) : 0.0;
    double diagonal = 0.0;
    if (run.params.epsilon > 0.0) {
        const double dt = run.grid.dt();
        diagonal = dt * dt * run.grid.n_steps() * core(0.0);
    }

    const bool zero_g = run.params.g == 0.0;  // weights identically 1, skip the action
    std::vector<std::complex<double>> samples(static_cast<size_t>(run.n_paths));
    std::atomic<int64_t> cap_hits{0}, collision_events{0};
    parallel_ranges(run.n_paths, opts.n_workers, [&](int64_t lo, int64_t hi) {
        for (int64_t p = lo; p < hi; ++p) {
            const BrownianPath path =
                sample_path(run.grid, run.params.d, run.master_seed, static_cast<uint64_t>(p));
            int64_t near = 0;
            const double action =
                zero_g ? 0.0 : polaron_action_offdiagonal(path, core, floor, &near) + diagonal;
            collision_events += near;
            const double lw = half_g2 * action;
            if (!(lw <= opts.log_weight_cap)) {  // also catches NaN
                ++cap_hits;
                continue;
            }
            const double weight = std::exp(lw);
            const double phase = run.params.total_momentum.dot(endpoint_increment(path));
            samples[static_cast<size_t>(p)] = {weight * std::cos(phase),
                                               weight * std::sin(phase)};
        }
    });
    if (cap_hits > 0)
        throw EstimatorError("polaron_vacuum: " + std::to_string(cap_hits.load()) +
                                 " path log-weight(s) exceeded the cap " +
                                 std::to_string(opts.log_weight_cap) +
                                 "; reduce g or T, or raise log_weight_cap",
                             cap_hits.load());
    if (counters) {
        *counters = RunCounters{};
        counters->collision_events = collision_events.load();
    }
    return summarize_samples(samples, run.master_seed,
                             run_fingerprint(run.params, run.grid, kernels.quad(), opts));
}

KatoReport kato_moment_stress(const PolaronRun& run, int n_levels, double drift_threshold,
                              const EstimatorOptions& opts) {
    run.validate();
    if (run.params.epsilon != 0.0 || run.params.lambda != 0.0)
        throw std::invalid_argument("kato_moment_stress: requires the IR-limit kernel "
                                    "(eps = 0, lambda = 0)");
    if (run.params.total_momentum.norm() != 0.0)
        throw std::invalid_argument("kato_moment_stress: requires P = 0");
    if (n_levels < 2) throw std::invalid_argument("kato_moment_stress: needs >= 2 levels");
    if (!(drift_threshold > 0.0))
        throw std::invalid_argument("kato_moment_stress: drift_threshold must be positive");

    // IR-limit core pi^2 / r: closed form, cheap enough to skip tables.
    const QuadratureConfig quad;
    const auto core = [&quad](double r) { return polaron_core(0.0, 0.0, r, quad); };
    const double half_g2 = 0.5 * run.params.g * run.params.g;
    const double floor = effective_floor(opts, run.grid.horizon);

    std::vector<std::vector<std::complex<double>>> samples(
        static_cast<size_t>(n_levels),
        std::vector<std::complex<double>>(static_cast<size_t>(run.n_paths)));
    std::vector<std::atomic<int64_t>> collision_events(static_cast<size_t>(n_levels));
    std::atomic<int64_t> cap_hits{0};

    const bool zero_g = run.params.g == 0.0;
    parallel_ranges(run.n_paths, opts.n_workers, [&](int64_t lo, int64_t hi) {
        for (int64_t p = lo; p < hi; ++p) {
            BrownianPath path =
                sample_path(run.grid, run.params.d, run.master_seed, static_cast<uint64_t>(p));
            for (int level = 0; level < n_levels; ++level) {
                if (level > 0) path = refine_path(path);  // same path, halved dt
                int64_t near = 0;
                const double action =
                    zero_g ? 0.0 : polaron_action_offdiagonal(path, core, floor, &near);
                collision_events[static_cast<size_t>(level)] += near;
                const double lw = half_g2 * action;
                if (!(lw <= opts.log_weight_cap)) {
                    ++cap_hits;
                    continue;
                }
                samples[static_cast<size_t>(level)][static_cast<size_t>(p)] = std::exp(lw);
            }
        }
    });
    if (cap_hits > 0)
        throw EstimatorError("kato_moment_stress: " + std::to_string(cap_hits.load()) +
                                 " log-weight(s) exceeded the cap " +
                                 std::to_string(opts.log_weight_cap),
                             cap_hits.load());

    KatoReport report;
    report.drift_threshold = drift_threshold;
    for (int level = 0; level < n_levels; ++level) {
        TimeGrid fine = run.grid;
        fine.n_half = run.grid.n_half << level;
        KatoLevel entry;
        entry.dt = fine.dt();
        entry.estimate =
            summarize_samples(samples[static_cast<size_t>(level)], run.master_seed,
                              run_fingerprint(run.params, fine, quad, opts));
        entry.collision_events = collision_events[static_cast<size_t>(level)].load();
        report.levels.push_back(std::move(entry));
    }

    const double last = report.levels[static_cast<size_t>(n_levels - 1)].estimate.mean.real();
    const double prev = report.levels[static_cast<size_t>(n_levels - 2)].estimate.mean.real();
    report.final_rel_change = std::abs(last - prev) / std::abs(last);
    report.stabilized = report.final_rel_change < drift_threshold;
    bool increasing = true;
    for (size_t level = 1; level < report.levels.size(); ++level)
        increasing = increasing && report.levels[level].estimate.mean.real() >
                                       report.levels[level - 1].estimate.mean.real();
    report.growing = increasing && !report.stabilized;
    return report;
}

}  // namespace fkmc
