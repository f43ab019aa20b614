#include "fkmc/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "fkmc/errors.hpp"
#include "fkmc/kernels.hpp"
#include "fkmc/parallel.hpp"
#include "fkmc/polaron.hpp"
#include "fkmc/rng.hpp"

namespace fkmc {

void parallel_ranges(int64_t n, int n_workers,
                     const std::function<void(int64_t, int64_t)>& fn) {
    if (n <= 0) return;
    const int64_t nw = std::clamp<int64_t>(n_workers, 1, n);
    if (nw == 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nw));
    std::exception_ptr first_error;
    std::mutex error_mutex;
    int64_t lo = 0;
    const int64_t base = n / nw, extra = n % nw;
    for (int64_t w = 0; w < nw; ++w) {
        const int64_t hi = lo + base + (w < extra ? 1 : 0);
        pool.emplace_back([&fn, &first_error, &error_mutex, lo, hi] {
            try {
                fn(lo, hi);
            } catch (...) {
                std::lock_guard<std::mutex> guard(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
        lo = hi;
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

std::string fnv1a_hex(const std::string& text) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

// n_workers is deliberately left out: the estimate does not depend on it.
std::string run_fingerprint(const ModelParams& params, const TimeGrid& grid,
                            const QuadratureConfig& quad, const EstimatorOptions& opts) {
    char buf[320];
    std::snprintf(buf, sizeof buf,
                  "|grid:%.17g,%d,%d|quad:%.17g,%.17g,%d|opts:%d,%.17g,%.17g,%.17g",
                  grid.horizon, grid.n_half, grid.two_sided ? 1 : 0, quad.abs_tol, quad.rel_tol,
                  quad.panel_order, opts.mode == ActionMode::renormalized ? 1 : 0, opts.tau,
                  opts.log_weight_cap, opts.collision_floor);
    return fnv1a_hex(params.fingerprint() + buf);
}

KernelBundle::KernelBundle(const ModelParams& params, const TimeGrid& grid,
                           const std::vector<KernelId>& table_ids, const QuadratureConfig& quad,
                           const TableGridSpec& base, double excursion_multiple)
    : params_(params), quad_(quad) {
    params_.validate();
    grid.validate();
    if (!(excursion_multiple > 0.0))
        throw std::invalid_argument("KernelBundle: excursion_multiple must be positive");

    const double span = grid.two_sided ? 2.0 * grid.horizon : grid.horizon;
    TableGridSpec spec = base;
    // Caller-supplied hull edges win; unset ones follow the grid.  The time
    // hull is padded by a relative 1e-9 so gaps assembled as m * dt land
    // inside even when m * dt rounds a ulp past the span.
    if (!(spec.r_min > 0.0)) spec.r_min = 1e-4 * std::sqrt(span);
    if (!(spec.r_max > 0.0)) spec.r_max = excursion_multiple * std::sqrt(span);
    if (!(spec.t_min > 0.0)) spec.t_min = grid.dt() * (1.0 - 1e-9);
    if (!(spec.t_max > 0.0)) spec.t_max = span * (1.0 + 1e-9);
    // The automatic radial hull covers ~5 decades, wider than hand-built
    // tables; the oscillatory kernels need a denser radial grid there to
    // meet the validation bound.
    spec.n_r = std::max(base.n_r, 640);

    core_direct_ = [p = params_, q = quad_](double r) {
        return polaron_core(p.epsilon, p.lambda, r, q);
    };

    for (KernelId id : table_ids) {
        if (id == KernelId::polaron) {
            // The polaron kernel factorizes in time, so a radial table of the
            // core replaces the 2D table.  The low edge sits under the default
            // collision floor so floored distances still interpolate.
            const double r_lo = std::min(spec.r_min, 0.5e-6 * std::sqrt(grid.horizon));
            RadialTable table = RadialTable::build(core_direct_, r_lo, spec.r_max, 1024);
            // Probe check against direct evaluation, mixed relative metric.
            double max_abs = 0.0;
            for (int i = 0; i < table.size(); ++i)
                max_abs = std::max(max_abs, std::abs(table.value_at(i)));
            const double log_lo = std::log(r_lo), log_hi = std::log(spec.r_max);
            double worst = 0.0;
            for (uint64_t p = 0; p < 200; ++p) {
                const auto bits = philox4x64({p, 0, 0, 0}, {spec.validation_seed,
                                                            0x9E3779B97F4A7C15ull});
                const double r = std::exp(log_lo + (log_hi - log_lo) * uniform_from_bits(bits[0]));
                const double direct = core_direct_(r);
                const double err = std::abs(table.interpolate(r) - direct) /
                                   std::max(std::abs(direct), 1e-3 * max_abs);
                worst = std::max(worst, err);
            }
            if (worst > 1e-5)
                throw TableValidationError("polaron core table probe error " +
                                           std::to_string(worst) + " exceeds 1e-5");
            core_table_ = std::move(table);
        } else {
            tables_.emplace(id, KernelTable::build(id, params_, spec, quad_));
        }
    }
}

ActionKernel KernelBundle::kernel(KernelId id) const {
    auto it = tables_.find(id);
    if (it != tables_.end()) return ActionKernel(it->second);
    return ActionKernel(kernel_function(id, params_, quad_));
}

std::function<double(double)> KernelBundle::core() const {
    if (core_table_) {
        const RadialTable* table = &*core_table_;
        auto direct = core_direct_;
        return [table, direct](double r) {
            return table->in_range(r) ? table->interpolate(r) : direct(r);
        };
    }
    return core_direct_;
}

namespace {

// Everything a worker needs to turn one path into a log-weight for the
// two-sided pair model.  The constant diagonal term of the direct action is
// derived once here, not once per path.
struct NelsonPlan {
    ActionMode mode = ActionMode::renormalized;
    double half_g2 = 0.0;
    double tau = 0.0;
    double diagonal = 0.0;
    ActionKernel w, rho, drho;

    NelsonPlan(const ModelParams& params, const TimeGrid& grid, const KernelBundle& kernels,
               const EstimatorOptions& opts)
        : mode(opts.mode),
          half_g2(0.5 * params.g * params.g),
          tau(opts.tau > 0.0 ? opts.tau : 2.0 * grid.horizon),
          w(kernels.kernel(KernelId::pair_potential)),
          rho(kernels.kernel(KernelId::rho)),
          drho(kernels.kernel(KernelId::rho_radial_derivative)) {
        if (mode == ActionMode::direct && params.epsilon > 0.0) {
            const double dt = grid.dt();
            diagonal = dt * dt * grid.n_steps() * w(0.0, 0.0);
        }
    }

    double action(const BrownianPath& path, const ModelParams& params) const {
        if (mode == ActionMode::direct) return action_direct_offdiagonal(path, w) + diagonal;
        return action_renormalized(path, params, tau, w, rho, drho).total;
    }
};

void require_nelson_two_sided(const ModelParams& params, const TimeGrid& grid, int64_t n_paths,
                              const char* who) {
    params.validate();
    grid.validate();
    if (params.model != Model::nelson)
        throw std::invalid_argument(std::string(who) + ": params.model must be nelson");
    if (!grid.two_sided)
        throw std::invalid_argument(std::string(who) + ": grid must be two sided");
    if (n_paths < 2) throw std::invalid_argument(std::string(who) + ": n_paths must be >= 2");
}

[[noreturn]] void throw_cap(const char* who, int64_t hits, double cap) {
    throw EstimatorError(std::string(who) + ": " + std::to_string(hits) +
                             " path log-weight(s) exceeded the cap " + std::to_string(cap) +
                             "; reduce g or T, or raise log_weight_cap",
                         hits);
}

}  // namespace

MCEstimate vacuum_expectation(const ModelParams& params, const TimeGrid& grid, int64_t n_paths,
                              uint64_t master_seed, const KernelBundle& kernels,
                              const EstimatorOptions& opts, RunCounters* counters) {
    require_nelson_two_sided(params, grid, n_paths, "vacuum_expectation");
    const NelsonPlan plan(params, grid, kernels, opts);
    const bool zero_g = params.g == 0.0;  // weights identically 1, skip the action

    std::vector<std::complex<double>> samples(static_cast<size_t>(n_paths));
    std::atomic<int64_t> cap_hits{0};
    parallel_ranges(n_paths, opts.n_workers, [&](int64_t lo, int64_t hi) {
        for (int64_t p = lo; p < hi; ++p) {
            const BrownianPath path =
                sample_path(grid, params.d, master_seed, static_cast<uint64_t>(p));
            const double lw = zero_g ? 0.0 : plan.half_g2 * plan.action(path, params);
            if (!(lw <= opts.log_weight_cap)) {  // also catches NaN
                ++cap_hits;
                continue;
            }
            const double weight = std::exp(lw);
            const double phase = params.total_momentum.dot(endpoint_increment(path));
            samples[static_cast<size_t>(p)] = {weight * std::cos(phase),
                                               weight * std::sin(phase)};
        }
    });
    if (cap_hits > 0) throw_cap("vacuum_expectation", cap_hits.load(), opts.log_weight_cap);
    if (counters) *counters = RunCounters{};
    return summarize_samples(samples, master_seed,
                             run_fingerprint(params, grid, kernels.quad(), opts));
}

MCEstimate gamma_overlap(const ModelParams& params, const TimeGrid& grid, int64_t n_paths,
                         uint64_t master_seed, const KernelBundle& kernels,
                         const EstimatorOptions& opts, RunCounters* counters) {
    require_nelson_two_sided(params, grid, n_paths, "gamma_overlap");
    if (params.total_momentum.norm() != 0.0)
        throw std::invalid_argument("gamma_overlap: requires P = 0 (weights must be real)");
    if (params.d == 3 && !(params.epsilon > 0.0))
        throw std::invalid_argument(
            "gamma_overlap: d = 3 requires eps > 0 (the cross term has no eps = 0 limit)");

    const ActionKernel w = kernels.kernel(KernelId::pair_potential);
    const double half_g2 = 0.5 * params.g * params.g;
    const double g2 = params.g * params.g;
    // Same diagonal constant in numerator and denominator: it cancels in the
    // ratio but keeps each weight the true direct-action weight.
    double diagonal = 0.0;
    if (params.epsilon > 0.0) {
        const double dt = grid.dt();
        diagonal = dt * dt * grid.n_steps() * w(0.0, 0.0);
    }

    const bool zero_g = params.g == 0.0;
    std::vector<double> num(static_cast<size_t>(n_paths)), den(static_cast<size_t>(n_paths));
    std::atomic<int64_t> cap_hits{0};
    parallel_ranges(n_paths, opts.n_workers, [&](int64_t lo, int64_t hi) {
        for (int64_t p = lo; p < hi; ++p) {
            const BrownianPath path =
                sample_path(grid, params.d, master_seed, static_cast<uint64_t>(p));
            const double action = zero_g ? 0.0 : action_direct_offdiagonal(path, w) + diagonal;
            const double cross = zero_g ? 0.0 : action_cross_rectangle(path, w);
            const double lw_den = half_g2 * action;
            const double lw_num = lw_den - g2 * cross;
            if (!(lw_den <= opts.log_weight_cap) || !(lw_num <= opts.log_weight_cap)) {
                ++cap_hits;
                continue;
            }
            den[static_cast<size_t>(p)] = std::exp(lw_den);
            num[static_cast<size_t>(p)] = std::exp(lw_num);
        }
    });
    if (cap_hits > 0) throw_cap("gamma_overlap", cap_hits.load(), opts.log_weight_cap);
    if (counters) *counters = RunCounters{};

    const RatioEstimate ratio = ratio_delta_method(num, den);
    MCEstimate out;
    out.mean = {ratio.value, 0.0};
    out.std_error = ratio.std_error;
    out.n_samples = ratio.n_samples;
    out.master_seed = master_seed;
    out.params_fingerprint = run_fingerprint(params, grid, kernels.quad(), opts);
    return out;
}

double gamma_lower_bound(const ModelParams& params, const QuadratureConfig& quad) {
    params.validate();
    const double eps = params.epsilon, lam = params.lambda;
    double integral = 0.0;
    if (params.d == 2) {
        if (!(lam > 0.0))
            throw DivergenceError("gamma_lower_bound: d = 2 needs lambda > 0 (infrared)");
        if (eps == 0.0) {
            integral = 2.0 * kPi / lam;
        } else {
            const auto f = [eps](double k) { return std::exp(-eps * k * k) / (k * k); };
            TailProfile tail;
            tail.gauss = eps;
            tail.power = -2.0;
            integral = 2.0 * kPi *
                       integrate_semi_infinite(f, lam, Oscillation::none, 0.0, tail, 1.0, quad);
        }
    } else {
        if (!(eps > 0.0))
            throw DivergenceError("gamma_lower_bound: d = 3 needs eps > 0 (ultraviolet)");
        if (!(lam > 0.0))
            throw DivergenceError("gamma_lower_bound: d = 3 needs lambda > 0 (infrared)");
        const auto f = [eps](double k) { return std::exp(-eps * k * k) / k; };
        TailProfile tail;
        tail.gauss = eps;
        tail.power = -1.0;
        integral =
            4.0 * kPi * integrate_semi_infinite(f, lam, Oscillation::none, 0.0, tail, 1.0, quad);
    }
    return std::exp(-params.g * params.g * integral);
}

double energy(const ModelParams& params, const TimeGrid& grid, int64_t n_paths,
              uint64_t master_seed, const KernelBundle& kernels, const EstimatorOptions& opts,
              RunCounters* counters) {
    MCEstimate est;
    double span = 0.0;
    if (params.model == Model::polaron) {
        PolaronRun run;
        run.params = params;
        run.grid = grid;
        run.n_paths = n_paths;
        run.master_seed = master_seed;
        est = polaron_vacuum(run, kernels, opts, counters);
        span = grid.horizon;
    } else {
        est = vacuum_expectation(params, grid, n_paths, master_seed, kernels, opts, counters);
        span = 2.0 * grid.horizon;
    }
    const double re = est.mean.real();
    if (!(re > 0.0))
        throw EstimatorError("energy: Re mean = " + std::to_string(re) +
                             " is not positive; the estimate is noise-dominated at this "
                             "n_paths / T");
    return -std::log(re) / span;
}

DiamagneticReport diamagnetic_check(const ModelParams& params,
                                    const std::vector<Eigen::VectorXd>& momenta,
                                    const TimeGrid& grid, int64_t n_paths, uint64_t master_seed,
                                    const KernelBundle& kernels, const EstimatorOptions& opts,
                                    RunCounters* counters) {
    params.validate();
    grid.validate();
    if (n_paths < 2) throw std::invalid_argument("diamagnetic_check: n_paths must be >= 2");
    for (const auto& P : momenta)
        if (P.size() != params.d)
            throw std::invalid_argument("diamagnetic_check: momentum size must equal d");

    const bool polaron = params.model == Model::polaron;
    if (polaron && grid.two_sided)
        throw std::invalid_argument("diamagnetic_check: polaron grid must be forward");
    if (!polaron && !grid.two_sided)
        throw std::invalid_argument("diamagnetic_check: nelson grid must be two sided");

    const double half_g2 = 0.5 * params.g * params.g;
    const double span = grid.two_sided ? 2.0 * grid.horizon : grid.horizon;

    // One weight and one endpoint increment per path, shared by every P.
    std::vector<double> weights(static_cast<size_t>(n_paths));
    Eigen::MatrixXd increments(params.d, n_paths);
    std::atomic<int64_t> cap_hits{0}, collision_events{0};

    if (polaron) {
        PolaronRun run;
        run.params = params;
        run.grid = grid;
        run.n_paths = n_paths;
        run.master_seed = master_seed;
        run.validate();
        const auto core = kernels.core();
        const double floor_opt = opts.collision_floor < 0.0
                                     ? 1e-6 * std::sqrt(grid.horizon)
                                     : opts.collision_floor;
        const double floor = params.epsilon == 0.0 ? floor_opt : 0.0;
        double diagonal = 0.0;
        if (params.epsilon > 0.0) {
            const double dt = grid.dt();
            diagonal = dt * dt * grid.n_steps() * core(0.0);
        }
        const bool zero_g = params.g == 0.0;
        parallel_ranges(n_paths, opts.n_workers, [&](int64_t lo, int64_t hi) {
            for (int64_t p = lo; p < hi; ++p) {
                const BrownianPath path =
                    sample_path(grid, params.d, master_seed, static_cast<uint64_t>(p));
                int64_t coll = 0;
                const double action =
                    zero_g ? 0.0 : polaron_action_offdiagonal(path, core, floor, &coll) + diagonal;
                collision_events += coll;
                const double lw = half_g2 * action;
                if (!(lw <= opts.log_weight_cap)) {
                    ++cap_hits;
                    continue;
                }
                weights[static_cast<size_t>(p)] = std::exp(lw);
                increments.col(p) = endpoint_increment(path);
            }
        });
    } else {
        const NelsonPlan plan(params, grid, kernels, opts);
        const bool zero_g = params.g == 0.0;
        parallel_ranges(n_paths, opts.n_workers, [&](int64_t lo, int64_t hi) {
            for (int64_t p = lo; p < hi; ++p) {
                const BrownianPath path =
                    sample_path(grid, params.d, master_seed, static_cast<uint64_t>(p));
                const double lw = zero_g ? 0.0 : plan.half_g2 * plan.action(path, params);
                if (!(lw <= opts.log_weight_cap)) {
                    ++cap_hits;
                    continue;
                }
                weights[static_cast<size_t>(p)] = std::exp(lw);
                increments.col(p) = endpoint_increment(path);
            }
        });
    }
    if (cap_hits > 0) throw_cap("diamagnetic_check", cap_hits.load(), opts.log_weight_cap);
    if (counters) {
        *counters = RunCounters{};
        counters->collision_events = collision_events.load();
    }

    std::vector<Eigen::VectorXd> points;
    points.reserve(momenta.size() + 1);
    points.push_back(Eigen::VectorXd::Zero(params.d));
    for (const auto& P : momenta) points.push_back(P);

    DiamagneticReport report;
    report.entries.reserve(points.size());
    std::vector<std::complex<double>> samples(static_cast<size_t>(n_paths));
    for (const auto& P : points) {
        for (int64_t p = 0; p < n_paths; ++p) {
            const double phase = P.dot(increments.col(p));
            const double wgt = weights[static_cast<size_t>(p)];
            samples[static_cast<size_t>(p)] = {wgt * std::cos(phase), wgt * std::sin(phase)};
        }
        const MCEstimate est = summarize_samples(samples, master_seed, "");
        DiamagneticEntry entry;
        entry.P = P;
        entry.mean = est.mean;
        entry.std_error = est.std_error;
        entry.modulus = std::abs(entry.mean);
        report.entries.push_back(entry);
    }

    report.v0 = report.entries.front().mean.real();
    const double e0 = -std::log(report.v0) / span;
    report.all_bounded = true;
    report.all_energy_ordered = true;
    for (auto& entry : report.entries) {
        entry.bounded = entry.modulus <= report.v0;
        const double re = entry.mean.real();
        entry.energy = re > 0.0 ? -std::log(re) / span : std::nan("");
        entry.energy_ordered = std::isnan(entry.energy) || entry.energy >= e0;
        report.all_bounded = report.all_bounded && entry.bounded;
        report.all_energy_ordered = report.all_energy_ordered && entry.energy_ordered;
    }
    return report;
}

double ProfileSpec::rho_hat(double k) const {
    return kind == Kind::gaussian ? std::exp(-scale * k * k) : std::exp(-scale * k);
}

void ProfileSpec::validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw std::invalid_argument("ProfileSpec: scale must be positive and finite");
}

namespace {

TailProfile profile_tail(const ProfileSpec& p, double power, double extra_expo) {
    TailProfile tail;
    if (p.kind == ProfileSpec::Kind::gaussian)
        tail.gauss = p.scale;
    else
        tail.expo = p.scale;
    tail.expo += extra_expo;
    tail.power = power;
    return tail;
}

void require_coherent_params(const ModelParams& params, const char* who) {
    params.validate();
    if (params.model != Model::nelson || params.d != 3)
        throw std::invalid_argument(std::string(who) + ": coherent profiles are d = 3 nelson");
}

}  // namespace

double profile_norm2(const ProfileSpec& p, const ModelParams& params,
                     const QuadratureConfig& quad) {
    require_coherent_params(params, "profile_norm2");
    p.validate();
    const auto f = [&p](double k) {
        const double rh = p.rho_hat(k);
        return k * rh * rh;
    };
    TailProfile tail = profile_tail(p, 1.0, 0.0);
    if (p.kind == ProfileSpec::Kind::gaussian)
        tail.gauss *= 2.0;
    else
        tail.expo *= 2.0;
    return 4.0 * kPi *
           integrate_semi_infinite(f, params.lambda, Oscillation::none, 0.0, tail, 1.0, quad);
}

double profile_cross(const ProfileSpec& p1, const ProfileSpec& p2, const ModelParams& params,
                     const QuadratureConfig& quad) {
    require_coherent_params(params, "profile_cross");
    p1.validate();
    p2.validate();
    const double u = 2.0 * params.horizon;
    const auto f = [&](double k) { return k * p1.rho_hat(k) * p2.rho_hat(k) * std::exp(-u * k); };
    TailProfile tail = profile_tail(p1, 1.0, u);
    if (p2.kind == ProfileSpec::Kind::gaussian)
        tail.gauss += p2.scale;
    else
        tail.expo += p2.scale;
    return 4.0 * kPi *
           integrate_semi_infinite(f, params.lambda, Oscillation::none, 0.0, tail, 1.0, quad);
}

double profile_field_kernel(const ProfileSpec& p, const ModelParams& params, double r, double u,
                            const QuadratureConfig& quad) {
    require_coherent_params(params, "profile_field_kernel");
    p.validate();
    if (r < 0.0 || u < 0.0)
        throw std::invalid_argument("profile_field_kernel: r and u must be >= 0");
    if (r == 0.0) {
        const auto f = [&](double k) { return std::pow(k, 1.5) * p.rho_hat(k) * std::exp(-u * k); };
        const TailProfile tail = profile_tail(p, 1.5, u);
        return 4.0 * kPi *
               integrate_semi_infinite(f, params.lambda, Oscillation::none, 0.0, tail, 1.0, quad);
    }
    const double prefactor = 4.0 * kPi / r;
    QuadratureConfig cfg = quad;  // tolerance refers to the returned value
    cfg.abs_tol = quad.abs_tol / std::max(1.0, prefactor);
    const auto f = [&](double k) {
        return std::sqrt(k) * p.rho_hat(k) * std::exp(-u * k) * std::sin(k * r);
    };
    const TailProfile tail = profile_tail(p, 0.5, u);
    return prefactor *
           integrate_semi_infinite(f, params.lambda, Oscillation::sine, r, tail, 1.0, cfg);
}

std::complex<double> coherent_xi(const BrownianPath& path, const CoherentState& state,
                                 const ModelParams& params, const QuadratureConfig& quad) {
    require_coherent_params(params, "coherent_xi");
    if (!path.grid.two_sided)
        throw std::invalid_argument("coherent_xi: path must live on a two-sided grid");
    const std::complex<double> ac = std::conj(state.alpha);
    const std::complex<double> b = state.beta;

    std::complex<double> xi = ac * ac * profile_norm2(state.rho1, params, quad) +
                              b * b * profile_norm2(state.rho2, params, quad) +
                              2.0 * ac * b * profile_cross(state.rho1, state.rho2, params, quad);

    const double T = path.grid.horizon;
    const double dt = path.grid.dt();
    double sum1 = 0.0, sum2 = 0.0;
    for (int i = 0; i < path.grid.n_steps(); ++i) {  // left endpoints
        const double r = path.positions.col(i).norm();
        const double t = path.grid.node(i);
        sum1 += profile_field_kernel(state.rho1, params, r, T - t, quad);
        sum2 += profile_field_kernel(state.rho2, params, r, t + T, quad);
    }
    xi += 2.0 * ac * params.g * (dt * sum1) + 2.0 * b * params.g * (dt * sum2);
    return xi;
}

MCEstimate coherent_expectation(const ModelParams& params, const TimeGrid& grid, int64_t n_paths,
                                uint64_t master_seed, const KernelBundle& kernels,
                                const CoherentState& state, const EstimatorOptions& opts,
                                RunCounters* counters) {
    require_nelson_two_sided(params, grid, n_paths, "coherent_expectation");
    require_coherent_params(params, "coherent_expectation");
    state.rho1.validate();
    state.rho2.validate();
    const NelsonPlan plan(params, grid, kernels, opts);
    const QuadratureConfig& quad = kernels.quad();

    const std::complex<double> ac = std::conj(state.alpha);
    const std::complex<double> b = state.beta;
    const std::complex<double> xi_const =
        ac * ac * profile_norm2(state.rho1, params, quad) +
        b * b * profile_norm2(state.rho2, params, quad) +
        2.0 * ac * b * profile_cross(state.rho1, state.rho2, params, quad);
    const std::complex<double> coef1 = 2.0 * ac * params.g * grid.dt();
    const std::complex<double> coef2 = 2.0 * b * params.g * grid.dt();
    // With both coefficients zero the path terms drop out and the slices
    // below would be dead weight.
    const bool field_terms = !(ac == 0.0 && b == 0.0);

    // The field kernels K_i(r, u) are needed only at the grid's u values, so
    // they are sliced into one radial table per node up front; per path each
    // node then costs one interpolation.
    const int n_left = grid.n_steps();
    const double span = 2.0 * grid.horizon;
    const double r_lo = 1e-6, r_hi = 8.0 * std::sqrt(span);
    const int n_nodes = 512;
    std::vector<RadialTable> k1(n_left), k2(n_left);
    std::vector<double> k1_origin(n_left), k2_origin(n_left);
    std::vector<double> u1(n_left), u2(n_left);
    for (int i = 0; i < n_left && field_terms; ++i) {
        const double t = grid.node(i);
        u1[i] = grid.horizon - t;
        u2[i] = t + grid.horizon;
        const auto f1 = [&](double r) { return profile_field_kernel(state.rho1, params, r, u1[i], quad); };
        const auto f2 = [&](double r) { return profile_field_kernel(state.rho2, params, r, u2[i], quad); };
        k1[i] = RadialTable::build(f1, r_lo, r_hi, n_nodes);
        k2[i] = RadialTable::build(f2, r_lo, r_hi, n_nodes);
        k1_origin[i] = profile_field_kernel(state.rho1, params, 0.0, u1[i], quad);
        k2_origin[i] = profile_field_kernel(state.rho2, params, 0.0, u2[i], quad);
    }
    // Spot-check a few slices against direct quadrature.
    for (int i = 0; i < n_left && field_terms; i += std::max(1, n_left / 4)) {
        double max_abs = 0.0;
        for (int a = 0; a < n_nodes; ++a) max_abs = std::max(max_abs, std::abs(k1[i].value_at(a)));
        for (uint64_t pb = 0; pb < 16; ++pb) {
            const auto bits = philox4x64({pb, static_cast<uint64_t>(i), 1, 0},
                                         {master_seed, 0x9E3779B97F4A7C15ull});
            const double r =
                std::exp(std::log(r_lo) + std::log(r_hi / r_lo) * uniform_from_bits(bits[0]));
            const double direct = profile_field_kernel(state.rho1, params, r, u1[i], quad);
            const double err = std::abs(k1[i].interpolate(r) - direct) /
                               std::max(std::abs(direct), 1e-3 * max_abs);
            if (err > 1e-4)
                throw TableValidationError("coherent field-kernel slice probe error " +
                                           std::to_string(err) + " exceeds 1e-4");
        }
    }

    std::vector<std::complex<double>> samples(static_cast<size_t>(n_paths));
    std::atomic<int64_t> cap_hits{0};
    parallel_ranges(n_paths, opts.n_workers, [&](int64_t lo, int64_t hi) {
        for (int64_t p = lo; p < hi; ++p) {
            const BrownianPath path =
                sample_path(grid, params.d, master_seed, static_cast<uint64_t>(p));
            double sum1 = 0.0, sum2 = 0.0;
            for (int i = 0; i < n_left && field_terms; ++i) {
                const double r = path.positions.col(i).norm();
                if (r < r_lo) {
                    sum1 += k1_origin[i];
                    sum2 += k2_origin[i];
                } else if (r <= r_hi) {
                    sum1 += k1[i].interpolate(r);
                    sum2 += k2[i].interpolate(r);
                } else {
                    sum1 += profile_field_kernel(state.rho1, params, r, u1[i], quad);
                    sum2 += profile_field_kernel(state.rho2, params, r, u2[i], quad);
                }
            }
            const std::complex<double> xi = xi_const + coef1 * sum1 + coef2 * sum2;
            const double lw = (params.g == 0.0 ? 0.0 : plan.half_g2 * plan.action(path, params)) +
                              xi.real() / 4.0;
            if (!(lw <= opts.log_weight_cap)) {
                ++cap_hits;
                continue;
            }
            const double weight = std::exp(lw);
            const double phase =
                params.total_momentum.dot(endpoint_increment(path)) + xi.imag() / 4.0;
            samples[static_cast<size_t>(p)] = {weight * std::cos(phase),
                                               weight * std::sin(phase)};
        }
    });
    if (cap_hits > 0) throw_cap("coherent_expectation", cap_hits.load(), opts.log_weight_cap);
    if (counters) *counters = RunCounters{};

    char extra[160];
    std::snprintf(extra, sizeof extra, "|coh:%.17g,%.17g,%.17g,%.17g,%d,%.17g,%d,%.17g",
                  state.alpha.real(), state.alpha.imag(), state.beta.real(), state.beta.imag(),
                  static_cast<int>(state.rho1.kind), state.rho1.scale,
                  static_cast<int>(state.rho2.kind), state.rho2.scale);
    return summarize_samples(
        samples, master_seed,
        fnv1a_hex(run_fingerprint(params, grid, kernels.quad(), opts) + extra));
}

}  // namespace fkmc
