#include "fkmc/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fkmc/errors.hpp"
#include "fkmc/special_functions.hpp"

namespace fkmc {

namespace {

constexpr double pi = std::numbers::pi;

void check_args(int d, double eps, double lambda, double r) {
    if (d != 2 && d != 3) throw std::invalid_argument("kernel: d must be 2 or 3");
    if (!(eps >= 0.0)) throw std::invalid_argument("kernel: eps must be >= 0");
    if (!(lambda >= 0.0)) throw std::invalid_argument("kernel: lambda must be >= 0");
    if (!(r >= 0.0)) throw std::invalid_argument("kernel: r must be >= 0");
}

// abs_tol is a contract on the returned value; pre-divide by the radial
// prefactor applied after integration.
QuadratureConfig scaled(QuadratureConfig cfg, double prefactor) {
    cfg.abs_tol /= std::max(1.0, std::abs(prefactor));
    return cfg;
}

}  // namespace

double pair_potential_w(int d, double eps, double lambda, double r, double t,
                        const QuadratureConfig& cfg) {
    check_args(d, eps, lambda, r);
    t = std::abs(t);
    if (eps == 0.0 && t == 0.0) {
        if (r == 0.0)
            throw DivergenceError("pair potential: divergent at coincident points when eps = 0");
        if (d == 3) return 2.0 * pi * std::cos(lambda * r) / (r * r);
        // Abel limit in d = 2: (pi / r) (1 - int_0^{lambda r} J0(u) du)
        const double head =
            integrate_adaptive([](double u) { return bessel_j0(u); }, 0.0, lambda * r,
                               cfg.abs_tol, cfg.rel_tol, cfg.max_adaptive_depth);
        return pi / r * (1.0 - head);
    }
    TailProfile tail;
    tail.gauss = eps;
    tail.expo = t;
    if (d == 3) {
        if (r == 0.0) {
            tail.power = 1.0;
            const auto f = [=](double k) { return k * std::exp(-eps * k * k - k * t); };
            return 2.0 * pi * integrate_semi_infinite(f, lambda, Oscillation::none, 0.0, tail,
                                                      1.0, scaled(cfg, 2.0 * pi));
        }
        const double pref = 2.0 * pi / r;
        const auto f = [=](double k) { return std::exp(-eps * k * k - k * t) * std::sin(k * r); };
        return pref *
               integrate_semi_infinite(f, lambda, Oscillation::sine, r, tail, 1.0, scaled(cfg, pref));
    }
    const auto f = [=](double k) { return std::exp(-eps * k * k - k * t) * bessel_j0(k * r); };
    return pi * integrate_semi_infinite(f, lambda,
                                        r > 0.0 ? Oscillation::bessel_j0 : Oscillation::none, r,
                                        tail, 1.0, scaled(cfg, pi));
}

double rho_kernel(int d, double eps, double lambda, double r, double t,
                  const QuadratureConfig& cfg) {
    check_args(d, eps, lambda, r);
    t = std::abs(t);
    if (d == 2 && lambda == 0.0)
        throw DivergenceError("rho kernel: infrared divergent in d = 2 at lambda = 0");
    if (r == 0.0 && t == 0.0) return rho_diag(d, eps, lambda, cfg);
    TailProfile tail;
    tail.gauss = eps;
    tail.expo = t;
    tail.beta = true;
    if (d == 3) {
        if (r == 0.0) {
            tail.power = 1.0;
            const auto f = [=](double k) {
                return k * std::exp(-eps * k * k - k * t) * propagator_beta(k);
            };
            return 2.0 * pi * integrate_semi_infinite(f, lambda, Oscillation::none, 0.0, tail,
                                                      1.0, scaled(cfg, 2.0 * pi));
        }
        const double pref = 2.0 * pi / r;
        const auto f = [=](double k) {
            return std::exp(-eps * k * k - k * t) * propagator_beta(k) * std::sin(k * r);
        };
        return pref *
               integrate_semi_infinite(f, lambda, Oscillation::sine, r, tail, 1.0, scaled(cfg, pref));
    }
    const auto f = [=](double k) {
        return std::exp(-eps * k * k - k * t) * propagator_beta(k) * bessel_j0(k * r);
    };
    return pi * integrate_semi_infinite(f, lambda,
                                        r > 0.0 ? Oscillation::bessel_j0 : Oscillation::none, r,
                                        tail, 1.0, scaled(cfg, pi));
}

double rho_radial_derivative(int d, double eps, double lambda, double r, double t,
                             const QuadratureConfig& cfg) {
    check_args(d, eps, lambda, r);
    t = std::abs(t);
    if (d == 2 && lambda == 0.0)
        throw DivergenceError("rho kernel: infrared divergent in d = 2 at lambda = 0");
    if (r == 0.0) return 0.0;  // rho is an even, smooth function of x
    TailProfile tail;
    tail.gauss = eps;
    tail.expo = t;
    tail.beta = true;
    if (d == 3) {
        tail.power = 2.0;
        const auto f = [=](double k) {
            return k * k * std::exp(-eps * k * k - k * t) * propagator_beta(k) *
                   sinc_derivative(k * r);
        };
        // |sinc'| <= 1/2 everywhere
        return 2.0 * pi * integrate_semi_infinite(f, lambda, Oscillation::sine_derivative, r,
                                                  tail, 0.5, scaled(cfg, 2.0 * pi));
    }
    tail.power = 1.0;
    const auto f = [=](double k) {
        return k * std::exp(-eps * k * k - k * t) * propagator_beta(k) * bessel_j1(k * r);
    };
    return -pi * integrate_semi_infinite(f, lambda, Oscillation::bessel_j1, r, tail, 1.0,
                                         scaled(cfg, pi));
}

double rho_diag(int d, double eps, double lambda, const QuadratureConfig& cfg) {
    check_args(d, eps, lambda, 0.0);
    if (d == 3) {
        if (eps == 0.0)
            throw DivergenceError("rho(0,0): logarithmically divergent in d = 3 at eps = 0");
        TailProfile tail;
        tail.gauss = eps;
        tail.power = -1.0;  // 1/(2 + k) <= 1/k
        const auto f = [=](double k) { return std::exp(-eps * k * k) / (2.0 + k); };
        return 4.0 * pi * integrate_semi_infinite(f, lambda, Oscillation::none, 0.0, tail, 1.0,
                                                  scaled(cfg, 4.0 * pi));
    }
    if (lambda == 0.0)
        throw DivergenceError("rho(0,0): infrared divergent in d = 2 at lambda = 0");
    TailProfile tail;
    tail.gauss = eps;
    tail.beta = true;
    const auto f = [=](double k) { return std::exp(-eps * k * k) * propagator_beta(k); };
    return pi * integrate_semi_infinite(f, lambda, Oscillation::none, 0.0, tail, 1.0,
                                        scaled(cfg, pi));
}

double polaron_core(double eps, double lambda, double r, const QuadratureConfig& cfg) {
    check_args(3, eps, lambda, r);
    if (eps == 0.0) {
        if (r == 0.0)
            throw DivergenceError("polaron kernel: divergent at coincident points when eps = 0");
        if (lambda == 0.0) return pi * pi / r;
        return (2.0 * pi / r) * (pi / 2.0 - sine_integral(lambda * r));
    }
    if (r == 0.0) return std::pow(pi, 1.5) / std::sqrt(eps) * std::erfc(lambda * std::sqrt(eps));
    TailProfile tail;
    tail.gauss = eps;
    tail.power = -1.0;
    const double pref = 2.0 * pi / r;
    const auto f = [=](double k) { return std::exp(-eps * k * k) * std::sin(k * r) / k; };
    return pref *
           integrate_semi_infinite(f, lambda, Oscillation::sine, r, tail, 1.0, scaled(cfg, pref));
}

double polaron_w(double eps, double lambda, double r, double t, const QuadratureConfig& cfg) {
    return std::exp(-std::abs(t)) * polaron_core(eps, lambda, r, cfg);
}

double counterterm_energy(const ModelParams& params, const QuadratureConfig& cfg) {
    return -params.g * params.g * rho_diag(params.d, params.epsilon, params.lambda, cfg);
}

}  // namespace fkmc
