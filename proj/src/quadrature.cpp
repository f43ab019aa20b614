#include "fkmc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <queue>
#include <numbers>

#include "fkmc/errors.hpp"
#include "fkmc/special_functions.hpp"

namespace fkmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void legendre_at(int n, double z, double& p1, double& pp) {
    double p2 = 0.0;
    p1 = 1.0;
    for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    pp = n * (z * p1 - p2) / (z * z - 1.0);
}

GLRule make_rule(int order) {
    GLRule rule;
    rule.x.resize(order);
    rule.w.resize(order);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double p1 = 0.0, pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            legendre_at(order, z, p1, pp);
            const double z1 = z;
            z -= p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        legendre_at(order, z, p1, pp);
        rule.x[i] = -z;
        rule.x[order - 1 - i] = z;
        rule.w[i] = rule.w[order - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    return rule;
}

// Iterated averaging of the partial sums of an (eventually) alternating
// series; the deepest column is the accelerated estimate.
class AveragingTable {
  public:
    double add(double partial_sum) {
        std::vector<double> next(std::min(row_.size() + 1, kMaxDepth));
        next[0] = partial_sum;
        for (std::size_t j = 1; j < next.size(); ++j)
            next[j] = 0.5 * (next[j - 1] + row_[j - 1]);
        row_ = std::move(next);
        return row_.back();
    }

  private:
    static constexpr std::size_t kMaxDepth = 40;
    std::vector<double> row_;
};

struct NodeSequence {
    Oscillation osc;
    double r;
    double operator()(int j) const {
        switch (osc) {
            case Oscillation::sine: return j * std::numbers::pi / r;
            case Oscillation::sine_derivative: return (j + 0.5) * std::numbers::pi / r;
            case Oscillation::bessel_j0: return bessel_j0_zero(j) / r;
            case Oscillation::bessel_j1: return bessel_j1_zero(j) / r;
            default: return kInf;
        }
    }
    int first_index_above(double a) const {
        int j = std::max(1, static_cast<int>(a * r / std::numbers::pi) - 2);
        while ((*this)(j) <= a) ++j;
        return j;
    }
};

}  // namespace

const GLRule& gauss_legendre(int order) {
    static std::map<int, GLRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, make_rule(order)).first;
    return it->second;
}

double gl_panel(const std::function<double(double)>& f, double a, double b, const GLRule& rule) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) acc += rule.w[i] * f(mid + half * rule.x[i]);
    return acc * half;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol, int max_depth) {
    if (a == b) return 0.0;
    const GLRule& lo_rule = gauss_legendre(7);
    const GLRule& hi_rule = gauss_legendre(15);
    struct Seg {
        double a, b, val, err;
        int depth;
        bool operator<(const Seg& o) const { return err < o.err; }
    };
    const auto make_seg = [&](double lo, double hi, int depth) {
        const double v = gl_panel(f, lo, hi, hi_rule);
        return Seg{lo, hi, v, std::abs(v - gl_panel(f, lo, hi, lo_rule)), depth};
    };
    // Globally adaptive: always split the segment with the largest error
    // estimate, so the error budget flows to where the mass is instead of
    // being allocated by length (domains here can span many decades).
    std::priority_queue<Seg> work;
    Seg first = make_seg(a, b, 0);
    double total = first.val, toterr = first.err;
    work.push(first);
    for (int n = 0; n < 100000; ++n) {
        if (toterr <= std::max(abs_tol, rel_tol * std::abs(total))) return total;
        const Seg worst = work.top();
        work.pop();
        if (worst.depth >= max_depth)
            throw QuadratureError("adaptive quadrature: refinement depth exhausted");
        const double m = 0.5 * (worst.a + worst.b);
        const Seg l = make_seg(worst.a, m, worst.depth + 1);
        const Seg r = make_seg(m, worst.b, worst.depth + 1);
        total += l.val + r.val - worst.val;
        toterr += l.err + r.err - worst.err;
        work.push(l);
        work.push(r);
    }
    throw QuadratureError("adaptive quadrature: segment budget exhausted");
}

double tail_integral_bound(const TailProfile& tail, double scale, double K) {
    double p = tail.power;
    double s = scale;
    if (tail.beta) {
        p -= 2.0;
        s *= 2.0;
    }
    K = std::max(K, std::numeric_limits<double>::min());
    if (tail.gauss > 0) {
        const double g = tail.gauss;
        const double damp = std::exp(-tail.expo * K - g * K * K);
        if (p <= 1.0) return s * std::pow(K, p - 1.0) * damp / (2.0 * g);
        if (p <= 3.0) return s * std::pow(K, p - 3.0) * damp * (K * K + 1.0 / g) / (2.0 * g);
        return kInf;  // no kernel here grows faster than k^3
    }
    if (tail.expo > 0) {
        const double e = tail.expo;
        const double damp = std::exp(-e * K);
        if (p <= 0.0) return s * std::pow(K, p) * damp / e;
        if (p <= 1.0)
            return s * std::pow(K, p - 1.0) * damp * (K / e + 1.0 / (e * e));
        if (p <= 2.0)
            return s * std::pow(K, p - 2.0) * damp *
                   (K * K / e + 2.0 * K / (e * e) + 2.0 / (e * e * e));
        if (p <= 3.0)
            return s * std::pow(K, p - 3.0) * damp *
                   (K * K * K / e + 3.0 * K * K / (e * e) + 6.0 * K / (e * e * e) +
                    6.0 / (e * e * e * e));
        return kInf;
    }
    if (p < -1.0) return s * std::pow(K, p + 1.0) / (-p - 1.0);
    return kInf;
}

double choose_kmax(const TailProfile& tail, double scale, double tol, double from) {
    double K = std::max(from, 1.0);
    if (tail_integral_bound(tail, scale, K) <= tol) return std::max(from, 0.0);
    double hi = K;
    while (tail_integral_bound(tail, scale, hi) > tol) {
        hi *= 1.5;
        if (hi > 1e300) return kInf;
    }
    double lo = hi / 1.5;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (tail_integral_bound(tail, scale, mid) > tol ? lo : hi) = mid;
    }
    return hi;
}

double integrate_semi_infinite(const std::function<double(double)>& f, double a, Oscillation osc,
                               double r, const TailProfile& tail, double scale,
                               const QuadratureConfig& cfg) {
    const double trunc_tol = cfg.abs_tol / cfg.tail_safety;
    const double kmax = choose_kmax(tail, scale, trunc_tol, a);
    const bool osc_active = cfg.oscillation_splitting && osc != Oscillation::none && r > 0;

    if (!osc_active) {
        if (std::isinf(kmax)) {
            // Algebraic decay only: head plus a 1/k-mapped tail.
            const double p_eff = tail.power - (tail.beta ? 2.0 : 0.0);
            if (p_eff > -2.0)
                throw QuadratureError(
                    "semi-infinite quadrature: tail bound cannot meet abs_tol "
                    "(no exponential decay and power > -2)");
            const double A = std::max({8.0 * a, 10.0, a + 1.0});
            const double head =
                integrate_adaptive(f, a, A, 0.5 * cfg.abs_tol, 0.5 * cfg.rel_tol,
                                   cfg.max_adaptive_depth);
            const auto mapped = [&f](double u) { return f(1.0 / u) / (u * u); };
            const double rest = integrate_adaptive(mapped, 0.0, 1.0 / A, 0.25 * cfg.abs_tol,
                                                   0.5 * cfg.rel_tol, cfg.max_adaptive_depth);
            return head + rest;
        }
        if (kmax <= a) return 0.0;  // everything past a is below tolerance
        return integrate_adaptive(f, a, kmax, 0.75 * cfg.abs_tol, cfg.rel_tol,
                                  cfg.max_adaptive_depth);
    }

    const NodeSequence nodes{osc, r};
    int j = nodes.first_index_above(a);
    const double first = nodes(j);
    if (first >= kmax)
        return integrate_adaptive(f, a, kmax, 0.75 * cfg.abs_tol, cfg.rel_tol,
                                  cfg.max_adaptive_depth);

    double total = integrate_adaptive(f, a, first, 0.5 * cfg.abs_tol, 0.5 * cfg.rel_tol,
                                      cfg.max_adaptive_depth);
    const GLRule& rule = gauss_legendre(cfg.panel_order);

    if (cfg.euler_acceleration) {
        AveragingTable table;
        double partial = 0.0;
        double prev_est = kInf;
        int stable = 0;
        for (int n = 0; n < cfg.max_panels; ++n, ++j) {
            const double lo = nodes(j), hi = std::min(nodes(j + 1), kmax);
            if (lo >= kmax) return total + partial;  // truncation bound took over
            const double lobe = gl_panel(f, lo, hi, rule);
            partial += lobe;
            const double est = table.add(partial);
            const double tol = std::max(0.25 * cfg.abs_tol,
                                        0.25 * cfg.rel_tol * std::abs(total + est));
            if (n >= 5) {
                stable = (std::abs(est - prev_est) <= tol) ? stable + 1 : 0;
                if (stable >= 2) return total + est;
            }
            prev_est = est;
        }
        throw QuadratureError("semi-infinite quadrature: lobe budget exhausted (accelerated)");
    }

    double partial = 0.0;
    double prev_mag = kInf;
    for (int n = 0; n < cfg.max_panels; ++n, ++j) {
        const double lo = nodes(j), hi = std::min(nodes(j + 1), kmax);
        if (lo >= kmax) return total + partial;  // truncation bound took over
        const double lobe = gl_panel(f, lo, hi, rule);
        partial += lobe;
        const double mag = std::abs(lobe);
        const double tol = std::max(0.25 * cfg.abs_tol,
                                    0.25 * cfg.rel_tol * std::abs(total + partial));
        // alternating series: once lobes decrease, the first omitted lobe
        // bounds the remainder
        if (mag <= tol && mag <= prev_mag) return total + partial;
        prev_mag = mag;
    }
    throw QuadratureError("semi-infinite quadrature: lobe budget exhausted");
}

}  // namespace fkmc
