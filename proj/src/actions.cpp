#include "fkmc/actions.hpp"

#include <cmath>
#include <stdexcept>

namespace fkmc {

namespace {

void require_two_sided_nelson(const BrownianPath& path, const ModelParams& params,
                              const char* who) {
    if (params.model != Model::nelson)
        throw std::invalid_argument(std::string(who) + ": pair-model action needs model=nelson");
    if (!path.grid.two_sided)
        throw std::invalid_argument(std::string(who) + ": needs a two-sided path");
    if (path.positions.cols() != path.grid.n_nodes())
        throw std::invalid_argument(std::string(who) + ": positions do not match the grid");
}

double pair_distance(const BrownianPath& p, int i, int j) {
    return (p.positions.col(i) - p.positions.col(j)).norm();
}

}  // namespace

double action_direct_offdiagonal(const BrownianPath& path, const ActionKernel& w) {
    const int n = path.grid.n_steps();  // left-Riemann nodes 0..n-1
    const double dt = path.grid.dt();
    double acc = 0.0;
    for (int m = 1; m <= n - 1; ++m) {
        const ActionKernel::AtGap wm = w.at_gap(m * dt);
        double row = 0.0;
        for (int i = 0; i + m <= n - 1; ++i) row += wm(pair_distance(path, i, i + m));
        acc += row;
    }
    return 2.0 * dt * dt * acc;
}

double action_direct(const BrownianPath& path, const ModelParams& params,
                     const ActionKernel& w) {
    require_two_sided_nelson(path, params, "action_direct");
    double acc = action_direct_offdiagonal(path, w);
    if (params.epsilon > 0.0) {
        const double dt = path.grid.dt();
        acc += dt * dt * path.grid.n_steps() * w(0.0, 0.0);
    }
    return acc;
}

RenormalizedAction action_renormalized(const BrownianPath& path, const ModelParams& params,
                                       double tau, const ActionKernel& w,
                                       const ActionKernel& rho, const ActionKernel& drho) {
    require_two_sided_nelson(path, params, "action_renormalized");
    const int n = path.grid.n_steps();
    const double dt = path.grid.dt();
    const double span = 2.0 * path.grid.horizon;
    if (!(tau > 0.0) || tau > span * (1.0 + 1e-12))
        throw std::domain_error("action_renormalized: tau must lie in (0, 2T]");
    int m_tau = static_cast<int>(std::llround(tau / dt));
    if (m_tau < 1) m_tau = 1;
    if (m_tau > n) m_tau = n;

    RenormalizedAction out;
    out.tau = m_tau * dt;

    // Pairs separated by at least tau keep the plain Riemann form.
    if (m_tau < n) {
        double acc = 0.0;
        for (int m = m_tau; m <= n - 1; ++m) {
            const ActionKernel::AtGap wm = w.at_gap(m * dt);
            double row = 0.0;
            for (int i = 0; i + m <= n - 1; ++i) row += wm(pair_distance(path, i, i + m));
            acc += row;
        }
        out.off_diagonal = 2.0 * dt * dt * acc;
    }

    // Ito term: left-endpoint sums of grad rho against forward increments.
    // grad rho(x, t) = rho_r(|x|, t) x/|x|; the x = 0 case contributes
    // nothing (rho is smooth and radial, so the gradient vanishes at 0).
    {
        const int d = path.dimension();
        Eigen::MatrixXd window = Eigen::MatrixXd::Zero(d, n);
        for (int m = 1; m <= m_tau; ++m) {
            const ActionKernel::AtGap dm = drho.at_gap(m * dt);
            for (int j = m; j <= n - 1; ++j) {
                const int i = j - m;
                const Eigen::VectorXd x = path.positions.col(j) - path.positions.col(i);
                const double r = x.norm();
                if (r == 0.0) continue;
                window.col(j) += (dm(r) / r) * x;
            }
        }
        double acc = 0.0;
        for (int j = 0; j <= n - 1; ++j)
            acc += window.col(j).dot(path.positions.col(j + 1) - path.positions.col(j));
        out.stochastic = 2.0 * dt * acc;
    }

    // Boundary term at the clamped window edge; the left-Riemann rule in s
    // keeps every time gap at dt or more, so rho is never read at gap 0.
    {
        const ActionKernel::AtGap rho_tau = rho.at_gap(m_tau * dt);
        double acc = 0.0;
        for (int i = 0; i <= n - 1; ++i) {
            const int c = std::min(i + m_tau, n);
            const double r = pair_distance(path, c, i);
            acc += (c - i == m_tau) ? rho_tau(r) : rho.at_gap((c - i) * dt)(r);
        }
        out.boundary = -2.0 * dt * acc;
    }

    out.total = out.off_diagonal + out.stochastic + out.boundary;
    return out;
}

double action_cross_rectangle(const BrownianPath& path, const ActionKernel& w) {
    if (!path.grid.two_sided)
        throw std::invalid_argument("action_cross_rectangle: needs a two-sided path");
    const int n = path.grid.n_steps();
    const int half = path.grid.zero_index();
    const double dt = path.grid.dt();
    double acc = 0.0;
    for (int m = 1; m <= n - 1; ++m) {
        const ActionKernel::AtGap wm = w.at_gap(m * dt);
        const int i_lo = std::max(0, half - m);
        const int i_hi = std::min(half - 1, n - 1 - m);
        double row = 0.0;
        for (int i = i_lo; i <= i_hi; ++i) row += wm(pair_distance(path, i, i + m));
        acc += row;
    }
    return dt * dt * acc;
}

}  // namespace fkmc
