#pragma once

#include <functional>

#include "fkmc/kernel_table.hpp"
#include "fkmc/model.hpp"
#include "fkmc/paths.hpp"

namespace fkmc {

// A pair kernel as the action sums consume it: either a prebuilt table
// (interpolation inside the hull, direct quadrature outside) or a bare
// (r, t) function.  at_gap() pins the time argument so the table can
// reuse one t-stencil across a whole diagonal of a double sum.
class ActionKernel {
  public:
    explicit ActionKernel(const KernelTable& table) : table_(&table) {}
    explicit ActionKernel(std::function<double(double, double)> fn) : fn_(std::move(fn)) {}

    double operator()(double r, double t) const {
        return table_ ? (*table_)(r, t) : fn_(r, t);
    }

    class AtGap {
      public:
        double operator()(double r) const {
            if (k_->table_) {
                if (stencil_.inside && k_->table_->in_hull(r, gap_))
                    return k_->table_->interpolate_at(stencil_, r);
                return (*k_->table_)(r, gap_);
            }
            return k_->fn_(r, gap_);
        }

      private:
        friend class ActionKernel;
        const ActionKernel* k_ = nullptr;
        double gap_ = 0.0;
        KernelTable::TStencil stencil_{};
    };

    AtGap at_gap(double gap) const {
        AtGap g;
        g.k_ = this;
        g.gap_ = gap;
        if (table_) g.stencil_ = table_->t_stencil(gap);
        return g;
    }

  private:
    const KernelTable* table_ = nullptr;
    std::function<double(double, double)> fn_;
};

// Components of the renormalized action.  The counterterm 4T rho(0,0) has
// already been removed: total plays the role of S_direct - 4T rho(0,0) in
// the reconstruction identity, but stays finite all the way to eps = 0.
//
//   off_diagonal  2 dt^2 sum over pairs with gap >= tau of W
//   stochastic    2 sum over increments dB_t of (dt sum over s-window of
//                 grad rho(B_t - B_s, t - s)) . dB_t  (left endpoints)
//   boundary      -2 dt sum over s of rho(B_c - B_s, t_c - s) with
//                 t_c = min(s + tau, T)
//
// tau records the window actually used (snapped to a whole number of
// steps); total = off_diagonal + stochastic + boundary exactly.
struct RenormalizedAction {
    double off_diagonal = 0.0;
    double stochastic = 0.0;
    double boundary = 0.0;
    double tau = 0.0;
    double total = 0.0;
};

// Double left-Riemann sum dt^2 sum_{i,j} W(|B_i - B_j|, (i-j) dt) over
// [-T,T]^2.  The diagonal i = j contributes a constant dt^2 n_steps W(0,0)
// and is included only for eps > 0 (it is infinite at eps = 0 and carries
// zero measure in the limit, so the eps = 0 sum simply skips it).
// Requires a two-sided grid and model = nelson.
double action_direct(const BrownianPath& path, const ModelParams& params,
                     const ActionKernel& w);

// The i != j part of action_direct; estimators add the constant diagonal
// term themselves so the kernel origin value is derived once per run
// instead of once per path.
double action_direct_offdiagonal(const BrownianPath& path, const ActionKernel& w);

// The tau-split renormalized action.  tau must lie in (0, 2T] and is
// snapped to the nearest whole number of grid steps (at least one).  The
// default tau = 2T empties the off-diagonal component.
RenormalizedAction action_renormalized(const BrownianPath& path, const ModelParams& params,
                                       double tau, const ActionKernel& w,
                                       const ActionKernel& rho, const ActionKernel& drho);

// Cross-rectangle sum dt^2 sum_{t_i < 0 <= t_j} W(|B_i - B_j|, (j-i) dt):
// the coupling between the two half-intervals that the overlap ratio
// gamma(T) removes from its numerator weight.
double action_cross_rectangle(const BrownianPath& path, const ActionKernel& w);

}  // namespace fkmc
