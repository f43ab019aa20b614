#pragma once

#include "fkmc/model.hpp"
#include "fkmc/quadrature.hpp"

namespace fkmc {

// Radial pair kernels of the two models.  Every kernel is rotation
// invariant in x and even in t, so all functions take r = |x| >= 0 and
// use |t|.  The reduced one-dimensional integrals (d = 3 via the
// spherical average sin(kr)/(kr), d = 2 via J0(kr)) are:
//
//   W(r, t)      d=3:  (2 pi / r) int_lambda^inf e^{-eps k^2 - k|t|} sin(kr) dk
//                d=2:  pi int_lambda^inf e^{-eps k^2 - k|t|} J0(kr) dk
//   rho(r, t)    same integrands with an extra factor beta(k) = 1/(k + k^2/2)
//   d/dr rho     d=3:  2 pi int k^2 e^{-eps k^2 - k|t|} beta(k) sinc'(kr) dk,
//                      sinc'(u) = d/du [sin(u)/u]
//                d=2:  -pi int k e^{-eps k^2 - k|t|} beta(k) J1(kr) dk
//   W_pol(r, t)  e^{-|t|} (2 pi / r) int_lambda^inf e^{-eps k^2} sin(kr) / k dk
//
// with r = 0 understood as the limit (sin(kr)/r -> k, J0 -> 1).
//
// Conventions and failure modes:
//  * eps = 0, t = 0, r > 0: W is returned as the Abel limit of the defining
//    integral (equivalently the t -> 0 limit), which has closed form in
//    d = 3 and reduces to a finite Bessel integral in d = 2.
//  * Divergent evaluations throw DivergenceError: W at eps = t = r = 0;
//    rho(0, 0) in d = 3 at eps = 0 (logarithmic); any rho-family kernel in
//    d = 2 at lambda = 0 (infrared); the polaron kernel at eps = 0, r = 0.
//  * The quadrature tolerance cfg.abs_tol is interpreted as an absolute
//    tolerance on the returned kernel value: internal tolerances are
//    divided by the radial prefactor (e.g. 2 pi / r) where it exceeds 1.
//  * Arguments are validated (d in {2, 3}, eps >= 0, lambda >= 0, r >= 0);
//    violations throw std::invalid_argument.

double pair_potential_w(int d, double eps, double lambda, double r, double t,
                        const QuadratureConfig& cfg = {});

double rho_kernel(int d, double eps, double lambda, double r, double t,
                  const QuadratureConfig& cfg = {});

double rho_radial_derivative(int d, double eps, double lambda, double r, double t,
                             const QuadratureConfig& cfg = {});

// rho(0, 0): the coincident-point value subtracted by the renormalized
// action.  d = 3: 4 pi int_lambda^inf e^{-eps k^2} / (2 + k) dk (diverges
// as eps -> 0); d = 2: pi int_lambda^inf e^{-eps k^2} beta(k) dk (finite
// for every eps >= 0 when lambda > 0).
double rho_diag(int d, double eps, double lambda, const QuadratureConfig& cfg = {});

// t-independent factor of the polaron kernel: W_pol(r, t) = e^{-|t|} * core(r).
// eps = 0 closed forms: (2 pi / r)(pi/2 - Si(lambda r)), and pi^2 / r when
// additionally lambda = 0.  r = 0 (eps > 0): pi^{3/2} erfc(lambda sqrt(eps)) / sqrt(eps).
double polaron_core(double eps, double lambda, double r, const QuadratureConfig& cfg = {});

double polaron_w(double eps, double lambda, double r, double t,
                 const QuadratureConfig& cfg = {});

// Energy counterterm -g^2 rho(0, 0) that the renormalized action absorbs.
double counterterm_energy(const ModelParams& params, const QuadratureConfig& cfg = {});

}  // namespace fkmc
