#pragma once

// Independent reference implementations used only by tests.  Everything
// here is deliberately slow and simple: long-double power series, plain
// Gauss-Legendre panel sums, and product-lattice quadrature of the
// defining d-dimensional Fourier integrals with the angular integration
// done numerically (never through the library's own radial reduction).

#include <functional>

namespace fkmc::oracle {

// Long-double power-series / asymptotic references, good to ~1e-16.
long double ref_j0(long double x);
long double ref_j1(long double x);
long double ref_si(long double x);

// Fixed-order Gauss-Legendre sum of f over [a, b] split into n panels.
long double panel_integral(const std::function<long double(long double)>& f,
                           long double a, long double b, int panels, int order = 32);

// Pair kernels straight from the d-dimensional momentum integral on a
// spherical (d=3: k, theta, phi) or polar (d=2: k, phi) product lattice,
// x placed on the first axis with |x| = r.  'with_beta' multiplies the
// integrand by 1/(k + k^2/2) (the once-integrated kernel).  Accuracy is
// set by the lattice sizes; the defaults resolve phases up to k*r ~ 100
// to much better than 1e-6 relative for epsilon >= 0.25.
double lattice_kernel(int d, double eps, double lambda, double r, double t,
                      bool with_beta, int n_k = 2048, int n_angle = 256);

// Central finite difference of f at x with step h (5-point stencil).
double fd_derivative(const std::function<double(double)>& f, double x, double h);

}  // namespace fkmc::oracle
