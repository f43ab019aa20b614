#pragma once

namespace fkmc {

// Bessel functions of the first kind, order 0 and 1, double precision.
// Rational minimax approximations on root-bracketing intervals for x <= 8
// (coefficients after Hart, "Computer Approximations", as used in Boost),
// Hankel-form rational fits beyond.  Relative error well below 1e-14;
// validated in tests against a long-double power-series oracle.
double bessel_j0(double x);
double bessel_j1(double x);

// Sine integral Si(x) = int_0^x sin(u)/u du.  Power series up to |x| = 12,
// then Si = pi/2 - f cos - g sin with the auxiliary functions from the
// continued fraction of the exponential integral at imaginary argument.
double sine_integral(double x);

// n-th positive zero (n >= 1): McMahon expansion, Newton-polished to full
// precision for n <= 30; beyond that the raw expansion is already well
// below 1e-10.  Used to place quadrature panel boundaries.
double bessel_j0_zero(int n);
double bessel_j1_zero(int n);

// d/du [sin(u)/u], evaluated stably through the series near u = 0.  This is
// the angular factor of the radial derivative of a 3-d Fourier transform.
double sinc_derivative(double u);

}  // namespace fkmc
