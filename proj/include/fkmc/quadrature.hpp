#pragma once

#include <functional>
#include <vector>

namespace fkmc {

// Controls for the one-dimensional integration engine behind every kernel.
struct QuadratureConfig {
    double abs_tol = 1e-11;   // absolute tolerance on the full integral
    double rel_tol = 1e-9;    // relative tolerance where a scale is available
    int panel_order = 24;     // Gauss-Legendre points per oscillation lobe
    int max_panels = 200000;  // lobe budget before giving up
    int max_adaptive_depth = 52;
    bool oscillation_splitting = true;  // split at sign nodes of the oscillator
    // Sum the alternating lobe series through iterated averaging instead of
    // term by term.  Plain summation stops on the first-omitted-lobe bound
    // and is kept as the reference mode; acceleration reproduces it to below
    // abs_tol at a small fraction of the panel count.
    bool euler_acceleration = true;
    double tail_safety = 4.0;  // truncation bound must undercut abs_tol by this
};

struct GLRule {
    std::vector<double> x, w;  // nodes and weights on [-1, 1]
};

// Cached Gauss-Legendre rule of given order (thread safe).
const GLRule& gauss_legendre(int order);

// Fixed-order Gauss-Legendre estimate on [a, b].
double gl_panel(const std::function<double(double)>& f, double a, double b, const GLRule& rule);

// Adaptive bisection with embedded parent-vs-children error control.
// Throws QuadratureError if the depth budget cannot meet the tolerance.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol, int max_depth = 52);

// Sign structure of the integrand on [a, inf), used to place panel
// boundaries: zeros of sin(kr), of d/du[sin u/u] at u = kr, or of the
// Bessel factors J0(kr), J1(kr).
enum class Oscillation { none, sine, sine_derivative, bessel_j0, bessel_j1 };

// Decay majorant for the non-oscillatory amplitude of the integrand:
//   |f(k)| <= scale * k^power * exp(-gauss k^2 - expo k) * (beta ? 2/k^2 : 1)
// for all k >= a.  (The beta flag stands for the propagator factor
// 1/(k + k^2/2), bounded by 2/k^2.)
struct TailProfile {
    double gauss = 0.0;
    double expo = 0.0;
    double power = 0.0;
    bool beta = false;
};

// Upper bound on int_K^inf of the majorant above; +inf when it diverges.
double tail_integral_bound(const TailProfile& tail, double scale, double K);

// Smallest K (>= from) with tail_integral_bound(K) <= tol, or +inf when the
// majorant cannot certify truncation at any finite point.
double choose_kmax(const TailProfile& tail, double scale, double tol, double from);

// Integral over [a, inf) of f, where f carries an oscillatory factor with
// sign nodes at osc/r and an amplitude bounded per 'tail' with 'scale'.
// Truncates where the analytic tail bound permits, otherwise sums the
// alternating lobe series; throws QuadratureError when neither route can
// meet the tolerance within the panel budget.
double integrate_semi_infinite(const std::function<double(double)>& f, double a,
                               Oscillation osc, double r, const TailProfile& tail,
                               double scale, const QuadratureConfig& cfg);

}  // namespace fkmc
