#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace fkmc {

// Monte Carlo estimate with the bookkeeping needed to reproduce it.
// std_error is sqrt(total sample variance / n): for complex samples the
// total variance is Var(Re) + Var(Im) = E|x - mean|^2 * n/(n-1), which
// reduces to the usual scalar formula when the imaginary parts vanish.
struct MCEstimate {
    std::complex<double> mean{0.0, 0.0};
    double std_error = 0.0;
    int64_t n_samples = 0;
    uint64_t master_seed = 0;
    std::string params_fingerprint;
};

// Pairwise (cascade) summation: splits the range in half recursively down
// to small serial blocks.  The bracketing is a pure function of n, so the
// result is bit-identical no matter how many workers filled the array.
double pairwise_sum(const double* v, size_t n);
std::complex<double> pairwise_sum(const std::complex<double>* v, size_t n);

// Two-pass mean/std_error over per-path sample values (n >= 2).
MCEstimate summarize_samples(const std::vector<std::complex<double>>& samples,
                             uint64_t master_seed, const std::string& fingerprint);

// Ratio of means with the delta-method standard error.  num and den are
// paired per-path samples (same length n >= 2, same underlying paths);
// the influence values (num_i - ratio*den_i)/mean(den) have mean zero by
// construction, so the error is their root mean square over sqrt(n).
struct RatioEstimate {
    double value = 0.0;
    double std_error = 0.0;
    int64_t n_samples = 0;
};
RatioEstimate ratio_delta_method(const std::vector<double>& num,
                                 const std::vector<double>& den);

}  // namespace fkmc
