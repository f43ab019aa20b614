#include "fkmc/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace fkmc {

namespace {

template <typename T>
T pairwise_sum_impl(const T* v, size_t n) {
    if (n <= 8) {
        T acc{};
        for (size_t i = 0; i < n; ++i) acc += v[i];
        return acc;
    }
    const size_t half = n / 2;
    return pairwise_sum_impl(v, half) + pairwise_sum_impl(v + half, n - half);
}

}  // namespace

double pairwise_sum(const double* v, size_t n) { return pairwise_sum_impl(v, n); }

std::complex<double> pairwise_sum(const std::complex<double>* v, size_t n) {
    return pairwise_sum_impl(v, n);
}

MCEstimate summarize_samples(const std::vector<std::complex<double>>& samples,
                             uint64_t master_seed, const std::string& fingerprint) {
    const size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("summarize_samples: need at least 2 samples");
    MCEstimate est;
    est.n_samples = static_cast<int64_t>(n);
    est.master_seed = master_seed;
    est.params_fingerprint = fingerprint;
    est.mean = pairwise_sum(samples.data(), n) / static_cast<double>(n);

    std::vector<double> sq(n);
    for (size_t i = 0; i < n; ++i) sq[i] = std::norm(samples[i] - est.mean);
    const double ss = pairwise_sum(sq.data(), n);
    est.std_error = std::sqrt(ss / (static_cast<double>(n - 1) * static_cast<double>(n)));
    return est;
}

RatioEstimate ratio_delta_method(const std::vector<double>& num,
                                 const std::vector<double>& den) {
    const size_t n = num.size();
    if (n != den.size() || n < 2)
        throw std::invalid_argument("ratio_delta_method: need paired samples, n >= 2");
    const double num_mean = pairwise_sum(num.data(), n) / static_cast<double>(n);
    const double den_mean = pairwise_sum(den.data(), n) / static_cast<double>(n);
    if (den_mean == 0.0)
        throw std::invalid_argument("ratio_delta_method: denominator mean is zero");

    RatioEstimate r;
    r.value = num_mean / den_mean;
    r.n_samples = static_cast<int64_t>(n);
    std::vector<double> infl(n);
    for (size_t i = 0; i < n; ++i) infl[i] = (num[i] - r.value * den[i]) / den_mean;
    std::vector<double> sq(n);
    for (size_t i = 0; i < n; ++i) sq[i] = infl[i] * infl[i];
    const double ss = pairwise_sum(sq.data(), n);
    r.std_error = std::sqrt(ss / (static_cast<double>(n - 1) * static_cast<double>(n)));
    return r;
}

}  // namespace fkmc
