#include "fkmc/model.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace fkmc {

void ModelParams::validate() const {
    if (d != 2 && d != 3) throw std::invalid_argument("d must be 2 or 3");
    if (!(horizon > 0)) throw std::invalid_argument("horizon T must be positive");
    if (!(epsilon >= 0)) throw std::invalid_argument("epsilon must be >= 0");
    if (!(lambda >= 0)) throw std::invalid_argument("lambda must be >= 0");
    if (model == Model::nelson && !(lambda > 0))
        throw std::invalid_argument("nelson model requires lambda > 0");
    if (total_momentum.size() != d)
        throw std::invalid_argument("total_momentum must have size d");
    if (!std::isfinite(g) || !std::isfinite(lambda) || !std::isfinite(epsilon) ||
        !std::isfinite(horizon))
        throw std::invalid_argument("parameters must be finite");
    for (int i = 0; i < d; ++i)
        if (!std::isfinite(total_momentum[i]))
            throw std::invalid_argument("total_momentum must be finite");
}

double omega(double k) { return std::abs(k); }

double propagator_beta(double k) {
    if (!(k > 0)) throw std::domain_error("propagator_beta requires k > 0");
    return 1.0 / (k + 0.5 * k * k);
}

std::string ModelParams::fingerprint() const {
    char buf[256];
    std::snprintf(buf, sizeof buf, "model=%d d=%d g=%.17g lambda=%.17g eps=%.17g T=%.17g P=",
                  model == Model::nelson ? 0 : 1, d, g, lambda, epsilon, horizon);
    std::string s = buf;
    for (int i = 0; i < total_momentum.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,", total_momentum[i]);
        s += buf;
    }
    // FNV-1a, 64 bit
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace fkmc
