#include "fkmc/rng.hpp"

#include <cmath>
#include <numbers>

namespace fkmc {

namespace {

inline void mulhilo(uint64_t a, uint64_t b, uint64_t& hi, uint64_t& lo) {
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<uint64_t>(p >> 64);
    lo = static_cast<uint64_t>(p);
}

constexpr uint64_t M0 = 0xD2E7470EE14C6C93ull;
constexpr uint64_t M1 = 0xCA5A826395121157ull;
constexpr uint64_t W0 = 0x9E3779B97F4A7C15ull;  // golden ratio
constexpr uint64_t W1 = 0xBB67AE8584CAA73Bull;  // sqrt(3) - 1

inline void round_once(PhiloxCounter& c, const PhiloxKey& k) {
    uint64_t hi0, lo0, hi1, lo1;
    mulhilo(M0, c[0], hi0, lo0);
    mulhilo(M1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

std::array<uint64_t, 4> philox4x64(PhiloxCounter counter, PhiloxKey key) {
    for (int r = 0; r < 10; ++r) {
        round_once(counter, key);
        key[0] += W0;
        key[1] += W1;
    }
    return counter;
}

double uniform_from_bits(uint64_t x) {
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

GaussianStream::GaussianStream(uint64_t master_seed, uint64_t path_index, uint64_t stream_tag)
    : key_{master_seed, 0x9E3779B97F4A7C15ull}, path_(path_index), tag_(stream_tag) {}

double GaussianStream::operator()(uint64_t j) const {
    const auto out = philox4x64({path_, tag_, j >> 1, 0}, key_);
    const double u1 = uniform_from_bits(out[0]);
    const double u2 = uniform_from_bits(out[1]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return (j & 1) ? radius * std::sin(angle) : radius * std::cos(angle);
}

}  // namespace fkmc
