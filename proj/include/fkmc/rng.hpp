#pragma once

#include <array>
#include <cstdint>

namespace fkmc {

// Counter-based random numbers: Philox4x64-10.  A block of four 64-bit
// words is a pure function of (key, counter), so any draw can be addressed
// directly.  Per-path streams are derived by placing the path index in the
// counter, which makes path i identical no matter how many paths are drawn,
// in what order, or on how many workers.
using PhiloxKey = std::array<uint64_t, 2>;
using PhiloxCounter = std::array<uint64_t, 4>;

std::array<uint64_t, 4> philox4x64(PhiloxCounter counter, PhiloxKey key);

// Uniform double in (0, 1]: top 53 bits of x, offset half a ulp.  The
// minimum is 2^-54 (safe under log()); the +0.5 rounds the very top bit
// pattern up to exactly 1.0, which Box-Muller tolerates (radius 0).
double uniform_from_bits(uint64_t x);

// Standard normal pairs via Box-Muller on one Philox block.  Stream layout:
//
//   counter = { path_index, stream_tag, block_index, 0 }
//   key     = { master_seed, golden-ratio constant }
//
// gaussian j of a (path, tag) stream lives in block j >> 1, lane j & 1.
// stream_tag 0 holds the base increments of a path; tag L >= 1 holds the
// bridge midpoints added by the L-th dyadic refinement.
class GaussianStream {
  public:
    GaussianStream(uint64_t master_seed, uint64_t path_index, uint64_t stream_tag = 0);

    double operator()(uint64_t j) const;  // j-th standard normal of the stream

  private:
    PhiloxKey key_;
    uint64_t path_;
    uint64_t tag_;
};

}  // namespace fkmc
