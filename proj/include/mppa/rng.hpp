#pragma once

#include <cstdint>

#include "mppa/tensor.hpp"

namespace mppa {

// xoshiro256** seeded through splitmix64. Fixed algorithm so the same seed
// yields the identical stream on every platform.
class Rng {
 public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) s = splitmix64(x);
    }

    // Independent stream for a derived task (e.g. one per sequence index).
    Rng fork(std::uint64_t stream) const {
        std::uint64_t x = state_[0] ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
        return Rng(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, one spare cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    TensorF normal_tensor(std::vector<std::size_t> shape, double stddev) {
        TensorF t(std::move(shape));
        for (double& v : t.data) v = stddev * normal();
        return t;
    }

    TensorF uniform_tensor(std::vector<std::size_t> shape, double lo, double hi) {
        TensorF t(std::move(shape));
        for (double& v : t.data) v = uniform(lo, hi);
        return t;
    }

 private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::uint64_t state_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace mppa
