#pragma once

#include <cstdint>

#include "hbell/detail/math.hpp"

// Self-contained PRNG so seeded runs are bit-identical across standard
// libraries: splitmix64 for seeding/stream derivation, xoshiro256** for the
// stream, Box-Muller for normals.

namespace hbell::detail {

inline uint64_t splitmix64(uint64_t& state)
{
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic substream seed: hash of (master, index).
inline uint64_t substream_seed(uint64_t master, uint64_t index)
{
    uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    uint64_t a = splitmix64(s);
    uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

class Xoshiro256 {
public:
    explicit Xoshiro256(uint64_t seed)
    {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    uint64_t next()
    {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0, 1)
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller; one fresh pair per two draws
    double normal()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(kTwoPi * u2);
        have_spare_ = true;
        return r * std::cos(kTwoPi * u2);
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4]{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Additive-recurrence low-discrepancy sequence (the R_d construction): the
// k-th point in [0,1)^d is frac(shift + k * g), with g built from the
// generalized golden ratio for dimension d.
class RSequence {
public:
    RSequence(int dim, double shift01) : dim_(dim), alphas_(static_cast<size_t>(dim)), x_(static_cast<size_t>(dim))
    {
        // unique positive root of x^{d+1} = x + 1
        double phi = 1.5;
        for (int i = 0; i < 64; ++i) phi = std::pow(1.0 + phi, 1.0 / (dim + 1));
        double a = 1.0 / phi;
        for (int k = 0; k < dim; ++k) {
            alphas_[static_cast<size_t>(k)] = a;
            x_[static_cast<size_t>(k)] = shift01;
            a /= phi;
        }
    }

    // advances and writes the next point into out[0..dim)
    void next(double* out)
    {
        for (int k = 0; k < dim_; ++k) {
            double v = x_[static_cast<size_t>(k)] + alphas_[static_cast<size_t>(k)];
            v -= std::floor(v);
            x_[static_cast<size_t>(k)] = v;
            out[k] = v;
        }
    }

private:
    int dim_;
    std::vector<double> alphas_;
    std::vector<double> x_;
};

}  // namespace hbell::detail
