#ifndef AMS_RNG_HPP
#define AMS_RNG_HPP

#include <cstdint>
#include <random>
#include <span>

#include "ams/field.hpp"

namespace ams {

// splitmix64 step; used to derive independent substream seeds so that
// parallel and serial execution agree replicate-by-replicate.
std::uint64_t mix_seed(std::uint64_t state);
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index);

// Deterministic variate generation on top of mt19937_64. The std::*
// distributions are implementation-defined, which would break byte-identical
// replay of cached quantile tables and experiment outputs across standard
// libraries, so the samplers are pinned here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform on (0,1), never exactly 0
    double uniform01();

    // standard normal via Box-Muller
    double normal();

    // Poisson(lambda), exact for all lambda >= 0
    std::int64_t poisson(double lambda);

    // Gamma(shape alpha, rate beta) via Marsaglia-Tsang
    double gamma(double alpha, double beta);

    void fill_normal(std::span<double> out);

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

Field standard_normal_field(int n, int d, std::uint64_t seed);
Field poisson_field(int n, int d, double lambda, std::uint64_t seed);

}  // namespace ams

#endif
