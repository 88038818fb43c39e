#include "ams/rng.hpp"

#include <cmath>

namespace ams {

std::uint64_t mix_seed(std::uint64_t state) {
    // splitmix64 finalizer
    std::uint64_t z = state + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    return mix_seed(mix_seed(master) ^ mix_seed(index + 0x632be59bd9b4e019ull));
}

double Rng::uniform01() {
    // 53-bit mantissa in (0,1]; flip to [2^-54, 1) shape that avoids log(0)
    const std::uint64_t bits = gen_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

std::int64_t Rng::poisson(double lambda) {
    if (lambda < 0.0) throw DomainError("poisson rate must be nonnegative");
    std::int64_t total = 0;
    // split large rates so Knuth's product method stays exact and fast enough
    while (lambda > 30.0) {
        const double exp30 = std::exp(-30.0);
        double p = 1.0;
        std::int64_t k = 0;
        do {
            ++k;
            p *= uniform01();
        } while (p > exp30);
        total += k - 1;
        lambda -= 30.0;
    }
    const double limit = std::exp(-lambda);
    double p = 1.0;
    std::int64_t k = 0;
    do {
        ++k;
        p *= uniform01();
    } while (p > limit);
    return total + k - 1;
}

double Rng::gamma(double alpha, double beta) {
    if (alpha <= 0.0 || beta <= 0.0) throw DomainError("gamma requires alpha > 0 and beta > 0");
    // Marsaglia-Tsang; shapes below 1 are boosted via U^(1/alpha)
    double boost = 1.0;
    if (alpha < 1.0) {
        boost = std::pow(uniform01(), 1.0 / alpha);
        alpha += 1.0;
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v / beta;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return boost * d * v / beta;
    }
}

void Rng::fill_normal(std::span<double> out) {
    for (double& v : out) v = normal();
}

Field standard_normal_field(int n, int d, std::uint64_t seed) {
    Field f(n, d, Dtype::Reals);
    Rng rng(seed);
    rng.fill_normal(f.data);
    return f;
}

Field poisson_field(int n, int d, double lambda, std::uint64_t seed) {
    Field f(n, d, Dtype::Counts);
    Rng rng(seed);
    for (double& v : f.data) v = static_cast<double>(rng.poisson(lambda));
    return f;
}

}  // namespace ams
