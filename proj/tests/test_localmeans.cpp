#include "doctest.h"

#include <cmath>

#include "ams/localmeans.hpp"
#include "ams/rng.hpp"

using namespace ams;

namespace {

Field random_counts(int n, int d, double lambda, std::uint64_t seed) {
    return poisson_field(n, d, lambda, seed);
}

void check_close(const std::vector<ScaleSums>& a, const std::vector<ScaleSums>& b,
                 double abs_tol, double rel_tol = 0.0) {
    REQUIRE(a.size() == b.size());
    for (std::size_t s = 0; s < a.size(); ++s) {
        REQUIRE(a[s].sums.size() == b[s].sums.size());
        CHECK(a[s].dims == b[s].dims);
        CHECK(a[s].cardinality == b[s].cardinality);
        for (std::size_t i = 0; i < a[s].sums.size(); ++i) {
            const double tol = abs_tol + rel_tol * std::fabs(b[s].sums[i]);
            CHECK(std::fabs(a[s].sums[i] - b[s].sums[i]) <= tol);
        }
    }
}

}  // namespace

TEST_CASE("constant field sums") {
    Field field(12, 2, Dtype::Reals);
    for (double& v : field.data) v = 2.5;
    const auto system = build_rectangles(12, 2, 2, 5);
    for (const auto& sums : fft_scale_sums(field, system)) {
        const double expect = 2.5 * static_cast<double>(sums.cardinality);
        for (double v : sums.sums) CHECK(v == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("impulse response of the box kernel") {
    Field field(4, 2, Dtype::Counts);
    field.data[0] = 1.0;  // impulse at the origin
    const auto system = build_rectangles(4, 2, 2, 2);
    const auto sums = fft_scale_sums(field, system);
    REQUIRE(sums.size() == 1);
    REQUIRE(sums[0].sums.size() == 9);
    for (std::size_t i = 0; i < 9; ++i)
        CHECK(sums[0].sums[i] == (i == 0 ? 1.0 : 0.0));
}

TEST_CASE("1-d hand-computed sums") {
    Field field(std::vector<double>{1.0, 2.0, 3.0}, 3, 1, Dtype::Counts);
    auto system = build_rectangles(3, 1, 2, 2);
    const auto naive = naive_scale_sums(field, system);
    REQUIRE(naive.size() == 1);
    CHECK(naive[0].sums == std::vector<double>{3.0, 5.0});
    const auto fft = fft_scale_sums(field, system);
    CHECK(fft[0].sums == naive[0].sums);
}

TEST_CASE("fft equals naive on random integer fields") {
    const Field field = random_counts(32, 2, 3.0, 99);
    RegionSystem system = build_rectangles(32, 2, 1, 8);
    // a small scale set keeps the naive oracle cheap; mix square and oblong
    system.scales = {{4, 4}, {6, 2}, {1, 7}, {5, 5}, {8, 1}};
    const auto fft = fft_scale_sums(field, system, 2);
    const auto naive = naive_scale_sums(field, system);
    check_close(fft, naive, 1e-9);  // counts are rounded, so this is exact equality
    for (std::size_t s = 0; s < fft.size(); ++s)
        for (std::size_t i = 0; i < fft[s].sums.size(); ++i)
            CHECK(fft[s].sums[i] == naive[s].sums[i]);
}

TEST_CASE("fft equals naive across dimensions and dtypes") {
    Rng rng(4242);
    for (int d = 1; d <= 3; ++d) {
        const int n = d == 3 ? 9 : 24;
        // real-valued fields exercise the unrounded path
        Field field(n, d, Dtype::Reals);
        for (double& v : field.data) v = 10.0 * (rng.uniform01() - 0.3);
        const auto system = build_rectangles(n, d, 1, std::min(n, 7));
        const auto fft = fft_scale_sums(field, system);
        const auto naive = naive_scale_sums(field, system);
        check_close(fft, naive, 1e-9, 1e-6);
    }
}

TEST_CASE("counts sums are nonnegative and integral") {
    const Field field = random_counts(20, 2, 0.4, 7);
    const auto system = build_rectangles(20, 2, 1, 6);
    for (const auto& sums : fft_scale_sums(field, system))
        for (double v : sums.sums) {
            CHECK(v >= 0.0);
            CHECK(v == std::floor(v));
        }
}

TEST_CASE("linearity of the sums") {
    Rng rng(11);
    Field y1(16, 2, Dtype::Reals);
    Field y2(16, 2, Dtype::Reals);
    for (double& v : y1.data) v = rng.normal();
    for (double& v : y2.data) v = rng.normal();
    Field combo(16, 2, Dtype::Reals);
    const double a = 1.75;
    const double b = -0.5;
    for (std::size_t i = 0; i < combo.data.size(); ++i)
        combo.data[i] = a * y1.data[i] + b * y2.data[i];

    const auto system = build_rectangles(16, 2, 3, 5);
    const auto s1 = fft_scale_sums(y1, system);
    const auto s2 = fft_scale_sums(y2, system);
    const auto sc = fft_scale_sums(combo, system);
    for (std::size_t s = 0; s < sc.size(); ++s)
        for (std::size_t i = 0; i < sc[s].sums.size(); ++i)
            CHECK(sc[s].sums[i] ==
                  doctest::Approx(a * s1[s].sums[i] + b * s2[s].sums[i]).epsilon(1e-9));
}

TEST_CASE("translation equivariance") {
    Rng rng(13);
    const int n = 16;
    Field field(n, 2, Dtype::Reals);
    for (double& v : field.data) v = rng.normal();
    const int shift = 3;  // shift down/right, zero-fill elsewhere
    Field shifted(n, 2, Dtype::Reals);
    for (int i = 0; i + shift < n; ++i)
        for (int j = 0; j + shift < n; ++j)
            shifted.data[static_cast<std::size_t>((i + shift) * n + j + shift)] =
                field.data[static_cast<std::size_t>(i * n + j)];

    RegionSystem system = build_rectangles(n, 2, 4, 4);
    const auto base = fft_scale_sums(field, system);
    const auto moved = fft_scale_sums(shifted, system);
    const int m = n - 4 + 1;
    for (int i = 0; i + shift < m; ++i)
        for (int j = 0; j + shift < m; ++j)
            CHECK(moved[0].sums[static_cast<std::size_t>((i + shift) * m + j + shift)] ==
                  doctest::Approx(base[0].sums[static_cast<std::size_t>(i * m + j)])
                      .epsilon(1e-9));
}

TEST_CASE("full-grid scale recovers the total sum") {
    const Field field = random_counts(10, 2, 2.0, 21);
    double total = 0.0;
    for (double v : field.data) total += v;
    const auto system = build_rectangles(10, 2, 10, 10);
    const auto sums = fft_scale_sums(field, system);
    REQUIRE(sums[0].sums.size() == 1);
    CHECK(sums[0].sums[0] == total);
}

TEST_CASE("shape mismatch raises SizeError") {
    const Field field = random_counts(16, 2, 1.0, 3);
    const auto system = build_rectangles(32, 2, 2, 4);
    CHECK_THROWS_AS(fft_scale_sums(field, system), SizeError);
    CHECK_THROWS_AS(naive_scale_sums(field, system), SizeError);
}
