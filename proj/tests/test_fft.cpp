#include <doctest.h>

#include "ctxsense/fft.hpp"
#include "oracles.hpp"

using namespace ctxsense;

namespace {

std::vector<double> random_series(Rng& rng, std::size_t n) {
    std::vector<double> x(n);
    for (double& v : x) v = rng.normal(0.0, 1.0);
    return x;
}

}  // namespace

TEST_CASE("forward transform matches direct summation on assorted lengths") {
    Rng rng(42);
    for (std::size_t n : {2u, 8u, 13u, 100u, 256u, 400u, 500u}) {
        const auto x = random_series(rng, n);
        const auto fast = dft_forward(x);
        const auto ref = oracle::naive_dft(x);
        REQUIRE(fast.size() == ref.size());
        double scale = 0.0;
        for (const auto& v : ref) scale = std::max(scale, std::abs(v));
        for (std::size_t k = 0; k < n; ++k)
            CHECK(std::abs(fast[k] - ref[k]) <= 1e-9 * scale);
    }
}

TEST_CASE("pure tone lands in a single bin") {
    const std::size_t n = 500;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = std::sin(2.0 * 3.14159265358979323846 * 25.0 * static_cast<double>(i) /
                        static_cast<double>(n));
    const auto mag = magnitude_spectrum(x);
    CHECK(mag[25] == doctest::Approx(static_cast<double>(n) / 2.0).epsilon(1e-9));
    CHECK(mag[24] < 1e-7 * mag[25]);
    CHECK(mag[26] < 1e-7 * mag[25]);
}

TEST_CASE("empty input is rejected") {
    CHECK_THROWS_AS(dft_forward(std::vector<double>{}), precondition_error);
}
