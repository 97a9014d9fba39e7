#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "aed/fft.hpp"
#include "aed/rng.hpp"
#include "oracles.hpp"

using namespace aed;

TEST_CASE("fft matches the naive DFT", "[fft]") {
    for (std::size_t n : {8u, 64u, 256u}) {
        Rng rng(100 + n);
        std::vector<std::complex<double>> x(n);
        for (auto& v : x) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        auto expected = oracles::naive_dft(x);
        auto got = x;
        Fft fft(n);
        fft.forward(got);
        for (std::size_t k = 0; k < n; ++k)
            REQUIRE(std::abs(got[k] - expected[k]) < 1e-9 * static_cast<double>(n));
    }
}

TEST_CASE("inverse undoes forward", "[fft]") {
    Rng rng(7);
    std::vector<std::complex<double>> x(128);
    for (auto& v : x) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    auto y = x;
    Fft fft(x.size());
    fft.forward(y);
    fft.inverse(y);
    for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(std::abs(y[i] - x[i]) < 1e-12);
}

TEST_CASE("impulse has a flat spectrum", "[fft]") {
    std::vector<std::complex<double>> x(32, {0.0, 0.0});
    x[0] = 1.0;
    Fft fft(32);
    fft.forward(x);
    for (const auto& v : x) REQUIRE(std::abs(v - std::complex<double>{1.0, 0.0}) < 1e-12);
}

TEST_CASE("parseval identity on random input", "[fft]") {
    Rng rng(9);
    std::vector<std::complex<double>> x(512);
    double time_energy = 0.0;
    for (auto& v : x) {
        v = {rng.uniform(-1.0, 1.0), 0.0};
        time_energy += std::norm(v);
    }
    Fft fft(512);
    fft.forward(x);
    double freq_energy = 0.0;
    for (const auto& v : x) freq_energy += std::norm(v);
    REQUIRE(std::abs(freq_energy - 512.0 * time_energy) < 1e-6 * freq_energy);
}

TEST_CASE("size handling", "[fft]") {
    REQUIRE(Fft::next_pow2(1) == 1);
    REQUIRE(Fft::next_pow2(2) == 2);
    REQUIRE(Fft::next_pow2(3) == 4);
    REQUIRE(Fft::next_pow2(80000) == 131072);
    REQUIRE_THROWS_AS(Fft(12), config_error);
    REQUIRE_THROWS_AS(Fft(0), config_error);
}
