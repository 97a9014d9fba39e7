#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "aed/io.hpp"
#include "aed/rng.hpp"

using namespace aed;

TEST_CASE("rng streams are reproducible", "[rng]") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

    Rng c(42), d(43);
    bool diff = false;
    for (int i = 0; i < 10; ++i) diff |= c.next_u64() != d.next_u64();
    REQUIRE(diff);
}

TEST_CASE("derive_seed separates components and indices", "[rng]") {
    REQUIRE(derive_seed(1, "synth", 0) != derive_seed(1, "synth", 1));
    REQUIRE(derive_seed(1, "synth", 0) != derive_seed(1, "init", 0));
    REQUIRE(derive_seed(1, "synth", 0) == derive_seed(1, "synth", 0));
    REQUIRE(derive_seed(1, "synth", 0) != derive_seed(2, "synth", 0));
}

TEST_CASE("uniform and normal variates look sane", "[rng]") {
    Rng rng(7);
    double sum = 0.0, sum2 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    REQUIRE(std::abs(sum / n - 0.5) < 0.01);

    sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.normal();
        sum += g;
        sum2 += g * g;
    }
    REQUIRE(std::abs(sum / n) < 0.03);
    REQUIRE(std::abs(sum2 / n - 1.0) < 0.05);
}

TEST_CASE("shuffle is a seeded permutation", "[rng]") {
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
    std::vector<int> w = v;
    Rng a(5), b(5);
    a.shuffle(v);
    b.shuffle(w);
    REQUIRE(v == w);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("binary helpers round trip", "[io]") {
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    bin::write_pod<std::uint32_t>(ss, 123456u);
    bin::write_pod<double>(ss, 3.5);
    bin::write_string(ss, "hello");
    bin::write_vec<float>(ss, {1.0f, -2.5f});

    REQUIRE(bin::read_pod<std::uint32_t>(ss) == 123456u);
    REQUIRE(bin::read_pod<double>(ss) == 3.5);
    REQUIRE(bin::read_string(ss) == "hello");
    auto v = bin::read_vec<float>(ss);
    REQUIRE(v == std::vector<float>{1.0f, -2.5f});
}

TEST_CASE("csv line splitting", "[io]") {
    REQUIRE(split_csv_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(split_csv_line("a,,c") == std::vector<std::string>{"a", "", "c"});
    REQUIRE(split_csv_line("x") == std::vector<std::string>{"x"});
    REQUIRE(split_csv_line("a,b\r") == std::vector<std::string>{"a", "b"});
}
