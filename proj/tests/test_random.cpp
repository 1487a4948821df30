#include <cmath>
#include <set>

#include "catch_amalgamated.hpp"

#include "bftest/random.hpp"

using namespace bftest;

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using B = Philox4x32::Block;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::generate(B{0, 0, 0, 0}, K{0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::generate(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
          B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::generate(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
          B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
    RandomStream a(42, 1, 2, 3);
    RandomStream b(42, 1, 2, 3);
    RandomStream c(42, 1, 2, 4);
    RandomStream d(43, 1, 2, 3);
    int same_c = 0;
    int same_d = 0;
    for (int i = 0; i < 1000; ++i) {
        const std::uint32_t x = a.next_u32();
        CHECK(x == b.next_u32());
        same_c += x == c.next_u32();
        same_d += x == d.next_u32();
    }
    CHECK(same_c < 3);
    CHECK(same_d < 3);
}

TEST_CASE("uniforms lie strictly inside the unit interval") {
    RandomStream s(7, 0, 0, 0);
    double sum = 0.0;
    double sum_sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sum_sq += u * u;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean - 0.5) < 0.003);
    CHECK(std::abs(sum_sq / n - mean * mean - 1.0 / 12.0) < 0.002);
}

TEST_CASE("normals have the right moments") {
    RandomStream s(8, 0, 0, 0);
    const int n = 200000;
    double m1 = 0.0;
    double m2 = 0.0;
    double m4 = 0.0;
    int beyond = 0;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        m1 += z;
        m2 += z * z;
        m4 += z * z * z * z;
        beyond += std::abs(z) > 1.959963984540054;
    }
    CHECK(std::abs(m1 / n) < 0.01);
    CHECK(std::abs(m2 / n - 1.0) < 0.015);
    CHECK(std::abs(m4 / n - 3.0) < 0.08);
    CHECK(std::abs(static_cast<double>(beyond) / n - 0.05) < 0.003);
}

TEST_CASE("no early repeats") {
    RandomStream s(9, 0, 0, 0);
    std::set<std::uint32_t> seen;
    for (int i = 0; i < 10000; ++i) {
        seen.insert(s.next_u32());
    }
    CHECK(seen.size() > 9980);
}
