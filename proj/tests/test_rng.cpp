#include <cmath>
#include <vector>

#include "doctest.h"
#include "thermocast/rng.hpp"

using namespace thermocast;

TEST_SUITE("rng") {

TEST_CASE("same seed reproduces the stream, labels separate it") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng s1(42, "stage-main/shuffle"), s2(42, "stage-main/shuffle");
    Rng s3(42, "stage-ancillary/shuffle");
    bool all_equal = true, any_equal_cross = false;
    for (int i = 0; i < 64; ++i) {
        const auto x = s1.next_u64();
        all_equal = all_equal && x == s2.next_u64();
        any_equal_cross = any_equal_cross || x == s3.next_u64();
    }
    CHECK(all_equal);
    CHECK_FALSE(any_equal_cross);
}

TEST_CASE("indexed streams are pairwise distinct") {
    Rng a(7, "mc-sample", 0), b(7, "mc-sample", 1), c(7, "mc-sample", 2);
    const auto xa = a.next_u64(), xb = b.next_u64(), xc = c.next_u64();
    CHECK(xa != xb);
    CHECK(xb != xc);
    CHECK(xa != xc);
}

TEST_CASE("uniform stays in range and has a sane mean") {
    Rng rng(123);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(std::fabs(sum / n - 0.5) < 0.01);
}

TEST_CASE("normal has approximately unit variance") {
    Rng rng(99);
    double sum = 0.0, sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    CHECK(std::fabs(mean) < 0.02);
    CHECK(std::fabs(sq / n - mean * mean - 1.0) < 0.03);
}

TEST_CASE("below is bounded and covers small ranges") {
    Rng rng(5);
    std::vector<int> seen(5, 0);
    for (int i = 0; i < 5000; ++i) {
        const auto v = rng.below(5);
        REQUIRE(v < 5);
        ++seen[static_cast<int>(v)];
    }
    for (int i = 0; i < 5; ++i) CHECK(seen[i] > 800);
}

TEST_CASE("shuffle is deterministic per seed and a permutation") {
    std::vector<int> v1 = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<int> v2 = v1;
    Rng a(31), b(31);
    a.shuffle(v1);
    b.shuffle(v2);
    CHECK(v1 == v2);
    std::vector<int> sorted = v1;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
}

}  // TEST_SUITE
