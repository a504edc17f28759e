#include <doctest.h>

#include <set>

#include "projcvm/random.hpp"

using namespace projcvm;

TEST_CASE("streams are deterministic and substreams differ") {
    RandomStream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RandomStream root(7);
    RandomStream s0 = root.substream(0);
    RandomStream s1 = root.substream(1);
    CHECK(s0.next_u64() != s1.next_u64());

    // replaying a substream does not depend on what the parent consumed
    RandomStream root2(7);
    root2.next_u64();
    RandomStream s0_again = root2.substream(0);
    RandomStream s0_fresh = RandomStream(7).substream(0);
    CHECK(s0_again.next_u64() == s0_fresh.next_u64());
}

TEST_CASE("uniform and uniform_below stay in range") {
    RandomStream rng(1);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 3000; ++i) seen.insert(rng.uniform_below(7));
    CHECK(seen.size() == 7);
    for (std::uint64_t v : seen) CHECK(v < 7);
}

TEST_CASE("shuffle produces a permutation") {
    RandomStream rng(3);
    auto idx = rng.permutation(50);
    std::set<Index> seen(idx.begin(), idx.end());
    CHECK(seen.size() == 50);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 49);
}

TEST_CASE("gaussian moments") {
    RandomStream rng(11);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        s += g;
        s2 += g * g;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.02);
}
