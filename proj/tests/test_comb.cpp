#include "doctest.h"
#include "orbitcsp/comb.hpp"

#include <set>

using namespace orbitcsp;

TEST_CASE("binom basic values") {
    CHECK(comb::binom(0, 0) == 1);
    CHECK(comb::binom(5, 2) == 10);
    CHECK(comb::binom(6, 3) == 20);
    CHECK(comb::binom(4, 5) == 0);
    CHECK(comb::binom(30, 15) == 155117520);
}

TEST_CASE("ksubsets lex order and count") {
    auto s = comb::ksubsets(5, 3);
    CHECK(s.size() == 10);
    CHECK(s.front() == std::vector<int>{0, 1, 2});
    CHECK(s.back() == std::vector<int>{2, 3, 4});
    for (std::size_t i = 0; i + 1 < s.size(); ++i) CHECK(s[i] < s[i + 1]);
}

TEST_CASE("subset_rank inverts ksubsets") {
    for (int n : {4, 6, 7}) {
        for (int k : {2, 3}) {
            auto s = comb::ksubsets(n, k);
            for (std::size_t i = 0; i < s.size(); ++i) CHECK(comb::subset_rank(s[i], n) == i);
        }
    }
}

TEST_CASE("partition enumeration matches Bell numbers") {
    // oracle: Bell numbers B_1..B_7 = 1, 2, 5, 15, 52, 203, 877
    std::vector<std::int64_t> bells = {1, 2, 5, 15, 52, 203, 877};
    for (int m = 1; m <= 7; ++m) CHECK(comb::bell(m) == bells[static_cast<std::size_t>(m - 1)]);
}

TEST_CASE("partitions are valid restricted-growth strings, no duplicates") {
    std::set<std::vector<int>> seen;
    comb::for_each_partition(6, [&](const std::vector<int>& a, int c) {
        CHECK(a[0] == 0);
        int mx = 0;
        for (std::size_t i = 1; i < a.size(); ++i) {
            CHECK(a[i] <= mx + 1);
            mx = std::max(mx, a[i]);
        }
        CHECK(c == mx + 1);
        CHECK(seen.insert(a).second);
        return true;
    });
    CHECK(seen.size() == 203);
}

TEST_CASE("injective tuples") {
    CHECK(comb::injective_tuples(4, 2).size() == 12);
    CHECK(comb::injective_tuples(3, 3).size() == 6);
    CHECK(comb::injective_tuples(2, 3).empty());
}
