#ifndef ORBITCSP_COMB_HPP
#define ORBITCSP_COMB_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

namespace orbitcsp::comb {

inline std::int64_t binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// All k-subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> ksubsets(int n, int k) {
    std::vector<std::vector<int>> out;
    if (k < 0 || k > n) return out;
    std::vector<int> cur(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) cur[static_cast<std::size_t>(i)] = i;
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++cur[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

/// Lexicographic rank of a sorted k-subset of {0..n-1}.
inline std::size_t subset_rank(const std::vector<int>& s, int n) {
    std::int64_t rank = 0;
    int k = static_cast<int>(s.size());
    int prev = -1;
    for (int i = 0; i < k; ++i) {
        for (int v = prev + 1; v < s[static_cast<std::size_t>(i)]; ++v)
            rank += binom(n - 1 - v, k - 1 - i);
        prev = s[static_cast<std::size_t>(i)];
    }
    return static_cast<std::size_t>(rank);
}

/// Enumerates set partitions of {0..m-1} as restricted-growth strings,
/// in RGS lexicographic order. The callback receives (class_of, num_classes).
inline void for_each_partition(
    int m, const std::function<bool(const std::vector<int>&, int)>& fn) {
    if (m == 0) {
        fn({}, 0);
        return;
    }
    std::vector<int> a(static_cast<std::size_t>(m), 0);
    while (true) {
        int nclasses = 0;
        for (int j = 0; j < m; ++j) nclasses = std::max(nclasses, a[static_cast<std::size_t>(j)] + 1);
        if (!fn(a, nclasses)) return;
        // largest j whose digit can still grow (a[j] <= max of the prefix)
        int j = m - 1;
        while (j > 0) {
            int mx = 0;
            for (int t = 0; t < j; ++t) mx = std::max(mx, a[static_cast<std::size_t>(t)]);
            if (a[static_cast<std::size_t>(j)] <= mx) break;
            --j;
        }
        if (j == 0) break;
        ++a[static_cast<std::size_t>(j)];
        for (int t = j + 1; t < m; ++t) a[static_cast<std::size_t>(t)] = 0;
    }
}

/// Number of set partitions of an m-element set.
inline std::int64_t bell(int m) {
    std::int64_t count = 0;
    for_each_partition(m, [&](const std::vector<int>&, int) {
        ++count;
        return true;
    });
    return count;
}

/// All injective k-tuples over {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> injective_tuples(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    std::function<void()> rec = [&]() {
        if (static_cast<int>(cur.size()) == k) {
            out.push_back(cur);
            return;
        }
        for (int v = 0; v < n; ++v) {
            if (used[static_cast<std::size_t>(v)]) continue;
            used[static_cast<std::size_t>(v)] = true;
            cur.push_back(v);
            rec();
            cur.pop_back();
            used[static_cast<std::size_t>(v)] = false;
        }
    };
    if (k <= n) rec();
    return out;
}

}  // namespace orbitcsp::comb

#endif
