#pragma once

#include "simtol/core.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace simtol::setjoin {

enum class Selection { AllOnes, Optimal, Greedy };

// Partition-framework parameters per Table 4.2.
long long max_mismatch(SimFn fn, double delta, long long l);                 // H_l
long long pair_mismatch(SimFn fn, double delta, long long l, long long s);  // H(l,s)
SizeBounds partner_size_range(SimFn fn, double delta, long long l);

// Homomorphic universe partition: identical elements land in identical
// slots for every set partitioned under the same scheme.
struct Scheme {
    int m = 1;
    std::function<int(uint32_t)> slot; // element id -> slot in [0, m)
};

Scheme hash_scheme(int m, const std::vector<uint64_t>& element_hashes);

using Fragment = std::vector<uint32_t>; // strictly ascending element ids

std::vector<Fragment> partition_set(const std::vector<uint32_t>& sorted_elements,
                                    const Scheme& scheme);
// All size-(k-1) subsets; the empty fragment has none, a singleton yields
// the empty fragment.
std::vector<Fragment> one_deletions(const Fragment& fragment);

// Per-slot probe costs: c0 = 0, c1 = |I[X^i]|, c2 = c1 + |D[X^i]| + sum |I[del(X^i)]|.
using CostTriple = std::array<long long, 3>;

struct Allocation {
    std::vector<uint8_t> v; // entries in {0,1,2}, sum == target
    long long cost = 0;
};

// Dynamic program over cost(i,j) = min_v cost(i-1, j-v) + c_v^i; nullopt
// when target > 2m (no allocation exists).
std::optional<Allocation> optimal_allocation(const std::vector<CostTriple>& costs,
                                             long long target);
// Heap-driven greedy with incremental costs; 2-approximation of optimal.
std::optional<Allocation> greedy_allocation(const std::vector<CostTriple>& costs,
                                            long long target);

// Ascending group floors l_k with l_1 = l_min and l_{k+1} = floor(l_k/alpha)+1;
// group k covers sizes [l_k, floor(l_k/alpha)]. alpha must lie in [1/2, 1].
std::vector<long long> group_boundaries(long long l_min, long long l_max, double alpha);

struct JoinPair {
    uint32_t a, b; // a < b for self-joins
    double value;
    bool operator<(const JoinPair& o) const { return a != o.a ? a < o.a : b < o.b; }
    bool operator==(const JoinPair& o) const { return a == o.a && b == o.b; }
};

struct JoinStats {
    long long probed_length = 0; // sum of probed inverted-list lengths
    long long candidates = 0;
    long long allocations = 0;
};

struct JoinOptions {
    Selection selection = Selection::Optimal;
    double alpha = 1.0;
    int threads = 1; // probe-side workers for the R-S join
};

// Records are sets of token strings; duplicate tokens within one record are
// collapsed. Throws std::invalid_argument for empty records or parameter
// violations (ALL_ONES requires alpha == 1).
std::vector<JoinPair> join_set(const std::vector<std::vector<std::string>>& records, SimFn fn,
                               double delta, const JoinOptions& opt = {},
                               JoinStats* stats = nullptr);
std::vector<JoinPair> join_set(const std::vector<std::vector<std::string>>& r,
                               const std::vector<std::vector<std::string>>& s, SimFn fn,
                               double delta, const JoinOptions& opt = {},
                               JoinStats* stats = nullptr);

} // namespace simtol::setjoin
