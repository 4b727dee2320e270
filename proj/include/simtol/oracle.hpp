#pragma once

#include "simtol/core.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Brute-force reference implementations. These are the ground truth the
// engine tests compare against, so they use plain full-matrix dynamic
// programming and exhaustive enumeration and stay independent of the
// engines' filter code. They cap their input sizes and fail loudly past the
// caps instead of silently running long.
namespace simtol::oracle {

// Full-matrix edit distance, no band, no early exit.
int full_edit_distance(std::u32string_view a, std::u32string_view b);

struct Pair {
    uint32_t a, b;      // record ids, a < b for self-joins
    double value;       // similarity, or the distance itself for ED
    bool operator==(const Pair& o) const { return a == o.a && b == o.b; }
    bool operator<(const Pair& o) const { return a != o.a ? a < o.a : b < o.b; }
};

std::vector<Pair> brute_join_ed(const std::vector<std::u32string>& records, int tau);
std::vector<Pair> brute_join_ed(const std::vector<std::u32string>& r,
                                const std::vector<std::u32string>& s, int tau);
std::vector<Pair> brute_join_eds(const std::vector<std::u32string>& records, double delta);

// Sets are ascending element-id vectors (duplicates already collapsed).
std::vector<Pair> brute_join_set(const std::vector<std::vector<uint32_t>>& records, SimFn fn,
                                 double delta);
std::vector<Pair> brute_join_set(const std::vector<std::vector<uint32_t>>& r,
                                 const std::vector<std::vector<uint32_t>>& s, SimFn fn,
                                 double delta);

struct SearchHit {
    uint32_t id;
    int ed;
    bool operator==(const SearchHit& o) const { return id == o.id && ed == o.ed; }
    bool operator<(const SearchHit& o) const { return id < o.id; }
};
std::vector<SearchHit> brute_search(const std::vector<std::u32string>& records,
                                    std::u32string_view query, int tau);

struct ExtractHit {
    uint32_t entity;
    // 1-based inclusive span: characters for ED/EDS, token indices otherwise.
    int start, end;
    double value;
    bool operator==(const ExtractHit& o) const {
        return entity == o.entity && start == o.start && end == o.end;
    }
    bool operator<(const ExtractHit& o) const {
        if (entity != o.entity) return entity < o.entity;
        if (start != o.start) return start < o.start;
        return end < o.end;
    }
};
std::vector<ExtractHit> brute_extract(const std::vector<std::u32string>& entities,
                                      std::u32string_view document, const SimilaritySpec& spec);

// Exhaustive minimum over all {0,1,2}^m vectors with the required sum.
// m > 12 throws. Returns nullopt when no vector reaches the target.
struct AllocationCost {
    std::vector<uint8_t> vec;
    long long cost;
};
std::optional<AllocationCost> brute_allocation(const std::vector<std::array<long long, 3>>& costs,
                                               long long target);

// Exhaustive minimum-weight selection of `count` pairwise-disjoint grams
// (position distance >= q) from a prefix of at most 13 grams.
struct PivotChoice {
    std::vector<size_t> picked; // indices into the prefix
    long long weight;
};
std::optional<PivotChoice> brute_pivots(const std::vector<std::pair<int, long long>>& pos_weight,
                                        int count, int q);

// Minimum edit distance between a gram and any substring of the window.
int brute_sed(std::u32string_view gram, std::u32string_view window);

} // namespace simtol::oracle
