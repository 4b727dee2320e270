#pragma once

#include "simtol/core.hpp"
#include "simtol/tokenize.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

namespace simtol::pivotal {

enum class PivotMode { Optimal, Random };

// Minimum-weight selection of `count` pairwise-disjoint grams (start
// positions at least q apart) from position-sorted prefix grams. Returns the
// picked indices, or nullopt when no disjoint selection of that size exists.
// Ties prefer the earlier gram.
std::optional<std::vector<size_t>> select_pivots(const std::vector<PositionalGram>& by_pos,
                                                 const std::vector<long long>& weights, int count,
                                                 int q);

// Banded substring edit distance between a gram and the window
// r[g_pos - tau, g_pos + |g| - 1 + tau], with rows over the gram and the
// alignment band |i - j + tau| <= tau. Returns the banded minimum when it is
// <= budget, nullopt otherwise.
std::optional<int> substring_ed(std::u32string_view gram, std::u32string_view r, int g_pos,
                                int tau, int budget);

// PRUNE (false) when the summed per-pivot substring edit distances exceed
// tau; each call is budgeted by tau minus the accumulated error.
bool alignment_filter(const std::vector<PositionalGram>& pivots, std::u32string_view r, int tau);

struct SearchHit {
    uint32_t id;
    int ed;
    bool operator==(const SearchHit& o) const { return id == o.id && ed == o.ed; }
    bool operator<(const SearchHit& o) const { return id < o.id; }
};

struct SearchStats {
    long long probed_entries = 0;
    long long candidates = 0; // pre-alignment, deduplicated
    long long results = 0;
    std::vector<uint32_t> candidate_ids; // filled when stats are requested
};

struct SearchOptions {
    PivotMode query_pivots = PivotMode::Optimal;
    bool alignment = true;
    int threads = 1; // used by the batch entry point
};

// Incremental prefix/pivotal inverted indexes for every threshold in
// [0, tau_max]. Prefixes are the q*tau+1 globally smallest grams (duplicate
// texts straddling the cutoff are completed into the same level); the
// pivotal side stores, per threshold, tau+1 pairwise-disjoint minimum-weight
// pivots of that prefix. Records too short to carry a threshold's prefix are
// kept aside and verified directly at query time.
class SearchIndex {
public:
    // Throws std::invalid_argument for records shorter than q.
    SearchIndex(std::vector<std::u32string> records, int q, int tau_max,
                PivotMode data_pivots = PivotMode::Optimal);

    std::vector<SearchHit> search(std::u32string_view query, int tau,
                                  const SearchOptions& opt = {},
                                  SearchStats* stats = nullptr) const;

    int tau_max() const { return tau_max_; }
    const GlobalOrder& order() const { return order_; }
    const std::vector<std::u32string>& records() const { return records_; }

    // Test hooks: per-record boundary structure.
    std::vector<std::u32string> prefix_texts(uint32_t id, int tau) const;   // union of I+ levels
    std::vector<std::u32string> pivot_texts(uint32_t id, int tau) const;    // I- level tau

private:
    struct Entry {
        uint32_t rec;
        int pos;
    };
    struct PostingList {
        std::vector<Entry> entries;                    // grouped by ascending record length
        std::vector<std::pair<int, int>> len_offsets;  // (record length, first index)
    };
    struct U32Hash {
        size_t operator()(const std::u32string& s) const;
    };
    using Index = std::unordered_map<std::u32string, PostingList, U32Hash>;

    std::vector<std::u32string> records_;
    int q_ = 2;
    int tau_max_ = 0;
    GlobalOrder order_;
    std::vector<Index> prefix_index_;               // I+ per level
    std::vector<Index> pivot_index_;                // I- per level (full pivot set)
    std::vector<int> support_;                      // largest usable threshold per record
    std::vector<std::vector<uint32_t>> last_rank_;  // last_rank_[tau][rec]: last(pre(r)) key
    std::vector<std::vector<uint32_t>> shorts_;     // shorts_[tau]: support == tau-1 records

    void append(Index& idx, const std::u32string& text, uint32_t rec, int pos);
    void probe_list(const PostingList& list, int len_lo, int len_hi,
                    const std::function<void(const Entry&)>& fn, long long* probed) const;
};

} // namespace simtol::pivotal
